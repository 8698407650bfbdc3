//! Uniform sampling sources.
//!
//! Every source realizes the same primitive: each draw returns one element of
//! a fixed finite set, uniformly at random and independently of prior draws.
//! That uniformity is the premise of the whole guarantee, so two details are
//! pinned here and must never change silently:
//!
//! * The generator is PCG XSL RR 128/64 (`rand_pcg::Pcg64`), a named, seedable
//!   generator with portable, version-stable output.
//! * Its 32-byte seed is derived from `(base_seed, stream_id)` by a fixed
//!   SplitMix64 chain (see [`RngSeed`]), so identical seeds reproduce
//!   identical draw sequences on every platform.
//! * Uniform integers in `[0, n)` come from bitmask rejection on raw 64-bit
//!   outputs, never from a modulo, which would bias small residues.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::estimator::SampleId;

/// Seed for one draw stream. `base_seed` names the experiment, `stream_id`
/// the trial within it; distinct stream ids give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub base_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(base_seed: u64, stream_id: u64) -> RngSeed {
        RngSeed {
            base_seed,
            stream_id,
        }
    }

    /// Fixed, platform-independent derivation of the generator seed:
    /// one SplitMix64 step over `base_seed`, xor the stream id into the
    /// resulting state, then four further SplitMix64 outputs become the
    /// 32 seed bytes (little-endian).
    fn seed_bytes(self) -> [u8; 32] {
        let mut s = self.base_seed;
        let mixed_base = splitmix64(&mut s);
        let mut t = self.stream_id ^ mixed_base;
        let mut out = [0u8; 32];
        for chunk in out.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut t).to_le_bytes());
        }
        out
    }

    pub(crate) fn rng(self) -> Pcg64 {
        Pcg64::from_seed(self.seed_bytes())
    }
}

/// SplitMix64 step (Vigna); the standard 64-bit seed expander.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform index in `[0, n)` by bitmask rejection: mask raw 64-bit outputs
/// down to the smallest all-ones mask covering `n-1`, retry until in range.
/// Unbiased by construction; expected retries below one.
fn uniform_index(rng: &mut Pcg64, n: u64, mask: u64) -> u64 {
    debug_assert!(n >= 1);
    loop {
        let v = rng.next_u64() & mask;
        if v < n {
            return v;
        }
    }
}

fn mask_for(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::MAX >> (n - 1).leading_zeros()
    }
}

/// A uniform random-sampling source over a fixed finite set.
pub trait SamplingSource {
    /// Draws one element uniformly at random, independently of prior draws.
    fn draw(&mut self) -> Result<SampleId>;

    /// The exact set size, when the source knows it by construction.
    /// `None` means the source cannot vouch for it (so the source cannot be
    /// used to verify the guarantee).
    fn known_cardinality(&self) -> Option<u64>;
}

/// Synthetic set `{0, .., n-1}` with ids drawn uniformly.
pub struct SyntheticSource {
    n: u64,
    mask: u64,
    rng: Pcg64,
}

impl SyntheticSource {
    pub fn new(n: u64, seed: RngSeed) -> Result<SyntheticSource> {
        if n == 0 {
            return Err(Error::domain("synthetic source needs n >= 1"));
        }
        Ok(SyntheticSource {
            n,
            mask: mask_for(n),
            rng: seed.rng(),
        })
    }
}

impl SamplingSource for SyntheticSource {
    fn draw(&mut self) -> Result<SampleId> {
        Ok(SampleId::Token(uniform_index(&mut self.rng, self.n, self.mask)))
    }

    fn known_cardinality(&self) -> Option<u64> {
        Some(self.n)
    }
}

/// How a sampled line is identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityMode {
    /// The line index is the element: the set size is the line count and
    /// uniformity holds by construction.
    Position,
    /// The line content is the element. Uniform over distinct contents only
    /// if all lines are distinct; duplicated lines skew the draw toward
    /// their content and void the guarantee (the loader reports the count).
    Content,
}

impl fmt::Display for IdentityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityMode::Position => write!(f, "position"),
            IdentityMode::Content => write!(f, "content"),
        }
    }
}

/// Newline-delimited UTF-8 file loaded fully into memory (draws need random
/// access), sampled uniformly by line. Trailing-newline tolerant.
pub struct FileSource {
    lines: Vec<Arc<str>>,
    mode: IdentityMode,
    distinct_lines: u64,
    rng: Pcg64,
    mask: u64,
}

impl FileSource {
    pub fn load(path: &Path, mode: IdentityMode, seed: RngSeed) -> Result<FileSource> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let lines: Vec<Arc<str>> = text.lines().map(Arc::from).collect();
        if lines.is_empty() {
            return Err(Error::EmptyFile {
                path: path.display().to_string(),
            });
        }
        let distinct_lines = lines
            .iter()
            .collect::<std::collections::HashSet<_>>()
            .len() as u64;
        let mask = mask_for(lines.len() as u64);
        Ok(FileSource {
            lines,
            mode,
            distinct_lines,
            rng: seed.rng(),
            mask,
        })
    }

    pub fn line_count(&self) -> u64 {
        self.lines.len() as u64
    }

    pub fn distinct_line_count(&self) -> u64 {
        self.distinct_lines
    }

    /// Lines minus distinct contents; nonzero under `Content` identity means
    /// the draw is not uniform over the target set.
    pub fn duplicate_count(&self) -> u64 {
        self.line_count() - self.distinct_lines
    }
}

impl SamplingSource for FileSource {
    fn draw(&mut self) -> Result<SampleId> {
        let idx = uniform_index(&mut self.rng, self.lines.len() as u64, self.mask);
        Ok(match self.mode {
            IdentityMode::Position => SampleId::Token(idx),
            IdentityMode::Content => SampleId::Content(self.lines[idx as usize].clone()),
        })
    }

    fn known_cardinality(&self) -> Option<u64> {
        match self.mode {
            IdentityMode::Position => Some(self.line_count()),
            // With duplicates present the draw is not uniform over the
            // distinct-content set, so the size is not vouched for.
            IdentityMode::Content if self.duplicate_count() == 0 => Some(self.distinct_lines),
            IdentityMode::Content => None,
        }
    }
}
