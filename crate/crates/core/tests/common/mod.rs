//! Test-only high-precision arithmetic oracle.
//!
//! Double-double numbers (an unevaluated sum of two doubles, ~31 significant
//! decimal digits) with exp/ln/sqrt/pow built from error-free transforms,
//! argument scaling, and Newton iteration. Deliberately independent of the
//! library under test: different representation, different algorithms, no
//! shared code. Used to verify every closed-form bound to far better than
//! the 1e-12 relative tolerance the acceptance criteria demand.

#![allow(dead_code)]

/// Double-double value `hi + lo`, normalized so `hi = fl(hi + lo)`.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_u64(x: u64) -> Dd {
        // Either half is exactly representable; the sum re-normalizes.
        let hi = (x >> 32) as f64 * 4294967296.0;
        let lo = (x & 0xffff_ffff) as f64;
        Dd::from_f64(hi).add(Dd::from_f64(lo))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e }.add(Dd::from_f64(q3))
    }

    /// Newton iteration from the double-precision seed.
    pub fn sqrt(self) -> Dd {
        assert!(self.hi >= 0.0, "sqrt of negative dd");
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let mut y = Dd::from_f64(self.hi.sqrt());
        for _ in 0..3 {
            y = y.add(self.div(y)).mul(Dd::from_f64(0.5));
        }
        y
    }

    /// exp by halving the argument below 2^-10, summing the Maclaurin
    /// series, and squaring back up.
    pub fn exp(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let mut halvings = 0u32;
        let mut scale = 1.0f64;
        while self.hi.abs() / scale > 9.765625e-4 {
            scale *= 2.0;
            halvings += 1;
            assert!(halvings < 64, "exp argument out of oracle range");
        }
        let r = Dd {
            hi: self.hi / scale,
            lo: self.lo / scale,
        };
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut n = 1u64;
        loop {
            term = term.mul(r).div(Dd::from_u64(n));
            sum = sum.add(term);
            if term.hi.abs() < 1e-40 {
                break;
            }
            n += 1;
            assert!(n < 64, "exp series failed to converge");
        }
        let mut y = sum;
        for _ in 0..halvings {
            y = y.mul(y);
        }
        y
    }

    /// ln by Newton iteration on exp: y <- y + x*exp(-y) - 1.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive dd");
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..3 {
            y = y.add(self.mul(y.neg().exp())).sub(Dd::ONE);
        }
        y
    }

    /// a^b as exp(b * ln a); requires a > 0.
    pub fn powf(self, exponent: Dd) -> Dd {
        exponent.mul(self.ln()).exp()
    }

    /// Exact ceiling as an unsigned integer; valid for 0 <= value < 2^127.
    pub fn ceil_u128(self) -> u128 {
        assert!(self.hi >= 0.0);
        let hi_ceil = self.hi.ceil();
        if hi_ceil == self.hi {
            // hi is integral; the low word decides.
            let base = self.hi as u128;
            if self.lo > 0.0 {
                base + 1
            } else {
                base
            }
        } else {
            // A non-integral hi is at least one ulp from any integer while
            // |lo| is at most half an ulp, so hi alone decides.
            hi_ceil as u128
        }
    }
}

/// Relative error of a double against the oracle value.
pub fn rel_err(actual: f64, oracle: Dd) -> f64 {
    let o = oracle.to_f64();
    if o == 0.0 {
        return if actual == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (Dd::from_f64(actual).sub(oracle).to_f64() / o).abs()
}

// ---- oracle versions of every closed-form bound ----

/// k_err = 4/delta^2 * ln(3/p)
pub fn k_err(delta: f64, p_err: f64) -> Dd {
    let d = Dd::from_f64(delta);
    Dd::from_f64(4.0)
        .div(d.mul(d))
        .mul(Dd::from_f64(3.0).div(Dd::from_f64(p_err)).ln())
}

/// Exact ceil(sqrt(x)) of a double, via dd sqrt with integer snapping.
pub fn ceil_sqrt(x: f64) -> u128 {
    if x <= 0.0 {
        return 0;
    }
    let s = Dd::from_f64(x).sqrt();
    let nearest = s.hi.round();
    // The true sqrt of a double is either an exact integer or at least
    // ~2^-53 * s away from one; the dd error is ~1e-30 * s, so snapping at
    // 1e-18 * s is unambiguous.
    if s.sub(Dd::from_f64(nearest)).to_f64().abs() <= 1e-18 * s.hi.max(1.0) {
        nearest as u128
    } else {
        s.ceil_u128()
    }
}

/// min(n, 2*ceil(sqrt(fl(k*n)))) + ceil(k), ceilings exact. The square root
/// argument is the double-precision product, which is what the budget is
/// defined on.
pub fn sample_budget(n: u64, k: f64) -> u128 {
    let root = ceil_sqrt(k * n as f64);
    (n as u128).min(2 * root) + k.ceil() as u128
}

/// exp(-delta^2 * e / 2)
pub fn chernoff_lower(delta: f64, e: f64) -> Dd {
    let d = Dd::from_f64(delta);
    d.mul(d)
        .mul(Dd::from_f64(e))
        .div(Dd::from_f64(2.0))
        .neg()
        .exp()
}

/// exp(-delta^2 * e / (2 + delta))
pub fn chernoff_upper(delta: f64, e: f64) -> Dd {
    let d = Dd::from_f64(delta);
    d.mul(d)
        .mul(Dd::from_f64(e))
        .div(Dd::from_f64(2.0).add(d))
        .neg()
        .exp()
}

/// (p/3) ^ (2 delta^2 / (delta_err^2 (1 + delta)))
pub fn overestimate_tail(delta: f64, delta_err: f64, p_err: f64) -> Dd {
    let d = Dd::from_f64(delta);
    let de = Dd::from_f64(delta_err);
    let exponent = Dd::from_f64(2.0)
        .mul(d)
        .mul(d)
        .div(de.mul(de).mul(Dd::ONE.add(d)));
    Dd::from_f64(p_err).div(Dd::from_f64(3.0)).powf(exponent)
}

/// (p/3) ^ (4 delta^2 / (delta_err^2 (2 - delta)))
pub fn underestimate_tail(delta: f64, delta_err: f64, p_err: f64) -> Dd {
    let d = Dd::from_f64(delta);
    let de = Dd::from_f64(delta_err);
    let exponent = Dd::from_f64(4.0)
        .mul(d)
        .mul(d)
        .div(de.mul(de).mul(Dd::from_f64(2.0).sub(d)));
    Dd::from_f64(p_err).div(Dd::from_f64(3.0)).powf(exponent)
}

/// (p/3) ^ (1/delta_err^2) = exp(-k_err/4)
pub fn repeat_shortfall_tail(delta_err: f64, p_err: f64) -> Dd {
    let de = Dd::from_f64(delta_err);
    Dd::from_f64(p_err)
        .div(Dd::from_f64(3.0))
        .powf(Dd::ONE.div(de.mul(de)))
}

/// Closed-form Wilson upper bound at a pinned normal quantile.
pub fn wilson_upper(successes: u64, trials: u64, z: f64) -> Dd {
    let n = Dd::from_u64(trials);
    let z = Dd::from_f64(z);
    let p = Dd::from_u64(successes).div(n);
    let z2 = z.mul(z);
    let center = p.add(z2.div(Dd::from_f64(2.0).mul(n)));
    let variance = p
        .mul(Dd::ONE.sub(p))
        .div(n)
        .add(z2.div(Dd::from_f64(4.0).mul(n).mul(n)));
    let radius = z.mul(variance.sqrt());
    center.add(radius).div(Dd::ONE.add(z2.div(n)))
}

/// Two-sided 95% and 99% standard normal quantiles (textbook constants for
/// the oracle; the library computes its own from first principles).
pub const Z_95: f64 = 1.959963984540054;
pub const Z_99: f64 = 2.5758293035489004;
