//! Byte-deterministic report formatting.
//!
//! Reports are compared byte-for-byte in regression tests, so formatting is
//! pinned: JSON object keys appear in strictly increasing order and floats
//! are printed with 17 significant digits (`{:.16e}`), which round-trips any
//! double exactly.

/// Fixed float formatting for all reports: 17 significant digits, exponent
/// notation. Round-trip exact and identical across platforms.
pub fn fmt_f64(v: f64) -> String {
    debug_assert!(v.is_finite());
    format!("{v:.16e}")
}

/// Minimal JSON object writer. Keys must be pushed in strictly increasing
/// order; numbers only, which is all the report schemas contain.
pub struct JsonBuilder {
    buf: String,
    last_key: Option<String>,
}

impl JsonBuilder {
    pub fn new() -> JsonBuilder {
        JsonBuilder {
            buf: String::from("{"),
            last_key: None,
        }
    }

    fn key(&mut self, key: &str) {
        if let Some(prev) = &self.last_key {
            assert!(
                key > prev.as_str(),
                "JSON keys must be inserted in sorted order: {prev} then {key}"
            );
            self.buf.push(',');
        }
        self.buf.push('"');
        self.buf.push_str(key);
        self.buf.push_str("\":");
        self.last_key = Some(key.to_string());
    }

    pub fn f64(mut self, key: &str, v: f64) -> JsonBuilder {
        self.key(key);
        self.buf.push_str(&fmt_f64(v));
        self
    }

    pub fn u64(mut self, key: &str, v: u64) -> JsonBuilder {
        self.key(key);
        self.buf.push_str(&v.to_string());
        self
    }

    pub fn u128(mut self, key: &str, v: u128) -> JsonBuilder {
        self.key(key);
        self.buf.push_str(&v.to_string());
        self
    }

    pub fn finish(mut self) -> String {
        self.buf.push('}');
        self.buf
    }
}

impl Default for JsonBuilder {
    fn default() -> Self {
        JsonBuilder::new()
    }
}
