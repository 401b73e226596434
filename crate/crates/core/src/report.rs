use serde::{Deserialize, Serialize};

use crate::exactfield::CheckMode;

/// First offending entry of a failed identity. Indices are 1-based per leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub row: Vec<usize>,
    pub col: Vec<usize>,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub anchor: String,
    pub mode: String,
    pub seed: Option<u64>,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub millis: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>, anchor: impl Into<String>, mode: CheckMode) -> Self {
        Self {
            identity: identity.into(),
            anchor: anchor.into(),
            mode: mode.label().to_string(),
            seed: mode.seed(),
            pass: true,
            witness: None,
            millis: 0,
            notes: Vec::new(),
        }
    }

    pub fn fail(mut self, witness: Option<Witness>) -> Self {
        self.pass = false;
        if self.witness.is_none() {
            self.witness = witness;
        }
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    /// Folds a sub-check into this one: fails if it failed, keeps the first witness.
    pub fn absorb(mut self, other: &VerificationReport) -> Self {
        if !other.pass {
            self.pass = false;
            if self.witness.is_none() {
                self.witness = other.witness.clone();
            }
            self.notes.push(format!("failed: {}", other.identity));
        }
        self.millis += other.millis;
        self
    }

    /// JSON without the wall-clock field, for reproducibility comparisons.
    pub fn stable_json(&self) -> String {
        let mut c = self.clone();
        c.millis = 0;
        serde_json::to_string(&c).expect("report serializes")
    }
}

/// Runs `f` and stamps the elapsed milliseconds on its report.
pub fn timed<F>(f: F) -> VerificationReport
where
    F: FnOnce() -> VerificationReport,
{
    let start = web_time_now();
    let mut r = f();
    r.millis += elapsed_ms(start);
    r
}

#[cfg(not(target_arch = "wasm32"))]
fn web_time_now() -> std::time::Instant {
    std::time::Instant::now()
}

#[cfg(not(target_arch = "wasm32"))]
fn elapsed_ms(start: std::time::Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

// std::time::Instant panics on wasm32-unknown-unknown.
#[cfg(target_arch = "wasm32")]
fn web_time_now() {}

#[cfg(target_arch = "wasm32")]
fn elapsed_ms(_: ()) -> u64 {
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_keys() {
        let r = VerificationReport::new("unitarity", "A12 A21 = I", CheckMode::random(7)).fail(Some(Witness {
            row: vec![1, 2],
            col: vec![2, 1],
            residual: "mu".into(),
        }));
        let v: serde_json::Value = serde_json::from_str(&r.stable_json()).unwrap();
        for k in ["identity", "anchor", "mode", "seed", "pass", "witness", "millis"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
        assert_eq!(v["seed"], 7);
        assert_eq!(v["witness"]["row"][1], 2);
    }
}
