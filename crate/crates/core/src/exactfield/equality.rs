use serde::{Deserialize, Serialize};

use super::modp::{self, Sampler, PRIME};
use super::rational::RationalFunction;
use super::FieldError;

/// Resamples allowed per evaluation point before giving up.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Random { trials: u32, seed: u64 },
}

impl CheckMode {
    pub fn random(seed: u64) -> Self {
        CheckMode::Random { trials: 3, seed }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            CheckMode::Exact => None,
            CheckMode::Random { seed, .. } => Some(*seed),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CheckMode::Exact => "exact",
            CheckMode::Random { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityCertificate {
    pub equal: bool,
    pub mode: CheckMode,
    /// Probability that a false identity survives every trial.
    pub failure_bound: f64,
    /// Sample where the two sides differed, in registry order.
    pub witness: Option<Vec<u64>>,
}

/// Schwartz-Zippel bound `(degree / p)^trials`.
pub fn failure_bound(degree: u32, trials: u32) -> f64 {
    (degree as f64 / PRIME as f64).powi(trials as i32)
}

/// Draws a point at which `ok` holds, resampling at most [`MAX_RESAMPLES`] times.
pub fn sample_avoiding<F>(sampler: &mut Sampler, len: usize, mut ok: F) -> Result<Vec<u64>, FieldError>
where
    F: FnMut(&[u64]) -> bool,
{
    for _ in 0..=MAX_RESAMPLES {
        let pt = sampler.point(len);
        if ok(&pt) {
            return Ok(pt);
        }
    }
    Err(FieldError::ResampleExhausted)
}

pub fn rf_equal(a: &RationalFunction, b: &RationalFunction, mode: CheckMode) -> Result<EqualityCertificate, FieldError> {
    if !a.registry().same_as(b.registry()) {
        return Err(FieldError::RegistryMismatch);
    }
    match mode {
        CheckMode::Exact => Ok(EqualityCertificate { equal: a == b, mode, failure_bound: 0.0, witness: None }),
        CheckMode::Random { trials, seed } => {
            let (na, da) = a.degrees();
            let (nb, db) = b.degrees();
            let degree = (na + db).max(nb + da).max(1);
            let mut sampler = Sampler::new(seed);
            let len = a.registry().len();
            for _ in 0..trials {
                let mut vals = (0, 0);
                let pt = sample_avoiding(&mut sampler, len, |pt| match (a.eval_mod(pt), b.eval_mod(pt)) {
                    (Ok(x), Ok(y)) => {
                        vals = (x, y);
                        true
                    }
                    _ => false,
                })?;
                if modp::sub(vals.0, vals.1) != 0 {
                    return Ok(EqualityCertificate { equal: false, mode, failure_bound: 0.0, witness: Some(pt) });
                }
            }
            Ok(EqualityCertificate { equal: true, mode, failure_bound: failure_bound(degree, trials), witness: None })
        }
    }
}
