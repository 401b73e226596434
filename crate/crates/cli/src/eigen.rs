//! Zero-mode sweep of the two-body relative Hamiltonian.

use dynrefl::models::{self, Eigenfunction, Residual};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct EigenSummary {
    pub eigenfunction: Eigenfunction,
    pub samples: usize,
    pub seed: u64,
    pub max_relative_residual: f64,
    pub worst_q: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

pub fn sweep(e: &Eigenfunction, samples: usize, seed: u64) -> Result<Vec<(Residual, f64)>, models::ModelError> {
    models::sample_points(e.mu, samples, seed)
        .into_par_iter()
        .map(|q| Ok((models::apply_relative_hamiltonian(e, q)?, e.value(q)?)))
        .collect()
}

pub fn summarize(e: &Eigenfunction, rows: &[(Residual, f64)], seed: u64, tolerance: f64) -> EigenSummary {
    let (worst_q, max) = rows
        .iter()
        .map(|(r, _)| (r.q, r.relative()))
        .fold((f64::NAN, 0.0f64), |acc, x| if x.1 > acc.1 || acc.0.is_nan() { x } else { acc });
    EigenSummary {
        eigenfunction: *e,
        samples: rows.len(),
        seed,
        max_relative_residual: max,
        worst_q,
        tolerance,
        within_tolerance: max <= tolerance,
    }
}

pub fn write_csv<W: std::io::Write>(w: W, rows: &[(Residual, f64)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["q", "value", "residual", "relative"])?;
    for (r, v) in rows {
        w.write_record([format!("{:e}", r.q), format!("{v:e}"), format!("{:e}", r.value), format!("{:e}", r.relative())])?;
    }
    w.flush()?;
    Ok(())
}
