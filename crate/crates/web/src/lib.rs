//! Browser bindings. Every export returns a JSON string.

use dynrefl::checks::{self, AlgebraSignature};
use dynrefl::exactfield::CheckMode;
use dynrefl::models::{self, Eigenfunction, ExponentMode, FRatio, GammaKind, Parity};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn mode(exact: bool, seed: u32) -> CheckMode {
    if exact {
        CheckMode::Exact
    } else {
        CheckMode::Random { trials: 3, seed: seed as u64 }
    }
}

/// Unitarity, zero weight and the four dYBEs of the rational model.
pub fn structure_json(n: usize, exact: bool, seed: u32) -> Result<String, String> {
    if !(2..=4).contains(&n) {
        return Err("n must be 2, 3 or 4 in the browser".into());
    }
    let m = models::rational_model(n).map_err(|e| e.to_string())?;
    let rs = checks::structure_suite(&m.quad, AlgebraSignature::NEW, mode(exact, seed)).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&rs).expect("json"))
}

/// The Hamiltonian built from the rank-one and diagonal solutions.
pub fn hamiltonian_json(n: usize) -> Result<String, String> {
    if !(2..=5).contains(&n) {
        return Err("n must be between 2 and 5 in the browser".into());
    }
    let m = models::rational_model(n).map_err(|e| e.to_string())?;
    let reg = m.registry();
    let k = models::gamma_solution(reg, GammaKind::RankOne, &m.masses(), &FRatio::One).map_err(|e| e.to_string())?;
    let kk = models::gamma_solution(reg, GammaKind::Diagonal, &[], &FRatio::One).map_err(|e| e.to_string())?;
    let h = models::hamiltonian_from_pair(&k, &kk).map_err(|e| e.to_string())?;
    let closed = models::hamiltonian_closed_form(reg, &m.masses()).map_err(|e| e.to_string())?;
    let mut out = json!({"n": n, "text": h.to_text(), "equals_closed_form": h.equals(&closed)});
    if n == 2 {
        let r = models::reduce_n2(&h).map_err(|e| e.to_string())?;
        out["relative"] = json!(r.to_text());
    }
    Ok(out.to_string())
}

/// Relative residuals of the two-body Hamiltonian on a zero mode.
#[allow(clippy::too_many_arguments)]
pub fn eigen_json(k: u32, sin: bool, m1: f64, m2: f64, mu: f64, samples: usize, seed: u32, printed_exponent: bool) -> Result<String, String> {
    if !(m1 > 0.0 && m2 > 0.0 && mu > 0.0) || samples == 0 || samples > 1000 {
        return Err("masses and mu must be positive, samples between 1 and 1000".into());
    }
    let e = Eigenfunction {
        k,
        parity: if sin { Parity::Sin } else { Parity::Cos },
        m1,
        m2,
        mu,
        exponent: if printed_exponent { ExponentMode::Printed } else { ExponentMode::Derived },
    };
    let mut rows = Vec::with_capacity(samples);
    for q in models::sample_points(mu, samples, seed as u64) {
        let r = models::apply_relative_hamiltonian(&e, q).map_err(|e| e.to_string())?;
        rows.push(json!({"q": q, "value": e.value(q).map_err(|e| e.to_string())?, "relative": r.relative()}));
    }
    let worst = rows.iter().filter_map(|r| r["relative"].as_f64()).fold(0.0f64, f64::max);
    Ok(json!({"exponent": e.exponent.coefficient(mu), "max_relative_residual": worst, "rows": rows}).to_string())
}

#[wasm_bindgen]
pub fn verify_structure(n: usize, exact: bool, seed: u32) -> Result<String, JsValue> {
    structure_json(n, exact, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn hamiltonian(n: usize) -> Result<String, JsValue> {
    hamiltonian_json(n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn eigen_residual(k: u32, sin: bool, m1: f64, m2: f64, mu: f64, samples: usize, seed: u32, printed_exponent: bool) -> Result<String, JsValue> {
    eigen_json(k, sin, m1, m2, mu, samples, seed, printed_exponent).map_err(|e| JsValue::from_str(&e))
}
