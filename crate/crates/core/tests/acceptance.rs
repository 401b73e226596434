//! One pass/fail line per acceptance criterion.
//!
//! The lines go to stderr even when output is captured.

use std::io::Write;
use std::time::{Duration, Instant};

use dynrefl::builders::{self, QuantumShift, Side, SpectralMap, Strictness};
use dynrefl::checks::{self, AlgebraSignature, ClassicalForm};
use dynrefl::exactfield::{CheckMode, RationalFunction};
use dynrefl::models::{self, ExponentMode, FRatio, GammaKind, Parity, RationalModel};
use dynrefl::report::VerificationReport;
use dynrefl::tensor::{aux_legs, RfMatrix};

const EIGEN_REL_TOL: f64 = 1e-9;
const EIGEN_SAMPLES: usize = 20;
const EIGEN_SEED: u64 = 20;
const RANDOM_SEED: u64 = 7;
const STRUCTURE_BUDGET: Duration = Duration::from_secs(30);
const RANDOM_BUDGET: Duration = Duration::from_secs(10);
const PIPELINE_BUDGET: Duration = Duration::from_secs(60);

const NEW: AlgebraSignature = AlgebraSignature::NEW;

struct Line {
    pass: bool,
    detail: String,
}

fn all_pass(rs: &[VerificationReport]) -> bool {
    rs.iter().all(|r| r.pass)
}

fn failures(rs: &[VerificationReport]) -> String {
    let f: Vec<&str> = rs.iter().filter(|r| !r.pass).map(|r| r.identity.as_str()).collect();
    if f.is_empty() {
        String::new()
    } else {
        format!(" failing: {}", f.join(", "))
    }
}

fn model(n: usize) -> RationalModel {
    models::rational_model(n).unwrap()
}

fn gamma(m: &RationalModel, kind: GammaKind) -> RfMatrix {
    models::gamma_solution(m.registry(), kind, &m.masses(), &FRatio::One).unwrap()
}

fn criterion_1() -> Line {
    let t = Instant::now();
    let mut rs = Vec::new();
    for n in [2, 3] {
        rs.extend(model(n).certify(CheckMode::Exact).unwrap());
    }
    let exact = t.elapsed();
    let t = Instant::now();
    let random = model(4).certify(CheckMode::Random { trials: 3, seed: RANDOM_SEED }).unwrap();
    let rt = t.elapsed();
    let pass = all_pass(&rs) && all_pass(&random) && exact < STRUCTURE_BUDGET && rt < RANDOM_BUDGET;
    Line {
        pass,
        detail: format!(
            "{} exact checks at n=2,3 in {:.2?}, {} random checks at n=4 in {:.2?}{}",
            rs.len(),
            exact,
            random.len(),
            rt,
            failures(&[rs, random].concat())
        ),
    }
}

fn criterion_2() -> Line {
    let mut rs = Vec::new();
    for n in [2, 3] {
        let m = model(n);
        for kind in GammaKind::ALL {
            rs.push(checks::check_reflection(&gamma(&m, kind), &m.quad, NEW, CheckMode::Exact).unwrap());
        }
    }
    Line { pass: all_pass(&rs), detail: format!("3 solutions x n=2,3 exact{}", failures(&rs)) }
}

fn criterion_3() -> Line {
    let mut rs = Vec::new();
    let mut agreement = Vec::new();
    for n in [2, 3] {
        let m = model(n);
        let (q, post) = builders::build_bcd_from_a(m.printed_a(), &SpectralMap::Absent, Strictness::Strict).unwrap();
        rs.push(post);
        rs.extend(checks::check_dybe_all(&q, NEW, CheckMode::Exact).unwrap());
        rs.push(checks::check_unitarity(&q, CheckMode::Exact).unwrap());
        for (name, built, printed) in [("B", &q.b, m.printed_b()), ("C", &q.c, m.printed_c()), ("D", &q.d, m.printed_d())] {
            let r = builders::entrywise_report(name, built, printed).unwrap();
            agreement.push(format!("n={n} {name}: {} ({} differing entries)", if r.pass { "agrees" } else { "differs" }, r.notes.len()));
        }
    }
    Line { pass: all_pass(&rs), detail: format!("dYBE a-d and unitarity exact at n=2,3; {}{}", agreement.join("; "), failures(&rs)) }
}

fn criterion_4() -> Line {
    let t = Instant::now();
    let m = model(2);
    let tl = builders::monodromy(m.printed_a(), 1).unwrap();
    let tcal = builders::build_transposed_lax(&tl, &SpectralMap::Absent).unwrap();
    let g = gamma(&m, GammaKind::Diagonal);
    let k = builders::build_k_from_t_gamma(&tl, &g, QuantumShift::Minus).unwrap();
    let rs = vec![
        checks::check_rll(&tl, m.printed_a(), CheckMode::Exact).unwrap(),
        checks::check_crossed_exchange(&tl, &tcal, &m.quad, CheckMode::Exact).unwrap(),
        checks::check_reflection(&k, &m.quad, NEW, CheckMode::Exact).unwrap(),
    ];
    let plus = builders::build_k_from_t_gamma(&tl, &g, QuantumShift::Plus).unwrap();
    let plus_pass = checks::check_reflection(&plus, &m.quad, NEW, CheckMode::Exact).unwrap().pass;
    let el = t.elapsed();
    Line {
        pass: all_pass(&rs) && el < PIPELINE_BUDGET,
        detail: format!(
            "RLL, transposed and crossed exchange, K = T gamma(q-hq) Tcal reflection at n=2 in {el:.2?}; gamma(q+hq) variant {}{}",
            if plus_pass { "passes" } else { "fails" },
            failures(&rs)
        ),
    }
}

fn criterion_5() -> Line {
    let m = model(2);
    let amb = {
        let mut a = aux_legs(&["1"], 2);
        a.extend(checks::quantum_legs(&["a"], 2));
        a
    };
    let mut rs = Vec::new();
    for (l, j, alpha) in [(&m.quad.c, &m.quad.d, 1), (&m.quad.a, &m.quad.b, -1)] {
        let l = l.place(&["1", "a"], &amb).unwrap();
        let j = j.place(&["1", "a"], &amb).unwrap();
        rs.push(checks::check_coaction(&l, &j, &m.quad, alpha, CheckMode::Exact).unwrap());
        for kind in GammaKind::ALL {
            let kt = builders::coaction_dress(&gamma(&m, kind), &l, &j, alpha).unwrap();
            rs.push(checks::check_reflection(&kt, &m.quad, NEW, CheckMode::Exact).unwrap());
        }
    }
    Line { pass: all_pass(&rs), detail: format!("examples alpha=1 and alpha=-1, premises a-e and dressed K for 3 solutions{}", failures(&rs)) }
}

fn criterion_6() -> Line {
    let m = model(2);
    let mut rs = Vec::new();
    for kind in GammaKind::ALL {
        let k = gamma(&m, kind);
        for side in [Side::Left, Side::Right] {
            let fz = builders::fuse(&k, &k, &m.quad, side).unwrap();
            rs.push(builders::check_fused(&fz, &k, CheckMode::Exact).unwrap());
        }
    }
    rs.push(builders::check_fused_unitarity(&m.quad, CheckMode::Exact).unwrap());
    rs.push(builders::check_fusion_order(&m.quad, CheckMode::Exact).unwrap());
    Line { pass: all_pass(&rs), detail: format!("left and right fusion for 3 solutions, fused unitarity, order independence{}", failures(&rs)) }
}

fn criterion_7() -> Line {
    let m = model(2);
    let mut rs = Vec::new();
    for spaces in [2, 3] {
        let (qm, sm) = builders::build_dressing_qs(&m.quad, spaces).unwrap();
        rs.push(checks::check_dressing(&qm, &sm, &m.quad, CheckMode::Exact).unwrap());
    }
    Line { pass: all_pass(&rs), detail: format!("Q, S relations for 2 and 3 spaces{}", failures(&rs)) }
}

fn criterion_8() -> Line {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [2, 3, 4] {
        let m = model(n);
        let k = gamma(&m, GammaKind::RankOne);
        let kk = gamma(&m, GammaKind::Diagonal);
        let h = models::hamiltonian_from_pair(&k, &kk).unwrap();
        let closed = models::hamiltonian_closed_form(m.registry(), &m.masses()).unwrap();
        let eq = h.equals(&closed);
        ok &= eq;
        detail.push(format!("n={n} {}", if eq { "equal" } else { "differ" }));
    }
    let m = model(2);
    let h = models::hamiltonian_closed_form(m.registry(), &m.masses()).unwrap();
    let reduced = models::reduce_n2(&h).unwrap();
    let eq = reduced.equals(&models::printed_reduced_hamiltonian().unwrap());
    ok &= eq;
    detail.push(format!("n=2 reduction {}", if eq { "matches" } else { "differs" }));
    Line { pass: ok, detail: detail.join(", ") }
}

fn criterion_9() -> Line {
    let mut rs = Vec::new();
    for n in [2, 3, 4] {
        let m = model(n);
        let h = models::hamiltonian_closed_form(m.registry(), &m.masses()).unwrap();
        rs.push(checks::check_commutator_zero(&format!("[H, P] n={n}"), &h, &models::total_translation(m.registry()), CheckMode::Exact).unwrap());
        rs.push(checks::check_commutator_zero(&format!("[H, H] n={n}"), &h, &h, CheckMode::Exact).unwrap());
    }
    let m = model(2);
    let h = models::hamiltonian_closed_form(m.registry(), &m.masses()).unwrap();
    let hf = models::fused_hamiltonian(&m).unwrap();
    let exp = checks::check_commutator_zero("[H, H fused]", &h, &hf, CheckMode::Exact).unwrap();
    Line {
        pass: all_pass(&rs),
        detail: format!(
            "[H, e^(2 mu sum d)] = 0 and [H, H] = 0 at n=2,3,4; fused-trace experiment: commutator {}{}",
            if exp.pass { "vanishes" } else { "does not vanish" },
            failures(&rs)
        ),
    }
}

fn worst(e: &models::Eigenfunction) -> f64 {
    models::sample_points(e.mu, EIGEN_SAMPLES, EIGEN_SEED)
        .into_iter()
        .map(|q| models::apply_relative_hamiltonian(e, q).unwrap().relative())
        .fold(0.0, f64::max)
}

fn criterion_10() -> Line {
    let mut equal = 0.0f64;
    let mut derived = 0.0f64;
    let mut paper = 0.0f64;
    for k in 0..4 {
        for parity in [Parity::Sin, Parity::Cos] {
            for exponent in [ExponentMode::Derived, ExponentMode::Printed] {
                let e = models::Eigenfunction { k, parity, m1: 1.5, m2: 1.5, mu: 1.0, exponent };
                equal = equal.max(worst(&e));
            }
            let e = models::Eigenfunction { k, parity, m1: 2.0, m2: 1.0, mu: 1.0, exponent: ExponentMode::Derived };
            derived = derived.max(worst(&e));
            let e = models::Eigenfunction { exponent: ExponentMode::Printed, ..e };
            paper = paper.max(worst(&e));
        }
    }
    Line {
        pass: equal <= EIGEN_REL_TOL && derived <= EIGEN_REL_TOL,
        detail: format!(
            "max relative residual: equal masses {equal:.2e}, derived exponent (2,1) {derived:.2e}, printed exponent (2,1) {paper:.2e} (tolerance {EIGEN_REL_TOL:.0e})"
        ),
    }
}

fn criterion_11() -> Line {
    let mut rs = Vec::new();
    let mut printed = Vec::new();
    for n in [2, 3] {
        let m = model(n);
        rs.push(checks::check_classical_limit(&m.quad, ClassicalForm::Derived, CheckMode::Exact).unwrap());
        printed.push(checks::check_classical_limit(&m.quad, ClassicalForm::Printed, CheckMode::Exact).unwrap().pass);
    }
    Line {
        pass: all_pass(&rs),
        detail: format!(
            "classical equations a-d at n=2,3 exact; printed sign of the c-derivative terms in equation c {}{}",
            if printed.iter().all(|&p| p) { "also passes" } else { "fails" },
            failures(&rs)
        ),
    }
}

fn suite(n: usize, mode: CheckMode) -> Vec<VerificationReport> {
    let m = model(n);
    let mut rs = m.certify(mode).unwrap();
    for kind in GammaKind::ALL {
        rs.push(checks::check_reflection(&gamma(&m, kind), &m.quad, NEW, mode).unwrap());
    }
    rs.push(checks::check_classical_limit(&m.quad, ClassicalForm::Derived, mode).unwrap());
    let (qm, sm) = builders::build_dressing_qs(&m.quad, 2).unwrap();
    rs.push(checks::check_dressing(&qm, &sm, &m.quad, mode).unwrap());
    rs
}

fn strip(rs: &[VerificationReport]) -> Vec<String> {
    rs.iter().map(|r| r.stable_json()).collect()
}

fn criterion_12() -> Line {
    let exact = suite(2, CheckMode::Exact);
    let random = suite(2, CheckMode::Random { trials: 3, seed: RANDOM_SEED });
    let again = suite(2, CheckMode::Random { trials: 3, seed: RANDOM_SEED });
    let agree = exact.iter().zip(&random).all(|(a, b)| a.pass == b.pass);
    let reproducible = strip(&random) == strip(&again);
    Line {
        pass: agree && reproducible && exact.len() == random.len(),
        detail: format!(
            "{} identities: exact and random verdicts {}; seeded reruns {}",
            exact.len(),
            if agree { "agree" } else { "disagree" },
            if reproducible { "bit-identical" } else { "differ" }
        ),
    }
}

type Criterion = (&'static str, fn() -> Line);

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("structure suite", criterion_1),
        ("reflection solutions", criterion_2),
        ("B, C, D from A", criterion_3),
        ("Lax pipeline", criterion_4),
        ("coactions", criterion_5),
        ("fusion", criterion_6),
        ("dressing", criterion_7),
        ("Hamiltonian", criterion_8),
        ("commutation", criterion_9),
        ("zero modes", criterion_10),
        ("classical limit", criterion_11),
        ("infrastructure", criterion_12),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let line = f();
        // Written to the handle directly so the lines survive libtest's capture.
        let _ = writeln!(
            std::io::stderr(),
            "criterion {:>2} [{}] {}: {}",
            i + 1,
            if line.pass { "PASS" } else { "FAIL" },
            name,
            line.detail
        );
        if !line.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn exact_rational_arithmetic_is_used() {
    // Guards against a float sneaking into the symbolic path.
    let m = model(2);
    let h = models::hamiltonian_closed_form(m.registry(), &m.masses()).unwrap();
    let c = h.coefficient(&[2, 0]);
    let expect = RationalFunction::parse(m.registry(), "m1^2/((q1-q2+mu)^1)").unwrap();
    assert_eq!(c, expect);
}
