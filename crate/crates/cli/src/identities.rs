//! Named identities and the suites built from them.

use dynrefl::builders::{self, QuantumShift, Side, SpectralMap, Strictness};
use dynrefl::checks::{self, AlgebraSignature, ClassicalForm, DybeVariant};
use dynrefl::exactfield::{CheckMode, Polynomial, RationalFunction};
use dynrefl::models::{self, FRatio, GammaKind, RationalModel};
use dynrefl::report::VerificationReport;
use dynrefl::tensor::{aux_legs, RfMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{identity}: {source}")]
    Model { identity: String, source: models::ModelError },
    #[error("{identity}: {source}")]
    Build { identity: String, source: builders::BuildError },
    #[error("{identity}: {source}")]
    Tensor { identity: String, source: dynrefl::tensor::TensorError },
    #[error("{identity} is only defined for n = {needed}")]
    WrongN { identity: String, needed: usize },
}

/// Every identity the `verify` command knows, in suite order.
pub const IDENTITIES: &[&str] = &[
    "unitarity",
    "zero-weight",
    "dybe-a",
    "dybe-b",
    "dybe-c",
    "dybe-d",
    "reflection-rank-one",
    "reflection-antisymmetric",
    "reflection-diagonal",
    "bcd-from-a",
    "rll",
    "monodromy-rll",
    "crossed-exchange",
    "lax-reflection",
    "coaction-example-1",
    "coaction-example-2",
    "fusion-left",
    "fusion-right",
    "fused-unitarity",
    "fusion-order",
    "dressing-2",
    "dressing-3",
    "dual",
    "dual-reflection",
    "hamiltonian",
    "hamiltonian-conjugation",
    "reduction",
    "commutation",
    "classical",
    "classical-printed",
    "lax-reflection-printed-shift",
    "fused-trace",
];

/// Identities that are findings or experiments rather than claims; excluded from suites.
const EXTRA: &[&str] = &["classical-printed", "lax-reflection-printed-shift", "fused-trace"];

pub fn is_known(name: &str) -> bool {
    IDENTITIES.contains(&name)
}

pub fn known_suite(name: &str) -> bool {
    matches!(name, "paper" | "structure")
}

/// Identity names making up a suite at `n`.
pub fn suite(name: &str, n: usize) -> Vec<&'static str> {
    match name {
        "structure" => IDENTITIES[..6].to_vec(),
        _ => IDENTITIES
            .iter()
            .copied()
            .filter(|id| !EXTRA.contains(id))
            .filter(|&id| id != "reduction" || n == 2)
            .collect(),
    }
}

/// Whether the identity involves three auxiliary legs or more.
pub fn is_heavy(name: &str) -> bool {
    name.starts_with("dybe") || name.starts_with("fus") || name.starts_with("dressing") || name.starts_with("classical")
}

pub struct Params {
    pub n: usize,
    pub sig: AlgebraSignature,
    pub mode: CheckMode,
    pub strict: bool,
}

struct Ctx<'a> {
    id: &'a str,
    m: RationalModel,
}

impl Ctx<'_> {
    fn t<T>(&self, r: Result<T, dynrefl::tensor::TensorError>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Tensor { identity: self.id.into(), source })
    }
    fn b<T>(&self, r: Result<T, builders::BuildError>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Build { identity: self.id.into(), source })
    }
    fn md<T>(&self, r: Result<T, models::ModelError>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Model { identity: self.id.into(), source })
    }
    fn gamma(&self, kind: GammaKind) -> Result<RfMatrix, RunError> {
        self.md(models::gamma_solution(self.m.registry(), kind, &self.m.masses(), &FRatio::One))
    }
    fn lax(&self) -> Result<RfMatrix, RunError> {
        self.b(builders::monodromy(self.m.printed_a(), 1))
    }
}

fn combine(name: &str, anchor: &str, mode: CheckMode, parts: &[VerificationReport]) -> VerificationReport {
    checks::combine(name, anchor, mode, parts)
}

/// Runs one identity. Returns one report per identity.
pub fn run(id: &str, p: &Params) -> Result<VerificationReport, RunError> {
    let m = models::rational_model(p.n).map_err(|source| RunError::Model { identity: id.into(), source })?;
    let c = Ctx { id, m };
    let mode = p.mode;
    let q = &c.m.quad;
    let r = match id {
        "unitarity" => c.t(checks::check_unitarity(q, mode))?,
        "zero-weight" => {
            let parts = c.t(checks::check_zero_weight(q, p.sig))?;
            combine("zero weight", "eR[h1+h2, A] = eL[h1+h2, D] = [eR h1 - eL h2, C] = [eL h1 - eR h2, B] = 0", CheckMode::Exact, &parts)
        }
        "dybe-a" | "dybe-b" | "dybe-c" | "dybe-d" => {
            let v = DybeVariant::ALL[(id.as_bytes()[5] - b'a') as usize];
            c.t(checks::check_dybe(q, v, p.sig, mode))?
        }
        "reflection-rank-one" | "reflection-antisymmetric" | "reflection-diagonal" => {
            let kind: GammaKind = id.trim_start_matches("reflection-").parse().expect("listed kind");
            let mut r = c.t(checks::check_reflection(&c.gamma(kind)?, q, p.sig, mode))?;
            r.identity = format!("{} {}", r.identity, kind.label());
            r
        }
        "bcd-from-a" => {
            let strict = if p.strict { Strictness::Strict } else { Strictness::Lax };
            let (built, post) = c.b(builders::build_bcd_from_a(c.m.printed_a(), &SpectralMap::Absent, strict))?;
            let mut parts = vec![post];
            parts.extend(c.t(checks::check_dybe_all(&built, p.sig, mode))?);
            parts.push(c.t(checks::check_unitarity(&built, mode))?);
            let mut r = combine("B, C, D from A", "quadruple built from A satisfies dYBE a-d and unitarity", mode, &parts);
            for (name, x, printed) in [("B", &built.b, c.m.printed_b()), ("C", &built.c, c.m.printed_c()), ("D", &built.d, c.m.printed_d())] {
                let cmp = c.t(builders::entrywise_report(name, x, printed))?;
                r = r.note(if cmp.pass {
                    format!("{name}: constructed equals printed")
                } else {
                    format!("{name}: constructed differs from printed in {} entries; {}", cmp.notes.len(), cmp.notes.join("; "))
                });
            }
            r
        }
        "rll" => c.t(checks::check_rll(&c.lax()?, c.m.printed_a(), mode))?,
        "monodromy-rll" => {
            let t = c.b(builders::monodromy(c.m.printed_a(), 2))?;
            let mut r = c.t(checks::check_rll(&t, c.m.printed_a(), mode))?;
            r.identity = "RLL two-site monodromy".into();
            r
        }
        "crossed-exchange" => {
            let t = c.lax()?;
            let tc = c.b(builders::build_transposed_lax(&t, &SpectralMap::Absent))?;
            c.t(checks::check_crossed_exchange(&t, &tc, q, mode))?
        }
        "lax-reflection" | "lax-reflection-printed-shift" => {
            let shift = if id == "lax-reflection" { QuantumShift::Minus } else { QuantumShift::Plus };
            let t = c.lax()?;
            let mut parts = Vec::new();
            for kind in GammaKind::ALL {
                let k = c.b(builders::build_k_from_t_gamma(&t, &c.gamma(kind)?, shift))?;
                let mut r = c.t(checks::check_reflection(&k, q, p.sig, mode))?;
                r.identity = format!("{} {}", r.identity, kind.label());
                parts.push(r);
            }
            let anchor = match shift {
                QuantumShift::Minus => "K = T gamma(q - hq) Tcal satisfies the reflection equation",
                QuantumShift::Plus => "K = T gamma(q + hq) Tcal satisfies the reflection equation",
            };
            combine("reflection of T gamma Tcal", anchor, mode, &parts)
        }
        "coaction-example-1" | "coaction-example-2" => {
            let (l, j, alpha) = if id.ends_with('1') { (&q.c, &q.d, 1) } else { (&q.a, &q.b, -1) };
            let mut amb = aux_legs(&["1"], p.n);
            amb.extend(checks::quantum_legs(&["a"], p.n));
            let l = c.t(l.place(&["1", "a"], &amb))?;
            let j = c.t(j.place(&["1", "a"], &amb))?;
            let mut parts = vec![c.t(checks::check_coaction(&l, &j, q, alpha, mode))?];
            for kind in GammaKind::ALL {
                let kt = c.b(builders::coaction_dress(&c.gamma(kind)?, &l, &j, alpha))?;
                let mut r = c.t(checks::check_reflection(&kt, q, p.sig, mode))?;
                r.identity = format!("dressed {} {}", r.identity, kind.label());
                parts.push(r);
            }
            combine(&format!("coaction alpha={alpha}"), "premises a-e and L K(q + alpha hq) J satisfies the reflection equation", mode, &parts)
        }
        "fusion-left" | "fusion-right" => {
            let side = if id == "fusion-left" { Side::Left } else { Side::Right };
            let mut parts = Vec::new();
            for kind in GammaKind::ALL {
                let k = c.gamma(kind)?;
                let fz = c.b(builders::fuse(&k, &k, q, side))?;
                let mut r = c.t(builders::check_fused(&fz, &k, mode))?;
                r.identity = format!("{} {}", r.identity, kind.label());
                parts.push(r);
            }
            let r = &parts[0];
            let anchor = r.anchor.clone();
            combine(id, &anchor, mode, &parts)
        }
        "fused-unitarity" => c.t(builders::check_fused_unitarity(q, mode))?,
        "fusion-order" => c.t(builders::check_fusion_order(q, mode))?,
        "dressing-2" | "dressing-3" => {
            let spaces = if id.ends_with('2') { 2 } else { 3 };
            let (qm, sm) = c.b(builders::build_dressing_qs(q, spaces))?;
            c.t(checks::check_dressing(&qm, &sm, q, mode))?
        }
        "dual" => {
            let (_, reports) = c.b(builders::build_dual_abcd(q))?;
            let mut r = reports[0].clone();
            for x in &reports[1..] {
                r = r.note(format!("{}: {}", x.identity, if x.pass { "holds" } else { "fails" }));
            }
            r
        }
        "dual-reflection" => {
            let (dual, _) = c.b(builders::build_dual_abcd(q))?;
            let kp = c.b(builders::build_kplus_crossing(&c.gamma(GammaKind::Diagonal)?))?;
            c.t(checks::check_dual_reflection(&kp, &dual, mode))?
        }
        "hamiltonian" => {
            let h = c.md(models::hamiltonian_from_pair(&c.gamma(GammaKind::RankOne)?, &c.gamma(GammaKind::Diagonal)?))?;
            let closed = c.md(models::hamiltonian_closed_form(c.m.registry(), &c.m.masses()))?;
            operator_report("Hamiltonian from the pair", "Tr(e^d K KK^-1 e^d) = sum mu m_l^2 / prod_k (q_l - q_k + mu) e^{2 mu d_l}", &h, &closed, mode)
        }
        "hamiltonian-conjugation" => {
            let reg = c.m.registry();
            let nv = reg.len();
            let mut f = Polynomial::var(nv, reg.mu()).scale(&dynrefl::exactfield::q_int(3));
            for k in 0..p.n {
                f = f.add(&Polynomial::var(nv, reg.q(k)).scale(&dynrefl::exactfield::q_int(k as i64 + 1)));
            }
            let f = RationalFunction::from_polynomial(reg, &f);
            let kk = c.md(models::gamma_solution(reg, GammaKind::Diagonal, &[], &FRatio::Function(f.clone())))?;
            let h = c.md(models::hamiltonian_from_pair(&c.gamma(GammaKind::RankOne)?, &kk))?;
            let closed = c.md(models::hamiltonian_closed_form(reg, &c.m.masses()))?;
            let conj = closed.conjugate_by(&f).map_err(|e| RunError::Tensor { identity: id.into(), source: e.into() })?;
            operator_report("Hamiltonian f-conjugation", "H with f in the diagonal solution = f H f^-1", &h, &conj, mode)
                .note(format!("f = {}", f.to_text()))
        }
        "reduction" => {
            if p.n != 2 {
                return Err(RunError::WrongN { identity: id.into(), needed: 2 });
            }
            let h = c.md(models::hamiltonian_closed_form(c.m.registry(), &c.m.masses()))?;
            let reduced = c.md(models::reduce_n2(&h))?;
            let printed = c.md(models::printed_reduced_hamiltonian())?;
            operator_report(
                "two-body reduction",
                "H = [m1^2/(q+mu) e^{2mu d_q} - m2^2/(q-mu) e^{-2mu d_q}] e^{2mu d_Q}",
                &reduced,
                &printed,
                mode,
            )
        }
        "commutation" => {
            let h = c.md(models::hamiltonian_closed_form(c.m.registry(), &c.m.masses()))?;
            let parts = [
                c.t(checks::check_commutator_zero("[H, P]", &h, &models::total_translation(c.m.registry()), mode))?,
                c.t(checks::check_commutator_zero("[H, H]", &h, &h, mode))?,
            ];
            combine("commutation", "[H, e^{2 mu sum d}] = 0, [H, H] = 0", mode, &parts)
        }
        "classical" | "classical-printed" => {
            let form = if id == "classical" { ClassicalForm::Derived } else { ClassicalForm::Printed };
            let mut r = c.t(checks::check_classical_limit(q, form, mode))?;
            if form == ClassicalForm::Printed {
                r.identity = "classical limit, printed signs".into();
            }
            r
        }
        "fused-trace" => {
            let h = c.md(models::hamiltonian_closed_form(c.m.registry(), &c.m.masses()))?;
            let hf = c.md(models::fused_hamiltonian(&c.m))?;
            let x = c.t(checks::check_commutator_zero("[H, H fused]", &h, &hf, mode))?;
            let mut r = VerificationReport::new("fused-trace experiment", "[H, H fused] computed; no outcome promised", mode)
                .note(format!("commutator {}", if x.pass { "vanishes" } else { "does not vanish" }));
            if let Some(w) = x.witness {
                r = r.note(format!("first nonzero term: {}", w.residual));
            }
            r.millis = x.millis;
            r
        }
        _ => unreachable!("identity names are validated before running"),
    };
    Ok(r)
}

fn operator_report(
    name: &str,
    anchor: &str,
    got: &dynrefl::shiftops::ShiftOperator,
    want: &dynrefl::shiftops::ShiftOperator,
    mode: CheckMode,
) -> VerificationReport {
    let r = VerificationReport::new(name, anchor, mode);
    // Operator equality is decided term by term in exact arithmetic whatever the mode.
    if got.equals(want) {
        r
    } else {
        r.fail(Some(dynrefl::report::Witness {
            row: vec![],
            col: vec![],
            residual: got.sub(want).to_text(),
        }))
    }
}
