//! Identity verifiers.
//!
//! Every identity is reduced to `sum_t sign_t * prod(chain_t) = 0` on a fully
//! expanded ambient leg set and decided entrywise, either exactly or by
//! evaluation at random points of the prime field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::builders::AbcdQuadruple;
use crate::exactfield::modp::{self, Sampler};
use crate::exactfield::{failure_bound, sample_avoiding, CheckMode, RationalFunction};
use crate::report::{timed, VerificationReport, Witness};
use crate::shiftops::ShiftOperator;
use crate::tensor::{aux_legs, Leg, LegRole, RfMatrix, TensorError, TensorMatrix};

/// Shift coefficients `(eps_R, eps_L)` selecting the reflection algebra.
///
/// Only integer values are instantiated: a shift `q - eps h` must stay on the
/// mu-lattice for the shift algebra to represent it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraSignature {
    pub eps_r: i64,
    pub eps_l: i64,
}

impl AlgebraSignature {
    pub const NEW: Self = Self { eps_r: 1, eps_l: 1 };
    pub const BOUNDARY: Self = Self { eps_r: -1, eps_l: 1 };
    pub const SEMI: Self = Self { eps_r: 0, eps_l: 1 };
    pub const NON_DYNAMICAL: Self = Self { eps_r: 0, eps_l: 0 };

    pub fn new(eps_r: i64, eps_l: i64) -> Self {
        Self { eps_r, eps_l }
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.eps_r, self.eps_l)
    }
}

impl std::str::FromStr for AlgebraSignature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "new" => return Ok(Self::NEW),
            "boundary" => return Ok(Self::BOUNDARY),
            "semi" => return Ok(Self::SEMI),
            "nondynamical" => return Ok(Self::NON_DYNAMICAL),
            _ => {}
        }
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t.split_once(',').ok_or_else(|| format!("bad signature {s:?}"))?;
        let p = |x: &str| x.trim().parse::<i64>().map_err(|_| format!("bad signature {s:?}"));
        Ok(Self { eps_r: p(a)?, eps_l: p(b)? })
    }
}

/// One signed ordered product in an identity.
pub type Term = (i64, Vec<RfMatrix>);

/// Decides `sum sign * prod(chain) = 0`.
pub fn verify_terms(
    identity: &str,
    anchor: &str,
    terms: &[Term],
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    let terms: Vec<&Term> = terms.iter().filter(|(s, c)| *s != 0 && !c.is_empty()).collect();
    let report = VerificationReport::new(identity, anchor, mode);
    let Some(first) = terms.first() else {
        return Ok(report);
    };
    let template = &first.1[0];
    match mode {
        CheckMode::Exact => {
            let mut total = TensorMatrix::zero(template.registry(), template.legs())?;
            for (sign, chain) in &terms {
                let mut p = chain[0].clone();
                for f in &chain[1..] {
                    p = p.matmul(f)?;
                }
                let k = RationalFunction::int(template.registry(), *sign);
                total = total.add(&p.scale(&k))?;
            }
            let zero = TensorMatrix::zero(template.registry(), template.legs())?;
            Ok(match total.first_difference(&zero)? {
                None => report,
                Some(w) => report.fail(Some(w)),
            })
        }
        CheckMode::Random { trials, seed } => {
            let len = template.registry().len();
            let mut degree = 0u32;
            for (_, chain) in &terms {
                let d: u32 = chain.iter().map(|m| {
                    let (a, b) = m.degree_bound();
                    a + b
                }).sum();
                degree = degree.max(d);
            }
            let mut sampler = Sampler::new(seed);
            for _ in 0..trials {
                let pt = sample_avoiding(&mut sampler, len, |pt| {
                    terms.iter().all(|(_, c)| c.iter().all(|m| m.eval_mod(pt).is_ok()))
                })?;
                let mut total = crate::tensor::ModMatrix::zero();
                for (sign, chain) in &terms {
                    let mut p = chain[0].eval_mod(&pt)?;
                    for f in &chain[1..] {
                        p = p.matmul(&f.eval_mod(&pt)?);
                    }
                    total = total.add_scaled(&p, modp::from_i64(*sign));
                }
                if let Some((r, c)) = total.first_nonzero() {
                    let residual = exact_entry(&terms, r, c)?;
                    let w = Witness { row: template.one_based(r), col: template.one_based(c), residual: residual.to_text() };
                    return Ok(report.fail(Some(w)));
                }
            }
            Ok(report.note(format!("failure bound {:.3e}", failure_bound(degree.max(1), trials))))
        }
    }
}

// Exact residual of one entry by propagating a unit row vector through each chain.
fn exact_entry(terms: &[&Term], r: u32, c: u32) -> Result<RationalFunction, TensorError> {
    let reg = terms[0].1[0].registry().clone();
    let mut acc = RationalFunction::zero(&reg);
    for (sign, chain) in terms {
        let mut v: BTreeMap<u32, RationalFunction> = BTreeMap::new();
        v.insert(r, RationalFunction::one(&reg));
        for f in chain {
            v = f.row_mul(&v);
        }
        if let Some(x) = v.get(&c) {
            acc = acc.add(&x.scale(&crate::exactfield::q_int(*sign)));
        }
    }
    Ok(acc)
}

/// `prod(lhs) = prod(rhs)`.
pub fn verify_equal(
    identity: &str,
    anchor: &str,
    lhs: Vec<RfMatrix>,
    rhs: Vec<RfMatrix>,
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    timed_result(|| verify_terms(identity, anchor, &[(1, lhs), (-1, rhs)], mode))
}

fn timed_result<F>(f: F) -> Result<VerificationReport, TensorError>
where
    F: FnOnce() -> Result<VerificationReport, TensorError>,
{
    let mut err = None;
    let r = timed(|| match f() {
        Ok(r) => r,
        Err(e) => {
            err = Some(e);
            VerificationReport::new("", "", CheckMode::Exact)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Folds sub-reports into one named report.
pub fn combine(identity: &str, anchor: &str, mode: CheckMode, parts: &[VerificationReport]) -> VerificationReport {
    parts.iter().fold(VerificationReport::new(identity, anchor, mode), |acc, p| acc.absorb(p))
}

fn sh(leg: &str, c: i64) -> [(&str, i64); 1] {
    [(leg, c)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DybeVariant {
    A,
    B,
    C,
    D,
}

impl DybeVariant {
    pub const ALL: [DybeVariant; 4] = [DybeVariant::A, DybeVariant::B, DybeVariant::C, DybeVariant::D];

    pub fn letter(&self) -> char {
        match self {
            DybeVariant::A => 'a',
            DybeVariant::B => 'b',
            DybeVariant::C => 'c',
            DybeVariant::D => 'd',
        }
    }
}

/// Dynamical Yang-Baxter equation `variant` for the quadruple under `sig`.
pub fn check_dybe(
    q: &AbcdQuadruple,
    variant: DybeVariant,
    sig: AlgebraSignature,
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    let amb = aux_legs(&["1", "2", "3"], q.n());
    let (er, el) = (sig.eps_r, sig.eps_l);
    let x = |m: &RfMatrix, a: &str, b: &str, s: &[(&str, i64)]| m.place(&[a, b], &amb)?.shift_by(s);
    let (lhs, rhs, anchor) = match variant {
        DybeVariant::A => (
            vec![x(&q.a, "1", "2", &[])?, x(&q.a, "1", "3", &sh("2", -er))?, x(&q.a, "2", "3", &[])?],
            vec![x(&q.a, "2", "3", &sh("1", -er))?, x(&q.a, "1", "3", &[])?, x(&q.a, "1", "2", &sh("3", -er))?],
            "A12 A13(q-eR h2) A23 = A23(q-eR h1) A13 A12(q-eR h3)",
        ),
        DybeVariant::B => (
            vec![x(&q.d, "1", "2", &sh("3", el))?, x(&q.d, "1", "3", &[])?, x(&q.d, "2", "3", &sh("1", el))?],
            vec![x(&q.d, "2", "3", &[])?, x(&q.d, "1", "3", &sh("2", el))?, x(&q.d, "1", "2", &[])?],
            "D12(q+eL h3) D13 D23(q+eL h1) = D23 D13(q+eL h2) D12",
        ),
        DybeVariant::C => (
            vec![x(&q.a, "1", "2", &[])?, x(&q.c, "1", "3", &sh("2", -er))?, x(&q.c, "2", "3", &[])?],
            vec![x(&q.c, "2", "3", &sh("1", -er))?, x(&q.c, "1", "3", &[])?, x(&q.a, "1", "2", &sh("3", el))?],
            "A12 C13(q-eR h2) C23 = C23(q-eR h1) C13 A12(q+eL h3)",
        ),
        DybeVariant::D => (
            vec![x(&q.d, "1", "2", &sh("3", -er))?, x(&q.b, "1", "3", &[])?, x(&q.b, "2", "3", &sh("1", el))?],
            vec![x(&q.b, "2", "3", &[])?, x(&q.b, "1", "3", &sh("2", el))?, x(&q.d, "1", "2", &[])?],
            "D12(q-eR h3) B13 B23(q+eL h1) = B23 B13(q+eL h2) D12",
        ),
    };
    verify_equal(&format!("dYBE-{} {}", variant.letter(), sig.label()), anchor, lhs, rhs, mode)
}

/// All four dYBE variants.
pub fn check_dybe_all(q: &AbcdQuadruple, sig: AlgebraSignature, mode: CheckMode) -> Result<Vec<VerificationReport>, TensorError> {
    DybeVariant::ALL.iter().map(|&v| check_dybe(q, v, sig, mode)).collect()
}

// Ambient for a K matrix whose first leg is auxiliary: [1, 2, quantum legs...].
fn k_ambient(k: &RfMatrix) -> (Vec<Leg>, Vec<String>) {
    let n = k.n();
    let rest: Vec<Leg> = k.legs()[1..].to_vec();
    let mut amb = aux_legs(&["1", "2"], n);
    amb.extend(rest.iter().cloned());
    (amb, rest.iter().map(|l| l.id.clone()).collect())
}

fn ids_with<'a>(head: &'a str, rest: &'a [String]) -> Vec<&'a str> {
    std::iter::once(head).chain(rest.iter().map(|s| s.as_str())).collect()
}

/// `A K1(q-eR h2) B K2(q+eL h1) = K2(q-eR h1) C K1(q+eL h2) D`.
pub fn check_reflection(
    k: &RfMatrix,
    q: &AbcdQuadruple,
    sig: AlgebraSignature,
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    let (amb, rest) = k_ambient(k);
    let (er, el) = (sig.eps_r, sig.eps_l);
    let k1 = k.place(&ids_with("1", &rest), &amb)?;
    let k2 = k.place(&ids_with("2", &rest), &amb)?;
    let s = |m: &RfMatrix| m.place(&["1", "2"], &amb);
    let lhs = vec![s(&q.a)?, k1.shift_by(&sh("2", -er))?, s(&q.b)?, k2.shift_by(&sh("1", el))?];
    let rhs = vec![k2.shift_by(&sh("1", -er))?, s(&q.c)?, k1.shift_by(&sh("2", el))?, s(&q.d)?];
    verify_equal(
        &format!("reflection {}", sig.label()),
        "A12 K1(q-eR h2) B12 K2(q+eL h1) = K2(q-eR h1) C12 K1(q+eL h2) D12",
        lhs,
        rhs,
        mode,
    )
}

/// `A12 A21 = I`, `D12 D21 = I` and `C12 = B21`.
pub fn check_unitarity(q: &AbcdQuadruple, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    let amb = aux_legs(&["1", "2"], q.n());
    let id = RfMatrix::identity(q.registry(), &amb)?;
    let p = |m: &RfMatrix, a: &str, b: &str| m.place(&[a, b], &amb);
    let parts = [
        verify_equal("A unitarity", "A12 A21 = I", vec![p(&q.a, "1", "2")?, p(&q.a, "2", "1")?], vec![id.clone()], mode)?,
        verify_equal("D unitarity", "D12 D21 = I", vec![p(&q.d, "1", "2")?, p(&q.d, "2", "1")?], vec![id], mode)?,
        verify_equal("C12 = B21", "C12 = B21", vec![p(&q.c, "1", "2")?], vec![p(&q.b, "2", "1")?], mode)?,
    ];
    Ok(combine("unitarity", "A12 A21 = I, D12 D21 = I, C12 = B21", mode, &parts))
}

/// The zero-weight brackets for `sig`, as printed:
/// `eR [h1+h2, A] = 0`, `eL [h1+h2, D] = 0`, `[eR h1 - eL h2, C] = 0`, `[eL h1 - eR h2, B] = 0`.
pub fn check_zero_weight(q: &AbcdQuadruple, sig: AlgebraSignature) -> Result<Vec<VerificationReport>, TensorError> {
    let (er, el) = (sig.eps_r, sig.eps_l);
    Ok(vec![
        q.a.zero_weight_check("zero weight A", &[("1", er), ("2", er)])?,
        q.d.zero_weight_check("zero weight D", &[("1", el), ("2", el)])?,
        q.c.zero_weight_check("zero weight C", &[("1", er), ("2", -el)])?,
        q.b.zero_weight_check("zero weight B", &[("1", el), ("2", -er)])?,
    ])
}

/// The full structure suite: unitarity, zero weight and the four dYBEs.
pub fn structure_suite(q: &AbcdQuadruple, sig: AlgebraSignature, mode: CheckMode) -> Result<Vec<VerificationReport>, TensorError> {
    let mut out = vec![check_unitarity(q, mode)?];
    out.extend(check_zero_weight(q, sig)?);
    out.extend(check_dybe_all(q, sig, mode)?);
    Ok(out)
}

fn quantum_shift(rest: &[String], c: i64) -> Vec<(&str, i64)> {
    rest.iter().map(|l| (l.as_str(), c)).collect()
}

/// `A12 T1(q-h2) T2 = T2(q-h1) T1 A12(q-h^(q))` with `h^(q)` summed over T's quantum legs.
pub fn check_rll(t: &RfMatrix, a: &RfMatrix, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    let (amb, rest) = k_ambient(t);
    let t1 = t.place(&ids_with("1", &rest), &amb)?;
    let t2 = t.place(&ids_with("2", &rest), &amb)?;
    let a12 = a.place(&["1", "2"], &amb)?;
    let lhs = vec![a12.clone(), t1.shift_by(&sh("2", -1))?, t2.clone()];
    let rhs = vec![t2.shift_by(&sh("1", -1))?, t1, a12.shift_by(&quantum_shift(&rest, -1))?];
    let r = verify_equal("RLL", "A12 T1(q-h2) T2 = T2(q-h1) T1 A12(q-hq)", lhs, rhs, mode)?;
    let zw: Vec<(&str, i64)> = std::iter::once(("1", 1)).chain(quantum_shift(&rest, 1)).collect();
    let w = t.relabel(&ids_with("1", &rest))?.zero_weight_check("T zero weight", &zw)?;
    Ok(combine("RLL", "A12 T1(q-h2) T2 = T2(q-h1) T1 A12(q-hq), [h1 + hq, T] = 0", mode, &[r, w]))
}

/// The transposed and crossed exchange relations between `T` and its transposed Lax matrix.
pub fn check_crossed_exchange(
    t: &RfMatrix,
    tcal: &RfMatrix,
    q: &AbcdQuadruple,
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    let (amb, rest) = k_ambient(t);
    let t2 = t.place(&ids_with("2", &rest), &amb)?;
    let c1 = tcal.place(&ids_with("1", &rest), &amb)?;
    let c2 = tcal.place(&ids_with("2", &rest), &amb)?;
    let d12 = q.d.place(&["1", "2"], &amb)?;
    let b12 = q.b.place(&["1", "2"], &amb)?;
    let c21 = q.c.place(&["2", "1"], &amb)?;
    let transposed = verify_equal(
        "transposed exchange",
        "D12(q-hq) Tc1 Tc2(q+h1) = Tc2 Tc1(q+h2) D12",
        vec![d12.shift_by(&quantum_shift(&rest, -1))?, c1.clone(), c2.shift_by(&sh("1", 1))?],
        vec![c2.clone(), c1.shift_by(&sh("2", 1))?, d12],
        mode,
    )?;
    let crossed = verify_equal(
        "crossed exchange",
        "Tc1(q-h2) B12 T2(q+h1) = T2 C21(q-hq) Tc1",
        vec![c1.shift_by(&sh("2", -1))?, b12, t2.shift_by(&sh("1", 1))?],
        vec![t2.clone(), c21.shift_by(&quantum_shift(&rest, -1))?, c1],
        mode,
    )?;
    Ok(combine(
        "transposed and crossed exchange",
        "D12(q-hq) Tc1 Tc2(q+h1) = Tc2 Tc1(q+h2) D12; Tc1(q-h2) B12 T2(q+h1) = T2 C21(q-hq) Tc1",
        mode,
        &[transposed, crossed],
    ))
}

/// The coaction premises for `L`, `J` on legs `(aux, quantum)` with parameter `alpha`.
pub fn check_coaction(
    l: &RfMatrix,
    j: &RfMatrix,
    q: &AbcdQuadruple,
    alpha: i64,
    mode: CheckMode,
) -> Result<VerificationReport, TensorError> {
    let (amb, rest) = k_ambient(l);
    let p = |m: &RfMatrix, head: &str| m.place(&ids_with(head, &rest), &amb);
    let (l1, l2, j1, j2) = (p(l, "1")?, p(l, "2")?, p(j, "1")?, p(j, "2")?);
    let s = |m: &RfMatrix| m.place(&["1", "2"], &amb);
    let (a12, b12, c12, d12) = (s(&q.a)?, s(&q.b)?, s(&q.c)?, s(&q.d)?);
    let qa = quantum_shift(&rest, alpha);
    let parts = vec![
        verify_equal(
            "coaction a",
            "A12 L1(q-h2) L2 = L2(q-h1) L1 A12(q+alpha hq)",
            vec![a12.clone(), l1.shift_by(&sh("2", -1))?, l2.clone()],
            vec![l2.shift_by(&sh("1", -1))?, l1.clone(), a12.shift_by(&qa)?],
            mode,
        )?,
        verify_equal(
            "coaction b",
            "D12(q+alpha hq) J1 J2(q+h1) = J2 J1(q+h2) D12",
            vec![d12.shift_by(&qa)?, j1.clone(), j2.shift_by(&sh("1", 1))?],
            vec![j2.clone(), j1.shift_by(&sh("2", 1))?, d12],
            mode,
        )?,
        verify_equal(
            "coaction c",
            "J1(q-h2) B12 L2(q+h1) = L2 B12(q+alpha hq) J1",
            vec![j1.shift_by(&sh("2", -1))?, b12.clone(), l2.shift_by(&sh("1", 1))?],
            vec![l2.clone(), b12.shift_by(&qa)?, j1.clone()],
            mode,
        )?,
        verify_equal(
            "coaction d",
            "J2(q-h1) C12 L1(q+h2) = L1 C12(q+alpha hq) J2",
            vec![j2.shift_by(&sh("1", -1))?, c12.clone(), l1.shift_by(&sh("2", 1))?],
            vec![l1.clone(), c12.shift_by(&qa)?, j2],
            mode,
        )?,
        {
            let lw: Vec<(&str, i64)> = std::iter::once(("1", -1)).chain(quantum_shift(&rest, alpha)).collect();
            let jw: Vec<(&str, i64)> = std::iter::once(("1", 1)).chain(quantum_shift(&rest, alpha)).collect();
            let lr = l.relabel(&ids_with("1", &rest))?.zero_weight_check("L zero weight", &lw)?;
            let jr = j.relabel(&ids_with("1", &rest))?.zero_weight_check("J zero weight", &jw)?;
            combine("coaction e", "[alpha hq - h1, L1] = 0, [alpha hq + h1, J1] = 0", CheckMode::Exact, &[lr, jr])
        },
    ];
    Ok(combine(&format!("coaction alpha={alpha}"), "coaction premises a-e", mode, &parts))
}

/// `At K+1(q-h2)^sc1 Bt K+2(q+h1)^sc2 = K+2(q-h1)^sc2 Ct K+1(q+h2)^sc1 Dt`.
pub fn check_dual_reflection(kp: &RfMatrix, dual: &AbcdQuadruple, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    use crate::tensor::SlSc;
    let (amb, rest) = k_ambient(kp);
    let k1 = kp.place(&ids_with("1", &rest), &amb)?.slsc_shift("1", SlSc::Sc, 1)?;
    let k2 = kp.place(&ids_with("2", &rest), &amb)?.slsc_shift("2", SlSc::Sc, 1)?;
    let s = |m: &RfMatrix| m.place(&["1", "2"], &amb);
    let lhs = vec![s(&dual.a)?, k1.shift_by(&sh("2", -1))?, s(&dual.b)?, k2.shift_by(&sh("1", 1))?];
    let rhs = vec![k2.shift_by(&sh("1", -1))?, s(&dual.c)?, k1.shift_by(&sh("2", 1))?, s(&dual.d)?];
    verify_equal(
        "dual reflection",
        "At12 K+1(q-h2)^sc1 Bt12 K+2(q+h1)^sc2 = K+2(q-h1)^sc2 Ct12 K+1(q+h2)^sc1 Dt12",
        lhs,
        rhs,
        mode,
    )
}

/// Fused structure matrix between the composite leg `<1..m>` (left-fused) and leg `x`.
pub fn fused_structure(q: &AbcdQuadruple, which: char, m: usize) -> Result<RfMatrix, TensorError> {
    let names: Vec<String> = (1..=m).map(|k| k.to_string()).collect();
    let mut ids: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let amb = aux_legs(&[ids.clone(), vec!["x"]].concat(), q.n());
    ids.truncate(m);
    crate::builders::fused_coefficient(q, which, &ids, &["x"], &amb, crate::builders::Side::Left)
}

/// Dressing relations for `Q`, `S` on legs `1..m` against a single leg `x`.
pub fn check_dressing(qm: &RfMatrix, sm: &RfMatrix, quad: &AbcdQuadruple, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    let m = qm.legs().len();
    let names: Vec<String> = (1..=m).map(|k| k.to_string()).collect();
    let mut ids: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    ids.push("x");
    let amb = aux_legs(&ids, quad.n());
    let qx = qm.embed(&amb)?;
    let sx = sm.embed(&amb)?;
    let f = |c| fused_structure(quad, c, m);
    let (a, b, c, d) = (f('A')?, f('B')?, f('C')?, f('D')?);
    let weights: Vec<(&str, i64)> = names.iter().map(|s| (s.as_str(), 1)).collect();
    let parts = vec![
        verify_equal("AQ", "A_NM Q_N(q-hM) = Q_N A_NM", vec![a.clone(), qx.shift_by(&sh("x", -1))?], vec![qx.clone(), a], mode)?,
        verify_equal("CQ", "C_NM Q_N(q+hM) = Q_N C_NM", vec![c.clone(), qx.shift_by(&sh("x", 1))?], vec![qx.clone(), c], mode)?,
        verify_equal("DS", "D_NM S_N = S_N(q+hM) D_NM", vec![d.clone(), sx.clone()], vec![sx.shift_by(&sh("x", 1))?, d], mode)?,
        verify_equal("BS", "B_NM S_N = S_N(q-hM) B_NM", vec![b.clone(), sx.clone()], vec![sx.shift_by(&sh("x", -1))?, b], mode)?,
        qm.zero_weight_check("[h_N, Q] = 0", &weights)?,
        sm.zero_weight_check("[h_N, S] = 0", &weights)?,
    ];
    Ok(combine(&format!("dressing {m} spaces"), "AQ, CQ, DS, BS relations and [h_N, Q] = [h_N, S] = 0", mode, &parts))
}

/// `h_leg d M = sum_i mu (e_ii)_leg d/dq_i M`; `M` must act as the identity on `leg`.
pub fn h_partial(m: &RfMatrix, leg: &str) -> Result<RfMatrix, TensorError> {
    if !m.is_identity_on(leg)? {
        return Err(TensorError::NotIdentityOnLeg { leg: leg.to_string(), row: vec![], col: vec![] });
    }
    let p = m.leg_pos(leg)?;
    let mu = RationalFunction::mu(m.registry());
    let mut out = RfMatrix::zero(m.registry(), m.legs())?;
    for (r, c, v) in m.entries() {
        let d = v.derivative(m.registry().q(r[p])).mul(&mu);
        if !d.is_zero() {
            out.set(&r, &c, d)?;
        }
    }
    Ok(out)
}

fn commutator_terms(x: &RfMatrix, y: &RfMatrix) -> [Term; 2] {
    [(1, vec![x.clone(), y.clone()]), (-1, vec![y.clone(), x.clone()])]
}

/// Classical dynamical Yang-Baxter equations for `r = (a, b, c, d)`.
/// Sign convention of the two `c`-derivative terms in the classical equation c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalForm {
    /// `+ eR h1d c23 - eR h2d c13`, the order mu^2 part of the quantum dYBE-c.
    Derived,
    /// `- eR h1d c23 + eR h2d c13`.
    Printed,
}

pub fn check_classical_dybe(
    r: &AbcdQuadruple,
    sig: AlgebraSignature,
    form: ClassicalForm,
    mode: CheckMode,
) -> Result<Vec<VerificationReport>, TensorError> {
    let amb = aux_legs(&["1", "2", "3"], r.n());
    let (er, el) = (sig.eps_r, sig.eps_l);
    let p = |m: &RfMatrix, a: &str, b: &str| m.place(&[a, b], &amb);
    let hd = |m: &RfMatrix, a: &str, b: &str, leg: &str| h_partial(&p(m, a, b)?, leg);
    let mut out = Vec::new();
    for (x, eps, letter, anchor) in [
        (&r.a, er, 'a', "[a12,a13] + [a12,a23] + [a32,a13] + eR(h3d a12 + h1d a23 + h2d a31) = 0"),
        (&r.d, el, 'b', "[d12,d13] + [d12,d23] + [d32,d13] + eL(h3d d12 + h1d d23 + h2d d31) = 0"),
    ] {
        let (x12, x13, x23, x32) = (p(x, "1", "2")?, p(x, "1", "3")?, p(x, "2", "3")?, p(x, "3", "2")?);
        let mut terms: Vec<Term> = Vec::new();
        terms.extend(commutator_terms(&x12, &x13));
        terms.extend(commutator_terms(&x12, &x23));
        terms.extend(commutator_terms(&x32, &x13));
        terms.push((eps, vec![hd(x, "1", "2", "3")?]));
        terms.push((eps, vec![hd(x, "2", "3", "1")?]));
        terms.push((eps, vec![hd(x, "3", "1", "2")?]));
        out.push(timed_result(|| verify_terms(&format!("classical dYBE-{letter} {}", sig.label()), anchor, &terms, mode))?);
    }
    {
        let (a12, c13, c23) = (p(&r.a, "1", "2")?, p(&r.c, "1", "3")?, p(&r.c, "2", "3")?);
        let mut terms: Vec<Term> = Vec::new();
        terms.extend(commutator_terms(&a12, &c13));
        terms.extend(commutator_terms(&a12, &c23));
        terms.extend(commutator_terms(&c13, &c23));
        let (s, anchor, tag) = match form {
            ClassicalForm::Derived => (1, "[a12, c13 + c23] + [c13,c23] - eL h3d a12 + eR h1d c23 - eR h2d c13 = 0", ""),
            ClassicalForm::Printed => (-1, "[a12, c13 + c23] + [c13,c23] - eL h3d a12 - eR h1d c23 + eR h2d c13 = 0", " printed"),
        };
        terms.push((-el, vec![hd(&r.a, "1", "2", "3")?]));
        terms.push((s * er, vec![hd(&r.c, "2", "3", "1")?]));
        terms.push((-s * er, vec![hd(&r.c, "1", "3", "2")?]));
        out.push(timed_result(|| verify_terms(&format!("classical dYBE-c{tag} {}", sig.label()), anchor, &terms, mode))?);
    }
    {
        let (d12, b13, b23) = (p(&r.d, "1", "2")?, p(&r.b, "1", "3")?, p(&r.b, "2", "3")?);
        let mut terms: Vec<Term> = Vec::new();
        terms.extend(commutator_terms(&d12, &b13));
        terms.extend(commutator_terms(&d12, &b23));
        terms.extend(commutator_terms(&b13, &b23));
        terms.push((-er, vec![hd(&r.d, "1", "2", "3")?]));
        terms.push((el, vec![hd(&r.b, "2", "3", "1")?]));
        terms.push((-el, vec![hd(&r.b, "1", "3", "2")?]));
        out.push(timed_result(|| {
            verify_terms(
                &format!("classical dYBE-d {}", sig.label()),
                "[d12, b13 + b23] + [b13,b23] - eR h3d d12 + eL h1d b23 - eL h2d b13 = 0",
                &terms,
                mode,
            )
        })?);
    }
    Ok(out)
}

/// `mu` times the first-order coefficient of each entry in `mu`.
pub fn classical_part(m: &RfMatrix) -> Result<RfMatrix, TensorError> {
    let reg = m.registry().clone();
    let mu = RationalFunction::mu(&reg);
    let mut out = RfMatrix::zero(&reg, m.legs())?;
    for (r, c, v) in m.entries() {
        let s = v.series(reg.mu(), 1)?;
        let x = s[1].mul(&mu);
        if !x.is_zero() {
            out.set(&r, &c, x)?;
        }
    }
    Ok(out)
}

/// Extracts the classical matrices of a quadruple and checks the classical dYBEs.
pub fn check_classical_limit(q: &AbcdQuadruple, form: ClassicalForm, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    let r = AbcdQuadruple {
        a: classical_part(&q.a)?,
        b: classical_part(&q.b)?,
        c: classical_part(&q.c)?,
        d: classical_part(&q.d)?,
        sig: q.sig,
    };
    let parts = check_classical_dybe(&r, q.sig, form, mode)?;
    Ok(combine("classical limit", "R = I + r + O(mu^2) satisfies the classical dYBEs", mode, &parts))
}

/// `[x, y] = 0` in the shift algebra.
pub fn check_commutator_zero(identity: &str, x: &ShiftOperator, y: &ShiftOperator, mode: CheckMode) -> Result<VerificationReport, TensorError> {
    timed_result(|| {
        let c = x.commutator(y);
        let report = VerificationReport::new(identity, "[X, Y] = 0", mode);
        let reg = x.registry();
        for (v, coeff) in c.terms() {
            let eq = crate::exactfield::rf_equal(coeff, &RationalFunction::zero(reg), mode)?;
            if !eq.equal {
                let w = Witness { row: vec![], col: vec![], residual: format!("{} at shift {:?}", coeff.to_text(), v) };
                return Ok(report.fail(Some(w)));
            }
        }
        Ok(report)
    })
}

/// Leg list with `ids` as quantum legs.
pub fn quantum_legs(ids: &[&str], n: usize) -> Vec<Leg> {
    ids.iter().map(|id| Leg { id: id.to_string(), dim: n, role: LegRole::Quantum }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::VariableRegistry;

    #[test]
    fn signature_parsing() {
        assert_eq!("(1,1)".parse::<AlgebraSignature>().unwrap(), AlgebraSignature::NEW);
        assert_eq!("-1, 1".parse::<AlgebraSignature>().unwrap(), AlgebraSignature::BOUNDARY);
        assert_eq!("semi".parse::<AlgebraSignature>().unwrap(), AlgebraSignature::SEMI);
        assert!("x".parse::<AlgebraSignature>().is_err());
    }

    #[test]
    fn identity_quadruple_passes_everything() {
        let reg = VariableRegistry::standard(2);
        let q = AbcdQuadruple::identity(&reg).unwrap();
        for sig in [AlgebraSignature::NEW, AlgebraSignature::BOUNDARY, AlgebraSignature::SEMI] {
            for r in structure_suite(&q, sig, CheckMode::Exact).unwrap() {
                assert!(r.pass, "{}", r.identity);
            }
        }
        let k = RfMatrix::identity(&reg, &aux_legs(&["1"], 2)).unwrap();
        assert!(check_reflection(&k, &q, AlgebraSignature::NEW, CheckMode::random(3)).unwrap().pass);
    }

    #[test]
    fn scaled_identity_fails_unitarity_with_witness() {
        let reg = VariableRegistry::standard(2);
        let mut q = AbcdQuadruple::identity(&reg).unwrap();
        q.a = q.a.scale(&RationalFunction::int(&reg, 2));
        for mode in [CheckMode::Exact, CheckMode::random(11)] {
            let r = check_unitarity(&q, mode).unwrap();
            assert!(!r.pass);
            let w = r.witness.unwrap();
            assert_eq!(w.row, w.col);
            assert_eq!(w.residual, "3");
        }
    }

    #[test]
    fn h_partial_requires_identity_leg() {
        let reg = VariableRegistry::standard(2);
        let amb = aux_legs(&["1", "2"], 2);
        let q1 = RationalFunction::q(&reg, 0);
        let m = RfMatrix::from_entries(&reg, &amb, [(vec![0, 0], vec![0, 0], q1.clone()), (vec![0, 1], vec![0, 1], q1)]).unwrap();
        let d = h_partial(&m, "2").unwrap();
        // Leg 2 index 0 differentiates in q1, index 1 in q2.
        assert_eq!(d.get(&[0, 0], &[0, 0]).unwrap(), RationalFunction::mu(&reg));
        assert!(d.get(&[0, 1], &[0, 1]).unwrap().is_zero());
        let off = RfMatrix::from_entries(&reg, &amb, [(vec![0, 0], vec![0, 1], RationalFunction::one(&reg))]).unwrap();
        assert!(h_partial(&off, "2").is_err());
    }
}
