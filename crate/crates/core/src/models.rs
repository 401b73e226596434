//! The rational sl(n) model: structure matrices, reflection solutions,
//! trace Hamiltonians and the zero modes of the two-body relative Hamiltonian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{self, AbcdQuadruple, BuildError, Side, SpectralMap, Strictness};
use crate::checks::{self, AlgebraSignature};
use crate::exactfield::{CheckMode, FieldError, Polynomial, RationalFunction, RegistryBuilder, VariableRegistry};
use crate::report::VerificationReport;
use crate::shiftops::{exp_shift_matrix, lift, ShiftOperator};
use crate::tensor::{aux_legs, RfMatrix, Role, TensorError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("n must be at least 2, got {0}")]
    SmallN(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("registry has no mass variables")]
    NoMasses,
    #[error("expected {expected} masses, got {got}")]
    MassCount { expected: usize, got: usize },
    #[error("second matrix of the pair is singular: {0}")]
    Singular(TensorError),
    #[error("operator is not translation invariant: {0}")]
    NotTranslationInvariant(String),
    #[error("reduction needs n = 2, got {0}")]
    NotTwoBody(usize),
    #[error("gamma function pole at {0}")]
    GammaPole(f64),
    #[error("pole of the relative Hamiltonian at q = {0}")]
    HamiltonianPole(f64),
    #[error("{0}")]
    Invalid(String),
}

impl From<FieldError> for ModelError {
    fn from(e: FieldError) -> Self {
        ModelError::Tensor(e.into())
    }
}

/// Sets `coef` on `E_ij (x) E_kl`, accumulating.
fn add_e(m: &mut RfMatrix, (i, j): (usize, usize), (k, l): (usize, usize), coef: &RationalFunction) -> Result<(), TensorError> {
    let cur = m.get(&[i, k], &[j, l])?;
    m.set(&[i, k], &[j, l], cur.add(coef))
}

/// Which printed structure matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Printed {
    A,
    B,
    C,
}

fn printed(reg: &Arc<VariableRegistry>, which: Printed) -> Result<RfMatrix, TensorError> {
    let n = reg.n();
    let mut m = RfMatrix::identity(reg, &aux_legs(&["1", "2"], n))?;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let shift = if which == Printed::A { 0 } else { 1 };
            let x = RationalFunction::mu(reg).div(&RationalFunction::q_diff(reg, reg.q(i), reg.q(j), shift))?;
            let mx = x.neg();
            match which {
                Printed::A => {
                    add_e(&mut m, (i, j), (j, i), &x)?;
                    add_e(&mut m, (i, i), (j, j), &mx)?;
                }
                Printed::B => {
                    add_e(&mut m, (j, i), (j, i), &x)?;
                    add_e(&mut m, (i, i), (j, j), &mx)?;
                }
                Printed::C => {
                    add_e(&mut m, (j, i), (j, i), &x)?;
                    add_e(&mut m, (j, j), (i, i), &mx)?;
                }
            }
        }
    }
    Ok(m)
}

/// Registry with `q1..qn`, `mu` and masses `m1..mn`.
pub fn model_registry(n: usize) -> Arc<VariableRegistry> {
    VariableRegistry::builder(n).masses().build().expect("n <= 7 fits the registry")
}

/// The rational model. `quad.d` is the D obtained from A by the reduced
/// representation; the printed D (equal to the printed A) is kept aside.
#[derive(Debug, Clone)]
pub struct RationalModel {
    pub quad: AbcdQuadruple,
    printed_d: RfMatrix,
}

pub fn rational_model(n: usize) -> Result<RationalModel, ModelError> {
    if n < 2 {
        return Err(ModelError::SmallN(n));
    }
    let reg = model_registry(n);
    let a = printed(&reg, Printed::A)?;
    let (built, _) = builders::build_bcd_from_a(&a, &SpectralMap::Absent, Strictness::Lax)?;
    let quad = AbcdQuadruple {
        a: a.clone().with_role(Role::A),
        b: printed(&reg, Printed::B)?.with_role(Role::B),
        c: printed(&reg, Printed::C)?.with_role(Role::C),
        d: built.d,
        sig: AlgebraSignature::NEW,
    };
    Ok(RationalModel { quad, printed_d: a.with_role(Role::D) })
}

impl RationalModel {
    pub fn n(&self) -> usize {
        self.quad.n()
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        self.quad.registry()
    }

    pub fn printed_a(&self) -> &RfMatrix {
        &self.quad.a
    }

    pub fn printed_b(&self) -> &RfMatrix {
        &self.quad.b
    }

    pub fn printed_c(&self) -> &RfMatrix {
        &self.quad.c
    }

    pub fn printed_d(&self) -> &RfMatrix {
        &self.printed_d
    }

    /// The quadruple with the printed D in place of the constructed one.
    pub fn printed_quadruple(&self) -> AbcdQuadruple {
        AbcdQuadruple { d: self.printed_d.clone(), ..self.quad.clone() }
    }

    /// Unitarity, zero weight and the four dynamical Yang-Baxter equations.
    pub fn certify(&self, mode: CheckMode) -> Result<Vec<VerificationReport>, TensorError> {
        checks::structure_suite(&self.quad, AlgebraSignature::NEW, mode)
    }

    /// Mass variables as rational functions.
    pub fn masses(&self) -> Vec<RationalFunction> {
        symbolic_masses(self.registry()).expect("model registry has masses")
    }
}

pub fn symbolic_masses(reg: &Arc<VariableRegistry>) -> Result<Vec<RationalFunction>, ModelError> {
    (0..reg.n())
        .map(|k| reg.mass(k).map(|v| RationalFunction::var(reg, v)).ok_or(ModelError::NoMasses))
        .collect()
}

/// The three reflection solutions on a single auxiliary leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaKind {
    /// `m_i m_j E_ij`.
    #[serde(rename = "rank-one")]
    RankOne,
    /// `(q_i - q_j) m_i m_j E_ij`.
    #[serde(rename = "antisymmetric")]
    Antisymmetric,
    /// `f(q + mu e_i)/f(q - mu e_i) prod_{k != i} (q_i - q_k) E_ii`.
    #[serde(rename = "diagonal")]
    Diagonal,
}

impl GammaKind {
    pub const ALL: [GammaKind; 3] = [GammaKind::RankOne, GammaKind::Antisymmetric, GammaKind::Diagonal];

    pub fn label(&self) -> &'static str {
        match self {
            GammaKind::RankOne => "rank-one",
            GammaKind::Antisymmetric => "antisymmetric",
            GammaKind::Diagonal => "diagonal",
        }
    }

    pub fn is_invertible(&self) -> bool {
        matches!(self, GammaKind::Diagonal)
    }
}

impl std::str::FromStr for GammaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rank-one" | "7.5" => Ok(GammaKind::RankOne),
            "antisymmetric" | "7.6" => Ok(GammaKind::Antisymmetric),
            "diagonal" | "7.7" => Ok(GammaKind::Diagonal),
            _ => Err(format!("unknown gamma kind {s:?}")),
        }
    }
}

/// The function `f` of the diagonal solution. It only enters through
/// `f(q + mu e_i) / f(q - mu e_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FRatio {
    One,
    Function(RationalFunction),
}

impl FRatio {
    fn ratio(&self, i: usize, n: usize) -> Result<Option<RationalFunction>, FieldError> {
        match self {
            FRatio::One => Ok(None),
            FRatio::Function(f) => {
                let mut v = vec![0i64; n];
                v[i] = 1;
                let up = f.shift(&v);
                v[i] = -1;
                Ok(Some(up.div(&f.shift(&v))?))
            }
        }
    }
}

/// `gamma` on leg `"1"`. Masses are ignored by the diagonal kind.
pub fn gamma_solution(
    reg: &Arc<VariableRegistry>,
    kind: GammaKind,
    masses: &[RationalFunction],
    f: &FRatio,
) -> Result<RfMatrix, ModelError> {
    let n = reg.n();
    let legs = aux_legs(&["1"], n);
    let mut g = RfMatrix::zero(reg, &legs)?;
    if kind != GammaKind::Diagonal && masses.len() != n {
        return Err(ModelError::MassCount { expected: n, got: masses.len() });
    }
    for i in 0..n {
        match kind {
            GammaKind::RankOne | GammaKind::Antisymmetric => {
                for j in 0..n {
                    let mut v = masses[i].mul(&masses[j]);
                    if kind == GammaKind::Antisymmetric {
                        v = v.mul(&RationalFunction::q_diff(reg, reg.q(i), reg.q(j), 0));
                    }
                    g.set(&[i], &[j], v)?;
                }
            }
            GammaKind::Diagonal => {
                let mut v = RationalFunction::one(reg);
                for k in (0..n).filter(|&k| k != i) {
                    v = v.mul(&RationalFunction::q_diff(reg, reg.q(i), reg.q(k), 0));
                }
                if let Some(r) = f.ratio(i, n)? {
                    v = v.mul(&r);
                }
                g.set(&[i], &[i], v)?;
            }
        }
    }
    Ok(g.with_role(Role::Gamma))
}

/// `sum over the legs of K of Tr(e^{d} K KK^-1 e^{d})`, where `e^{d}` is the
/// diagonal shift matrix on every leg of the pair.
pub fn hamiltonian_from_pair(k: &RfMatrix, kk: &RfMatrix) -> Result<ShiftOperator, ModelError> {
    if k.leg_ids() != kk.leg_ids() {
        return Err(ModelError::Invalid("K and KK must act on the same legs".into()));
    }
    let inv = kk.inverse().map_err(ModelError::Singular)?;
    let reg = k.registry().clone();
    let legs = k.legs().to_vec();
    let mut e = lift(&RfMatrix::identity(&reg, &legs)?);
    for l in &legs {
        e = e.matmul(&exp_shift_matrix(&reg, &l.id, &legs, 1)?)?;
    }
    let mut m = e.matmul(&lift(&k.matmul(&inv)?))?.matmul(&e)?;
    for l in &legs {
        m = m.trace_over_leg(&l.id)?;
    }
    Ok(m.scalar().expect("all legs traced"))
}

/// `sum_l mu m_l^2 / prod_k (q_l - q_k + mu) e^{2 mu d_l}`.
pub fn hamiltonian_closed_form(reg: &Arc<VariableRegistry>, masses: &[RationalFunction]) -> Result<ShiftOperator, ModelError> {
    let n = reg.n();
    if masses.len() != n {
        return Err(ModelError::MassCount { expected: n, got: masses.len() });
    }
    let mut h = ShiftOperator::zero(reg);
    for l in 0..n {
        let mut den = RationalFunction::one(reg);
        for k in 0..n {
            den = den.mul(&RationalFunction::q_diff(reg, reg.q(l), reg.q(k), 1));
        }
        let c = RationalFunction::mu(reg).mul(&masses[l]).mul(&masses[l]).div(&den)?;
        let mut v = vec![0i64; n];
        v[l] = 2;
        h = h.add(&ShiftOperator::term(c, v));
    }
    Ok(h)
}

/// The total momentum shift `e^{2 mu sum d}`.
pub fn total_translation(reg: &Arc<VariableRegistry>) -> ShiftOperator {
    ShiftOperator::shift(reg, vec![2; reg.n()])
}

/// Registry in relative and center-of-mass coordinates `q = q1 - q2`, `Q = q1 + q2`.
pub fn relative_registry(with_masses: bool) -> Arc<VariableRegistry> {
    let b = RegistryBuilder::new(vec!["q".into(), "Q".into()]);
    let b = if with_masses { b.masses() } else { b };
    b.build().expect("small registry")
}

/// Rewrites a two-body operator in `(q, Q)`. A lattice shift `(a, b)` in
/// `(q1, q2)` becomes `(a - b, a + b)`, and `q1 = (Q + q)/2`, `q2 = (Q - q)/2`.
pub fn reduce_n2(h: &ShiftOperator) -> Result<ShiftOperator, ModelError> {
    let src = h.registry().clone();
    if src.n() != 2 {
        return Err(ModelError::NotTwoBody(src.n()));
    }
    let with_masses = src.mass(0).is_some();
    let extra = src.len() - 3;
    if extra != if with_masses { 2 } else { 0 } {
        return Err(ModelError::Invalid("reduction supports q1, q2, mu and masses only".into()));
    }
    let dst = relative_registry(with_masses);
    let images = relative_images(&src, &dst);
    let mut out = ShiftOperator::zero(&dst);
    for (v, c) in h.terms() {
        let mapped = c.map_polynomial(&dst, &images)?;
        if mapped.uses_var(dst.q(1)) {
            return Err(ModelError::NotTranslationInvariant(c.to_text()));
        }
        out = out.add(&ShiftOperator::term(mapped, vec![v[0] - v[1], v[0] + v[1]]));
    }
    Ok(out)
}

fn relative_images(src: &Arc<VariableRegistry>, dst: &Arc<VariableRegistry>) -> Vec<Polynomial> {
    let nv = dst.len();
    let half = crate::exactfield::q_frac(1, 2);
    let (q, big_q) = (Polynomial::var(nv, dst.q(0)), Polynomial::var(nv, dst.q(1)));
    let mut images = vec![big_q.add(&q).scale(&half), big_q.sub(&q).scale(&half), Polynomial::var(nv, dst.mu())];
    for k in 0..2 {
        if let (Some(_), Some(m)) = (src.mass(k), dst.mass(k)) {
            images.push(Polynomial::var(nv, m));
        }
    }
    images
}

/// Maps a function of `(q1, q2)` to `(q, Q)`.
pub fn to_relative(f: &RationalFunction, dst: &Arc<VariableRegistry>) -> Result<RationalFunction, ModelError> {
    Ok(f.map_polynomial(dst, &relative_images(f.registry(), dst))?)
}

/// `[m1^2/(q + mu) e^{2 mu d_q} - m2^2/(q - mu) e^{-2 mu d_q}] e^{2 mu d_Q}`.
pub fn printed_reduced_hamiltonian() -> Result<ShiftOperator, ModelError> {
    let reg = relative_registry(true);
    let m = symbolic_masses(&reg)?;
    let q = RationalFunction::q(&reg, 0);
    let mu = RationalFunction::mu(&reg);
    let plus = m[0].mul(&m[0]).div(&q.add(&mu))?;
    let minus = m[1].mul(&m[1]).div(&q.sub(&mu))?.neg();
    let rel = ShiftOperator::term(plus, vec![2, 0]).add(&ShiftOperator::term(minus, vec![-2, 0]));
    Ok(rel.mul(&ShiftOperator::shift(&reg, vec![0, 2])))
}

/// `H` from the left-fused pair: rank-one `gamma` fused with itself against the
/// diagonal `gamma` (f = 1) fused with itself.
pub fn fused_hamiltonian(model: &RationalModel) -> Result<ShiftOperator, ModelError> {
    let reg = model.registry();
    let k = gamma_solution(reg, GammaKind::RankOne, &model.masses(), &FRatio::One)?;
    let kk = gamma_solution(reg, GammaKind::Diagonal, &[], &FRatio::One)?;
    let kf = builders::fuse(&k, &k, &model.quad, Side::Left)?.k;
    let kkf = builders::fuse(&kk, &kk, &model.quad, Side::Left)?.k;
    hamiltonian_from_pair(&kf, &kkf)
}

// ---------------------------------------------------------------------------
// Numerics.

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `(ln |Gamma(x)|, sign Gamma(x))` by the Lanczos approximation, with the
/// reflection formula below 1/2.
pub fn ln_gamma(x: f64) -> Result<(f64, f64), ModelError> {
    if x <= 0.0 && x == x.floor() {
        return Err(ModelError::GammaPole(x));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        let (lg, sg) = ln_gamma(1.0 - x)?;
        return Ok((std::f64::consts::PI.ln() - s.abs().ln() - lg, s.signum() * sg));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let lg = 0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln();
    Ok((lg, 1.0))
}

pub fn gamma(x: f64) -> Result<f64, ModelError> {
    let (l, s) = ln_gamma(x)?;
    Ok(s * l.exp())
}

/// `Gamma(x + 1/2) / Gamma(x)`.
pub fn gamma_ratio(x: f64) -> Result<f64, ModelError> {
    let (a, sa) = ln_gamma(x + 0.5)?;
    let (b, sb) = ln_gamma(x)?;
    Ok(sa * sb * (a - b).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Sin,
    Cos,
}

/// Coefficient `c` of the exponential factor `exp(-c q ln(m1/m2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentMode {
    /// `c = 1/(2 mu)`, the value forced by exact cancellation.
    Derived,
    /// `c = 1/(4 mu)` as printed.
    Printed,
}

impl ExponentMode {
    pub fn coefficient(&self, mu: f64) -> f64 {
        match self {
            ExponentMode::Derived => 1.0 / (2.0 * mu),
            ExponentMode::Printed => 1.0 / (4.0 * mu),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub k: u32,
    pub parity: Parity,
    pub m1: f64,
    pub m2: f64,
    pub mu: f64,
    pub exponent: ExponentMode,
}

impl Eigenfunction {
    /// `Gamma(x + 1/2)/Gamma(x) exp(-c q ln(m1/m2)) trig(k pi q / mu)` with `x = (q + mu)/(4 mu)`.
    pub fn value(&self, q: f64) -> Result<f64, ModelError> {
        let x = (q + self.mu) / (4.0 * self.mu);
        let r = gamma_ratio(x)?;
        let c = self.exponent.coefficient(self.mu);
        let e = (-c * q * (self.m1 / self.m2).ln()).exp();
        let arg = self.k as f64 * std::f64::consts::PI * q / self.mu;
        let t = match self.parity {
            Parity::Sin => arg.sin(),
            Parity::Cos => arg.cos(),
        };
        Ok(r * e * t)
    }
}

pub fn eigenfunction_value(e: &Eigenfunction, q: f64) -> Result<f64, ModelError> {
    e.value(q)
}

/// The two terms of the relative Hamiltonian applied at `q` and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub q: f64,
    pub value: f64,
    pub plus_term: f64,
    pub minus_term: f64,
}

impl Residual {
    /// `|value| / max(|terms|)`, zero when both terms vanish.
    pub fn relative(&self) -> f64 {
        let scale = self.plus_term.abs().max(self.minus_term.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.value.abs() / scale
        }
    }
}

/// `m1^2/(q + mu) psi(q + 2 mu) - m2^2/(q - mu) psi(q - 2 mu)`.
pub fn apply_relative_hamiltonian(e: &Eigenfunction, q: f64) -> Result<Residual, ModelError> {
    if (q + e.mu).abs() < 1e-300 || (q - e.mu).abs() < 1e-300 {
        return Err(ModelError::HamiltonianPole(q));
    }
    let plus_term = e.m1 * e.m1 / (q + e.mu) * e.value(q + 2.0 * e.mu)?;
    let minus_term = e.m2 * e.m2 / (q - e.mu) * e.value(q - 2.0 * e.mu)?;
    Ok(Residual { q, value: plus_term - minus_term, plus_term, minus_term })
}

/// Sample points `q = mu (j + u)` with `j` in `-2..=2` and `u` in
/// `[0.05, 0.45] U [0.55, 0.95]`, so every gamma argument and the Hamiltonian
/// poles stay at least `0.05 mu` away.
pub fn sample_points(mu: f64, count: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let j = rng.gen_range(-2i32..=2) as f64;
            let u: f64 = rng.gen_range(0.05..0.45);
            let u = if rng.gen_bool(0.5) { u } else { u + 0.5 };
            mu * (j + u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_a_at_n2() {
        let m = rational_model(2).unwrap();
        let a = m.printed_a();
        // Identity plus two couplings and two diagonal corrections.
        assert_eq!(a.nnz(), 6);
        let reg = m.registry();
        let x = RationalFunction::mu(reg).div(&RationalFunction::q_diff(reg, 0, 1, 0)).unwrap();
        assert_eq!(a.get(&[0, 1], &[1, 0]).unwrap(), x);
        assert_eq!(a.get(&[0, 1], &[0, 1]).unwrap(), RationalFunction::one(reg).sub(&x));
        assert!(m.printed_d().equals(a).unwrap());
        assert!(!m.quad.d.equals(a).unwrap());
    }

    #[test]
    fn gamma_examples() {
        let reg = model_registry(2);
        let ones = vec![RationalFunction::one(&reg); 2];
        let g = gamma_solution(&reg, GammaKind::RankOne, &ones, &FRatio::One).unwrap();
        assert_eq!(g.nnz(), 4);
        assert!(g.entries().all(|(_, _, v)| v.is_one()));
        let g = gamma_solution(&reg, GammaKind::Antisymmetric, &ones, &FRatio::One).unwrap();
        assert!(g.get(&[0], &[0]).unwrap().is_zero() && g.get(&[1], &[1]).unwrap().is_zero());
        let g = gamma_solution(&reg, GammaKind::Diagonal, &[], &FRatio::One).unwrap();
        assert_eq!(g.get(&[0], &[0]).unwrap(), RationalFunction::q_diff(&reg, 0, 1, 0));
        assert_eq!(g.get(&[1], &[1]).unwrap(), RationalFunction::q_diff(&reg, 1, 0, 0));
        assert!(gamma_solution(&reg, GammaKind::RankOne, &ones[..1], &FRatio::One).is_err());
    }

    #[test]
    fn hamiltonian_of_equal_diagonal_pair_is_pure_shifts() {
        let reg = model_registry(2);
        let g = gamma_solution(&reg, GammaKind::Diagonal, &[], &FRatio::One).unwrap();
        let h = hamiltonian_from_pair(&g, &g).unwrap();
        let expect = ShiftOperator::shift(&reg, vec![2, 0]).add(&ShiftOperator::shift(&reg, vec![0, 2]));
        assert!(h.equals(&expect));
    }

    #[test]
    fn rank_one_pair_is_rejected_when_singular() {
        let reg = model_registry(2);
        let m = symbolic_masses(&reg).unwrap();
        let g = gamma_solution(&reg, GammaKind::RankOne, &m, &FRatio::One).unwrap();
        assert!(matches!(hamiltonian_from_pair(&g, &g), Err(ModelError::Singular(_))));
    }

    #[test]
    fn closed_form_with_zero_masses_vanishes() {
        let reg = model_registry(3);
        let z = vec![RationalFunction::zero(&reg); 3];
        assert!(hamiltonian_closed_form(&reg, &z).unwrap().is_zero());
    }

    #[test]
    fn reduce_rejects_non_invariant() {
        let reg = model_registry(2);
        let h = ShiftOperator::scalar(RationalFunction::q(&reg, 0));
        assert!(matches!(reduce_n2(&h), Err(ModelError::NotTranslationInvariant(_))));
        assert!(reduce_n2(&ShiftOperator::zero(&reg)).unwrap().is_zero());
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-11);
        assert!((gamma(-0.5).unwrap() + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!(matches!(ln_gamma(-2.0), Err(ModelError::GammaPole(_))));
    }

    #[test]
    fn sin_zero_mode_vanishes() {
        let e = Eigenfunction { k: 0, parity: Parity::Sin, m1: 2.0, m2: 1.0, mu: 1.0, exponent: ExponentMode::Derived };
        for q in sample_points(1.0, 10, 3) {
            assert_eq!(e.value(q).unwrap(), 0.0);
            assert_eq!(apply_relative_hamiltonian(&e, q).unwrap().relative(), 0.0);
        }
    }

    #[test]
    fn samples_avoid_poles() {
        for q in sample_points(1.5, 200, 11) {
            let t = q / 1.5;
            let frac = t - t.floor();
            assert!((0.05..=0.95).contains(&frac) && (frac - 0.5).abs() >= 0.05);
        }
    }
}
