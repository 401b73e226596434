//! Sparse matrices on ordered tensor legs.
//!
//! A matrix on legs `[l0, l1, ...]` stores entries keyed by flat row-major
//! indices; digit `p` of a flat index is the basis label on leg `p`. Every
//! leg has dimension `n`, and basis vector `j` carries Cartan weight `e_j`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactfield::{modp, FieldError, RationalFunction, VariableRegistry};
use crate::report::{VerificationReport, Witness};
use crate::exactfield::CheckMode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("unknown leg {0:?}")]
    UnknownLeg(String),
    #[error("duplicate leg {0:?}")]
    DuplicateLeg(String),
    #[error("leg lists differ: {0:?} vs {1:?}")]
    LegMismatch(Vec<String>, Vec<String>),
    #[error("leg {leg:?} has dimension {dim}, registry has n = {n}")]
    Dimension { leg: String, dim: usize, n: usize },
    #[error("matrix does not act as the identity on leg {leg:?} (entry {row:?}, {col:?})")]
    NotIdentityOnLeg { leg: String, row: Vec<usize>, col: Vec<usize> },
    #[error("singular block on basis {0:?}")]
    Singular(Vec<Vec<usize>>),
    #[error("index out of range")]
    IndexRange,
    #[error("malformed matrix JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegRole {
    Auxiliary,
    Quantum,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leg {
    pub id: String,
    pub dim: usize,
    pub role: LegRole,
}

impl Leg {
    pub fn aux(id: &str, n: usize) -> Self {
        Self { id: id.to_string(), dim: n, role: LegRole::Auxiliary }
    }

    pub fn quantum(id: &str, n: usize) -> Self {
        Self { id: id.to_string(), dim: n, role: LegRole::Quantum }
    }
}

/// Auxiliary legs with the given ids.
pub fn aux_legs(ids: &[&str], n: usize) -> Vec<Leg> {
    ids.iter().map(|id| Leg::aux(id, n)).collect()
}

/// What a matrix stands for; carried for reports and JSON only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
    C,
    D,
    K,
    T,
    TCal,
    Gamma,
    L,
    J,
    Q,
    S,
    P,
    KPlus,
    KK,
}

/// Matrix entries: rational functions or difference operators.
pub trait Coefficient: Clone + fmt::Debug + Send + Sync + 'static {
    fn zero(reg: &Arc<VariableRegistry>) -> Self;
    fn one(reg: &Arc<VariableRegistry>) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Conjugation by the lattice shift `e^{mu v.d}`.
    fn shifted(&self, v: &[i64]) -> Self;
    fn to_json(&self) -> Value;
    fn from_json(reg: &Arc<VariableRegistry>, v: &Value) -> Result<Self, TensorError>;
    fn text(&self) -> String;
}

impl Coefficient for RationalFunction {
    fn zero(reg: &Arc<VariableRegistry>) -> Self {
        RationalFunction::zero(reg)
    }
    fn one(reg: &Arc<VariableRegistry>) -> Self {
        RationalFunction::one(reg)
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RationalFunction::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RationalFunction::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RationalFunction::mul(self, o)
    }
    fn neg(&self) -> Self {
        RationalFunction::neg(self)
    }
    fn shifted(&self, v: &[i64]) -> Self {
        self.shift(v)
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_text())
    }
    fn from_json(reg: &Arc<VariableRegistry>, v: &Value) -> Result<Self, TensorError> {
        let s = v.as_str().ok_or_else(|| TensorError::Json("coefficient must be a string".into()))?;
        Ok(RationalFunction::parse(reg, s)?)
    }
    fn text(&self) -> String {
        self.to_text()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub leg: String,
    pub sign: i64,
    pub multiplicity: u32,
}

impl ShiftSpec {
    pub fn new(leg: &str, sign: i64) -> Self {
        Self { leg: leg.to_string(), sign, multiplicity: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlSc {
    /// Shift by the row weight of the leg.
    Sl,
    /// Shift by the column weight of the leg.
    Sc,
}

#[derive(Clone)]
pub struct TensorMatrix<C: Coefficient> {
    reg: Arc<VariableRegistry>,
    legs: Vec<Leg>,
    entries: BTreeMap<(u32, u32), C>,
    role: Option<Role>,
}

pub type RfMatrix = TensorMatrix<RationalFunction>;

impl<C: Coefficient> fmt::Debug for TensorMatrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TensorMatrix{:?} on {:?}", self.role.map(|r| format!("<{r:?}>")).unwrap_or_default(), self.leg_ids())?;
        for (&(r, c), v) in &self.entries {
            writeln!(f, "  {:?} {:?}: {}", self.one_based(r), self.one_based(c), v.text())?;
        }
        Ok(())
    }
}

impl<C: Coefficient> TensorMatrix<C> {
    pub fn zero(reg: &Arc<VariableRegistry>, legs: &[Leg]) -> Result<Self, TensorError> {
        let n = reg.n();
        let mut seen = BTreeSet::new();
        for l in legs {
            if l.dim != n {
                return Err(TensorError::Dimension { leg: l.id.clone(), dim: l.dim, n });
            }
            if !seen.insert(l.id.as_str()) {
                return Err(TensorError::DuplicateLeg(l.id.clone()));
            }
        }
        if (n as f64).powi(legs.len() as i32) > u32::MAX as f64 {
            return Err(TensorError::IndexRange);
        }
        Ok(Self { reg: reg.clone(), legs: legs.to_vec(), entries: BTreeMap::new(), role: None })
    }

    pub fn identity(reg: &Arc<VariableRegistry>, legs: &[Leg]) -> Result<Self, TensorError> {
        let mut m = Self::zero(reg, legs)?;
        for i in 0..m.size() {
            m.entries.insert((i, i), C::one(reg));
        }
        Ok(m)
    }

    /// Builds from entries given as 0-based digit lists; duplicates add up.
    pub fn from_entries<I>(reg: &Arc<VariableRegistry>, legs: &[Leg], entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Vec<usize>, C)>,
    {
        let mut m = Self::zero(reg, legs)?;
        for (r, c, v) in entries {
            let (r, c) = (m.flat(&r)?, m.flat(&c)?);
            m.accumulate(r, c, v);
        }
        Ok(m)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = Some(role);
        self
    }

    pub fn role(&self) -> Option<Role> {
        self.role
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn n(&self) -> usize {
        self.reg.n()
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn leg_ids(&self) -> Vec<String> {
        self.legs.iter().map(|l| l.id.clone()).collect()
    }

    /// Number of basis states, `n^legs`.
    pub fn size(&self) -> u32 {
        (self.n() as u32).pow(self.legs.len() as u32)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, &C)> {
        self.entries.iter().map(move |(&(r, c), v)| (self.digits(r), self.digits(c), v))
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> Result<C, TensorError> {
        let key = (self.flat(row)?, self.flat(col)?);
        Ok(self.entries.get(&key).cloned().unwrap_or_else(|| C::zero(&self.reg)))
    }

    pub fn set(&mut self, row: &[usize], col: &[usize], v: C) -> Result<(), TensorError> {
        let key = (self.flat(row)?, self.flat(col)?);
        if v.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    fn accumulate(&mut self, r: u32, c: u32, v: C) {
        use std::collections::btree_map::Entry;
        match self.entries.entry((r, c)) {
            Entry::Vacant(e) => {
                if !v.is_zero() {
                    e.insert(v);
                }
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&v);
                if s.is_zero() {
                    e.remove();
                } else {
                    e.insert(s);
                }
            }
        }
    }

    pub fn digits(&self, flat: u32) -> Vec<usize> {
        let n = self.n() as u32;
        let mut out = vec![0usize; self.legs.len()];
        let mut f = flat;
        for p in (0..self.legs.len()).rev() {
            out[p] = (f % n) as usize;
            f /= n;
        }
        out
    }

    fn digit_at(&self, flat: u32, pos: usize) -> usize {
        let n = self.n() as u32;
        ((flat / n.pow((self.legs.len() - 1 - pos) as u32)) % n) as usize
    }

    pub fn flat(&self, digits: &[usize]) -> Result<u32, TensorError> {
        if digits.len() != self.legs.len() || digits.iter().any(|&d| d >= self.n()) {
            return Err(TensorError::IndexRange);
        }
        Ok(digits.iter().fold(0u32, |acc, &d| acc * self.n() as u32 + d as u32))
    }

    pub fn one_based(&self, flat: u32) -> Vec<usize> {
        self.digits(flat).into_iter().map(|d| d + 1).collect()
    }

    pub fn leg_pos(&self, id: &str) -> Result<usize, TensorError> {
        self.legs.iter().position(|l| l.id == id).ok_or_else(|| TensorError::UnknownLeg(id.to_string()))
    }

    pub fn map<D: Coefficient, F: Fn(&C) -> D>(&self, f: F) -> TensorMatrix<D> {
        let mut entries = BTreeMap::new();
        for (&k, v) in &self.entries {
            let w = f(v);
            if !w.is_zero() {
                entries.insert(k, w);
            }
        }
        TensorMatrix { reg: self.reg.clone(), legs: self.legs.clone(), entries, role: self.role }
    }

    fn map_same<F: Fn(&C) -> C>(&self, f: F) -> Self {
        self.map(f)
    }

    /// Renames legs positionally; `A` on `(1,2)` relabeled to `(2,1)` is `A_21`.
    pub fn relabel(&self, ids: &[&str]) -> Result<Self, TensorError> {
        if ids.len() != self.legs.len() {
            return Err(TensorError::LegMismatch(self.leg_ids(), ids.iter().map(|s| s.to_string()).collect()));
        }
        let legs: Vec<Leg> =
            self.legs.iter().zip(ids).map(|(l, id)| Leg { id: id.to_string(), dim: l.dim, role: l.role }).collect();
        let mut m = Self::zero(&self.reg, &legs)?;
        m.entries = self.entries.clone();
        m.role = self.role;
        Ok(m)
    }

    /// `M` relabeled to `ids` and embedded; `place(A, ["2","1"], amb)` is `A_21`.
    pub fn place(&self, ids: &[&str], ambient: &[Leg]) -> Result<Self, TensorError> {
        let mut m = self.relabel(ids)?;
        for l in &mut m.legs {
            if let Some(a) = ambient.iter().find(|a| a.id == l.id) {
                l.role = a.role;
            }
        }
        m.embed(ambient)
    }

    /// Row vector (flat index to coefficient) times this matrix.
    pub fn row_mul(&self, v: &BTreeMap<u32, C>) -> BTreeMap<u32, C> {
        let mut out: BTreeMap<u32, C> = BTreeMap::new();
        for (&r, x) in v {
            for (&(_, c), m) in self.entries.range((r, 0)..=(r, u32::MAX)) {
                let t = x.mul(m);
                match out.get_mut(&c) {
                    Some(e) => *e = e.add(&t),
                    None => {
                        out.insert(c, t);
                    }
                }
            }
        }
        out.retain(|_, x| !x.is_zero());
        out
    }

    /// Acts as the identity on ambient legs this matrix does not carry.
    pub fn embed(&self, ambient: &[Leg]) -> Result<Self, TensorError> {
        let pos: Vec<usize> = self
            .legs
            .iter()
            .map(|l| ambient.iter().position(|a| a.id == l.id).ok_or_else(|| TensorError::UnknownLeg(l.id.clone())))
            .collect::<Result<_, _>>()?;
        let mut out = Self::zero(&self.reg, ambient)?;
        out.role = self.role;
        if pos.iter().copied().eq(0..ambient.len()) {
            out.entries = self.entries.clone();
            return Ok(out);
        }
        let n = self.n();
        let free: Vec<usize> = (0..ambient.len()).filter(|p| !pos.contains(p)).collect();
        let combos = n.pow(free.len() as u32);
        let mut rd = vec![0usize; ambient.len()];
        let mut cd = vec![0usize; ambient.len()];
        for (&(r, c), v) in &self.entries {
            let (sr, sc) = (self.digits(r), self.digits(c));
            for (i, &p) in pos.iter().enumerate() {
                rd[p] = sr[i];
                cd[p] = sc[i];
            }
            for k in 0..combos {
                let mut kk = k;
                for &p in &free {
                    rd[p] = kk % n;
                    cd[p] = kk % n;
                    kk /= n;
                }
                out.entries.insert((out.flat(&rd)?, out.flat(&cd)?), v.clone());
            }
        }
        Ok(out)
    }

    fn same_legs(&self, o: &Self) -> Result<(), TensorError> {
        if self.leg_ids() != o.leg_ids() {
            return Err(TensorError::LegMismatch(self.leg_ids(), o.leg_ids()));
        }
        if !self.reg.same_as(&o.reg) {
            return Err(FieldError::RegistryMismatch.into());
        }
        Ok(())
    }

    pub fn matmul(&self, o: &Self) -> Result<Self, TensorError> {
        self.same_legs(o)?;
        let mut rows: BTreeMap<u32, Vec<(u32, &C)>> = BTreeMap::new();
        for (&(r, c), v) in &o.entries {
            rows.entry(r).or_default().push((c, v));
        }
        let mut out = Self::zero(&self.reg, &self.legs)?;
        for (&(r, k), a) in &self.entries {
            if let Some(row) = rows.get(&k) {
                for &(c, b) in row {
                    out.accumulate(r, c, a.mul(b));
                }
            }
        }
        Ok(out)
    }

    /// Ordered product of matrices, each first embedded into `ambient`.
    pub fn product(factors: &[&Self], ambient: &[Leg]) -> Result<Self, TensorError> {
        let mut it = factors.iter();
        let first = it.next().ok_or(TensorError::IndexRange)?;
        let mut acc = first.embed(ambient)?;
        for f in it {
            acc = acc.matmul(&f.embed(ambient)?)?;
        }
        Ok(acc)
    }

    pub fn add(&self, o: &Self) -> Result<Self, TensorError> {
        self.same_legs(o)?;
        let mut out = self.clone();
        for (&(r, c), v) in &o.entries {
            out.accumulate(r, c, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, TensorError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_same(|v| v.neg())
    }

    /// Left multiplication of every entry by `k`.
    pub fn scale(&self, k: &C) -> Self {
        self.map_same(|v| k.mul(v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// First entry where the two matrices differ, with its residual.
    pub fn first_difference(&self, o: &Self) -> Result<Option<Witness>, TensorError> {
        self.same_legs(o)?;
        let keys: BTreeSet<(u32, u32)> = self.entries.keys().chain(o.entries.keys()).copied().collect();
        let zero = C::zero(&self.reg);
        for k in keys {
            let a = self.entries.get(&k).unwrap_or(&zero);
            let b = o.entries.get(&k).unwrap_or(&zero);
            let d = a.sub(b);
            if !d.is_zero() {
                return Ok(Some(Witness { row: self.one_based(k.0), col: self.one_based(k.1), residual: d.text() }));
            }
        }
        Ok(None)
    }

    pub fn equals(&self, o: &Self) -> Result<bool, TensorError> {
        Ok(self.first_difference(o)?.is_none())
    }

    pub fn is_identity_on(&self, leg: &str) -> Result<bool, TensorError> {
        let p = self.leg_pos(leg)?;
        Ok(self.entries.keys().all(|&(r, c)| self.digit_at(r, p) == self.digit_at(c, p)))
    }

    /// `M(q + sign * multiplicity * h^(leg))`.
    pub fn dynamical_shift(&self, spec: &ShiftSpec) -> Result<Self, TensorError> {
        let p = self.leg_pos(&spec.leg)?;
        let n = self.n();
        let amount = spec.sign * spec.multiplicity as i64;
        let mut out = self.clone();
        for (&(r, c), v) in self.entries.iter() {
            let (dr, dc) = (self.digit_at(r, p), self.digit_at(c, p));
            if dr != dc {
                return Err(TensorError::NotIdentityOnLeg {
                    leg: spec.leg.clone(),
                    row: self.one_based(r),
                    col: self.one_based(c),
                });
            }
            if amount != 0 {
                let mut sv = vec![0i64; n];
                sv[dr] = amount;
                out.entries.insert((r, c), v.shifted(&sv));
            }
        }
        Ok(out)
    }

    /// Applies `q -> q + sum_k c_k h^(leg_k)` as successive single-leg shifts.
    pub fn shift_by(&self, legs: &[(&str, i64)]) -> Result<Self, TensorError> {
        let mut m = self.clone();
        for &(leg, c) in legs {
            if c != 0 {
                m = m.dynamical_shift(&ShiftSpec { leg: leg.to_string(), sign: c.signum(), multiplicity: c.unsigned_abs() as u32 })?;
            }
        }
        Ok(m)
    }

    /// Embeds into `ambient`, then shifts.
    pub fn at(&self, ambient: &[Leg], shifts: &[(&str, i64)]) -> Result<Self, TensorError> {
        self.embed(ambient)?.shift_by(shifts)
    }

    /// Entrywise shift by the row (`sl`) or column (`sc`) weight on `leg`.
    pub fn slsc_shift(&self, leg: &str, kind: SlSc, sign: i64) -> Result<Self, TensorError> {
        let p = self.leg_pos(leg)?;
        let n = self.n();
        let mut out = self.clone();
        for (&(r, c), v) in self.entries.iter() {
            let d = match kind {
                SlSc::Sl => self.digit_at(r, p),
                SlSc::Sc => self.digit_at(c, p),
            };
            let mut sv = vec![0i64; n];
            sv[d] = sign;
            out.entries.insert((r, c), v.shifted(&sv));
        }
        Ok(out)
    }

    pub fn partial_transpose(&self, legs: &[&str]) -> Result<Self, TensorError> {
        let ps: Vec<usize> = legs.iter().map(|l| self.leg_pos(l)).collect::<Result<_, _>>()?;
        let mut out = Self::zero(&self.reg, &self.legs)?;
        out.role = self.role;
        for (&(r, c), v) in &self.entries {
            let (mut rd, mut cd) = (self.digits(r), self.digits(c));
            for &p in &ps {
                std::mem::swap(&mut rd[p], &mut cd[p]);
            }
            out.entries.insert((self.flat(&rd)?, self.flat(&cd)?), v.clone());
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let ids = self.leg_ids();
        let refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        self.partial_transpose(&refs).expect("own legs")
    }

    /// `P = sum E_ij (x) E_ji` on legs `a`, `b`, identity elsewhere.
    pub fn permutation_matrix(reg: &Arc<VariableRegistry>, a: &str, b: &str, ambient: &[Leg]) -> Result<Self, TensorError> {
        let mut out = Self::zero(reg, ambient)?;
        let pa = out.leg_pos(a)?;
        let pb = out.leg_pos(b)?;
        if ambient[pa].dim != ambient[pb].dim {
            return Err(TensorError::Dimension { leg: b.to_string(), dim: ambient[pb].dim, n: ambient[pa].dim });
        }
        for r in 0..out.size() {
            let mut cd = out.digits(r);
            cd.swap(pa, pb);
            let c = out.flat(&cd)?;
            out.entries.insert((r, c), C::one(reg));
        }
        Ok(out.with_role(Role::P))
    }

    /// First entry violating `[sum_a c_a h^(a), M] = 0`.
    pub fn zero_weight_violation(&self, weights: &[(&str, i64)]) -> Result<Option<Witness>, TensorError> {
        let ws: Vec<(usize, i64)> = weights.iter().map(|&(l, c)| Ok((self.leg_pos(l)?, c))).collect::<Result<_, TensorError>>()?;
        let n = self.n();
        for (&(r, c), v) in &self.entries {
            let mut w = vec![0i64; n];
            for &(p, k) in &ws {
                w[self.digit_at(r, p)] += k;
                w[self.digit_at(c, p)] -= k;
            }
            if w.iter().any(|&x| x != 0) {
                return Ok(Some(Witness { row: self.one_based(r), col: self.one_based(c), residual: v.text() }));
            }
        }
        Ok(None)
    }

    pub fn zero_weight_check(&self, name: &str, weights: &[(&str, i64)]) -> Result<VerificationReport, TensorError> {
        let anchor = format!(
            "[{}, M] = 0",
            weights.iter().map(|(l, c)| format!("{c}*h{l}")).collect::<Vec<_>>().join(" + ")
        );
        let r = VerificationReport::new(name, anchor, CheckMode::Exact);
        Ok(match self.zero_weight_violation(weights)? {
            None => r,
            Some(w) => r.fail(Some(w)),
        })
    }

    /// Sum of the diagonal blocks over `leg`; the remaining legs keep their order.
    pub fn trace_over_leg(&self, leg: &str) -> Result<Self, TensorError> {
        let p = self.leg_pos(leg)?;
        let mut legs = self.legs.clone();
        legs.remove(p);
        let mut out = Self::zero(&self.reg, &legs)?;
        for (&(r, c), v) in &self.entries {
            let (mut rd, mut cd) = (self.digits(r), self.digits(c));
            if rd[p] != cd[p] {
                continue;
            }
            rd.remove(p);
            cd.remove(p);
            let (fr, fc) = (out.flat(&rd)?, out.flat(&cd)?);
            out.accumulate(fr, fc, v.clone());
        }
        Ok(out)
    }

    /// The single entry of a matrix with no legs.
    pub fn scalar(&self) -> Option<C> {
        if !self.legs.is_empty() {
            return None;
        }
        Some(self.entries.get(&(0, 0)).cloned().unwrap_or_else(|| C::zero(&self.reg)))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(&(r, c), v)| json!({"row": self.one_based(r), "col": self.one_based(c), "coeff": v.to_json()}))
            .collect();
        let mut obj = json!({"legs": self.legs, "entries": entries});
        if let Some(role) = self.role {
            obj["role"] = serde_json::to_value(role).expect("role serializes");
        }
        obj
    }

    pub fn from_json(reg: &Arc<VariableRegistry>, v: &Value) -> Result<Self, TensorError> {
        let bad = |m: &str| TensorError::Json(m.to_string());
        let legs: Vec<Leg> = serde_json::from_value(v.get("legs").cloned().ok_or_else(|| bad("missing legs"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let mut m = Self::zero(reg, &legs)?;
        if let Some(r) = v.get("role") {
            m.role = Some(serde_json::from_value(r.clone()).map_err(|e| bad(&e.to_string()))?);
        }
        let entries = v.get("entries").and_then(|e| e.as_array()).ok_or_else(|| bad("missing entries"))?;
        let idx = |e: &Value, k: &str| -> Result<Vec<usize>, TensorError> {
            let a: Vec<usize> = serde_json::from_value(e.get(k).cloned().ok_or_else(|| bad(k))?).map_err(|x| bad(&x.to_string()))?;
            a.into_iter().map(|d| d.checked_sub(1).ok_or(TensorError::IndexRange)).collect()
        };
        for e in entries {
            let coeff = C::from_json(reg, e.get("coeff").ok_or_else(|| bad("missing coeff"))?)?;
            let (r, c) = (idx(e, "row")?, idx(e, "col")?);
            let (fr, fc) = (m.flat(&r)?, m.flat(&c)?);
            m.accumulate(fr, fc, coeff);
        }
        Ok(m)
    }
}

/// Dense-free matrix over the verification prime field.
#[derive(Debug, Clone, PartialEq)]
pub struct ModMatrix {
    entries: BTreeMap<(u32, u32), u64>,
}

impl ModMatrix {
    pub fn matmul(&self, o: &ModMatrix) -> ModMatrix {
        let mut rows: BTreeMap<u32, Vec<(u32, u64)>> = BTreeMap::new();
        for (&(r, c), &v) in &o.entries {
            rows.entry(r).or_default().push((c, v));
        }
        let mut out: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for (&(r, k), &a) in &self.entries {
            if let Some(row) = rows.get(&k) {
                for &(c, b) in row {
                    let e = out.entry((r, c)).or_insert(0);
                    *e = modp::add(*e, modp::mul(a, b));
                }
            }
        }
        out.retain(|_, v| *v != 0);
        ModMatrix { entries: out }
    }

    /// `self + k * o`.
    pub fn add_scaled(&self, o: &ModMatrix, k: u64) -> ModMatrix {
        let mut out = self.entries.clone();
        for (&key, &v) in &o.entries {
            let e = out.entry(key).or_insert(0);
            *e = modp::add(*e, modp::mul(k, v));
        }
        out.retain(|_, v| *v != 0);
        ModMatrix { entries: out }
    }

    pub fn zero() -> ModMatrix {
        ModMatrix { entries: BTreeMap::new() }
    }

    pub fn first_nonzero(&self) -> Option<(u32, u32)> {
        self.entries.keys().next().copied()
    }

    /// First key where the two differ.
    pub fn first_difference(&self, o: &ModMatrix) -> Option<(u32, u32)> {
        let keys: BTreeSet<(u32, u32)> = self.entries.keys().chain(o.entries.keys()).copied().collect();
        keys.into_iter().find(|k| self.entries.get(k).copied().unwrap_or(0) != o.entries.get(k).copied().unwrap_or(0))
    }
}

impl TensorMatrix<RationalFunction> {
    pub fn eval_mod(&self, point: &[u64]) -> Result<ModMatrix, FieldError> {
        let mut entries = BTreeMap::new();
        for (&k, v) in &self.entries {
            let x = v.eval_mod(point)?;
            if x != 0 {
                entries.insert(k, x);
            }
        }
        Ok(ModMatrix { entries })
    }

    /// Total degree bound over all entries (numerator, denominator).
    pub fn degree_bound(&self) -> (u32, u32) {
        self.entries.values().map(|v| v.degrees()).fold((0, 0), |(a, b), (c, d)| (a.max(c), b + d))
    }

    /// True if any entry needed a general-polynomial denominator.
    pub fn uses_general_denominator(&self) -> bool {
        self.entries.values().any(|v| v.uses_general_denominator())
    }

    pub fn substitute_value(&self, var: usize, value: &crate::exactfield::Q) -> Result<Self, FieldError> {
        let mut out = self.clone();
        out.entries.clear();
        for (&k, v) in &self.entries {
            let w = v.substitute_value(var, value)?;
            if !w.is_zero() {
                out.entries.insert(k, w);
            }
        }
        Ok(out)
    }

    /// Inverse by Gauss-Jordan elimination on each connected block.
    pub fn inverse(&self) -> Result<Self, TensorError> {
        let size = self.size() as usize;
        let mut parent: Vec<usize> = (0..size).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for &(r, c) in self.entries.keys() {
            let (a, b) = (find(&mut parent, r as usize), find(&mut parent, c as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut blocks: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for i in 0..size {
            let root = find(&mut parent, i);
            blocks.entry(root).or_default().push(i as u32);
        }
        let reg = self.reg.clone();
        let mut out = Self::zero(&reg, &self.legs)?;
        out.role = self.role;
        for idx in blocks.values() {
            let k = idx.len();
            let singular = || TensorError::Singular(idx.iter().map(|&i| self.one_based(i)).collect());
            let mut a: Vec<Vec<RationalFunction>> = idx
                .iter()
                .map(|&r| idx.iter().map(|&c| self.entries.get(&(r, c)).cloned().unwrap_or_else(|| RationalFunction::zero(&reg))).collect())
                .collect();
            let mut inv: Vec<Vec<RationalFunction>> = (0..k)
                .map(|i| (0..k).map(|j| if i == j { RationalFunction::one(&reg) } else { RationalFunction::zero(&reg) }).collect())
                .collect();
            for col in 0..k {
                let piv = (col..k).find(|&r| !a[r][col].is_zero()).ok_or_else(singular)?;
                a.swap(col, piv);
                inv.swap(col, piv);
                let p = a[col][col].recip()?;
                for j in 0..k {
                    a[col][j] = a[col][j].mul(&p);
                    inv[col][j] = inv[col][j].mul(&p);
                }
                for r in 0..k {
                    if r != col && !a[r][col].is_zero() {
                        let f = a[r][col].clone();
                        for j in 0..k {
                            if !a[col][j].is_zero() {
                                a[r][j] = a[r][j].sub(&f.mul(&a[col][j]));
                            }
                            if !inv[col][j].is_zero() {
                                inv[r][j] = inv[r][j].sub(&f.mul(&inv[col][j]));
                            }
                        }
                    }
                }
            }
            for (i, &r) in idx.iter().enumerate() {
                for (j, &c) in idx.iter().enumerate() {
                    if !inv[i][j].is_zero() {
                        out.entries.insert((r, c), inv[i][j].clone());
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Arc<VariableRegistry> {
        VariableRegistry::standard(2)
    }

    fn eij(reg: &Arc<VariableRegistry>, legs: &[&str], row: Vec<usize>, col: Vec<usize>, v: RationalFunction) -> RfMatrix {
        RfMatrix::from_entries(reg, &aux_legs(legs, reg.n()), [(row, col, v)]).unwrap()
    }

    #[test]
    fn embed_identity() {
        let r = reg();
        let i1 = RfMatrix::identity(&r, &aux_legs(&["1"], 2)).unwrap();
        let e = i1.embed(&aux_legs(&["1", "2", "3"], 2)).unwrap();
        assert_eq!(e.nnz(), 8);
        assert!(e.equals(&RfMatrix::identity(&r, &aux_legs(&["1", "2", "3"], 2)).unwrap()).unwrap());
    }

    #[test]
    fn embed_then_trace_gives_n_times() {
        let r = reg();
        let m = eij(&r, &["1"], vec![0], vec![1], RationalFunction::mu(&r));
        let t = m.embed(&aux_legs(&["1", "2"], 2)).unwrap().trace_over_leg("2").unwrap();
        assert!(t.equals(&m.scale(&RationalFunction::int(&r, 2))).unwrap());
    }

    #[test]
    fn transpose_swaps_and_is_involutive() {
        let r = reg();
        let m = eij(&r, &["1", "2"], vec![0, 1], vec![1, 0], RationalFunction::one(&r));
        let t = m.partial_transpose(&["1", "2"]).unwrap();
        assert_eq!(t.get(&[1, 0], &[0, 1]).unwrap(), RationalFunction::one(&r));
        assert!(t.partial_transpose(&["2", "1"]).unwrap().equals(&m).unwrap());
    }

    #[test]
    fn permutation_squares_to_identity_and_swaps() {
        let r = reg();
        let legs = aux_legs(&["1", "2"], 2);
        let p = RfMatrix::permutation_matrix(&r, "1", "2", &legs).unwrap();
        assert!(p.matmul(&p).unwrap().equals(&RfMatrix::identity(&r, &legs).unwrap()).unwrap());
        let x = eij(&r, &["1"], vec![0], vec![1], RationalFunction::q(&r, 0)).embed(&legs).unwrap();
        let y = eij(&r, &["2"], vec![1], vec![1], RationalFunction::mu(&r)).embed(&legs).unwrap();
        let xy = x.matmul(&y).unwrap();
        let swapped = p.matmul(&xy).unwrap().matmul(&p).unwrap();
        let yx = eij(&r, &["1"], vec![1], vec![1], RationalFunction::mu(&r))
            .embed(&legs)
            .unwrap()
            .matmul(&eij(&r, &["2"], vec![0], vec![1], RationalFunction::q(&r, 0)).embed(&legs).unwrap())
            .unwrap();
        assert!(swapped.equals(&yx).unwrap());
    }

    #[test]
    fn shift_requires_identity_on_leg() {
        let r = reg();
        let m = eij(&r, &["1", "2"], vec![0, 1], vec![1, 0], RationalFunction::q(&r, 0));
        assert!(matches!(m.dynamical_shift(&ShiftSpec::new("1", 1)), Err(TensorError::NotIdentityOnLeg { .. })));
        let d = eij(&r, &["1", "2"], vec![0, 1], vec![1, 1], RationalFunction::q(&r, 1));
        let s = d.dynamical_shift(&ShiftSpec::new("2", -1)).unwrap();
        // leg 2 carries index 2, so q2 -> q2 - mu
        assert_eq!(s.get(&[0, 1], &[1, 1]).unwrap().to_text(), "q2-mu");
        assert!(s.dynamical_shift(&ShiftSpec::new("2", 1)).unwrap().equals(&d).unwrap());
    }

    #[test]
    fn slsc_example() {
        let r = reg();
        let f = RationalFunction::mu(&r).div(&RationalFunction::q_diff(&r, 0, 1, 0)).unwrap();
        let m = eij(&r, &["1", "2"], vec![0, 1], vec![1, 0], f);
        let s = m.slsc_shift("1", SlSc::Sl, 1).unwrap().slsc_shift("2", SlSc::Sc, 1).unwrap();
        assert_eq!(s.get(&[0, 1], &[1, 0]).unwrap().to_text(), "mu / ((q1-q2+2*mu)^1)");
        let back = s.slsc_shift("2", SlSc::Sc, -1).unwrap().slsc_shift("1", SlSc::Sl, -1).unwrap();
        assert!(back.equals(&m).unwrap());
    }

    #[test]
    fn zero_weight_detects_unbalanced() {
        let r = reg();
        let m = eij(&r, &["1"], vec![0], vec![1], RationalFunction::one(&r)).embed(&aux_legs(&["1", "2"], 2)).unwrap();
        assert!(m.zero_weight_violation(&[("1", 1), ("2", 1)]).unwrap().is_some());
        let p = RfMatrix::permutation_matrix(&r, "1", "2", &aux_legs(&["1", "2"], 2)).unwrap();
        assert!(p.zero_weight_violation(&[("1", 1), ("2", 1)]).unwrap().is_none());
    }

    #[test]
    fn inverse_of_block_matrix() {
        let r = reg();
        let legs = aux_legs(&["1", "2"], 2);
        let f = RationalFunction::mu(&r).div(&RationalFunction::q_diff(&r, 0, 1, 0)).unwrap();
        let one = RationalFunction::one(&r);
        let m = RfMatrix::from_entries(
            &r,
            &legs,
            [
                (vec![0, 0], vec![0, 0], one.clone()),
                (vec![1, 1], vec![1, 1], one.clone()),
                (vec![0, 1], vec![0, 1], one.sub(&f)),
                (vec![0, 1], vec![1, 0], f.clone()),
                (vec![1, 0], vec![1, 0], one.add(&f)),
                (vec![1, 0], vec![0, 1], f.neg()),
            ],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.matmul(&inv).unwrap().equals(&RfMatrix::identity(&r, &legs).unwrap()).unwrap());
        let sing = eij(&r, &["1"], vec![0], vec![0], one);
        assert!(matches!(sing.inverse(), Err(TensorError::Singular(_))));
    }

    #[test]
    fn json_roundtrip() {
        let r = reg();
        let f = RationalFunction::mu(&r).div(&RationalFunction::q_diff(&r, 0, 1, 1)).unwrap();
        let m = eij(&r, &["1", "a"], vec![0, 1], vec![1, 0], f).with_role(Role::K);
        let j = m.to_json();
        let back = RfMatrix::from_json(&r, &j).unwrap();
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), serde_json::to_string(&j).unwrap());
        assert_eq!(j["entries"][0]["row"], json!([1, 2]));
    }
}
