//! Difference operators `sum_v f_v(q) e^{mu v.d}` with coefficients on the
//! left. The product rule `(f e^v)(g e^w) = f g(q + v mu) e^{v+w}` keeps
//! that ordering, so no normal ordering step is needed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::exactfield::{FieldError, RationalFunction, VariableRegistry};
use crate::tensor::{Coefficient, Leg, TensorError, TensorMatrix};

#[derive(Clone)]
pub struct ShiftOperator {
    reg: Arc<VariableRegistry>,
    terms: BTreeMap<Vec<i64>, RationalFunction>,
}

pub type OpMatrix = TensorMatrix<ShiftOperator>;

impl ShiftOperator {
    pub fn zero(reg: &Arc<VariableRegistry>) -> Self {
        Self { reg: reg.clone(), terms: BTreeMap::new() }
    }

    pub fn one(reg: &Arc<VariableRegistry>) -> Self {
        Self::scalar(RationalFunction::one(reg))
    }

    /// Multiplication operator by `f`.
    pub fn scalar(f: RationalFunction) -> Self {
        let reg = f.registry().clone();
        Self::term(f, vec![0; reg.n()])
    }

    /// Pure lattice shift `e^{mu v.d}`.
    pub fn shift(reg: &Arc<VariableRegistry>, v: Vec<i64>) -> Self {
        Self::term(RationalFunction::one(reg), v)
    }

    pub fn term(f: RationalFunction, v: Vec<i64>) -> Self {
        let reg = f.registry().clone();
        assert_eq!(v.len(), reg.n(), "shift vector length must equal n");
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(v, f);
        }
        Self { reg, terms }
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &RationalFunction)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, v: &[i64]) -> RationalFunction {
        self.terms.get(v).cloned().unwrap_or_else(|| RationalFunction::zero(&self.reg))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_add(&mut self, v: &[i64], f: RationalFunction) {
        match self.terms.get_mut(v) {
            Some(g) => {
                *g = g.add(&f);
                if g.is_zero() {
                    self.terms.remove(v);
                }
            }
            None => {
                if !f.is_zero() {
                    self.terms.insert(v.to_vec(), f);
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (v, f) in &o.terms {
            out.insert_add(v, f.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self { reg: self.reg.clone(), terms: self.terms.iter().map(|(v, f)| (v.clone(), f.neg())).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(&self.reg);
        for (v, f) in &self.terms {
            for (w, g) in &o.terms {
                let vw: Vec<i64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
                out.insert_add(&vw, f.mul(&g.shift(v)));
            }
        }
        out
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// `e^v X e^{-v}`.
    pub fn conjugate_shift(&self, v: &[i64]) -> Self {
        Self { reg: self.reg.clone(), terms: self.terms.iter().map(|(w, f)| (w.clone(), f.shift(v))).collect() }
    }

    /// `f X f^{-1}`.
    pub fn conjugate_by(&self, f: &RationalFunction) -> Result<Self, FieldError> {
        let inv = f.recip()?;
        Ok(Self::scalar(f.clone()).mul(self).mul(&Self::scalar(inv)))
    }

    /// Action on a function: `(f e^v) g = f g(q + v mu)`.
    pub fn apply(&self, g: &RationalFunction) -> RationalFunction {
        self.terms.iter().fold(RationalFunction::zero(&self.reg), |acc, (v, f)| acc.add(&f.mul(&g.shift(v))))
    }

    pub fn equals(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.terms.iter().map(|(v, f)| json!({"v": v, "coeff": f.to_text()})).collect())
    }

    pub fn from_json(reg: &Arc<VariableRegistry>, v: &Value) -> Result<Self, TensorError> {
        let bad = |m: &str| TensorError::Json(m.to_string());
        let arr = v.as_array().ok_or_else(|| bad("operator must be an array of terms"))?;
        let mut out = Self::zero(reg);
        for t in arr {
            let sv: Vec<i64> = serde_json::from_value(t.get("v").cloned().ok_or_else(|| bad("missing v"))?)
                .map_err(|e| bad(&e.to_string()))?;
            if sv.len() != reg.n() {
                return Err(FieldError::ShiftLength { got: sv.len(), expected: reg.n() }.into());
            }
            let s = t.get("coeff").and_then(|c| c.as_str()).ok_or_else(|| bad("missing coeff"))?;
            out.insert_add(&sv, RationalFunction::parse(reg, s)?);
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(v, f)| {
                if v.iter().all(|&x| x == 0) {
                    format!("[{f}]")
                } else {
                    format!("[{f}] e^{v:?}")
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl PartialEq for ShiftOperator {
    fn eq(&self, o: &Self) -> bool {
        self.equals(o)
    }
}

impl fmt::Debug for ShiftOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ShiftOperator({})", self.to_text())
    }
}

impl fmt::Display for ShiftOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Coefficient for ShiftOperator {
    fn zero(reg: &Arc<VariableRegistry>) -> Self {
        ShiftOperator::zero(reg)
    }
    fn one(reg: &Arc<VariableRegistry>) -> Self {
        ShiftOperator::one(reg)
    }
    fn is_zero(&self) -> bool {
        ShiftOperator::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        ShiftOperator::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ShiftOperator::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ShiftOperator::mul(self, o)
    }
    fn neg(&self) -> Self {
        ShiftOperator::neg(self)
    }
    fn shifted(&self, v: &[i64]) -> Self {
        self.conjugate_shift(v)
    }
    fn to_json(&self) -> Value {
        json!({"shifts": ShiftOperator::to_json(self)})
    }
    fn from_json(reg: &Arc<VariableRegistry>, v: &Value) -> Result<Self, TensorError> {
        let inner = v.get("shifts").ok_or_else(|| TensorError::Json("missing shifts".into()))?;
        ShiftOperator::from_json(reg, inner)
    }
    fn text(&self) -> String {
        self.to_text()
    }
}

/// Lifts a function-valued matrix to multiplication operators.
pub fn lift(m: &TensorMatrix<RationalFunction>) -> OpMatrix {
    m.map(|f| ShiftOperator::scalar(f.clone()))
}

/// Diagonal on `leg`: basis index `i` maps to `e^{multiplicity mu d_i}`.
pub fn exp_shift_matrix(
    reg: &Arc<VariableRegistry>,
    leg: &str,
    ambient: &[Leg],
    multiplicity: i64,
) -> Result<OpMatrix, TensorError> {
    let n = reg.n();
    let single = [ambient
        .iter()
        .find(|l| l.id == leg)
        .cloned()
        .ok_or_else(|| TensorError::UnknownLeg(leg.to_string()))?];
    let entries = (0..n).map(|i| {
        let mut v = vec![0; n];
        v[i] = multiplicity;
        (vec![i], vec![i], ShiftOperator::shift(reg, v))
    });
    OpMatrix::from_entries(reg, &single, entries)?.embed(ambient)
}
