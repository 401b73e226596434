use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::FieldError;

/// Hard cap imposed by the packed monomial representation.
pub const MAX_VARIABLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    /// Dynamical coordinate, index into the q-block.
    Q(usize),
    Mu,
    Mass(usize),
    Param,
    Spectral(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

/// Ordered variable set. The q-block always occupies indices `0..n` and
/// `mu` sits at index `n`; everything else follows in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VariableRegistry {
    vars: Vec<Variable>,
    n: usize,
}

impl VariableRegistry {
    pub fn builder(n: usize) -> RegistryBuilder {
        RegistryBuilder::new((1..=n).map(|k| format!("q{k}")).collect())
    }

    /// Registry with only the q-block and `mu`.
    pub fn standard(n: usize) -> Arc<Self> {
        Self::builder(n).build().expect("standard registry is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn mu(&self) -> usize {
        self.n
    }

    pub fn q(&self, k: usize) -> usize {
        assert!(k < self.n, "q index {k} out of range");
        k
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.vars[idx].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn mass(&self, k: usize) -> Option<usize> {
        self.vars.iter().position(|v| v.kind == VarKind::Mass(k))
    }

    pub fn spectral(&self, k: usize) -> Option<usize> {
        self.vars.iter().position(|v| v.kind == VarKind::Spectral(k))
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

#[derive(Debug, Clone)]
pub struct RegistryBuilder {
    q_names: Vec<String>,
    extra: Vec<Variable>,
}

impl RegistryBuilder {
    /// Custom names for the q-block, e.g. relative and center-of-mass coordinates.
    pub fn new(q_names: Vec<String>) -> Self {
        Self { q_names, extra: Vec::new() }
    }

    pub fn masses(mut self) -> Self {
        for k in 0..self.q_names.len() {
            self.extra.push(Variable { name: format!("m{}", k + 1), kind: VarKind::Mass(k) });
        }
        self
    }

    pub fn param(mut self, name: &str) -> Self {
        self.extra.push(Variable { name: name.to_string(), kind: VarKind::Param });
        self
    }

    pub fn spectral(mut self, count: usize) -> Self {
        for k in 0..count {
            self.extra.push(Variable { name: format!("z{}", k + 1), kind: VarKind::Spectral(k) });
        }
        self
    }

    pub fn build(self) -> Result<Arc<VariableRegistry>, FieldError> {
        let n = self.q_names.len();
        let mut vars: Vec<Variable> = self
            .q_names
            .into_iter()
            .enumerate()
            .map(|(k, name)| Variable { name, kind: VarKind::Q(k) })
            .collect();
        vars.push(Variable { name: "mu".into(), kind: VarKind::Mu });
        vars.extend(self.extra);
        if vars.len() > MAX_VARIABLES {
            return Err(FieldError::TooManyVariables(vars.len()));
        }
        for (i, v) in vars.iter().enumerate() {
            let ok = !v.name.is_empty()
                && v.name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && v.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(FieldError::BadVariableName(v.name.clone()));
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(FieldError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Arc::new(VariableRegistry { vars, n }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let r = VariableRegistry::builder(3).masses().param("eta").build().unwrap();
        assert_eq!(r.n(), 3);
        assert_eq!(r.mu(), 3);
        assert_eq!(r.name(3), "mu");
        assert_eq!(r.mass(1), Some(5));
        assert_eq!(r.index_of("eta"), Some(7));
    }

    #[test]
    fn duplicates_rejected() {
        let e = VariableRegistry::builder(2).param("q1").build().unwrap_err();
        assert_eq!(e, FieldError::DuplicateVariable("q1".into()));
    }

    #[test]
    fn too_many() {
        let e = VariableRegistry::builder(8).masses().build().unwrap_err();
        assert_eq!(e, FieldError::TooManyVariables(17));
    }
}
