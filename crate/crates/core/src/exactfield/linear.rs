use num_traits::ToPrimitive;

use super::modp;
use super::monomial::Monomial;
use super::poly::{q_int, Polynomial, Q};
use super::registry::VariableRegistry;

/// Primitive integer linear form `sum c_i x_i + c0` whose first nonzero
/// variable coefficient is positive. Two proportional forms normalize to
/// the same value, which is what makes denominator cancellation a
/// comparison instead of a gcd.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinearForm {
    coeffs: Box<[i64]>,
    constant: i64,
}

impl LinearForm {
    /// Splits `p = scale * form`. Returns `None` unless `p` has total degree
    /// one and its primitive coefficients fit in `i64`.
    pub fn from_polynomial(p: &Polynomial) -> Option<(Q, LinearForm)> {
        if p.total_degree() != 1 {
            return None;
        }
        let (scale, prim) = p.primitive_integer();
        let mut coeffs = vec![0i64; p.nvars()].into_boxed_slice();
        let mut constant = 0i64;
        for (m, c) in prim.terms() {
            let v = c.to_integer().to_i64()?;
            if m.is_one() {
                constant = v;
            } else {
                let i = (0..p.nvars()).find(|&i| m.exp(i) == 1)?;
                coeffs[i] = v;
            }
        }
        Some((scale, LinearForm { coeffs, constant }))
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs[i]
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.coeffs[i] != 0
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut terms: Vec<(Monomial, Q)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (Monomial::var(i), q_int(c)))
            .collect();
        if self.constant != 0 {
            terms.push((Monomial::ONE, q_int(self.constant)));
        }
        Polynomial::from_terms(self.nvars(), terms)
    }

    /// The form after `q_k -> q_k + v_k mu`. Only the mu coefficient moves,
    /// and mu follows the q-block, so normalization is preserved.
    pub fn shift(&self, v: &[i64], mu: usize) -> LinearForm {
        let delta: i64 = v
            .iter()
            .zip(self.coeffs.iter())
            .map(|(&s, &c)| s.checked_mul(c).expect("linear form coefficient overflow"))
            .sum();
        if delta == 0 {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs[mu] = coeffs[mu].checked_add(delta).expect("linear form coefficient overflow");
        LinearForm { coeffs, constant: self.constant }
    }

    /// Coefficient of `mu` picked up under the shift `v`.
    pub fn shift_delta(&self, v: &[i64]) -> i64 {
        v.iter().zip(self.coeffs.iter()).map(|(&s, &c)| s * c).sum()
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        let mut acc = q_int(self.constant);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc += &point[i] * q_int(c);
            }
        }
        acc
    }

    pub fn eval_mod(&self, point: &[u64]) -> u64 {
        let mut acc = modp::from_i64(self.constant);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc = modp::add(acc, modp::mul(modp::from_i64(c), point[i]));
            }
        }
        acc
    }

    pub fn to_text(&self, reg: &VariableRegistry) -> String {
        let p = self.to_polynomial();
        debug_assert!(!p.is_zero());
        p.to_text(reg)
    }
}

impl LinearForm {
    #[cfg(test)]
    pub(crate) fn parse_simple(nvars: usize, coeffs: &[i64], constant: i64) -> LinearForm {
        let mut p = Polynomial::constant(nvars, q_int(constant));
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                p = p.add(&Polynomial::var(nvars, i).scale(&q_int(c)));
            }
        }
        let (s, f) = LinearForm::from_polynomial(&p).unwrap();
        assert_ne!(s, q_int(0));
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::poly::q_frac;

    #[test]
    fn normalization_is_sign_and_scale_free() {
        let a = Polynomial::var(3, 0).sub(&Polynomial::var(3, 1));
        let b = a.scale(&q_frac(-3, 2));
        let (sa, fa) = LinearForm::from_polynomial(&a).unwrap();
        let (sb, fb) = LinearForm::from_polynomial(&b).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(sa, q_int(1));
        assert_eq!(sb, q_frac(-3, 2));
    }

    #[test]
    fn shift_moves_mu() {
        let reg = VariableRegistry::standard(2);
        let f = LinearForm::parse_simple(3, &[1, -1, 0], 0);
        assert_eq!(f.shift(&[1, 0], 2).to_text(&reg), "q1-q2+mu");
        assert_eq!(f.shift(&[1, 1], 2), f);
        assert_eq!(f.shift(&[0, 2], 2).to_text(&reg), "q1-q2-2*mu");
    }
}
