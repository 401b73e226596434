use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::modp;
use super::monomial::Monomial;
use super::registry::VariableRegistry;

pub type Q = BigRational;

pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn q_frac(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

/// Sparse polynomial over the rationals. Terms are kept strictly descending
/// in grlex order with no zero coefficients, so structural equality is
/// mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(Monomial, Q)>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        if c.is_zero() {
            return Self::zero(nvars);
        }
        Self { nvars, terms: vec![(Monomial::ONE, c)] }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        Self { nvars, terms: vec![(Monomial::var(i), Q::one())] }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Q::zero) += c;
        }
        Self::from_map(nvars, acc)
    }

    fn from_map(nvars: usize, acc: HashMap<Monomial, Q>) -> Self {
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Q)> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Q {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Q::zero)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.degree()).unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|t| t.0.exp(i)).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.iter().any(|t| t.0.exp(i) > 0)
    }

    pub fn neg(&self) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.merge(o, true)
    }

    fn merge(&self, o: &Self, negate: bool) -> Self {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < o.terms.len() {
            let take = if i == self.terms.len() {
                std::cmp::Ordering::Less
            } else if j == o.terms.len() {
                std::cmp::Ordering::Greater
            } else {
                self.terms[i].0.cmp(&o.terms[j].0)
            };
            match take {
                std::cmp::Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    let (m, c) = &o.terms[j];
                    out.push((*m, if negate { -c } else { c.clone() }));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &self.terms[i].1 - &o.terms[j].1 } else { &self.terms[i].1 + &o.terms[j].1 };
                    if !c.is_zero() {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { nvars: self.nvars, terms: out }
    }

    pub fn mul_term(&self, m: &Monomial, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(a, c)| (a.mul(m), c * k)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.nvars, o.nvars);
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.nvars);
        }
        if o.terms.len() == 1 {
            return self.mul_term(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let c = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        Self::from_map(self.nvars, acc)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Self::zero(self.nvars));
        }
        if d.terms.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let inv = dc.recip();
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                if !dm.divides(m) {
                    return None;
                }
                terms.push((dm.div_into(m), c * &inv));
            }
            return Some(Self { nvars: self.nvars, terms });
        }
        if d.total_degree() > self.total_degree() {
            return None;
        }
        let (dm, dc) = d.terms[0].clone();
        let mut r = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = r.terms.first().cloned() {
            if !dm.divides(&m) {
                return None;
            }
            let qm = dm.div_into(&m);
            let qc = c / &dc;
            r = r.sub(&d.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Self { nvars: self.nvars, terms: quot })
    }

    /// Splits into leading coefficient and monic part.
    pub fn monic(&self) -> (Q, Self) {
        match self.terms.first() {
            None => (Q::zero(), self.clone()),
            Some((_, lc)) if lc.is_one() => (Q::one(), self.clone()),
            Some((_, lc)) => {
                let lc = lc.clone();
                (lc.clone(), self.scale(&lc.recip()))
            }
        }
    }

    /// Integer content-free form with a positive leading coefficient.
    pub fn primitive_integer(&self) -> (Q, Self) {
        if self.is_zero() {
            return (Q::zero(), self.clone());
        }
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            den = num_integer::Integer::lcm(&den, c.denom());
        }
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            let v = c.numer() * (&den / c.denom());
            g = num_integer::Integer::gcd(&g, &v);
        }
        if self.terms[0].1.is_negative() {
            g = -g;
        }
        let factor = Q::new(g, den);
        (factor.clone(), self.scale(&factor.recip()))
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.nvars) {
                let e = m.exp(i);
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Value modulo the verification prime; `None` if a coefficient
    /// denominator vanishes there.
    pub fn eval_mod(&self, point: &[u64]) -> Option<u64> {
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let mut t = modp::from_rational(c)?;
            for (i, &x) in point.iter().enumerate().take(self.nvars) {
                let e = m.exp(i);
                if e > 0 {
                    t = modp::mul(t, modp::pow(x, e as u64));
                }
            }
            acc = modp::add(acc, t);
        }
        Some(acc)
    }

    /// Coefficients as a polynomial in variable `i`: `out[k]` multiplies `x_i^k`.
    pub fn coeffs_in(&self, i: usize) -> Vec<Self> {
        let d = self.degree_in(i) as usize;
        let mut buckets: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.without(i);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut t| {
                t.sort_unstable_by_key(|x| std::cmp::Reverse(x.0));
                Self { nvars: self.nvars, terms: t }
            })
            .collect()
    }

    pub fn from_coeffs_in(nvars: usize, i: usize, coeffs: &[Self]) -> Self {
        let mut terms = Vec::new();
        for (k, p) in coeffs.iter().enumerate() {
            for (m, c) in &p.terms {
                debug_assert_eq!(m.exp(i), 0);
                terms.push((m.with_exp(i, k as u32), c.clone()));
            }
        }
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        Self { nvars, terms }
    }

    /// Replaces each variable by the corresponding image polynomial. Images
    /// may live in a different variable set; `None` keeps the variable.
    #[allow(clippy::needless_range_loop)]
    pub fn substitute(&self, target_nvars: usize, images: &[Option<Self>]) -> Self {
        let mut cache: Vec<Vec<Self>> = vec![Vec::new(); self.nvars];
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in &self.terms {
            let mut term = Self::constant(target_nvars, c.clone());
            let mut kept = Monomial::ONE;
            for i in 0..self.nvars {
                let e = m.exp(i) as usize;
                if e == 0 {
                    continue;
                }
                match images.get(i).and_then(|x| x.as_ref()) {
                    None => kept = kept.mul(&Monomial::ONE.with_exp(i, e as u32)),
                    Some(img) => {
                        let powers = &mut cache[i];
                        if powers.is_empty() {
                            powers.push(Self::one(target_nvars));
                        }
                        while powers.len() <= e {
                            let next = powers.last().unwrap().mul(img);
                            powers.push(next);
                        }
                        term = term.mul(&powers[e]);
                    }
                }
            }
            for (tm, tc) in term.terms {
                *acc.entry(tm.mul(&kept)).or_insert_with(Q::zero) += tc;
            }
        }
        Self::from_map(target_nvars, acc)
    }

    /// `q_k -> q_k + v_k mu` for the leading `v.len()` variables.
    pub fn shift(&self, v: &[i64], mu: usize) -> Self {
        if v.iter().all(|&x| x == 0) || self.is_constant() {
            return self.clone();
        }
        let images: Vec<Option<Self>> = (0..self.nvars)
            .map(|i| match v.get(i) {
                Some(&s) if s != 0 && self.uses_var(i) => {
                    Some(Self::var(self.nvars, i).add(&Self::var(self.nvars, mu).scale(&q_int(s))))
                }
                _ => None,
            })
            .collect();
        self.substitute(self.nvars, &images)
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                terms.push((m.with_exp(i, e - 1), c * q_int(e as i64)));
            }
        }
        Self::from_terms(self.nvars, terms)
    }

    /// Expanded form, e.g. `q1^2-2*q1*mu+1/2`.
    pub fn to_text(&self, reg: &VariableRegistry) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if neg {
                s.push('-');
            } else if k > 0 {
                s.push('+');
            }
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                parts.push(a.to_string());
            }
            for i in 0..self.nvars {
                match m.exp(i) {
                    0 => {}
                    1 => parts.push(reg.name(i).to_string()),
                    e => parts.push(format!("{}^{}", reg.name(i), e)),
                }
            }
            let _ = write!(s, "{}", parts.join("*"));
        }
        s
    }
}
