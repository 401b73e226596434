use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::gcd::gcd;
use super::linear::LinearForm;
use super::modp;
use super::poly::{q_int, Polynomial, Q};
use super::registry::VariableRegistry;
use super::FieldError;

/// Exact rational function `coeff * prod L^e * num / den`.
///
/// Linear forms carry signed exponents. `num` and `den` are monic general
/// parts, `1` in the common case; `den` only becomes non-trivial when a
/// denominator leaves the linear-form class (matrix inverses do that).
#[derive(Clone)]
pub struct RationalFunction {
    reg: Arc<VariableRegistry>,
    coeff: Q,
    factors: Vec<(LinearForm, i32)>,
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn zero(reg: &Arc<VariableRegistry>) -> Self {
        let nv = reg.len();
        Self { reg: reg.clone(), coeff: Q::zero(), factors: Vec::new(), num: Polynomial::one(nv), den: Polynomial::one(nv) }
    }

    pub fn one(reg: &Arc<VariableRegistry>) -> Self {
        Self::constant(reg, Q::one())
    }

    pub fn constant(reg: &Arc<VariableRegistry>, c: Q) -> Self {
        let mut z = Self::zero(reg);
        z.coeff = c;
        z
    }

    pub fn int(reg: &Arc<VariableRegistry>, c: i64) -> Self {
        Self::constant(reg, q_int(c))
    }

    pub fn var(reg: &Arc<VariableRegistry>, idx: usize) -> Self {
        Self::from_polynomial(reg, &Polynomial::var(reg.len(), idx))
    }

    pub fn q(reg: &Arc<VariableRegistry>, k: usize) -> Self {
        Self::var(reg, reg.q(k))
    }

    pub fn mu(reg: &Arc<VariableRegistry>) -> Self {
        Self::var(reg, reg.mu())
    }

    /// `q_i - q_j + s * mu`.
    pub fn q_diff(reg: &Arc<VariableRegistry>, i: usize, j: usize, s: i64) -> Self {
        let nv = reg.len();
        let p = Polynomial::var(nv, i)
            .sub(&Polynomial::var(nv, j))
            .add(&Polynomial::var(nv, reg.mu()).scale(&q_int(s)));
        Self::from_polynomial(reg, &p)
    }

    pub fn from_polynomial(reg: &Arc<VariableRegistry>, p: &Polynomial) -> Self {
        assert_eq!(p.nvars(), reg.len(), "polynomial does not match registry");
        if p.is_zero() {
            return Self::zero(reg);
        }
        if let Some((s, f)) = LinearForm::from_polynomial(p) {
            let nv = reg.len();
            return Self {
                reg: reg.clone(),
                coeff: s,
                factors: vec![(f, 1)],
                num: Polynomial::one(nv),
                den: Polynomial::one(nv),
            };
        }
        let mut r = Self::one(reg);
        r.num = p.clone();
        r.normalize(&[])
    }

    pub fn ratio(reg: &Arc<VariableRegistry>, num: &Polynomial, den: &Polynomial) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Self::from_polynomial(reg, num).div(&Self::from_polynomial(reg, den))
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.coeff.is_one() && self.factors.is_empty() && self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.factors.is_empty() && self.num.is_one() && self.den.is_one())
    }

    pub fn constant_value(&self) -> Option<Q> {
        self.is_constant().then(|| self.coeff.clone())
    }

    pub fn coefficient(&self) -> &Q {
        &self.coeff
    }

    pub fn linear_factors(&self) -> &[(LinearForm, i32)] {
        &self.factors
    }

    pub fn general_numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn general_denominator(&self) -> &Polynomial {
        &self.den
    }

    /// True once a denominator needed the general-polynomial fallback.
    pub fn uses_general_denominator(&self) -> bool {
        !self.den.is_one()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        !self.is_zero()
            && (self.factors.iter().any(|(f, _)| f.uses_var(i)) || self.num.uses_var(i) || self.den.uses_var(i))
    }

    /// Expanded numerator, including the overall coefficient.
    pub fn numerator_poly(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero(self.reg.len());
        }
        let mut p = self.num.scale(&self.coeff);
        for (f, e) in &self.factors {
            if *e > 0 {
                p = p.mul(&f.to_polynomial().pow(*e as u32));
            }
        }
        p
    }

    /// Expanded monic denominator.
    pub fn denominator_poly(&self) -> Polynomial {
        let mut p = self.den.clone();
        for (f, e) in &self.factors {
            if *e < 0 {
                p = p.mul(&f.to_polynomial().pow((-*e) as u32));
            }
        }
        p
    }

    /// Total degrees of numerator and denominator.
    pub fn degrees(&self) -> (u32, u32) {
        let mut dn = self.num.total_degree();
        let mut dd = self.den.total_degree();
        for (_, e) in &self.factors {
            if *e > 0 {
                dn += *e as u32;
            } else {
                dd += (-*e) as u32;
            }
        }
        (dn, dd)
    }

    /// Identity of canonical presentations (stronger than `==`). Numerator
    /// factorizations are a cache and are compared expanded.
    pub fn same_form(&self, o: &Self) -> bool {
        if self.coeff == o.coeff && self.factors == o.factors && self.num == o.num && self.den == o.den {
            return true;
        }
        self.den == o.den
            && self.factors.iter().filter(|(_, e)| *e < 0).eq(o.factors.iter().filter(|(_, e)| *e < 0))
            && self.numerator_poly() == o.numerator_poly()
    }

    fn check_reg(&self, o: &Self) {
        assert!(self.reg.same_as(&o.reg), "{}", FieldError::RegistryMismatch);
    }

    fn add_factor(&mut self, f: LinearForm, e: i32) {
        match self.factors.binary_search_by(|(g, _)| g.cmp(&f)) {
            Ok(i) => {
                self.factors[i].1 += e;
                if self.factors[i].1 == 0 {
                    self.factors.remove(i);
                }
            }
            Err(i) => {
                if e != 0 {
                    self.factors.insert(i, (f, e));
                }
            }
        }
    }

    fn make_monic(&mut self) {
        let (lc, m) = self.num.monic();
        if !lc.is_one() {
            self.coeff *= lc;
            self.num = m;
        }
        let (lc, m) = self.den.monic();
        if !lc.is_one() {
            self.coeff /= lc;
            self.den = m;
        }
    }

    fn absorb_linear(&mut self) {
        if self.num.total_degree() == 1 {
            if let Some((s, f)) = LinearForm::from_polynomial(&self.num) {
                self.coeff *= s;
                self.num = Polynomial::one(self.reg.len());
                self.add_factor(f, 1);
            }
        }
        if self.den.total_degree() == 1 {
            if let Some((s, f)) = LinearForm::from_polynomial(&self.den) {
                self.coeff /= s;
                self.den = Polynomial::one(self.reg.len());
                self.add_factor(f, -1);
            }
        }
    }

    fn divide_out(p: &mut Polynomial, f: &LinearForm, lp: &Polynomial) -> i32 {
        let mut k = 0;
        while p.total_degree() >= 1 && (0..f.nvars()).all(|i| !f.uses_var(i) || p.uses_var(i)) {
            match p.div_exact(lp) {
                Some(q) => {
                    *p = q;
                    k += 1;
                }
                None => break,
            }
        }
        k
    }

    fn normalize(mut self, candidates: &[LinearForm]) -> Self {
        if self.coeff.is_zero() || self.num.is_zero() {
            return Self::zero(&self.reg);
        }
        self.make_monic();
        self.absorb_linear();
        if !self.num.is_constant() || !self.den.is_constant() {
            let mut forms: Vec<LinearForm> = self.factors.iter().map(|(f, _)| f.clone()).collect();
            forms.extend(candidates.iter().cloned());
            forms.sort();
            forms.dedup();
            for f in forms {
                if self.num.is_constant() && self.den.is_constant() {
                    break;
                }
                let lp = f.to_polynomial();
                let up = Self::divide_out(&mut self.num, &f, &lp);
                let down = Self::divide_out(&mut self.den, &f, &lp);
                if up != down {
                    self.add_factor(f, up - down);
                }
            }
            if !self.num.is_constant() && !self.den.is_constant() {
                let g = gcd(&self.num, &self.den);
                if !g.is_one() {
                    self.num = self.num.div_exact(&g).expect("gcd divides numerator");
                    self.den = self.den.div_exact(&g).expect("gcd divides denominator");
                }
            }
            self.make_monic();
            self.absorb_linear();
        }
        self
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        r.coeff = -r.coeff;
        r
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(&self.reg);
        }
        let mut r = self.clone();
        r.coeff *= k;
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_reg(o);
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let nv = self.reg.len();
        let mut common = Vec::new();
        let mut ra: Vec<(LinearForm, i32)> = Vec::new();
        let mut rb: Vec<(LinearForm, i32)> = Vec::new();
        let mut cands = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < o.factors.len() {
            let ord = if i == self.factors.len() {
                Ordering::Greater
            } else if j == o.factors.len() {
                Ordering::Less
            } else {
                self.factors[i].0.cmp(&o.factors[j].0)
            };
            let (f, ea, eb) = match ord {
                Ordering::Less => {
                    i += 1;
                    (&self.factors[i - 1].0, self.factors[i - 1].1, 0)
                }
                Ordering::Greater => {
                    j += 1;
                    (&o.factors[j - 1].0, 0, o.factors[j - 1].1)
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (&self.factors[i - 1].0, self.factors[i - 1].1, o.factors[j - 1].1)
                }
            };
            let m = ea.min(eb);
            if m != 0 {
                common.push((f.clone(), m));
            }
            if ea > m {
                ra.push((f.clone(), ea - m));
            }
            if eb > m {
                rb.push((f.clone(), eb - m));
            }
            cands.push(f.clone());
        }
        let (den, fa, fb) = if self.den == o.den {
            (self.den.clone(), None, None)
        } else if self.den.is_one() {
            (o.den.clone(), Some(o.den.clone()), None)
        } else if o.den.is_one() {
            (self.den.clone(), None, Some(self.den.clone()))
        } else {
            let g = gcd(&self.den, &o.den);
            let fa = o.den.div_exact(&g).expect("gcd divides");
            let fb = self.den.div_exact(&g).expect("gcd divides");
            (self.den.mul(&fa), Some(fa), Some(fb))
        };
        let part = |x: &Self, res: &[(LinearForm, i32)], extra: Option<Polynomial>| -> Polynomial {
            let mut p = x.num.scale(&x.coeff);
            for (f, e) in res {
                p = p.mul(&f.to_polynomial().pow(*e as u32));
            }
            if let Some(e) = extra {
                p = p.mul(&e);
            }
            p
        };
        let n = part(self, &ra, fa).add(&part(o, &rb, fb));
        if n.is_zero() {
            return Self::zero(&self.reg);
        }
        let r = Self { reg: self.reg.clone(), coeff: Q::one(), factors: common, num: n, den };
        debug_assert_eq!(r.num.nvars(), nv);
        r.normalize(&cands)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn cancel(p: &Polynomial, q: &Polynomial) -> (Polynomial, Polynomial) {
        if p.is_constant() || q.is_constant() {
            return (p.clone(), q.clone());
        }
        let g = gcd(p, q);
        if g.is_one() {
            (p.clone(), q.clone())
        } else {
            (p.div_exact(&g).expect("gcd divides"), q.div_exact(&g).expect("gcd divides"))
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_reg(o);
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.reg);
        }
        let mut r = self.clone();
        r.coeff *= &o.coeff;
        for (f, e) in &o.factors {
            r.add_factor(f.clone(), *e);
        }
        if self.num.is_one() && self.den.is_one() && o.num.is_one() && o.den.is_one() {
            return r;
        }
        let (an, bd) = Self::cancel(&self.num, &o.den);
        let (bn, ad) = Self::cancel(&o.num, &self.den);
        r.num = an.mul(&bn);
        r.den = ad.mul(&bd);
        r.normalize(&[])
    }

    pub fn recip(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let r = Self {
            reg: self.reg.clone(),
            coeff: self.coeff.recip(),
            factors: self.factors.iter().map(|(f, e)| (f.clone(), -e)).collect(),
            num: self.den.clone(),
            den: self.num.clone(),
        };
        // the old numerator may share a linear form with positive-power factors
        Ok(if r.den.is_one() { r } else { r.normalize(&[]) })
    }

    pub fn div(&self, o: &Self) -> Result<Self, FieldError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn pow(&self, k: i32) -> Result<Self, FieldError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut out = Self::one(&self.reg);
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Substitutes `q_k -> q_k + v_k mu`.
    pub fn shift(&self, v: &[i64]) -> Self {
        assert_eq!(v.len(), self.reg.n(), "shift vector length must equal n");
        if self.is_zero() || v.iter().all(|&x| x == 0) {
            return self.clone();
        }
        let mu = self.reg.mu();
        let mut factors: Vec<(LinearForm, i32)> = self.factors.iter().map(|(f, e)| (f.shift(v, mu), *e)).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            reg: self.reg.clone(),
            coeff: self.coeff.clone(),
            factors,
            num: self.num.shift(v, mu),
            den: self.den.shift(v, mu),
        }
    }

    pub fn try_shift(&self, v: &[i64]) -> Result<Self, FieldError> {
        if v.len() != self.reg.n() {
            return Err(FieldError::ShiftLength { got: v.len(), expected: self.reg.n() });
        }
        Ok(self.shift(v))
    }

    /// Exact value at a point given in registry order.
    pub fn eval(&self, point: &[Q]) -> Result<Q, FieldError> {
        if point.len() != self.reg.len() {
            return Err(FieldError::PointLength { got: point.len(), expected: self.reg.len() });
        }
        if self.is_zero() {
            return Ok(Q::zero());
        }
        let mut acc = self.coeff.clone();
        for (f, e) in &self.factors {
            let v = f.eval(point);
            if v.is_zero() {
                if *e < 0 {
                    return Err(FieldError::Pole(f.to_text(&self.reg)));
                }
                return Ok(Q::zero());
            }
            acc *= num_traits::pow(if *e < 0 { v.recip() } else { v }, e.unsigned_abs() as usize);
        }
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(FieldError::Pole(self.den.to_text(&self.reg)));
        }
        Ok(acc * self.num.eval(point) / d)
    }

    pub fn eval_named(&self, point: &HashMap<String, Q>) -> Result<Q, FieldError> {
        let mut pt = Vec::with_capacity(self.reg.len());
        for v in self.reg.variables() {
            pt.push(point.get(&v.name).cloned().ok_or_else(|| FieldError::UnknownVariable(v.name.clone()))?);
        }
        self.eval(&pt)
    }

    /// Value in the verification prime field.
    pub fn eval_mod(&self, point: &[u64]) -> Result<u64, FieldError> {
        if self.is_zero() {
            return Ok(0);
        }
        let pole = || FieldError::Pole("(mod p sample)".into());
        let mut acc = modp::from_rational(&self.coeff).ok_or_else(pole)?;
        for (f, e) in &self.factors {
            let v = f.eval_mod(point);
            if *e < 0 {
                let inv = modp::inv(v).ok_or_else(|| FieldError::Pole(f.to_text(&self.reg)))?;
                acc = modp::mul(acc, modp::pow(inv, (-*e) as u64));
            } else {
                acc = modp::mul(acc, modp::pow(v, *e as u64));
            }
        }
        if !self.num.is_one() {
            acc = modp::mul(acc, self.num.eval_mod(point).ok_or_else(pole)?);
        }
        if !self.den.is_one() {
            let d = self.den.eval_mod(point).ok_or_else(pole)?;
            acc = modp::mul(acc, modp::inv(d).ok_or_else(|| FieldError::Pole(self.den.to_text(&self.reg)))?);
        }
        Ok(acc)
    }

    /// Replaces every variable by a polynomial image in `target`.
    pub fn map_polynomial(&self, target: &Arc<VariableRegistry>, images: &[Polynomial]) -> Result<Self, FieldError> {
        assert_eq!(images.len(), self.reg.len());
        let imgs: Vec<Option<Polynomial>> = images.iter().cloned().map(Some).collect();
        let tn = target.len();
        let mut out = Self::constant(target, self.coeff.clone());
        if self.is_zero() {
            return Ok(out);
        }
        for (f, e) in &self.factors {
            let p = f.to_polynomial().substitute(tn, &imgs);
            if p.is_zero() {
                if *e < 0 {
                    return Err(FieldError::Pole(f.to_text(&self.reg)));
                }
                return Ok(Self::zero(target));
            }
            out = out.mul(&Self::from_polynomial(target, &p).pow(*e)?);
        }
        let n = self.num.substitute(tn, &imgs);
        let d = self.den.substitute(tn, &imgs);
        if d.is_zero() {
            return Err(FieldError::Pole(self.den.to_text(&self.reg)));
        }
        out = out.mul(&Self::from_polynomial(target, &n));
        out.div(&Self::from_polynomial(target, &d))
    }

    /// Sets variable `var` to a constant.
    pub fn substitute_value(&self, var: usize, value: &Q) -> Result<Self, FieldError> {
        let nv = self.reg.len();
        let images: Vec<Polynomial> = (0..nv)
            .map(|i| if i == var { Polynomial::constant(nv, value.clone()) } else { Polynomial::var(nv, i) })
            .collect();
        self.map_polynomial(&self.reg.clone(), &images)
    }

    /// `var -> s * var + c`.
    pub fn substitute_affine(&self, var: usize, s: &Q, c: &Q) -> Result<Self, FieldError> {
        let nv = self.reg.len();
        let images: Vec<Polynomial> = (0..nv)
            .map(|i| {
                if i == var {
                    Polynomial::var(nv, i).scale(s).add(&Polynomial::constant(nv, c.clone()))
                } else {
                    Polynomial::var(nv, i)
                }
            })
            .collect();
        self.map_polynomial(&self.reg.clone(), &images)
    }

    /// Exact partial derivative by the logarithmic rule.
    pub fn derivative(&self, var: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let reg = &self.reg;
        let mut log_d = Self::zero(reg);
        for (f, e) in &self.factors {
            let c = f.coeff(var);
            if c != 0 {
                let term = Self::int(reg, c * *e as i64)
                    .div(&Self::from_polynomial(reg, &f.to_polynomial()))
                    .expect("linear form is nonzero");
                log_d = log_d.add(&term);
            }
        }
        let mut total = self.mul(&log_d);
        if !self.num.is_constant() || !self.den.is_constant() {
            // coeff * prod L^e * (N' D - N D') / D^2
            let mut rest = self.clone();
            rest.num = Polynomial::one(reg.len());
            rest.den = Polynomial::one(reg.len());
            let top = self.num.derivative(var).mul(&self.den).sub(&self.num.mul(&self.den.derivative(var)));
            let bottom = self.den.mul(&self.den);
            let frac = Self::ratio(reg, &top, &bottom).expect("denominator is nonzero");
            total = total.add(&rest.mul(&frac));
        }
        total
    }

    /// Taylor coefficients in `var` around 0, orders `0..=order`.
    pub fn series(&self, var: usize, order: usize) -> Result<Vec<Self>, FieldError> {
        let reg = &self.reg;
        let nv = reg.len();
        if self.is_zero() {
            return Ok(vec![Self::zero(reg); order + 1]);
        }
        let top = self.numerator_poly();
        let mut den_parts: Vec<Polynomial> = Vec::new();
        for (f, e) in &self.factors {
            if *e < 0 {
                den_parts.push(f.to_polynomial().pow((-*e) as u32));
            }
        }
        if !self.den.is_one() {
            den_parts.push(self.den.clone());
        }
        let mut d0 = Self::one(reg);
        let mut dfull = Polynomial::one(nv);
        for p in &den_parts {
            let at0 = p.coeffs_in(var).swap_remove(0);
            if at0.is_zero() {
                return Err(FieldError::Pole(format!("{} at {}=0", p.to_text(reg), reg.name(var))));
            }
            d0 = d0.mul(&Self::from_polynomial(reg, &at0));
            dfull = dfull.mul(p);
        }
        let pk = top.coeffs_in(var);
        let dk = dfull.coeffs_in(var);
        let mut out: Vec<Self> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = pk.get(k).map(|p| Self::from_polynomial(reg, p)).unwrap_or_else(|| Self::zero(reg));
            for j in 1..=k {
                if let Some(d) = dk.get(j) {
                    if !d.is_zero() {
                        acc = acc.sub(&Self::from_polynomial(reg, d).mul(&out[k - j]));
                    }
                }
            }
            out.push(acc.div(&d0)?);
        }
        Ok(out)
    }

    /// Canonical text, e.g. `mu^2 / ((q1-q2)^1*(q1-q2+mu)^1)`.
    pub fn to_text(&self) -> String {
        let top = self.numerator_poly().to_text(&self.reg);
        let mut parts: Vec<String> = Vec::new();
        for (f, e) in &self.factors {
            if *e < 0 {
                parts.push(format!("({})^{}", f.to_text(&self.reg), -e));
            }
        }
        if !self.den.is_one() {
            parts.push(format!("({})^1", self.den.to_text(&self.reg)));
        }
        if parts.is_empty() {
            top
        } else {
            format!("{} / ({})", top, parts.join("*"))
        }
    }

    pub fn parse(reg: &Arc<VariableRegistry>, text: &str) -> Result<Self, FieldError> {
        super::text::parse_rational(reg, text)
    }

    /// Sign of the overall coefficient, used only for presentation.
    pub fn is_negative_coefficient(&self) -> bool {
        self.coeff.is_negative()
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &Self) -> bool {
        self.reg.same_as(&o.reg) && (self.same_form(o) || self.sub(o).is_zero())
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({})", self.to_text())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
