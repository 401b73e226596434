//! Multivariate gcd over Q. The heuristic evaluation gcd handles almost
//! everything; recursive content removal with primitive pseudo-remainder
//! sequences is the fallback. Only needed once a denominator leaves the
//! linear-form class.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;
use super::poly::{Polynomial, Q};

/// Monic gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let nv = a.nvars();
    if a.is_zero() {
        return b.monic().1;
    }
    if b.is_zero() {
        return a.monic().1;
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(nv);
    }
    if a == b {
        return a.monic().1;
    }
    if let Some(g) = heuristic(&a.primitive_integer().1, &b.primitive_integer().1) {
        return g.monic().1;
    }
    prs_gcd(a, b)
}

fn prs_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let nv = a.nvars();
    if a.is_zero() {
        return b.monic().1;
    }
    if b.is_zero() {
        return a.monic().1;
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(nv);
    }
    for x in 0..nv {
        match (a.uses_var(x), b.uses_var(x)) {
            (true, false) => return prs_gcd(&content_in(a, x), b),
            (false, true) => return prs_gcd(a, &content_in(b, x)),
            _ => {}
        }
    }
    let x = (0..nv)
        .filter(|&x| a.uses_var(x))
        .min_by_key(|&x| a.degree_in(x) + b.degree_in(x))
        .expect("non-constant polynomial uses a variable");
    let ca = content_in(a, x);
    let cb = content_in(b, x);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let gc = prs_gcd(&ca, &cb);
    let gp = primitive_prs(pa, pb, x);
    gc.mul(&gp).monic().1
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `x`.
pub fn content_in(p: &Polynomial, x: usize) -> Polynomial {
    let coeffs = p.coeffs_in(x);
    let mut g = Polynomial::zero(p.nvars());
    for c in coeffs.iter().rev().filter(|c| !c.is_zero()) {
        g = prs_gcd(&g, c);
        if g.is_constant() {
            return Polynomial::one(p.nvars());
        }
    }
    g
}

fn int_coeffs(p: &Polynomial) -> impl Iterator<Item = &BigInt> {
    p.terms().iter().map(|(_, c)| {
        debug_assert!(c.is_integer());
        c.numer()
    })
}

fn max_norm(p: &Polynomial) -> BigInt {
    int_coeffs(p).map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

fn int_content(p: &Polynomial) -> BigInt {
    int_coeffs(p).fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn eval_at(p: &Polynomial, x: usize, xi: &BigInt) -> Polynomial {
    let coeffs = p.coeffs_in(x);
    let xi = Q::from_integer(xi.clone());
    let mut acc = Polynomial::zero(p.nvars());
    for c in coeffs.iter().rev() {
        acc = acc.scale(&xi).add(c);
    }
    acc
}

fn symmetric_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

// Reads the xi-adic digits of h back as coefficients of x.
fn interpolate(h: &Polynomial, x: usize, xi: &BigInt) -> Polynomial {
    let nv = h.nvars();
    let mut h = h.clone();
    let mut out = Polynomial::zero(nv);
    let mut i = 0u32;
    let xq = Q::from_integer(xi.clone()).recip();
    while !h.is_zero() {
        let digit = Polynomial::from_terms(
            nv,
            h.terms().iter().map(|(m, c)| (*m, Q::from_integer(symmetric_mod(c.numer(), xi)))),
        );
        out = out.add(&digit.mul_term(&Monomial::ONE.with_exp(x, i), &Q::one()));
        h = h.sub(&digit).scale(&xq);
        i += 1;
        if i > 255 {
            return Polynomial::zero(nv);
        }
    }
    out
}

/// Heuristic gcd of integer-coefficient polynomials: evaluate the highest
/// variable at a large integer, recurse, and interpolate. Every candidate
/// is verified by division, so `Some` is always the true gcd up to sign.
fn heuristic(f: &Polynomial, g: &Polynomial) -> Option<Polynomial> {
    let nv = f.nvars();
    if f.is_zero() {
        return Some(g.primitive_integer().1.scale(&Q::from_integer(int_content(g))));
    }
    if g.is_zero() {
        return Some(f.primitive_integer().1.scale(&Q::from_integer(int_content(f))));
    }
    let c = Q::from_integer(int_content(f).gcd(&int_content(g)));
    if f.is_constant() || g.is_constant() {
        return Some(Polynomial::constant(nv, c));
    }
    let f1 = f.primitive_integer().1;
    let g1 = g.primitive_integer().1;
    let x = (0..nv).rev().find(|&x| f1.uses_var(x) || g1.uses_var(x))?;
    let mut xi: BigInt = max_norm(&f1).min(max_norm(&g1)) * 2 + 29;
    for _ in 0..6 {
        let ff = eval_at(&f1, x, &xi);
        let gg = eval_at(&g1, x, &xi);
        if !ff.is_zero() && !gg.is_zero() {
            if let Some(h) = heuristic(&ff, &gg) {
                let cand = interpolate(&h, x, &xi);
                if !cand.is_zero() {
                    let cand = cand.primitive_integer().1;
                    if f1.div_exact(&cand).is_some() && g1.div_exact(&cand).is_some() {
                        return Some(cand.scale(&c));
                    }
                }
            }
        }
        xi = xi * 73794 / 27011;
    }
    None
}

fn primitive_part(p: &Polynomial, x: usize) -> Polynomial {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_in(p, x);
    let q = if c.is_one() { p.clone() } else { p.div_exact(&c).expect("content divides") };
    q.primitive_integer().1
}

fn lead_in(p: &Polynomial, x: usize) -> (u32, Polynomial) {
    let d = p.degree_in(x);
    let c = p.coeffs_in(x).swap_remove(d as usize);
    (d, c)
}

fn pseudo_remainder(a: &Polynomial, b: &Polynomial, x: usize) -> Polynomial {
    let (db, lb) = lead_in(b, x);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(x) >= db {
        let (dr, lr) = lead_in(&r, x);
        let shifted = b.mul(&lr).mul_term(&Monomial::ONE.with_exp(x, dr - db), &num_traits::One::one());
        r = r.mul(&lb).sub(&shifted);
        r = r.primitive_integer().1;
    }
    r
}

fn primitive_prs(a: Polynomial, b: Polynomial, x: usize) -> Polynomial {
    let (mut a, mut b) = if a.degree_in(x) >= b.degree_in(x) { (a, b) } else { (b, a) };
    loop {
        if b.is_zero() {
            return primitive_part(&a, x);
        }
        if b.degree_in(x) == 0 {
            return Polynomial::one(a.nvars());
        }
        let r = pseudo_remainder(&a, &b, x);
        a = b;
        b = primitive_part(&r, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::poly::q_int;

    fn v(i: usize) -> Polynomial {
        Polynomial::var(3, i)
    }

    fn c(k: i64) -> Polynomial {
        Polynomial::constant(3, q_int(k))
    }

    #[test]
    fn common_linear_factor() {
        let g = v(0).add(&v(1));
        let a = g.mul(&v(0).sub(&v(1)).add(&c(1)));
        let b = g.mul(&v(0).add(&c(2)));
        assert_eq!(gcd(&a, &b), g);
    }

    #[test]
    fn irreducible_quadratic() {
        // mu^2 + (q1 - q2)^2 shows up in inverses of transposed matrices
        let d = v(0).sub(&v(1));
        let quad = v(2).mul(&v(2)).add(&d.mul(&d));
        let a = quad.mul(&d.add(&v(2)));
        let b = quad.mul(&v(2)).mul(&v(2));
        assert_eq!(gcd(&a, &b), quad.monic().1);
    }

    #[test]
    fn coprime() {
        let a = v(0).mul(&v(0)).add(&c(1));
        let b = v(0).add(&v(1));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn heuristic_agrees_with_prs() {
        let d = v(0).sub(&v(1));
        let quad = v(2).mul(&v(2)).add(&d.mul(&d));
        let a = quad.mul(&d.add(&v(2))).mul(&v(0).add(&c(3)));
        let b = quad.mul(&v(2)).mul(&d.add(&v(2)).pow(2));
        assert_eq!(gcd(&a, &b), prs_gcd(&a, &b));
        assert_eq!(gcd(&a, &b), quad.mul(&d.add(&v(2))).monic().1);
    }

    #[test]
    fn powers() {
        let l = v(0).sub(&v(2));
        let a = l.pow(3).mul(&v(1));
        let b = l.pow(2).mul(&v(1).add(&c(1)));
        assert_eq!(gcd(&a, &b), l.pow(2).monic().1);
    }
}
