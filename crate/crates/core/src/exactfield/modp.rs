//! Arithmetic in the prime field used by randomized identity testing.

use num_bigint::{BigInt, Sign};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::poly::Q;

/// 2^62 - 57, the largest prime below 2^62.
pub const PRIME: u64 = 4_611_686_018_427_387_847;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + PRIME - b
    }
}

#[inline]
pub fn neg(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        PRIME - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

/// Multiplicative inverse; `None` for zero.
pub fn inv(a: u64) -> Option<u64> {
    if a == 0 {
        None
    } else {
        Some(pow(a, PRIME - 2))
    }
}

pub fn from_i64(v: i64) -> u64 {
    let r = v.rem_euclid(PRIME as i64);
    r as u64
}

pub fn from_bigint(v: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let mut r = v % &p;
    if r.sign() == Sign::Minus {
        r += &p;
    }
    if r.is_zero() {
        return 0;
    }
    let (_, digits) = r.to_u64_digits();
    digits[0]
}

pub fn from_rational(c: &Q) -> Option<u64> {
    let n = from_bigint(c.numer());
    let d = from_bigint(c.denom());
    inv(d).map(|di| mul(n, di))
}

/// Deterministic sampler for evaluation points.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn element(&mut self) -> u64 {
        self.rng.gen_range(0..PRIME)
    }

    pub fn point(&mut self, len: usize) -> Vec<u64> {
        (0..len).map(|_| self.element()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::poly::q_frac;

    #[test]
    fn inverse_and_rationals() {
        let x = 123_456_789u64;
        assert_eq!(mul(x, inv(x).unwrap()), 1);
        assert_eq!(from_i64(-1), PRIME - 1);
        let half = from_rational(&q_frac(1, 2)).unwrap();
        assert_eq!(add(half, half), 1);
        let third = from_rational(&q_frac(-2, 3)).unwrap();
        assert_eq!(mul(third, 3), PRIME - 2);
    }

    #[test]
    fn fermat() {
        assert_eq!(pow(3, PRIME - 1), 1);
        assert_eq!(pow(1234567, PRIME - 1), 1);
    }

    #[test]
    fn sampler_is_seeded() {
        let a = Sampler::new(7).point(5);
        let b = Sampler::new(7).point(5);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x < PRIME));
    }
}
