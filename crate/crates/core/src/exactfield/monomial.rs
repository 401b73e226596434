use std::cmp::Ordering;

use super::FieldError;

/// Exponent vector packed one byte per variable, variable 0 in the most
/// significant byte. With that layout lexicographic order on exponents is
/// plain integer order on `packed`, so grlex is (degree, packed).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    deg: u32,
    packed: u128,
}

const fn shift_of(i: usize) -> u32 {
    8 * (15 - i as u32)
}

impl Monomial {
    pub const ONE: Monomial = Monomial { deg: 0, packed: 0 };

    pub fn var(i: usize) -> Monomial {
        Monomial { deg: 1, packed: 1u128 << shift_of(i) }
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Monomial, FieldError> {
        let mut m = Monomial::ONE;
        for (i, &e) in exps.iter().enumerate() {
            if e > 255 {
                return Err(FieldError::ExponentOverflow);
            }
            m.packed |= (e as u128) << shift_of(i);
            m.deg += e;
        }
        Ok(m)
    }

    #[inline]
    pub fn exp(&self, i: usize) -> u32 {
        ((self.packed >> shift_of(i)) & 0xff) as u32
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exp(i)).collect()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        if self.deg + o.deg > 255 {
            for i in 0..16 {
                assert!(self.exp(i) + o.exp(i) <= 255, "monomial exponent overflow");
            }
        }
        Monomial { deg: self.deg + o.deg, packed: self.packed + o.packed }
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        if self.deg > o.deg {
            return false;
        }
        (0..16).all(|i| self.exp(i) <= o.exp(i))
    }

    /// `o / self`, caller guarantees divisibility.
    pub fn div_into(&self, o: &Monomial) -> Monomial {
        Monomial { deg: o.deg - self.deg, packed: o.packed - self.packed }
    }

    /// Splits off the power of variable `i`.
    pub fn without(&self, i: usize) -> (u32, Monomial) {
        let e = self.exp(i);
        let packed = self.packed & !(0xffu128 << shift_of(i));
        (e, Monomial { deg: self.deg - e, packed })
    }

    pub fn with_exp(&self, i: usize, e: u32) -> Monomial {
        let (_, rest) = self.without(i);
        Monomial { deg: rest.deg + e, packed: rest.packed | ((e as u128) << shift_of(i)) }
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.deg.cmp(&o.deg).then(self.packed.cmp(&o.packed))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
