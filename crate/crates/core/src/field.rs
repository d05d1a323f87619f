//! Prime fields `F_q` with `q ≡ 1 (mod r)`, carrying a fixed generator and a
//! full discrete-log table so that characters of any order `d | q - 1` are a
//! table lookup.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};

/// Largest field size for which a discrete-log table is built.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

/// An element of `F_q`, stored as its residue in `[0, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Debug)]
pub struct PrimeField {
    q: u32,
    r: u32,
    generator: u32,
    /// `dlog[a] = k` with `g^k = a`; entry 0 is unused.
    dlog: Vec<u32>,
    /// `exp[k] = g^k` for `0 <= k < q - 1`.
    exp: Vec<u32>,
}

impl PrimeField {
    /// Builds `F_q` for covers of order `r`.
    pub fn new(q: u64, r: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::DegenerateOrder(r));
        }
        if !arith::is_prime(q) {
            return Err(Error::NonPrimeModulus(q));
        }
        if q % r as u64 != 1 {
            return Err(Error::CongruenceViolation { q, r });
        }
        if q > MAX_FIELD_SIZE {
            return Err(Error::FieldTooLarge { q, cap: MAX_FIELD_SIZE });
        }
        let order = q - 1;
        let prime_factors: Vec<u64> = arith::factorize(order).into_iter().map(|(p, _)| p).collect();
        let generator = (2..q)
            .find(|&a| prime_factors.iter().all(|&p| pow_mod(a, order / p, q) != 1))
            .expect("F_q^* is cyclic");
        let mut dlog = vec![0u32; q as usize];
        let mut exp = vec![0u32; order as usize];
        let mut x = 1u64;
        for k in 0..order {
            exp[k as usize] = x as u32;
            dlog[x as usize] = k as u32;
            x = x * generator % q;
        }
        Ok(PrimeField {
            q: q as u32,
            r,
            generator: generator as u32,
            dlog,
            exp,
        })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem(self.generator)
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: i64) -> FieldElem {
        FieldElem(v.rem_euclid(self.q as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    pub fn units(&self) -> impl Iterator<Item = FieldElem> {
        (1..self.q).map(FieldElem)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let s = a.0 + b.0;
        FieldElem(if s >= self.q { s - self.q } else { s })
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        FieldElem(if a.0 == 0 { 0 } else { self.q - a.0 })
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(((a.0 as u64 * b.0 as u64) % self.q as u64) as u32)
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let k = self.dlog[a.0 as usize];
        let order = self.q - 1;
        Ok(FieldElem(self.exp[((order - k) % order) as usize]))
    }

    /// `a^n`, with negative `n` going through the inverse. `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, n: i64) -> Result<FieldElem> {
        if n == 0 {
            return Ok(FieldElem::ONE);
        }
        if a.is_zero() {
            return if n > 0 { Ok(FieldElem::ZERO) } else { Err(Error::DivisionByZero) };
        }
        let order = (self.q - 1) as i64;
        let k = (self.dlog[a.0 as usize] as i64 * n.rem_euclid(order)).rem_euclid(order);
        Ok(FieldElem(self.exp[k as usize]))
    }

    /// Discrete log with respect to the fixed generator; `None` for zero.
    #[inline]
    pub fn dlog(&self, a: FieldElem) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.dlog[a.0 as usize])
        }
    }

    /// `g^k`.
    #[inline]
    pub fn gen_pow(&self, k: u64) -> FieldElem {
        FieldElem(self.exp[(k % (self.q as u64 - 1)) as usize])
    }

    /// Whether `a` is a `d`-th power in `F_q^*`.
    pub fn is_dth_power(&self, a: FieldElem, d: u32) -> Result<bool> {
        if d == 0 || !(self.q - 1).is_multiple_of(d) {
            return Err(Error::DomainError(format!("{d} does not divide q - 1 = {}", self.q - 1)));
        }
        match self.dlog(a) {
            None => Err(Error::DomainError("is_dth_power(0)".into())),
            Some(k) => Ok(k % d == 0),
        }
    }
}

fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_order(a: u64, q: u64) -> u64 {
        let mut x = a % q;
        let mut k = 1;
        while x != 1 {
            x = x * a % q;
            k += 1;
        }
        k
    }

    #[test]
    fn make_field_examples() {
        let f = PrimeField::new(7, 3).unwrap();
        assert_eq!(f.q(), 7);
        // smallest element of full order, checked by brute force
        let g = (2..7).find(|&a| brute_order(a, 7) == 6).unwrap();
        assert_eq!(f.generator().value() as u64, g);
        assert_eq!(g, 3);

        assert_eq!(PrimeField::new(5, 3).unwrap_err(), Error::CongruenceViolation { q: 5, r: 3 });
        assert_eq!(PrimeField::new(9, 2).unwrap_err(), Error::NonPrimeModulus(9));
        assert_eq!(PrimeField::new(7, 1).unwrap_err(), Error::DegenerateOrder(1));
    }

    #[test]
    fn arithmetic_examples() {
        let f = PrimeField::new(5, 2).unwrap();
        assert_eq!(f.mul(FieldElem(2), FieldElem(3)), FieldElem(1));
        assert_eq!(f.inv(FieldElem(2)).unwrap(), FieldElem(3));
        assert_eq!(f.inv(FieldElem(0)).unwrap_err(), Error::DivisionByZero);
        assert_eq!(f.pow(FieldElem(2), -1).unwrap(), FieldElem(3));
        let f7 = PrimeField::new(7, 3).unwrap();
        assert_eq!(f7.pow(FieldElem(3), 6).unwrap(), FieldElem(1));
    }

    #[test]
    fn dth_power_examples() {
        let f5 = PrimeField::new(5, 2).unwrap();
        assert!(f5.is_dth_power(FieldElem(4), 2).unwrap());
        assert!(!f5.is_dth_power(FieldElem(2), 2).unwrap());
        let f7 = PrimeField::new(7, 3).unwrap();
        assert!(f7.is_dth_power(FieldElem(6), 3).unwrap());
        assert!(f7.is_dth_power(FieldElem(0), 3).is_err());
        assert!(f7.is_dth_power(FieldElem(2), 4).is_err());
    }

    #[test]
    fn dlog_table_is_exhaustive() {
        for (q, r) in [(5u64, 2u32), (7, 3), (13, 4), (31, 6), (101, 5), (997, 2)] {
            let f = PrimeField::new(q, r).unwrap();
            for a in f.units() {
                let k = f.dlog(a).unwrap();
                assert_eq!(f.gen_pow(k as u64), a);
                assert_eq!(f.pow(a, q as i64 - 1).unwrap(), FieldElem::ONE);
            }
            for d in arith::divisors(q - 1) {
                let d = d as u32;
                let count = f.units().filter(|&a| f.is_dth_power(a, d).unwrap()).count();
                assert_eq!(count as u64, (q - 1) / d as u64);
            }
        }
    }
}
