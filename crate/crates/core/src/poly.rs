//! Dense univariate polynomials over a prime field.
//!
//! Coefficients are stored lowest degree first and trailing zeros are always
//! stripped, so the zero polynomial is the empty vector. All arithmetic takes
//! the field explicitly; a `Poly` does not know its modulus.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![FieldElem::ONE] }
    }

    /// `x - a`.
    pub fn linear(field: &PrimeField, a: FieldElem) -> Self {
        Poly { coeffs: vec![field.neg(a), FieldElem::ONE] }
    }

    pub fn from_coeffs(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Builds from integer coefficients (low to high), reducing mod q.
    pub fn from_ints(field: &PrimeField, coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| field.elem(c)).collect())
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<FieldElem> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(FieldElem::ONE)
    }

    pub fn eval(&self, field: &PrimeField, x: FieldElem) -> FieldElem {
        let q = field.q() as u64;
        let x = x.0 as u64;
        let mut acc = 0u64;
        for c in self.coeffs.iter().rev() {
            acc = (acc * x + c.0 as u64) % q;
        }
        FieldElem(acc as u32)
    }

    pub fn add(&self, field: &PrimeField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO);
        Poly::from_coeffs((0..n).map(|i| field.add(get(self, i), get(other, i))).collect())
    }

    pub fn sub(&self, field: &PrimeField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly, i: usize| p.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO);
        Poly::from_coeffs((0..n).map(|i| field.sub(get(self, i), get(other, i))).collect())
    }

    pub fn scale(&self, field: &PrimeField, c: FieldElem) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    pub fn mul(&self, field: &PrimeField, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let q = field.q() as u64;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a.0 as u64 * b.0 as u64) % q;
            }
        }
        Poly::from_coeffs(out.into_iter().map(|c| FieldElem(c as u32)).collect())
    }

    pub fn pow(&self, field: &PrimeField, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(field, &base);
            }
        }
        acc
    }

    /// Quotient and remainder of division by a nonzero polynomial.
    pub fn div_rem(&self, field: &PrimeField, divisor: &Poly) -> Result<(Poly, Poly)> {
        let dlead = divisor.leading().ok_or(Error::ZeroPolynomial)?;
        let dinv = field.inv(dlead)?;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![FieldElem::ZERO; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = field.mul(rem[k + dd], dinv);
            quot[k] = c;
            if c.is_zero() {
                continue;
            }
            for (i, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + i] = field.sub(rem[k + i], field.mul(c, b));
            }
        }
        rem.truncate(dd);
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    pub fn rem(&self, field: &PrimeField, divisor: &Poly) -> Result<Poly> {
        Ok(self.div_rem(field, divisor)?.1)
    }

    /// Scales to leading coefficient one; the zero polynomial is returned as is.
    pub fn monic(&self, field: &PrimeField) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) if l == FieldElem::ONE => self.clone(),
            Some(l) => self.scale(field, field.inv(l).expect("nonzero leading coefficient")),
        }
    }

    /// Monic gcd. Errors when both inputs are zero.
    pub fn gcd(&self, field: &PrimeField, other: &Poly) -> Result<Poly> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(field, &b)?;
            a = b;
            b = r;
        }
        Ok(a.monic(field))
    }

    /// Formal derivative (characteristic q).
    pub fn derivative(&self, field: &PrimeField) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| field.mul(c, field.elem(i as i64)))
                .collect(),
        )
    }

    pub fn is_squarefree(&self, field: &PrimeField) -> Result<bool> {
        let deg = self.degree().ok_or(Error::ZeroPolynomial)?;
        if deg == 0 {
            return Ok(true);
        }
        let d = self.derivative(field);
        if d.is_zero() {
            return Ok(false);
        }
        Ok(self.gcd(field, &d)?.degree() == Some(0))
    }

    pub fn is_coprime(&self, field: &PrimeField, other: &Poly) -> bool {
        match self.gcd(field, other) {
            Ok(g) => g.degree() == Some(0),
            Err(_) => false,
        }
    }

    /// Irreducibility test for monic `f` of degree `n >= 1`:
    /// `x^(q^n) = x mod f` and `gcd(x^(q^(n/p)) - x, f) = 1` for primes `p | n`.
    pub fn is_irreducible(&self, field: &PrimeField) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(n) => n,
        };
        if n == 1 {
            return true;
        }
        let x = Poly::from_coeffs(vec![FieldElem::ZERO, FieldElem::ONE]);
        let frob_iter = |k: usize| -> Poly {
            let mut y = x.clone();
            for _ in 0..k {
                y = pow_mod(field, &y, field.q() as u64, self);
            }
            y
        };
        if frob_iter(n) != x.rem(field, self).expect("nonzero modulus") {
            return false;
        }
        arith::factorize(n as u64).into_iter().all(|(p, _)| {
            let y = frob_iter(n / p as usize).sub(field, &x);
            y.is_coprime(field, self)
        })
    }

    /// Lex index of a monic polynomial of degree `d` among all monic
    /// polynomials of that degree (constant coefficient most significant).
    pub fn monic_index(&self, q: u32) -> u64 {
        let d = self.coeffs.len() - 1;
        self.coeffs[..d].iter().fold(0u64, |acc, c| acc * q as u64 + c.0 as u64)
    }

    /// Inverse of [`Poly::monic_index`].
    pub fn from_monic_index(q: u32, d: usize, mut index: u64) -> Poly {
        let mut coeffs = vec![FieldElem::ZERO; d + 1];
        coeffs[d] = FieldElem::ONE;
        for k in (0..d).rev() {
            coeffs[k] = FieldElem((index % q as u64) as u32);
            index /= q as u64;
        }
        Poly { coeffs }
    }

    /// Integer coefficient list, low to high.
    pub fn to_ints(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.0).collect()
    }

    /// Parses the text form `[c0,c1,...]`.
    pub fn parse(field: &PrimeField, s: &str) -> Result<Poly> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("polynomial must look like [c0,c1,...]: {s}")))?;
        if inner.trim().is_empty() {
            return Ok(Poly::zero());
        }
        let ints = inner
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_ints(field, &ints))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c.0)?;
        }
        write!(f, "]")
    }
}

fn pow_mod(field: &PrimeField, base: &Poly, mut e: u64, modulus: &Poly) -> Poly {
    let mut acc = Poly::one();
    let mut b = base.rem(field, modulus).expect("nonzero modulus");
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(field, &b).rem(field, modulus).expect("nonzero modulus");
        }
        e >>= 1;
        if e > 0 {
            b = b.mul(field, &b).rem(field, modulus).expect("nonzero modulus");
        }
    }
    acc
}

/// Number of monic polynomials of degree `d`.
pub fn monic_count(q: u32, d: usize) -> u64 {
    (q as u64).pow(d as u32)
}

/// Monic polynomials of one degree in lex order, restricted to an index
/// range so the stream can be split across workers and resumed.
#[derive(Clone, Debug)]
pub struct MonicIter {
    q: u32,
    d: usize,
    next: u64,
    end: u64,
}

impl MonicIter {
    pub fn new(q: u32, d: usize) -> Self {
        Self::range(q, d, 0, monic_count(q, d))
    }

    pub fn range(q: u32, d: usize, start: u64, end: u64) -> Self {
        MonicIter { q, d, next: start, end: end.min(monic_count(q, d)) }
    }
}

impl Iterator for MonicIter {
    type Item = Poly;

    fn next(&mut self) -> Option<Poly> {
        if self.next >= self.end {
            return None;
        }
        let p = Poly::from_monic_index(self.q, self.d, self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

pub fn enumerate_monic(field: &PrimeField, d: usize) -> MonicIter {
    MonicIter::new(field.q(), d)
}

pub fn enumerate_monic_squarefree(field: &PrimeField, d: usize) -> impl Iterator<Item = Poly> + '_ {
    enumerate_monic(field, d).filter(move |p| p.is_squarefree(field).expect("monic is nonzero"))
}

/// All monic irreducibles of degree `1..=max_degree`, by degree then lex order.
pub fn irreducibles_up_to(field: &PrimeField, max_degree: usize) -> Vec<Poly> {
    (1..=max_degree)
        .flat_map(|n| enumerate_monic(field, n).filter(|p| p.is_irreducible(field)))
        .collect()
}

/// Number of monic irreducibles of degree `n` over `F_q`: `(1/n) Σ_{m|n} μ(m) q^(n/m)`.
pub fn irreducible_count(q: u64, n: u32) -> u64 {
    let total: i128 = arith::divisors(n as u64)
        .into_iter()
        .map(|m| arith::moebius(m) as i128 * (q as i128).pow(n / m as u32))
        .sum();
    (total / n as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> PrimeField {
        // r = 2 works for every odd prime
        PrimeField::new(q, 2).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = f(5);
        let p = Poly::from_ints(&f5, &[1, 0, 1]);
        assert_eq!(p.eval(&f5, FieldElem(2)), FieldElem(0));
        let a = Poly::from_ints(&f5, &[-1, 0, 1]);
        let b = Poly::from_ints(&f5, &[-1, 1]);
        assert_eq!(a.gcd(&f5, &b).unwrap(), b);
        let f3 = f(3);
        let c = Poly::from_ints(&f3, &[0, 1, 0, 1]);
        assert_eq!(c.derivative(&f3), Poly::one());
        assert!(Poly::zero().gcd(&f5, &Poly::zero()).is_err());
    }

    #[test]
    fn squarefree_examples() {
        let f5 = f(5);
        assert!(Poly::from_ints(&f5, &[1, 0, 1]).is_squarefree(&f5).unwrap());
        assert!(!Poly::from_ints(&f5, &[1, 2, 1]).is_squarefree(&f5).unwrap());
        let f3 = f(3);
        assert!(Poly::from_ints(&f3, &[0, -1, 0, 1]).is_squarefree(&f3).unwrap());
        // x^3 + 1 = (x + 1)^3 in characteristic 3
        assert!(!Poly::from_ints(&f3, &[1, 0, 0, 1]).is_squarefree(&f3).unwrap());
        assert_eq!(Poly::zero().is_squarefree(&f3), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn enumeration_examples() {
        let f3 = f(3);
        let lin: Vec<String> = enumerate_monic(&f3, 1).map(|p| p.to_string()).collect();
        assert_eq!(lin, vec!["[0,1]", "[1,1]", "[2,1]"]);
        assert_eq!(enumerate_monic_squarefree(&f3, 2).count(), 6);
        let f5 = f(5);
        let consts: Vec<Poly> = enumerate_monic(&f5, 0).collect();
        assert_eq!(consts, vec![Poly::one()]);
    }

    #[test]
    fn squarefree_counts_match_classical_formula() {
        for q in [3u64, 5, 7] {
            let fq = f(q);
            for d in 2..=5usize {
                if q.pow(d as u32) > 20_000 {
                    continue;
                }
                let n = enumerate_monic_squarefree(&fq, d).count() as u64;
                assert_eq!(n, q.pow(d as u32) - q.pow(d as u32 - 1), "q={q} d={d}");
            }
        }
    }

    #[test]
    fn irreducible_examples_and_necklace_counts() {
        let f3 = f(3);
        assert_eq!(irreducibles_up_to(&f3, 1).len(), 3);
        assert_eq!(irreducibles_up_to(&f3, 2).len(), 6);
        let f5 = f(5);
        assert_eq!(irreducibles_up_to(&f5, 2).len(), 15);
        for q in [3u64, 5] {
            let fq = f(q);
            for n in 1..=5usize {
                if q.pow(n as u32) > 4000 {
                    continue;
                }
                let got = enumerate_monic(&fq, n).filter(|p| p.is_irreducible(&fq)).count() as u64;
                assert_eq!(got, irreducible_count(q, n as u32), "q={q} n={n}");
            }
        }
        // a degree-4 product of two quadratics is rejected
        let p = Poly::from_ints(&f3, &[1, 0, 1]); // x^2 + 1 irreducible mod 3
        assert!(p.is_irreducible(&f3));
        assert!(!p.mul(&f3, &p).is_irreducible(&f3));
    }

    #[test]
    fn index_round_trip_and_text_form() {
        let f5 = f(5);
        for (i, p) in enumerate_monic(&f5, 3).enumerate() {
            assert_eq!(p.monic_index(5), i as u64);
        }
        let p = Poly::parse(&f5, "[1,0,2]").unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.to_string(), "[1,0,2]");
        assert!(Poly::parse(&f5, "1,0,2").is_err());
    }

    #[test]
    fn div_rem_reconstructs() {
        let f7 = f(7);
        let a = Poly::from_ints(&f7, &[3, 1, 4, 1, 5]);
        let b = Poly::from_ints(&f7, &[2, 6, 1]);
        let (qt, rm) = a.div_rem(&f7, &b).unwrap();
        assert_eq!(qt.mul(&f7, &b).add(&f7, &rm), a);
        assert!(rm.degree().unwrap_or(0) < 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
            prop::collection::vec(0i64..7, 0..max_len)
        }

        proptest! {
            #[test]
            fn gcd_divides_both_and_is_monic(a in arb_poly(7), b in arb_poly(7)) {
                let f7 = f(7);
                let pa = Poly::from_ints(&f7, &a);
                let pb = Poly::from_ints(&f7, &b);
                prop_assume!(!(pa.is_zero() && pb.is_zero()));
                let g = pa.gcd(&f7, &pb).unwrap();
                prop_assert!(g.is_monic());
                prop_assert!(pa.rem(&f7, &g).unwrap().is_zero());
                prop_assert!(pb.rem(&f7, &g).unwrap().is_zero());
            }
        }
    }
}
