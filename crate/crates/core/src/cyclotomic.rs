//! Exact arithmetic in `Z[ζ_m]`.
//!
//! Elements are integer vectors in the power basis `1, ζ, …, ζ^(φ(m)-1)`,
//! reduced modulo the cyclotomic polynomial `Φ_m`. The representation is
//! canonical, so equality, hashing and ordering are structural and elements
//! can key distribution tables.
//!
//! Coefficients are `i64` with overflow checks. Every quantity handled here
//! is a sum of at most `q + 1 <= 2^20` roots of unity (or a product of two
//! such), far from the `i64` range.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};

/// `Φ_m` as integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(m: u32) -> Vec<i64> {
    assert!(m >= 1, "conductor must be positive");
    // x^m - 1
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for e in arith::divisors(m as u64) {
        if e as u32 == m {
            continue;
        }
        num = exact_div(&num, &cyclotomic_polynomial(e as u32));
    }
    num
}

/// Exact division of integer polynomials by a monic divisor.
fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1);
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        for (i, &b) in den.iter().enumerate() {
            rem[k + i] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division was not exact");
    quot
}

struct RingData {
    phi: Vec<i64>,
    /// Reduced coordinates of `ζ^k` for `0 <= k < m`.
    powers: Vec<Vec<i64>>,
}

fn ring(m: u32) -> Arc<RingData> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<RingData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().expect("cache poisoned").get(&m) {
        return r.clone();
    }
    let phi = cyclotomic_polynomial(m);
    let n = phi.len() - 1;
    let powers = (0..m as usize)
        .map(|k| {
            let mut v = vec![0i64; k.max(n) + 1];
            v[k] = 1;
            reduce_with(&phi, v)
        })
        .collect();
    let data = Arc::new(RingData { phi, powers });
    cache.write().expect("cache poisoned").entry(m).or_insert(data).clone()
}

/// Reduces a coefficient vector of any length modulo the monic `phi`,
/// returning exactly `deg phi` coordinates.
fn reduce_with(phi: &[i64], mut v: Vec<i64>) -> Vec<i64> {
    let n = phi.len() - 1;
    for k in (n..v.len()).rev() {
        let c = v[k];
        if c == 0 {
            continue;
        }
        for (i, &b) in phi.iter().enumerate() {
            v[k - n + i] = v[k - n + i].checked_sub(c.checked_mul(b).expect("overflow")).expect("overflow");
        }
    }
    v.resize(n, 0);
    v
}

/// An element of `Z[ζ_m]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycInt {
    m: u32,
    coeffs: Vec<i64>,
}

impl CycInt {
    pub fn zero(m: u32) -> Self {
        CycInt { m, coeffs: vec![0; arith::euler_phi(m as u64) as usize] }
    }

    pub fn from_int(m: u32, n: i64) -> Self {
        let mut z = Self::zero(m);
        z.coeffs[0] = n;
        z
    }

    pub fn one(m: u32) -> Self {
        Self::from_int(m, 1)
    }

    /// Builds from power-basis coordinates of any length, reducing mod `Φ_m`.
    pub fn from_coeffs(m: u32, coeffs: Vec<i64>) -> Self {
        let data = ring(m);
        CycInt { m, coeffs: reduce_with(&data.phi, coeffs) }
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &CycInt) -> Result<()> {
        if self.m != other.m {
            Err(Error::ConductorMismatch(self.m, other.m))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &CycInt) -> Result<CycInt> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(*b).expect("CycInt overflow"))
            .collect();
        Ok(CycInt { m: self.m, coeffs })
    }

    pub fn try_mul(&self, other: &CycInt) -> Result<CycInt> {
        self.check(other)?;
        let n = self.coeffs.len();
        let mut prod = vec![0i64; 2 * n - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                prod[i + j] = prod[i + j].checked_add(a.checked_mul(b).expect("CycInt overflow")).expect("CycInt overflow");
            }
        }
        Ok(CycInt::from_coeffs(self.m, prod))
    }

    /// `self += k * other` in place; conductors must agree.
    pub fn add_scaled(&mut self, other: &CycInt, k: i64) {
        assert_eq!(self.m, other.m, "conductor mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.checked_add(b.checked_mul(k).expect("CycInt overflow")).expect("CycInt overflow");
        }
    }

    pub fn pow(&self, e: u32) -> CycInt {
        let mut acc = CycInt::one(self.m);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Image under the automorphism `ζ_m ↦ ζ_m^j`, `gcd(j, m) = 1`.
    pub fn galois(&self, j: u32) -> Result<CycInt> {
        if arith::gcd(j as u64, self.m as u64) != 1 {
            return Err(Error::NotCoprime { j, r: self.m });
        }
        let data = ring(self.m);
        let mut out = CycInt::zero(self.m);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let idx = (k as u64 * j as u64 % self.m as u64) as usize;
                out.add_scaled(&CycInt { m: self.m, coeffs: data.powers[idx].clone() }, c);
            }
        }
        Ok(out)
    }

    /// Maps `Z[ζ_m]` into `Z[ζ_r]` via `ζ_m ↦ ζ_r^(r/m)`.
    pub fn embed(&self, r: u32) -> Result<CycInt> {
        if !r.is_multiple_of(self.m) {
            return Err(Error::NotADivisor { d: self.m, r });
        }
        let step = r / self.m;
        let data = ring(r);
        let mut out = CycInt::zero(r);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let idx = (k as u32 * step % r) as usize;
                out.add_scaled(&CycInt { m: r, coeffs: data.powers[idx].clone() }, c);
            }
        }
        Ok(out)
    }

    /// Complex value under `ζ_m = exp(2πi/m)`; for display only.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.m as f64;
            re += c as f64 * t.cos();
            im += c as f64 * t.sin();
        }
        (re, im)
    }
}

/// `ζ_m^(k mod m)`.
pub fn root_of_unity(m: u32, k: i64) -> CycInt {
    let idx = k.rem_euclid(m as i64) as usize;
    CycInt { m, coeffs: ring(m).powers[idx].clone() }
}

impl Add for &CycInt {
    type Output = CycInt;
    fn add(self, rhs: &CycInt) -> CycInt {
        self.try_add(rhs).expect("conductor mismatch")
    }
}

impl Add for CycInt {
    type Output = CycInt;
    fn add(self, rhs: CycInt) -> CycInt {
        &self + &rhs
    }
}

impl Sub for &CycInt {
    type Output = CycInt;
    fn sub(self, rhs: &CycInt) -> CycInt {
        self + &(-rhs)
    }
}

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt { m: self.m, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        -&self
    }
}

impl Mul for &CycInt {
    type Output = CycInt;
    fn mul(self, rhs: &CycInt) -> CycInt {
        self.try_mul(rhs).expect("conductor mismatch")
    }
}

impl Mul for CycInt {
    type Output = CycInt;
    fn mul(self, rhs: CycInt) -> CycInt {
        &self * &rhs
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            match (k, mag) {
                (0, _) => write!(f, "{sign}{mag}")?,
                (1, 1) => write!(f, "{sign}z")?,
                (1, _) => write!(f, "{sign}{mag}z")?,
                (_, 1) => write!(f, "{sign}z^{k}")?,
                _ => write!(f, "{sign}{mag}z^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
