//! Leading-order predictions for the number of tuples of squarefree,
//! pairwise coprime polynomials with prescribed values, exact brute-force
//! counters for the same sets, and the local count of residue tuples modulo
//! `(X - t)^2`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::family::TupleSpace;
use crate::field::{FieldElem, PrimeField};
use crate::poly::{self, monic_count, Poly};

/// Default truncation degree of the Euler products.
pub const DEFAULT_TRUNCATION: u32 = 8;

/// `K_j = Π_P (1 - j/((|P|+1)(|P|+j)))` and `L_n = Π_{j≤n} K_j`, with the
/// product over monic irreducibles of degree at most `N`.
#[derive(Clone, Debug)]
pub struct EulerConstants {
    q: u32,
    n_max: u32,
    truncation: u32,
    /// `irreducibles[e - 1]` = number of monic irreducibles of degree `e`
    irreducibles: Vec<u64>,
}

impl EulerConstants {
    pub fn new(q: u32, n_max: u32, truncation: u32) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::DomainError("truncation degree must be at least 1".into()));
        }
        let irreducibles = (1..=truncation).map(|e| poly::irreducible_count(q as u64, e)).collect();
        Ok(EulerConstants { q, n_max, truncation, irreducibles })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    fn norms(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.irreducibles
            .iter()
            .enumerate()
            .map(|(e, &n)| ((self.q as f64).powi(e as i32 + 1), n))
    }

    pub fn k(&self, j: u32) -> f64 {
        let j = j as f64;
        self.norms()
            .map(|(norm, count)| count as f64 * (-j / ((norm + 1.0) * (norm + j))).ln_1p())
            .sum::<f64>()
            .exp()
    }

    /// `K_j` of the truncated product as an exact rational.
    pub fn k_exact(&self, j: u32) -> BigRational {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (e, &count) in self.irreducibles.iter().enumerate() {
            let norm = BigUint::from(self.q).pow(e as u32 + 1);
            let d = (&norm + 1u32) * (&norm + j);
            let n = &d - j;
            num *= n.pow(count as u32);
            den *= d.pow(count as u32);
        }
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn l(&self, n: u32) -> f64 {
        (1..=n).map(|j| self.k(j)).product()
    }

    pub fn l_exact(&self, n: u32) -> BigRational {
        (1..=n).fold(BigRational::one(), |acc, j| acc * self.k_exact(j))
    }

    /// `ζ_q(2) = q/(q-1)`.
    pub fn zeta2(&self) -> BigRational {
        BigRational::new(BigInt::from(self.q), BigInt::from(self.q - 1))
    }

    fn zeta2_f64(&self) -> f64 {
        self.q as f64 / (self.q as f64 - 1.0)
    }

    /// Lower bound on the omitted factor of `L_{n_max}`:
    /// `exp(-n(n+1) q^{-N} / ((N+1)(q-1)))`.
    pub fn tail_factor_bound(&self) -> f64 {
        let n = self.n_max as f64;
        let q = self.q as f64;
        (-(n * (n + 1.0)) * q.powi(-(self.truncation as i32)) / ((self.truncation as f64 + 1.0) * (q - 1.0))).exp()
    }

    fn check_index(&self, n: u32) -> Result<()> {
        if n > self.n_max {
            Err(Error::DomainError(format!("L_{n} requested with n_max = {}", self.n_max)))
        } else {
            Ok(())
        }
    }
}

/// A leading-order value and the scale `q^{-min d/2}` of its relative error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub value: f64,
    pub error_scale: f64,
}

fn error_scale(q: u32, min_degree: u32) -> f64 {
    (q as f64).powf(-(min_degree as f64) / 2.0)
}

fn check_points(q: u32, ell: u32) -> Result<()> {
    if ell > q {
        Err(Error::DomainError(format!("{ell} points requested in F_{q}")))
    } else {
        Ok(())
    }
}

/// Degrees of the distinct monic irreducible factors of `u`.
pub fn irreducible_factor_degrees(field: &PrimeField, u: &Poly) -> Vec<u32> {
    let Some(deg) = u.degree() else { return Vec::new() };
    poly::irreducibles_up_to(field, deg)
        .into_iter()
        .filter(|p| u.rem(field, p).map(|rem| rem.is_zero()).unwrap_or(false))
        .map(|p| p.degree().unwrap_or(0) as u32)
        .collect()
}

fn coprime_factor(q: u32, slots: u32, u_factor_degrees: &[u32]) -> f64 {
    u_factor_degrees
        .iter()
        .map(|&e| {
            let norm = (q as f64).powi(e as i32);
            norm / (norm + slots as f64)
        })
        .product()
}

/// Tuples `(f_1..f_n)` of monic squarefree pairwise coprime polynomials,
/// coprime to `U`, with `f_j(x_i) = a_{i,j}` at `ℓ` points:
/// `L_{n-1} q^{Σd} / ζ_q(2)^n · (q/((q-1)^n (q+n)))^ℓ · Π_{P|U} |P|/(|P|+n)`.
pub fn predict_r(c: &EulerConstants, degrees: &[u32], ell: u32, u_factor_degrees: &[u32]) -> Result<Prediction> {
    let n = degrees.len() as u32;
    if n == 0 {
        return Err(Error::ShapeMismatch("no polynomial slots".into()));
    }
    c.check_index(n - 1)?;
    check_points(c.q, ell)?;
    let q = c.q as f64;
    let total: u32 = degrees.iter().sum();
    let value = c.l(n - 1) * q.powi(total as i32) / c.zeta2_f64().powi(n as i32)
        * (q / ((q - 1.0).powi(n as i32) * (q + n as f64))).powi(ell as i32)
        * coprime_factor(c.q, n, u_factor_degrees);
    Ok(Prediction { value, error_scale: error_scale(c.q, degrees.iter().copied().min().unwrap_or(0)) })
}

/// Tuples `(F_1..F_n)` of pairwise coprime `r_j`-th-power-free polynomials with
/// prescribed values; `shape[j]` lists the degrees of the squarefree parts of `F_j`.
pub fn predict_t(c: &EulerConstants, shape: &[Vec<u32>], ell: u32, u_factor_degrees: &[u32]) -> Result<Prediction> {
    let n = shape.len() as i32;
    let slots: u32 = shape.iter().map(|s| s.len() as u32).sum();
    if n == 0 || slots == 0 || shape.iter().any(|s| s.is_empty()) {
        return Err(Error::ShapeMismatch("every function needs at least one slot".into()));
    }
    c.check_index(slots - 1)?;
    check_points(c.q, ell)?;
    let q = c.q as f64;
    let total: u32 = shape.iter().flatten().sum();
    let min = shape.iter().flatten().copied().min().unwrap_or(0);
    let value = c.l(slots - 1) * q.powi(total as i32) / c.zeta2_f64().powi(slots as i32)
        * (q / ((q - 1.0).powi(n) * (q + slots as f64))).powi(ell as i32)
        * coprime_factor(c.q, slots, u_factor_degrees);
    Ok(Prediction { value, error_scale: error_scale(c.q, min) })
}

/// Tuples indexed by the nonzero vectors of `Π [0, r_j)` with prescribed
/// values of the `n = rs.len()` products; `total_degree = Σ d(α)`.
pub fn predict_s(c: &EulerConstants, rs: &[u32], total_degree: u32, min_degree: u32, ell: u32) -> Result<Prediction> {
    if rs.is_empty() || rs.iter().any(|&r| r < 2) {
        return Err(Error::ShapeMismatch(format!("bad orders {rs:?}")));
    }
    let slots = rs.iter().product::<u32>() - 1;
    c.check_index(slots - 1)?;
    check_points(c.q, ell)?;
    let q = c.q as f64;
    let n = rs.len() as i32;
    let value = c.l(slots - 1) * q.powi(total_degree as i32) / c.zeta2_f64().powi(slots as i32)
        * (q / ((q - 1.0).powi(n) * (q + slots as f64))).powi(ell as i32);
    Ok(Prediction { value, error_scale: error_scale(c.q, min_degree) })
}

/// Exponents `s_j` of `d = Π p_j^{s_j}` against the factorisation of `r`.
fn profile_of(r: u32, d: u32) -> Vec<(u64, u32, u32)> {
    arith::factorize(r as u64)
        .into_iter()
        .map(|(p, t)| (p, t, arith::valuation(d as u64, p)))
        .collect()
}

/// Number of `(f_1..f_{r-1})` with `Σ deg f_i = total_degree` whose prime-power
/// models take prescribed consistent values at `ℓ` points, `zero_profile[d]`
/// of which have zero pattern `d ≠ r` (nonzero exactly up to `p^{v_p(d)}`).
pub fn predict_general(
    c: &EulerConstants,
    r: u32,
    total_degree: u32,
    min_degree: u32,
    ell: u32,
    zero_profile: &BTreeMap<u32, u32>,
) -> Result<Prediction> {
    if r < 2 {
        return Err(Error::DegenerateOrder(r));
    }
    c.check_index(r - 2)?;
    check_points(c.q, ell)?;
    let zeros: u32 = zero_profile.values().sum();
    if zeros > ell {
        return Err(Error::ShapeMismatch(format!("{zeros} zero sites among {ell} points")));
    }
    let q = c.q as f64;
    let qr = q + r as f64 - 1.0;
    let mut value = c.l(r - 2) * q.powi(total_degree as i32) / c.zeta2_f64().powi(r as i32 - 1);
    let full = profile_of(r, r);
    let tower: f64 = full.iter().map(|&(p, t, _)| (p as f64).powi((t * (t - 1) / 2) as i32)).product();
    let t_total: u32 = full.iter().map(|&(_, t, _)| t).sum();
    value *= (q * tower / ((q - 1.0).powi(t_total as i32) * qr)).powi((ell - zeros) as i32);
    for (&d, &m) in zero_profile {
        if d == r || !r.is_multiple_of(d) {
            return Err(Error::ShapeMismatch(format!("zero pattern {d} for r = {r}")));
        }
        let prof = profile_of(r, d);
        let partial: f64 = prof.iter().map(|&(p, _, s)| (p as f64).powi((s * s.saturating_sub(1) / 2) as i32)).product();
        let s_total: u32 = prof.iter().map(|&(_, _, s)| s).sum();
        let factor = arith::euler_phi((r / d) as u64) as f64 * partial / (qr * (q - 1.0).powi(s_total as i32));
        value *= factor.powi(m as i32);
    }
    Ok(Prediction { value, error_scale: error_scale(c.q, min_degree) })
}

/// Limiting probability that one site has zero pattern `d` and a fixed
/// consistent choice of roots: `φ(r/d)/(d(q+r-1))` for `d ≠ r`, `q/(r(q+r-1))` for `d = r`.
pub fn site_weight(q: u32, r: u32, d: u32) -> Result<BigRational> {
    if d == 0 || !r.is_multiple_of(d) {
        return Err(Error::NotADivisor { d, r });
    }
    let qr = BigInt::from(q + r - 1);
    Ok(if d == r {
        BigRational::new(BigInt::from(q), BigInt::from(r) * qr)
    } else {
        BigRational::new(BigInt::from(arith::euler_phi((r / d) as u64)), BigInt::from(d) * qr)
    })
}

/// The same weight assembled prime by prime from the exponents `s_j` of the
/// zero pattern: `Π_{s_j<t_j} (p_j-1) p_j^{t_j-s_j-1} / (Π p_j^{s_j} (q+r-1))`.
pub fn site_weight_from_exponents(q: u32, r: u32, exponents: &[u32]) -> Result<BigRational> {
    let prof = arith::factorize(r as u64);
    if exponents.len() != prof.len() || exponents.iter().zip(&prof).any(|(&s, &(_, t))| s > t) {
        return Err(Error::ShapeMismatch(format!("exponents {exponents:?} for r = {r}")));
    }
    if exponents.iter().zip(&prof).all(|(&s, &(_, t))| s == t) {
        return site_weight(q, r, r);
    }
    let mut num = BigInt::one();
    let mut den = BigInt::from(q + r - 1);
    for (&s, &(p, t)) in exponents.iter().zip(&prof) {
        if s < t {
            num *= BigInt::from(p - 1) * BigInt::from(p).pow(t - s - 1);
        }
        den *= BigInt::from(p).pow(s);
    }
    Ok(BigRational::new(num, den))
}

/// Total weight of all zero patterns and root choices; equals 1.
pub fn total_site_weight(q: u32, r: u32) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for d in arith::divisors(r as u64) {
        total += site_weight(q, r, d as u32)? * BigRational::from_integer(BigInt::from(d));
    }
    Ok(total)
}

/// A condition on a polynomial tuple for [`brute_count`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `f_slot(x) = value` (slots are 1-based)
    SlotValue { x: FieldElem, slot: usize, value: FieldElem },
    /// `Π_i f_i(x)^(i mod d) = value`
    ModelValue { x: FieldElem, d: u32, value: FieldElem },
    /// every slot coprime to the given polynomial
    CoprimeTo(Poly),
}

impl Constraint {
    fn holds(&self, field: &PrimeField, tuple: &[Poly]) -> bool {
        match self {
            Constraint::SlotValue { x, slot, value } => tuple[slot - 1].eval(field, *x) == *value,
            Constraint::ModelValue { x, d, value } => {
                let mut acc = FieldElem::ONE;
                for (i, f) in tuple.iter().enumerate() {
                    let e = (i as u32 + 1) % d;
                    if e > 0 {
                        acc = field.mul(acc, field.pow(f.eval(field, *x), e as i64).expect("e > 0"));
                    }
                }
                acc == *value
            }
            Constraint::CoprimeTo(u) => tuple.iter().all(|f| f.is_coprime(field, u)),
        }
    }
}

/// Exact number of pairwise coprime tuples of monic squarefree polynomials of
/// the given degrees satisfying every constraint, by exhaustive enumeration.
pub fn brute_count(field: &PrimeField, degrees: &[u32], constraints: &[Constraint], budget: u128) -> Result<u128> {
    let size = degrees
        .iter()
        .try_fold(1u128, |acc, &d| acc.checked_mul(monic_count(field.q(), d as usize) as u128))
        .unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let space = TupleSpace::new(field, degrees);
    let len = space.outer_len();
    let chunk = (len / 64).max(1);
    let starts: Vec<u64> = (0..len).step_by(chunk as usize).collect();
    Ok(starts
        .par_iter()
        .map(|&start| {
            let mut n = 0u128;
            space.visit(field, start..start + chunk, |t| {
                if constraints.iter().all(|c| c.holds(field, t)) {
                    n += 1;
                }
            });
            n
        })
        .sum())
}

/// Enumerated and closed-form sizes of the set of `n`-tuples of nonzero
/// residues modulo `(X - t)^2` of which at most one is divisible by `X - t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalCount {
    pub q: u32,
    pub n: u32,
    pub enumerated: u128,
    pub closed_form: u128,
}

impl LocalCount {
    pub fn matches(&self) -> bool {
        self.enumerated == self.closed_form
    }
}

/// Residues `c_0 + c_1 (X - t)` are pairs `(c_0, c_1) ≠ (0, 0)`; `X - t`
/// divides the residue iff `c_0 = 0`.
pub fn heuristic_local_count(q: u32, n: u32) -> Result<LocalCount> {
    if !arith::is_prime(q as u64) {
        return Err(Error::NonPrimeModulus(q as u64));
    }
    if n == 0 {
        return Err(Error::DomainError("n must be positive".into()));
    }
    let residues: Vec<(u32, u32)> = (0..q)
        .flat_map(|c0| (0..q).map(move |c1| (c0, c1)))
        .filter(|&(c0, c1)| c0 != 0 || c1 != 0)
        .collect();
    let mut enumerated = 0u128;
    let mut idx = vec![0usize; n as usize];
    'outer: loop {
        let divisible = idx.iter().filter(|&&i| residues[i].0 == 0).count();
        if divisible <= 1 {
            enumerated += 1;
        }
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < residues.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let (qq, nn) = (q as u128, n as u128);
    let closed_form = qq.pow(n - 1) * (qq - 1).pow(n) * (qq + nn);
    Ok(LocalCount { q, n, enumerated, closed_form })
}

/// `|brute / predicted - 1|`.
pub fn relative_error(exact: u128, predicted: f64) -> f64 {
    (exact.to_f64().unwrap_or(f64::INFINITY) / predicted - 1.0).abs()
}
