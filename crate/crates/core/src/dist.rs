//! The limiting joint law of the character values at one site, its
//! composition across divisors, closed-form marginals and conditionals, and
//! exact convolution over the `q + 1` sites.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::cyclotomic::{root_of_unity, CycInt};
use crate::error::{Error, Result};

/// One joint outcome at a site: the values are nonzero exactly on the
/// divisors of `d`, and `roots` fixes `ε_{p^a} = ζ_{p^a}^k` at the top level
/// `a = v_p(d)` of each prime `p | d`; lower levels are its powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteAtom {
    pub d: u32,
    /// `(p, a, k)` for each prime `p | d`
    pub roots: Vec<(u32, u32, u32)>,
    /// probability times `r (q + r - 1)`
    pub weight: u64,
}

#[derive(Clone, Debug)]
pub struct SiteDistribution {
    q: u32,
    r: u32,
    atoms: Vec<SiteAtom>,
}

fn check_divisor(r: u32, d: u32) -> Result<()> {
    if d == 0 || !r.is_multiple_of(d) {
        Err(Error::NotADivisor { d, r })
    } else {
        Ok(())
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl SiteDistribution {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn atoms(&self) -> &[SiteAtom] {
        &self.atoms
    }

    /// Common denominator `r (q + r - 1)` of the atom probabilities.
    pub fn denominator(&self) -> u64 {
        self.r as u64 * (self.q as u64 + self.r as u64 - 1)
    }

    pub fn probability(&self, atom: &SiteAtom) -> BigRational {
        ratio(atom.weight, self.denominator())
    }

    /// Probability of the event `pred` over atoms.
    pub fn probability_of<F: Fn(&SiteAtom) -> bool>(&self, pred: F) -> BigRational {
        let w: u64 = self.atoms.iter().filter(|a| pred(a)).map(|a| a.weight).sum();
        ratio(w, self.denominator())
    }

    /// `X_d` at an atom.
    pub fn value(&self, atom: &SiteAtom, d: u32) -> Result<CycInt> {
        value_at_divisor(self.r, atom, d)
    }
}

/// Builds every atom: for each `d | r`, all `d` choices of top-level roots,
/// with probability `φ(r/d)/(d(q+r-1))` (`d ≠ r`) or `q/(r(q+r-1))` (`d = r`).
pub fn site_distribution(q: u32, r: u32) -> Result<SiteDistribution> {
    if r < 2 {
        return Err(Error::DegenerateOrder(r));
    }
    if q % r != 1 {
        return Err(Error::CongruenceViolation { q: q as u64, r });
    }
    let denominator = r as u64 * (q as u64 + r as u64 - 1);
    let mut atoms = Vec::new();
    for d in arith::divisors(r as u64) {
        let d = d as u32;
        // probability × r(q+r-1)
        let weight = if d == r { q as u64 } else { arith::euler_phi((r / d) as u64) * (r / d) as u64 };
        let levels: Vec<(u32, u32)> = arith::factorize(d as u64).into_iter().map(|(p, a)| (p as u32, a)).collect();
        let mut ks = vec![0u32; levels.len()];
        loop {
            let roots = levels.iter().zip(&ks).map(|(&(p, a), &k)| (p, a, k)).collect();
            atoms.push(SiteAtom { d, roots, weight });
            let mut i = 0;
            while i < ks.len() {
                ks[i] += 1;
                if ks[i] < levels[i].0.pow(levels[i].1) {
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
            if i == ks.len() {
                break;
            }
        }
    }
    let total: u64 = atoms.iter().map(|a| a.weight).sum();
    if total != denominator {
        return Err(Error::NormalizationFailure(format!("atoms sum to {total}/{denominator}")));
    }
    Ok(SiteDistribution { q, r, atoms })
}

/// `X_d = Π_{p|d} (X_{p^b})^{σ_p}` with `b = v_p(d)`, `X_{p^b} = ε_{p^a}^{p^{a-b}}`
/// and `σ_p ≡ (d/p^b)^{-1} (mod p^b)`; zero when some `v_p(d)` exceeds `v_p(atom.d)`.
pub fn value_at_divisor(r: u32, atom: &SiteAtom, d: u32) -> Result<CycInt> {
    check_divisor(r, d)?;
    let mut exponent = 0u64;
    for (p, b) in arith::factorize(d as u64) {
        let p = p as u32;
        let Some(&(_, a, k)) = atom.roots.iter().find(|&&(pp, _, _)| pp == p) else {
            return Ok(CycInt::zero(r));
        };
        if b > a {
            return Ok(CycInt::zero(r));
        }
        let pb = p.pow(b);
        // ε_{p^a}^{p^{a-b}} = ζ_{p^b}^{k mod p^b}
        let level = (k % pb) as u64;
        let sigma = arith::mod_inverse((d / pb) as i64, pb as i64).expect("coprime cofactor") as u64;
        exponent += (r / pb) as u64 * level * sigma;
    }
    Ok(root_of_unity(r, (exponent % r as u64) as i64))
}

/// `(P(X_d = 0), P(X_d = ε))`, computed from atoms and checked against
/// `(r - r/d)/(q+r-1)` and `(q + r/d - 1)/(d(q+r-1))` for every `ε ∈ μ_d`.
pub fn marginal_check(site: &SiteDistribution, d: u32) -> Result<(BigRational, BigRational)> {
    let (q, r) = (site.q as u64, site.r as u64);
    check_divisor(site.r, d)?;
    if d == 1 {
        return Err(Error::DomainError("marginals are defined for d > 1".into()));
    }
    let values: Vec<CycInt> = site.atoms.iter().map(|a| site.value(a, d)).collect::<Result<_>>()?;
    let mass = |target: &CycInt| -> BigRational {
        let w: u64 = site.atoms.iter().zip(&values).filter(|(_, v)| *v == target).map(|(a, _)| a.weight).sum();
        ratio(w, site.denominator())
    };
    let zero = mass(&CycInt::zero(site.r));
    let expected_zero = ratio(r - r / d as u64, q + r - 1);
    if zero != expected_zero {
        return Err(Error::MarginalMismatch(format!("P(X_{d} = 0) = {zero}, expected {expected_zero}")));
    }
    let expected_root = ratio(q + r / d as u64 - 1, d as u64 * (q + r - 1));
    for k in 0..d {
        let eps = root_of_unity(site.r, (k * (site.r / d)) as i64);
        let p = mass(&eps);
        if p != expected_root {
            return Err(Error::MarginalMismatch(format!("P(X_{d} = {eps}) = {p}, expected {expected_root}")));
        }
    }
    Ok((zero, expected_root))
}

/// One verified conditional statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionalCheck {
    pub statement: String,
    pub expected: String,
    pub observed: String,
}

/// Prime-power levels `p^s`, `1 <= s <= v_p(r)`, grouped by prime.
fn towers(r: u32) -> Vec<(u32, u32)> {
    arith::factorize(r as u64).into_iter().map(|(p, t)| (p as u32, t)).collect()
}

/// Verifies, by exact summation over atoms: upward zero propagation, the
/// `p`-th-power compatibility between consecutive levels, the block
/// probability of every assignment of level values, and the composition
/// `X_d^{d/d'} = X_{d'}` whenever `X_d ≠ 0`.
pub fn conditional_checks(site: &SiteDistribution) -> Result<Vec<ConditionalCheck>> {
    let r = site.r;
    let q = site.q as u64;
    let mut out = Vec::new();
    let mut record = |statement: String, expected: BigRational, observed: BigRational| -> Result<()> {
        let check = ConditionalCheck { statement, expected: expected.to_string(), observed: observed.to_string() };
        if expected != observed {
            return Err(Error::ConditionalMismatch(format!(
                "{}: expected {}, observed {}",
                check.statement, check.expected, check.observed
            )));
        }
        out.push(check);
        Ok(())
    };
    let level_values = |atom: &SiteAtom, p: u32, t: u32| -> Result<Vec<CycInt>> {
        (1..=t).map(|s| site.value(atom, p.pow(s))).collect()
    };

    for &(p, t) in &towers(r) {
        for s in 1..=t {
            let pair: Vec<(u64, Vec<CycInt>)> = site
                .atoms
                .iter()
                .map(|a| Ok((a.weight, level_values(a, p, t)?)))
                .collect::<Result<_>>()?;
            if s < t {
                let lower_zero: u64 = pair.iter().filter(|(_, v)| v[s as usize - 1].is_zero()).map(|(w, _)| w).sum();
                let both_zero: u64 = pair
                    .iter()
                    .filter(|(_, v)| v[s as usize - 1].is_zero() && v[s as usize].is_zero())
                    .map(|(w, _)| w)
                    .sum();
                if lower_zero > 0 {
                    record(
                        format!("P(X_{} = 0 | X_{} = 0)", p.pow(s + 1), p.pow(s)),
                        BigRational::one(),
                        ratio(both_zero, lower_zero),
                    )?;
                }
            }
            let top_nonzero: u64 = pair.iter().filter(|(_, v)| !v[s as usize - 1].is_zero()).map(|(w, _)| w).sum();
            let compatible: u64 = pair
                .iter()
                .filter(|(_, v)| {
                    let top = &v[s as usize - 1];
                    let below = if s == 1 { CycInt::one(r) } else { v[s as usize - 2].clone() };
                    !top.is_zero() && top.pow(p) == below
                })
                .map(|(w, _)| w)
                .sum();
            if top_nonzero > 0 {
                let below = if s == 1 { "1".to_string() } else { format!("X_{}", p.pow(s - 1)) };
                record(
                    format!("P({below} = X_{}^{p} | X_{} ≠ 0)", p.pow(s), p.pow(s)),
                    BigRational::one(),
                    ratio(compatible, top_nonzero),
                )?;
            }
        }
    }

    // block probabilities over every assignment of level values
    let tw = towers(r);
    for d in arith::divisors(r as u64) {
        let d = d as u32;
        let depth: Vec<u32> = tw.iter().map(|&(p, _)| arith::valuation(d as u64, p as u64)).collect();
        // one slot per level p^s with s <= v_p(d); exponent of ζ_{p^s}
        let slots: Vec<(u32, u32, u32)> = tw
            .iter()
            .zip(&depth)
            .flat_map(|(&(p, t), &a)| (1..=a).map(move |s| (p, s, t)))
            .collect();
        let mut ks = vec![0u32; slots.len()];
        let closed = if d == r {
            ratio(q, r as u64 * (q + r as u64 - 1))
        } else {
            ratio(arith::euler_phi((r / d) as u64), d as u64 * (q + r as u64 - 1))
        };
        loop {
            let consistent = slots.iter().enumerate().all(|(i, &(p, s, _))| {
                // ε_{p^{s-1}} = ε_{p^s}^p, with ε_1 = 1
                let lower = if s == 1 { 0 } else { ks[i - 1] as u64 * p as u64 };
                (ks[i] as u64 * p as u64) % p.pow(s) as u64 == lower % p.pow(s) as u64
            });
            let mut w = 0u64;
            for atom in &site.atoms {
                let mut hit = true;
                for (&(p, t), &a) in tw.iter().zip(&depth) {
                    for s in 1..=t {
                        let v = site.value(atom, p.pow(s))?;
                        let want = if s <= a {
                            let i = slots.iter().position(|&(pp, ss, _)| pp == p && ss == s).expect("slot");
                            root_of_unity(r, (ks[i] * (r / p.pow(s))) as i64)
                        } else {
                            CycInt::zero(r)
                        };
                        if v != want {
                            hit = false;
                        }
                    }
                }
                if hit {
                    w += atom.weight;
                }
            }
            let expected = if consistent { closed.clone() } else { BigRational::zero() };
            record(format!("block d = {d}, level exponents {ks:?}"), expected, ratio(w, site.denominator()))?;
            let mut i = 0;
            while i < ks.len() {
                ks[i] += 1;
                if ks[i] < slots[i].0.pow(slots[i].1) {
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
            if i == ks.len() {
                break;
            }
        }
    }

    // composition across divisors
    let divisors: Vec<u32> = arith::divisors(r as u64).into_iter().map(|d| d as u32).collect();
    let mut consistent_weight = 0u64;
    let mut nonzero_weight = 0u64;
    for atom in &site.atoms {
        for &d in &divisors {
            let x = site.value(atom, d)?;
            if x.is_zero() {
                continue;
            }
            nonzero_weight += atom.weight;
            let ok = divisors
                .iter()
                .filter(|&&e| d % e == 0)
                .map(|&e| site.value(atom, e).map(|y| x.pow(d / e) == y))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            if ok {
                consistent_weight += atom.weight;
            }
        }
    }
    record(
        "P(X_d^{d/e} = X_e for all e | d | X_d ≠ 0)".into(),
        BigRational::one(),
        ratio(consistent_weight, nonzero_weight),
    )?;
    Ok(out)
}

/// Exact law of `(Σ_i X_{d,i})_{d ∈ divisors}` over independent sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointSumDistribution {
    q: u32,
    r: u32,
    divisors: Vec<u32>,
    n_sites: u32,
    denominator: BigUint,
    weights: BTreeMap<Vec<CycInt>, BigUint>,
}

/// JSON row: `{"key": [CycInt…], "prob": "num/den"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionEntry {
    pub key: Vec<CycInt>,
    pub prob: String,
}

impl JointSumDistribution {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn probability(&self, key: &[CycInt]) -> BigRational {
        match self.weights.get(key) {
            None => BigRational::zero(),
            Some(w) => BigRational::new(BigInt::from(w.clone()), BigInt::from(self.denominator.clone())),
        }
    }

    /// Keys with their exact probabilities, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<CycInt>, BigRational)> + '_ {
        let den = BigInt::from(self.denominator.clone());
        self.weights
            .iter()
            .map(move |(k, w)| (k, BigRational::new(BigInt::from(w.clone()), den.clone())))
    }

    pub fn total(&self) -> BigRational {
        let sum: BigUint = self.weights.values().sum();
        BigRational::new(BigInt::from(sum), BigInt::from(self.denominator.clone()))
    }

    pub fn entries(&self) -> Vec<DistributionEntry> {
        self.iter().map(|(k, p)| DistributionEntry { key: k.clone(), prob: p.to_string() }).collect()
    }

    /// Applies `ζ_r ↦ ζ_r^j` to every key component.
    pub fn conjugate(&self, j: u32) -> Result<JointSumDistribution> {
        let mut weights = BTreeMap::new();
        for (k, w) in &self.weights {
            let key = k.iter().map(|c| c.galois(j)).collect::<Result<Vec<_>>>()?;
            weights.insert(key, w.clone());
        }
        Ok(JointSumDistribution { weights, ..self.clone() })
    }

    /// Sums out every divisor not in `keep`.
    pub fn marginalize(&self, keep: &[u32]) -> Result<JointSumDistribution> {
        let positions = keep
            .iter()
            .map(|d| {
                self.divisors
                    .iter()
                    .position(|e| e == d)
                    .ok_or_else(|| Error::KeyspaceMismatch(format!("divisor {d} not in {:?}", self.divisors)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut weights: BTreeMap<Vec<CycInt>, BigUint> = BTreeMap::new();
        for (k, w) in &self.weights {
            let key = positions.iter().map(|&i| k[i].clone()).collect();
            *weights.entry(key).or_default() += w;
        }
        Ok(JointSumDistribution { divisors: keep.to_vec(), weights, ..self.clone() })
    }
}

/// Per-site law of the value tuple `(X_d)_{d ∈ divisors}` with integer weights.
pub fn site_values(site: &SiteDistribution, divisors: &[u32]) -> Result<BTreeMap<Vec<CycInt>, u64>> {
    let mut out: BTreeMap<Vec<CycInt>, u64> = BTreeMap::new();
    for atom in &site.atoms {
        let key = divisors.iter().map(|&d| site.value(atom, d)).collect::<Result<Vec<_>>>()?;
        *out.entry(key).or_default() += atom.weight;
    }
    Ok(out)
}

fn add_keys(a: &[CycInt], b: &[CycInt]) -> Vec<CycInt> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `n_sites`-fold convolution of the per-site value tuple; `max_keys` bounds
/// the support size.
pub fn convolve(site: &SiteDistribution, n_sites: u32, divisors: &[u32], max_keys: usize) -> Result<JointSumDistribution> {
    if n_sites == 0 {
        return Err(Error::DomainError("at least one site is required".into()));
    }
    for &d in divisors {
        check_divisor(site.r, d)?;
    }
    let step = site_values(site, divisors)?;
    let step: Vec<(Vec<CycInt>, BigUint)> = step.into_iter().map(|(k, w)| (k, BigUint::from(w))).collect();
    let mut current: BTreeMap<Vec<CycInt>, BigUint> = step.iter().cloned().collect();
    for _ in 1..n_sites {
        let entries: Vec<(&Vec<CycInt>, &BigUint)> = current.iter().collect();
        let chunk = entries.len().div_ceil(rayon::current_num_threads().max(1) * 4).max(1);
        let partials: Vec<BTreeMap<Vec<CycInt>, BigUint>> = entries
            .par_chunks(chunk)
            .map(|part| {
                let mut acc: BTreeMap<Vec<CycInt>, BigUint> = BTreeMap::new();
                for (k, w) in part {
                    for (sk, sw) in &step {
                        *acc.entry(add_keys(k, sk)).or_default() += *w * sw;
                    }
                }
                acc
            })
            .collect();
        let mut next: BTreeMap<Vec<CycInt>, BigUint> = BTreeMap::new();
        for part in partials {
            for (k, w) in part {
                *next.entry(k).or_default() += w;
            }
        }
        if next.len() > max_keys {
            return Err(Error::BudgetExceeded { size: next.len() as u128, budget: max_keys as u128 });
        }
        current = next;
    }
    Ok(JointSumDistribution {
        q: site.q,
        r: site.r,
        divisors: divisors.to_vec(),
        n_sites,
        denominator: BigUint::from(site.denominator()).pow(n_sites),
        weights: current,
    })
}
