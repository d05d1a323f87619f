//! Families of `r`-th-power-free polynomials `F = α f_1 f_2^2 ⋯ f_{r-1}^{r-1}`,
//! their sub-cover models `F_(d)`, twists, the value at infinity, exhaustive
//! enumeration of bracket families and uniform sampling.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldElem, PrimeField};
use crate::poly::{self, monic_count, MonicIter, Poly};

/// Degrees `(d_1, …, d_{r-1})` of the squarefree parts `f_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeTuple {
    r: u32,
    degrees: Vec<u32>,
}

impl DegreeTuple {
    pub fn new(r: u32, degrees: Vec<u32>) -> Result<Self> {
        if r < 2 {
            return Err(Error::DegenerateOrder(r));
        }
        if degrees.len() != r as usize - 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected {} degrees for r = {r}, got {}",
                r - 1,
                degrees.len()
            )));
        }
        let t = DegreeTuple { r, degrees };
        if t.total_weight() == 0 {
            return Err(Error::ShapeMismatch("degree tuple has total weight 0".into()));
        }
        Ok(t)
    }

    /// Parses `"2,1,0"`.
    pub fn parse(r: u32, s: &str) -> Result<Self> {
        let degrees = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(r, degrees)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// `Σ i·d_i`, the degree of `F`.
    pub fn total_weight(&self) -> u64 {
        weighted_degree(&self.degrees)
    }

    /// Whether `Σ i·d_i ≡ 0 (mod r)`, which makes the genus constant on the bracket family.
    pub fn is_admissible(&self) -> bool {
        self.total_weight().is_multiple_of(self.r as u64)
    }

    pub fn genus(&self) -> Result<i64> {
        genus(self.r, &self.degrees)
    }

    /// Smallest positive degree among the `d_i`.
    pub fn min_degree(&self) -> u32 {
        self.degrees.iter().copied().filter(|&d| d > 0).min().unwrap_or(0)
    }

    /// Degree vectors of the sub-families making up the bracket family,
    /// base first; a decremented slot of degree zero yields no sub-family.
    pub fn sub_families(&self) -> Vec<(Variant, Vec<u32>)> {
        let mut out = vec![(Variant::Base, self.degrees.clone())];
        for j in 1..self.r {
            let idx = j as usize - 1;
            if self.degrees[idx] > 0 {
                let mut d = self.degrees.clone();
                d[idx] -= 1;
                out.push((Variant::Decremented(j), d));
            }
        }
        out
    }
}

/// `Σ i·d_i` for a slot-indexed degree vector.
pub fn weighted_degree(degrees: &[u32]) -> u64 {
    degrees.iter().enumerate().map(|(i, &d)| (i as u64 + 1) * d as u64).sum()
}

/// Riemann–Hurwitz: `2g + 2r - 2 = Σ (r - (r,i)) d_i + (r - (r, Σ i d_i))`.
pub fn genus(r: u32, degrees: &[u32]) -> Result<i64> {
    let r64 = r as u64;
    let d = weighted_degree(degrees);
    let branch: u64 = degrees
        .iter()
        .enumerate()
        .map(|(i, &di)| (r64 - arith::gcd(r64, i as u64 + 1)) * di as u64)
        .sum();
    let infinity = r64 - arith::gcd(r64, d);
    let two_g = (branch + infinity) as i64 - 2 * r as i64 + 2;
    if two_g % 2 != 0 {
        return Err(Error::NonIntegralGenus(two_g));
    }
    if two_g < 0 {
        return Err(Error::NegativeGenus(two_g / 2));
    }
    Ok(two_g / 2)
}

/// Whether `Y^r = αF` is geometrically irreducible, i.e. the indices of the
/// nonconstant `f_i` generate `Z/r`. Only then is the genus formula meaningful.
pub fn is_geometrically_irreducible(r: u32, degrees: &[u32]) -> bool {
    let g = degrees
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0)
        .fold(r as u64, |acc, (i, _)| arith::gcd(acc, i as u64 + 1));
    g == 1
}

/// Sub-family provenance of a member of a bracket family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "dec")]
    Decremented(u32),
}

/// `α f_1 f_2^2 ⋯ f_{r-1}^{r-1}`; `polys[i]` is `f_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyMember {
    pub alpha: FieldElem,
    pub polys: Vec<Poly>,
    pub variant: Variant,
}

impl FamilyMember {
    pub fn new(alpha: FieldElem, polys: Vec<Poly>, variant: Variant) -> Self {
        FamilyMember { alpha, polys, variant }
    }

    /// Base member of conductor `r` with `f_slot = f` and all other factors 1.
    pub fn single(r: u32, alpha: FieldElem, slot: u32, f: Poly) -> Self {
        let mut polys = vec![Poly::one(); r as usize - 1];
        polys[slot as usize - 1] = f;
        FamilyMember::new(alpha, polys, Variant::Base)
    }

    pub fn r(&self) -> u32 {
        self.polys.len() as u32 + 1
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(|p| p.degree().unwrap_or(0) as u32).collect()
    }

    /// `deg F = Σ i·deg f_i`.
    pub fn weighted_degree(&self) -> u64 {
        weighted_degree(&self.degrees())
    }

    pub fn genus(&self) -> Result<i64> {
        genus(self.r(), &self.degrees())
    }

    /// Checks monic, squarefree, pairwise coprime and `α ≠ 0`.
    pub fn validate(&self, field: &PrimeField) -> Result<()> {
        if self.alpha.is_zero() || self.alpha.value() >= field.q() {
            return Err(Error::InvalidMember(format!("bad scalar {}", self.alpha.value())));
        }
        for (i, f) in self.polys.iter().enumerate() {
            if !f.is_monic() || !f.is_squarefree(field)? {
                return Err(Error::InvalidMember(format!("f_{} = {f} is not monic squarefree", i + 1)));
            }
            for g in &self.polys[..i] {
                if !f.is_coprime(field, g) {
                    return Err(Error::InvalidMember(format!("f_{} = {f} shares a factor with {g}", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// Checks the degree pattern against the tuple and variant tag.
    pub fn matches(&self, t: &DegreeTuple) -> bool {
        if self.r() != t.r() {
            return false;
        }
        let mut expected = t.degrees().to_vec();
        if let Variant::Decremented(j) = self.variant {
            match expected.get_mut(j as usize - 1) {
                Some(d) if *d > 0 => *d -= 1,
                _ => return false,
            }
        }
        self.degrees() == expected
    }

    /// The member's polynomial `F` (monic part, without `α`).
    pub fn full_poly(&self, field: &PrimeField) -> Poly {
        self.polys
            .iter()
            .enumerate()
            .fold(Poly::one(), |acc, (i, f)| acc.mul(field, &f.pow(field, i as u32 + 1)))
    }
}

fn check_divisor(r: u32, d: u32) -> Result<()> {
    if d == 0 || !r.is_multiple_of(d) {
        Err(Error::NotADivisor { d, r })
    } else {
        Ok(())
    }
}

/// `F_(d) = Π f_i^(i mod d)`, monic part only.
pub fn subfield_model(field: &PrimeField, mem: &FamilyMember, d: u32) -> Result<Poly> {
    check_divisor(mem.r(), d)?;
    Ok(mem
        .polys
        .iter()
        .enumerate()
        .fold(Poly::one(), |acc, (i, f)| acc.mul(field, &f.pow(field, (i as u32 + 1) % d))))
}

/// The model `F^(j) = α^j Π f_i^(ij mod r)`, realised by moving `f_i` to slot `ij mod r`.
pub fn twist(field: &PrimeField, mem: &FamilyMember, j: u32) -> Result<FamilyMember> {
    let r = mem.r();
    if arith::gcd(j as u64, r as u64) != 1 {
        return Err(Error::NotCoprime { j, r });
    }
    let mut polys = vec![Poly::one(); r as usize - 1];
    for (i, f) in mem.polys.iter().enumerate() {
        let slot = ((i as u64 + 1) * j as u64 % r as u64) as usize;
        polys[slot - 1] = f.clone();
    }
    let variant = match mem.variant {
        Variant::Base => Variant::Base,
        Variant::Decremented(k) => Variant::Decremented((k as u64 * j as u64 % r as u64) as u32),
    };
    Ok(FamilyMember { alpha: field.pow(mem.alpha, j as i64)?, polys, variant })
}

/// Value of the model `F_(d)` at the point at infinity.
///
/// Writing `Y^r = αF` in the chart at infinity, the unit part there is `α`
/// and the local exponent is `-deg F`; the `d`-level model is unramified at
/// infinity exactly when `d | deg F`. For a tuple with `Σ i d_i ≡ 0 (mod r)`
/// this means: the base member and every member of `F^(jd)`.
pub fn eval_at_infinity(mem: &FamilyMember, d: u32) -> Result<FieldElem> {
    check_divisor(mem.r(), d)?;
    Ok(if mem.weighted_degree().is_multiple_of(d as u64) { mem.alpha } else { FieldElem::ZERO })
}

/// Walks pairwise coprime tuples of monic squarefree polynomials with the
/// given slot degrees. One slot (the largest degree, first on ties) is
/// streamed by monic index so callers can split `outer_range` across workers;
/// the others come from precomputed lists.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    degrees: Vec<u32>,
    q: u32,
    outer: usize,
    inner_lists: Vec<Vec<Poly>>,
}

impl TupleSpace {
    pub fn new(field: &PrimeField, degrees: &[u32]) -> Self {
        let outer = degrees
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let inner_lists = degrees
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if i == outer {
                    Vec::new()
                } else {
                    poly::enumerate_monic_squarefree(field, d as usize).collect()
                }
            })
            .collect();
        TupleSpace { degrees: degrees.to_vec(), q: field.q(), outer, inner_lists }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Size of the index space of the streamed slot.
    pub fn outer_len(&self) -> u64 {
        if self.degrees.is_empty() {
            1
        } else {
            monic_count(self.q, self.degrees[self.outer] as usize)
        }
    }

    /// Calls `visit` with each valid tuple whose streamed slot index lies in `range`.
    pub fn visit<F: FnMut(&[Poly])>(&self, field: &PrimeField, range: Range<u64>, mut visit: F) {
        if self.degrees.is_empty() {
            if range.start == 0 && !range.is_empty() {
                visit(&[]);
            }
            return;
        }
        let n = self.degrees.len();
        let mut tuple = vec![Poly::one(); n];
        let order: Vec<usize> = (0..n).filter(|&i| i != self.outer).collect();
        let d_outer = self.degrees[self.outer] as usize;
        for f in MonicIter::range(self.q, d_outer, range.start, range.end) {
            if !f.is_squarefree(field).expect("monic") {
                continue;
            }
            tuple[self.outer] = f;
            self.fill(field, &order, 0, &mut tuple, &mut visit);
        }
    }

    fn fill<F: FnMut(&[Poly])>(
        &self,
        field: &PrimeField,
        order: &[usize],
        depth: usize,
        tuple: &mut Vec<Poly>,
        visit: &mut F,
    ) {
        if depth == order.len() {
            visit(tuple);
            return;
        }
        let slot = order[depth];
        for g in &self.inner_lists[slot] {
            let ok = g.degree() == Some(0)
                || (tuple[self.outer].is_coprime(field, g)
                    && order[..depth].iter().all(|&s| tuple[s].is_coprime(field, g)));
            if ok {
                tuple[slot] = g.clone();
                self.fill(field, order, depth + 1, tuple, visit);
            }
        }
        tuple[slot] = Poly::one();
    }
}

/// Exact number of pairwise coprime tuples of monic squarefree polynomials of
/// the given degrees, read off `Π_P (1 + Σ_i u_i^deg P)` degree by degree
/// using the irreducible counts. Independent of any enumeration.
pub fn tuple_count(q: u32, degrees: &[u32]) -> u128 {
    let n = degrees.len();
    let dims: Vec<usize> = degrees.iter().map(|&d| d as usize + 1).collect();
    let size: usize = dims.iter().product();
    let encode = |v: &[u32]| v.iter().zip(&dims).fold(0usize, |acc, (&x, &m)| acc * m + x as usize);
    let decode = |mut idx: usize| {
        let mut v = vec![0u32; n];
        for i in (0..n).rev() {
            v[i] = (idx % dims[i]) as u32;
            idx /= dims[i];
        }
        v
    };
    let mut dp = vec![0u128; size];
    dp[0] = 1;
    let max_deg = degrees.iter().copied().max().unwrap_or(0);
    for e in 1..=max_deg {
        let irr = poly::irreducible_count(q as u64, e) as u128;
        let mut next = vec![0u128; size];
        for (idx, &ways) in dp.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            let base = decode(idx);
            // distribute k_i irreducibles of degree e to slot i
            let caps: Vec<u32> = (0..n).map(|i| (degrees[i] - base[i]) / e).collect();
            let mut ks = vec![0u32; n];
            loop {
                let total: u32 = ks.iter().sum();
                if total as u128 <= irr {
                    // multinomial irr! / ((irr - K)! Π k_i!)
                    let mut mult = 1u128;
                    let mut avail = irr;
                    for &k in &ks {
                        mult = mult.checked_mul(binomial(avail, k as u128)).expect("count overflow");
                        avail -= k as u128;
                    }
                    let target: Vec<u32> = (0..n).map(|i| base[i] + ks[i] * e).collect();
                    let t = encode(&target);
                    next[t] = next[t].checked_add(ways.checked_mul(mult).expect("count overflow")).expect("count overflow");
                }
                // odometer over ks
                let mut i = 0;
                while i < n {
                    if ks[i] < caps[i] {
                        ks[i] += 1;
                        break;
                    }
                    ks[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        dp = next;
    }
    dp[encode(degrees)]
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.checked_mul(n - i).expect("binomial overflow") / (i + 1);
    }
    acc
}

/// `|F_[d…]|` (with `scalars`, `|hat F_[d…]|`).
pub fn bracket_size(q: u32, t: &DegreeTuple, scalars: bool) -> u128 {
    let n: u128 = t.sub_families().iter().map(|(_, d)| tuple_count(q, d)).sum();
    if scalars {
        n * (q as u128 - 1)
    } else {
        n
    }
}

/// Visits every member of the bracket family: base first, then
/// `Decremented(1)…Decremented(r-1)`; with `scalars`, each tuple is crossed
/// with every `α ∈ F_q^*` (innermost), otherwise `α = 1`.
pub fn for_each_bracket_member<F: FnMut(&FamilyMember)>(field: &PrimeField, t: &DegreeTuple, scalars: bool, mut visit: F) {
    for (variant, degrees) in t.sub_families() {
        let space = TupleSpace::new(field, &degrees);
        space.visit(field, 0..space.outer_len(), |polys| {
            let mut mem = FamilyMember::new(FieldElem::ONE, polys.to_vec(), variant);
            if scalars {
                for a in field.units() {
                    mem.alpha = a;
                    visit(&mem);
                }
            } else {
                visit(&mem);
            }
        });
    }
}

/// All members of the bracket family, collected; for desk-scale families.
pub fn enumerate_bracket(field: &PrimeField, t: &DegreeTuple, scalars: bool) -> Vec<FamilyMember> {
    let mut out = Vec::new();
    for_each_bracket_member(field, t, scalars, |m| out.push(m.clone()));
    out
}

/// Uniform sampler over `hat F_[d…]`.
#[derive(Clone, Debug)]
pub struct MemberSampler {
    tuple: DegreeTuple,
    subs: Vec<(Variant, Vec<u32>)>,
    cumulative: Vec<u128>,
    max_attempts: u64,
}

impl MemberSampler {
    pub fn new(field: &PrimeField, t: &DegreeTuple, max_attempts: u64) -> Result<Self> {
        let subs = t.sub_families();
        let mut cumulative = Vec::with_capacity(subs.len());
        let mut acc = 0u128;
        for (_, d) in &subs {
            acc += tuple_count(field.q(), d);
            cumulative.push(acc);
        }
        if acc == 0 {
            return Err(Error::EmptyFamily);
        }
        Ok(MemberSampler { tuple: t.clone(), subs, cumulative, max_attempts })
    }

    pub fn tuple(&self) -> &DegreeTuple {
        &self.tuple
    }

    /// Draws with `rng`: sub-family by exact cardinality, then rejection
    /// sampling of random monic tuples, then `α` uniform in `F_q^*`.
    pub fn sample<R: Rng>(&self, field: &PrimeField, rng: &mut R) -> Result<FamilyMember> {
        let total = *self.cumulative.last().expect("nonempty");
        let pick = rng.gen_range(0..total);
        let which = self.cumulative.iter().position(|&c| pick < c).expect("pick < total");
        let (variant, degrees) = &self.subs[which];
        let q = field.q();
        for _ in 0..self.max_attempts {
            let polys: Vec<Poly> = degrees
                .iter()
                .map(|&d| Poly::from_monic_index(q, d as usize, rng.gen_range(0..monic_count(q, d as usize))))
                .collect();
            let alpha = FieldElem(rng.gen_range(1..q));
            let mem = FamilyMember::new(alpha, polys, *variant);
            if mem.validate(field).is_ok() {
                return Ok(mem);
            }
        }
        Err(Error::RejectionBudgetExceeded(self.max_attempts))
    }

    /// The `index`-th draw of the stream identified by `seed`. Each draw has
    /// its own ChaCha stream, so results do not depend on scheduling.
    pub fn sample_indexed(&self, field: &PrimeField, seed: u64, index: u64) -> Result<FamilyMember> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.sample(field, &mut rng)
    }
}

/// One-shot convenience over [`MemberSampler`].
pub fn sample_member(field: &PrimeField, t: &DegreeTuple, seed: u64, max_attempts: u64) -> Result<FamilyMember> {
    MemberSampler::new(field, t, max_attempts)?.sample_indexed(field, seed, 0)
}

/// Index relabelling for `r = Π p_j^{t_j}`: `φ` identifies residue vectors
/// `(β_j mod p_j^{t_j})` with `[1, r-1]` (CRT) and `ψ` identifies base-`p_j`
/// digit vectors with residue vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtRelabel {
    r: u32,
    prime_powers: Vec<(u32, u32)>,
}

impl CrtRelabel {
    pub fn new(r: u32) -> Self {
        let prime_powers = arith::factorize(r as u64).into_iter().map(|(p, t)| (p as u32, t)).collect();
        CrtRelabel { r, prime_powers }
    }

    pub fn prime_powers(&self) -> &[(u32, u32)] {
        &self.prime_powers
    }

    /// `φ^{-1}`: index `i` to its residues modulo each `p_j^{t_j}`.
    pub fn residues(&self, i: u32) -> Vec<u32> {
        self.prime_powers.iter().map(|&(p, t)| i % p.pow(t)).collect()
    }

    /// `φ`: residues back to the index in `[0, r)`.
    pub fn from_residues(&self, residues: &[u32]) -> u32 {
        let r = self.r as i64;
        let mut acc = 0i64;
        for (&(p, t), &b) in self.prime_powers.iter().zip(residues) {
            let m = p.pow(t) as i64;
            let rest = r / m;
            let inv = arith::mod_inverse(rest, m).expect("coprime cofactors");
            acc += b as i64 * rest * inv;
        }
        acc.rem_euclid(r) as u32
    }

    /// `ψ^{-1}` after `φ^{-1}`: index to the flattened base-`p_j` digits.
    pub fn digits(&self, i: u32) -> Vec<u32> {
        let mut out = Vec::new();
        for (&(p, t), mut b) in self.prime_powers.iter().zip(self.residues(i)) {
            for _ in 0..t {
                out.push(b % p);
                b /= p;
            }
        }
        out
    }

    /// `φ ∘ ψ`: digits back to the index.
    pub fn from_digits(&self, digits: &[u32]) -> u32 {
        let mut residues = Vec::with_capacity(self.prime_powers.len());
        let mut pos = 0;
        for &(p, t) in &self.prime_powers {
            let mut b = 0;
            for k in (0..t as usize).rev() {
                b = b * p + digits[pos + k];
            }
            residues.push(b);
            pos += t as usize;
        }
        self.from_residues(&residues)
    }

    /// The table `i ↦ (residues, digits)` for `1 <= i < r`.
    pub fn table(&self) -> BTreeMap<u32, (Vec<u32>, Vec<u32>)> {
        (1..self.r).map(|i| (i, (self.residues(i), self.digits(i)))).collect()
    }
}

pub fn crt_relabel(r: u32) -> CrtRelabel {
    CrtRelabel::new(r)
}
