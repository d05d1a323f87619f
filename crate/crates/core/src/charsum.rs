//! Multiplicative characters of `F_q^*`, the complete sums `S_d` over
//! `P^1(F_q)`, the divisor-indexed point-count formula and an independent
//! point counter that uses only local root counting.

use crate::arith;
use crate::cyclotomic::{root_of_unity, CycInt};
use crate::error::{Error, Result};
use crate::family::{eval_at_infinity, subfield_model, FamilyMember};
use crate::field::{FieldElem, PrimeField};
use crate::poly::Poly;

/// The order-`d` character `χ_d(g^k) = ζ_d^k`, valued in `Z[ζ_m]` with
/// `m = r` when `d | r` and `m = d` otherwise.
#[derive(Clone, Debug)]
pub struct Character {
    d: u32,
    conductor: u32,
    values: Vec<CycInt>,
}

impl Character {
    pub fn order(&self) -> u32 {
        self.d
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// `χ(a)`, with `χ(0) = 0`.
    pub fn value(&self, a: FieldElem) -> &CycInt {
        &self.values[a.value() as usize]
    }
}

pub fn char_of_order(field: &PrimeField, d: u32) -> Result<Character> {
    let q_minus_one = field.q() - 1;
    if d == 0 || !q_minus_one.is_multiple_of(d) {
        return Err(Error::OrderNotDividing { d, q_minus_one: q_minus_one as u64 });
    }
    let conductor = if field.r().is_multiple_of(d) { field.r() } else { d };
    let step = (conductor / d) as i64;
    let values = field
        .elements()
        .map(|a| match field.dlog(a) {
            None => CycInt::zero(conductor),
            Some(k) => root_of_unity(conductor, step * (k % d) as i64),
        })
        .collect();
    Ok(Character { d, conductor, values })
}

fn check_divisor(r: u32, d: u32) -> Result<()> {
    if d == 0 || !r.is_multiple_of(d) {
        Err(Error::NotADivisor { d, r })
    } else {
        Ok(())
    }
}

fn divisors_above_one(r: u32) -> Vec<u32> {
    arith::divisors(r as u64).into_iter().skip(1).map(|d| d as u32).collect()
}

/// `Σ_{x∈P^1} χ_d^i(α F_(d)(x))`, with the point at infinity contributing
/// `χ_d^i` of the value at infinity.
pub fn sum_s_d_power(field: &PrimeField, mem: &FamilyMember, d: u32, i: u32) -> Result<CycInt> {
    check_divisor(mem.r(), d)?;
    let chi = char_of_order(field, d)?;
    let model = subfield_model(field, mem, d)?;
    let mut total = CycInt::zero(chi.conductor());
    for x in field.elements() {
        let v = field.mul(mem.alpha, model.eval(field, x));
        if !v.is_zero() {
            total = &total + &chi.value(v).pow(i);
        }
    }
    let inf = eval_at_infinity(mem, d)?;
    if !inf.is_zero() {
        total = &total + &chi.value(inf).pow(i);
    }
    Ok(total)
}

/// `S_d(F_(d))`.
pub fn sum_s_d(field: &PrimeField, mem: &FamilyMember, d: u32) -> Result<CycInt> {
    sum_s_d_power(field, mem, d, 1)
}

/// `q + 1 + Σ_{d|r, d>1} Σ_{(i,d)=1} Σ_{x∈P^1} χ_d^i(α F_(d)(x))`.
pub fn point_count_formula(field: &PrimeField, mem: &FamilyMember) -> Result<i64> {
    let r = mem.r();
    let mut total = CycInt::from_int(r, field.q() as i64 + 1);
    for d in divisors_above_one(r) {
        for i in (1..d).filter(|&i| arith::gcd(i as u64, d as u64) == 1) {
            total = &total + &sum_s_d_power(field, mem, d, i)?;
        }
    }
    total.as_integer().ok_or_else(|| Error::NonIntegralCount(total.to_string()))
}

/// `#{y ∈ F_q : y^e = a}` for every `a`, by running over all `y`.
#[derive(Clone, Debug)]
pub struct RootCounts {
    tables: Vec<Vec<u32>>,
}

impl RootCounts {
    pub fn new(field: &PrimeField, max_e: u32) -> Self {
        let tables = (0..=max_e)
            .map(|e| {
                let mut t = vec![0u32; field.q() as usize];
                if e > 0 {
                    for y in field.elements() {
                        t[field.pow(y, e as i64).expect("e > 0").value() as usize] += 1;
                    }
                }
                t
            })
            .collect();
        RootCounts { tables }
    }

    #[inline]
    pub fn count(&self, e: u32, a: FieldElem) -> u32 {
        self.tables[e as usize][a.value() as usize]
    }
}

/// Local data at a finite point: the ramification gcd `e` and the unit part
/// of `F` at `x` (without `α`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalFibre {
    pub e: u32,
    pub unit: FieldElem,
}

/// Strips the root `x` from `f` by synthetic division and evaluates the quotient at `x`.
fn deflated_value(field: &PrimeField, f: &Poly, x: FieldElem) -> FieldElem {
    let c = f.coeffs();
    let n = c.len();
    // quotient coefficients from the top down
    let mut acc = FieldElem::ZERO;
    let mut quotient = vec![FieldElem::ZERO; n - 1];
    for k in (1..n).rev() {
        acc = field.add(field.mul(acc, x), c[k]);
        quotient[k - 1] = acc;
    }
    Poly::from_coeffs(quotient).eval(field, x)
}

/// Ramification gcd and unit part of the member at the finite point `x`.
pub fn local_fibre(field: &PrimeField, mem: &FamilyMember, x: FieldElem) -> Result<LocalFibre> {
    let r = mem.r();
    let values: Vec<FieldElem> = mem.polys.iter().map(|f| f.eval(field, x)).collect();
    let vanishing: Vec<usize> = (0..values.len()).filter(|&k| values[k].is_zero()).collect();
    if vanishing.len() > 1 {
        return Err(Error::InvalidMember(format!(
            "f_{} and f_{} share the root {}",
            vanishing[0] + 1,
            vanishing[1] + 1,
            x.value()
        )));
    }
    let mut unit = FieldElem::ONE;
    for (k, f) in mem.polys.iter().enumerate() {
        let v = if values[k].is_zero() { deflated_value(field, f, x) } else { values[k] };
        unit = field.mul(unit, field.pow(v, k as i64 + 1)?);
    }
    let e = match vanishing.first() {
        None => r,
        Some(&k) => arith::gcd(r as u64, k as u64 + 1) as u32,
    };
    Ok(LocalFibre { e, unit })
}

/// Points above infinity come from `w^e = α` with `e = gcd(r, deg F)`.
pub fn infinity_gcd(mem: &FamilyMember) -> u32 {
    arith::gcd(mem.r() as u64, mem.weighted_degree()) as u32
}

/// Point count by local root counting: above a finite `x` with ramification
/// gcd `e` and unit part `u`, the smooth model has `#{w : w^e = α u}` points.
pub fn point_count_oracle(field: &PrimeField, mem: &FamilyMember) -> Result<i64> {
    let roots = RootCounts::new(field, mem.r());
    point_count_oracle_with(field, &roots, mem)
}

pub fn point_count_oracle_with(field: &PrimeField, roots: &RootCounts, mem: &FamilyMember) -> Result<i64> {
    let mut total = roots.count(infinity_gcd(mem), mem.alpha) as i64;
    for x in field.elements() {
        let fib = local_fibre(field, mem, x)?;
        total += roots.count(fib.e, field.mul(mem.alpha, fib.unit)) as i64;
    }
    Ok(total)
}

/// Per-`(q, r)` tables shared by all tuple profiles.
#[derive(Clone, Debug)]
pub struct CountContext {
    field: PrimeField,
    r: u32,
    divisors: Vec<u32>,
    roots: RootCounts,
    zeta: Vec<CycInt>,
}

impl CountContext {
    pub fn new(field: &PrimeField) -> Self {
        let r = field.r();
        CountContext {
            field: field.clone(),
            r,
            divisors: divisors_above_one(r),
            roots: RootCounts::new(field, r),
            zeta: (0..r).map(|k| root_of_unity(r, k as i64)).collect(),
        }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    /// Divisors `d > 1` of `r`, increasing.
    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn roots(&self) -> &RootCounts {
        &self.roots
    }

    /// Everything about a polynomial tuple that does not depend on `α`.
    pub fn profile(&self, polys: &[Poly]) -> Result<TupleProfile> {
        let field = &self.field;
        let r = self.r;
        let q = field.q() as usize;
        let mut values = vec![vec![FieldElem::ZERO; q]; polys.len()];
        for (k, f) in polys.iter().enumerate() {
            for x in 0..q {
                values[k][x] = f.eval(field, FieldElem(x as u32));
            }
        }
        let weighted: u64 = polys
            .iter()
            .enumerate()
            .map(|(k, f)| (k as u64 + 1) * f.degree().unwrap_or(0) as u64)
            .sum();

        // exponent classes of F_(d)(x) for the formula
        let mut hist = Vec::with_capacity(self.divisors.len());
        let mut zero_mask = vec![0u64; q];
        for (pos, &d) in self.divisors.iter().enumerate() {
            let mut h = vec![0u32; d as usize];
            for x in 0..q {
                let mut k_total = 0u64;
                let mut zero = false;
                for (k, row) in values.iter().enumerate() {
                    let exp = (k as u32 + 1) % d;
                    if exp == 0 {
                        continue;
                    }
                    match field.dlog(row[x]) {
                        None => {
                            zero = true;
                            break;
                        }
                        Some(l) => k_total += l as u64 * exp as u64,
                    }
                }
                if zero {
                    zero_mask[x] |= 1 << pos;
                } else {
                    h[(k_total % d as u64) as usize] += 1;
                }
            }
            hist.push(h);
        }

        // local fibres for the oracle
        let mut fibres = Vec::with_capacity(q);
        for x in 0..q {
            let mut vanishing = None;
            let mut unit = FieldElem::ONE;
            for (k, f) in polys.iter().enumerate() {
                let mut v = values[k][x];
                if v.is_zero() {
                    if vanishing.is_some() {
                        return Err(Error::InvalidMember(format!("two factors vanish at {x}")));
                    }
                    vanishing = Some(k);
                    v = deflated_value(field, f, FieldElem(x as u32));
                }
                unit = field.mul(unit, field.pow(v, k as i64 + 1)?);
            }
            let e = match vanishing {
                None => r,
                Some(k) => arith::gcd(r as u64, k as u64 + 1) as u32,
            };
            fibres.push(LocalFibre { e, unit });
        }

        let mut profile = TupleProfile {
            weighted_degree: weighted,
            hist,
            zero_mask,
            fibres,
            cache: Vec::new(),
        };
        profile.cache = self.shift_tables(&profile)?;
        Ok(profile)
    }

    /// For each divisor and each class `s` of `dlog α mod d`: `S_d` and the
    /// divisor's contribution `Σ_{(i,d)=1} Σ_x χ_d^i(·)` to the point count.
    fn shift_tables(&self, p: &TupleProfile) -> Result<Vec<Vec<(CycInt, i64)>>> {
        let r = self.r;
        let mut out = Vec::with_capacity(self.divisors.len());
        for (pos, &d) in self.divisors.iter().enumerate() {
            let step = r / d;
            let at_infinity = p.weighted_degree.is_multiple_of(d as u64);
            let mut per_shift = Vec::with_capacity(d as usize);
            for s in 0..d {
                let mut sums = Vec::new();
                let mut contribution = CycInt::zero(r);
                for i in (1..d).filter(|&i| arith::gcd(i as u64, d as u64) == 1) {
                    let mut acc = CycInt::zero(r);
                    for (k, &count) in p.hist[pos].iter().enumerate() {
                        if count > 0 {
                            let idx = (i * (k as u32 + s) % d) * step;
                            acc.add_scaled(&self.zeta[idx as usize], count as i64);
                        }
                    }
                    if at_infinity {
                        let idx = (i * s % d) * step;
                        acc.add_scaled(&self.zeta[idx as usize], 1);
                    }
                    contribution = &contribution + &acc;
                    sums.push(acc);
                }
                let c = contribution
                    .as_integer()
                    .ok_or_else(|| Error::NonIntegralCount(contribution.to_string()))?;
                per_shift.push((sums.swap_remove(0), c));
            }
            out.push(per_shift);
        }
        Ok(out)
    }
}

/// The `α`-independent part of a family member: exponent histograms of
/// every `F_(d)` on `F_q`, zero patterns, local fibres and `deg F`.
#[derive(Clone, Debug)]
pub struct TupleProfile {
    weighted_degree: u64,
    hist: Vec<Vec<u32>>,
    /// bit `pos` set when `F_(d)(x) = 0` for the `pos`-th divisor
    zero_mask: Vec<u64>,
    fibres: Vec<LocalFibre>,
    cache: Vec<Vec<(CycInt, i64)>>,
}

impl TupleProfile {
    pub fn weighted_degree(&self) -> u64 {
        self.weighted_degree
    }

    /// `S_d` for the divisor at position `pos` of [`CountContext::divisors`].
    pub fn sum_s(&self, ctx: &CountContext, pos: usize, alpha: FieldElem) -> &CycInt {
        let d = ctx.divisors[pos];
        let s = ctx.field.dlog(alpha).expect("α ≠ 0") % d;
        &self.cache[pos][s as usize].0
    }

    /// The point-count formula evaluated through the cached class sums.
    pub fn formula_count(&self, ctx: &CountContext, alpha: FieldElem) -> i64 {
        let k = ctx.field.dlog(alpha).expect("α ≠ 0");
        let mut total = ctx.field.q() as i64 + 1;
        for (pos, &d) in ctx.divisors.iter().enumerate() {
            total += self.cache[pos][(k % d) as usize].1;
        }
        total
    }

    /// The local root-counting oracle.
    pub fn oracle_count(&self, ctx: &CountContext, alpha: FieldElem) -> i64 {
        let field = &ctx.field;
        let e_inf = arith::gcd(ctx.r as u64, self.weighted_degree) as u32;
        let mut total = ctx.roots.count(e_inf, alpha) as i64;
        for fib in &self.fibres {
            total += ctx.roots.count(fib.e, field.mul(alpha, fib.unit)) as i64;
        }
        total
    }

    /// Zero pattern of the models at the finite point `x`.
    pub fn zero_mask(&self, x: usize) -> u64 {
        self.zero_mask[x]
    }

    /// Zero pattern of the models at infinity.
    pub fn zero_mask_at_infinity(&self, ctx: &CountContext) -> u64 {
        ctx.divisors
            .iter()
            .enumerate()
            .filter(|(_, &d)| !self.weighted_degree.is_multiple_of(d as u64))
            .fold(0, |m, (pos, _)| m | 1 << pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{enumerate_bracket, genus, is_geometrically_irreducible, twist, DegreeTuple, Variant};

    fn fld(q: u64, r: u32) -> PrimeField {
        PrimeField::new(q, r).unwrap()
    }

    #[test]
    fn character_examples() {
        let f5 = fld(5, 2);
        let chi = char_of_order(&f5, 2).unwrap();
        for (a, v) in [(1, 1), (4, 1), (2, -1), (3, -1), (0, 0)] {
            assert_eq!(chi.value(FieldElem(a)).as_integer(), Some(v), "a = {a}");
        }
        let f7 = fld(7, 3);
        let chi3 = char_of_order(&f7, 3).unwrap();
        assert_eq!(chi3.value(FieldElem(6)).as_integer(), Some(1));
        assert_eq!(chi3.value(FieldElem(1)), &CycInt::one(3));
        assert!(matches!(char_of_order(&f7, 4), Err(Error::OrderNotDividing { .. })));
    }

    #[test]
    fn characters_are_multiplicative_of_exact_order() {
        for (q, r) in [(7u64, 6u32), (13, 4), (13, 12), (31, 6)] {
            let f = fld(q, r);
            for d in arith::divisors(q - 1) {
                let chi = char_of_order(&f, d as u32).unwrap();
                for a in f.units() {
                    for b in f.units() {
                        assert_eq!(chi.value(f.mul(a, b)), &(chi.value(a) * chi.value(b)));
                    }
                }
                let g = f.generator();
                assert_eq!(chi.value(g).pow(d as u32), CycInt::one(chi.conductor()));
                for k in 1..d as u32 {
                    assert_ne!(chi.value(g).pow(k), CycInt::one(chi.conductor()));
                }
            }
        }
    }

    #[test]
    fn sum_examples() {
        let f = fld(5, 2);
        let x = Poly::from_ints(&f, &[0, 1]);
        let m = FamilyMember::single(2, FieldElem::ONE, 1, x);
        assert_eq!(sum_s_d(&f, &m, 2).unwrap().as_integer(), Some(0));
        assert_eq!(point_count_formula(&f, &m).unwrap(), 6);
        assert_eq!(point_count_oracle(&f, &m).unwrap(), 6);

        // y^2 = x^2 + 1: the affine sum is -1 and the two rational points at
        // infinity bring the total to 0, giving the 6 points of a conic
        let p = Poly::from_ints(&f, &[1, 0, 1]);
        let m = FamilyMember::single(2, FieldElem::ONE, 1, p.clone());
        let chi = char_of_order(&f, 2).unwrap();
        let affine: i64 = f.elements().map(|x| chi.value(p.eval(&f, x)).as_integer().unwrap()).sum();
        assert_eq!(affine, -1);
        assert_eq!(sum_s_d(&f, &m, 2).unwrap().as_integer(), Some(0));
        assert_eq!(point_count_formula(&f, &m).unwrap(), 6);
        // direct (x, y) enumeration plus the two points at infinity
        let affine_points = f
            .elements()
            .flat_map(|x| f.elements().map(move |y| (x, y)))
            .filter(|&(x, y)| f.mul(y, y) == p.eval(&f, x))
            .count() as i64;
        assert_eq!(affine_points + 2, 6);
        assert_eq!(point_count_oracle(&f, &m).unwrap(), 6);
        assert!(sum_s_d(&f, &m, 3).is_err());
    }

    #[test]
    fn pure_cubic_formula_matches_oracle() {
        let f = fld(7, 3);
        let cubic = Poly::from_ints(&f, &[-2, 0, 0, 1]);
        for a in f.units() {
            let m = FamilyMember::single(3, a, 1, cubic.clone());
            assert_eq!(point_count_formula(&f, &m).unwrap(), point_count_oracle(&f, &m).unwrap());
        }
    }

    #[test]
    fn ramified_fibre_over_square_factor() {
        // r = 4, only f_2 = x: above x = 0 the fibre is y^2 = α F_(2)(0)-type
        let f = fld(5, 4);
        let m = FamilyMember::single(4, FieldElem(2), 2, Poly::from_ints(&f, &[0, 1]));
        let fib = local_fibre(&f, &m, FieldElem::ZERO).unwrap();
        assert_eq!(fib.e, 2);
        assert_eq!(fib.unit, FieldElem::ONE);
        assert_eq!(point_count_formula(&f, &m).unwrap(), point_count_oracle(&f, &m).unwrap());
    }

    #[test]
    fn oracle_rejects_shared_roots() {
        let f = fld(5, 4);
        let x = Poly::from_ints(&f, &[0, 1]);
        let m = FamilyMember::new(FieldElem::ONE, vec![x.clone(), x, Poly::one()], Variant::Base);
        assert!(matches!(point_count_oracle(&f, &m), Err(Error::InvalidMember(_))));
    }

    fn tuples_with_degree_sum(r: u32, max_sum: u32) -> Vec<DegreeTuple> {
        let n = r as usize - 1;
        let mut out = Vec::new();
        let mut v = vec![0u32; n];
        loop {
            if v.iter().sum::<u32>() <= max_sum {
                if let Ok(t) = DegreeTuple::new(r, v.clone()) {
                    out.push(t);
                }
            }
            let mut i = 0;
            while i < n {
                v[i] += 1;
                if v[i] <= max_sum {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        out
    }

    fn check_all(q: u64, r: u32, max_sum: u32, stride: usize) {
        let f = fld(q, r);
        let ctx = CountContext::new(&f);
        let roots = RootCounts::new(&f, r);
        for t in tuples_with_degree_sum(r, max_sum) {
            let members = enumerate_bracket(&f, &t, true);
            for (n, mem) in members.iter().enumerate() {
                let profile = ctx.profile(&mem.polys).unwrap();
                let fast = profile.formula_count(&ctx, mem.alpha);
                let fast_oracle = profile.oracle_count(&ctx, mem.alpha);
                assert_eq!(fast, fast_oracle, "q={q} r={r} {mem:?}");
                if n % stride == 0 {
                    let slow = point_count_formula(&f, mem).unwrap();
                    let slow_oracle = point_count_oracle_with(&f, &roots, mem).unwrap();
                    assert_eq!(slow, fast, "q={q} r={r} {mem:?}");
                    assert_eq!(slow_oracle, fast_oracle, "q={q} r={r} {mem:?}");
                    for (pos, &d) in ctx.divisors().iter().enumerate() {
                        assert_eq!(profile.sum_s(&ctx, pos, mem.alpha), &sum_s_d(&f, mem, d).unwrap());
                    }
                }
                let degrees = mem.degrees();
                if is_geometrically_irreducible(r, &degrees) {
                    let g = genus(r, &degrees).unwrap();
                    let dev = (fast - q as i64 - 1).abs();
                    assert!((dev * dev) as f64 <= 4.0 * (g * g) as f64 * q as f64 + 1e-9, "{mem:?}");
                }
            }
        }
    }

    #[test]
    fn formula_equals_oracle_q5_r2() {
        check_all(5, 2, 4, 1);
    }

    #[test]
    fn formula_equals_oracle_q5_r4() {
        check_all(5, 4, 4, 3);
    }

    #[test]
    fn formula_equals_oracle_q7_r3() {
        check_all(7, 3, 4, 3);
    }

    #[test]
    fn formula_equals_oracle_q7_r6() {
        check_all(7, 6, 4, 7);
    }

    #[test]
    fn conjugate_sums_cancel() {
        let f = fld(13, 12);
        let t = DegreeTuple::new(12, vec![1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]).unwrap();
        for mem in enumerate_bracket(&f, &t, true).iter().step_by(97) {
            for d in divisors_above_one(12) {
                let mut total = CycInt::zero(12);
                for i in (1..d).filter(|&i| arith::gcd(i as u64, d as u64) == 1) {
                    total = &total + &sum_s_d_power(&f, mem, d, i).unwrap();
                }
                assert!(total.coeffs()[1..].iter().all(|&c| c == 0), "{total}");
            }
        }
    }

    #[test]
    fn twisting_preserves_the_count() {
        let f = fld(5, 4);
        for t in tuples_with_degree_sum(4, 3) {
            for mem in enumerate_bracket(&f, &t, true).iter().step_by(3) {
                let n = point_count_formula(&f, mem).unwrap();
                for j in [1u32, 3] {
                    assert_eq!(point_count_formula(&f, &twist(&f, mem, j).unwrap()).unwrap(), n);
                }
            }
        }
    }

    #[test]
    fn zeros_of_the_full_model_are_zeros_of_prime_power_models() {
        for (q, r) in [(7u64, 6u32), (13, 12), (5, 4)] {
            let f = fld(q, r);
            let prime_powers: Vec<u32> = arith::factorize(r as u64)
                .into_iter()
                .map(|(p, t)| p.pow(t) as u32)
                .collect();
            let n = r as usize - 1;
            let mut degrees = vec![0u32; n];
            degrees[0] = 1;
            degrees[n - 1] = 1;
            if n > 2 {
                degrees[1] = 1;
            }
            let t = DegreeTuple::new(r, degrees).unwrap();
            for mem in enumerate_bracket(&f, &t, false) {
                let full = mem.full_poly(&f);
                let models: Vec<Poly> = prime_powers.iter().map(|&d| subfield_model(&f, &mem, d).unwrap()).collect();
                for x in f.elements() {
                    let full_zero = full.eval(&f, x).is_zero();
                    let some_model_zero = models.iter().any(|m| m.eval(&f, x).is_zero());
                    assert_eq!(full_zero, some_model_zero);
                }
            }
        }
    }

    #[test]
    fn sums_lie_in_the_triangle_bound() {
        let f = fld(7, 6);
        let t = DegreeTuple::new(6, vec![1, 1, 0, 0, 0]).unwrap();
        let ctx = CountContext::new(&f);
        for mem in enumerate_bracket(&f, &t, true) {
            let p = ctx.profile(&mem.polys).unwrap();
            for (pos, _) in ctx.divisors().iter().enumerate() {
                let s = p.sum_s(&ctx, pos, mem.alpha);
                let (re, im) = s.to_complex();
                assert!((re * re + im * im).sqrt() <= 8.0 + 1e-9);
            }
        }
    }
}
