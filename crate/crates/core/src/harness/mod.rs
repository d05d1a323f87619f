//! Experiment orchestration behind the command-line tool.
//!
//! Work is split into a fixed number of chunks per sub-family, independent
//! of the worker count, and partial tallies are merged in chunk order, so
//! reports are byte-identical for any number of workers.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith;
use crate::asymptotics::{self, Constraint, EulerConstants};
use crate::charsum::{CountContext, TupleProfile};
use crate::cyclotomic::CycInt;
use crate::dist;
use crate::error::{Error, Result};
use crate::family::{self, bracket_size, DegreeTuple, MemberSampler, TupleSpace};
use crate::field::{FieldElem, PrimeField};

pub use config::{ExperimentConfig, Format, Mode, PartialConfig};
pub use report::{
    AsymptoticReport, AsymptoticRow, ComparisonReport, ComparisonRow, CountReport, CountRow, DistributionKind,
    DistributionReport, DistributionRow, HeuristicReport, HeuristicRow, Report,
};

/// Chunks per sub-family for exhaustive sweeps.
const CHUNKS: u64 = 64;
/// Draws per chunk in Monte Carlo mode.
const SAMPLE_CHUNK: u64 = 1024;
/// Two-sided 95% normal quantile for Wilson intervals.
const WILSON_Z: f64 = 1.959963984540054;

/// Exit status of a finished command: 0 pass, 1 mismatch, 2 usage or budget.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ShapeMismatch(_)
        | Error::NormalizationFailure(_)
        | Error::MarginalMismatch(_)
        | Error::ConditionalMismatch(_)
        | Error::KeyspaceMismatch(_)
        | Error::NonIntegralCount(_) => 1,
        _ => 2,
    }
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::DomainError(e.to_string()))?;
    Ok(pool.install(job))
}

fn field_of(cfg: &ExperimentConfig) -> Result<PrimeField> {
    cfg.check_field()?;
    PrimeField::new(cfg.q as u64, cfg.r)
}

fn chunk_ranges(len: u64) -> Vec<Range<u64>> {
    let step = len.div_ceil(CHUNKS).max(1);
    (0..len).step_by(step as usize).map(|s| s..(s + step).min(len)).collect()
}

fn ratio_string(num: u64, den: u64) -> String {
    BigRational::new(BigInt::from(num), BigInt::from(den)).to_string()
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Positions of the requested divisors inside [`CountContext::divisors`] and
/// the pairs `(a, b)` of requested positions with `d_a | d_b`, `a ≠ b`.
struct DivisorPlan {
    divisors: Vec<u32>,
    positions: Vec<usize>,
    chains: Vec<(usize, usize)>,
}

impl DivisorPlan {
    fn new(ctx: &CountContext, divisors: Vec<u32>) -> Result<Self> {
        let positions = divisors
            .iter()
            .map(|d| {
                ctx.divisors()
                    .iter()
                    .position(|e| e == d)
                    .ok_or(Error::NotADivisor { d: *d, r: ctx.field().r() })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut chains = Vec::new();
        for (a, &da) in divisors.iter().enumerate() {
            for (b, &db) in divisors.iter().enumerate() {
                if a != b && db % da == 0 {
                    chains.push((positions[a], positions[b]));
                }
            }
        }
        Ok(DivisorPlan { divisors, positions, chains })
    }

    fn key(&self, ctx: &CountContext, p: &TupleProfile, alpha: FieldElem) -> Vec<CycInt> {
        self.positions.iter().map(|&pos| p.sum_s(ctx, pos, alpha).clone()).collect()
    }

    /// Whether some point of `P^1` has a lower model vanishing while a
    /// higher one does not.
    fn violates(&self, ctx: &CountContext, p: &TupleProfile) -> bool {
        let bad = |mask: u64| self.chains.iter().any(|&(a, b)| mask >> a & 1 == 1 && mask >> b & 1 == 0);
        bad(p.zero_mask_at_infinity(ctx)) || (0..ctx.field().q() as usize).any(|x| bad(p.zero_mask(x)))
    }
}

#[derive(Default)]
struct Tally {
    counts: BTreeMap<Vec<CycInt>, u64>,
    members: u64,
    violations: u64,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        for (k, n) in other.counts {
            *self.counts.entry(k).or_default() += n;
        }
        self.members += other.members;
        self.violations += other.violations;
    }
}

/// Empirical law of `(S_d)_{d ∈ divisors}` over `hat F_[d…]`.
pub fn run_empirical(cfg: &ExperimentConfig) -> Result<DistributionReport> {
    let field = field_of(cfg)?;
    let t = cfg.tuple()?;
    let expected = bracket_size(cfg.q, &t, true);
    if expected == 0 {
        return Err(Error::EmptyFamily);
    }
    let ctx = CountContext::new(&field);
    let plan = DivisorPlan::new(&ctx, cfg.divisor_list()?)?;
    let (tally, expected_family_size) = match cfg.mode {
        Mode::Exhaustive => {
            if expected > cfg.budget as u128 {
                return Err(Error::BudgetExceeded { size: expected, budget: cfg.budget as u128 });
            }
            let tally = with_pool(cfg.workers, || exhaustive_tally(&field, &ctx, &plan, &t))??;
            (tally, Some(expected as u64))
        }
        Mode::Montecarlo => {
            if cfg.samples > cfg.budget {
                return Err(Error::BudgetExceeded { size: cfg.samples as u128, budget: cfg.budget as u128 });
            }
            let tally = with_pool(cfg.workers, || sampled_tally(cfg, &field, &ctx, &plan, &t))??;
            (tally, None)
        }
    };
    let n = tally.members;
    let rows = tally
        .counts
        .into_iter()
        .map(|(key, k)| {
            let (lo, hi) = match cfg.mode {
                Mode::Montecarlo => {
                    let (lo, hi) = wilson_interval(k, n);
                    (Some(lo), Some(hi))
                }
                Mode::Exhaustive => (None, None),
            };
            DistributionRow { key, prob: ratio_string(k, n), count: Some(k), wilson_low: lo, wilson_high: hi }
        })
        .collect();
    Ok(DistributionReport {
        kind: DistributionKind::Empirical,
        config: cfg.clone(),
        q: cfg.q,
        r: cfg.r,
        divisors: plan.divisors,
        size: n,
        expected_family_size,
        min_degree: Some(t.min_degree()),
        zero_propagation_violations: Some(tally.violations),
        rows,
    })
}

fn exhaustive_tally(field: &PrimeField, ctx: &CountContext, plan: &DivisorPlan, t: &DegreeTuple) -> Result<Tally> {
    let r = field.r();
    // keys depend on α only through dlog α mod r
    let per_class = (field.q() as u64 - 1) / r as u64;
    let alphas: Vec<FieldElem> = (0..r as u64).map(|c| field.gen_pow(c)).collect();
    let mut tasks = Vec::new();
    for (_, degrees) in t.sub_families() {
        let space = TupleSpace::new(field, &degrees);
        for range in chunk_ranges(space.outer_len()) {
            tasks.push((space.clone(), range));
        }
    }
    let partials: Vec<Result<Tally>> = tasks
        .par_iter()
        .map(|(space, range)| {
            let mut tally = Tally::default();
            let mut err = None;
            space.visit(field, range.clone(), |polys| {
                if err.is_some() {
                    return;
                }
                match ctx.profile(polys) {
                    Err(e) => err = Some(e),
                    Ok(p) => {
                        for &a in &alphas {
                            *tally.counts.entry(plan.key(ctx, &p, a)).or_default() += per_class;
                        }
                        tally.members += per_class * r as u64;
                        if plan.violates(ctx, &p) {
                            tally.violations += per_class * r as u64;
                        }
                    }
                }
            });
            err.map_or(Ok(tally), Err)
        })
        .collect();
    let mut total = Tally::default();
    for part in partials {
        total.merge(part?);
    }
    Ok(total)
}

fn sampled_tally(
    cfg: &ExperimentConfig,
    field: &PrimeField,
    ctx: &CountContext,
    plan: &DivisorPlan,
    t: &DegreeTuple,
) -> Result<Tally> {
    let sampler = MemberSampler::new(field, t, cfg.max_attempts)?;
    let starts: Vec<u64> = (0..cfg.samples).step_by(SAMPLE_CHUNK as usize).collect();
    let partials: Vec<Result<Tally>> = starts
        .par_iter()
        .map(|&start| {
            let mut tally = Tally::default();
            for i in start..(start + SAMPLE_CHUNK).min(cfg.samples) {
                let mem = sampler.sample_indexed(field, cfg.seed, i)?;
                let p = ctx.profile(&mem.polys)?;
                *tally.counts.entry(plan.key(ctx, &p, mem.alpha)).or_default() += 1;
                tally.members += 1;
                if plan.violates(ctx, &p) {
                    tally.violations += 1;
                }
            }
            Ok(tally)
        })
        .collect();
    let mut total = Tally::default();
    for part in partials {
        total.merge(part?);
    }
    Ok(total)
}

/// Model law of `(Σ_{sites} X_{d,site})_{d ∈ divisors}` over `q + 1` sites.
pub fn run_theory(cfg: &ExperimentConfig) -> Result<DistributionReport> {
    cfg.check_field()?;
    let divisors = cfg.divisor_list()?;
    let site = dist::site_distribution(cfg.q, cfg.r)?;
    let n_sites = cfg.q + 1;
    let joint = with_pool(cfg.workers, || dist::convolve(&site, n_sites, &divisors, cfg.max_keys as usize))??;
    let rows = joint
        .entries()
        .into_iter()
        .map(|e| DistributionRow { key: e.key, prob: e.prob, count: None, wilson_low: None, wilson_high: None })
        .collect();
    Ok(DistributionReport {
        kind: DistributionKind::Theory,
        config: cfg.clone(),
        q: cfg.q,
        r: cfg.r,
        divisors,
        size: n_sites as u64,
        expected_family_size: None,
        min_degree: None,
        zero_propagation_violations: None,
        rows,
    })
}

fn parse_prob(s: &str) -> Result<BigRational> {
    s.parse::<BigRational>().map_err(|e| Error::Parse(format!("probability {s:?}: {e}")))
}

fn probabilities(rep: &DistributionReport) -> Result<BTreeMap<Vec<CycInt>, BigRational>> {
    let mut out: BTreeMap<Vec<CycInt>, BigRational> = BTreeMap::new();
    for row in &rep.rows {
        if row.key.len() != rep.divisors.len() || row.key.iter().any(|c| c.conductor() != rep.r) {
            return Err(Error::KeyspaceMismatch(format!("key of shape {} in a {:?} table", row.key.len(), rep.divisors)));
        }
        let p = parse_prob(&row.prob)?;
        if p.is_negative() {
            return Err(Error::NormalizationFailure(format!("negative probability {}", row.prob)));
        }
        *out.entry(row.key.clone()).or_insert_with(BigRational::zero) += p;
    }
    let total: BigRational = out.values().sum();
    if total != BigRational::from_integer(1.into()) {
        return Err(Error::NormalizationFailure(format!("{:?} table sums to {total}", rep.kind)));
    }
    Ok(out)
}

/// Total variation distance between an empirical table and a model table.
pub fn run_compare(
    cfg: &ExperimentConfig,
    empirical: &DistributionReport,
    theory: &DistributionReport,
) -> Result<ComparisonReport> {
    if (empirical.q, empirical.r, &empirical.divisors) != (theory.q, theory.r, &theory.divisors) {
        return Err(Error::KeyspaceMismatch(format!(
            "(q, r, divisors) = ({}, {}, {:?}) against ({}, {}, {:?})",
            empirical.q, empirical.r, empirical.divisors, theory.q, theory.r, theory.divisors
        )));
    }
    let emp = probabilities(empirical)?;
    let th = probabilities(theory)?;
    let mut keys: Vec<&Vec<CycInt>> = emp.keys().chain(th.keys()).collect();
    keys.sort();
    keys.dedup();
    let zero = BigRational::zero();
    let mut tv = BigRational::zero();
    let mut rows = Vec::with_capacity(keys.len());
    for key in keys {
        let e = emp.get(key).unwrap_or(&zero);
        let t = th.get(key).unwrap_or(&zero);
        let gap = (e - t).abs();
        tv += &gap;
        rows.push(ComparisonRow {
            key: key.clone(),
            empirical: e.to_f64().unwrap_or(f64::NAN),
            theory: t.to_f64().unwrap_or(f64::NAN),
            gap: gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    tv /= BigRational::from_integer(2.into());
    let total_variation = tv.to_f64().unwrap_or(f64::NAN);
    let min_degree = empirical.min_degree.unwrap_or(0);
    let threshold = cfg.threshold_at(min_degree);
    Ok(ComparisonReport {
        config: cfg.clone(),
        q: empirical.q,
        r: empirical.r,
        divisors: empirical.divisors.clone(),
        family_size: empirical.size,
        min_degree,
        error_scale: (empirical.q as f64).powf(-(min_degree as f64) / 2.0),
        total_variation,
        total_variation_exact: tv.to_string(),
        threshold,
        pass: total_variation <= threshold,
        rows,
    })
}

/// Degree tuples with `Σ i·d_i ≤ max_weight`, excluding the zero tuple, in
/// lexicographic order.
pub fn tuples_up_to_weight(r: u32, max_weight: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; r as usize - 1];
    fn rec(slot: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot == cur.len() {
            if cur.iter().any(|&d| d > 0) {
                out.push(cur.clone());
            }
            return;
        }
        let w = slot as u32 + 1;
        for d in 0..=left / w {
            cur[slot] = d;
            rec(slot + 1, left - d * w, cur, out);
        }
        cur[slot] = 0;
    }
    rec(0, max_weight, &mut cur, &mut out);
    out
}

#[derive(Default)]
struct CountTally {
    members: u64,
    mismatches: u64,
    bound_checked: u64,
    bound_violations: u64,
    reducible: u64,
}

fn verify_tuple(cfg: &ExperimentConfig, field: &PrimeField, ctx: &CountContext, degrees: &[u32]) -> CountRow {
    let mut row = CountRow {
        degrees: degrees.to_vec(),
        admissible: false,
        members: 0,
        mismatches: 0,
        bound_checked: 0,
        bound_violations: 0,
        reducible_members: 0,
        error: None,
    };
    let result = (|| -> Result<CountTally> {
        let t = DegreeTuple::new(field.r(), degrees.to_vec())?;
        row.admissible = t.is_admissible();
        let size = bracket_size(cfg.q, &t, true);
        if size > cfg.budget as u128 {
            return Err(Error::BudgetExceeded { size, budget: cfg.budget as u128 });
        }
        let q = field.q() as i64;
        let mut tasks = Vec::new();
        for (_, sub) in t.sub_families() {
            // genus squared, for irreducible sub-families only
            let g = if family::is_geometrically_irreducible(field.r(), &sub) {
                Some(family::genus(field.r(), &sub)?)
            } else {
                None
            };
            let space = TupleSpace::new(field, &sub);
            for range in chunk_ranges(space.outer_len()) {
                tasks.push((space.clone(), range, g));
            }
        }
        let partials: Vec<Result<CountTally>> = tasks
            .par_iter()
            .map(|(space, range, g)| {
                let mut tally = CountTally::default();
                let mut err = None;
                space.visit(field, range.clone(), |polys| {
                    if err.is_some() {
                        return;
                    }
                    let p = match ctx.profile(polys) {
                        Ok(p) => p,
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    };
                    for a in field.units() {
                        let n = p.formula_count(ctx, a);
                        tally.members += 1;
                        if n != p.oracle_count(ctx, a) {
                            tally.mismatches += 1;
                        }
                        match g {
                            Some(g) => {
                                tally.bound_checked += 1;
                                let dev = (n - q - 1) as i128;
                                if dev * dev > 4 * (*g as i128) * (*g as i128) * q as i128 {
                                    tally.bound_violations += 1;
                                }
                            }
                            None => tally.reducible += 1,
                        }
                    }
                });
                err.map_or(Ok(tally), Err)
            })
            .collect();
        let mut total = CountTally::default();
        for part in partials {
            let part = part?;
            total.members += part.members;
            total.mismatches += part.mismatches;
            total.bound_checked += part.bound_checked;
            total.bound_violations += part.bound_violations;
            total.reducible += part.reducible;
        }
        Ok(total)
    })();
    match result {
        Ok(t) => {
            row.members = t.members;
            row.mismatches = t.mismatches;
            row.bound_checked = t.bound_checked;
            row.bound_violations = t.bound_violations;
            row.reducible_members = t.reducible;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Formula against oracle, and the Hasse–Weil bound for geometrically
/// irreducible members, over whole `hat F_[d…]` families. With a degree
/// tuple in the config only that family is checked, otherwise every tuple
/// of weight at most `max_weight`.
pub fn run_verify_counts(cfg: &ExperimentConfig) -> Result<CountReport> {
    let field = field_of(cfg)?;
    let ctx = CountContext::new(&field);
    let tuples = match &cfg.degrees {
        Some(d) => vec![d.clone()],
        None => tuples_up_to_weight(cfg.r, cfg.max_weight),
    };
    let rows: Vec<CountRow> =
        with_pool(cfg.workers, || tuples.iter().map(|d| verify_tuple(cfg, &field, &ctx, d)).collect())?;
    Ok(CountReport {
        config: cfg.clone(),
        members: rows.iter().map(|r| r.members).sum(),
        mismatches: rows.iter().map(|r| r.mismatches).sum(),
        bound_checked: rows.iter().map(|r| r.bound_checked).sum(),
        bound_violations: rows.iter().map(|r| r.bound_violations).sum(),
        pass: rows.iter().all(CountRow::passed),
        rows,
    })
}

/// Leading-order predictions for tuples of `slots` squarefree coprime
/// polynomials of equal degree with value `1` prescribed at the points
/// `0, 1, …, ℓ-1`, against exhaustive counts. Needs odd `q`.
pub fn run_asymptotics(cfg: &ExperimentConfig) -> Result<AsymptoticReport> {
    if !arith::is_prime(cfg.q as u64) {
        return Err(Error::NonPrimeModulus(cfg.q as u64));
    }
    if cfg.slots == 0 {
        return Err(Error::ShapeMismatch("at least one slot is required".into()));
    }
    // character tables are unused here; any admissible order will do
    let field = PrimeField::new(cfg.q as u64, 2)?;
    let consts = EulerConstants::new(cfg.q, cfg.n_max.max(cfg.slots), cfg.trunc)?;
    let degrees = match &cfg.degrees {
        Some(d) => d.clone(),
        None => (1..=cfg.max_degree / 2).map(|k| 2 * k).collect(),
    };
    let mut rows = Vec::new();
    let mut monotone = Vec::new();
    for &ell in &cfg.points {
        let mut last: Option<f64> = None;
        let mut ok = true;
        for &d in &degrees {
            let slot_degrees = vec![d; cfg.slots as usize];
            let constraints: Vec<Constraint> = (0..ell)
                .flat_map(|x| {
                    (1..=cfg.slots as usize).map(move |slot| Constraint::SlotValue {
                        x: FieldElem(x),
                        slot,
                        value: FieldElem::ONE,
                    })
                })
                .collect();
            let pred = asymptotics::predict_r(&consts, &slot_degrees, ell, &[])?;
            let brute = with_pool(cfg.workers, || {
                asymptotics::brute_count(&field, &slot_degrees, &constraints, cfg.budget as u128)
            })?;
            let mut row = AsymptoticRow {
                points: ell,
                degree: d,
                brute: None,
                predicted: pred.value,
                ratio: None,
                relative_error: None,
                error_scale: pred.error_scale,
                error: None,
            };
            match brute {
                Ok(n) => {
                    let rel = asymptotics::relative_error(n, pred.value);
                    row.brute = Some(n as u64);
                    row.ratio = Some(n as f64 / pred.value);
                    row.relative_error = Some(rel);
                    if last.is_some_and(|prev| rel > prev) {
                        ok = false;
                    }
                    last = Some(rel);
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    ok = false;
                }
            }
            rows.push(row);
        }
        monotone.push((ell, ok));
    }
    Ok(AsymptoticReport {
        config: cfg.clone(),
        slots: cfg.slots,
        pass: monotone.iter().all(|&(_, ok)| ok),
        monotone,
        rows,
    })
}

/// Local residue-tuple counts against `q^{n-1}(q-1)^n(q+n)` for `n ≤ n_max`.
pub fn run_heuristic(cfg: &ExperimentConfig) -> Result<HeuristicReport> {
    let rows: Vec<HeuristicRow> = (1..=cfg.n_max)
        .map(|n| match asymptotics::heuristic_local_count(cfg.q, n) {
            Ok(c) => HeuristicRow {
                q: cfg.q,
                n,
                enumerated: Some(c.enumerated as u64),
                closed_form: Some(c.closed_form as u64),
                matches: c.matches(),
                error: None,
            },
            Err(e) => HeuristicRow { q: cfg.q, n, enumerated: None, closed_form: None, matches: false, error: Some(e.to_string()) },
        })
        .collect();
    Ok(HeuristicReport { config: cfg.clone(), pass: rows.iter().all(|r| r.matches), rows })
}
