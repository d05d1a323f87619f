//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use cyclic_covers::arith;
use cyclic_covers::asymptotics::heuristic_local_count;
use cyclic_covers::cyclotomic::{root_of_unity, CycInt};
use cyclic_covers::dist::{conditional_checks, site_distribution};
use cyclic_covers::harness::{
    self, report, CountReport, DistributionReport, ExperimentConfig, Format, Mode,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn rat(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn admissible_qs(r: u32, count: usize) -> Vec<u32> {
    (2..10_000u32).filter(|&q| arith::is_prime(q as u64) && q % r == 1).take(count).collect()
}

fn cfg(q: u32, r: u32) -> ExperimentConfig {
    ExperimentConfig { q, r, ..Default::default() }
}

const COUNT_CASES: [(u32, u32); 4] = [(5, 2), (13, 3), (5, 4), (7, 6)];

fn count_reports() -> Result<Vec<CountReport>, String> {
    COUNT_CASES
        .iter()
        .map(|&(q, r)| {
            harness::run_verify_counts(&ExperimentConfig { max_weight: 6, ..cfg(q, r) }).map_err(|e| e.to_string())
        })
        .collect()
}

fn point_count_identity(reports: &[CountReport]) -> Outcome {
    let mut members = 0;
    for (rep, (q, r)) in reports.iter().zip(COUNT_CASES) {
        if let Some(row) = rep.rows.iter().find(|row| row.error.is_some()) {
            return Err(format!("(q, r) = ({q}, {r}), degrees {:?}: {}", row.degrees, row.error.as_ref().unwrap()));
        }
        if rep.mismatches != 0 {
            return Err(format!("(q, r) = ({q}, {r}): {} mismatches", rep.mismatches));
        }
        members += rep.members;
    }
    Ok(format!("{members} members, formula = oracle throughout"))
}

fn hasse_weil(reports: &[CountReport]) -> Outcome {
    let checked: u64 = reports.iter().map(|r| r.bound_checked).sum();
    let reducible: u64 = reports.iter().flat_map(|r| &r.rows).map(|row| row.reducible_members).sum();
    let violations: u64 = reports.iter().map(|r| r.bound_violations).sum();
    if violations > 0 || checked == 0 {
        return Err(format!("{violations} violations among {checked} counts"));
    }
    Ok(format!("{checked} counts within 2g√q; {reducible} members on reducible curves not subject to the bound"))
}

fn model_consistency() -> Outcome {
    let mut sites = 0;
    for r in [2u32, 3, 4, 6, 8, 12] {
        for q in admissible_qs(r, 3) {
            let site = site_distribution(q, r).map_err(|e| e.to_string())?;
            let total = site.probability_of(|_| true);
            if !total.is_one() {
                return Err(format!("(q, r) = ({q}, {r}): total mass {total}"));
            }
            for d in arith::divisors(r as u64).into_iter().skip(1).map(|d| d as u32) {
                let values: Vec<CycInt> =
                    site.atoms().iter().map(|a| site.value(a, d)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
                let mass = |target: &CycInt| -> BigRational {
                    let w: u64 = site.atoms().iter().zip(&values).filter(|(_, v)| *v == target).map(|(a, _)| a.weight).sum();
                    rat(w, site.denominator())
                };
                let (qq, rr, dd) = (q as u64, r as u64, d as u64);
                let zero = rat(rr - rr / dd, qq + rr - 1);
                if mass(&CycInt::zero(r)) != zero {
                    return Err(format!("(q, r, d) = ({q}, {r}, {d}): P(X_d = 0) = {}", mass(&CycInt::zero(r))));
                }
                let root = rat(qq + rr / dd - 1, dd * (qq + rr - 1));
                for k in 0..d {
                    let eps = root_of_unity(r, (k * (r / d)) as i64);
                    if mass(&eps) != root {
                        return Err(format!("(q, r, d) = ({q}, {r}, {d}): P(X_d = {eps}) = {}", mass(&eps)));
                    }
                }
            }
            let checks = conditional_checks(&site).map_err(|e| format!("(q, r) = ({q}, {r}): {e}"))?;
            if let Some(c) = checks.iter().find(|c| c.expected != c.observed) {
                return Err(format!("(q, r) = ({q}, {r}): {}", c.statement));
            }
            sites += 1;
        }
    }
    Ok(format!("{sites} site laws normalised, marginals and conditionals exact"))
}

fn prime_order_specialisation() -> Outcome {
    let mut cases = 0;
    for p in [2u32, 3] {
        for q in admissible_qs(p, 3) {
            let site = site_distribution(q, p).map_err(|e| e.to_string())?;
            let (qq, pp) = (q as u64, p as u64);
            let value = |a: &cyclic_covers::dist::SiteAtom| site.value(a, p).expect("p | p");
            let zero = site.probability_of(|a| value(a).is_zero());
            if zero != rat(pp - 1, qq + pp - 1) {
                return Err(format!("(q, p) = ({q}, {p}): P(0) = {zero}"));
            }
            for k in 0..p {
                let eps = root_of_unity(p, k as i64);
                let prob = site.probability_of(|a| value(a) == eps);
                if prob != rat(qq, pp * (qq + pp - 1)) {
                    return Err(format!("(q, p) = ({q}, {p}): P({eps}) = {prob}"));
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} prime-order site laws match"))
}

fn sweep_tv(q: u32, r: u32, degrees: &[u32], divisors: &[u32], theory: &DistributionReport) -> Result<(f64, u64), String> {
    let c = ExperimentConfig { degrees: Some(degrees.to_vec()), divisors: Some(divisors.to_vec()), ..cfg(q, r) };
    let emp = harness::run_empirical(&c).map_err(|e| e.to_string())?;
    if emp.expected_family_size != Some(emp.size) {
        return Err(format!("{degrees:?}: swept {} members, expected {:?}", emp.size, emp.expected_family_size));
    }
    let cmp = harness::run_compare(&c, &emp, theory).map_err(|e| e.to_string())?;
    Ok((cmp.total_variation, emp.zero_propagation_violations.unwrap_or(u64::MAX)))
}

fn theory(q: u32, r: u32, divisors: &[u32]) -> Result<DistributionReport, String> {
    harness::run_theory(&ExperimentConfig { divisors: Some(divisors.to_vec()), ..cfg(q, r) }).map_err(|e| e.to_string())
}

fn quadratic_convergence() -> Outcome {
    let th = theory(5, 2, &[2])?;
    let mut tvs = Vec::new();
    for d in [4, 6, 8] {
        tvs.push(sweep_tv(5, 2, &[d], &[2], &th)?.0);
    }
    let line = format!("TV at degrees 4, 6, 8: {:.5}, {:.5}, {:.5}", tvs[0], tvs[1], tvs[2]);
    if tvs[0] > tvs[1] && tvs[1] > tvs[2] && tvs[2] < 0.05 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn joint_divisor_convergence() -> Outcome {
    let th = theory(5, 4, &[2, 4])?;
    let (tv_small, bad_small) = sweep_tv(5, 4, &[2, 1, 1], &[2, 4], &th)?;
    let (tv_large, bad_large) = sweep_tv(5, 4, &[4, 2, 1], &[2, 4], &th)?;
    let line = format!(
        "TV (2,1,1) = {tv_small:.5}, (4,2,1) = {tv_large:.5}; zero-propagation violations {bad_small}, {bad_large}"
    );
    if tv_large < tv_small && bad_small == 0 && bad_large == 0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn heuristic_identity() -> Outcome {
    for q in [3u32, 5, 7] {
        for n in 1..=3u32 {
            let c = heuristic_local_count(q, n).map_err(|e| e.to_string())?;
            let (qq, nn) = (q as u128, n as u128);
            let closed = qq.pow(n - 1) * (qq - 1).pow(n) * (qq + nn);
            if c.enumerated != closed {
                return Err(format!("(q, n) = ({q}, {n}): enumerated {}, closed form {closed}", c.enumerated));
            }
        }
    }
    Ok("9 exact identities".into())
}

fn leading_order() -> Outcome {
    let c = ExperimentConfig { degrees: Some(vec![4, 6]), points: vec![0, 1], slots: 1, ..cfg(3, 2) };
    let rep = harness::run_asymptotics(&c).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for ell in [0u32, 1] {
        let ratio = |d: u32| {
            rep.rows.iter().find(|r| r.points == ell && r.degree == d).and_then(|r| r.ratio).unwrap_or(f64::NAN)
        };
        let (r4, r6) = (ratio(4), ratio(6));
        ok &= (0.6..=1.4).contains(&r4) && (r6 - 1.0).abs() <= (r4 - 1.0).abs();
        parts.push(format!("ℓ={ell}: ratio {r4:.4} at 4, {r6:.4} at 6"));
    }
    let line = parts.join("; ");
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn renderings<R: report::Report>(rep: &R) -> Result<Vec<String>, String> {
    [Format::Json, Format::Csv].into_iter().map(|f| report::render(rep, f).map_err(|e| e.to_string())).collect()
}

fn all_reports(workers: usize) -> Result<Vec<String>, String> {
    let e = |e: cyclic_covers::Error| e.to_string();
    let base = ExperimentConfig { workers, ..cfg(5, 4) };
    let sweep = ExperimentConfig { degrees: Some(vec![2, 1, 1]), ..base.clone() };
    let emp = harness::run_empirical(&sweep).map_err(e)?;
    let mc = harness::run_empirical(&ExperimentConfig { mode: Mode::Montecarlo, samples: 5000, seed: 7, ..sweep.clone() })
        .map_err(e)?;
    let th = harness::run_theory(&base).map_err(e)?;
    let mut out = Vec::new();
    out.extend(renderings(&emp)?);
    out.extend(renderings(&mc)?);
    out.extend(renderings(&th)?);
    out.extend(renderings(&harness::run_compare(&base, &emp, &th).map_err(e)?)?);
    out.extend(renderings(&harness::run_verify_counts(&ExperimentConfig { max_weight: 4, ..base.clone() }).map_err(e)?)?);
    out.extend(renderings(&harness::run_asymptotics(&ExperimentConfig { degrees: Some(vec![2, 4]), ..base.clone() }).map_err(e)?)?);
    out.extend(renderings(&harness::run_heuristic(&base).map_err(e)?)?);
    Ok(out)
}

fn determinism() -> Outcome {
    let one = all_reports(1)?;
    let eight = all_reports(8)?;
    let again = all_reports(1)?;
    if one != eight {
        return Err("reports differ between 1 and 8 workers".into());
    }
    if one != again {
        return Err("reports differ between identical runs".into());
    }
    Ok(format!("{} reports byte-identical across runs and worker counts", one.len()))
}

fn main() {
    let counts = count_reports();
    let criteria: Vec<Criterion> = vec![
        ("point-count identity", Box::new(|| point_count_identity(counts.as_ref().map_err(Clone::clone)?))),
        ("Hasse-Weil bound", Box::new(|| hasse_weil(counts.as_ref().map_err(Clone::clone)?))),
        ("site model consistency", Box::new(model_consistency)),
        ("prime-order specialisation", Box::new(prime_order_specialisation)),
        ("quadratic convergence", Box::new(quadratic_convergence)),
        ("joint-divisor convergence", Box::new(joint_divisor_convergence)),
        ("local heuristic identity", Box::new(heuristic_identity)),
        ("leading-order counts", Box::new(leading_order)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
