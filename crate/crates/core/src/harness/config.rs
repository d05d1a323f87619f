//! Experiment configuration: defaults, a TOML file with the same keys, and
//! command-line overrides, merged in that order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::family::DegreeTuple;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Montecarlo,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "montecarlo" | "mc" => Ok(Mode::Montecarlo),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

/// Every setting optional; used for the config file and for flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub q: Option<u32>,
    pub r: Option<u32>,
    pub degrees: Option<String>,
    pub mode: Option<Mode>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub divisors: Option<String>,
    pub trunc: Option<u32>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub budget: Option<u64>,
    pub max_weight: Option<u32>,
    pub n_max: Option<u32>,
    pub max_degree: Option<u32>,
    pub threshold: Option<f64>,
    pub threshold_degree: Option<u32>,
    pub max_keys: Option<u64>,
    pub max_attempts: Option<u64>,
    pub slots: Option<u32>,
    pub points: Option<String>,
}

impl PartialConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            q: over.q.or(self.q),
            r: over.r.or(self.r),
            degrees: over.degrees.or(self.degrees),
            mode: over.mode.or(self.mode),
            samples: over.samples.or(self.samples),
            seed: over.seed.or(self.seed),
            divisors: over.divisors.or(self.divisors),
            trunc: over.trunc.or(self.trunc),
            format: over.format.or(self.format),
            workers: over.workers.or(self.workers),
            budget: over.budget.or(self.budget),
            max_weight: over.max_weight.or(self.max_weight),
            n_max: over.n_max.or(self.n_max),
            max_degree: over.max_degree.or(self.max_degree),
            threshold: over.threshold.or(self.threshold),
            threshold_degree: over.threshold_degree.or(self.threshold_degree),
            max_keys: over.max_keys.or(self.max_keys),
            max_attempts: over.max_attempts.or(self.max_attempts),
            slots: over.slots.or(self.slots),
            points: over.points.or(self.points),
        }
    }
}

/// Resolved settings. `workers` is excluded from serialization so that
/// reports embedding the config do not depend on the degree of parallelism.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub q: u32,
    pub r: u32,
    pub degrees: Option<Vec<u32>>,
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub divisors: Option<Vec<u32>>,
    pub trunc: u32,
    pub format: Format,
    #[serde(skip, default = "one")]
    pub workers: usize,
    pub budget: u64,
    pub max_weight: u32,
    pub n_max: u32,
    pub max_degree: u32,
    pub threshold: f64,
    pub threshold_degree: u32,
    pub max_keys: u64,
    pub max_attempts: u64,
    /// number of polynomial slots in the asymptotics battery
    pub slots: u32,
    /// numbers of prescribed points in the asymptotics battery
    pub points: Vec<u32>,
}

fn one() -> usize {
    1
}

fn parse_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            q: 5,
            r: 2,
            degrees: None,
            mode: Mode::Exhaustive,
            samples: 10_000,
            seed: 0,
            divisors: None,
            trunc: crate::asymptotics::DEFAULT_TRUNCATION,
            format: Format::Json,
            workers: 1,
            budget: 200_000_000,
            max_weight: 6,
            n_max: 3,
            max_degree: 6,
            threshold: 0.15,
            threshold_degree: 2,
            max_keys: 1 << 22,
            max_attempts: 100_000,
            slots: 1,
            points: vec![0, 1],
        }
    }
}

impl ExperimentConfig {
    pub fn resolve(p: PartialConfig) -> Result<Self> {
        let d = ExperimentConfig::default();
        let cfg = ExperimentConfig {
            q: p.q.unwrap_or(d.q),
            r: p.r.unwrap_or(d.r),
            degrees: p.degrees.as_deref().map(parse_list).transpose()?,
            mode: p.mode.unwrap_or(d.mode),
            samples: p.samples.unwrap_or(d.samples),
            seed: p.seed.unwrap_or(d.seed),
            divisors: p.divisors.as_deref().map(parse_list).transpose()?,
            trunc: p.trunc.unwrap_or(d.trunc),
            format: p.format.unwrap_or(d.format),
            workers: p.workers.unwrap_or(d.workers),
            budget: p.budget.unwrap_or(d.budget),
            max_weight: p.max_weight.unwrap_or(d.max_weight),
            n_max: p.n_max.unwrap_or(d.n_max),
            max_degree: p.max_degree.unwrap_or(d.max_degree),
            threshold: p.threshold.unwrap_or(d.threshold),
            threshold_degree: p.threshold_degree.unwrap_or(d.threshold_degree),
            max_keys: p.max_keys.unwrap_or(d.max_keys),
            max_attempts: p.max_attempts.unwrap_or(d.max_attempts),
            slots: p.slots.unwrap_or(d.slots),
            points: match p.points.as_deref() {
                Some(s) => parse_list(s)?,
                None => d.points,
            },
        };
        if cfg.mode == Mode::Montecarlo && cfg.samples == 0 {
            return Err(Error::DomainError("montecarlo mode needs at least one sample".into()));
        }
        if cfg.workers == 0 {
            return Err(Error::DomainError("at least one worker is required".into()));
        }
        Ok(cfg)
    }

    /// Checks `q` prime with `q ≡ 1 (mod r)`.
    pub fn check_field(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::DegenerateOrder(self.r));
        }
        if !arith::is_prime(self.q as u64) {
            return Err(Error::NonPrimeModulus(self.q as u64));
        }
        if self.q % self.r != 1 {
            return Err(Error::CongruenceViolation { q: self.q as u64, r: self.r });
        }
        Ok(())
    }

    pub fn tuple(&self) -> Result<DegreeTuple> {
        let degrees = self
            .degrees
            .clone()
            .ok_or_else(|| Error::DomainError("a degree tuple (--degrees) is required".into()))?;
        DegreeTuple::new(self.r, degrees)
    }

    /// Requested divisors, or every divisor `d > 1` of `r`.
    pub fn divisor_list(&self) -> Result<Vec<u32>> {
        match &self.divisors {
            Some(list) => {
                for &d in list {
                    if d < 2 || !self.r.is_multiple_of(d) {
                        return Err(Error::NotADivisor { d, r: self.r });
                    }
                }
                let mut list = list.clone();
                list.sort_unstable();
                list.dedup();
                Ok(list)
            }
            None => Ok(arith::divisors(self.r as u64).into_iter().skip(1).map(|d| d as u32).collect()),
        }
    }

    /// TV threshold at a given minimum degree: halves for every two degrees
    /// above `threshold_degree`.
    pub fn threshold_at(&self, min_degree: u32) -> f64 {
        let steps = (min_degree as f64 - self.threshold_degree as f64) / 2.0;
        self.threshold * 0.5f64.powf(steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: PartialConfig = toml::from_str("q = 7\nr = 3\nseed = 4\ndegrees = \"3,0\"\n").unwrap();
        let flags = PartialConfig { seed: Some(9), ..Default::default() };
        let cfg = ExperimentConfig::resolve(file.overlay(flags)).unwrap();
        assert_eq!((cfg.q, cfg.r, cfg.seed), (7, 3, 9));
        assert_eq!(cfg.degrees, Some(vec![3, 0]));
        assert_eq!(cfg.divisor_list().unwrap(), vec![3]);
        cfg.check_field().unwrap();
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(toml::from_str::<PartialConfig>("colour = 1").is_err());
        let mc = PartialConfig { mode: Some(Mode::Montecarlo), samples: Some(0), ..Default::default() };
        assert!(ExperimentConfig::resolve(mc).is_err());
        let cfg = ExperimentConfig::resolve(PartialConfig { q: Some(7), r: Some(4), ..Default::default() }).unwrap();
        assert!(cfg.check_field().is_err());
        let bad = PartialConfig { r: Some(4), divisors: Some("3".into()), ..Default::default() };
        assert!(ExperimentConfig::resolve(bad).unwrap().divisor_list().is_err());
    }

    #[test]
    fn threshold_halves_every_two_degrees() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.threshold_at(2), 0.15);
        assert!((cfg.threshold_at(4) - 0.075).abs() < 1e-15);
        assert!((cfg.threshold_at(8) - 0.01875).abs() < 1e-15);
    }

    #[test]
    fn workers_do_not_appear_in_serialized_config() {
        let cfg = ExperimentConfig { workers: 8, ..Default::default() };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(!json.contains("workers"));
    }
}
