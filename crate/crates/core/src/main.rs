use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cyclic_covers::harness::{self, report, ExperimentConfig, Format, Mode, PartialConfig, Report};
use cyclic_covers::Result;

#[derive(Parser)]
#[command(name = "cyclic-covers", about = "Point-count and character-sum experiments for cyclic covers of the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tally (S_d) over a family, exhaustively or by sampling
    Empirical(Common),
    /// Exact model law of (S_d) over q+1 sites
    Theory(Common),
    /// Total variation between an empirical and a model table
    Compare {
        #[arg(long)]
        empirical: PathBuf,
        #[arg(long)]
        theory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Point-count formula against the local oracle and the Hasse-Weil bound
    VerifyCounts(Common),
    /// Leading-order counting predictions against enumeration
    Asymptotics(Common),
    /// Local residue-tuple identity
    Heuristic(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    /// slot degrees, e.g. 2,1,0
    #[arg(long)]
    degrees: Option<String>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// divisors of r to track, e.g. 2,4
    #[arg(long)]
    divisors: Option<String>,
    #[arg(long)]
    trunc: Option<u32>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    max_weight: Option<u32>,
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    threshold_degree: Option<u32>,
    #[arg(long)]
    max_keys: Option<u64>,
    #[arg(long)]
    max_attempts: Option<u64>,
    #[arg(long)]
    slots: Option<u32>,
    /// numbers of prescribed points, e.g. 0,1
    #[arg(long)]
    points: Option<String>,
    /// output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_toml_file(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            q: self.q,
            r: self.r,
            degrees: self.degrees.clone(),
            mode: self.mode,
            samples: self.samples,
            seed: self.seed,
            divisors: self.divisors.clone(),
            trunc: self.trunc,
            format: self.format,
            workers: self.workers,
            budget: self.budget,
            max_weight: self.max_weight,
            n_max: self.n_max,
            max_degree: self.max_degree,
            threshold: self.threshold,
            threshold_degree: self.threshold_degree,
            max_keys: self.max_keys,
            max_attempts: self.max_attempts,
            slots: self.slots,
            points: self.points.clone(),
        };
        ExperimentConfig::resolve(file.overlay(flags))
    }

    fn emit<R: Report>(&self, cfg: &ExperimentConfig, rep: &R) -> Result<bool> {
        let text = report::render(rep, cfg.format)?;
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(rep.passed())
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Empirical(c) => {
            let cfg = c.resolve()?;
            c.emit(&cfg, &harness::run_empirical(&cfg)?)
        }
        Command::Theory(c) => {
            let cfg = c.resolve()?;
            c.emit(&cfg, &harness::run_theory(&cfg)?)
        }
        Command::Compare { empirical, theory, common } => {
            let cfg = common.resolve()?;
            let emp = report::DistributionReport::parse(&std::fs::read_to_string(&empirical)?)?;
            let th = report::DistributionReport::parse(&std::fs::read_to_string(&theory)?)?;
            common.emit(&cfg, &harness::run_compare(&cfg, &emp, &th)?)
        }
        Command::VerifyCounts(c) => {
            let cfg = c.resolve()?;
            c.emit(&cfg, &harness::run_verify_counts(&cfg)?)
        }
        Command::Asymptotics(c) => {
            let cfg = c.resolve()?;
            c.emit(&cfg, &harness::run_asymptotics(&cfg)?)
        }
        Command::Heuristic(c) => {
            let cfg = c.resolve()?;
            c.emit(&cfg, &harness::run_heuristic(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
