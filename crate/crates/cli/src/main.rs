use std::fs::{self, File};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ringbkw::bkw::{ReductionConfig, Variant};
use ringbkw::formats::{collect_samples, write_stream, StreamHeader};
use ringbkw::harness::{run_experiment, run_verify, seeded_oracle, write_csv, ExperimentConfig};
use ringbkw::sampling::SampleSource;
use ringbkw::solve::{ring_bkw, AttackConfig, Scoring};
use ringbkw::Error;

#[derive(Parser)]
#[command(name = "ringbkw", version, about = "Ring-BKW reduction and key recovery on two-power cyclotomic Ring-LWE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded sample stream file.
    Gen(Params),
    /// Run reduction experiments and emit one CSV row per variant.
    Experiment(Params),
    /// Recover a planted secret end to end.
    Attack(AttackArgs),
    /// Run the ring and tower self-test suites.
    Verify {
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Shared parameters; flags override values from `--config`.
#[derive(Args, Clone, Default)]
struct Params {
    /// key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "block-size")]
    block_size: Option<usize>,
    /// ring-blind, traditional, advanced, a comma list, or all
    #[arg(long)]
    variant: Option<String>,
    /// od or ad
    #[arg(long)]
    mode: Option<String>,
    /// Initial samples; for attack, the most the reduction may consume
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// gaussian:r, uniform:a,b,..., point:v or pmf:v=p,...
    #[arg(long)]
    chi0: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample stream to use instead of generating one
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    params: Params,
    /// Reduced samples per subproblem (default: derived from the error support)
    #[arg(long)]
    reduced: Option<usize>,
    /// support, likelihood or auto
    #[arg(long, default_value = "auto")]
    scoring: String,
    #[arg(long, default_value_t = 32)]
    holdout: usize,
}

impl Params {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("n", self.n.map(|v| v.to_string())),
            ("q", self.q.map(|v| v.to_string())),
            ("block_size", self.block_size.map(|v| v.to_string())),
            ("variant", self.variant.clone()),
            ("mode", self.mode.clone()),
            ("samples", self.samples.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("chi0", self.chi0.clone()),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                c.set(k, &v)?;
            }
        }
        if let Some(p) = &self.out {
            c.out = Some(p.clone());
        }
        if let Some(p) = &self.input {
            c.input = Some(p.clone());
        }
        Ok(c)
    }
}

enum Failure {
    Usage(anyhow::Error),
    Attack(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::ParamMismatch { .. } | Error::Format(_) | Error::Precondition(_) => {
                Failure::Usage(e.into())
            }
            _ => Failure::Attack(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Attack(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Attack(e.into())
    }
}

fn cmd_gen(p: &Params) -> Result<(), Failure> {
    let c = p.resolve()?;
    let ring = c.ring()?;
    let seed = c.seed.ok_or_else(|| Error::InvalidParams("gen needs --seed".into()))?;
    let out = c.out.clone().ok_or_else(|| Error::InvalidParams("gen needs --out".into()))?;
    let chi0 = ringbkw::sampling::CoefficientDistribution::parse(&c.chi0, c.q)?;
    let mut oracle = seeded_oracle(ring, chi0, seed)?;
    let samples = collect_samples(&mut oracle, c.initial_samples)?;
    let header = StreamHeader { ring, seed, count: samples.len() as u64 };
    let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
    write_stream(file, &header, &samples)?;
    println!("wrote {} samples (n={}, q={}, seed={}) to {}", samples.len(), ring.n(), ring.q(), seed, out.display());
    Ok(())
}

fn cmd_experiment(p: &Params) -> Result<(), Failure> {
    let c = p.resolve()?;
    c.validate()?;
    let records = run_experiment(&c)?;
    match &c.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(file, &records)?;
        }
        None => write_csv(io::stdout().lock(), &records)?,
    }
    Ok(())
}

fn cmd_attack(a: &AttackArgs) -> Result<(), Failure> {
    let mut c = a.params.resolve()?;
    if a.params.variant.is_none() && a.params.config.is_none() {
        c.variants = vec![Variant::Advanced];
    }
    let (ring, chi0, seed) = c.validate()?;
    let [variant] = c.variants[..] else {
        return Err(Error::InvalidParams("attack takes exactly one variant".into()).into());
    };
    let scoring: Scoring = a.scoring.parse()?;
    let rc = ReductionConfig::new(ring, c.block_size, variant, c.mode)?;
    let mut oracle = seeded_oracle(ring, chi0.clone(), seed)?;
    let planted = oracle.secret().clone();
    let mut config = AttackConfig::new(rc, chi0.clone());
    config.target_reduced = a.reduced;
    config.scoring = scoring;
    config.holdout = a.holdout;
    if let Some(budget) = a.params.samples {
        config.max_inputs = budget;
    }

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "n={} q={} block_size={} variant={} mode={} chi0={} seed={}",
        ring.n(),
        ring.q(),
        c.block_size,
        variant,
        c.mode,
        chi0,
        seed
    )?;
    eprintln!("reducing until {} samples reach the subring", config.reduced_target());
    let source: &mut dyn SampleSource = &mut oracle;
    let report = match ring_bkw(source, &config) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "verdict=failed ({e})")?;
            return Err(e.into());
        }
    };
    eprintln!(
        "reduction {:.3}s, solve {:.3}s, reconstruction {:.3}s",
        report.reduction_time.as_secs_f64(),
        report.solve_time.as_secs_f64(),
        report.reconstruct_time.as_secs_f64()
    );
    writeln!(out, "inputs={} reduced={} table_size={}", report.stats.inputs, report.reduced, report.stats.total_rows)?;
    for (j, r) in report.reports.iter().enumerate() {
        writeln!(out, "subproblem j={j} best={:?} score={:.3} unique={}", r.best.coeffs(), r.score, r.unique)?;
    }
    writeln!(out, "recovered={:?}", report.secret.coeffs())?;
    writeln!(out, "holdout=passed")?;
    if report.secret == planted {
        writeln!(out, "verdict=recovered")?;
        Ok(())
    } else {
        writeln!(out, "verdict=mismatch")?;
        Err(Failure::Attack(anyhow::anyhow!("recovered secret differs from the planted one")))
    }
}

fn cmd_verify(scale: usize, seed: u64) -> Result<(), Failure> {
    let report = run_verify(scale.max(1), seed);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Attack(anyhow::anyhow!("self-test failed")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(p) => cmd_gen(p),
        Command::Experiment(p) => cmd_experiment(p),
        Command::Attack(a) => cmd_attack(a),
        Command::Verify { scale, seed } => cmd_verify(*scale, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Attack(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}
