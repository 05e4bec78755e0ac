use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use crate::bkw::{run_reduction, Mode, ReductionConfig, Variant};
use crate::error::{Error, Result};
use crate::formats::{collect_samples, read_stream};
use crate::fqring::RingParams;
use crate::sampling::{CoefficientDistribution, ErrorDistribution, LweOracle, Sample, SecretDistribution};

/// Flat experiment description; every field can be set from a `key=value` line.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub q: u64,
    pub block_size: usize,
    pub variants: Vec<Variant>,
    pub mode: Mode,
    pub chi0: String,
    /// Initial samples for the rotating variants; ring-blind uses `n` times as many.
    pub initial_samples: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Read the shared stream from this file instead of generating it.
    pub input: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 16,
            q: 17,
            block_size: 4,
            variants: Variant::ALL.to_vec(),
            mode: Mode::Od,
            chi0: "gaussian:1".into(),
            initial_samples: 2000,
            seed: None,
            out: None,
            input: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad value '{value}' for {key}")))
}

impl ExperimentConfig {
    /// Parses `key=value` lines on top of the defaults. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("line {}: expected key=value", lineno + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_num(key, value)?,
            "q" => self.q = parse_num(key, value)?,
            "block_size" | "block-size" | "B" => self.block_size = parse_num(key, value)?,
            "variant" | "variants" => {
                self.variants = if value == "all" {
                    Variant::ALL.to_vec()
                } else {
                    value.split(',').map(|v| v.trim().parse()).collect::<Result<_>>()?
                }
            }
            "mode" => self.mode = value.parse()?,
            "chi0" => self.chi0 = value.to_string(),
            "samples" | "initial_samples" => self.initial_samples = parse_num(key, value)?,
            "seed" => self.seed = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "input" => self.input = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidParams(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<RingParams> {
        RingParams::new(self.n, self.q)
    }

    /// All consistency checks, done before any work starts.
    pub fn validate(&self) -> Result<(RingParams, CoefficientDistribution, u64)> {
        let ring = self.ring()?;
        let seed = self.seed.ok_or_else(|| Error::InvalidParams("experiments need a seed".into()))?;
        for &v in &self.variants {
            ReductionConfig::new(ring, self.block_size, v, self.mode)?;
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidParams("no variant selected".into()));
        }
        if self.initial_samples == 0 {
            return Err(Error::InvalidParams("initial sample count must be positive".into()));
        }
        let chi0 = CoefficientDistribution::parse(&self.chi0, self.q)?;
        Ok((ring, chi0, seed))
    }

    /// Samples consumed by `variant` from the shared stream.
    pub fn samples_for(&self, variant: Variant) -> usize {
        match variant {
            Variant::RingBlind => self.initial_samples * self.n,
            _ => self.initial_samples,
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub q: u64,
    pub block_size: usize,
    pub variant: String,
    pub mode: String,
    pub chi0: String,
    pub seed: u64,
    pub initial_samples: usize,
    /// Rows over all active tables, not counting the terminal table.
    pub table_size: usize,
    /// Distinct samples in the terminal table.
    pub reduced_samples: usize,
    /// Wall time of the reduction phase only.
    pub runtime_s: f64,
    /// Rows of each active table, `;`-separated.
    pub rows_per_table: String,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "n",
    "q",
    "block_size",
    "variant",
    "mode",
    "chi0",
    "seed",
    "initial_samples",
    "table_size",
    "reduced_samples",
    "runtime_s",
    "rows_per_table",
];

/// Uniform-secret oracle used for generated streams.
pub fn seeded_oracle(ring: RingParams, chi0: CoefficientDistribution, seed: u64) -> Result<LweOracle> {
    Ok(LweOracle::with_random_secret(ErrorDistribution::new(chi0, ring)?, &SecretDistribution::Uniform, seed))
}

fn shared_stream(config: &ExperimentConfig, ring: RingParams, chi0: &CoefficientDistribution, seed: u64) -> Result<Vec<Sample>> {
    let need = config.variants.iter().map(|&v| config.samples_for(v)).max().unwrap_or(0);
    match &config.input {
        Some(path) => {
            let (header, samples) = read_stream(File::open(path)?)?;
            if header.ring != ring {
                return Err(Error::ParamMismatch {
                    left_n: header.ring.n(),
                    left_q: header.ring.q(),
                    right_n: ring.n(),
                    right_q: ring.q(),
                });
            }
            if samples.len() < need {
                return Err(Error::Starved { got: samples.len(), need });
            }
            Ok(samples)
        }
        None => collect_samples(&mut seeded_oracle(ring, chi0.clone(), seed)?, need),
    }
}

/// Runs each requested variant on a prefix of one shared stream.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let (ring, chi0, seed) = config.validate()?;
    let stream = shared_stream(config, ring, &chi0, seed)?;
    config
        .variants
        .iter()
        .map(|&variant| {
            let rc = ReductionConfig::new(ring, config.block_size, variant, config.mode)?;
            let count = config.samples_for(variant);
            let (_, stats) = run_reduction(&mut stream[..count].iter().cloned(), count, rc)?;
            Ok(ExperimentRecord {
                n: ring.n(),
                q: ring.q(),
                block_size: config.block_size,
                variant: variant.to_string(),
                mode: config.mode.to_string(),
                chi0: chi0.to_string(),
                seed,
                initial_samples: count,
                table_size: stats.total_rows,
                reduced_samples: stats.terminal,
                runtime_s: stats.elapsed.as_secs_f64(),
                rows_per_table: stats.rows.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            })
        })
        .collect()
}

/// Writes a header row and one row per record.
pub fn write_csv<W: Write>(w: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wr.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut c = ExperimentConfig::parse("# table one\nn=8\nq=211\nB=4\nvariant=advanced,traditional\nmode=ad\nseed=7\n").unwrap();
        assert_eq!((c.n, c.q, c.block_size, c.mode, c.seed), (8, 211, 4, Mode::Ad, Some(7)));
        assert_eq!(c.variants, vec![Variant::Advanced, Variant::Traditional]);
        c.set("samples", "10").unwrap();
        assert_eq!(c.initial_samples, 10);
        assert!(ExperimentConfig::parse("bogus=1").is_err());
        assert!(ExperimentConfig::parse("n").is_err());
    }

    #[test]
    fn validation_happens_first() {
        let c = ExperimentConfig { seed: None, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { seed: Some(1), q: 16, ..Default::default() };
        assert!(matches!(run_experiment(&c), Err(Error::InvalidParams(_))));
        let c = ExperimentConfig { seed: Some(1), block_size: 3, ..Default::default() };
        assert!(run_experiment(&c).is_err());
    }

    #[test]
    fn small_run_and_csv() {
        let c = ExperimentConfig { n: 8, q: 17, block_size: 2, initial_samples: 50, seed: Some(3), ..Default::default() };
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].initial_samples, 400);
        assert_eq!(rows[2].initial_samples, 50);
        let mut out = Vec::new();
        write_csv(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 4);
        let again = run_experiment(&c).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(ExperimentRecord { runtime_s: 0.0, ..a.clone() }, ExperimentRecord { runtime_s: 0.0, ..b.clone() });
        }
    }
}
