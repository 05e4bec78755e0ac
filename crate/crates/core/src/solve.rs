//! Hypothesis testing on subring instances, the end-to-end attack driver, and the
//! index-2 square-root search.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bkw::{ReductionConfig, Reducer, TableStats};
use crate::error::{Error, Result};
use crate::fqring::modulus::residue;
use crate::fqring::{RingElement, RingParams};
use crate::reduce::{build_subproblems, reconstruct_secret_unit, SubProblem};
use crate::sampling::{CoefficientDistribution, Coset, Sample, SampleSource};
use crate::tower::TowerParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scoring {
    /// Keep candidates whose residuals all lie in the error support.
    Support,
    /// Rank candidates by the log-likelihood of their residuals.
    Likelihood,
    /// Support when the deepest error support is a proper subset of F_q, else likelihood.
    Auto,
}

impl fmt::Display for Scoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scoring::Support => "support",
            Scoring::Likelihood => "likelihood",
            Scoring::Auto => "auto",
        })
    }
}

impl FromStr for Scoring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "support" => Ok(Scoring::Support),
            "likelihood" => Ok(Scoring::Likelihood),
            "auto" => Ok(Scoring::Auto),
            _ => Err(Error::InvalidParams(format!("unknown scoring '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    /// Best candidate, in the standalone subring ring.
    pub best: RingElement,
    /// Log-likelihood of `best`, or 1 for a support survivor.
    pub score: f64,
    /// Gap to the runner-up (infinite when nothing else survives).
    pub margin: f64,
    pub unique: bool,
    pub tested: u64,
    /// Support mode only: number of candidates that survived.
    pub survivors: u64,
    pub scoring: Scoring,
}

/// Digit `d` of the candidate odometer: 0, 1, -1, 2, -2, ...
fn odometer_value(d: u64) -> i64 {
    if d % 2 == 1 {
        d.div_ceil(2) as i64
    } else {
        -((d / 2) as i64)
    }
}

fn candidate(index: u64, b: usize, q: u64) -> Vec<i64> {
    let mut out = Vec::with_capacity(b);
    let mut rest = index;
    for _ in 0..b {
        out.push(odometer_value(rest % q));
        rest /= q;
    }
    out
}

/// Subring samples flattened to residues for the inner loop.
struct Prepared {
    q: u64,
    b: usize,
    a: Vec<Vec<i64>>,
    rhs: Vec<Vec<i64>>,
    depth: Vec<u32>,
}

impl Prepared {
    fn new(p: &SubProblem) -> Self {
        let q = p.tower.ring().q();
        Prepared {
            q,
            b: p.tower.subring_dim(),
            a: p.samples.iter().map(|s| s.a.coeffs().to_vec()).collect(),
            rhs: p.samples.iter().map(|s| s.b.coeffs().to_vec()).collect(),
            depth: p.samples.iter().map(|s| s.depth).collect(),
        }
    }

    /// Residues of `b - a·c` for sample `t`, negacyclic in dimension `B`.
    fn residual(&self, t: usize, c: &[i64], out: &mut [u64]) {
        let (a, b) = (&self.a[t], &self.rhs[t]);
        let q = self.q as i128;
        for k in 0..self.b {
            let mut acc = b[k] as i128;
            for i in 0..self.b {
                if a[i] == 0 {
                    continue;
                }
                if i <= k {
                    acc -= a[i] as i128 * c[k - i] as i128;
                } else {
                    acc += a[i] as i128 * c[k + self.b - i] as i128;
                }
            }
            out[k] = acc.rem_euclid(q) as u64;
        }
    }
}

/// Dense pmfs (by residue) for every depth present, computed once.
fn depth_tables(p: &SubProblem) -> HashMap<u32, Vec<f64>> {
    let mut map = HashMap::new();
    for s in &p.samples {
        map.entry(s.depth).or_insert_with(|| p.chi0.depth_pmf(s.depth));
    }
    map
}

/// Number of residues with nonzero probability after `depth` subtraction levels.
pub fn support_size(chi0: &CoefficientDistribution, depth: u32) -> usize {
    chi0.depth_pmf(depth).iter().filter(|&&p| p > 0.0).count()
}

/// Reduced samples needed for the planted secret to be the unique support survivor
/// with about 99% probability: `ceil((B ln q + ln 100) / ln(q/|E|))`.
/// `None` when the error support covers all of F_q.
pub fn min_samples(chi0: &CoefficientDistribution, depth: u32, b: usize, q: u64) -> Option<usize> {
    let e = support_size(chi0, depth);
    if e as u64 >= q {
        return None;
    }
    let qf = q as f64;
    Some(((b as f64 * qf.ln() + 100f64.ln()) / (qf / e as f64).ln()).ceil() as usize)
}

fn resolve_scoring(scoring: Scoring, p: &SubProblem) -> Scoring {
    match scoring {
        Scoring::Auto => {
            let deepest = p.samples.iter().map(|s| s.depth).max().unwrap_or(0);
            if (support_size(&p.chi0, deepest) as u64) < p.tower.ring().q() {
                Scoring::Support
            } else {
                Scoring::Likelihood
            }
        }
        s => s,
    }
}

/// Exhaustively scores all `q^B` candidate subring secrets.
///
/// The result does not depend on `parallel`: ties go to the earliest candidate in
/// odometer order.
pub fn hypothesis_test(p: &SubProblem, scoring: Scoring, parallel: bool) -> Result<HypothesisReport> {
    if p.samples.is_empty() {
        return Err(Error::Precondition("hypothesis test needs at least one sample".into()));
    }
    let q = p.tower.ring().q();
    let b = p.tower.subring_dim();
    let total = (q as u128).pow(b as u32);
    let total = u64::try_from(total).map_err(|_| Error::InvalidParams("candidate space too large".into()))?;
    let prep = Prepared::new(p);
    let tables = depth_tables(p);
    let scoring = resolve_scoring(scoring, p);
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk);
    let sub = p.subring_params();

    match scoring {
        Scoring::Support => {
            // (survivor count, first survivor)
            let scan = |ci: u64| -> (u64, Option<u64>) {
                let mut buf = vec![0u64; b];
                let mut count = 0;
                let mut first = None;
                for idx in ci * chunk..((ci + 1) * chunk).min(total) {
                    let c = candidate(idx, b, q);
                    let ok = (0..prep.a.len()).all(|t| {
                        prep.residual(t, &c, &mut buf);
                        let pmf = &tables[&prep.depth[t]];
                        buf.iter().all(|&r| pmf[r as usize] > 0.0)
                    });
                    if ok {
                        count += 1;
                        first.get_or_insert(idx);
                    }
                }
                (count, first)
            };
            let merge = |x: (u64, Option<u64>), y: (u64, Option<u64>)| {
                (x.0 + y.0, match (x.1, y.1) {
                    (Some(u), Some(v)) => Some(u.min(v)),
                    (u, v) => u.or(v),
                })
            };
            let (survivors, first) = if parallel {
                (0..chunks).into_par_iter().map(scan).reduce(|| (0, None), merge)
            } else {
                (0..chunks).map(scan).fold((0, None), merge)
            };
            let best = first.ok_or(Error::NoSurvivor { j: p.j })?;
            Ok(HypothesisReport {
                best: RingElement::from_coeffs(sub, &candidate(best, b, q))?,
                score: 1.0,
                margin: if survivors == 1 { f64::INFINITY } else { 0.0 },
                unique: survivors == 1,
                tested: total,
                survivors,
                scoring,
            })
        }
        Scoring::Likelihood | Scoring::Auto => {
            let logs: HashMap<u32, Vec<f64>> =
                tables.iter().map(|(&d, v)| (d, v.iter().map(|x| x.ln()).collect())).collect();
            // (best score, best index, runner-up score)
            type Acc = (f64, u64, f64);
            let better = |s: f64, i: u64, bs: f64, bi: u64| s > bs || (s == bs && i < bi);
            let merge = |x: Acc, y: Acc| -> Acc {
                if better(y.0, y.1, x.0, x.1) {
                    (y.0, y.1, y.2.max(x.0))
                } else {
                    (x.0, x.1, x.2.max(y.0))
                }
            };
            let empty: Acc = (f64::NEG_INFINITY, u64::MAX, f64::NEG_INFINITY);
            let scan = |ci: u64| -> Acc {
                let mut buf = vec![0u64; b];
                let mut acc = empty;
                for idx in ci * chunk..((ci + 1) * chunk).min(total) {
                    let c = candidate(idx, b, q);
                    let mut score = 0.0;
                    for t in 0..prep.a.len() {
                        prep.residual(t, &c, &mut buf);
                        let lp = &logs[&prep.depth[t]];
                        score += buf.iter().map(|&r| lp[r as usize]).sum::<f64>();
                        if score == f64::NEG_INFINITY {
                            break;
                        }
                    }
                    acc = merge(acc, (score, idx, f64::NEG_INFINITY));
                }
                acc
            };
            let (score, idx, second) = if parallel {
                (0..chunks).into_par_iter().map(scan).reduce(|| empty, merge)
            } else {
                (0..chunks).map(scan).fold(empty, merge)
            };
            if score == f64::NEG_INFINITY {
                return Err(Error::NoSurvivor { j: p.j });
            }
            let margin = score - second;
            Ok(HypothesisReport {
                best: RingElement::from_coeffs(sub, &candidate(idx, b, q))?,
                score,
                margin,
                unique: margin > 0.0,
                tested: total,
                survivors: 0,
                scoring,
            })
        }
    }
}

/// Checks a recovered secret on fresh samples. Every residual coefficient must lie in
/// the support of `chi0`, and the residuals must fit `chi0` better than uniform noise.
pub fn holdout_check(secret: &RingElement, samples: &[Sample], chi0: &CoefficientDistribution) -> Result<()> {
    let q = secret.params().q();
    let pmf = chi0.dense();
    let mut failed = 0;
    let mut llr = 0.0;
    for s in samples {
        let r = s.residual(secret);
        let mut ok = true;
        for &c in r.coeffs() {
            let p = pmf[residue(c, q) as usize];
            if p == 0.0 {
                ok = false;
            } else {
                llr += (p * q as f64).ln();
            }
        }
        failed += usize::from(!ok);
    }
    let total = samples.len();
    if failed > 0 {
        return Err(Error::HoldoutFailed { failed, total });
    }
    if total > 0 && llr <= 0.0 {
        return Err(Error::HoldoutFailed { failed: total, total });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AttackConfig {
    pub reduction: ReductionConfig,
    pub chi0: CoefficientDistribution,
    /// Most initial samples the reduction may consume.
    pub max_inputs: usize,
    /// Reduced samples per subproblem; `None` uses [`min_samples`], or 200 when that is undefined.
    pub target_reduced: Option<usize>,
    pub scoring: Scoring,
    /// Fresh samples used to verify the recovered secret.
    pub holdout: usize,
    pub parallel: bool,
}

impl AttackConfig {
    pub fn new(reduction: ReductionConfig, chi0: CoefficientDistribution) -> Self {
        AttackConfig {
            reduction,
            chi0,
            max_inputs: 1 << 20,
            target_reduced: None,
            scoring: Scoring::Auto,
            holdout: 32,
            parallel: true,
        }
    }

    pub fn reduced_target(&self) -> usize {
        self.target_reduced.unwrap_or_else(|| {
            let r = self.reduction;
            let depth = r.active_tables() as u32;
            min_samples(&self.chi0, depth, r.block_size(), r.ring().q()).unwrap_or(200)
        })
    }
}

#[derive(Clone, Debug)]
pub struct AttackReport {
    pub secret: RingElement,
    pub reports: Vec<HypothesisReport>,
    pub stats: TableStats,
    pub reduced: usize,
    pub reduction_time: Duration,
    pub solve_time: Duration,
    pub reconstruct_time: Duration,
}

/// Full attack: reduce to the subring, split into `n/B` subproblems, solve each by
/// exhaustive search, reconstruct `s`, and verify it on fresh samples from `source`.
pub fn ring_bkw(source: &mut dyn SampleSource, config: &AttackConfig) -> Result<AttackReport> {
    let rc = config.reduction;
    let need = config.reduced_target();
    let start = Instant::now();
    let mut reducer = Reducer::new(rc);
    let mut reduced: Vec<Sample> = Vec::new();
    while reduced.len() < need {
        if reducer.inputs() >= config.max_inputs {
            return Err(Error::Starved { got: reduced.len(), need });
        }
        let Some(x) = source.next_sample() else {
            return Err(Error::Starved { got: reduced.len(), need });
        };
        reduced.extend(reducer.feed_input(&x).into_iter().filter(|s| !s.a.is_zero()));
    }
    reduced.truncate(need);
    let reduction_time = start.elapsed();

    let start = Instant::now();
    let tower = rc.tower();
    let coset = Coset::new(RingElement::one(rc.ring()), tower)?;
    let subs = build_subproblems(&reduced, &coset, &config.chi0)?;
    let solve = |p: &SubProblem| hypothesis_test(p, config.scoring, config.parallel);
    let reports: Vec<HypothesisReport> = if config.parallel {
        subs.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        subs.iter().map(solve).collect::<Result<_>>()?
    };
    if let Some(j) = reports.iter().position(|r| !r.unique) {
        return Err(Error::NonUnique { j });
    }
    let solve_time = start.elapsed();

    let start = Instant::now();
    let solutions: Vec<RingElement> = reports.iter().map(|r| r.best.clone()).collect();
    let secret = reconstruct_secret_unit(&solutions, &tower)?;
    let reconstruct_time = start.elapsed();

    let holdout = draw_fresh(source, config.holdout)?;
    holdout_check(&secret, &holdout, &config.chi0)?;
    Ok(AttackReport {
        secret,
        reports,
        stats: reducer.stats(),
        reduced: reduced.len(),
        reduction_time,
        solve_time,
        reconstruct_time,
    })
}

fn draw_fresh(source: &mut dyn SampleSource, count: usize) -> Result<Vec<Sample>> {
    let holdout: Vec<Sample> = std::iter::from_fn(|| source.next_sample()).take(count).collect();
    if holdout.len() < count {
        return Err(Error::Starved { got: holdout.len(), need: count });
    }
    Ok(holdout)
}

#[derive(Clone, Debug)]
pub struct SqrtConfig {
    pub chi0: CoefficientDistribution,
    /// Most draws the rejection filter may consume.
    pub budget: usize,
    /// Accepted samples; `None` uses [`min_samples`] at depth 0.
    pub samples: Option<usize>,
    pub holdout: usize,
}

#[derive(Clone, Debug)]
pub struct SqrtReport {
    pub secret: RingElement,
    pub draws: usize,
    pub accepted: usize,
    pub reports: Vec<HypothesisReport>,
}

/// Square-root search: keep only samples with `a` in the index-2 subring, solve the two
/// half-dimension subproblems exhaustively, and reconstruct.
pub fn sqrt_search(source: &mut dyn SampleSource, ring: RingParams, config: &SqrtConfig) -> Result<SqrtReport> {
    let q = ring.q();
    if support_size(&config.chi0, 0) as u64 >= q {
        return Err(Error::Precondition("error support must be a proper subset of F_q".into()));
    }
    let tower = TowerParams::new(ring, ring.n())?;
    let b = tower.subring_dim();
    let need = config
        .samples
        .or_else(|| min_samples(&config.chi0, 0, b, q))
        .expect("support checked above");
    let mut accepted = Vec::with_capacity(need);
    let mut draws = 0;
    while accepted.len() < need {
        if draws >= config.budget {
            return Err(Error::BudgetExceeded(draws));
        }
        let x = source.next_sample().ok_or(Error::Starved { got: accepted.len(), need })?;
        draws += 1;
        if !x.a.is_zero() && tower.is_subring_supported(&x.a) {
            accepted.push(x);
        }
    }
    let coset = Coset::new(RingElement::one(ring), tower)?;
    let subs = build_subproblems(&accepted, &coset, &config.chi0)?;
    let reports: Vec<HypothesisReport> =
        subs.par_iter().map(|p| hypothesis_test(p, Scoring::Support, true)).collect::<Result<_>>()?;
    if let Some(j) = reports.iter().position(|r| !r.unique) {
        return Err(Error::NonUnique { j });
    }
    let solutions: Vec<RingElement> = reports.iter().map(|r| r.best.clone()).collect();
    let secret = reconstruct_secret_unit(&solutions, &tower)?;
    let holdout = draw_fresh(source, config.holdout)?;
    holdout_check(&secret, &holdout, &config.chi0)?;
    Ok(SqrtReport { secret, draws, accepted: accepted.len(), reports })
}

/// Terms of the cost formula `t_B + (n/B)·t_R + N·n·log2(q)·unit_cost`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub reduction: f64,
    pub solve: f64,
    pub overhead: f64,
    pub total: f64,
}

/// Composes measured reduction time `tb` and per-subproblem solve time `tr`; the
/// polynomial term is `N·n·log2(q)` operations at `unit_cost` seconds each.
pub fn composition_estimate(tb: f64, tr: f64, n: usize, b: usize, samples: usize, q: u64, unit_cost: f64) -> CostReport {
    let solve = (n / b) as f64 * tr;
    let overhead = samples as f64 * n as f64 * (q as f64).log2() * unit_cost;
    CostReport { reduction: tb, solve, overhead, total: tb + solve + overhead }
}
