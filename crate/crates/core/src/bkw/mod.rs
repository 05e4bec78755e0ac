//! BKW reduction phase over the prioritized ζ-basis.
//!
//! Three variants share one table cascade and differ in which rotations of each
//! input are fed and in how block contents are keyed:
//!
//! * [`Variant::RingBlind`] feeds each input once and keys on block content up to sign.
//! * [`Variant::Traditional`] feeds all `n` rotations `ζ^j·(a, b)` and keys up to sign.
//! * [`Variant::Advanced`] feeds `n/B` rotations and keys on the orbit of the block
//!   under `±ζ^{t·n/B}`, storing one representative per orbit.
//!
//! Tables `1..n/B-1` each zero one block of `B` prioritized coefficients; samples
//! surviving the last active table have `a ∈ S_q` and land in the terminal table.

mod canon;
mod snapshot;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use canon::{canonicalize, key_order, BlockAction, CanonicalKey};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::error::{Error, Result};
use crate::fqring::modulus::residue;
use crate::fqring::RingParams;
use crate::sampling::{Sample, SampleSource};
use crate::tower::{prioritized_order, PrioritizedPermutation, TowerParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    RingBlind,
    Traditional,
    Advanced,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::RingBlind, Variant::Traditional, Variant::Advanced];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::RingBlind => "ring-blind",
            Variant::Traditional => "traditional",
            Variant::Advanced => "advanced",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring-blind" | "ring_blind" | "blind" => Ok(Variant::RingBlind),
            "traditional" | "alg3" => Ok(Variant::Traditional),
            "advanced" | "alg2" => Ok(Variant::Advanced),
            _ => Err(Error::InvalidParams(format!("unknown variant '{s}'"))),
        }
    }
}

/// One-difference or all-differences collision handling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Emit one difference per hit; store only on a miss.
    Od,
    /// Store every sample; on a hit emit the difference against every row entry.
    Ad,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Od => "od",
            Mode::Ad => "ad",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "od" => Ok(Mode::Od),
            "ad" => Ok(Mode::Ad),
            _ => Err(Error::InvalidParams(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    tower: TowerParams,
    variant: Variant,
    mode: Mode,
}

impl ReductionConfig {
    /// `block_size` must divide `n` and be smaller than it; since `n` is a power of two
    /// this also makes it a power of two, as advanced keying requires.
    pub fn new(ring: RingParams, block_size: usize, variant: Variant, mode: Mode) -> Result<Self> {
        if block_size == 0 || !ring.n().is_multiple_of(block_size) {
            return Err(Error::InvalidParams(format!(
                "block size {block_size} does not divide n = {}",
                ring.n()
            )));
        }
        if block_size == ring.n() {
            return Err(Error::InvalidParams("block size equal to n leaves nothing to reduce".into()));
        }
        let tower = TowerParams::with_subring_dim(ring, block_size)?;
        Ok(ReductionConfig { tower, variant, mode })
    }

    pub fn tower(&self) -> TowerParams {
        self.tower
    }

    pub fn ring(&self) -> RingParams {
        self.tower.ring()
    }

    pub fn block_size(&self) -> usize {
        self.tower.subring_dim()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of tables that match (`n/B - 1`); the terminal table comes after them.
    pub fn active_tables(&self) -> usize {
        self.ring().n() / self.block_size() - 1
    }

    /// Rotations `ζ^j` of each input fed to table 1.
    pub fn rotations_per_input(&self) -> usize {
        match self.variant {
            Variant::RingBlind => 1,
            Variant::Traditional => self.ring().n(),
            Variant::Advanced => self.ring().n() / self.block_size(),
        }
    }

    /// Maximum rows a single table can hold: `(q^B - 1)/2`, or `(q^B - 1)/(2B)` with advanced keying.
    pub fn row_bound(&self) -> u128 {
        let q = self.ring().q() as u128;
        let b = self.block_size() as u32;
        let nonzero = q.checked_pow(b).map(|x| x - 1).unwrap_or(u128::MAX);
        match self.variant {
            Variant::Advanced => nonzero / (2 * b as u128),
            _ => nonzero / 2,
        }
    }
}

/// Hash key for one table row.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum TableKey {
    /// Residues packed base q when `q^B` fits in 64 bits.
    Packed(u64),
    Wide(Box<[i64]>),
}

impl TableKey {
    fn new(key: &[i64], q: u64, packable: bool) -> Self {
        if packable {
            let mut acc = 0u64;
            for &c in key {
                acc = acc * q + residue(c, q);
            }
            TableKey::Packed(acc)
        } else {
            TableKey::Wide(key.into())
        }
    }
}

/// One collision table of the cascade.
#[derive(Clone, Debug, Default)]
pub struct BkwTable {
    pub(crate) rows: HashMap<TableKey, Vec<Sample>>,
    arrivals: usize,
    hits: usize,
    stored: usize,
}

impl BkwTable {
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Samples held; equals `rows()` in OD mode.
    pub fn stored(&self) -> usize {
        self.stored
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn arrivals(&self) -> usize {
        self.arrivals
    }

    /// Every stored sample, in no particular order.
    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.rows.values().flatten()
    }
}

/// Final table: collects samples with `a ∈ S_q`, deduplicated up to the signed
/// rotations `±ζ^{t·n/B}` that preserve the subring.
#[derive(Clone, Debug, Default)]
pub struct TerminalTable {
    samples: Vec<Sample>,
    seen: HashSet<Vec<i64>>,
    arrivals: usize,
}

impl TerminalTable {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn arrivals(&self) -> usize {
        self.arrivals
    }

    fn orbit_form(sample: &Sample, step: usize) -> Vec<i64> {
        let n = sample.a.params().n();
        (0..2 * n / step)
            .map(|t| {
                let r = sample.rotated((t * step) as i64);
                let mut v = r.a.into_coeffs();
                v.extend_from_slice(r.b.coeffs());
                v
            })
            .min()
            .expect("nonempty orbit")
    }

    /// Returns whether the sample was new.
    fn insert(&mut self, sample: Sample, step: usize) -> bool {
        self.arrivals += 1;
        if self.seen.insert(Self::orbit_form(&sample, step)) {
            self.samples.push(sample);
            true
        } else {
            false
        }
    }
}

/// Aggregate counters of a reduction run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableStats {
    /// Rows per active table.
    pub rows: Vec<usize>,
    /// Stored samples per active table.
    pub stored: Vec<usize>,
    pub hits: Vec<usize>,
    pub arrivals: Vec<usize>,
    /// Sum of `rows`, not counting the terminal table.
    pub total_rows: usize,
    /// Distinct samples in the terminal table.
    pub terminal: usize,
    /// Initial samples consumed.
    pub inputs: usize,
    /// Samples (rotations included) sent to table 1.
    pub fed: usize,
    /// Wall time spent feeding.
    pub elapsed: Duration,
}

/// A reduction in progress: owns its tables and processes inputs sequentially.
#[derive(Clone, Debug)]
pub struct Reducer {
    config: ReductionConfig,
    perm: Arc<PrioritizedPermutation>,
    actions: Vec<BlockAction>,
    tables: Vec<BkwTable>,
    terminal: TerminalTable,
    packable: bool,
    inputs: usize,
    fed: usize,
    elapsed: Duration,
}

impl Reducer {
    pub fn new(config: ReductionConfig) -> Self {
        let ring = config.ring();
        let b = config.block_size();
        let perm = prioritized_order(ring);
        let actions = (0..config.active_tables()).map(|i| BlockAction::new(&perm, i, b)).collect();
        let packable = (ring.q() as u128)
            .checked_pow(b as u32)
            .is_some_and(|v| v <= u64::MAX as u128);
        Reducer {
            config,
            perm,
            actions,
            tables: vec![BkwTable::default(); config.active_tables()],
            terminal: TerminalTable::default(),
            packable,
            inputs: 0,
            fed: 0,
            elapsed: Duration::ZERO,
        }
    }

    pub fn config(&self) -> &ReductionConfig {
        &self.config
    }

    pub fn tables(&self) -> &[BkwTable] {
        &self.tables
    }

    pub fn terminal(&self) -> &TerminalTable {
        &self.terminal
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn stats(&self) -> TableStats {
        table_stats(&self.tables, &self.terminal, self.inputs, self.fed, self.elapsed)
    }

    /// Feeds every rotation of one initial sample that the variant calls for.
    /// Returns the samples newly added to the terminal table.
    pub fn feed_input(&mut self, sample: &Sample) -> Vec<Sample> {
        let start = Instant::now();
        self.inputs += 1;
        let mut out = Vec::new();
        for j in 0..self.config.rotations_per_input() {
            out.extend(self.feed(sample.rotated(j as i64)));
        }
        self.elapsed += start.elapsed();
        out
    }

    /// Sends one sample to table 1 and runs the resulting cascade to completion.
    /// Returns the samples newly added to the terminal table.
    pub fn feed(&mut self, sample: Sample) -> Vec<Sample> {
        self.fed += 1;
        let mut new_terminal = Vec::new();
        let mut stack = vec![(sample, 0usize)];
        while let Some((s, idx)) = stack.pop() {
            if idx == self.tables.len() {
                let step = self.config.ring().n() / self.config.block_size();
                if self.terminal.insert(s.clone(), step) {
                    new_terminal.push(s);
                }
                continue;
            }
            let emitted = self.process(s, idx);
            stack.extend(emitted.into_iter().rev().map(|e| (e, idx + 1)));
        }
        new_terminal
    }

    fn block_of(&self, sample: &Sample, idx: usize) -> Vec<i64> {
        let b = self.config.block_size();
        let coeffs = sample.a.coeffs();
        self.perm.order()[idx * b..(idx + 1) * b].iter().map(|&e| coeffs[e]).collect()
    }

    /// Handles one arrival at active table `idx`; returns what moves on to `idx + 1`.
    fn process(&mut self, sample: Sample, idx: usize) -> Vec<Sample> {
        let n = self.config.ring().n();
        let q = self.config.ring().q();
        self.tables[idx].arrivals += 1;
        let block = self.block_of(&sample, idx);
        if block.iter().all(|&c| c == 0) {
            return vec![sample];
        }
        let key = canonicalize(&block, self.config.variant, Some(&self.actions[idx]), n);
        let mut out = Vec::new();
        let normalized = sample.rotated(key.zeta_exponent(n));
        if let Some((rot, sign)) = key.partner {
            // ±ζ^{n/B} acts freely on nonzero blocks, so this only fires on degenerate input
            let other = sample.rotated(canon::fold_sign(rot, sign, n));
            out.push(normalized.difference(&other));
        }
        let table_key = TableKey::new(&key.key, q, self.packable);
        let mode = self.config.mode;
        let table = &mut self.tables[idx];
        let row = table.rows.entry(table_key).or_default();
        if row.is_empty() {
            row.push(normalized);
            table.stored += 1;
        } else {
            table.hits += 1;
            match mode {
                Mode::Od => out.push(row[0].difference(&normalized)),
                Mode::Ad => {
                    out.extend(row.iter().map(|w| w.difference(&normalized)));
                    row.push(normalized);
                    table.stored += 1;
                }
            }
        }
        assert!(
            table.rows.len() as u128 <= self.config.row_bound(),
            "table {} exceeded its row bound",
            idx + 1
        );
        out
    }
}

/// Aggregates per-table counters.
pub fn table_stats(
    tables: &[BkwTable],
    terminal: &TerminalTable,
    inputs: usize,
    fed: usize,
    elapsed: Duration,
) -> TableStats {
    let rows: Vec<usize> = tables.iter().map(BkwTable::rows).collect();
    TableStats {
        total_rows: rows.iter().sum(),
        rows,
        stored: tables.iter().map(BkwTable::stored).collect(),
        hits: tables.iter().map(BkwTable::hits).collect(),
        arrivals: tables.iter().map(BkwTable::arrivals).collect(),
        terminal: terminal.len(),
        inputs,
        fed,
        elapsed,
    }
}

/// Feeds `count` initial samples from `source` through a fresh reducer.
///
/// Returns the terminal samples and run statistics; if the source runs dry first the
/// partial statistics travel inside [`Error::SourceExhausted`].
pub fn run_reduction(
    source: &mut dyn SampleSource,
    count: usize,
    config: ReductionConfig,
) -> Result<(Vec<Sample>, TableStats)> {
    let mut reducer = Reducer::new(config);
    for _ in 0..count {
        let Some(sample) = source.next_sample() else {
            return Err(Error::SourceExhausted { stats: Box::new(reducer.stats()) });
        };
        reducer.feed_input(&sample);
    }
    let stats = reducer.stats();
    Ok((reducer.terminal.samples, stats))
}
