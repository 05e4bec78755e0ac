use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bkw::{Mode, ReductionConfig, Reducer, Variant};
use crate::fqring::{zeta_gram_matrix, NttPlan, RingElement, RingParams};
use crate::sampling::{CoefficientDistribution, LweOracle};
use crate::tower::{block_zero_prefix, prioritized_order, TowerParams};

use super::experiment::seeded_oracle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
}

impl SuiteResult {
    fn new(name: impl Into<String>) -> Self {
        SuiteResult { name: name.into(), cases: 0, failures: 0 }
    }

    fn record(&mut self, ok: bool) {
        self.cases += 1;
        self.failures += usize::from(!ok);
    }

    fn merge(&mut self, other: SuiteResult) {
        self.cases += other.cases;
        self.failures += other.failures;
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<16} {} cases, {} failures", self.name, self.cases, self.failures)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        write!(f, "{}", if self.passed() { "all suites passed" } else { "some suites failed" })
    }
}

/// `σ_t: ζ ↦ ζ^t` for odd `t`.
pub fn galois_automorphism(x: &RingElement, t: usize) -> RingElement {
    let p = x.params();
    let n = p.n();
    assert!(t % 2 == 1, "automorphisms are indexed by odd residues");
    let mut out = RingElement::zero(p);
    for (i, &c) in x.coeffs().iter().enumerate() {
        if c != 0 {
            out = &out + &RingElement::monomial(p, ((i * t) % (2 * n)) as i64).scale(c);
        }
    }
    out
}

/// Trace as the sum of the `m/k` automorphisms fixing the subring (`t ≡ 1 mod k`).
pub fn galois_trace(x: &RingElement, tower: &TowerParams) -> RingElement {
    let m = tower.ring().m();
    let k = tower.k();
    (1..m)
        .step_by(k)
        .fold(RingElement::zero(x.params()), |acc, t| &acc + &galois_automorphism(x, t))
}

/// Compares `trace_fn` with the automorphism sum on random elements.
pub fn check_trace(
    ring: RingParams,
    k: usize,
    count: usize,
    seed: u64,
    trace_fn: &dyn Fn(&RingElement, &TowerParams) -> RingElement,
) -> SuiteResult {
    let mut r = SuiteResult::new(format!("trace n={} k={k}", ring.n()));
    let tower = TowerParams::new(ring, k).expect("valid tower");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..count {
        let x = RingElement::random(ring, &mut rng);
        r.record(trace_fn(&x, &tower) == galois_trace(&x, &tower));
    }
    r
}

/// ζ-basis Gram matrix under the canonical embedding equals `(n/2)·I`.
pub fn check_gram(ns: &[usize], tol: f64) -> SuiteResult {
    let mut r = SuiteResult::new("gram");
    for &n in ns {
        let g = zeta_gram_matrix(RingParams::new(n, 17).expect("valid ring"));
        let ok = g.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, &v)| {
                let want = if i == j { n as f64 / 2.0 } else { 0.0 };
                (v - want).abs() <= tol
            })
        });
        r.record(ok);
    }
    r
}

/// A zero prefix of `j` prioritized blocks survives rotation by `ζ^{n/B}`, for every
/// power-of-two `B` and every `j`.
pub fn check_prefix_rotation(ring: RingParams, count: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new(format!("prefix n={}", ring.n()));
    let n = ring.n();
    let perm = prioritized_order(ring);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut b = 1;
    while b <= n {
        for j in 0..=n / b {
            for _ in 0..count {
                let mut coeffs = RingElement::random(ring, &mut rng).into_coeffs();
                for &e in &perm.order()[..j * b] {
                    coeffs[e] = 0;
                }
                let x = RingElement::from_coeffs(ring, &coeffs).expect("centered input");
                r.record(block_zero_prefix(&x.mul_zeta_pow((n / b) as i64), j, b));
            }
        }
        b *= 2;
    }
    r
}

/// Fuzzes `configs` seeded reductions and checks every table against its row bound.
pub fn check_row_bounds(configs: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("row-bounds");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..configs {
        let n = [4usize, 8, 16][rng.gen_range(0..3)];
        let q = [3u64, 5, 7, 11, 13, 17][rng.gen_range(0..6)];
        let ring = RingParams::new(n, q).expect("valid ring");
        let mut b = 1 << rng.gen_range(0..n.trailing_zeros());
        while (q as u128).pow(b as u32) > 20_000 {
            b /= 2;
        }
        let variant = Variant::ALL[rng.gen_range(0..3)];
        // all-differences output grows quadratically per table; only fuzz it on roomy tables
        let roomy = (q as u128).pow(b as u32) >= 100;
        let mode = if roomy && rng.gen_bool(0.3) { Mode::Ad } else { Mode::Od };
        let rc = ReductionConfig::new(ring, b, variant, mode).expect("valid config");
        let inputs = match mode {
            Mode::Od => rng.gen_range(50..400),
            Mode::Ad => rng.gen_range(2..5),
        };
        let chi0 = CoefficientDistribution::parse("uniform:-1,0,1", q).expect("valid distribution");
        let mut oracle: LweOracle = seeded_oracle(ring, chi0, rng.gen()).expect("valid oracle");
        let mut reducer = Reducer::new(rc);
        for _ in 0..inputs {
            reducer.feed_input(&oracle.draw());
        }
        let bound = rc.row_bound();
        for t in reducer.tables() {
            r.record(t.rows() as u128 <= bound);
        }
    }
    r
}

/// NTT and schoolbook multiplication agree on random pairs.
pub fn check_ntt(ring: RingParams, pairs: usize, seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new(format!("ntt n={} q={}", ring.n(), ring.q()));
    let Some(plan) = NttPlan::new(ring) else {
        return r;
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let x = RingElement::random(ring, &mut rng);
        let y = RingElement::random(ring, &mut rng);
        r.record(plan.mul(&x, &y).ok() == x.checked_mul(&y).ok());
    }
    r
}

/// The standard self-test: every suite at `scale` times its base case count.
pub fn run_verify(scale: usize, seed: u64) -> VerifyReport {
    let ring = |n, q| RingParams::new(n, q).expect("valid ring");
    let mut trace = SuiteResult::new("trace");
    for (n, k) in [(8, 8), (16, 8), (16, 4), (32, 16)] {
        trace.merge(check_trace(ring(n, 17), k, 100 * scale, seed, &crate::tower::trace));
    }
    let mut prefix = SuiteResult::new("property-8.1");
    for (n, q) in [(8, 17), (16, 17), (32, 7)] {
        prefix.merge(check_prefix_rotation(ring(n, q), 10 * scale, seed));
    }
    let mut ntt = SuiteResult::new("ntt");
    for (n, q) in [(8, 17), (16, 97), (64, 257), (256, 7681)] {
        ntt.merge(check_ntt(ring(n, q), 100 * scale, seed));
    }
    let mut gram = check_gram(&[4, 8, 16, 32, 64], 1e-9);
    gram.name = "gram".into();
    VerifyReport { suites: vec![trace, gram, prefix, check_row_bounds(20 * scale, seed), ntt] }
}
