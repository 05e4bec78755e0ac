use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ringbkw::bkw::{run_reduction, Mode, ReductionConfig, Variant};
use ringbkw::fqring::{modulus::residue, RingElement, RingParams};
use ringbkw::harness::seeded_oracle;
use ringbkw::reduce::{build_subproblems, reconstruct_secret, reduce_sample, subproblem_secret};
use ringbkw::sampling::{CoefficientDistribution, Coset, ErrorDistribution, LweOracle, Sample};
use ringbkw::solve::{hypothesis_test, sqrt_search, Scoring, SqrtConfig};
use ringbkw::tower::{to_subring_ring, TowerParams};

fn ring(n: usize, q: u64) -> RingParams {
    RingParams::new(n, q).unwrap()
}

fn chi(spec: &str, q: u64) -> CoefficientDistribution {
    CoefficientDistribution::parse(spec, q).unwrap()
}

/// Pearson statistic of observed counts against a dense pmf, pooling cells with
/// expected count below 5.
fn chi_square_p(counts: &[u64], pmf: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(pmf) {
        let e = p * total as f64;
        if e < 5.0 {
            pool_obs += c as f64;
            pool_exp += e;
            continue;
        }
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp.max(1e-12);
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn terminal_residuals_are_bounded_by_depth() {
    for variant in Variant::ALL {
        let chi0 = chi("uniform:-1,0,1", 17);
        let o = seeded_oracle(ring(8, 17), chi0, 21).unwrap();
        let rc = ReductionConfig::new(o.ring(), 2, variant, Mode::Od).unwrap();
        let (terminal, _) = run_reduction(&mut o.clone(), 3000, rc).unwrap();
        assert!(!terminal.is_empty());
        for s in &terminal {
            let bound = 1i64 << s.depth;
            assert!(s.residual(o.secret()).max_abs() <= bound, "{variant}");
        }
    }
}

#[test]
fn reduced_errors_are_not_inflated() {
    // a0 = 1: each reduced residual coefficient is a signed coefficient of the original error
    let p = ring(16, 17);
    let chi0 = chi("pmf:-2=0.1,-1=0.2,0=0.4,1=0.2,2=0.1", 17);
    let tower = TowerParams::with_subring_dim(p, 4).unwrap();
    let coset = Coset::new(RingElement::one(p), tower).unwrap();
    let mut o = LweOracle::new(
        RingElement::random(p, &mut ChaCha20Rng::seed_from_u64(1)),
        ErrorDistribution::new(chi0.clone(), p).unwrap(),
        2,
    )
    .unwrap()
    .restricted_to(coset.clone())
    .unwrap();
    let mut counts = vec![0u64; 17];
    for _ in 0..3000 {
        let x = o.draw();
        for j in 0..tower.stride() {
            let r = reduce_sample(&x, j, &coset).unwrap();
            let c = subproblem_secret(o.secret(), j, &coset).unwrap();
            for v in to_subring_ring(&r.residual(&c), &tower).unwrap().coeffs() {
                counts[residue(*v, 17) as usize] += 1;
            }
        }
    }
    let pval = chi_square_p(&counts, &chi0.depth_pmf(0));
    assert!(pval > 0.01, "p = {pval}");
}

#[test]
fn end_to_end_identity_for_random_cosets() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for (n, q, b) in [(8, 17, 2), (16, 17, 4), (16, 97, 8)] {
        let p = ring(n, q);
        let tower = TowerParams::with_subring_dim(p, b).unwrap();
        let mut done = 0;
        while done < 100 {
            let Ok(coset) = Coset::new(RingElement::random(p, &mut rng), tower) else {
                continue;
            };
            let s = RingElement::random(p, &mut rng);
            let c: Vec<RingElement> = (0..tower.stride())
                .map(|j| to_subring_ring(&subproblem_secret(&s, j, &coset).unwrap(), &tower).unwrap())
                .collect();
            assert_eq!(reconstruct_secret(&c, &coset).unwrap(), s);
            done += 1;
        }
    }
}

#[test]
fn support_mode_is_exact_on_zero_error() {
    let p = ring(8, 13);
    let chi0 = chi("point:0", 13);
    let tower = TowerParams::with_subring_dim(p, 2).unwrap();
    let coset = Coset::new(RingElement::one(p), tower).unwrap();
    let mut o = seeded_oracle(p, chi0.clone(), 4).unwrap().restricted_to(coset.clone()).unwrap();
    let samples: Vec<Sample> = (0..2).map(|_| o.draw()).collect();
    for sp in build_subproblems(&samples, &coset, &chi0).unwrap() {
        let r = hypothesis_test(&sp, Scoring::Support, true).unwrap();
        let planted = to_subring_ring(&subproblem_secret(o.secret(), sp.j, &coset).unwrap(), &tower).unwrap();
        assert!(r.unique);
        assert_eq!(r.best, planted);
    }
}

#[test]
fn solving_order_does_not_matter() {
    let p = ring(8, 17);
    let chi0 = chi("uniform:-1,0,1", 17);
    let tower = TowerParams::with_subring_dim(p, 2).unwrap();
    let coset = Coset::new(RingElement::one(p), tower).unwrap();
    let mut o = seeded_oracle(p, chi0.clone(), 5).unwrap().restricted_to(coset.clone()).unwrap();
    let samples: Vec<Sample> = (0..40).map(|_| o.draw()).collect();
    let subs = build_subproblems(&samples, &coset, &chi0).unwrap();
    let forward: Vec<_> = subs.iter().map(|s| hypothesis_test(s, Scoring::Likelihood, true).unwrap()).collect();
    let mut backward: Vec<_> = subs.iter().rev().map(|s| hypothesis_test(s, Scoring::Likelihood, false).unwrap()).collect();
    backward.reverse();
    assert_eq!(forward, backward);
}

#[test]
fn sqrt_acceptance_rate() {
    for (n, q) in [(2usize, 13u64), (4, 5), (4, 13), (2, 7)] {
        let chi0 = chi("uniform:-1,0,1", q);
        let config = SqrtConfig { chi0: chi0.clone(), budget: usize::MAX, samples: Some(60), holdout: 0 };
        let mut o = seeded_oracle(ring(n, q), chi0, 6).unwrap();
        let r = sqrt_search(&mut o, ring(n, q), &config).unwrap();
        // zero-a draws are rejected too, so the rate is q^{-n/2} - q^{-n}
        let rate = (q as f64).powf(-(n as f64) / 2.0) - (q as f64).powf(-(n as f64));
        let expected = r.draws as f64 * rate;
        let sigma = (r.draws as f64 * rate * (1.0 - rate)).sqrt();
        assert!(r.draws >= 60);
        assert!(((r.accepted as f64) - expected).abs() <= 3.0 * sigma + 1.0, "n={n} q={q} draws={} accepted={}", r.draws, r.accepted);
    }
}

#[test]
fn sqrt_rate_over_many_draws() {
    // at least 10^4 draws: rejection rate for n = 4, q = 13 is q^{-2}
    let chi0 = chi("uniform:-1,0,1", 13);
    let config = SqrtConfig { chi0: chi0.clone(), budget: usize::MAX, samples: Some(80), holdout: 0 };
    let mut o = seeded_oracle(ring(4, 13), chi0, 7).unwrap();
    let r = sqrt_search(&mut o, ring(4, 13), &config).unwrap();
    assert!(r.draws >= 10_000);
    let rate = 1.0 / 169.0 - 1.0 / 28561.0;
    let sigma = (r.draws as f64 * rate * (1.0 - rate)).sqrt();
    assert!((r.accepted as f64 - r.draws as f64 * rate).abs() <= 3.0 * sigma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduce_sample_is_additive(seed in any::<u64>(), j in 0usize..4) {
        let p = ring(16, 17);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a0 = loop {
            let a0 = RingElement::random(p, &mut rng);
            if Coset::new(a0.clone(), tower).is_ok() {
                break a0;
            }
        };
        let coset = Coset::new(a0, tower).unwrap();
        let x = Sample::new(coset.random(&mut rng), RingElement::random(p, &mut rng));
        let y = Sample::new(coset.random(&mut rng), RingElement::random(p, &mut rng));
        let sum = Sample::new(&x.a + &y.a, &x.b + &y.b);
        let rx = reduce_sample(&x, j, &coset).unwrap();
        let ry = reduce_sample(&y, j, &coset).unwrap();
        let rs = reduce_sample(&sum, j, &coset).unwrap();
        prop_assert_eq!(rs.a, &rx.a + &ry.a);
        prop_assert_eq!(rs.b, &rx.b + &ry.b);
    }

    #[test]
    fn reductions_are_deterministic(seed in 0u64..1000) {
        let chi0 = chi("gaussian:1.5", 17);
        let rc = ReductionConfig::new(ring(16, 17), 4, Variant::Advanced, Mode::Od).unwrap();
        let run = || run_reduction(&mut seeded_oracle(ring(16, 17), chi0.clone(), seed).unwrap(), 200, rc).unwrap();
        let (t1, s1) = run();
        let (t2, s2) = run();
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(s1.rows, s2.rows);
    }
}
