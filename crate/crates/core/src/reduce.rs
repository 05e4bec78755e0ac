//! Splitting a coset-restricted Ring-LWE instance into `m/k` subring instances,
//! and recovering the full secret from their solutions.
//!
//! For `a = a0·u` with `u ∈ S_q`, the pair `(T̂(a), T̂(ζ^j b))` (with `T̂` the
//! normalized trace) is a subring sample for the secret `c_j = T̂(a0 ζ^j s)/T̂(a0)`.
//! Knowing every `c_j` pins down `s` through an `n×n` linear system over F_q.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::fqring::{RingElement, RingParams};
use crate::linalg::solve_mod;
use crate::sampling::{CoefficientDistribution, Coset, Sample};
use crate::tower::{normalized_trace, subring_extract, to_subring_ring, TowerParams};

/// One subring Ring-LWE instance: samples over `F_q[y]/(y^B + 1)` for the secret `c_j`.
#[derive(Clone, Debug)]
pub struct SubProblem {
    pub j: usize,
    pub tower: TowerParams,
    /// Samples in the standalone subring ring; `depth` carries over from the source sample.
    pub samples: Vec<Sample>,
    /// Per-coefficient error distribution at depth 0; depth `L` errors are its `2^L`-fold signed convolution.
    pub chi0: CoefficientDistribution,
}

impl SubProblem {
    pub fn subring_params(&self) -> RingParams {
        self.tower.subring_params()
    }

    /// Writes the line-oriented text form read by [`SubProblem::read_text`].
    ///
    /// ```text
    /// subproblem n=16 q=17 B=4 j=0 count=2
    /// chi0 gaussian:1.5
    /// 3 1 0 -2 5 ; 4 4 -1 0
    /// 2 0 7 1 1 ; -3 2 2 8
    /// ```
    /// Each sample line is the depth, the `B` centered coefficients of `a′`, a `;`,
    /// and the `B` coefficients of `b′`.
    pub fn to_text(&self) -> String {
        let ring = self.tower.ring();
        let mut out = String::new();
        writeln!(
            out,
            "subproblem n={} q={} B={} j={} count={}",
            ring.n(),
            ring.q(),
            self.tower.subring_dim(),
            self.j,
            self.samples.len()
        )
        .unwrap();
        writeln!(out, "chi0 {}", self.chi0).unwrap();
        for s in &self.samples {
            let join = |x: &RingElement| x.coeffs().iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
            writeln!(out, "{} {} ; {}", s.depth, join(&s.a), join(&s.b)).unwrap();
        }
        out
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| Error::Format("unexpected end of subproblem".into()))?.map_err(Error::from)
        };
        let header = next()?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("subproblem") {
            return Err(Error::Format("missing subproblem header".into()));
        }
        let mut get = |name: &str| -> Result<u64> {
            let f = fields.next().ok_or_else(|| Error::Format(format!("header lacks {name}")))?;
            f.strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad header field '{f}'")))
        };
        let (n, q, b, j, count) = (get("n")?, get("q")?, get("B")?, get("j")?, get("count")?);
        let ring = RingParams::new(n as usize, q)?;
        let tower = TowerParams::with_subring_dim(ring, b as usize)?;
        let chi_line = next()?;
        let spec = chi_line
            .strip_prefix("chi0 ")
            .ok_or_else(|| Error::Format("missing chi0 line".into()))?;
        let chi0 = CoefficientDistribution::parse(spec.trim(), q)?;
        let sub = tower.subring_params();
        let mut samples = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let line = next()?;
            let (left, right) = line
                .split_once(';')
                .ok_or_else(|| Error::Format(format!("sample line without ';': {line}")))?;
            let parse = |s: &str| -> Result<Vec<i64>> {
                s.split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Format(format!("bad integer '{t}'"))))
                    .collect()
            };
            let mut lhs = parse(left)?;
            if lhs.len() != sub.n() + 1 {
                return Err(Error::Format(format!("expected depth and {} coefficients", sub.n())));
            }
            let depth = u32::try_from(lhs.remove(0)).map_err(|_| Error::Format("bad depth".into()))?;
            let rhs = parse(right)?;
            let mut s = Sample::new(RingElement::from_coeffs(sub, &lhs)?, RingElement::from_coeffs(sub, &rhs)?);
            s.depth = depth;
            samples.push(s);
        }
        Ok(SubProblem { j: j as usize, tower, samples, chi0 })
    }
}

/// `(T̂(a), T̂(ζ^j b))` for a sample whose `a` lies in the coset.
pub fn reduce_sample(x: &Sample, j: usize, coset: &Coset) -> Result<Sample> {
    if !coset.contains(&x.a) {
        return Err(Error::NotInCoset);
    }
    let tower = coset.tower();
    let a = normalized_trace(&x.a, tower);
    let b = normalized_trace(&x.b.mul_zeta_pow(j as i64), tower);
    Ok(Sample { a, b, depth: x.depth })
}

/// The secret `c_j = T̂(a0 ζ^j s)/T̂(a0)` of subproblem `j`, as a full-ring element of `S_q`.
pub fn subproblem_secret(s: &RingElement, j: usize, coset: &Coset) -> Result<RingElement> {
    let tower = coset.tower();
    let a0 = coset.a0();
    let num = to_subring_ring(&normalized_trace(&(a0 * &s.mul_zeta_pow(j as i64)), tower), tower)?;
    let den = to_subring_ring(&normalized_trace(a0, tower), tower)?;
    let c = num.checked_mul(&den.inverse()?)?;
    crate::tower::from_subring_ring(&c, tower)
}

/// One subproblem per `j ∈ [0, m/k)`, each holding every input sample.
pub fn build_subproblems(samples: &[Sample], coset: &Coset, chi0: &CoefficientDistribution) -> Result<Vec<SubProblem>> {
    let tower = *coset.tower();
    if samples.iter().any(|x| !coset.contains(&x.a)) {
        return Err(Error::NotInCoset);
    }
    // a′ does not depend on j
    let shared_a: Vec<RingElement> = samples
        .iter()
        .map(|x| to_subring_ring(&normalized_trace(&x.a, &tower), &tower))
        .collect::<Result<_>>()?;
    (0..tower.stride())
        .map(|j| {
            let reduced = samples
                .iter()
                .zip(&shared_a)
                .map(|(x, a)| {
                    let b = to_subring_ring(&normalized_trace(&x.b.mul_zeta_pow(j as i64), &tower), &tower)?;
                    Ok(Sample { a: a.clone(), b, depth: x.depth })
                })
                .collect::<Result<_>>()?;
            Ok(SubProblem { j, tower, samples: reduced, chi0: chi0.clone() })
        })
        .collect()
}

/// Recovers `s` from the subproblem secrets `c_j`, given as subring-ring elements in `j` order.
pub fn reconstruct_secret(solutions: &[RingElement], coset: &Coset) -> Result<RingElement> {
    let tower = *coset.tower();
    let ring = tower.ring();
    let n = ring.n();
    let q = ring.q();
    if solutions.len() != tower.stride() {
        return Err(Error::InvalidParams(format!(
            "expected {} subproblem solutions, got {}",
            tower.stride(),
            solutions.len()
        )));
    }
    for c in solutions {
        tower.subring_params().check_same(&c.params())?;
    }
    let a0 = coset.a0();
    let t_a0 = to_subring_ring(&normalized_trace(a0, &tower), &tower)?;
    let mut rhs = Vec::with_capacity(n);
    for c in solutions {
        rhs.extend(c.checked_mul(&t_a0)?.residues());
    }
    // column i is the image of ζ^i under s ↦ (T̂(a0 ζ^j s))_j
    let mut matrix = vec![vec![0u64; n]; n];
    for i in 0..n {
        let mut row = 0;
        for j in 0..tower.stride() {
            let image = normalized_trace(&a0.mul_zeta_pow((i + j) as i64), &tower);
            for v in subring_extract(&image, &tower)? {
                matrix[row][i] = crate::fqring::modulus::residue(v, q);
                row += 1;
            }
        }
    }
    let s = solve_mod(matrix, rhs, q)?;
    let s: Vec<i64> = s.into_iter().map(|v| v as i64).collect();
    RingElement::from_coeffs(ring, &s)
}

/// The `a0 = 1` case, where the system is a signed permutation: `c_j[i] = ±s_{i·(n/B) - j}`.
pub fn reconstruct_secret_unit(solutions: &[RingElement], tower: &TowerParams) -> Result<RingElement> {
    let ring = tower.ring();
    let n = ring.n();
    let stride = tower.stride();
    if solutions.len() != stride {
        return Err(Error::InvalidParams(format!("expected {stride} subproblem solutions, got {}", solutions.len())));
    }
    let mut s = vec![0i64; n];
    for (j, c) in solutions.iter().enumerate() {
        tower.subring_params().check_same(&c.params())?;
        for (i, &v) in c.coeffs().iter().enumerate() {
            let e = (i * stride) as i64 - j as i64;
            if e >= 0 {
                s[e as usize] = v;
            } else {
                s[(e + n as i64) as usize] = -v;
            }
        }
    }
    RingElement::from_coeffs(ring, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{ErrorDistribution, LweOracle, SecretDistribution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ring(n: usize, q: u64) -> RingParams {
        RingParams::new(n, q).unwrap()
    }

    fn random_coset(tower: TowerParams, rng: &mut ChaCha20Rng) -> Coset {
        loop {
            if let Ok(c) = Coset::new(RingElement::random(tower.ring(), rng), tower) {
                return c;
            }
        }
    }

    fn subring_secrets(s: &RingElement, coset: &Coset) -> Vec<RingElement> {
        (0..coset.tower().stride())
            .map(|j| to_subring_ring(&subproblem_secret(s, j, coset).unwrap(), coset.tower()).unwrap())
            .collect()
    }

    #[test]
    fn unit_coset_zero_error_is_exact() {
        let p = ring(16, 17);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let coset = Coset::new(RingElement::one(p), tower).unwrap();
        let chi = CoefficientDistribution::point_mass(0, 17).unwrap();
        let mut o = LweOracle::with_random_secret(ErrorDistribution::new(chi, p).unwrap(), &SecretDistribution::Uniform, 1)
            .restricted_to(coset.clone())
            .unwrap();
        let s = o.secret().clone();
        for _ in 0..20 {
            let x = o.draw();
            for j in 0..4 {
                let r = reduce_sample(&x, j, &coset).unwrap();
                let c = subproblem_secret(&s, j, &coset).unwrap();
                assert!(r.residual(&c).is_zero());
                if j == 0 {
                    assert_eq!(r.a, x.a);
                    assert_eq!(r.b, normalized_trace(&x.b, &tower));
                }
            }
        }
    }

    #[test]
    fn general_coset_residual_bounded() {
        let p = ring(16, 17);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let coset = random_coset(tower, &mut rng);
        let chi = CoefficientDistribution::parse("uniform:-1,0,1", 17).unwrap();
        let mut o = LweOracle::with_random_secret(ErrorDistribution::new(chi, p).unwrap(), &SecretDistribution::Uniform, 3)
            .restricted_to(coset.clone())
            .unwrap();
        let s = o.secret().clone();
        for _ in 0..30 {
            let x = o.draw();
            for j in 0..4 {
                let r = reduce_sample(&x, j, &coset).unwrap();
                let c = subproblem_secret(&s, j, &coset).unwrap();
                assert!(r.residual(&c).max_abs() <= 1);
            }
        }
    }

    #[test]
    fn membership_is_checked() {
        let p = ring(8, 17);
        let tower = TowerParams::with_subring_dim(p, 2).unwrap();
        let coset = Coset::new(RingElement::one(p), tower).unwrap();
        let x = Sample::new(RingElement::monomial(p, 1), RingElement::zero(p));
        assert!(matches!(reduce_sample(&x, 0, &coset), Err(Error::NotInCoset)));
    }

    #[test]
    fn unit_coset_n8_b4_split() {
        let p = ring(8, 17);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let coset = Coset::new(RingElement::one(p), tower).unwrap();
        let s = RingElement::from_coeffs(p, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let c = subring_secrets(&s, &coset);
        assert_eq!(c[0].coeffs(), &[1, 3, 5, 7]);
        // ζ·s = -8 + x + 2x² + ... so the even exponents carry -s7, s1, s3, s5
        assert_eq!(c[1].coeffs(), &[-8, 2, 4, 6]);
        assert_eq!(reconstruct_secret_unit(&c, &tower).unwrap(), s);
        assert_eq!(reconstruct_secret(&c, &coset).unwrap(), s);
    }

    #[test]
    fn reconstruction_round_trip_general_a0() {
        let p = ring(16, 17);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for b in [2, 4, 8] {
            let tower = TowerParams::with_subring_dim(p, b).unwrap();
            for _ in 0..10 {
                let coset = random_coset(tower, &mut rng);
                let s = RingElement::random(p, &mut rng);
                assert_eq!(reconstruct_secret(&subring_secrets(&s, &coset), &coset).unwrap(), s);
            }
        }
    }

    #[test]
    fn fast_path_agrees_with_general() {
        let p = ring(32, 97);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for b in [1, 2, 4, 8, 16] {
            let tower = TowerParams::with_subring_dim(p, b).unwrap();
            let coset = Coset::new(RingElement::one(p), tower).unwrap();
            let s = RingElement::random(p, &mut rng);
            let c = subring_secrets(&s, &coset);
            assert_eq!(reconstruct_secret_unit(&c, &tower).unwrap(), reconstruct_secret(&c, &coset).unwrap());
        }
    }

    #[test]
    fn subproblems_share_a_and_have_distinct_secrets() {
        let p = ring(16, 17);
        let tower = TowerParams::with_subring_dim(p, 8).unwrap();
        let coset = Coset::new(RingElement::one(p), tower).unwrap();
        let chi = CoefficientDistribution::point_mass(0, 17).unwrap();
        let mut o = LweOracle::with_random_secret(ErrorDistribution::new(chi.clone(), p).unwrap(), &SecretDistribution::Uniform, 5)
            .restricted_to(coset.clone())
            .unwrap();
        let samples: Vec<Sample> = (0..12).map(|_| o.draw()).collect();
        let subs = build_subproblems(&samples, &coset, &chi).unwrap();
        assert_eq!(subs.len(), 2);
        assert!(subs.iter().all(|sp| sp.samples.len() == 12));
        for (x, y) in subs[0].samples.iter().zip(&subs[1].samples) {
            assert_eq!(x.a, y.a);
        }
        let c = subring_secrets(o.secret(), &coset);
        assert_ne!(c[0], c[1]);
        for (sp, cj) in subs.iter().zip(&c) {
            assert!(sp.samples.iter().all(|x| x.residual(cj).is_zero()));
        }
    }

    #[test]
    fn corrupted_solution_changes_secret() {
        let p = ring(16, 17);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let coset = random_coset(tower, &mut rng);
        let s = RingElement::random(p, &mut rng);
        let mut c = subring_secrets(&s, &coset);
        c[2] = &c[2] + &RingElement::one(c[2].params());
        assert_ne!(reconstruct_secret(&c, &coset).unwrap(), s);
    }

    #[test]
    fn text_format_round_trip() {
        let p = ring(16, 17);
        let tower = TowerParams::with_subring_dim(p, 4).unwrap();
        let coset = Coset::new(RingElement::one(p), tower).unwrap();
        let chi = CoefficientDistribution::parse("uniform:-1,0,1", 17).unwrap();
        let mut o = LweOracle::with_random_secret(ErrorDistribution::new(chi.clone(), p).unwrap(), &SecretDistribution::Uniform, 6)
            .restricted_to(coset.clone())
            .unwrap();
        let samples: Vec<Sample> = (0..5).map(|_| o.draw()).collect();
        let sp = build_subproblems(&samples, &coset, &chi).unwrap().remove(3);
        let back = SubProblem::read_text(sp.to_text().as_bytes()).unwrap();
        assert_eq!(back.j, 3);
        assert_eq!(back.samples, sp.samples);
        assert_eq!(back.chi0.to_string(), chi.to_string());
    }
}
