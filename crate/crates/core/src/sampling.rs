//! Coefficient distributions, Ring-LWE oracles, sample rotation, and the pushforward
//! of a coefficient distribution through a CRT quotient map.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::fqring::modulus::{center, residue};
use crate::fqring::{quotient_map, residue_degree, Poly, RingElement, RingParams};
use crate::tower::{normalized_trace, subring_embed, to_subring_ring, TowerParams};

/// Gaussian tails are cut at this many standard deviations.
pub const GAUSSIAN_TAIL_CUT: f64 = 6.0;

#[derive(Clone, Debug, PartialEq)]
pub enum DistributionKind {
    /// Discrete Gaussian with parameter `r` (variance `r²/2π` before truncation).
    Gaussian { width: f64 },
    /// Uniform on an explicit support set.
    Uniform,
    PointMass(i64),
    /// Arbitrary finite pmf.
    Custom,
}

/// A distribution on F_q, stored as a normalized table over centered residues.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientDistribution {
    kind: DistributionKind,
    q: u64,
    values: Vec<i64>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl CoefficientDistribution {
    fn from_weights(kind: DistributionKind, q: u64, weights: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut table: BTreeMap<i64, f64> = BTreeMap::new();
        for (v, w) in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParams(format!("invalid probability weight {w}")));
            }
            *table.entry(center(v, q)).or_insert(0.0) += w;
        }
        table.retain(|_, w| *w > 0.0);
        let total: f64 = table.values().sum();
        if table.is_empty() || total <= 0.0 {
            return Err(Error::InvalidParams("distribution has empty support".into()));
        }
        let values: Vec<i64> = table.keys().copied().collect();
        let probs: Vec<f64> = table.values().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(CoefficientDistribution { kind, q, values, probs, cdf })
    }

    /// Discrete Gaussian `∝ exp(-π x² / r²)` on the integers, cut at six standard
    /// deviations, renormalized, then reduced mod q.
    pub fn gaussian(width: f64, q: u64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParams(format!("gaussian width {width} must be positive")));
        }
        let sigma = width / (2.0 * PI).sqrt();
        let bound = (GAUSSIAN_TAIL_CUT * sigma).ceil() as i64;
        let weights = (-bound..=bound).map(|x| (x, (-PI * (x * x) as f64 / (width * width)).exp()));
        Self::from_weights(DistributionKind::Gaussian { width }, q, weights)
    }

    pub fn uniform(support: &[i64], q: u64) -> Result<Self> {
        let mut set: Vec<i64> = support.iter().map(|&v| center(v, q)).collect();
        set.sort_unstable();
        set.dedup();
        Self::from_weights(DistributionKind::Uniform, q, set.into_iter().map(|v| (v, 1.0)))
    }

    pub fn point_mass(value: i64, q: u64) -> Result<Self> {
        Self::from_weights(DistributionKind::PointMass(center(value, q)), q, [(value, 1.0)])
    }

    /// Explicit pmf; weights must sum to 1 within 1e-9.
    pub fn from_pmf(entries: &[(i64, f64)], q: u64) -> Result<Self> {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("pmf sums to {total}, not 1")));
        }
        Self::from_weights(DistributionKind::Custom, q, entries.iter().copied())
    }

    /// Parses `gaussian:<r>`, `uniform:<v>,<v>,...`, `point:<v>` or `pmf:<v>=<p>,...`.
    pub fn parse(spec: &str, q: u64) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse distribution spec '{spec}'"));
        let (kind, body) = spec.split_once(':').ok_or_else(bad)?;
        let ints = |s: &str| -> Result<Vec<i64>> {
            s.split(',').map(|v| v.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        match kind.trim() {
            "gaussian" => Self::gaussian(body.trim().parse().map_err(|_| bad())?, q),
            "uniform" => Self::uniform(&ints(body)?, q),
            "point" => Self::point_mass(body.trim().parse().map_err(|_| bad())?, q),
            "pmf" => {
                let entries = body
                    .split(',')
                    .map(|e| {
                        let (v, p) = e.split_once('=').ok_or_else(bad)?;
                        Ok((v.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?))
                    })
                    .collect::<Result<Vec<(i64, f64)>>>()?;
                Self::from_pmf(&entries, q)
            }
            _ => Err(bad()),
        }
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Support `E_{χ0}` as sorted centered residues.
    pub fn support(&self) -> &[i64] {
        &self.values
    }

    /// `(value, probability)` pairs over the support.
    pub fn pmf(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn prob(&self, value: i64) -> f64 {
        let v = center(value, self.q);
        self.values.binary_search(&v).map(|i| self.probs[i]).unwrap_or(0.0)
    }

    /// Probabilities indexed by residue in `[0, q)`.
    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.q as usize];
        for (v, p) in self.pmf() {
            out[residue(v, self.q) as usize] += p;
        }
        out
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn variance(&self) -> f64 {
        let mean: f64 = self.pmf().map(|(v, p)| v as f64 * p).sum();
        self.pmf().map(|(v, p)| (v as f64 - mean).powi(2) * p).sum()
    }

    /// `p(v) = p(-v)` for every residue.
    pub fn is_symmetric(&self) -> bool {
        self.pmf().all(|(v, p)| (self.prob(-v) - p).abs() <= 1e-15)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }

    /// Dense pmf of the error after `depth` levels of pairwise subtraction:
    /// the `2^depth`-fold signed convolution, reduced mod q.
    pub fn depth_pmf(&self, depth: u32) -> Vec<f64> {
        let mut p = self.dense();
        for _ in 0..depth {
            let neg: Vec<f64> = (0..p.len()).map(|i| p[(p.len() - i) % p.len()]).collect();
            p = cyclic_convolve(&p, &neg);
        }
        p
    }
}

impl fmt::Display for CoefficientDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DistributionKind::Gaussian { width } => write!(f, "gaussian:{width}"),
            DistributionKind::PointMass(v) => write!(f, "point:{v}"),
            DistributionKind::Uniform => {
                let s: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
                write!(f, "uniform:{}", s.join(","))
            }
            DistributionKind::Custom => {
                let s: Vec<String> = self.pmf().map(|(v, p)| format!("{v}={p}")).collect();
                write!(f, "pmf:{}", s.join(","))
            }
        }
    }
}

fn cyclic_convolve<W>(a: &[W], b: &[W]) -> Vec<W>
where
    W: Clone + Zero + Add<Output = W> + Mul<Output = W>,
{
    let q = a.len();
    let mut out = vec![W::zero(); q];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let k = (i + j) % q;
            out[k] = out[k].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Ring error formed on the ζ-basis with i.i.d. coefficients from `base`.
#[derive(Clone, Debug)]
pub struct ErrorDistribution {
    base: CoefficientDistribution,
    ring: RingParams,
}

impl ErrorDistribution {
    pub fn new(base: CoefficientDistribution, ring: RingParams) -> Result<Self> {
        if base.modulus() != ring.q() {
            return Err(Error::InvalidParams("distribution modulus differs from ring modulus".into()));
        }
        Ok(ErrorDistribution { base, ring })
    }

    pub fn base(&self) -> &CoefficientDistribution {
        &self.base
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        let coeffs = (0..self.ring.n()).map(|_| self.base.sample(rng)).collect();
        RingElement::from_centered(self.ring, coeffs)
    }
}

/// How the secret is drawn.
#[derive(Clone, Debug)]
pub enum SecretDistribution {
    Uniform,
    Coefficients(CoefficientDistribution),
}

impl SecretDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, ring: RingParams, rng: &mut R) -> RingElement {
        match self {
            SecretDistribution::Uniform => RingElement::random(ring, rng),
            SecretDistribution::Coefficients(d) => {
                let coeffs = (0..ring.n()).map(|_| d.sample(rng)).collect();
                RingElement::from_centered(ring, coeffs)
            }
        }
    }
}

/// A Ring-LWE sample `(a, b = a·s + e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sample {
    pub a: RingElement,
    pub b: RingElement,
    /// Number of BKW subtraction levels applied (0 for fresh samples).
    pub depth: u32,
}

impl Sample {
    pub fn new(a: RingElement, b: RingElement) -> Self {
        Sample { a, b, depth: 0 }
    }

    /// `b - a·s`.
    pub fn residual(&self, secret: &RingElement) -> RingElement {
        &self.b - &(&self.a * secret)
    }

    /// `(ζ^h a, ζ^h b)`.
    pub fn rotated(&self, h: i64) -> Sample {
        Sample { a: self.a.mul_zeta_pow(h), b: self.b.mul_zeta_pow(h), depth: self.depth }
    }

    pub fn negated(&self) -> Sample {
        Sample { a: -&self.a, b: -&self.b, depth: self.depth }
    }

    /// `self - other`, one subtraction level deeper.
    pub fn difference(&self, other: &Sample) -> Sample {
        Sample {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            depth: self.depth.max(other.depth) + 1,
        }
    }
}

/// Anything that hands out samples one at a time.
pub trait SampleSource {
    /// `None` once the source is exhausted.
    fn next_sample(&mut self) -> Option<Sample>;
}

impl<I: Iterator<Item = Sample>> SampleSource for I {
    fn next_sample(&mut self) -> Option<Sample> {
        self.next()
    }
}

/// The multiplicative coset `a0·S_q`.
#[derive(Clone, Debug)]
pub struct Coset {
    a0: RingElement,
    a0_inv: RingElement,
    tower: TowerParams,
}

impl Coset {
    /// Requires `a0` invertible in `R_q` and its normalized trace invertible in `S_q`.
    pub fn new(a0: RingElement, tower: TowerParams) -> Result<Self> {
        tower.ring().check_same(&a0.params())?;
        let a0_inv = a0.inverse()?;
        to_subring_ring(&normalized_trace(&a0, &tower), &tower)?.inverse()?;
        Ok(Coset { a0, a0_inv, tower })
    }

    pub fn a0(&self) -> &RingElement {
        &self.a0
    }

    pub fn tower(&self) -> &TowerParams {
        &self.tower
    }

    /// `a ∈ a0·S_q`, tested by dividing out `a0`.
    pub fn contains(&self, a: &RingElement) -> bool {
        self.tower.is_subring_supported(&(a * &self.a0_inv))
    }

    /// Uniform element of the coset.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        let sub = RingElement::random(self.tower.subring_params(), rng);
        let u = subring_embed(sub.coeffs(), &self.tower).expect("subring dimension matches");
        &self.a0 * &u
    }

    /// `ζ^j a0 · S_q`.
    pub fn rotated(&self, j: i64) -> Coset {
        Coset {
            a0: self.a0.mul_zeta_pow(j),
            a0_inv: self.a0_inv.mul_zeta_pow(-j),
            tower: self.tower,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Restriction {
    None,
    Coset(Coset),
}

/// Seeded source of samples from `A_{s,χ}` or its coset-restricted variant `A_{a0 S_q,s,χ}`.
#[derive(Clone, Debug)]
pub struct LweOracle {
    secret: RingElement,
    error: ErrorDistribution,
    restriction: Restriction,
    rng: ChaCha20Rng,
}

impl LweOracle {
    pub fn new(secret: RingElement, error: ErrorDistribution, seed: u64) -> Result<Self> {
        error.ring().check_same(&secret.params())?;
        Ok(LweOracle {
            secret,
            error,
            restriction: Restriction::None,
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    /// Draws a secret from `secret_dist` with the oracle's own RNG stream.
    pub fn with_random_secret(error: ErrorDistribution, secret_dist: &SecretDistribution, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let secret = secret_dist.sample(error.ring(), &mut rng);
        LweOracle { secret, error, restriction: Restriction::None, rng }
    }

    pub fn restricted_to(mut self, coset: Coset) -> Result<Self> {
        coset.tower().ring().check_same(&self.secret.params())?;
        self.restriction = Restriction::Coset(coset);
        Ok(self)
    }

    pub fn secret(&self) -> &RingElement {
        &self.secret
    }

    pub fn error(&self) -> &ErrorDistribution {
        &self.error
    }

    pub fn restriction(&self) -> &Restriction {
        &self.restriction
    }

    pub fn ring(&self) -> RingParams {
        self.error.ring()
    }

    pub fn draw(&mut self) -> Sample {
        let a = match &self.restriction {
            Restriction::None => RingElement::random(self.ring(), &mut self.rng),
            Restriction::Coset(c) => c.random(&mut self.rng),
        };
        let e = self.error.sample(&mut self.rng);
        let b = &(&a * &self.secret) + &e;
        Sample::new(a, b)
    }
}

impl SampleSource for LweOracle {
    fn next_sample(&mut self) -> Option<Sample> {
        Some(self.draw())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rotation {
    /// `(ζ^j a, ζ^j b)`: same secret.
    Both,
    /// `(a, ζ^j b)`: secret becomes `ζ^j s`.
    BOnly,
}

pub fn rotate_sample(x: &Sample, j: i64, which: Rotation) -> Sample {
    match which {
        Rotation::Both => x.rotated(j),
        Rotation::BOnly => Sample { a: x.a.clone(), b: x.b.mul_zeta_pow(j), depth: x.depth },
    }
}

/// Rotates a coset-restricted sample; the result lies in `ζ^j a0 · S_q`.
pub fn coset_rotate(x: &Sample, coset: &Coset, j: i64) -> (Sample, Coset) {
    (x.rotated(j), coset.rotated(j))
}

/// Prerequisites shared by both transport routes; returns `(d, c)` with `d = deg g`
/// and `c = ρ(ζ^d) ∈ F_q`.
fn transport_setup(ring: RingParams, g: &Poly) -> Result<(usize, i64)> {
    let q = ring.q();
    if q % 4 != 1 {
        return Err(Error::Precondition(format!("q = {q} is not 1 mod 4")));
    }
    if g.modulus() != q {
        return Err(Error::Precondition("factor modulus differs from ring modulus".into()));
    }
    let d = g.degree().unwrap_or(0);
    if d == 0 || d != residue_degree(ring) || !ring.n().is_multiple_of(d) {
        return Err(Error::Precondition(format!(
            "factor degree {d} is not the residue degree {}",
            residue_degree(ring)
        )));
    }
    if !Poly::negacyclic_modulus(q, ring.n()).rem(g).is_zero() {
        return Err(Error::Precondition("g does not divide x^n + 1".into()));
    }
    let image = quotient_map(&RingElement::monomial(ring, d as i64), g);
    if image[1..].iter().any(|&c| c != 0) {
        return Err(Error::Precondition("image of ζ^d is not a scalar".into()));
    }
    Ok((d, image[0]))
}

fn transport_weights<W>(dense: &[W], ring: RingParams, d: usize, c: i64) -> Vec<W>
where
    W: Clone + Zero + Add<Output = W> + Mul<Output = W>,
{
    let q = ring.q();
    let mut acc: Option<Vec<W>> = None;
    let mut scale = 1i64;
    for _ in 0..ring.n() / d {
        let mut scaled = vec![W::zero(); q as usize];
        for (x, w) in dense.iter().enumerate() {
            let y = residue(x as i64 * scale, q) as usize;
            scaled[y] = scaled[y].clone() + w.clone();
        }
        acc = Some(match acc {
            None => scaled,
            Some(a) => cyclic_convolve(&a, &scaled),
        });
        scale = center(scale * c, q);
    }
    acc.expect("at least one summand")
}

/// Coefficient distribution of `ρ(χ)` on the ζ-basis of `F_q[x]/(g)`:
/// the law of `Σ_i ρ(ζ^d)^i X_i` for i.i.d. `X_i ~ χ0`, `d = deg g`.
pub fn transport_pmf(chi0: &CoefficientDistribution, ring: RingParams, g: &Poly) -> Result<CoefficientDistribution> {
    let (d, c) = transport_setup(ring, g)?;
    let out = transport_weights(&chi0.dense(), ring, d, c);
    CoefficientDistribution::from_weights(
        DistributionKind::Custom,
        ring.q(),
        out.into_iter().enumerate().map(|(v, p)| (v as i64, p)),
    )
}

/// Exact-arithmetic version of [`transport_pmf`]; keys are centered residues.
pub fn transport_pmf_exact(
    chi0: &BTreeMap<i64, BigRational>,
    ring: RingParams,
    g: &Poly,
) -> Result<BTreeMap<i64, BigRational>> {
    let (d, c) = transport_setup(ring, g)?;
    let q = ring.q();
    let mut dense = vec![BigRational::zero(); q as usize];
    for (&v, p) in chi0 {
        let i = residue(v, q) as usize;
        dense[i] = dense[i].clone() + p.clone();
    }
    Ok(transport_weights(&dense, ring, d, c)
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(v, p)| (center(v as i64, q), p))
        .collect())
}
