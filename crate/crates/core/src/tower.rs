//! Cyclotomic subrings `S_q ⊆ R_q`, trace maps, and the prioritized basis order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fqring::{modulus::center, RingElement, RingParams};

/// `R_q` together with its k-th cyclotomic subring `S_q`.
///
/// `S_q` has F_q-dimension `B = k/2` and is spanned by ζ^{i·stride}, `stride = m/k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TowerParams {
    ring: RingParams,
    k: usize,
}

impl TowerParams {
    pub fn new(ring: RingParams, k: usize) -> Result<Self> {
        if k < 2 || !k.is_power_of_two() || k > ring.m() {
            return Err(Error::InvalidParams(format!(
                "subring conductor k = {k} must be a power of two in [2, {}]",
                ring.m()
            )));
        }
        Ok(TowerParams { ring, k })
    }

    /// Tower whose subring has dimension `b` over F_q.
    pub fn with_subring_dim(ring: RingParams, b: usize) -> Result<Self> {
        Self::new(ring, 2 * b)
    }

    pub fn ring(&self) -> RingParams {
        self.ring
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Degree `m/k` of `R` over `S`.
    pub fn degree(&self) -> usize {
        self.ring.m() / self.k
    }

    /// Dimension `B` of `S_q` over F_q.
    pub fn subring_dim(&self) -> usize {
        self.k / 2
    }

    /// Exponent spacing of the subring basis.
    pub fn stride(&self) -> usize {
        self.ring.m() / self.k
    }

    /// `S_q` viewed as the standalone ring `F_q[y]/(y^B + 1)` with `y = ζ^stride`.
    pub fn subring_params(&self) -> RingParams {
        RingParams::subring(self.subring_dim(), self.ring.q()).expect("subring of a valid ring")
    }

    pub fn is_subring_supported(&self, x: &RingElement) -> bool {
        let s = self.stride();
        x.coeffs().iter().enumerate().all(|(i, &c)| i % s == 0 || c == 0)
    }
}

/// ζ-exponents listed from "eliminate first" to "keep last".
///
/// This is the reversed bit-reversal permutation, so for every power of two `b <= n`
/// the last `b` entries are exactly the multiples of `n/b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrioritizedPermutation {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl PrioritizedPermutation {
    fn compute(n: usize) -> Self {
        let bits = n.trailing_zeros();
        let bitrev = |i: usize| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
        let order: Vec<usize> = (0..n).rev().map(bitrev).collect();
        let mut position = vec![0; n];
        for (p, &e) in order.iter().enumerate() {
            position[e] = p;
        }
        PrioritizedPermutation { order, position }
    }

    /// Exponent at each prioritized position.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Prioritized position of each exponent.
    pub fn position(&self) -> &[usize] {
        &self.position
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// The prioritized order for `ring`, computed once per dimension and shared.
pub fn prioritized_order(ring: RingParams) -> Arc<PrioritizedPermutation> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PrioritizedPermutation>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("prioritized-order cache poisoned");
    guard
        .entry(ring.n())
        .or_insert_with(|| Arc::new(PrioritizedPermutation::compute(ring.n())))
        .clone()
}

pub fn to_prioritized(x: &RingElement) -> Vec<i64> {
    let perm = prioritized_order(x.params());
    perm.order.iter().map(|&e| x.coeffs()[e]).collect()
}

pub fn from_prioritized(ring: RingParams, v: &[i64]) -> Result<RingElement> {
    let perm = prioritized_order(ring);
    if v.len() != perm.len() {
        return Err(Error::InvalidParams(format!(
            "expected {} prioritized coefficients, got {}",
            perm.len(),
            v.len()
        )));
    }
    let mut coeffs = vec![0i64; v.len()];
    for (p, &e) in perm.order.iter().enumerate() {
        coeffs[e] = v[p];
    }
    RingElement::from_coeffs(ring, &coeffs)
}

/// True iff the first `blocks * blocksize` prioritized coefficients of `x` vanish.
pub fn block_zero_prefix(x: &RingElement, blocks: usize, blocksize: usize) -> bool {
    let perm = prioritized_order(x.params());
    let len = blocks * blocksize;
    assert!(len <= perm.len(), "prefix longer than the ring dimension");
    perm.order[..len].iter().all(|&e| x.coeffs()[e] == 0)
}

/// `Tr^{R_q}_{S_q}(x)`, i.e. `(m/k)` times the projection onto exponents divisible by `m/k`.
pub fn trace(x: &RingElement, tower: &TowerParams) -> RingElement {
    let q = x.params().q();
    let s = tower.stride();
    let factor = s as i64;
    let coeffs = x
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % s == 0 { center(c * factor, q) } else { 0 })
        .collect();
    RingElement::from_centered(x.params(), coeffs)
}

/// `(k/m)·Tr`, the exact coordinate projection onto `S_q`.
pub fn normalized_trace(x: &RingElement, tower: &TowerParams) -> RingElement {
    let s = tower.stride();
    let coeffs = x
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % s == 0 { c } else { 0 })
        .collect();
    RingElement::from_centered(x.params(), coeffs)
}

/// Places a length-`B` coefficient vector on the subring exponents.
pub fn subring_embed(y: &[i64], tower: &TowerParams) -> Result<RingElement> {
    let b = tower.subring_dim();
    if y.len() != b {
        return Err(Error::InvalidParams(format!("expected {b} subring coefficients, got {}", y.len())));
    }
    let ring = tower.ring();
    let mut coeffs = vec![0i64; ring.n()];
    for (i, &c) in y.iter().enumerate() {
        coeffs[i * tower.stride()] = c;
    }
    RingElement::from_coeffs(ring, &coeffs)
}

/// Inverse of [`subring_embed`].
pub fn subring_extract(x: &RingElement, tower: &TowerParams) -> Result<Vec<i64>> {
    if !tower.is_subring_supported(x) {
        return Err(Error::NotSubringSupported);
    }
    Ok(x.coeffs().iter().step_by(tower.stride()).copied().collect())
}

/// A subring element as an element of the standalone ring `F_q[y]/(y^B + 1)`.
pub fn to_subring_ring(x: &RingElement, tower: &TowerParams) -> Result<RingElement> {
    let y = subring_extract(x, tower)?;
    Ok(RingElement::from_centered(tower.subring_params(), y))
}

pub fn from_subring_ring(y: &RingElement, tower: &TowerParams) -> Result<RingElement> {
    tower.subring_params().check_same(&y.params())?;
    subring_embed(y.coeffs(), tower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ring(n: usize, q: u64) -> RingParams {
        RingParams::new(n, q).unwrap()
    }

    #[test]
    fn prioritized_order_examples() {
        assert_eq!(prioritized_order(ring(8, 17)).order(), &[7, 3, 5, 1, 6, 2, 4, 0]);
        assert_eq!(prioritized_order(ring(2, 17)).order(), &[1, 0]);
        let last4: Vec<usize> = prioritized_order(ring(8, 17)).order()[4..].to_vec();
        assert_eq!(last4, vec![6, 2, 4, 0]);
    }

    #[test]
    fn suffixes_span_subrings() {
        for n in [2usize, 4, 8, 16, 32, 64, 128] {
            let perm = prioritized_order(ring(n, 17));
            let mut b = 1;
            while b <= n {
                let mut tail: Vec<usize> = perm.order()[n - b..].to_vec();
                tail.sort();
                let expected: Vec<usize> = (0..b).map(|i| i * (n / b)).collect();
                assert_eq!(tail, expected, "n={n} b={b}");
                b *= 2;
            }
        }
    }

    #[test]
    fn prioritized_round_trip_and_positions() {
        let p = ring(8, 17);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = RingElement::random(p, &mut rng);
        assert_eq!(from_prioritized(p, &to_prioritized(&x)).unwrap(), x);
        let z7 = to_prioritized(&RingElement::monomial(p, 7));
        assert_eq!(z7[0], 1);
        let one = to_prioritized(&RingElement::one(p));
        assert_eq!(one[7], 1);
    }

    #[test]
    fn trace_examples() {
        let p = ring(8, 17); // m = 16
        let t = TowerParams::new(p, 8).unwrap();
        assert!(trace(&RingElement::monomial(p, 3), &t).is_zero());
        assert_eq!(trace(&RingElement::monomial(p, 2), &t), RingElement::monomial(p, 2).scale(2));
        assert_eq!(trace(&RingElement::one(p), &t), RingElement::one(p).scale(2));
        assert!(normalized_trace(&RingElement::monomial(p, 5), &t).is_zero());
    }

    #[test]
    fn normalized_trace_properties() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = ring(16, 17);
        let t = TowerParams::new(p, 8).unwrap();
        let t2 = TowerParams::new(p, 4).unwrap();
        for _ in 0..200 {
            let x = RingElement::random(p, &mut rng);
            let u = normalized_trace(&RingElement::random(p, &mut rng), &t);
            let px = normalized_trace(&x, &t);
            assert_eq!(normalized_trace(&px, &t), px);
            assert_eq!(normalized_trace(&(&u * &x), &t), &u * &px);
            assert_eq!(normalized_trace(&px, &t2), normalized_trace(&x, &t2));
            assert_eq!(normalized_trace(&u, &t), u);
        }
    }

    #[test]
    fn subring_embedding() {
        let p = ring(16, 17);
        let t = TowerParams::with_subring_dim(p, 4).unwrap();
        assert_eq!(subring_embed(&[1, 0, 0, 0], &t).unwrap(), RingElement::one(p));
        let y = vec![3, -1, 0, 7];
        assert_eq!(subring_extract(&subring_embed(&y, &t).unwrap(), &t).unwrap(), y);
        let a = subring_embed(&[1, 2, 3, 4], &t).unwrap();
        let b = subring_embed(&[-5, 0, 6, 1], &t).unwrap();
        assert!(t.is_subring_supported(&(&a * &b)));
        assert!(matches!(
            subring_extract(&RingElement::monomial(p, 1), &t),
            Err(Error::NotSubringSupported)
        ));
        // product in the standalone subring ring agrees with the product in R_q
        let ab = to_subring_ring(&(&a * &b), &t).unwrap();
        let ab2 = &to_subring_ring(&a, &t).unwrap() * &to_subring_ring(&b, &t).unwrap();
        assert_eq!(ab, ab2);
    }

    #[test]
    fn block_prefix_examples() {
        let p = ring(16, 17);
        let t = TowerParams::with_subring_dim(p, 4).unwrap();
        let x = subring_embed(&[1, 2, 3, 4], &t).unwrap();
        assert!(block_zero_prefix(&x, 3, 4));
        let first = prioritized_order(p).order()[0] as i64;
        assert!(!block_zero_prefix(&RingElement::monomial(p, first), 1, 4));
        assert!(block_zero_prefix(&RingElement::zero(p), 4, 4));
    }
}
