//! Canonical table keys: sign normalization, and for advanced keying the minimum
//! over the signed rotations by powers of ζ^{n/B}.

use std::cmp::Ordering;

use super::Variant;
use crate::tower::PrioritizedPermutation;

/// Action of multiplication by ζ^{n/B} on one block of prioritized coefficients:
/// `rotated[r] = ±block[src[r]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockAction {
    src: Vec<usize>,
    neg: Vec<bool>,
}

impl BlockAction {
    /// Action on block `index` (0-based) of size `b`; `b` must be a power of two dividing n.
    pub fn new(perm: &PrioritizedPermutation, index: usize, b: usize) -> Self {
        let n = perm.len() as i64;
        let h = n / b as i64;
        let start = index * b;
        let mut src = Vec::with_capacity(b);
        let mut neg = Vec::with_capacity(b);
        for r in 0..b {
            let e = perm.order()[start + r] as i64;
            let (s, flip) = if e - h >= 0 { (e - h, false) } else { (e - h + n, true) };
            let p = perm.position()[s as usize];
            assert!(
                p >= start && p < start + b,
                "rotation by ζ^(n/B) must stabilize every block"
            );
            src.push(p - start);
            neg.push(flip);
        }
        BlockAction { src, neg }
    }

    pub fn apply(&self, block: &[i64]) -> Vec<i64> {
        self.src
            .iter()
            .zip(&self.neg)
            .map(|(&s, &f)| if f { -block[s] } else { block[s] })
            .collect()
    }
}

/// Sign-normalized, rotation-canonicalized block content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalKey {
    pub key: Vec<i64>,
    /// Exponent of ζ applied to reach the key (a multiple of n/B).
    pub applied_rotation: usize,
    /// `±1` applied after the rotation.
    pub applied_sign: i8,
    /// Two distinct signed rotations produce the key.
    pub self_match: bool,
    /// A second `(rotation, sign)` reaching the same key, when `self_match`.
    pub partner: Option<(usize, i8)>,
}

impl CanonicalKey {
    /// Total ζ-exponent of the signed rotation, with the sign folded in as ζ^n = -1.
    pub fn zeta_exponent(&self, n: usize) -> i64 {
        fold_sign(self.applied_rotation, self.applied_sign, n)
    }
}

pub(crate) fn fold_sign(rotation: usize, sign: i8, n: usize) -> i64 {
    rotation as i64 + if sign < 0 { n as i64 } else { 0 }
}

/// Order on blocks: absolute values lexicographically, then the sign pattern with
/// non-negative entries before negative ones.
pub fn key_order(u: &[i64], v: &[i64]) -> Ordering {
    let by_abs = u.iter().map(|x| x.abs()).cmp(v.iter().map(|x| x.abs()));
    by_abs.then_with(|| u.iter().map(|&x| x < 0).cmp(v.iter().map(|&x| x < 0)))
}

/// Makes the first nonzero entry positive; returns the sign used.
fn sign_normalize(v: &mut [i64]) -> i8 {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => {
            v.iter_mut().for_each(|x| *x = -*x);
            -1
        }
        _ => 1,
    }
}

/// Canonical key for `block` under `variant`. `action` is required for
/// [`Variant::Advanced`] and ignored otherwise.
pub fn canonicalize(block: &[i64], variant: Variant, action: Option<&BlockAction>, n: usize) -> CanonicalKey {
    let b = block.len();
    let step = n / b.max(1);
    let rotations = match variant {
        Variant::Advanced => b,
        Variant::RingBlind | Variant::Traditional => 1,
    };
    let mut current = block.to_vec();
    let mut best: Option<(Vec<i64>, usize, i8)> = None;
    let mut partner = None;
    for t in 0..rotations {
        if t > 0 {
            current = action.expect("advanced keying needs the block action").apply(&current);
        }
        let mut cand = current.clone();
        let sign = sign_normalize(&mut cand);
        // the other sign of the same rotation ties only for the zero block
        if cand.iter().all(|&x| x == 0) && partner.is_none() {
            partner = Some((t * step, -sign));
        }
        match &best {
            None => best = Some((cand, t * step, sign)),
            Some((k, _, _)) => match key_order(&cand, k) {
                Ordering::Less => {
                    best = Some((cand, t * step, sign));
                    partner = None;
                }
                Ordering::Equal => {
                    if partner.is_none() {
                        partner = Some((t * step, sign));
                    }
                }
                Ordering::Greater => {}
            },
        }
    }
    let (key, applied_rotation, applied_sign) = best.expect("at least one rotation");
    CanonicalKey { key, applied_rotation, applied_sign, self_match: partner.is_some(), partner }
}
