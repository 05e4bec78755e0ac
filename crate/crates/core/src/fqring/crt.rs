//! Splitting of `x^n + 1` over F_q and the quotient maps `R_q -> F_q[x]/(g)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::element::{RingElement, RingParams};
use super::modulus::{center, mult_order};
use super::poly::Poly;

const DEFAULT_SPLIT_SEED: u64 = 0x5eed_c47f;

/// Common degree of the irreducible factors of `x^n + 1`: the order of q modulo 2n.
pub fn residue_degree(params: RingParams) -> usize {
    mult_order(params.q() % params.m() as u64, params.m() as u64) as usize
}

/// Monic irreducible factors of `x^n + 1` over F_q, sorted.
pub fn crt_factors(params: RingParams) -> Vec<Poly> {
    crt_factors_seeded(params, DEFAULT_SPLIT_SEED)
}

/// As [`crt_factors`], with an explicit seed for the randomized equal-degree splitting.
pub fn crt_factors_seeded(params: RingParams, seed: u64) -> Vec<Poly> {
    let f = Poly::negacyclic_modulus(params.q(), params.n());
    let d = residue_degree(params);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    split_equal_degree(&f, d, &mut rng, &mut out);
    out.sort();
    out
}

/// Cantor-Zassenhaus splitting of a squarefree monic `f` whose irreducible factors all have degree `d`.
fn split_equal_degree(f: &Poly, d: usize, rng: &mut ChaCha20Rng, out: &mut Vec<Poly>) {
    let deg = f.degree().expect("nonzero polynomial");
    if deg == d {
        out.push(f.monic());
        return;
    }
    let q = f.modulus();
    let one = Poly::constant(q, 1);
    loop {
        let a = Poly::random_below(q, deg, rng);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = a.gcd(f);
        if g.degree() != Some(0) {
            split_both(f, &g, d, rng, out);
            return;
        }
        // a^((q^d - 1)/2) = (a^(1 + q + ... + q^(d-1)))^((q-1)/2)
        let mut frob = a.clone();
        let mut norm = a.clone();
        for _ in 1..d {
            frob = frob.pow_mod(q, f);
            norm = norm.mul(&frob).rem(f);
        }
        let b = norm.pow_mod((q - 1) / 2, f);
        let g = b.sub(&one).gcd(f);
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < deg {
            split_both(f, &g, d, rng, out);
            return;
        }
    }
}

fn split_both(f: &Poly, g: &Poly, d: usize, rng: &mut ChaCha20Rng, out: &mut Vec<Poly>) {
    let (h, r) = f.div_rem(g);
    debug_assert!(r.is_zero());
    split_equal_degree(g, d, rng, out);
    split_equal_degree(&h.monic(), d, rng, out);
}

/// Image of `x` in `F_q[x]/(g)`, as `deg g` centered coefficients.
pub fn quotient_map(x: &RingElement, g: &Poly) -> Vec<i64> {
    let q = x.params().q();
    let d = g.degree().expect("nonconstant factor");
    let r = x.to_poly().rem(g);
    let mut out = vec![0i64; d];
    for (i, &c) in r.coeffs().iter().enumerate() {
        out[i] = center(c as i64, q);
    }
    out
}

/// Product in `F_q[x]/(g)` of two images produced by [`quotient_map`].
pub fn quotient_mul(x: &[i64], y: &[i64], g: &Poly) -> Vec<i64> {
    let q = g.modulus();
    let p = Poly::from_signed(q, x).mul(&Poly::from_signed(q, y)).rem(g);
    let mut out = vec![0i64; g.degree().unwrap_or(0)];
    for (i, &c) in p.coeffs().iter().enumerate() {
        out[i] = center(c as i64, q);
    }
    out
}
