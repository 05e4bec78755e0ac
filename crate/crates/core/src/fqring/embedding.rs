//! Canonical (Minkowski) embedding of two-power cyclotomic elements, for diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::element::RingElement;
use super::modulus::residue;

/// How a coefficient in F_q is lifted to an integer before embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Lift {
    /// Representative in `[-(q-1)/2, (q-1)/2]`.
    #[default]
    Centered,
    /// Representative in `[0, q)`.
    NonNegative,
}

/// `σ_t(x)` for `t = 1, 3, ..., 2n - 1`, i.e. evaluation at every primitive 2n-th root of unity.
pub fn canonical_embedding(x: &RingElement, lift: Lift) -> Vec<Complex64> {
    let p = x.params();
    let n = p.n();
    let m = p.m() as f64;
    let lifted: Vec<f64> = x
        .coeffs()
        .iter()
        .map(|&c| match lift {
            Lift::Centered => c as f64,
            Lift::NonNegative => residue(c, p.q()) as f64,
        })
        .collect();
    (0..n)
        .map(|k| {
            let t = (2 * k + 1) as f64;
            lifted
                .iter()
                .enumerate()
                .map(|(i, &c)| Complex64::from_polar(c, 2.0 * PI * t * i as f64 / m))
                .sum()
        })
        .collect()
}

/// Trace pairing `<α, β> = ½ Σ_σ Re(σ(α) conj(σ(β)))` over all complex embeddings.
pub fn pairing(x: &RingElement, y: &RingElement, lift: Lift) -> f64 {
    let ex = canonical_embedding(x, lift);
    let ey = canonical_embedding(y, lift);
    0.5 * ex.iter().zip(&ey).map(|(a, b)| (a * b.conj()).re).sum::<f64>()
}

/// Gram matrix of the ζ-basis under [`pairing`].
pub fn zeta_gram_matrix(params: super::RingParams) -> Vec<Vec<f64>> {
    let basis: Vec<RingElement> = (0..params.n())
        .map(|i| RingElement::monomial(params, i as i64))
        .collect();
    basis
        .iter()
        .map(|a| basis.iter().map(|b| pairing(a, b, Lift::Centered)).collect())
        .collect()
}
