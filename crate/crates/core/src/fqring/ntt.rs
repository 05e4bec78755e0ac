//! Negacyclic number-theoretic transform, available when `q ≡ 1 (mod 2n)`.

use super::element::{RingElement, RingParams};
use super::modulus::{center, inv_mod, mul_mod, pow_mod, residue};
use crate::error::Result;

/// Precomputed twiddles for one `(n, q)`.
#[derive(Clone, Debug)]
pub struct NttPlan {
    params: RingParams,
    psi_pows: Vec<u64>,
    psi_inv_pows: Vec<u64>,
    omega: u64,
    omega_inv: u64,
    n_inv: u64,
}

impl NttPlan {
    /// Returns `None` when F_q has no primitive 2n-th root of unity.
    pub fn new(params: RingParams) -> Option<Self> {
        let (n, q) = (params.n() as u64, params.q());
        if (q - 1) % (2 * n) != 0 {
            return None;
        }
        let psi = (2..q)
            .map(|g| pow_mod(g, (q - 1) / (2 * n), q))
            .find(|&psi| pow_mod(psi, n, q) == q - 1)?;
        let psi_inv = inv_mod(psi, q)?;
        let mut psi_pows = Vec::with_capacity(n as usize);
        let mut psi_inv_pows = Vec::with_capacity(n as usize);
        let (mut p, mut pi) = (1u64, 1u64);
        for _ in 0..n {
            psi_pows.push(p);
            psi_inv_pows.push(pi);
            p = mul_mod(p, psi, q);
            pi = mul_mod(pi, psi_inv, q);
        }
        let omega = mul_mod(psi, psi, q);
        Some(NttPlan {
            params,
            psi_pows,
            psi_inv_pows,
            omega,
            omega_inv: inv_mod(omega, q)?,
            n_inv: inv_mod(n, q)?,
        })
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    fn transform(&self, a: &mut [u64], root: u64) {
        let q = self.params.q();
        let n = a.len();
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let w_len = pow_mod(root, (n / len) as u64, q);
            for start in (0..n).step_by(len) {
                let mut w = 1u64;
                for k in 0..len / 2 {
                    let u = a[start + k];
                    let v = mul_mod(a[start + k + len / 2], w, q);
                    a[start + k] = (u + v) % q;
                    a[start + k + len / 2] = (u + q - v) % q;
                    w = mul_mod(w, w_len, q);
                }
            }
            len <<= 1;
        }
    }

    fn forward(&self, x: &RingElement) -> Vec<u64> {
        let q = self.params.q();
        let mut a: Vec<u64> = x
            .coeffs()
            .iter()
            .zip(&self.psi_pows)
            .map(|(&c, &p)| mul_mod(residue(c, q), p, q))
            .collect();
        self.transform(&mut a, self.omega);
        a
    }

    /// Negacyclic product through the transform; must agree with the schoolbook path.
    pub fn mul(&self, x: &RingElement, y: &RingElement) -> Result<RingElement> {
        self.params.check_same(&x.params())?;
        self.params.check_same(&y.params())?;
        let q = self.params.q();
        let fx = self.forward(x);
        let fy = self.forward(y);
        let mut prod: Vec<u64> = fx.iter().zip(&fy).map(|(&a, &b)| mul_mod(a, b, q)).collect();
        self.transform(&mut prod, self.omega_inv);
        let coeffs = prod
            .iter()
            .zip(&self.psi_inv_pows)
            .map(|(&c, &p)| center(mul_mod(mul_mod(c, self.n_inv, q), p, q) as i64, q))
            .collect();
        Ok(RingElement::from_centered(self.params, coeffs))
    }
}
