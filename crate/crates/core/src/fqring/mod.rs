//! Exact arithmetic in F_q and in `R_q = F_q[x]/(x^n + 1)` on the ζ-basis.

mod crt;
mod element;
mod embedding;
pub mod modulus;
mod ntt;
pub mod poly;

pub use crt::{crt_factors, crt_factors_seeded, quotient_map, quotient_mul, residue_degree};
pub use element::{RingElement, RingParams};
pub use embedding::{canonical_embedding, pairing, zeta_gram_matrix, Lift};
pub use ntt::NttPlan;
pub use poly::Poly;

/// A residue of F_q in centered form.
pub type FqScalar = i64;
