//! Dense linear algebra over F_q.

use crate::error::{Error, Result};
use crate::fqring::modulus::{inv_mod, mul_mod};

/// Solves `m·x = rhs` over F_q for square `m` given row-major with residues in `[0, q)`.
pub(crate) fn solve_mod(mut m: Vec<Vec<u64>>, mut rhs: Vec<u64>, q: u64) -> Result<Vec<u64>> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n) && rhs.len() == n, "square system expected");
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != 0).ok_or(Error::SingularSystem)?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = inv_mod(m[col][col], q).ok_or(Error::SingularSystem)?;
        for v in m[col].iter_mut() {
            *v = mul_mod(*v, inv, q);
        }
        rhs[col] = mul_mod(rhs[col], inv, q);
        let pivot_row = m[col].clone();
        let pivot_rhs = rhs[col];
        for r in 0..n {
            if r == col || m[r][col] == 0 {
                continue;
            }
            let f = m[r][col];
            for (v, &p) in m[r].iter_mut().zip(&pivot_row) {
                *v = (*v + q - mul_mod(f, p, q)) % q;
            }
            rhs[r] = (rhs[r] + q - mul_mod(f, pivot_rhs, q)) % q;
        }
    }
    Ok(rhs)
}
