//! Scalar arithmetic in F_q with centered representatives.

/// Largest modulus accepted; keeps every product of two residues inside `i64`.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

/// Reduce `x` into the centered range `[-(q-1)/2, (q-1)/2]`.
#[inline]
pub fn center(x: i64, q: u64) -> i64 {
    let q = q as i64;
    let r = x.rem_euclid(q);
    if r > q / 2 {
        r - q
    } else {
        r
    }
}

/// Reduce into `[0, q)`.
#[inline]
pub fn residue(x: i64, q: u64) -> u64 {
    x.rem_euclid(q as i64) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo the prime `q`.
pub fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let a = a % q;
    if a == 0 {
        None
    } else {
        Some(pow_mod(a, q - 2, q))
    }
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    let mut d = 3;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Multiplicative order of `a` modulo `m` (requires gcd(a, m) = 1).
pub fn mult_order(a: u64, m: u64) -> u64 {
    let mut x = a % m;
    let mut k = 1;
    while x != 1 % m {
        x = mul_mod(x, a, m);
        k += 1;
    }
    k
}

/// 2-adic valuation of a nonzero integer.
pub fn ord2(x: u64) -> u32 {
    x.trailing_zeros()
}
