//! Dense univariate polynomials over F_q, coefficients stored low degree first
//! as residues in `[0, q)`.

use rand::Rng;

use super::modulus::{inv_mod, mul_mod};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    q: u64,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(q: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= q;
        }
        let mut p = Poly { q, coeffs };
        p.trim();
        p
    }

    pub fn from_signed(q: u64, coeffs: &[i64]) -> Self {
        Self::new(q, coeffs.iter().map(|&c| super::modulus::residue(c, q)).collect())
    }

    pub fn zero(q: u64) -> Self {
        Poly { q, coeffs: Vec::new() }
    }

    pub fn constant(q: u64, c: u64) -> Self {
        Self::new(q, vec![c])
    }

    /// `x^n + 1`
    pub fn negacyclic_modulus(q: u64, n: usize) -> Self {
        let mut c = vec![0; n + 1];
        c[0] = 1;
        c[n] = 1;
        Self::new(q, c)
    }

    pub fn x(q: u64) -> Self {
        Self::new(q, vec![0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.leading(), self.q).expect("nonzero leading coefficient");
        self.scale(inv)
    }

    pub fn scale(&self, c: u64) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|&a| mul_mod(a, c, self.q)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % self.q
            })
            .collect();
        Self::new(self.q, c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let c = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + self.q - b) % self.q
            })
            .collect();
        Self::new(self.q, c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.q);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, self.q)) % self.q;
            }
        }
        Self::new(self.q, out)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let q = self.q;
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = inv_mod(divisor.leading(), q).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(q), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = mul_mod(rem[i], lead_inv, q);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = (rem[idx] + q - mul_mod(c, d, q)) % q;
            }
        }
        rem.truncate(dd);
        (Self::new(q, quot), Self::new(q, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended Euclid: returns `(g, u, v)` with `u*self + v*other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let q = self.q;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::constant(q, 1), Self::zero(q));
        let (mut t0, mut t1) = (Self::zero(q), Self::constant(q, 1));
        while !r1.is_zero() {
            let (quot, rem) = r0.div_rem(&r1);
            let s2 = s0.sub(&quot.mul(&s1));
            let t2 = t0.sub(&quot.mul(&t1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = inv_mod(r0.leading(), q).expect("nonzero leading coefficient");
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, mut exp: u64, modulus: &Self) -> Self {
        let mut acc = Self::constant(self.q, 1).rem(modulus);
        let mut base = self.rem(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            exp >>= 1;
        }
        acc
    }

    pub fn random_below<R: Rng + ?Sized>(q: u64, degree_bound: usize, rng: &mut R) -> Self {
        Self::new(q, (0..degree_bound).map(|_| rng.gen_range(0..q)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let q = 17;
        let a = Poly::new(q, vec![3, 0, 5, 1, 16, 2]);
        let b = Poly::new(q, vec![1, 4, 0, 3]);
        let (quot, rem) = a.div_rem(&b);
        assert!(rem.degree().unwrap_or(0) < 3);
        assert_eq!(quot.mul(&b).add(&rem), a);
    }

    #[test]
    fn ext_gcd_bezout() {
        let q = 13;
        let f = Poly::negacyclic_modulus(q, 4);
        let a = Poly::new(q, vec![2, 7, 0, 1]);
        let (g, u, v) = a.ext_gcd(&f);
        assert_eq!(u.mul(&a).add(&v.mul(&f)), g);
    }
}
