use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use super::modulus::{center, is_prime, residue, MAX_MODULUS};
use super::poly::Poly;
use crate::error::{Error, Result};

/// Dimension and modulus of `R_q = F_q[x]/(x^n + 1)`; `x` plays the role of ζ = ζ_{2n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingParams {
    n: usize,
    q: u64,
}

impl RingParams {
    /// `n` must be a power of two with `n >= 2`; `q` an odd prime not dividing `2n`.
    pub fn new(n: usize, q: u64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!("n = {n} is not a power of two >= 2")));
        }
        Self::subring(n, q)
    }

    /// Same checks as [`RingParams::new`] but admits `n = 1` (the ring F_q[x]/(x+1) = F_q),
    /// which shows up as the smallest cyclotomic subring.
    pub(crate) fn subring(n: usize, q: u64) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!("n = {n} is not a power of two")));
        }
        if q > MAX_MODULUS {
            return Err(Error::InvalidParams(format!("q = {q} exceeds {MAX_MODULUS}")));
        }
        if q.is_multiple_of(2) || !is_prime(q) {
            return Err(Error::InvalidParams(format!("q = {q} is not an odd prime")));
        }
        if (2 * n as u64).is_multiple_of(q) {
            return Err(Error::InvalidParams(format!("q = {q} ramifies (divides 2n)")));
        }
        Ok(RingParams { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Conductor `m = 2n`.
    pub fn m(&self) -> usize {
        2 * self.n
    }

    pub fn half_q(&self) -> i64 {
        (self.q as i64 - 1) / 2
    }

    pub(crate) fn check_same(&self, other: &RingParams) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ParamMismatch {
                left_n: self.n,
                left_q: self.q,
                right_n: other.n,
                right_q: other.q,
            })
        }
    }
}

/// An element of `R_q` in the ζ-basis: `coeffs[i]` is the centered coefficient of ζ^i.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    params: RingParams,
    coeffs: Vec<i64>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement(q={}, {:?})", self.params.q, self.coeffs)
    }
}

impl RingElement {
    pub fn zero(params: RingParams) -> Self {
        RingElement { params, coeffs: vec![0; params.n] }
    }

    pub fn one(params: RingParams) -> Self {
        Self::monomial(params, 0)
    }

    /// ζ^h for any integer `h`, using ζ^n = -1.
    pub fn monomial(params: RingParams, h: i64) -> Self {
        let n = params.n as i64;
        let e = h.rem_euclid(2 * n);
        let mut x = Self::zero(params);
        if e < n {
            x.coeffs[e as usize] = 1;
        } else {
            x.coeffs[(e - n) as usize] = center(-1, params.q);
        }
        x
    }

    /// Builds an element from arbitrary integers, reducing each into centered form.
    pub fn from_coeffs(params: RingParams, coeffs: &[i64]) -> Result<Self> {
        if coeffs.len() != params.n {
            return Err(Error::InvalidParams(format!(
                "expected {} coefficients, got {}",
                params.n,
                coeffs.len()
            )));
        }
        Ok(RingElement {
            params,
            coeffs: coeffs.iter().map(|&c| center(c, params.q)).collect(),
        })
    }

    /// Caller guarantees `coeffs` is already centered and of length `n`.
    pub(crate) fn from_centered(params: RingParams, coeffs: Vec<i64>) -> Self {
        debug_assert_eq!(coeffs.len(), params.n);
        RingElement { params, coeffs }
    }

    pub fn random<R: Rng + ?Sized>(params: RingParams, rng: &mut R) -> Self {
        let h = params.half_q();
        let coeffs = (0..params.n).map(|_| rng.gen_range(-h..=h)).collect();
        RingElement { params, coeffs }
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<i64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Largest absolute centered coefficient.
    pub fn max_abs(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.params.check_same(&other.params)?;
        let q = self.params.q;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| center(a + b, q))
            .collect();
        Ok(RingElement { params: self.params, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.params.check_same(&other.params)?;
        let q = self.params.q;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| center(a - b, q))
            .collect();
        Ok(RingElement { params: self.params, coeffs })
    }

    /// Schoolbook negacyclic product; the reference multiplication.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.params.check_same(&other.params)?;
        let n = self.params.n;
        let q = self.params.q as i128;
        let mut acc = vec![0i128; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let p = a as i128 * b as i128;
                let k = i + j;
                if k < n {
                    acc[k] += p;
                } else {
                    acc[k - n] -= p;
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .map(|c| center(c.rem_euclid(q) as i64, self.params.q))
            .collect();
        Ok(RingElement { params: self.params, coeffs })
    }

    pub fn scale(&self, c: i64) -> Self {
        let q = self.params.q;
        let c = center(c, q) as i128;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| center((a as i128 * c).rem_euclid(q as i128) as i64, q))
            .collect();
        RingElement { params: self.params, coeffs }
    }

    /// Multiplication by ζ^h as a signed cyclic shift.
    pub fn mul_zeta_pow(&self, h: i64) -> Self {
        let n = self.params.n;
        let h = h.rem_euclid(2 * n as i64) as usize;
        let mut out = vec![0i64; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let e = i + h;
            let (idx, neg) = if e < n {
                (e, false)
            } else if e < 2 * n {
                (e - n, true)
            } else {
                (e - 2 * n, false)
            };
            out[idx] = if neg { -c } else { c };
        }
        RingElement { params: self.params, coeffs: out }
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_signed(self.params.q, &self.coeffs)
    }

    /// Reduces a polynomial modulo `x^n + 1` into the ring.
    pub fn from_poly(params: RingParams, p: &Poly) -> Self {
        let n = params.n;
        let mut coeffs = vec![0i64; n];
        for (i, &c) in p.coeffs().iter().enumerate() {
            let c = c as i64;
            let wraps = i / n;
            if wraps.is_multiple_of(2) {
                coeffs[i % n] += c;
            } else {
                coeffs[i % n] -= c;
            }
        }
        let q = params.q;
        RingElement {
            params,
            coeffs: coeffs.into_iter().map(|c| center(c, q)).collect(),
        }
    }

    /// Multiplicative inverse, found with extended Euclid against `x^n + 1`.
    pub fn inverse(&self) -> Result<Self> {
        let q = self.params.q;
        let modulus = Poly::negacyclic_modulus(q, self.params.n);
        let (g, u, _) = self.to_poly().ext_gcd(&modulus);
        if g.degree() != Some(0) {
            return Err(Error::NotInvertible);
        }
        Ok(Self::from_poly(self.params, &u))
    }

    pub fn is_invertible(&self) -> bool {
        let modulus = Poly::negacyclic_modulus(self.params.q, self.params.n);
        self.to_poly().gcd(&modulus).degree() == Some(0)
    }

    /// Coefficients as residues in `[0, q)`.
    pub fn residues(&self) -> Vec<u64> {
        self.coeffs.iter().map(|&c| residue(c, self.params.q)).collect()
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.checked_add(rhs).expect("ring parameter mismatch")
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.checked_sub(rhs).expect("ring parameter mismatch")
    }
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.checked_mul(rhs).expect("ring parameter mismatch")
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement {
            params: self.params,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(n: usize, q: u64, c: &[i64]) -> RingElement {
        RingElement::from_coeffs(RingParams::new(n, q).unwrap(), c).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(RingParams::new(16, 17).is_ok());
        assert!(RingParams::new(12, 17).is_err());
        assert!(RingParams::new(1, 17).is_err());
        assert!(RingParams::new(8, 16).is_err());
        assert!(RingParams::new(8, 15).is_err());
        assert!(RingParams::new(8, 2).is_err());
    }

    #[test]
    fn addition_examples() {
        assert_eq!((&el(2, 5, &[2, 2]) + &el(2, 5, &[2, 2])).coeffs(), &[-1, -1]);
        assert_eq!((&el(2, 5, &[1, 0]) + &el(2, 5, &[0, 1])).coeffs(), &[1, 1]);
        let x = el(4, 17, &[3, -8, 0, 5]);
        assert!((&x + &(-&x)).is_zero());
    }

    #[test]
    fn mismatch_is_reported() {
        let x = el(4, 17, &[1, 0, 0, 0]);
        let y = el(4, 13, &[1, 0, 0, 0]);
        assert!(matches!(x.checked_add(&y), Err(Error::ParamMismatch { .. })));
        assert!(matches!(x.checked_mul(&y), Err(Error::ParamMismatch { .. })));
    }

    #[test]
    fn multiplication_examples() {
        // (1+ζ)(1+ζ^3) = 1 + ζ + ζ^3 + ζ^4, and ζ^4 = -1 in n = 4.
        let a = el(4, 17, &[1, 1, 0, 0]);
        let b = el(4, 17, &[1, 0, 0, 1]);
        assert_eq!((&a * &b).coeffs(), &[0, 1, 0, 1]);
        let p = RingParams::new(8, 17).unwrap();
        let top = RingElement::monomial(p, 7);
        let z = RingElement::monomial(p, 1);
        assert_eq!((&top * &z).coeffs(), &[-1, 0, 0, 0, 0, 0, 0, 0]);
        let x = el(4, 17, &[3, 1, 4, 1]);
        assert_eq!(&x * &RingElement::one(x.params()), x);
    }

    #[test]
    fn zeta_shift_examples() {
        let x = el(4, 17, &[1, 2, 3, 4]);
        assert_eq!(x.mul_zeta_pow(0), x);
        assert_eq!(x.mul_zeta_pow(4), -&x);
        assert_eq!(x.mul_zeta_pow(1).coeffs(), &[-4, 1, 2, 3]);
        let zeta = RingElement::monomial(x.params(), 1);
        assert_eq!(x.mul_zeta_pow(1), &x * &zeta);
    }

    #[test]
    fn inverse_examples() {
        let p = RingParams::new(8, 17).unwrap();
        assert_eq!(RingElement::one(p).inverse().unwrap(), RingElement::one(p));
        assert!(matches!(RingElement::zero(p).inverse(), Err(Error::NotInvertible)));
        // x^2 + 1 = (x-2)(x+2) mod 5, so ζ - 2 is a zero divisor in n = 2.
        let zd = el(2, 5, &[-2, 1]);
        assert!(matches!(zd.inverse(), Err(Error::NotInvertible)));
        assert!(!zd.is_invertible());
    }

    fn arb_element(n: usize, q: u64) -> impl Strategy<Value = RingElement> {
        let h = (q as i64 - 1) / 2;
        proptest::collection::vec(-h..=h, n)
            .prop_map(move |c| RingElement::from_coeffs(RingParams::new(n, q).unwrap(), &c).unwrap())
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_element(8, 17), b in arb_element(8, 17), c in arb_element(8, 17)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn zeta_shift_matches_product(a in arb_element(16, 97), h in 0i64..32) {
            let z = RingElement::monomial(a.params(), h);
            prop_assert_eq!(a.mul_zeta_pow(h), &a * &z);
        }

        #[test]
        fn zeta_shift_orbit(a in arb_element(8, 211)) {
            let mut x = a.clone();
            for step in 1..=16 {
                x = x.mul_zeta_pow(1);
                if step == 8 {
                    prop_assert_eq!(&x, &(-&a));
                }
            }
            prop_assert_eq!(x, a);
        }

        #[test]
        fn inverse_round_trip(a in arb_element(8, 17)) {
            let g = a.to_poly().gcd(&Poly::negacyclic_modulus(17, 8));
            match a.inverse() {
                Ok(inv) => {
                    prop_assert_eq!(&a * &inv, RingElement::one(a.params()));
                    prop_assert_eq!(g.degree(), Some(0));
                }
                Err(_) => prop_assert!(g.degree() != Some(0)),
            }
        }
    }
}
