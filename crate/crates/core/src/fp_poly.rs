//! Dense univariate polynomials over a prime field F_p and their factorization
//! (squarefree, distinct-degree and Cantor-Zassenhaus equal-degree splitting).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime, mul_mod, pow_mod};
use crate::error::{Error, Result};

/// Polynomial over F_p. Coefficients are stored constant term first, reduced
/// into `[0, p)`, with no trailing zeros (the zero polynomial is empty).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpPoly(p={}, {:?})", self.p, self.coeffs)
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Canonical factor order: by degree, then coefficients from the constant term up.
impl Ord for FpPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p
            .cmp(&other.p)
            .then(self.coeffs.len().cmp(&other.coeffs.len()))
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl PartialOrd for FpPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = FpPoly { p, coeffs: coeffs.into_iter().map(|c| c % p).collect() };
        poly.trim();
        poly
    }

    /// Reduces integer coefficients (constant term first) modulo `p`.
    pub fn from_i64s(p: u64, coeffs: &[i64]) -> Self {
        let reduced = coeffs.iter().map(|&c| (c as i128).rem_euclid(p as i128) as u64).collect();
        FpPoly::new(p, reduced)
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::new(p, vec![1])
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn deg(&self) -> usize {
        self.degree().expect("degree of the zero polynomial")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (mul_mod(acc, x, self.p) + c) % self.p)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                ((a as u128 + b as u128) % self.p as u128) as u64
            })
            .collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|&c| (self.p - c) % self.p).collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn scale(&self, k: u64) -> Self {
        let coeffs = self.coeffs.iter().map(|&c| mul_mod(c, k, self.p)).collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let mut acc = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        let p = self.p as u128;
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % p;
            }
        }
        FpPoly::new(self.p, acc.into_iter().map(|c| c as u64).collect())
    }

    /// Euclidean division. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let p = self.p;
        let mut rem = self.coeffs.clone();
        let dd = divisor.deg();
        if rem.len() <= dd {
            return (FpPoly::zero(p), self.clone());
        }
        let inv_lead = self.inv(divisor.lead());
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = mul_mod(rem[k + dd], inv_lead, p);
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let t = mul_mod(c, d, p);
                rem[k + j] = (rem[k + j] + p - t) % p;
            }
        }
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Exact quotient; debug-asserts a zero remainder.
    fn div_exact(&self, divisor: &Self) -> Self {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero());
        q
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.inv(self.lead()))
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % self.p, self.p))
            .collect();
        FpPoly::new(self.p, coeffs)
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Self {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, exp: &BigUint, modulus: &Self) -> Self {
        let mut acc = FpPoly::one(self.p).rem(modulus);
        let base = self.rem(modulus);
        for i in (0..exp.bits()).rev() {
            acc = acc.mul_mod(&acc, modulus);
            if exp.bit(i) {
                acc = acc.mul_mod(&base, modulus);
            }
        }
        acc
    }

    /// For `f(x) = g(x^p)` returns `g`, the p-th root over F_p.
    fn pth_root(&self) -> Self {
        let p = self.p as usize;
        let coeffs = self.coeffs.iter().step_by(p).copied().collect();
        FpPoly::new(self.p, coeffs)
    }

    /// Brute-force irreducibility check for tiny fields: no monic divisor of
    /// degree `1..=deg/2`. Intended for cross-checking the factorizer.
    pub fn is_irreducible_brute_force(&self) -> bool {
        let d = match self.degree() {
            Some(d) if d >= 1 => d,
            _ => return false,
        };
        for k in 1..=d / 2 {
            let count = (self.p as u128).pow(k as u32);
            for idx in 0..count {
                let mut coeffs = Vec::with_capacity(k + 1);
                let mut rest = idx;
                for _ in 0..k {
                    coeffs.push((rest % self.p as u128) as u64);
                    rest /= self.p as u128;
                }
                coeffs.push(1);
                let cand = FpPoly::new(self.p, coeffs);
                if self.rem(&cand).is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.modulus();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let fd = f.derivative();
    if fd.is_zero() {
        for (g, k) in squarefree_decomposition(&f.pth_root()) {
            out.push((g, k * p as u32));
        }
        return out;
    }
    let mut c = f.gcd(&fd);
    let mut w = f.div_exact(&c).monic();
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.div_exact(&y).monic();
        if !z.is_one() {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = c.div_exact(&w).monic();
    }
    if !c.is_one() {
        for (g, k) in squarefree_decomposition(&c.pth_root()) {
            out.push((g, k * p as u32));
        }
    }
    out
}

/// Splits a monic squarefree polynomial into products of irreducible factors
/// of equal degree, returned as `(product, degree)`.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.modulus();
    let pe = BigUint::from(p);
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.rem(&rest);
    let mut d = 1usize;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.pow_mod(&pe, &rest);
        let g = h.sub(&x).gcd(&rest);
        if !g.is_one() {
            rest = rest.div_exact(&g).monic();
            h = h.rem(&rest);
            out.push((g, d));
        }
        d += 1;
    }
    if rest.degree().unwrap_or(0) > 0 {
        let deg = rest.deg();
        out.push((rest, deg));
    }
    out
}

fn random_poly<R: Rng>(p: u64, below_degree: usize, rng: &mut R) -> FpPoly {
    let coeffs = (0..below_degree).map(|_| rng.gen_range(0..p)).collect();
    FpPoly::new(p, coeffs)
}

/// Cantor-Zassenhaus: splits a monic product of irreducibles of degree `d`.
fn equal_degree<R: Rng>(f: &FpPoly, d: usize, rng: &mut R, out: &mut Vec<FpPoly>) {
    let n = f.deg();
    if n == d {
        out.push(f.clone());
        return;
    }
    let p = f.modulus();
    let exponent = if p == 2 {
        BigUint::zero()
    } else {
        (BigUint::from(p).pow(d as u32) - BigUint::one()) >> 1
    };
    loop {
        let a = random_poly(p, n, rng);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = a.gcd(f);
        let candidate = if g.is_one() {
            let b = if p == 2 {
                // absolute trace F_{2^d} -> F_2: a + a^2 + ... + a^(2^(d-1))
                let mut t = a.rem(f);
                let mut acc = t.clone();
                for _ in 1..d {
                    t = t.mul_mod(&t, f);
                    acc = acc.add(&t);
                }
                acc
            } else {
                a.pow_mod(&exponent, f).sub(&FpPoly::one(p))
            };
            b.gcd(f)
        } else {
            g
        };
        let cd = candidate.degree().unwrap_or(0);
        if cd > 0 && cd < n {
            let other = f.div_exact(&candidate).monic();
            equal_degree(&candidate, d, rng, out);
            equal_degree(&other, d, rng, out);
            return;
        }
    }
}

/// Complete factorization of a nonzero polynomial over F_p into monic
/// irreducible factors with multiplicities, in canonical order.
pub fn factor_with_rng<R: Rng>(f: &FpPoly, rng: &mut R) -> Vec<(FpPoly, u32)> {
    let mut out = Vec::new();
    for (sqf, mult) in squarefree_decomposition(&f.monic()) {
        for (prod, d) in distinct_degree(&sqf) {
            let mut pieces = Vec::new();
            equal_degree(&prod, d, rng, &mut pieces);
            out.extend(pieces.into_iter().map(|g| (g, mult)));
        }
    }
    out.sort();
    out
}

/// Factors an integer polynomial (constant term first) modulo the prime `p`.
/// The result does not depend on `seed`; it only drives the random splitting.
pub fn poly_factor_mod_p(poly: &[i64], p: u64, seed: u64) -> Result<Vec<(FpPoly, u32)>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let f = FpPoly::from_i64s(p, poly);
    if f.is_zero() {
        return Err(Error::InvalidArgument("cannot factor the zero polynomial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
    Ok(factor_with_rng(&f, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fac(poly: &[i64], p: u64) -> Vec<(Vec<u64>, u32)> {
        poly_factor_mod_p(poly, p, 7)
            .unwrap()
            .into_iter()
            .map(|(g, e)| (g.coeffs().to_vec(), e))
            .collect()
    }

    #[test]
    fn x2_plus_1() {
        // roots 2 and 3 mod 5
        assert_eq!(fac(&[1, 0, 1], 5), vec![(vec![2, 1], 1), (vec![3, 1], 1)]);
        assert_eq!(fac(&[1, 0, 1], 3), vec![(vec![1, 0, 1], 1)]);
        assert_eq!(fac(&[1, 0, 1], 2), vec![(vec![1, 1], 2)]);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(poly_factor_mod_p(&[1, 0, 1], 9, 0), Err(Error::NotPrime(9)));
    }

    #[test]
    fn inseparable_input() {
        // x^4 + 1 = (x + 1)^4 over F_2; x^6 - 1 = (x - 1)^3 (x + 1)^3 over F_3
        assert_eq!(fac(&[1, 0, 0, 0, 1], 2), vec![(vec![1, 1], 4)]);
        assert_eq!(fac(&[-1, 0, 0, 0, 0, 0, 1], 3), vec![(vec![1, 1], 3), (vec![2, 1], 3)]);
    }

    #[test]
    fn display() {
        assert_eq!(FpPoly::new(5, vec![3, 0, 1]).to_string(), "x^2 + 3");
        assert_eq!(FpPoly::zero(5).to_string(), "0");
    }

    fn product(factors: &[(FpPoly, u32)], p: u64) -> FpPoly {
        factors.iter().fold(FpPoly::one(p), |acc, (g, e)| {
            (0..*e).fold(acc, |acc, _| acc.mul(g))
        })
    }

    proptest! {
        #[test]
        fn factorization_reproduces_input_with_irreducible_factors(
            p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
            body in prop::collection::vec(-20i64..20, 1..=6),
            seed in any::<u64>(),
        ) {
            let mut coeffs = body;
            coeffs.push(1);
            let f = FpPoly::from_i64s(p, &coeffs);
            let factors = poly_factor_mod_p(&coeffs, p, seed).unwrap();
            prop_assert_eq!(product(&factors, p), f);
            for (g, _) in &factors {
                prop_assert_eq!(g.lead(), 1);
                if g.degree().unwrap() <= 3 {
                    prop_assert!(g.is_irreducible_brute_force(), "{} reducible", g);
                }
            }
            // seed independence
            prop_assert_eq!(poly_factor_mod_p(&coeffs, p, seed.wrapping_add(1)).unwrap(), factors);
        }
    }
}
