//! Irreducibility of monic integer polynomials over Q.
//!
//! Two stages: factor-degree patterns modulo small primes rule out most
//! candidate factor degrees; whatever survives is settled by Kronecker's
//! interpolation search for a monic factor of that degree.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{divisors, primes_up_to};
use crate::error::{Error, Result};
use crate::fp_poly::poly_factor_mod_p;

const PATTERN_PRIMES: u64 = 600;
const KRONECKER_VALUE_LIMIT: u64 = 1_000_000_000_000;
const KRONECKER_COMBINATION_LIMIT: u64 = 5_000_000;

fn eval(poly: &[i64], x: i64) -> BigInt {
    poly.iter().rev().fold(BigInt::zero(), |acc, &c| acc * x + c)
}

/// Subset sums of the factor degrees modulo one prime.
fn degree_pattern(poly: &[i64], p: u64) -> BTreeSet<usize> {
    let mut sums = BTreeSet::from([0usize]);
    let factors = poly_factor_mod_p(poly, p, 0).expect("p is prime");
    for (g, e) in factors {
        let d = g.degree().unwrap_or(0);
        for _ in 0..e {
            let shifted: Vec<usize> = sums.iter().map(|s| s + d).collect();
            sums.extend(shifted);
        }
    }
    sums
}

/// Returns whether `poly` (monic, constant term first) is irreducible over Q.
pub fn is_irreducible_over_q(poly: &[i64]) -> Result<bool> {
    if poly.len() < 2 || *poly.last().unwrap() != 1 {
        return Err(Error::NotMonic);
    }
    let n = poly.len() - 1;
    if n == 1 {
        return Ok(true);
    }
    if poly[0] == 0 {
        return Ok(false);
    }
    // candidate degrees of a factor, up to n/2 by symmetry
    let mut candidates: BTreeSet<usize> = (1..=n / 2).collect();
    for p in primes_up_to(PATTERN_PRIMES) {
        if candidates.is_empty() {
            return Ok(true);
        }
        let pattern = degree_pattern(poly, p);
        candidates.retain(|d| pattern.contains(d));
    }
    for d in candidates {
        if kronecker_has_factor(poly, d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn poly_from_rationals(coeffs: &[BigRational]) -> Option<Vec<BigInt>> {
    coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
}

/// Lagrange interpolation through `(xs[i], ys[i])`, coefficients constant first.
fn interpolate(xs: &[i64], ys: &[BigInt]) -> Vec<BigRational> {
    let k = xs.len();
    let mut out = vec![BigRational::zero(); k];
    for i in 0..k {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigInt::one();
        for j in 0..k {
            if j == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (t, c) in basis.iter().enumerate() {
                next[t + 1] += c;
                next[t] -= c * BigRational::from_integer(BigInt::from(xs[j]));
            }
            basis = next;
            denom *= xs[i] - xs[j];
        }
        let scale = BigRational::new(ys[i].clone(), denom);
        for (t, c) in basis.iter().enumerate() {
            out[t] += c * &scale;
        }
    }
    out
}

/// Exact division test of monic integer polynomials.
fn divides(divisor: &[BigInt], poly: &[i64]) -> bool {
    let mut rem: Vec<BigInt> = poly.iter().map(|&c| BigInt::from(c)).collect();
    let d = divisor.len() - 1;
    for k in (0..rem.len() - d).rev() {
        let q = rem[k + d].clone();
        if q.is_zero() {
            continue;
        }
        for (j, c) in divisor.iter().enumerate() {
            rem[k + j] -= &q * c;
        }
    }
    rem.iter().all(Zero::is_zero)
}

fn kronecker_has_factor(poly: &[i64], d: usize) -> Result<bool> {
    let mut xs = Vec::with_capacity(d + 1);
    let mut values = Vec::with_capacity(d + 1);
    let mut x = 0i64;
    while xs.len() < d + 1 {
        let v = eval(poly, x);
        if v.is_zero() {
            // integer root, so there is a linear factor
            return Ok(true);
        }
        xs.push(x);
        values.push(v);
        x = if x <= 0 { -x + 1 } else { -x };
    }
    let mut divisor_sets = Vec::with_capacity(d + 1);
    let mut combinations: u64 = 1;
    for v in &values {
        let abs = v
            .abs()
            .to_u64()
            .filter(|&a| a <= KRONECKER_VALUE_LIMIT)
            .ok_or_else(|| Error::IrreducibilityUnknown(format!("value {v} too large to factor")))?;
        let divs: Vec<BigInt> = divisors(abs)
            .into_iter()
            .flat_map(|q| [BigInt::from(q), -BigInt::from(q)])
            .collect();
        combinations = combinations.saturating_mul(divs.len() as u64);
        divisor_sets.push(divs);
    }
    if combinations > KRONECKER_COMBINATION_LIMIT {
        return Err(Error::IrreducibilityUnknown(format!(
            "{combinations} interpolation candidates for degree {d}"
        )));
    }
    let mut choice = vec![0usize; d + 1];
    loop {
        let ys: Vec<BigInt> = choice.iter().zip(&divisor_sets).map(|(&c, s)| s[c].clone()).collect();
        let coeffs = interpolate(&xs, &ys);
        if let Some(ints) = poly_from_rationals(&coeffs) {
            if ints[d].is_one() && divides(&ints, poly) {
                return Ok(true);
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(false);
            }
            choice[i] += 1;
            if choice[i] < divisor_sets[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!(is_irreducible_over_q(&[1, 0, 1]).unwrap());
        assert!(is_irreducible_over_q(&[-1, -1, 0, 1]).unwrap());
        assert!(is_irreducible_over_q(&[-2, 0, 1]).unwrap());
        assert!(!is_irreducible_over_q(&[-1, 0, 1]).unwrap());
        assert!(!is_irreducible_over_q(&[0, 0, 1]).unwrap());
        assert!(!is_irreducible_over_q(&[-4, 0, 1]).unwrap());
        assert!(is_irreducible_over_q(&[7, 1]).unwrap());
    }

    #[test]
    fn pattern_inconclusive_cases() {
        // reducible modulo every prime, yet irreducible over Q
        assert!(is_irreducible_over_q(&[1, 0, 0, 0, 1]).unwrap());
        assert!(is_irreducible_over_q(&[1, 0, -10, 0, 1]).unwrap());
        // (x^2 + 1)(x^2 + 2) and (x^2 + x + 1)(x^2 - 3) have no rational roots
        assert!(!is_irreducible_over_q(&[2, 0, 3, 0, 1]).unwrap());
        assert!(!is_irreducible_over_q(&[-3, -3, -2, 1, 1]).unwrap());
    }

    #[test]
    fn not_monic_rejected() {
        assert_eq!(is_irreducible_over_q(&[1, 2]), Err(Error::NotMonic));
        assert_eq!(is_irreducible_over_q(&[1]), Err(Error::NotMonic));
    }
}
