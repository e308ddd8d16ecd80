//! Predicted densities of `V(S)`.
//!
//! The density is the Euler product `∏_P (1 - s(P)/N(P)^m)`. It is bracketed
//! by truncating at norm `X` and bounding the tail: at most `n` primes share a
//! prime-power norm and `s(P) <= |S|`, so with `T(X) = Σ_{k>X} k^-m <=
//! 1/((m-1) X^(m-1))` and `-log(1-u) <= 2u` for `u <= 1/2`, the tail factor
//! lies in `[exp(-2 n |S| T(X)), 1]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ideals::{dedup_points, ideal_mul, IdealHNF, PointTuple};
use crate::numfield::FieldSpec;
use crate::primes::{primes_up_to_norm, s_of_prime, PrimeIdeal, PrimeWindow};

/// Significant digits of the rounded interval endpoints.
pub const DISPLAY_DIGITS: usize = 30;

/// State-space cap for the brute-force CRT enumeration.
pub const DEFAULT_CRT_CAP: u64 = 100_000_000;

/// A rigorous bracket `[lo, hi]` for the Euler product.
#[derive(Clone, Debug)]
pub struct PredictionInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Norm bound actually used; at least the requested one.
    pub cutoff_x: u64,
    /// `∏_{N(P) <= X} (1 - s(P)/N(P)^m)`.
    pub partial_product: BigRational,
    /// The tail exponent `2 n |S| / ((m-1) X^(m-1))`.
    pub tail_exponent: BigRational,
    /// A prime with `s(P) = N(P)^m`, which forces density 0.
    pub zero_certificate: Option<PrimeIdeal>,
}

impl PredictionInterval {
    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `lo` rounded down to [`DISPLAY_DIGITS`] significant digits.
    pub fn lo_decimal(&self) -> String {
        to_decimal(&self.lo, DISPLAY_DIGITS, Rounding::Down)
    }

    /// `hi` rounded up to [`DISPLAY_DIGITS`] significant digits.
    pub fn hi_decimal(&self) -> String {
        to_decimal(&self.hi, DISPLAY_DIGITS, Rounding::Up)
    }

    /// Distance from `x` to the interval (0 inside it).
    pub fn distance(&self, x: f64) -> f64 {
        let (lo, hi) = (to_f64(&self.lo), to_f64(&self.hi));
        (lo - x).max(x - hi).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
}

/// Decimal expansion of a nonnegative rational with `digits` significant
/// digits, rounded in the given direction.
pub fn to_decimal(r: &BigRational, digits: usize, rounding: Rounding) -> String {
    assert!(!r.is_negative(), "only nonnegative values are formatted");
    assert!(digits > 0);
    if r.is_zero() {
        return "0".to_string();
    }
    // e = floor(log10 r)
    let ten = BigInt::from(10);
    let mut e: i64 = r.to_integer().to_string().len() as i64 - 1;
    if r.to_integer().is_zero() {
        e = -1;
        let mut scaled = r * &ten;
        while scaled.to_integer().is_zero() {
            scaled *= &ten;
            e -= 1;
        }
    }
    let shift = digits as i64 - 1 - e;
    let scaled = if shift >= 0 {
        r * BigRational::from_integer(ten.pow(shift as u32))
    } else {
        r / BigRational::from_integer(ten.pow((-shift) as u32))
    };
    let q = match rounding {
        Rounding::Down => scaled.floor().to_integer(),
        Rounding::Up => scaled.ceil().to_integer(),
    };
    if shift <= 0 {
        return format!("{}{}", q, "0".repeat((-shift) as usize));
    }
    let s = q.to_string();
    let shift = shift as usize;
    let (int, frac) = if s.len() > shift {
        let (a, b) = s.split_at(s.len() - shift);
        (a.to_string(), b.to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(shift - s.len()), s))
    };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int
    } else {
        format!("{int}.{frac}")
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_set(set: &[PointTuple], m: usize, n: usize) -> Result<Vec<PointTuple>> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    for t in set {
        if t.m() != m {
            return Err(Error::DimensionMismatch { expected: m, got: t.m() });
        }
        if let Some(a) = t.coords().iter().find(|a| a.degree() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: a.degree() });
        }
    }
    let mut set = set.to_vec();
    dedup_points(&mut set);
    Ok(set)
}

/// Product of many integers by pairwise splitting.
fn product_tree(mut xs: Vec<BigInt>) -> BigInt {
    if xs.is_empty() {
        return BigInt::one();
    }
    while xs.len() > 1 {
        xs = xs
            .par_chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    xs.pop().unwrap()
}

/// `1 - s/N^m` for one prime, as (numerator, denominator).
fn factor(prime: &PrimeIdeal, s: usize, m: usize) -> (BigInt, BigInt) {
    let den = BigInt::from(prime.norm()).pow(m as u32);
    (&den - BigInt::from(s), den)
}

/// A lower bound for `exp(-y)` valid for all `y >= 0`: the cubic Taylor
/// polynomial, clamped at 0.
fn exp_neg_lower(y: &BigRational) -> BigRational {
    let y2 = y * y;
    let y3 = &y2 * y;
    let v = BigRational::one() - y + y2 / BigInt::from(2) - y3 / BigInt::from(6);
    if v.is_negative() {
        BigRational::zero()
    } else {
        v
    }
}

/// Rigorous interval for the density of `V(S)` in `O^m`, truncating the Euler
/// product at norm `x` (raised if needed so that `2|S| <= X^m`).
pub fn predicted_density(field: &FieldSpec, set: &[PointTuple], m: usize, x: u64) -> Result<PredictionInterval> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("cutoff X must be at least 2, got {x}")));
    }
    let set = check_set(set, m, field.degree())?;
    let mut x = x;
    while BigInt::from(x).pow(m as u32) < BigInt::from(2 * set.len()) {
        x *= 2;
    }
    let primes = primes_up_to_norm(field, x)?;
    let s_values: Vec<usize> = primes.par_iter().map(|p| s_of_prime(&set, p)).collect::<Result<_>>()?;
    let tail_exponent = BigRational::new(
        BigInt::from(2 * field.degree() * set.len()),
        BigInt::from(m - 1) * BigInt::from(x).pow(m as u32 - 1),
    );
    let certificate = primes
        .iter()
        .zip(&s_values)
        .find(|(p, &s)| BigInt::from(s) == BigInt::from(p.norm()).pow(m as u32))
        .map(|(p, _)| p.clone());
    if certificate.is_some() {
        return Ok(PredictionInterval {
            lo: BigRational::zero(),
            hi: BigRational::zero(),
            cutoff_x: x,
            partial_product: BigRational::zero(),
            tail_exponent,
            zero_certificate: certificate,
        });
    }
    let (nums, dens): (Vec<BigInt>, Vec<BigInt>) =
        primes.par_iter().zip(&s_values).map(|(p, &s)| factor(p, s, m)).unzip();
    let partial = BigRational::new(product_tree(nums), product_tree(dens));
    let lo = &partial * exp_neg_lower(&tail_exponent);
    Ok(PredictionInterval {
        lo,
        hi: partial.clone(),
        cutoff_x: x,
        partial_product: partial,
        tail_exponent,
        zero_certificate: None,
    })
}

/// `Σ μ(I)/N(I)^s` over ideals of norm at most `x`. Only squarefree ideals
/// contribute, so the sum runs over products of distinct primes.
pub fn zeta_recip_truncated(field: &FieldSpec, s: u32, x: u64) -> Result<BigRational> {
    if s < 2 {
        return Err(Error::InvalidArgument(format!("exponent s must be at least 2, got {s}")));
    }
    if x < 1 {
        return Err(Error::InvalidArgument("cutoff X must be at least 1".into()));
    }
    let norms: Vec<u64> = if x >= 2 { primes_up_to_norm(field, x)?.iter().map(|p| p.norm()).collect() } else { vec![] };
    // (sign, norm) of every squarefree ideal with norm <= x, by depth-first
    // search over increasing prime indices
    let mut terms: Vec<(bool, u64)> = vec![(true, 1)];
    let mut stack: Vec<(usize, u64, bool)> = vec![(0, 1, true)];
    while let Some((start, norm, positive)) = stack.pop() {
        for (i, &q) in norms.iter().enumerate().skip(start) {
            let Some(next) = norm.checked_mul(q).filter(|&v| v <= x) else {
                break;
            };
            terms.push((!positive, next));
            stack.push((i + 1, next, !positive));
        }
    }
    let fractions: Vec<(BigInt, BigInt)> = terms
        .into_par_iter()
        .map(|(positive, norm)| {
            let sign = if positive { BigInt::one() } else { -BigInt::one() };
            (sign, BigInt::from(norm).pow(s))
        })
        .collect();
    let (num, den) = sum_tree(fractions);
    Ok(BigRational::new(num, den))
}

/// Sum of fractions without intermediate reduction.
fn sum_tree(mut xs: Vec<(BigInt, BigInt)>) -> (BigInt, BigInt) {
    if xs.is_empty() {
        return (BigInt::zero(), BigInt::one());
    }
    while xs.len() > 1 {
        xs = xs
            .par_chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    let ((a, b), (c2, d)) = (&c[0], &c[1]);
                    (a * d + c2 * b, b * d)
                } else {
                    c[0].clone()
                }
            })
            .collect();
    }
    xs.pop().unwrap()
}

/// Upper bound for `Σ_{N(I) > x} 1/N(I)^s` over all ideals of a degree-`n`
/// field, hence for the truncation error of [`zeta_recip_truncated`].
///
/// The number of ideals of norm `k` is at most the `n`-fold divisor count
/// `τ_n(k)`, and `Σ_{k<=t} τ_n(k) <= t (1 + ln t)^(n-1)`. Partial summation
/// then gives `s ∫_x^∞ (1 + ln t)^(n-1) t^-s dt`, evaluated in closed form.
pub fn mobius_tail_bound(n: usize, s: u32, x: u64) -> f64 {
    assert!(n >= 1 && s >= 2 && x >= 1);
    let a = (s - 1) as f64;
    let l = (x as f64).ln();
    let bound = if n == 1 {
        1.0 / (a * (x as f64).powf(a))
    } else {
        let k = n - 1;
        let mut sum = 0.0;
        let mut falling = 1.0; // k! / (k-j)!
        for j in 0..=k {
            sum += falling * (1.0 + l).powi((k - j) as i32) / a.powi(j as i32 + 1);
            falling *= (k - j) as f64;
        }
        s as f64 * (-a * l).exp() * sum
    };
    // absorb floating-point rounding in the evaluation
    bound * (1.0 + 1e-9)
}

/// The density of points that are visible from `S` at every prime of a
/// finite window, computed two independent ways.
#[derive(Clone, Debug)]
pub struct ExactDensity {
    /// Product of the per-prime factors.
    pub value: BigRational,
    /// Brute-force count over the residue tuples of `∏ (O/P)^m`.
    pub crt_value: BigRational,
    pub window: PrimeWindow,
    pub per_prime_factors: Vec<(PrimeIdeal, BigRational)>,
    /// Number of residue tuples enumerated.
    pub crt_states: u64,
}

impl ExactDensity {
    pub fn agrees(&self) -> bool {
        self.value == self.crt_value
    }
}

pub fn exact_window_density(field: &FieldSpec, set: &[PointTuple], m: usize, window: &PrimeWindow) -> Result<ExactDensity> {
    exact_window_density_capped(field, set, m, window, DEFAULT_CRT_CAP)
}

/// As [`exact_window_density`], rejecting windows whose residue tuple count
/// exceeds `cap`.
pub fn exact_window_density_capped(
    field: &FieldSpec,
    set: &[PointTuple],
    m: usize,
    window: &PrimeWindow,
    cap: u64,
) -> Result<ExactDensity> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let set = check_set(set, m, field.degree())?;
    let n = field.degree();

    // method (a): product of window measures
    let mut per_prime_factors = Vec::with_capacity(window.primes().len());
    for p in window.primes() {
        let (num, den) = factor(p, s_of_prime(&set, p)?, m);
        per_prime_factors.push((p.clone(), BigRational::new(num, den)));
    }
    let value = per_prime_factors.iter().fold(BigRational::one(), |acc, (_, f)| acc * f);

    // method (b): enumerate (O/M)^m for M the product of the window primes
    let modulus = window
        .primes()
        .iter()
        .fold(IdealHNF::unit(n), |acc, p| ideal_mul(field, &acc, p.hnf()));
    let size = modulus.norm().to_f64().unwrap_or(f64::INFINITY).powi(m as i32);
    if size > cap as f64 {
        return Err(Error::CapExceeded { what: "CRT residue tuples", size, cap });
    }
    let residues = residue_box(&modulus);
    let set_small: Vec<Vec<Vec<i64>>> = set
        .iter()
        .map(|t| t.to_i64s().ok_or_else(|| Error::Overflow("S coordinates exceed i64".into())))
        .collect::<Result<_>>()?;
    // bit (j, k) of masks[i][r]: residue r agrees with coordinate i of S[k] modulo window prime j
    let pairs = window.primes().len() * set.len();
    if pairs > 128 {
        return Err(Error::InvalidArgument(format!(
            "{pairs} (prime, point) pairs exceed the 128-bit enumeration mask"
        )));
    }
    let masks: Vec<Vec<u128>> = (0..m)
        .map(|i| {
            residues
                .par_iter()
                .map(|r| {
                    let mut mask = 0u128;
                    for (j, p) in window.primes().iter().enumerate() {
                        for (k, s) in set_small.iter().enumerate() {
                            let diff: Vec<i64> = r.iter().zip(&s[i]).map(|(a, b)| a - b).collect();
                            if p.hnf().contains_coords(&diff) {
                                mask |= 1u128 << (j * set.len() + k);
                            }
                        }
                    }
                    mask
                })
                .collect()
        })
        .collect();
    let excluded: u64 = (0..residues.len())
        .into_par_iter()
        .map(|first| count_excluded(&masks, 1, masks[0][first]))
        .sum();
    let total = BigInt::from(residues.len()).pow(m as u32);
    let crt_value = BigRational::new(&total - BigInt::from(excluded), total.clone());
    Ok(ExactDensity {
        value,
        crt_value,
        window: window.clone(),
        per_prime_factors,
        crt_states: total.to_u64().unwrap_or(u64::MAX),
    })
}

/// Tuples over coordinates `i..m` whose masks, ANDed with `acc`, are nonzero.
fn count_excluded(masks: &[Vec<u128>], i: usize, acc: u128) -> u64 {
    if i == masks.len() {
        return (acc != 0) as u64;
    }
    if acc == 0 {
        return 0;
    }
    masks[i].iter().map(|&mk| count_excluded(masks, i + 1, acc & mk)).sum()
}

/// The complete residue system `{Σ c_i e_i : 0 <= c_i < d_i}` of `O/M`, where
/// `d` is the HNF diagonal of `M`.
fn residue_box(modulus: &IdealHNF) -> Vec<Vec<i64>> {
    let diag: Vec<i64> = modulus.diagonal().iter().map(|d| d.to_i64().expect("window modulus fits in i64")).collect();
    let mut out = vec![vec![]];
    for &d in &diag {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (0..d).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Whether a rational lies in `[0, 1]`.
pub fn is_probability(r: &BigRational) -> bool {
    !r.is_negative() && r <= &BigRational::one()
}
