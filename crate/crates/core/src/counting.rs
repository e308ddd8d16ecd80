//! Counting points of `V(S)` in `A^m` for cube and ball regions `A`.
//!
//! Three counters share one contract: [`count_visible_direct`] tests every
//! tuple, [`count_visible_sieve`] marks the invisible tuples prime by prime,
//! and [`mc_estimate`] samples. The sieve is exact because a prime containing
//! every coordinate of a nonzero difference `z - s` divides one nonzero
//! coordinate `d`, hence has norm at most `|N(d)|`; sieving by every prime of
//! norm up to the largest such norm therefore finds all invisible tuples.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideals::{dedup_points, generates_unit_ideal, IdealHNF, PointTuple};
use crate::numfield::{AlgInt, FieldSpec};
use crate::primes::{primes_up_to_norm, reduce_tuple, PrimeIdeal};

/// Size limits for enumeration-based methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Points in one enumerated region.
    pub region: u64,
    /// Tuples in `region^m` for direct counting and the sieve bit set.
    pub tuples: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { region: 1 << 26, tuples: 1 << 31 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// Coordinates in `[-l, l]`.
    Cube { l: u64 },
    /// Coordinates with `Σ c_i^2 <= r^2`.
    Ball { r: f64 },
}

/// A cube or ball in coordinate space, optionally pulled back through a
/// unimodular transform `T`: `a` belongs to the region iff `T a` lies in the
/// shape.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    shape: Shape,
    degree: usize,
    basis_transform: Option<Vec<Vec<i64>>>,
    #[serde(skip)]
    inverse: Option<Vec<Vec<i64>>>,
}

impl Region {
    pub fn cube(degree: usize, l: u64) -> Self {
        Region { shape: Shape::Cube { l }, degree, basis_transform: None, inverse: None }
    }

    pub fn ball(degree: usize, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {r}")));
        }
        Ok(Region { shape: Shape::Ball { r }, degree, basis_transform: None, inverse: None })
    }

    pub fn new(degree: usize, shape: Shape) -> Result<Self> {
        match shape {
            Shape::Cube { l } => Ok(Region::cube(degree, l)),
            Shape::Ball { r } => Region::ball(degree, r),
        }
    }

    /// Applies a unimodular integer transform to coordinates before the
    /// shape test.
    pub fn with_transform(mut self, t: Vec<Vec<i64>>) -> Result<Self> {
        let n = self.degree;
        if t.len() != n || t.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: t.len() });
        }
        self.inverse = Some(unimodular_inverse(&t)?);
        self.basis_transform = Some(t);
        Ok(self)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_transform(&self) -> Option<&[Vec<i64>]> {
        self.basis_transform.as_deref()
    }

    /// Short label such as `cube:L=20` or `ball:R=30`.
    pub fn label(&self) -> String {
        let base = match self.shape {
            Shape::Cube { l } => format!("cube:L={l}"),
            Shape::Ball { r } => format!("ball:R={r}"),
        };
        if self.basis_transform.is_some() {
            format!("{base}:T")
        } else {
            base
        }
    }

    /// Euclidean volume of the shape: `(2L)^n` or `V_n R^n`.
    pub fn volume(&self) -> f64 {
        match self.shape {
            Shape::Cube { l } => (2.0 * l as f64).powi(self.degree as i32),
            Shape::Ball { r } => unit_ball_volume(self.degree) * r.powi(self.degree as i32),
        }
    }

    /// Number of lattice points, without enumerating them.
    pub fn lattice_count(&self) -> u64 {
        match self.shape {
            Shape::Cube { l } => (2 * l + 1).pow(self.degree as u32),
            Shape::Ball { r } => ball_count(self.degree, r_squared(r)),
        }
    }

    fn contains_shape(&self, c: &[i64]) -> bool {
        match self.shape {
            Shape::Cube { l } => c.iter().all(|&x| x.unsigned_abs() <= l),
            Shape::Ball { r } => c.iter().map(|&x| (x as i128) * (x as i128)).sum::<i128>() <= r_squared(r) as i128,
        }
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        match &self.basis_transform {
            None => self.contains_shape(a),
            Some(t) => self.contains_shape(&mat_vec(t, a)),
        }
    }

    fn pull_back(&self, c: Vec<i64>) -> Vec<i64> {
        match &self.inverse {
            None => c,
            Some(inv) => mat_vec(inv, &c),
        }
    }

    /// Coordinate bound of the underlying shape.
    fn radius(&self) -> i64 {
        match self.shape {
            Shape::Cube { l } => l as i64,
            Shape::Ball { r } => r.floor() as i64,
        }
    }
}

/// `floor(r^2)`; the largest integer squared norm inside a ball of radius `r`.
fn r_squared(r: f64) -> u64 {
    let mut s = (r * r).floor() as u64;
    // guard against rounding in r * r
    while (s as f64) > r * r {
        s -= 1;
    }
    while ((s + 1) as f64) <= r * r {
        s += 1;
    }
    s
}

fn ball_count(n: usize, budget: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    let bound = (budget as f64).sqrt() as i64 + 1;
    (-bound..=bound)
        .filter(|&x| (x * x) as u64 <= budget)
        .map(|x| ball_count(n - 1, budget - (x * x) as u64))
        .sum()
}

/// Volume of the Euclidean unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        n => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Inverse of an integer matrix with determinant `±1`, by Gauss-Jordan
/// elimination over the rationals.
fn unimodular_inverse(t: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = t.len();
    let big = |x: i64| BigRational::from_integer(BigInt::from(x));
    let mut a: Vec<Vec<BigRational>> = t
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|&x| big(x)).collect();
            r.extend((0..n).map(|j| big((i == j) as i64)));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::NotUnimodular)?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    let det = crate::hnf::det_big(t.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect());
    if det.abs() != BigInt::from(1) {
        return Err(Error::NotUnimodular);
    }
    Ok(a.into_iter()
        .map(|row| row[n..].iter().map(|x| x.to_integer().to_i64().expect("unimodular inverse is integral")).collect())
        .collect())
}

/// Region points as coordinate vectors in lexicographic order.
pub fn enumerate_coords(region: &Region, cap: u64) -> Result<Vec<Vec<i64>>> {
    let bound = region.radius();
    let box_size = ((2 * bound + 1) as f64).powi(region.degree as i32);
    if box_size > cap as f64 {
        return Err(Error::CapExceeded { what: "region points", size: box_size, cap });
    }
    let mut out = Vec::new();
    let mut c = vec![-bound; region.degree];
    if region.degree == 0 {
        return Ok(vec![vec![]]);
    }
    loop {
        if region.contains_shape(&c) {
            out.push(region.pull_back(c.clone()));
        }
        let mut i = region.degree;
        loop {
            if i == 0 {
                if region.inverse.is_some() {
                    out.sort_unstable();
                }
                return Ok(out);
            }
            i -= 1;
            if c[i] < bound {
                c[i] += 1;
                break;
            }
            c[i] = -bound;
        }
    }
}

/// The elements of the region in lexicographic coordinate order.
pub fn enumerate_region(region: &Region) -> Result<Vec<AlgInt>> {
    Ok(enumerate_coords(region, Caps::default().region)?.iter().map(|c| AlgInt::from_i64s(c)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Sieve,
    Mc,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Sieve => "sieve",
            Method::Mc => "mc",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub visible_count: u64,
    /// Tuples examined; the sample count for Monte Carlo.
    pub total_tuples: u64,
    /// `visible_count / total_tuples`.
    pub density_estimate: BigRational,
    /// Visible tuples per unit of `vol(A)^m`.
    pub volume_density: f64,
    pub method: Method,
    pub mc_stderr: Option<f64>,
    pub region: Region,
    /// Largest prime norm sieved.
    pub prime_norm_bound: Option<u64>,
}

impl CountResult {
    pub fn density(&self) -> f64 {
        self.density_estimate.to_f64().unwrap_or(f64::NAN)
    }
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b.max(1)))
}

/// Validated, deduplicated `S` as machine-integer coordinates.
fn prepare_set(field: &FieldSpec, set: &[PointTuple], m: usize) -> Result<Vec<Vec<Vec<i64>>>> {
    if m < 2 {
        return Err(Error::DimensionTooSmall(m));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut set = set.to_vec();
    dedup_points(&mut set);
    set.iter()
        .map(|t| {
            if t.m() != m {
                return Err(Error::DimensionMismatch { expected: m, got: t.m() });
            }
            let coords = t.to_i64s().ok_or_else(|| Error::Overflow("S coordinates exceed i64".into()))?;
            if let Some(c) = coords.iter().find(|c| c.len() != field.degree()) {
                return Err(Error::DimensionMismatch { expected: field.degree(), got: c.len() });
            }
            Ok(coords)
        })
        .collect()
}

fn tuple_count(points: usize, m: usize, cap: u64) -> Result<u64> {
    let size = (points as f64).powi(m as i32);
    if size > cap as f64 {
        return Err(Error::CapExceeded { what: "region tuples", size, cap });
    }
    Ok((points as u64).pow(m as u32))
}

fn check_region(field: &FieldSpec, region: &Region) -> Result<()> {
    if region.degree != field.degree() {
        return Err(Error::DimensionMismatch { expected: field.degree(), got: region.degree });
    }
    Ok(())
}

/// Visibility of `z` from every point of `S`, on machine integers.
fn visible_from_all(field: &FieldSpec, z: &[&[i64]], set: &[Vec<Vec<i64>>]) -> bool {
    let mut diffs: Vec<Vec<i64>> = z.iter().map(|c| vec![0; c.len()]).collect();
    set.iter().all(|s| {
        for ((d, zi), si) in diffs.iter_mut().zip(z).zip(s) {
            for ((x, a), b) in d.iter_mut().zip(zi.iter()).zip(si) {
                *x = a - b;
            }
        }
        let refs: Vec<&[i64]> = diffs.iter().map(Vec::as_slice).collect();
        generates_unit_ideal(field, &refs)
    })
}

fn volume_density(visible: u64, region: &Region, m: usize) -> f64 {
    visible as f64 / region.volume().powi(m as i32)
}

pub fn count_visible_direct(field: &FieldSpec, set: &[PointTuple], m: usize, region: &Region) -> Result<CountResult> {
    count_visible_direct_with_caps(field, set, m, region, &Caps::default())
}

/// Tests every tuple of `region^m` against every point of `S`.
pub fn count_visible_direct_with_caps(
    field: &FieldSpec,
    set: &[PointTuple],
    m: usize,
    region: &Region,
    caps: &Caps,
) -> Result<CountResult> {
    check_region(field, region)?;
    let set = prepare_set(field, set, m)?;
    let points = enumerate_coords(region, caps.region)?;
    let total = tuple_count(points.len(), m, caps.tuples)?;
    let n_points = points.len() as u64;
    let visible: u64 = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let mut z: Vec<&[i64]> = vec![&[]; m];
            let mut rest = idx;
            for slot in z.iter_mut().rev() {
                *slot = &points[(rest % n_points) as usize];
                rest /= n_points;
            }
            visible_from_all(field, &z, &set)
        })
        .count() as u64;
    Ok(CountResult {
        visible_count: visible,
        total_tuples: total,
        density_estimate: ratio(visible, total),
        volume_density: volume_density(visible, region, m),
        method: Method::Direct,
        mc_stderr: None,
        region: region.clone(),
        prime_norm_bound: None,
    })
}

fn abs_norm(field: &FieldSpec, a: &[i64]) -> Result<u64> {
    if let Some(v) = field.field_norm_i128(a) {
        return u64::try_from(v.unsigned_abs()).map_err(|_| Error::Overflow(format!("norm {v} exceeds u64")));
    }
    let v = field.field_norm(&AlgInt::from_i64s(a)).abs();
    v.to_u64().ok_or_else(|| Error::Overflow(format!("norm {v} exceeds u64")))
}

/// Largest `|N(z - s_i)|` over region points `z` and coordinates `s_i` of `S`
/// with `z != s_i`.
fn sieve_bound(field: &FieldSpec, points: &[Vec<i64>], set: &[Vec<Vec<i64>>]) -> Result<u64> {
    let mut centers: Vec<&Vec<i64>> = set.iter().flatten().collect();
    centers.sort();
    centers.dedup();
    points
        .par_iter()
        .map(|z| {
            let mut best = 0u64;
            for c in &centers {
                let d: Vec<i64> = z.iter().zip(c.iter()).map(|(a, b)| a - b).collect();
                if d.iter().any(|&x| x != 0) {
                    best = best.max(abs_norm(field, &d)?);
                }
            }
            Ok(best)
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

struct Bitset {
    words: Vec<AtomicU64>,
}

impl Bitset {
    fn new(bits: u64) -> Self {
        Bitset { words: (0..bits.div_ceil(64)).map(|_| AtomicU64::new(0)).collect() }
    }

    fn set(&self, i: u64) {
        self.words[(i / 64) as usize].fetch_or(1 << (i % 64), Ordering::Relaxed);
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.load(Ordering::Relaxed).count_ones() as u64).sum()
    }
}

/// Marks every tuple whose coordinate `i` lies in `buckets[i]`.
fn mark_product(bits: &Bitset, buckets: &[&[u32]], n_points: u64, base: u64) {
    match buckets {
        [] => bits.set(base),
        [last] => {
            for &j in *last {
                bits.set(base + j as u64);
            }
        }
        [first, rest @ ..] => {
            for &j in *first {
                mark_product(bits, rest, n_points, (base + j as u64) * n_points);
            }
        }
    }
}

fn sieve_prime(bits: &Bitset, prime: &PrimeIdeal, points: &[Vec<i64>], classes: &[Vec<u64>]) {
    let n_points = points.len() as u64;
    let mut wanted: Vec<u64> = classes.iter().flatten().copied().collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); wanted.len()];
    for (j, z) in points.iter().enumerate() {
        if let Ok(k) = wanted.binary_search(&prime.residue_index(z)) {
            buckets[k].push(j as u32);
        }
    }
    for class in classes {
        let chosen: Vec<&[u32]> = class
            .iter()
            .map(|c| buckets[wanted.binary_search(c).expect("class was collected")].as_slice())
            .collect();
        if chosen.iter().all(|b| !b.is_empty()) {
            mark_product(bits, &chosen, n_points, 0);
        }
    }
}

pub fn count_visible_sieve(field: &FieldSpec, set: &[PointTuple], m: usize, region: &Region) -> Result<CountResult> {
    count_visible_sieve_with_caps(field, set, m, region, &Caps::default())
}

/// Counts by marking, for each prime `P` of norm up to the sieve bound and
/// each residue tuple of `S` modulo `P`, the product of the matching residue
/// classes of the region, plus the points of `S` themselves.
pub fn count_visible_sieve_with_caps(
    field: &FieldSpec,
    set: &[PointTuple],
    m: usize,
    region: &Region,
    caps: &Caps,
) -> Result<CountResult> {
    check_region(field, region)?;
    let small_set = prepare_set(field, set, m)?;
    let mut tuples = set.to_vec();
    dedup_points(&mut tuples);
    let points = enumerate_coords(region, caps.region)?;
    let total = tuple_count(points.len(), m, caps.tuples)?;
    if points.len() > u32::MAX as usize {
        return Err(Error::CapExceeded { what: "region points", size: points.len() as f64, cap: u32::MAX as u64 });
    }
    let bound = sieve_bound(field, &points, &small_set)?;
    let primes = if bound >= 2 { primes_up_to_norm(field, bound)? } else { Vec::new() };
    let bits = Bitset::new(total);
    primes.par_iter().for_each(|p| {
        let mut classes: Vec<Vec<u64>> = tuples.iter().map(|t| reduce_tuple(t, p)).collect();
        classes.sort_unstable();
        classes.dedup();
        sieve_prime(&bits, p, &points, &classes);
    });
    let index: HashMap<&[i64], u64> = points.iter().enumerate().map(|(j, c)| (c.as_slice(), j as u64)).collect();
    for s in &small_set {
        let idx: Option<u64> = s
            .iter()
            .try_fold(0u64, |acc, c| index.get(c.as_slice()).map(|&j| acc * points.len() as u64 + j));
        if let Some(i) = idx {
            bits.set(i);
        }
    }
    let visible = total - bits.count();
    Ok(CountResult {
        visible_count: visible,
        total_tuples: total,
        density_estimate: ratio(visible, total),
        volume_density: volume_density(visible, region, m),
        method: Method::Sieve,
        mc_stderr: None,
        region: region.clone(),
        prime_norm_bound: Some(bound),
    })
}

/// Samples per independently seeded stream.
const MC_BATCH: u64 = 4096;

fn sample_point<R: Rng>(region: &Region, rng: &mut R) -> Vec<i64> {
    let b = region.radius();
    loop {
        let c: Vec<i64> = (0..region.degree).map(|_| rng.gen_range(-b..=b)).collect();
        if region.contains_shape(&c) {
            return region.pull_back(c);
        }
    }
}

/// Estimates the visible fraction of `region^m` from `samples` uniform
/// tuples. Batch `k` draws from the seed's ChaCha stream `k`, so the result
/// does not depend on the thread count.
pub fn mc_estimate(
    field: &FieldSpec,
    set: &[PointTuple],
    m: usize,
    region: &Region,
    samples: u64,
    seed: u64,
) -> Result<CountResult> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("at least 100 samples are required, got {samples}")));
    }
    check_region(field, region)?;
    let set = prepare_set(field, set, m)?;
    let batches = samples.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let len = MC_BATCH.min(samples - k * MC_BATCH);
            (0..len)
                .filter(|_| {
                    let z: Vec<Vec<i64>> = (0..m).map(|_| sample_point(region, &mut rng)).collect();
                    let refs: Vec<&[i64]> = z.iter().map(Vec::as_slice).collect();
                    visible_from_all(field, &refs, &set)
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let per_volume = (region.lattice_count() as f64 / region.volume()).powi(m as i32);
    Ok(CountResult {
        visible_count: hits,
        total_tuples: samples,
        density_estimate: ratio(hits, samples),
        volume_density: p * per_volume,
        method: Method::Mc,
        mc_stderr: Some((p * (1.0 - p) / samples as f64).sqrt()),
        region: region.clone(),
        prime_norm_bound: None,
    })
}

/// Lattice-point count of an ideal in a region against its volume heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealCount {
    pub count: u64,
    /// `vol(A) / N(I)`.
    pub main_term: f64,
    pub error: f64,
    /// `error` divided by `(R / N(I)^(1/n))^(n-1)` for balls and by
    /// `(2L / N(I)^(1/n) + 1)^(n-1)` for cubes.
    pub normalized_error: f64,
}

pub fn ideal_count_check(field: &FieldSpec, ideal: &IdealHNF, region: &Region) -> Result<IdealCount> {
    if ideal.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    check_region(field, region)?;
    let points = enumerate_coords(region, Caps::default().region)?;
    let count = points.par_iter().filter(|c| ideal.contains_coords(c)).count() as u64;
    let norm = ideal.norm().to_f64().unwrap_or(f64::INFINITY);
    let n = field.degree() as i32;
    let main_term = region.volume() / norm;
    let error = (count as f64 - main_term).abs();
    let scale = norm.powf(1.0 / n as f64);
    let denominator = match region.shape {
        Shape::Ball { r } => (r / scale).powi(n - 1),
        Shape::Cube { l } => (2.0 * l as f64 / scale + 1.0).powi(n - 1),
    };
    Ok(IdealCount { count, main_term, error, normalized_error: error / denominator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{ideal_from_generators, is_visible_from_all};
    use crate::numfield::{make_field, FieldKind};
    use num_integer::Integer;
    use proptest::prelude::*;

    fn q() -> FieldSpec {
        make_field(FieldKind::Rational).unwrap()
    }

    fn quad(d: i64) -> FieldSpec {
        make_field(FieldKind::Quadratic { d }).unwrap()
    }

    fn tuple(coords: &[&[i64]]) -> PointTuple {
        PointTuple::from_i64s(&coords.iter().map(|c| c.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn region_sizes() {
        let c = enumerate_coords(&Region::cube(1, 2), 1000).unwrap();
        assert_eq!(c, vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
        assert_eq!(enumerate_coords(&Region::ball(2, 1.0).unwrap(), 1000).unwrap().len(), 5);
        assert_eq!(enumerate_coords(&Region::ball(2, 2.0).unwrap(), 1000).unwrap().len(), 13);
        // brute force over the 5x5 grid
        let grid = (-2i64..=2).flat_map(|x| (-2i64..=2).map(move |y| x * x + y * y)).filter(|&s| s <= 4).count();
        assert_eq!(grid, 13);
        for r in [1.0, 2.0, 7.5, 30.0] {
            let b = Region::ball(2, r).unwrap();
            assert_eq!(b.lattice_count(), enumerate_coords(&b, 1 << 20).unwrap().len() as u64);
        }
        assert!(matches!(
            enumerate_coords(&Region::cube(2, 100), 1000),
            Err(Error::CapExceeded { size, .. }) if size == 201.0 * 201.0
        ));
    }

    #[test]
    fn transformed_regions() {
        let plain = Region::cube(2, 3);
        let sheared = Region::cube(2, 3).with_transform(vec![vec![1, 1], vec![0, 1]]).unwrap();
        let pts = enumerate_coords(&sheared, 1000).unwrap();
        assert_eq!(pts.len(), 49);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|a| sheared.contains(a) && plain.contains(&[a[0] + a[1], a[1]])));
        assert!(pts.contains(&vec![-6, 3]));
        assert_eq!(
            Region::cube(2, 3).with_transform(vec![vec![2, 0], vec![0, 1]]),
            Err(Error::NotUnimodular)
        );
    }

    #[test]
    fn direct_small_cases() {
        let k = q();
        let origin = [PointTuple::zero(2, 1)];
        let r = count_visible_direct(&k, &origin, 2, &Region::cube(1, 1)).unwrap();
        assert_eq!((r.visible_count, r.total_tuples), (8, 9));
        assert_eq!(r.density_estimate, BigRational::new(8.into(), 9.into()));
        // S holding every region point leaves nothing visible
        let all: Vec<PointTuple> =
            (-1..=1).flat_map(|a| (-1..=1).map(move |b| tuple(&[&[a], &[b]]))).collect();
        assert_eq!(count_visible_direct(&k, &all, 2, &Region::cube(1, 1)).unwrap().visible_count, 0);
    }

    #[test]
    fn direct_matches_integer_gcd() {
        let k = q();
        for l in [2i64, 5] {
            let expected = (-l..=l)
                .flat_map(|a| (-l..=l).map(move |b| a.gcd(&b)))
                .filter(|&g| g == 1)
                .count() as u64;
            let r = count_visible_direct(&k, &[PointTuple::zero(2, 1)], 2, &Region::cube(1, l as u64)).unwrap();
            assert_eq!(r.visible_count, expected);
            let s = count_visible_sieve(&k, &[PointTuple::zero(2, 1)], 2, &Region::cube(1, l as u64)).unwrap();
            assert_eq!(s.visible_count, expected);
        }
    }

    #[test]
    fn sieve_matches_direct_on_gaussian_cube() {
        let k = quad(-1);
        let region = Region::cube(2, 3);
        let s = [PointTuple::zero(2, 2)];
        let direct = count_visible_direct(&k, &s, 2, &region).unwrap();
        let sieve = count_visible_sieve(&k, &s, 2, &region).unwrap();
        assert_eq!(direct.total_tuples, 49 * 49);
        assert_eq!(direct.visible_count, sieve.visible_count);
        assert_eq!(sieve.prime_norm_bound, Some(18));
    }

    #[test]
    fn mc_cases() {
        let k = q();
        let z = [tuple(&[&[0], &[0]])];
        let r = mc_estimate(&k, &z, 2, &Region::cube(1, 0), 500, 1).unwrap();
        assert_eq!(r.visible_count, 0);
        assert_eq!(r.mc_stderr, Some(0.0));
        let a = mc_estimate(&k, &z, 2, &Region::cube(1, 50), 5000, 7).unwrap();
        let b = mc_estimate(&k, &z, 2, &Region::cube(1, 50), 5000, 7).unwrap();
        assert_eq!(a.visible_count, b.visible_count);
        let exact = count_visible_sieve(&k, &z, 2, &Region::cube(1, 50)).unwrap();
        assert!((a.density() - exact.density()).abs() <= 5.0 * a.mc_stderr.unwrap());
        assert!(mc_estimate(&k, &z, 2, &Region::cube(1, 5), 99, 1).is_err());
    }

    #[test]
    fn ideal_count_examples() {
        let z = q();
        let two = ideal_from_generators(&z, &[AlgInt::from_i64s(&[2])]).unwrap();
        let c = ideal_count_check(&z, &two, &Region::cube(1, 10)).unwrap();
        assert_eq!((c.count, c.main_term, c.error), (11, 10.0, 1.0));

        let k = quad(-1);
        let unit = IdealHNF::unit(2);
        let c = ideal_count_check(&k, &unit, &Region::cube(2, 7)).unwrap();
        assert_eq!(c.count, 225);
        assert_eq!(c.error, 225.0 - 196.0);

        let p = ideal_from_generators(&k, &[AlgInt::from_i64s(&[1, 1])]).unwrap();
        let c = ideal_count_check(&k, &p, &Region::ball(2, 5.0).unwrap()).unwrap();
        // 1 + i divides a + bi iff a + b is even
        let brute = (-5i64..=5)
            .flat_map(|a| (-5i64..=5).map(move |b| (a, b)))
            .filter(|(a, b)| a * a + b * b <= 25 && (a + b) % 2 == 0)
            .count() as u64;
        assert_eq!(c.count, brute);
        assert_eq!(ideal_count_check(&k, &IdealHNF::zero(2), &Region::cube(2, 2)), Err(Error::ZeroIdeal));
    }

    fn neg(t: &PointTuple) -> PointTuple {
        PointTuple::from_i64s(
            &t.to_i64s().unwrap().iter().map(|c| c.iter().map(|x| -x).collect()).collect::<Vec<_>>(),
        )
    }

    fn field_by_index(i: usize) -> FieldSpec {
        quad([-1, -2, -3, -7, 2, 3, 5][i])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn sieve_equals_direct(
            field_ix in 0usize..7,
            l in 1u64..=4,
            ball in any::<bool>(),
            raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..=3),
        ) {
            let k = field_by_index(field_ix);
            let region = if ball { Region::ball(2, l as f64 + 0.5).unwrap() } else { Region::cube(2, l) };
            let s: Vec<PointTuple> = raw.iter().map(|v| tuple(&[&v[..2], &v[2..]])).collect();
            let direct = count_visible_direct(&k, &s, 2, &region).unwrap();
            let sieve = count_visible_sieve(&k, &s, 2, &region).unwrap();
            prop_assert_eq!(direct.visible_count, sieve.visible_count);
        }

        #[test]
        fn direct_agrees_with_big_integer_visibility(
            raw in prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 1..=2),
        ) {
            let k = quad(-3);
            let s: Vec<PointTuple> = raw.iter().map(|v| tuple(&[&v[..2], &v[2..]])).collect();
            let region = Region::cube(2, 1);
            let pts = enumerate_region(&region).unwrap();
            let mut expected = 0u64;
            for a in &pts {
                for b in &pts {
                    let z = PointTuple::new(vec![a.clone(), b.clone()]);
                    expected += is_visible_from_all(&k, &z, &s).unwrap() as u64;
                }
            }
            prop_assert_eq!(count_visible_direct(&k, &s, 2, &region).unwrap().visible_count, expected);
        }

        #[test]
        fn negation_symmetry(
            field_ix in 0usize..7,
            raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..=3),
            transform in any::<bool>(),
        ) {
            let k = field_by_index(field_ix);
            let mut region = Region::cube(2, 4);
            if transform {
                region = region.with_transform(vec![vec![1, 1], vec![0, 1]]).unwrap();
            }
            let s: Vec<PointTuple> = raw.iter().map(|v| tuple(&[&v[..2], &v[2..]])).collect();
            let negated: Vec<PointTuple> = s.iter().map(neg).collect();
            prop_assert_eq!(
                count_visible_sieve(&k, &s, 2, &region).unwrap().visible_count,
                count_visible_sieve(&k, &negated, 2, &region).unwrap().visible_count
            );
        }
    }
}
