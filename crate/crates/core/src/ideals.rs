//! Ideals of `O` as Hermite-normal-form Z-modules, and the visibility test
//! `gcd(z - x) = O` computed as a sum of principal ideals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::factor_u64;
use crate::error::{Error, Result};
use crate::hnf::{hnf_big, hnf_incremental, is_identity, to_i128_rows};
use crate::numfield::{AlgInt, FieldSpec};

/// A nonzero ideal in canonical row-style HNF over the integral basis, or the
/// zero ideal. Two ideals are equal iff their matrices are identical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealHNF {
    degree: usize,
    /// Upper triangular, positive diagonal, entries above the diagonal in
    /// `[0, diagonal of their column)`. Empty for the zero ideal.
    hnf: Vec<Vec<BigInt>>,
    norm: BigInt,
    small: Option<Vec<Vec<i128>>>,
}

impl IdealHNF {
    fn from_hnf(degree: usize, hnf: Vec<Vec<BigInt>>) -> Self {
        assert!(
            hnf.is_empty() || hnf.len() == degree,
            "a nonzero ideal spans a full-rank lattice"
        );
        let norm = if hnf.is_empty() {
            BigInt::zero()
        } else {
            (0..degree).map(|i| hnf[i][i].clone()).product()
        };
        let small = to_i128_rows(&hnf);
        IdealHNF { degree, hnf, norm, small }
    }

    /// The unit ideal `O`.
    pub fn unit(degree: usize) -> Self {
        let rows = (0..degree)
            .map(|i| (0..degree).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IdealHNF::from_hnf(degree, rows)
    }

    pub fn zero(degree: usize) -> Self {
        IdealHNF::from_hnf(degree, Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// HNF rows; empty for the zero ideal.
    pub fn hnf(&self) -> &[Vec<BigInt>] {
        &self.hnf
    }

    pub fn is_zero(&self) -> bool {
        self.hnf.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.norm.is_one()
    }

    /// `|O / I|`, and 0 for the zero ideal.
    pub fn norm(&self) -> &BigInt {
        &self.norm
    }

    /// Z-basis of the ideal as elements of `O`.
    pub fn basis(&self) -> Vec<AlgInt> {
        self.hnf.iter().map(|r| AlgInt::new(r.clone())).collect()
    }

    /// Diagonal of the HNF: `{sum c_i e_i : 0 <= c_i < diag[i]}` is a complete
    /// residue system for `O / I`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.hnf.len()).map(|i| self.hnf[i][i].clone()).collect()
    }

    /// Membership by forward substitution through the triangular basis.
    pub fn contains(&self, a: &AlgInt) -> bool {
        assert_eq!(a.degree(), self.degree);
        if self.is_zero() {
            return a.is_zero();
        }
        if let (Some(small), Some(coords)) = (&self.small, a.to_i64s()) {
            if let Some(answer) = contains_small(small, &coords) {
                return answer;
            }
        }
        let mut rest: Vec<BigInt> = a.coords().to_vec();
        for (c, row) in self.hnf.iter().enumerate() {
            let (q, r) = rest[c].div_rem(&row[c]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in rest.iter_mut().zip(row).skip(c) {
                *x -= &q * y;
            }
        }
        true
    }

    /// Membership for machine-integer coordinates. Falls back to the exact
    /// path if anything overflows.
    pub fn contains_coords(&self, coords: &[i64]) -> bool {
        if let Some(small) = &self.small {
            if let Some(answer) = contains_small(small, coords) {
                return answer;
            }
        }
        self.contains(&AlgInt::from_i64s(coords))
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &IdealHNF) -> bool {
        self.basis().iter().all(|b| other.contains(b))
    }
}

fn contains_small(hnf: &[Vec<i128>], coords: &[i64]) -> Option<bool> {
    let mut rest: Vec<i128> = coords.iter().map(|&c| c as i128).collect();
    for (c, row) in hnf.iter().enumerate() {
        let d = row[c];
        if rest[c] % d != 0 {
            return Some(false);
        }
        let q = rest[c] / d;
        if q == 0 {
            continue;
        }
        for (x, y) in rest.iter_mut().zip(row).skip(c) {
            *x = x.checked_sub(q.checked_mul(*y)?)?;
        }
    }
    Some(true)
}

/// An `m`-tuple of elements of `O`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointTuple(Vec<AlgInt>);

impl PointTuple {
    pub fn new(coords: Vec<AlgInt>) -> Self {
        PointTuple(coords)
    }

    /// From nested coordinates: `m` entries, each with `n` basis coordinates.
    pub fn from_i64s(coords: &[Vec<i64>]) -> Self {
        PointTuple(coords.iter().map(|c| AlgInt::from_i64s(c)).collect())
    }

    pub fn zero(m: usize, n: usize) -> Self {
        PointTuple(vec![AlgInt::zero(n); m])
    }

    pub fn coords(&self) -> &[AlgInt] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn to_i64s(&self) -> Option<Vec<Vec<i64>>> {
        self.0.iter().map(AlgInt::to_i64s).collect()
    }
}

/// Removes duplicate points, keeping first occurrences in order. Returns the
/// number of duplicates dropped.
pub fn dedup_points(points: &mut Vec<PointTuple>) -> usize {
    let before = points.len();
    let mut seen = std::collections::HashSet::new();
    points.retain(|p| seen.insert(p.clone()));
    before - points.len()
}

fn check_degree(field: &FieldSpec, a: &AlgInt) -> Result<()> {
    if a.degree() != field.degree() {
        return Err(Error::DimensionMismatch { expected: field.degree(), got: a.degree() });
    }
    Ok(())
}

/// The ideal generated by `gens`: the Z-span of all `g * e_i`.
pub fn ideal_from_generators(field: &FieldSpec, gens: &[AlgInt]) -> Result<IdealHNF> {
    if gens.is_empty() {
        return Err(Error::NoGenerators);
    }
    for g in gens {
        check_degree(field, g)?;
    }
    let n = field.degree();
    let small: Option<Vec<Vec<Vec<i128>>>> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| field.mul_matrix_i128(&g.to_i64s()?))
        .collect();
    if let Some(blocks) = small {
        if let Some(h) = hnf_incremental(blocks.into_iter().flatten(), n, |_| false) {
            return Ok(IdealHNF::from_hnf(n, crate::hnf::to_big_rows(&h)));
        }
    }
    let rows: Vec<Vec<BigInt>> =
        gens.iter().filter(|g| !g.is_zero()).flat_map(|g| field.mul_matrix(g)).collect();
    Ok(IdealHNF::from_hnf(n, hnf_big(rows, n)))
}

/// `I + J`, the smallest ideal containing both (their gcd).
pub fn ideal_sum(i: &IdealHNF, j: &IdealHNF) -> IdealHNF {
    assert_eq!(i.degree, j.degree);
    let rows = i.hnf.iter().chain(&j.hnf).cloned().collect();
    IdealHNF::from_hnf(i.degree, hnf_big(rows, i.degree))
}

/// `I * J`, spanned by products of basis elements.
pub fn ideal_mul(field: &FieldSpec, i: &IdealHNF, j: &IdealHNF) -> IdealHNF {
    assert_eq!(i.degree, field.degree());
    assert_eq!(j.degree, field.degree());
    let mut rows = Vec::with_capacity(i.hnf.len() * j.hnf.len());
    for a in i.basis() {
        for b in j.basis() {
            rows.push(field.mul(&a, &b).coords().to_vec());
        }
    }
    IdealHNF::from_hnf(field.degree(), hnf_big(rows, field.degree()))
}

pub fn contains(i: &IdealHNF, a: &AlgInt) -> bool {
    i.contains(a)
}

/// Whether the elements with the given machine-integer coordinates generate
/// the unit ideal. Stops as soon as the running HNF reaches the identity.
pub fn generates_unit_ideal(field: &FieldSpec, gens: &[&[i64]]) -> bool {
    let n = field.degree();
    let blocks: Option<Vec<Vec<Vec<i128>>>> = gens
        .iter()
        .filter(|g| g.iter().any(|&c| c != 0))
        .map(|g| field.mul_matrix_i128(g))
        .collect();
    if let Some(blocks) = blocks {
        if let Some(h) = hnf_incremental(blocks.into_iter().flatten(), n, |h| is_identity(h, n)) {
            return is_identity(&h, n);
        }
    }
    let gens: Vec<AlgInt> = gens.iter().map(|g| AlgInt::from_i64s(g)).collect();
    ideal_from_generators(field, &gens).map(|i| i.is_unit()).unwrap_or(false)
}

/// `gcd(z - x) = O`. Identical points are not visible from each other, since
/// the zero difference generates the zero ideal.
pub fn is_visible(field: &FieldSpec, z: &PointTuple, x: &PointTuple) -> bool {
    assert_eq!(z.m(), x.m(), "points of different dimension");
    let diffs: Vec<AlgInt> = z.0.iter().zip(&x.0).map(|(a, b)| field.sub(a, b)).collect();
    if let Some(small) = diffs.iter().map(AlgInt::to_i64s).collect::<Option<Vec<_>>>() {
        let refs: Vec<&[i64]> = small.iter().map(Vec::as_slice).collect();
        return generates_unit_ideal(field, &refs);
    }
    ideal_from_generators(field, &diffs).map(|i| i.is_unit()).unwrap_or(false)
}

/// Membership of `z` in `V(S)`.
pub fn is_visible_from_all(field: &FieldSpec, z: &PointTuple, set: &[PointTuple]) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set.iter().all(|x| is_visible(field, z, x)))
}

/// Source of the prime ideals above a rational prime, as used by [`mobius`].
pub trait PrimesAbove {
    fn primes_above(&self, p: u64) -> Result<Vec<IdealHNF>>;
}

/// Möbius function on ideals: 1 for `O`, `(-1)^r` for a product of `r`
/// distinct primes, 0 when some prime square divides `I`.
pub fn mobius<P: PrimesAbove>(field: &FieldSpec, ideal: &IdealHNF, primes: &P) -> Result<i32> {
    if ideal.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    let norm = ideal
        .norm()
        .to_u64()
        .ok_or_else(|| Error::Overflow(format!("ideal norm {} does not fit in u64", ideal.norm())))?;
    let mut sign = 1;
    let mut covered = BigInt::one();
    for (p, _) in factor_u64(norm) {
        for prime in primes.primes_above(p)? {
            if !ideal.is_subset_of(&prime) {
                continue;
            }
            let square = ideal_mul(field, &prime, &prime);
            if ideal.is_subset_of(&square) {
                return Ok(0);
            }
            sign = -sign;
            covered *= prime.norm();
        }
    }
    debug_assert_eq!(&covered, ideal.norm());
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{make_field, FieldKind};
    use proptest::prelude::*;

    fn el(c: &[i64]) -> AlgInt {
        AlgInt::from_i64s(c)
    }

    fn gauss() -> FieldSpec {
        make_field(FieldKind::Quadratic { d: -1 }).unwrap()
    }

    fn rational() -> FieldSpec {
        make_field(FieldKind::Rational).unwrap()
    }

    fn principal(field: &FieldSpec, c: &[i64]) -> IdealHNF {
        ideal_from_generators(field, &[el(c)]).unwrap()
    }

    #[test]
    fn generators_over_q() {
        let q = rational();
        let i = ideal_from_generators(&q, &[el(&[4]), el(&[6])]).unwrap();
        assert_eq!(i.norm(), &BigInt::from(2));
        assert_eq!(i, principal(&q, &[2]));
        assert!(principal(&q, &[1]).is_unit());
        assert!(principal(&q, &[0]).is_zero());
        assert_eq!(ideal_from_generators(&q, &[]), Err(Error::NoGenerators));
        assert_eq!(
            ideal_from_generators(&q, &[el(&[1, 2])]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn gaussian_ideals() {
        let k = gauss();
        let p2 = principal(&k, &[1, 1]);
        assert_eq!(p2.norm(), &BigInt::from(2));
        assert_eq!(principal(&k, &[1, -1]), p2);
        assert_eq!(ideal_mul(&k, &p2, &p2), principal(&k, &[2, 0]));
        assert_eq!(ideal_mul(&k, &p2, &IdealHNF::unit(2)), p2);
        assert!(p2.contains(&el(&[3, 1])));
        assert!(!p2.contains(&el(&[1, 0])));
    }

    #[test]
    fn sums() {
        let q = rational();
        assert!(ideal_sum(&principal(&q, &[2]), &principal(&q, &[3])).is_unit());
        let z = IdealHNF::zero(1);
        assert_eq!(ideal_sum(&z, &z), z);
        assert_eq!(ideal_sum(&z, &principal(&q, &[5])), principal(&q, &[5]));
    }

    #[test]
    fn visibility_examples() {
        let q = rational();
        let pt = |a: i64, b: i64| PointTuple::from_i64s(&[vec![a], vec![b]]);
        assert!(is_visible(&q, &pt(2, 3), &pt(0, 0)));
        assert!(!is_visible(&q, &pt(2, 4), &pt(0, 0)));
        let s = [pt(0, 0), pt(1, 1)];
        assert!(is_visible_from_all(&q, &pt(2, 3), &s).unwrap());
        assert!(!is_visible_from_all(&q, &pt(3, 5), &s).unwrap());
        assert!(!is_visible_from_all(&q, &pt(1, 1), &s).unwrap());
        assert_eq!(is_visible_from_all(&q, &pt(1, 1), &[]), Err(Error::EmptySet));

        let k = gauss();
        let z = PointTuple::from_i64s(&[vec![1, 1], vec![1, -1]]);
        assert!(!is_visible(&k, &z, &PointTuple::zero(2, 2)));
    }

    #[test]
    fn dedup() {
        let mut s = vec![
            PointTuple::from_i64s(&[vec![0], vec![0]]),
            PointTuple::from_i64s(&[vec![1], vec![1]]),
            PointTuple::from_i64s(&[vec![0], vec![0]]),
        ];
        assert_eq!(dedup_points(&mut s), 1);
        assert_eq!(s.len(), 2);
    }

    fn brute_contains(i: &IdealHNF, a: &[i64], bound: i64) -> bool {
        // search small integer combinations of the HNF basis
        let basis: Vec<Vec<i64>> = i.hnf().iter().map(|r| r.iter().map(|x| x.to_i64().unwrap()).collect()).collect();
        for x in -bound..=bound {
            for y in -bound..=bound {
                let v: Vec<i64> = (0..2).map(|k| x * basis[0][k] + y * basis[1][k]).collect();
                if v == a {
                    return true;
                }
            }
        }
        false
    }

    proptest! {
        #[test]
        fn integer_gcd_agreement(a in -50i64..=50, b in -50i64..=50) {
            let q = rational();
            let i = ideal_from_generators(&q, &[el(&[a]), el(&[b])]).unwrap();
            prop_assert_eq!(i.norm(), &BigInt::from(a.gcd(&b)));
        }

        #[test]
        fn norm_is_multiplicative(
            d in prop::sample::select(vec![-1i64, -2, -3, 2, 5]),
            a in prop::collection::vec(-20i64..20, 2),
            b in prop::collection::vec(-20i64..20, 2),
        ) {
            let k = make_field(FieldKind::Quadratic { d }).unwrap();
            prop_assume!(a.iter().any(|&x| x != 0) && b.iter().any(|&x| x != 0));
            let i = principal(&k, &a);
            let j = principal(&k, &b);
            prop_assert_eq!(i.norm(), &num_traits::Signed::abs(&k.field_norm(&el(&a))));
            let prod = ideal_mul(&k, &i, &j);
            prop_assert_eq!(prod.norm(), &(i.norm() * j.norm()));
            prop_assert_eq!(ideal_mul(&k, &i, &j), principal(&k, &k.mul(&el(&a), &el(&b)).to_i64s().unwrap()));
        }

        #[test]
        fn sum_is_a_gcd(
            a in prop::collection::vec(-15i64..15, 2),
            b in prop::collection::vec(-15i64..15, 2),
            c in prop::collection::vec(-15i64..15, 2),
        ) {
            let k = gauss();
            let (i, j, l) = (principal(&k, &a), principal(&k, &b), principal(&k, &c));
            prop_assert_eq!(ideal_sum(&i, &j), ideal_sum(&j, &i));
            prop_assert_eq!(ideal_sum(&ideal_sum(&i, &j), &l), ideal_sum(&i, &ideal_sum(&j, &l)));
            prop_assert_eq!(ideal_sum(&i, &i), i.clone());
            prop_assert!(ideal_sum(&i, &IdealHNF::unit(2)).is_unit());
        }

        #[test]
        fn contains_matches_brute_force(
            a in prop::collection::vec(-4i64..=4, 2),
            v in prop::collection::vec(-12i64..=12, 2),
        ) {
            let k = gauss();
            prop_assume!(a.iter().any(|&x| x != 0));
            let i = principal(&k, &a);
            // HNF entries are at most 32 here, so |coefficients| <= 12 suffices
            prop_assert_eq!(i.contains(&el(&v)), brute_contains(&i, &v, 30));
            prop_assert_eq!(i.contains_coords(&v), i.contains(&el(&v)));
        }

        #[test]
        fn visibility_is_symmetric(
            z in prop::collection::vec(-9i64..9, 4),
            x in prop::collection::vec(-9i64..9, 4),
        ) {
            let k = gauss();
            let z = PointTuple::from_i64s(&[z[..2].to_vec(), z[2..].to_vec()]);
            let x = PointTuple::from_i64s(&[x[..2].to_vec(), x[2..].to_vec()]);
            prop_assert_eq!(is_visible(&k, &z, &x), is_visible(&k, &x, &z));
            let diffs: Vec<AlgInt> = z.coords().iter().zip(x.coords()).map(|(a, b)| k.sub(a, b)).collect();
            prop_assert_eq!(is_visible(&k, &z, &x), ideal_from_generators(&k, &diffs).unwrap().is_unit());
        }
    }
}
