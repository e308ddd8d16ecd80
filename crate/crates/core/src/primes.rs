//! Prime ideals of a monogenic order via Dedekind's criterion.
//!
//! For `O = Z[θ]` with minimal polynomial `f`, the primes above `p` are in
//! bijection with the monic irreducible factors `g` of `f mod p`: each is
//! `P = (p, g(θ))` with residue degree `deg g` and ramification index equal to
//! the multiplicity of `g`, and `O/P ≅ F_p[x]/(g)` via `θ ↦ x`.

use std::collections::HashSet;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::arith::{first_primes, is_prime, primes_up_to};
use crate::error::{Error, Result};
use crate::fp_poly::{poly_factor_mod_p, FpPoly};
use crate::ideals::{ideal_from_generators, IdealHNF, PointTuple, PrimesAbove};
use crate::numfield::{AlgInt, FieldSpec};

/// Seed for equal-degree splitting when the caller does not supply one.
/// Factorizations are canonical, so the seed never changes a result.
pub const DEFAULT_SPLIT_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeIdeal {
    under_p: u64,
    f: u32,
    e: u32,
    gpoly: FpPoly,
    hnf: IdealHNF,
    norm: u64,
    /// Row `i` holds the coefficients of `x^i mod g`, padded to length `f`.
    images: Vec<Vec<u64>>,
}

impl PrimeIdeal {
    pub fn under_p(&self) -> u64 {
        self.under_p
    }

    /// Residue degree.
    pub fn f(&self) -> u32 {
        self.f
    }

    /// Ramification index.
    pub fn e(&self) -> u32 {
        self.e
    }

    /// The factor of the minimal polynomial modulo `p` defining this prime.
    pub fn gpoly(&self) -> &FpPoly {
        &self.gpoly
    }

    pub fn hnf(&self) -> &IdealHNF {
        &self.hnf
    }

    /// `N(P) = p^f`.
    pub fn norm(&self) -> u64 {
        self.norm
    }

    /// The two-element representation `(p, g(θ))`, with `g` lifted to
    /// coefficients in `[0, p)`.
    pub fn generators(&self, field: &FieldSpec) -> [AlgInt; 2] {
        let lifted: Vec<BigInt> = self.gpoly.coeffs().iter().map(|&c| BigInt::from(c)).collect();
        [AlgInt::integer(field.degree(), self.under_p as i64), field.eval_generator_poly(&lifted)]
    }

    /// Coefficients of the image of `Σ coords[i] θ^i` in `F_p[x]/(g)`.
    fn reduce_coeffs<I: Iterator<Item = u64>>(&self, coords: I) -> Vec<u64> {
        let p = self.under_p as u128;
        let mut out = vec![0u128; self.f as usize];
        for (c, img) in coords.zip(&self.images) {
            if c == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(img) {
                *o = (*o + c as u128 * x as u128) % p;
            }
        }
        out.into_iter().map(|c| c as u64).collect()
    }

    /// Index in `[0, N(P))` of the residue class of an element given by
    /// machine-integer coordinates; agrees with [`ResidueElem::index`].
    pub fn residue_index(&self, coords: &[i64]) -> u64 {
        let p = self.under_p as i64;
        let reps = self.reduce_coeffs(coords.iter().map(|&c| c.rem_euclid(p) as u64));
        digits_to_index(&reps, self.under_p)
    }
}

fn digits_to_index(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

/// An element of the residue field `O/P`, as a polynomial over `F_p` of
/// degree below `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueElem {
    rep: FpPoly,
}

impl ResidueElem {
    pub fn rep(&self) -> &FpPoly {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Base-`p` index of the coefficient vector, in `[0, N(P))`.
    pub fn index(&self) -> u64 {
        digits_to_index(self.rep.coeffs(), self.rep.modulus())
    }

    pub fn add(&self, other: &ResidueElem) -> ResidueElem {
        ResidueElem { rep: self.rep.add(&other.rep) }
    }

    pub fn mul(&self, other: &ResidueElem, prime: &PrimeIdeal) -> ResidueElem {
        ResidueElem { rep: self.rep.mul_mod(&other.rep, &prime.gpoly) }
    }
}

/// The natural projection `O → O/P`.
pub fn reduce(a: &AlgInt, prime: &PrimeIdeal) -> ResidueElem {
    let p = BigInt::from(prime.under_p);
    let coords = a.coords().iter().map(|c| {
        let r = ((c % &p) + &p) % &p;
        u64::try_from(r).expect("residue below p")
    });
    ResidueElem { rep: FpPoly::new(prime.under_p, prime.reduce_coeffs(coords)) }
}

/// Residue indices of each coordinate of a tuple.
pub fn reduce_tuple(tuple: &PointTuple, prime: &PrimeIdeal) -> Vec<u64> {
    tuple.coords().iter().map(|a| reduce(a, prime).index()).collect()
}

/// `s(P) = |π_P(S)|`, the number of distinct residue tuples of `S`.
pub fn s_of_prime(set: &[PointTuple], prime: &PrimeIdeal) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let classes: HashSet<Vec<u64>> = set.iter().map(|t| reduce_tuple(t, prime)).collect();
    Ok(classes.len())
}

/// The primes above `p`, ordered by their defining factor.
pub fn split_prime(field: &FieldSpec, p: u64) -> Result<Vec<PrimeIdeal>> {
    split_prime_seeded(field, p, DEFAULT_SPLIT_SEED)
}

pub fn split_prime_seeded(field: &FieldSpec, p: u64, seed: u64) -> Result<Vec<PrimeIdeal>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = field.degree();
    let factors = poly_factor_mod_p(field.minpoly(), p, seed)?;
    let mut out = Vec::with_capacity(factors.len());
    for (g, e) in factors {
        let f = g.degree().expect("irreducible factors are nonconstant");
        let norm = u32::try_from(f)
            .ok()
            .and_then(|f| p.checked_pow(f))
            .ok_or_else(|| Error::Overflow(format!("norm {p}^{f} does not fit in u64")))?;
        let mut images = Vec::with_capacity(n);
        let mut power = FpPoly::one(p);
        for _ in 0..n {
            let mut row = power.coeffs().to_vec();
            row.resize(f, 0);
            images.push(row);
            power = power.mul_mod(&FpPoly::x(p), &g);
        }
        let mut prime = PrimeIdeal {
            under_p: p,
            f: f as u32,
            e,
            gpoly: g,
            hnf: IdealHNF::zero(n),
            norm,
            images,
        };
        prime.hnf = ideal_from_generators(field, &prime.generators(field))?;
        assert_eq!(prime.hnf.norm(), &BigInt::from(norm), "O/(p, g(theta)) must have p^f elements at p = {p}");
        out.push(prime);
    }
    Ok(out)
}

/// Every prime ideal of norm at most `bound`, sorted by norm, then by the
/// rational prime below, then by the defining factor.
pub fn primes_up_to_norm(field: &FieldSpec, bound: u64) -> Result<Vec<PrimeIdeal>> {
    primes_up_to_norm_seeded(field, bound, DEFAULT_SPLIT_SEED)
}

pub fn primes_up_to_norm_seeded(field: &FieldSpec, bound: u64, seed: u64) -> Result<Vec<PrimeIdeal>> {
    let per_p: Vec<Vec<PrimeIdeal>> = primes_up_to(bound)
        .into_par_iter()
        .map(|p| split_prime_seeded(field, p, seed))
        .collect::<Result<_>>()?;
    let mut out: Vec<PrimeIdeal> = per_p.into_iter().flatten().filter(|q| q.norm <= bound).collect();
    out.sort_by(|a, b| (a.norm, a.under_p, &a.gpoly).cmp(&(b.norm, b.under_p, &b.gpoly)));
    Ok(out)
}

/// `E_t`: all primes above a finite set of rational primes.
#[derive(Clone, Debug)]
pub struct PrimeWindow {
    t: usize,
    primes: Vec<PrimeIdeal>,
}

impl PrimeWindow {
    /// The primes above the first `t` rational primes.
    pub fn first_t(field: &FieldSpec, t: usize) -> Result<Self> {
        PrimeWindow::from_rational_primes(field, &first_primes(t))
    }

    pub fn from_rational_primes(field: &FieldSpec, ps: &[u64]) -> Result<Self> {
        let mut ps = ps.to_vec();
        ps.sort_unstable();
        ps.dedup();
        let mut primes = Vec::new();
        for &p in &ps {
            primes.extend(split_prime(field, p)?);
        }
        Ok(PrimeWindow { t: ps.len(), primes })
    }

    /// Number of rational primes in the window.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn primes(&self) -> &[PrimeIdeal] {
        &self.primes
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }
}

/// [`PrimesAbove`] backed by [`split_prime_seeded`].
pub struct Splitter<'a> {
    pub field: &'a FieldSpec,
    pub seed: u64,
}

impl<'a> Splitter<'a> {
    pub fn new(field: &'a FieldSpec) -> Self {
        Splitter { field, seed: DEFAULT_SPLIT_SEED }
    }
}

impl PrimesAbove for Splitter<'_> {
    fn primes_above(&self, p: u64) -> Result<Vec<IdealHNF>> {
        Ok(split_prime_seeded(self.field, p, self.seed)?.into_iter().map(|q| q.hnf).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{ideal_mul, mobius};
    use crate::numfield::{make_field, FieldKind};
    use proptest::prelude::*;

    fn quad(d: i64) -> FieldSpec {
        make_field(FieldKind::Quadratic { d }).unwrap()
    }

    fn el(c: &[i64]) -> AlgInt {
        AlgInt::from_i64s(c)
    }

    #[test]
    fn gaussian_splitting_types() {
        let k = quad(-1);
        let five = split_prime(&k, 5).unwrap();
        assert_eq!(five.len(), 2);
        assert!(five.iter().all(|q| q.f() == 1 && q.e() == 1 && q.norm() == 5));
        let three = split_prime(&k, 3).unwrap();
        assert_eq!((three.len(), three[0].f(), three[0].e(), three[0].norm()), (1, 2, 1, 9));
        let two = split_prime(&k, 2).unwrap();
        assert_eq!((two.len(), two[0].f(), two[0].e(), two[0].norm()), (1, 1, 2, 2));
        assert_eq!(split_prime(&k, 4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn enumeration_by_norm() {
        let q = make_field(FieldKind::Rational).unwrap();
        let norms: Vec<u64> = primes_up_to_norm(&q, 10).unwrap().iter().map(|p| p.norm()).collect();
        assert_eq!(norms, vec![2, 3, 5, 7]);
        let norms: Vec<u64> = primes_up_to_norm(&quad(-1), 5).unwrap().iter().map(|p| p.norm()).collect();
        assert_eq!(norms, vec![2, 5, 5]);
        let norms: Vec<u64> = primes_up_to_norm(&quad(2), 2).unwrap().iter().map(|p| p.norm()).collect();
        assert_eq!(norms, vec![2]);
    }

    #[test]
    fn reduction_examples() {
        let k = quad(-1);
        let two = &split_prime(&k, 2).unwrap()[0];
        assert_eq!(reduce(&el(&[3, 2]), two).index(), 1);
        let p = split_prime(&k, 5)
            .unwrap()
            .into_iter()
            .find(|q| q.gpoly() == &FpPoly::from_i64s(5, &[-2, 1]))
            .unwrap();
        assert_eq!(reduce(&el(&[0, 1]), &p).index(), 2);
        assert!(reduce(&el(&[5, 0]), &p).is_zero());
        assert_eq!(p.residue_index(&[0, 1]), 2);
        assert_eq!(p.residue_index(&[-7, 3]), reduce(&el(&[-7, 3]), &p).index());
    }

    #[test]
    fn s_of_prime_examples() {
        let q = make_field(FieldKind::Rational).unwrap();
        let pt = |a: i64, b: i64| PointTuple::from_i64s(&[vec![a], vec![b]]);
        let s = [pt(0, 0), pt(3, 3)];
        let p3 = &split_prime(&q, 3).unwrap()[0];
        let p2 = &split_prime(&q, 2).unwrap()[0];
        assert_eq!(s_of_prime(&s, p3).unwrap(), 1);
        assert_eq!(s_of_prime(&s, p2).unwrap(), 2);
        for p in primes_up_to_norm(&q, 50).unwrap() {
            assert_eq!(s_of_prime(&[pt(0, 0)], &p).unwrap(), 1);
            assert_eq!(s_of_prime(&[pt(0, 0), pt(1, 1)], &p).unwrap(), 2);
        }
        assert_eq!(s_of_prime(&[], p2), Err(Error::EmptySet));
    }

    #[test]
    fn mobius_examples() {
        let k = quad(-1);
        let splitter = Splitter::new(&k);
        assert_eq!(mobius(&k, &IdealHNF::unit(2), &splitter).unwrap(), 1);
        let two = ideal_from_generators(&k, &[el(&[2, 0])]).unwrap();
        assert_eq!(mobius(&k, &two, &splitter).unwrap(), 0);
        let five = ideal_from_generators(&k, &[el(&[5, 0])]).unwrap();
        assert_eq!(mobius(&k, &five, &splitter).unwrap(), 1);
        let three = ideal_from_generators(&k, &[el(&[3, 0])]).unwrap();
        assert_eq!(mobius(&k, &three, &splitter).unwrap(), -1);
        assert_eq!(mobius(&k, &IdealHNF::zero(2), &splitter), Err(Error::ZeroIdeal));
    }

    fn test_fields() -> Vec<FieldSpec> {
        vec![
            make_field(FieldKind::Rational).unwrap(),
            quad(-1),
            quad(-3),
            quad(2),
            quad(5),
            make_field(FieldKind::Monogenic { minpoly: vec![-1, -1, 0, 1] }).unwrap(),
        ]
    }

    #[test]
    fn completeness() {
        for k in test_fields() {
            let n = k.degree();
            for p in primes_up_to(60) {
                let above = split_prime(&k, p).unwrap();
                let total: u32 = above.iter().map(|q| q.e() * q.f()).sum();
                assert_eq!(total as usize, n, "{} at {p}", k.kind());
                let mut product = IdealHNF::unit(n);
                for q in &above {
                    for _ in 0..q.e() {
                        product = ideal_mul(&k, &product, q.hnf());
                    }
                }
                assert_eq!(product, ideal_from_generators(&k, &[AlgInt::integer(n, p as i64)]).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn reduce_is_a_homomorphism(
            field_ix in 0usize..6,
            p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 23]),
            a in prop::collection::vec(-40i64..40, 3),
            b in prop::collection::vec(-40i64..40, 3),
        ) {
            let k = test_fields().swap_remove(field_ix);
            let n = k.degree();
            let (a, b) = (el(&a[..n]), el(&b[..n]));
            for q in split_prime(&k, p).unwrap() {
                let (ra, rb) = (reduce(&a, &q), reduce(&b, &q));
                prop_assert_eq!(reduce(&k.add(&a, &b), &q), ra.add(&rb));
                prop_assert_eq!(reduce(&k.mul(&a, &b), &q), ra.mul(&rb, &q));
                prop_assert_eq!(ra.is_zero(), q.hnf().contains(&a));
                prop_assert_eq!(q.residue_index(&a.to_i64s().unwrap()), ra.index());
                prop_assert!(ra.index() < q.norm());
            }
        }

        #[test]
        fn s_saturates_beyond_difference_norms(
            pts in prop::collection::vec(prop::collection::vec(-6i64..6, 4), 1..5),
        ) {
            let k = quad(-1);
            let mut set: Vec<PointTuple> =
                pts.iter().map(|v| PointTuple::from_i64s(&[v[..2].to_vec(), v[2..].to_vec()])).collect();
            crate::ideals::dedup_points(&mut set);
            // a prime containing every coordinate difference of a pair divides
            // one nonzero difference, so its norm is at most that difference's norm
            let mut bound = BigInt::from(0);
            for (i, x) in set.iter().enumerate() {
                for y in &set[..i] {
                    let pair_min = x.coords().iter().zip(y.coords())
                        .map(|(a, b)| k.sub(a, b))
                        .filter(|d| !d.is_zero())
                        .map(|d| num_traits::Signed::abs(&k.field_norm(&d)))
                        .min()
                        .unwrap();
                    bound = bound.max(pair_min);
                }
            }
            for q in primes_up_to_norm(&k, 200).unwrap() {
                let s = s_of_prime(&set, &q).unwrap();
                prop_assert!(s >= 1 && s <= set.len());
                if BigInt::from(q.norm()) > bound {
                    prop_assert_eq!(s, set.len());
                }
            }
        }
    }
}
