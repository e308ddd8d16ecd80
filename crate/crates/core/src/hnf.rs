//! Row-style Hermite normal form and fraction-free determinants, generic over
//! the integer type so hot paths can run in checked `i128` and fall back to
//! `BigInt` when an intermediate leaves the machine range.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Integer arithmetic used by the HNF kernel. Every fallible operation
/// returns `None` on overflow; `BigInt` never does.
pub(crate) trait HnfInt: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn c_add(&self, other: &Self) -> Option<Self>;
    fn c_sub(&self, other: &Self) -> Option<Self>;
    fn c_mul(&self, other: &Self) -> Option<Self>;
    fn c_neg(&self) -> Option<Self>;
    /// Floor division by a positive divisor.
    fn div_floor(&self, divisor: &Self) -> Self;
    fn div_exact(&self, divisor: &Self) -> Self;
    /// `(g, u, v)` with `u*self + v*other = g = gcd >= 0`.
    fn ext_gcd(&self, other: &Self) -> (Self, Self, Self);
}

// Keep a margin below i128::MIN/MAX so negation and gcd never overflow.
const I128_LIMIT: i128 = 1 << 125;

fn guard(x: i128) -> Option<i128> {
    (-I128_LIMIT..=I128_LIMIT).contains(&x).then_some(x)
}

impl HnfInt for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn c_add(&self, other: &Self) -> Option<Self> {
        self.checked_add(*other).and_then(guard)
    }
    fn c_sub(&self, other: &Self) -> Option<Self> {
        self.checked_sub(*other).and_then(guard)
    }
    fn c_mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(*other).and_then(guard)
    }
    fn c_neg(&self) -> Option<Self> {
        guard(-*self)
    }
    fn div_floor(&self, divisor: &Self) -> Self {
        Integer::div_floor(self, divisor)
    }
    fn div_exact(&self, divisor: &Self) -> Self {
        self / divisor
    }
    fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let e = self.extended_gcd(other);
        if e.gcd < 0 {
            (-e.gcd, -e.x, -e.y)
        } else {
            (e.gcd, e.x, e.y)
        }
    }
}

impl HnfInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn c_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn c_sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn c_mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn c_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn div_floor(&self, divisor: &Self) -> Self {
        Integer::div_floor(self, divisor)
    }
    fn div_exact(&self, divisor: &Self) -> Self {
        self / divisor
    }
    fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let e = self.extended_gcd(other);
        if Signed::is_negative(&e.gcd) {
            (-e.gcd, -e.x, -e.y)
        } else {
            (e.gcd, e.x, e.y)
        }
    }
}

fn combine<T: HnfInt>(u: &T, a: &[T], v: &T, b: &[T]) -> Option<Vec<T>> {
    a.iter().zip(b).map(|(x, y)| u.c_mul(x)?.c_add(&v.c_mul(y)?)).collect()
}

/// Hermite normal form of the row span: upper triangular pivots, positive
/// pivot entries, entries above each pivot reduced into `[0, pivot)`. Zero rows
/// are dropped. Returns `None` on overflow.
pub(crate) fn hnf_rows<T: HnfInt>(mut rows: Vec<Vec<T>>, ncols: usize) -> Option<Vec<Vec<T>>> {
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            if rows[r][c].is_zero() {
                rows.swap(r, i);
                continue;
            }
            let a = rows[r][c].clone();
            let b = rows[i][c].clone();
            let (g, u, v) = a.ext_gcd(&b);
            let a_g = a.div_exact(&g);
            let b_g = b.div_exact(&g).c_neg()?;
            let new_r = combine(&u, &rows[r], &v, &rows[i])?;
            let new_i = combine(&b_g, &rows[r], &a_g, &rows[i])?;
            rows[r] = new_r;
            rows[i] = new_i;
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            rows[r] = rows[r].iter().map(HnfInt::c_neg).collect::<Option<_>>()?;
        }
        let pivot = rows[r][c].clone();
        for k in 0..r {
            let q = rows[k][c].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            let neg_q = q.c_neg()?;
            rows[k] = combine(&T::one(), &rows[k], &neg_q, &rows[r])?;
        }
        r += 1;
    }
    rows.truncate(r);
    Some(rows)
}

/// Folds generators one at a time into a running HNF so intermediate entries
/// stay reduced. `stop` is consulted after each fold and can end early.
pub(crate) fn hnf_incremental<T, I, F>(gens: I, ncols: usize, mut stop: F) -> Option<Vec<Vec<T>>>
where
    T: HnfInt,
    I: IntoIterator<Item = Vec<T>>,
    F: FnMut(&[Vec<T>]) -> bool,
{
    let mut current: Vec<Vec<T>> = Vec::with_capacity(ncols + 1);
    for g in gens {
        if g.iter().all(HnfInt::is_zero) {
            continue;
        }
        current.push(g);
        current = hnf_rows(current, ncols)?;
        if stop(&current) {
            break;
        }
    }
    Some(current)
}

/// True when `rows` is the HNF of the full lattice `Z^n`, i.e. the identity.
pub(crate) fn is_identity<T: HnfInt>(rows: &[Vec<T>], n: usize) -> bool {
    rows.len() == n
        && rows.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, x)| if i == j { *x == T::one() } else { x.is_zero() })
        })
}

/// Fraction-free (Bareiss) determinant. `None` on overflow.
pub(crate) fn det_bareiss<T: HnfInt>(mut m: Vec<Vec<T>>) -> Option<T> {
    let n = m.len();
    if n == 0 {
        return Some(T::one());
    }
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return Some(T::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].c_mul(&m[k][k])?.c_sub(&m[i][k].c_mul(&m[k][j])?)?;
                m[i][j] = t.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        d.c_neg()
    } else {
        Some(d)
    }
}

pub(crate) fn to_i128_rows(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i128>>> {
    use num_traits::ToPrimitive;
    rows.iter().map(|r| r.iter().map(|x| x.to_i128().and_then(guard)).collect()).collect()
}

pub(crate) fn to_big_rows(rows: &[Vec<i128>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// HNF of big-integer rows, trying the `i128` kernel first.
pub(crate) fn hnf_big(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    if let Some(small) = to_i128_rows(&rows) {
        if let Some(h) = hnf_incremental(small, ncols, |_| false) {
            return to_big_rows(&h);
        }
    }
    hnf_incremental(rows, ncols, |_| false).expect("BigInt arithmetic does not overflow")
}

pub(crate) fn det_big(m: Vec<Vec<BigInt>>) -> BigInt {
    if let Some(small) = to_i128_rows(&m) {
        if let Some(d) = det_bareiss(small) {
            return BigInt::from(d);
        }
    }
    det_bareiss(m).expect("BigInt arithmetic does not overflow")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn known_hnf() {
        let h = hnf_big(big(&[&[4, 6], &[6, 4], &[0, 10]]), 2);
        // lattice spanned by (4,6),(6,4): contains (2,-2) and (0,10)
        assert_eq!(h, big(&[&[2, 8], &[0, 10]]));
        let h = hnf_big(big(&[&[0, 0], &[0, 0]]), 2);
        assert!(h.is_empty());
    }

    #[test]
    fn determinants() {
        assert_eq!(det_big(big(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(det_big(big(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]])), BigInt::from(-1));
        assert_eq!(det_big(big(&[&[1, 2], &[2, 4]])), BigInt::from(0));
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let huge = i64::MAX;
        let rows = big(&[&[huge, 3], &[3, huge], &[huge - 1, huge - 2]]);
        let h = hnf_big(rows.clone(), 2);
        let slow = hnf_incremental(rows, 2, |_| false).unwrap();
        assert_eq!(h, slow);
    }

    fn brute_det(m: &[Vec<i64>]) -> i128 {
        let n = m.len();
        if n == 1 {
            return m[0][0] as i128;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] as i128 * brute_det(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn hnf_is_canonical_and_preserves_determinant(
            entries in prop::collection::vec(-30i64..30, 9),
            extra in prop::collection::vec(-30i64..30, 3),
        ) {
            let m: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            let d = brute_det(&m);
            prop_assume!(d != 0);
            let rows = big(&m.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
            let h = hnf_big(rows.clone(), 3);
            prop_assert_eq!(h.len(), 3);
            let diag: BigInt = (0..3).map(|i| h[i][i].clone()).product();
            prop_assert_eq!(diag, BigInt::from(d.abs()));
            for i in 0..3 {
                for k in 0..i {
                    prop_assert!(h[k][i] >= <BigInt as Zero>::zero() && h[k][i] < h[i][i]);
                }
            }
            // adding a row already in the span leaves the HNF unchanged
            let mut more = rows.clone();
            let combo: Vec<BigInt> = (0..3).map(|j| {
                rows.iter().zip(&extra).map(|(r, &c)| &r[j] * c).sum()
            }).collect();
            more.push(combo);
            more.reverse();
            prop_assert_eq!(hnf_big(more, 3), h);
        }
    }
}
