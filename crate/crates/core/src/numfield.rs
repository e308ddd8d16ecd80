//! Number fields given by a monic generator, and exact arithmetic in their
//! rings of integers with respect to the power basis of that generator.
//!
//! Every supported field is described by the minimal polynomial of a
//! generator `θ` with `O = Z[θ]`:
//!
//! | kind | generator | basis |
//! |------|-----------|-------|
//! | rational | `θ = 0`, minimal polynomial `x` | `{1}` |
//! | quadratic, `d ≢ 1 (mod 4)` | `√d`, `x² − d` | `{1, √d}` |
//! | quadratic, `d ≡ 1 (mod 4)` | `(1+√d)/2`, `x² − x + (1−d)/4` | `{1, (1+√d)/2}` |
//! | monogenic | root of the given polynomial | `{1, θ, …, θ^(n−1)}` |
//!
//! For monogenic input the caller asserts `Z[θ]` is the full ring of integers;
//! maximality is not checked.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::is_squarefree;
use crate::error::{Error, Result};
use crate::hnf::det_big;
use crate::zpoly::is_irreducible_over_q;

/// Quadratic parameters `d` whose ring of integers is known to be a PID.
/// Rational is always a PID.
pub const CLASS_NUMBER_ONE_WHITELIST: [i64; 9] = [-1, -2, -3, -7, -11, 2, 3, 5, 13];

/// Field descriptor, serialized as `{"kind":"quadratic","d":-1}` and friends.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldKind {
    Rational,
    Quadratic { d: i64 },
    /// Coefficients constant term first, monic.
    Monogenic { minpoly: Vec<i64> },
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "Q"),
            FieldKind::Quadratic { d } => write!(f, "Q(sqrt({d}))"),
            FieldKind::Monogenic { minpoly } => write!(f, "Q[x]/({minpoly:?})"),
        }
    }
}

/// An element of `O` as integer coordinates over the integral basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgInt(Vec<BigInt>);

impl AlgInt {
    pub fn new(coords: Vec<BigInt>) -> Self {
        AlgInt(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        AlgInt(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The rational integer `k` embedded in a degree-`n` ring.
    pub fn integer(n: usize, k: i64) -> Self {
        let mut coords = vec![BigInt::zero(); n];
        coords[0] = BigInt::from(k);
        AlgInt(coords)
    }

    pub fn zero(n: usize) -> Self {
        AlgInt(vec![BigInt::zero(); n])
    }

    pub fn one(n: usize) -> Self {
        AlgInt::integer(n, 1)
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Coordinates as `i64` when they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

/// A number field `K` with a fixed integral basis `E` of `O`.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    kind: FieldKind,
    degree: usize,
    minpoly: Vec<i64>,
    basis_labels: Vec<String>,
    /// `e_i * e_j = sum_k mult_tensor[i][j][k] * e_k`
    mult_tensor: Vec<Vec<Vec<BigInt>>>,
    /// Flat `n*n*n` copy when every entry fits in `i64`.
    tensor_small: Option<Vec<i64>>,
    discriminant: BigInt,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for FieldSpec {}

/// Builds a field from its descriptor, validating the parameters.
///
/// Fields outside [`CLASS_NUMBER_ONE_WHITELIST`] are accepted with a logged
/// warning, since the density theorem is stated for principal ideal domains.
pub fn make_field(kind: FieldKind) -> Result<FieldSpec> {
    let (minpoly, labels) = match &kind {
        FieldKind::Rational => (vec![0, 1], vec!["1".to_string()]),
        FieldKind::Quadratic { d } => {
            let d = *d;
            if d == 0 || d == 1 {
                return Err(Error::InvalidQuadratic(d));
            }
            if !is_squarefree(d) {
                return Err(Error::NotSquarefree(d));
            }
            if d.rem_euclid(4) == 1 {
                (vec![(1 - d) / 4, -1, 1], vec!["1".to_string(), format!("(1+sqrt({d}))/2")])
            } else {
                let label = if d == -1 { "i".to_string() } else { format!("sqrt({d})") };
                (vec![-d, 0, 1], vec!["1".to_string(), label])
            }
        }
        FieldKind::Monogenic { minpoly } => {
            if minpoly.len() < 2 || *minpoly.last().unwrap() != 1 {
                return Err(Error::NotMonic);
            }
            if !is_irreducible_over_q(minpoly)? {
                return Err(Error::Reducible);
            }
            let labels = (0..minpoly.len() - 1)
                .map(|i| match i {
                    0 => "1".to_string(),
                    1 => "t".to_string(),
                    i => format!("t^{i}"),
                })
                .collect();
            (minpoly.clone(), labels)
        }
    };
    let field = FieldSpec::from_generator(kind, minpoly, labels)?;
    if !field.is_known_pid() {
        log::warn!("{}: ring of integers is not known to be a PID; density results assume one", field.kind);
    }
    Ok(field)
}

impl FieldSpec {
    fn from_generator(kind: FieldKind, minpoly: Vec<i64>, basis_labels: Vec<String>) -> Result<Self> {
        let n = minpoly.len() - 1;
        // powers θ^0 .. θ^(2n-2) in the power basis
        let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(2 * n - 1);
        for k in 0..(2 * n - 1).max(1) {
            if k < n {
                let mut v = vec![BigInt::zero(); n];
                v[k] = BigInt::one();
                powers.push(v);
            } else {
                // θ * θ^(k-1), with θ^n = -sum_{i<n} c_i θ^i
                let prev = &powers[k - 1];
                let mut v = vec![BigInt::zero(); n];
                for i in 1..n {
                    v[i] = prev[i - 1].clone();
                }
                let top = &prev[n - 1];
                for (i, c) in minpoly.iter().take(n).enumerate() {
                    v[i] -= top * c;
                }
                powers.push(v);
            }
        }
        let mult_tensor: Vec<Vec<Vec<BigInt>>> =
            (0..n).map(|i| (0..n).map(|j| powers[i + j].clone()).collect()).collect();
        let tensor_small = mult_tensor
            .iter()
            .flat_map(|a| a.iter().flat_map(|b| b.iter().map(ToPrimitive::to_i64)))
            .collect::<Option<Vec<i64>>>();
        let mut field = FieldSpec {
            kind,
            degree: n,
            minpoly,
            basis_labels,
            mult_tensor,
            tensor_small,
            discriminant: BigInt::zero(),
        };
        field.check_tensor()?;
        field.discriminant = field.trace_form_determinant();
        if field.discriminant.is_zero() {
            return Err(Error::InvalidTensor("degenerate trace form".into()));
        }
        Ok(field)
    }

    fn check_tensor(&self) -> Result<()> {
        let n = self.degree;
        let basis: Vec<AlgInt> = (0..n).map(|i| self.basis_element(i)).collect();
        for i in 0..n {
            for j in 0..n {
                if self.mult_tensor[i][j] != self.mult_tensor[j][i] {
                    return Err(Error::InvalidTensor(format!("e{i}*e{j} != e{j}*e{i}")));
                }
                for k in 0..n {
                    let left = self.mul(&self.mul(&basis[i], &basis[j]), &basis[k]);
                    let right = self.mul(&basis[i], &self.mul(&basis[j], &basis[k]));
                    if left != right {
                        return Err(Error::InvalidTensor(format!("associativity fails on ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(())
    }

    fn trace_form_determinant(&self) -> BigInt {
        let n = self.degree;
        let traces: Vec<BigInt> = (0..n).map(|k| self.trace(&self.basis_element(k))).collect();
        let form = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.mult_tensor[i][j].iter().zip(&traces).map(|(c, t)| c * t).sum())
                    .collect()
            })
            .collect();
        det_big(form)
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Minimal polynomial of the basis generator, constant term first.
    pub fn minpoly(&self) -> &[i64] {
        &self.minpoly
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn mult_tensor(&self) -> &[Vec<Vec<BigInt>>] {
        &self.mult_tensor
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    /// Whether `O` is known to be a principal ideal domain.
    pub fn is_known_pid(&self) -> bool {
        match &self.kind {
            FieldKind::Rational => true,
            FieldKind::Quadratic { d } => CLASS_NUMBER_ONE_WHITELIST.contains(d),
            FieldKind::Monogenic { .. } => false,
        }
    }

    pub fn basis_element(&self, i: usize) -> AlgInt {
        let mut coords = vec![BigInt::zero(); self.degree];
        coords[i] = BigInt::one();
        AlgInt(coords)
    }

    fn check(&self, a: &AlgInt) {
        assert_eq!(a.degree(), self.degree, "element has the wrong number of coordinates");
    }

    pub fn add(&self, a: &AlgInt, b: &AlgInt) -> AlgInt {
        self.check(a);
        self.check(b);
        AlgInt(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &AlgInt, b: &AlgInt) -> AlgInt {
        self.check(a);
        self.check(b);
        AlgInt(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &AlgInt) -> AlgInt {
        self.check(a);
        AlgInt(a.0.iter().map(|x| -x).collect())
    }

    pub fn mul(&self, a: &AlgInt, b: &AlgInt) -> AlgInt {
        self.check(a);
        self.check(b);
        let n = self.degree;
        let mut out = vec![BigInt::zero(); n];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, t) in self.mult_tensor[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &xy * t;
                    }
                }
            }
        }
        AlgInt(out)
    }

    /// The matrix of multiplication by `a`: row `i` holds the coordinates of `a * e_i`.
    pub fn mul_matrix(&self, a: &AlgInt) -> Vec<Vec<BigInt>> {
        (0..self.degree).map(|i| self.mul(a, &self.basis_element(i)).0).collect()
    }

    /// Same as [`mul_matrix`](Self::mul_matrix) on machine integers; `None` on overflow.
    pub(crate) fn mul_matrix_i128(&self, a: &[i64]) -> Option<Vec<Vec<i128>>> {
        let n = self.degree;
        let t = self.tensor_small.as_ref()?;
        let mut rows = vec![vec![0i128; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, &aj) in a.iter().enumerate() {
                if aj == 0 {
                    continue;
                }
                let base = (j * n + i) * n;
                for (k, out) in row.iter_mut().enumerate() {
                    let c = t[base + k];
                    if c != 0 {
                        *out = out.checked_add((aj as i128).checked_mul(c as i128)?)?;
                    }
                }
            }
        }
        Some(rows)
    }

    /// Signed field norm `N_{K/Q}(a)`: the determinant of multiplication by `a`.
    pub fn field_norm(&self, a: &AlgInt) -> BigInt {
        self.check(a);
        det_big(self.mul_matrix(a))
    }

    /// Field norm on machine integers; `None` if an intermediate overflows.
    pub(crate) fn field_norm_i128(&self, a: &[i64]) -> Option<i128> {
        crate::hnf::det_bareiss(self.mul_matrix_i128(a)?)
    }

    pub fn trace(&self, a: &AlgInt) -> BigInt {
        self.mul_matrix(a).into_iter().enumerate().map(|(i, row)| row[i].clone()).sum()
    }

    /// `θ^k` in the power basis.
    pub fn generator_power(&self, k: usize) -> AlgInt {
        let theta = if self.degree == 1 {
            // the generator of Z is θ = 0 (minimal polynomial x)
            AlgInt::from_i64s(&[-self.minpoly[0]])
        } else {
            self.basis_element(1)
        };
        (0..k).fold(AlgInt::one(self.degree), |acc, _| self.mul(&acc, &theta))
    }

    /// `sum_j coeffs[j] θ^j` for an integer polynomial of any degree.
    pub fn eval_generator_poly(&self, coeffs: &[BigInt]) -> AlgInt {
        let mut acc = AlgInt::zero(self.degree);
        let mut power = AlgInt::one(self.degree);
        let theta = self.generator_power(1);
        for c in coeffs {
            let term = AlgInt(power.0.iter().map(|x| x * c).collect());
            acc = self.add(&acc, &term);
            power = self.mul(&power, &theta);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(d: i64) -> FieldSpec {
        make_field(FieldKind::Quadratic { d }).unwrap()
    }

    fn el(c: &[i64]) -> AlgInt {
        AlgInt::from_i64s(c)
    }

    #[test]
    fn gaussian_field() {
        let k = quad(-1);
        assert_eq!(k.degree(), 2);
        assert_eq!(k.basis_labels(), ["1", "i"]);
        assert_eq!(k.discriminant(), &BigInt::from(-4));
        assert_eq!(k.mul(&el(&[2, 1]), &el(&[2, -1])), el(&[5, 0]));
        assert_eq!(k.field_norm(&el(&[2, 1])), BigInt::from(5));
    }

    #[test]
    fn rational_field() {
        let q = make_field(FieldKind::Rational).unwrap();
        assert_eq!(q.degree(), 1);
        assert_eq!(q.basis_labels(), ["1"]);
        assert_eq!(q.mult_tensor()[0][0], vec![BigInt::one()]);
        assert_eq!(q.discriminant(), &BigInt::one());
        assert_eq!(q.field_norm(&el(&[-7])), BigInt::from(-7));
    }

    #[test]
    fn golden_field_uses_half_integral_basis() {
        let k = quad(5);
        assert_eq!(k.basis_labels(), ["1", "(1+sqrt(5))/2"]);
        assert_eq!(k.discriminant(), &BigInt::from(5));
        // ω² = ω + 1
        assert_eq!(k.mul(&el(&[0, 1]), &el(&[0, 1])), el(&[1, 1]));
    }

    #[test]
    fn real_quadratic_norms_are_signed() {
        let k = quad(2);
        assert_eq!(k.discriminant(), &BigInt::from(8));
        assert_eq!(k.mul(&el(&[1, 1]), &el(&[1, -1])), el(&[-1, 0]));
        assert_eq!(k.field_norm(&el(&[1, 1])), BigInt::from(-1));
        assert_eq!(k.field_norm(&el(&[1, 0])), BigInt::one());
    }

    #[test]
    fn monogenic_cubic() {
        let k = make_field(FieldKind::Monogenic { minpoly: vec![-1, -1, 0, 1] }).unwrap();
        assert_eq!(k.degree(), 3);
        // disc(x^3 - x - 1) = -4(-1)^3 - 27(-1)^2 = -23
        assert_eq!(k.discriminant(), &BigInt::from(-23));
        assert_eq!(k.field_norm(&el(&[0, 1, 0])), BigInt::one());
    }

    #[test]
    fn invalid_fields() {
        assert_eq!(make_field(FieldKind::Quadratic { d: 12 }).unwrap_err(), Error::NotSquarefree(12));
        assert_eq!(make_field(FieldKind::Quadratic { d: 1 }).unwrap_err(), Error::InvalidQuadratic(1));
        assert_eq!(make_field(FieldKind::Quadratic { d: 0 }).unwrap_err(), Error::InvalidQuadratic(0));
        assert_eq!(
            make_field(FieldKind::Monogenic { minpoly: vec![-1, 0, 1] }).unwrap_err(),
            Error::Reducible
        );
        assert_eq!(make_field(FieldKind::Monogenic { minpoly: vec![1, 0, 2] }).unwrap_err(), Error::NotMonic);
    }

    #[test]
    fn whitelist() {
        assert!(quad(-7).is_known_pid());
        assert!(!quad(-5).is_known_pid());
        assert!(make_field(FieldKind::Rational).unwrap().is_known_pid());
    }

    #[test]
    fn descriptors_round_trip_json() {
        let json = r#"{"kind":"monogenic","minpoly":[-1,-1,0,1]}"#;
        let kind: FieldKind = serde_json::from_str(json).unwrap();
        assert_eq!(kind, FieldKind::Monogenic { minpoly: vec![-1, -1, 0, 1] });
        assert_eq!(serde_json::to_string(&FieldKind::Quadratic { d: -1 }).unwrap(), r#"{"kind":"quadratic","d":-1}"#);
        assert_eq!(serde_json::to_string(&FieldKind::Rational).unwrap(), r#"{"kind":"rational"}"#);
    }

    #[test]
    fn generator_polynomials() {
        let k = quad(-3);
        let omega = k.generator_power(1);
        // ω² - ω + 1 = 0
        let v = k.eval_generator_poly(&[1, -1, 1].map(BigInt::from));
        assert!(v.is_zero());
        assert_eq!(omega, el(&[0, 1]));
        let q = make_field(FieldKind::Rational).unwrap();
        assert_eq!(q.generator_power(1), el(&[0]));
    }

    fn field_strategy() -> impl Strategy<Value = FieldSpec> {
        prop::sample::select(vec![-1i64, -2, -3, -7, 2, 3, 5, 13]).prop_map(quad)
    }

    proptest! {
        #[test]
        fn ring_laws_and_norm_multiplicativity(
            field in field_strategy(),
            a in prop::collection::vec(-40i64..40, 2),
            b in prop::collection::vec(-40i64..40, 2),
            c in prop::collection::vec(-40i64..40, 2),
        ) {
            let (a, b, c) = (el(&a), el(&b), el(&c));
            prop_assert_eq!(field.mul(&a, &b), field.mul(&b, &a));
            prop_assert_eq!(field.mul(&field.mul(&a, &b), &c), field.mul(&a, &field.mul(&b, &c)));
            prop_assert_eq!(
                field.mul(&a, &field.add(&b, &c)),
                field.add(&field.mul(&a, &b), &field.mul(&a, &c))
            );
            prop_assert_eq!(
                field.field_norm(&field.mul(&a, &b)),
                field.field_norm(&a) * field.field_norm(&b)
            );
        }

        #[test]
        fn quadratic_norm_closed_form(d in prop::sample::select(vec![-1i64, -2, -3, -7, -11, 2, 3, 5, 13]),
                                      x in -1000i64..1000, y in -1000i64..1000) {
            let field = quad(d);
            let expected = if d.rem_euclid(4) == 1 {
                // (x + yω)(x + yω') = x² + xy + y²(1-d)/4
                x * x + x * y + y * y * (1 - d) / 4
            } else {
                x * x - d * y * y
            };
            prop_assert_eq!(field.field_norm(&el(&[x, y])), BigInt::from(expected));
            prop_assert_eq!(field.field_norm_i128(&[x, y]), Some(expected as i128));
        }
    }
}
