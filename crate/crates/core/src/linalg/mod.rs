//! Exact integer and rational matrix algebra.
//!
//! Determinants and inverses use fraction-free (Bareiss) elimination so that
//! intermediate entries stay integral. Singular values are certified through
//! the exact characteristic polynomial of `MᵀM` and Sturm root counting, see
//! [`singular`].

mod poly;
mod sequence;
mod singular;

pub use poly::{char_poly, Poly};
pub use sequence::{MatrixSequence, SequenceKind};
pub use singular::{
    is_expanding, is_expanding_rational, smallest_singular_value, smallest_singular_value_rational, SingularInterval,
    DEFAULT_SINGULAR_TOL,
};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};

/// A square matrix of arbitrary-precision integers, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(dim: usize, entries: Vec<BigInt>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::invalid("dim", "matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(LabError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(IntMatrix { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        for row in &rows {
            if row.len() != dim {
                return Err(LabError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from small integer rows.
    ///
    /// Panics if `rows` is empty.
    pub fn from_i64<const D: usize>(rows: [[i64; D]; D]) -> Self {
        assert!(D > 0, "empty matrix");
        let entries = rows.iter().flatten().map(|&v| BigInt::from(v)).collect();
        IntMatrix { dim: D, entries }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1)
    }

    pub fn scalar(dim: usize, c: i64) -> Self {
        assert!(dim > 0, "empty matrix");
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::from(c);
        }
        IntMatrix { dim, entries }
    }

    pub fn diag(values: &[BigInt]) -> Self {
        let dim = values.len();
        assert!(dim > 0, "empty matrix");
        let mut entries = vec![BigInt::zero(); dim * dim];
        for (i, v) in values.iter().enumerate() {
            entries[i * dim + i] = v.clone();
        }
        IntMatrix { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(j, i).clone());
            }
        }
        IntMatrix { dim: d, entries }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigInt::zero();
                for k in 0..d {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries.push(acc);
            }
        }
        IntMatrix { dim: d, entries }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        IntMatrix { dim: self.dim, entries }
    }

    pub fn pow(&self, mut n: u64) -> IntMatrix {
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.dim);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_vec_i64(&self, v: &[i64]) -> Vec<BigInt> {
        let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.mul_vec(&v)
    }

    /// `MᵀM`, the Gram matrix whose eigenvalues are the squared singular values.
    pub fn gram(&self) -> IntMatrix {
        self.transpose().mul(self)
    }

    pub(crate) fn add_diagonal(&mut self, c: &BigInt) {
        for i in 0..self.dim {
            self.entries[i * self.dim + i] += c;
        }
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| self.get(i, i).clone()).sum()
    }

    /// Sum of absolute values of the entries in row `i`.
    pub fn row_abs_sum(&self, i: usize) -> BigInt {
        self.row(i).iter().map(|a| a.abs()).sum()
    }

    /// Exact determinant by Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        let d = self.dim;
        let mut m = self.entries.clone();
        let mut negate = false;
        let mut prev = BigInt::one();
        for k in 0..d.saturating_sub(1) {
            if m[k * d + k].is_zero() {
                let Some(pivot) = (k + 1..d).find(|&i| !m[i * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    m.swap(k * d + j, pivot * d + j);
                }
                negate = !negate;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = (&m[i * d + j] * &m[k * d + k] - &m[i * d + k] * &m[k * d + j]) / &prev;
                    m[i * d + j] = v;
                }
            }
            prev = m[k * d + k].clone();
        }
        let det = m[d * d - 1].clone();
        if negate {
            -det
        } else {
            det
        }
    }

    /// Exact inverse over the rationals.
    ///
    /// Forward elimination on `[M | I]` is fraction-free; only the final back
    /// substitution works with rationals.
    pub fn inverse_rational(&self) -> Result<RationalMatrix> {
        let d = self.dim;
        let w = 2 * d;
        let mut m = vec![BigInt::zero(); d * w];
        for i in 0..d {
            for j in 0..d {
                m[i * w + j] = self.get(i, j).clone();
            }
            m[i * w + d + i] = BigInt::one();
        }
        let mut prev = BigInt::one();
        for k in 0..d {
            if m[k * w + k].is_zero() {
                let pivot = (k + 1..d)
                    .find(|&i| !m[i * w + k].is_zero())
                    .ok_or(LabError::SingularMatrix)?;
                for j in 0..w {
                    m.swap(k * w + j, pivot * w + j);
                }
            }
            for i in k + 1..d {
                for j in k + 1..w {
                    let v = (&m[i * w + j] * &m[k * w + k] - &m[i * w + k] * &m[k * w + j]) / &prev;
                    m[i * w + j] = v;
                }
                m[i * w + k] = BigInt::zero();
            }
            prev = m[k * w + k].clone();
        }
        // Back substitution, one right-hand column at a time.
        let mut inv = vec![BigRational::zero(); d * d];
        for c in 0..d {
            for i in (0..d).rev() {
                let mut acc = BigRational::from_integer(m[i * w + d + c].clone());
                for j in i + 1..d {
                    acc -= BigRational::from_integer(m[i * w + j].clone()) * &inv[j * d + c];
                }
                inv[i * d + c] = acc / BigRational::from_integer(m[i * w + i].clone());
            }
        }
        Ok(RationalMatrix { dim: d, entries: inv })
    }

    /// The adjugate `det(M)·M⁻¹`, an integer matrix.
    pub fn adjugate(&self) -> Result<IntMatrix> {
        let det = BigRational::from_integer(self.determinant());
        let inv = self.inverse_rational()?;
        let entries = inv
            .entries
            .iter()
            .map(|q| {
                let v = q * &det;
                debug_assert!(v.is_integer());
                v.to_integer()
            })
            .collect();
        Ok(IntMatrix { dim: self.dim, entries })
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect(),
        }
    }

    /// Row-major `f64` copy; entries beyond `f64` range become infinite.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn max_abs_bits(&self) -> u64 {
        self.entries.iter().map(|v| v.bits()).max().unwrap_or(0)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A square matrix of rationals in lowest terms, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(dim: usize, entries: Vec<BigRational>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::invalid("dim", "matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(LabError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(RationalMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        IntMatrix::identity(dim).to_rational()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigRational::zero();
                for k in 0..d {
                    acc += self.get(i, k) * other.get(k, j);
                }
                entries.push(acc);
            }
        }
        RationalMatrix { dim: d, entries }
    }

    pub fn scale(&self, c: &BigRational) -> RationalMatrix {
        RationalMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> RationalMatrix {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(j, i).clone());
            }
        }
        RationalMatrix { dim: d, entries }
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * &v[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|q| q.is_integer())
    }

    pub fn to_integer(&self) -> Option<IntMatrix> {
        self.is_integral().then(|| IntMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|q| q.to_integer()).collect(),
        })
    }

    /// Least common multiple of the entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.entries.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }

    /// Returns `(q·M, q)` with `q` the common denominator, so `q·M` is integral.
    pub fn clear_denominators(&self) -> (IntMatrix, BigInt) {
        let q = self.common_denominator();
        let entries = self.entries.iter().map(|v| v.numer() * (&q / v.denom())).collect();
        (IntMatrix { dim: self.dim, entries }, q)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(IntMatrix::from_i64([[2, 1], [0, 3]]).determinant(), BigInt::from(6));
        assert_eq!(IntMatrix::identity(3).determinant(), BigInt::from(1));
        assert_eq!(IntMatrix::from_i64([[2, 1], [1, 1]]).determinant(), BigInt::from(1));
        assert_eq!(IntMatrix::from_i64([[0, 1], [1, 0]]).determinant(), BigInt::from(-1));
        assert_eq!(IntMatrix::from_i64([[1, 2], [2, 4]]).determinant(), BigInt::from(0));
        assert_eq!(
            IntMatrix::from_i64([[0, 2, 1], [3, 0, 0], [1, 1, 5]]).determinant(),
            BigInt::from(-27)
        );
    }

    #[test]
    fn inverse_examples() {
        let half = IntMatrix::scalar(2, 2).inverse_rational().unwrap();
        assert_eq!(
            half,
            RationalMatrix::new(2, vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)]).unwrap()
        );

        let a = IntMatrix::from_i64([[2, 1], [0, 3]]);
        let inv = a.inverse_rational().unwrap();
        // adjugate / determinant
        let expected = RationalMatrix::new(2, vec![q(3, 6), q(-1, 6), q(0, 1), q(2, 6)]).unwrap();
        assert_eq!(inv, expected);
        assert_eq!(a.to_rational().mul(&inv), RationalMatrix::identity(2));

        assert_eq!(
            IntMatrix::identity(3).inverse_rational().unwrap(),
            RationalMatrix::identity(3)
        );
    }

    #[test]
    fn inverse_rejects_singular() {
        let s = IntMatrix::from_i64([[1, 2], [2, 4]]);
        assert_eq!(s.inverse_rational(), Err(LabError::SingularMatrix));
    }

    #[test]
    fn inverse_needs_pivoting() {
        let a = IntMatrix::from_i64([[0, 2, 1], [3, 0, 0], [1, 1, 5]]);
        let inv = a.inverse_rational().unwrap();
        assert_eq!(a.to_rational().mul(&inv), RationalMatrix::identity(3));
        let adj = a.adjugate().unwrap();
        assert_eq!(a.mul(&adj), IntMatrix::scalar(3, -27));
    }

    #[test]
    fn clear_denominators_scales_to_integers() {
        let m = IntMatrix::from_i64([[2, 1], [0, 3]]).inverse_rational().unwrap();
        let (im, den) = m.clear_denominators();
        assert_eq!(den, BigInt::from(6));
        assert_eq!(im, IntMatrix::from_i64([[3, -1], [0, 2]]));
    }

    fn small_matrix(d: usize) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-6i64..=6, d * d)
            .prop_map(move |v| IntMatrix::new(d, v.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn determinant_is_multiplicative(
            (a, b) in (1usize..=4).prop_flat_map(|d| (small_matrix(d), small_matrix(d)))
        ) {
            prop_assert_eq!(a.mul(&b).determinant(), a.determinant() * b.determinant());
        }

        #[test]
        fn inverse_round_trips(m in small_matrix(3)) {
            match m.inverse_rational() {
                Ok(inv) => prop_assert_eq!(m.to_rational().mul(&inv), RationalMatrix::identity(3)),
                Err(_) => prop_assert!(m.determinant().is_zero()),
            }
        }
    }
}
