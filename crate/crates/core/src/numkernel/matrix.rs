use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::C64;

/// Dense complex matrix.
///
/// Thin owner around a `faer` matrix. Entries are finite by construction when
/// built through [`ComplexMatrix::from_rows`]; internal arithmetic does not
/// re-check.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(Mat<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(Mat::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(Mat::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(Mat::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major data, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "from_rows",
                    expected: c,
                    actual: row.len(),
                });
            }
        }
        let m = Self::from_fn(r, c, |i, j| rows[i][j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let complex: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Rank-one matrix `u v^*`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn from_faer(m: Mat<C64>) -> Self {
        ComplexMatrix(m)
    }

    pub fn as_faer(&self) -> &Mat<C64> {
        &self.0
    }

    pub fn into_faer(self) -> Mat<C64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.nrows())
        } else {
            Err(Error::NotSquare(self.nrows(), self.ncols()))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                let z = self[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint().to_owned())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose().to_owned())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.conjugate().to_owned())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(self.nrows(), self.ncols(), |i, j| self[(i, j)] * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows().min(self.ncols())).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows().min(self.ncols())).map(|i| self[(i, i)]).collect()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                m = m.max(self[(i, j)].norm());
            }
        }
        m
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm_l2()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.ncols())
            .map(|j| (0..self.nrows()).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> Result<f64> {
        if self.nrows() == 0 || self.ncols() == 0 {
            return Ok(0.0);
        }
        let sv = self
            .0
            .singular_values()
            .map_err(|e| Error::Convergence(format!("singular values: {e:?}")))?;
        Ok(sv.first().copied().unwrap_or(0.0))
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.0
            .singular_values()
            .map_err(|e| Error::Convergence(format!("singular values: {e:?}")))
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.ncols(), other.ncols());
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                m = m.max((self[(i, j)] - other[(i, j)]).norm());
            }
        }
        m
    }

    /// Largest imaginary part magnitude over all entries.
    pub fn max_imag(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                m = m.max(self[(i, j)].im.abs());
            }
        }
        m
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &other.0)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.ncols(), v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.nrows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.0.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        out
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows()).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.ncols()).map(|j| self[(i, j)]).collect()
    }

    /// Inverse through partial-pivoting LU; singular input is reported, not propagated as NaN.
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        use faer::linalg::solvers::DenseSolveCore;
        let n = self.require_square()?;
        if n == 0 {
            return Ok(self.clone());
        }
        let inv = ComplexMatrix(self.0.full_piv_lu().inverse());
        inv.check_finite()
            .map_err(|_| Error::Singular("matrix inverse".into()))?;
        Ok(inv)
    }

    /// Solves `self * X = rhs`.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        use faer::linalg::solvers::Solve;
        self.require_square()?;
        if rhs.nrows() != self.nrows() {
            return Err(Error::DimensionMismatch {
                context: "solve",
                expected: self.nrows(),
                actual: rhs.nrows(),
            });
        }
        let x = ComplexMatrix(self.0.full_piv_lu().solve(&rhs.0));
        x.check_finite()
            .map_err(|_| Error::Singular("linear solve".into()))?;
        Ok(x)
    }

    /// Debug dump: JSON array of rows, each entry a `[re, im]` pair.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        serde_json::to_value(rows).expect("finite matrix serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidArgument(format!("matrix dump: {e}")))?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[(i, j)]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[(i, j)]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Serialized form used by system definition files: rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(transparent)]
pub struct MatrixDump(pub Vec<Vec<[f64; 2]>>);

impl TryFrom<&MatrixDump> for ComplexMatrix {
    type Error = Error;
    fn try_from(d: &MatrixDump) -> Result<Self> {
        let rows: Vec<Vec<C64>> = d
            .0
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }
}
