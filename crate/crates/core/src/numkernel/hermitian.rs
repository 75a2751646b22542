use faer::Side;

use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64};
use crate::tolerances;

/// Square matrix verified Hermitian and stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, tolerances::HERMITICITY)
    }

    /// Checks `|A - A^*|_max <= tol (1 + |A|_max)` and then stores `(A + A^*) / 2`.
    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        matrix.require_square()?;
        matrix.check_finite()?;
        let adj = matrix.adjoint();
        let deviation = matrix.max_abs_diff(&adj);
        let bound = tol * (1.0 + matrix.norm_max());
        if deviation > bound {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: bound,
            });
        }
        Ok(HermitianOperator {
            matrix: (&matrix + &adj).scale_real(0.5),
        })
    }

    pub fn from_real_symmetric(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::identity(n),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::diag_real(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Sum of two Hermitian operators of equal dimension.
    pub fn plus(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.scale_real(s),
        }
    }

    pub fn eig(&self) -> Result<HermEig> {
        herm_eig(self)
    }
}

/// Spectral decomposition `A = U diag(values) U^*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// `U diag(f(values)) U^*`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * fv[j]);
        scaled.matmul(&self.vectors.adjoint())
    }

    /// `U diag(values) U^*` with caller-supplied eigenvalues.
    pub fn rebuild(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.values.len();
        assert_eq!(values.len(), n);
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * values[j]);
        scaled.matmul(&self.vectors.adjoint())
    }

    /// Groups eigenvalues whose consecutive gaps are below `tol` and returns,
    /// for each group, its mean eigenvalue and the column indices it spans.
    pub fn groups(&self, tol: f64) -> Vec<(f64, Vec<usize>)> {
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some((_, idx)) if (v - self.values[*idx.last().unwrap()]).abs() <= tol => {
                    idx.push(k)
                }
                _ => out.push((v, vec![k])),
            }
        }
        for (mean, idx) in out.iter_mut() {
            *mean = idx.iter().map(|&k| self.values[k]).sum::<f64>() / idx.len() as f64;
        }
        out
    }

    /// Spectral projections of the grouped eigenvalues, paired with the group mean.
    pub fn projections(&self, tol: f64) -> Vec<(f64, ComplexMatrix)> {
        let n = self.values.len();
        self.groups(tol)
            .into_iter()
            .map(|(mean, idx)| {
                let p = ComplexMatrix::from_fn(n, n, |i, j| {
                    idx.iter()
                        .map(|&k| self.vectors[(i, k)] * self.vectors[(j, k)].conj())
                        .sum()
                });
                (mean, p)
            })
            .collect()
    }

    /// Pairs of distinct groups separated by less than `near` but more than `tol`.
    pub fn fragile_gaps(&self, tol: f64, near: f64) -> Vec<(f64, f64)> {
        let groups = self.groups(tol);
        groups
            .windows(2)
            .filter(|w| (w[1].0 - w[0].0).abs() < near)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn herm_eig(a: &HermitianOperator) -> Result<HermEig> {
    let n = a.dim();
    if n == 0 {
        return Ok(HermEig {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let evd = a
        .matrix()
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("self-adjoint eigensolver, n = {n}: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vectors = ComplexMatrix::from_faer(evd.U().to_owned());
    Ok(HermEig { values, vectors })
}

/// Scalar functions applied through the spectral theorem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFn {
    Exp,
    Log,
    /// `lambda^z = exp(z log lambda)` on the positive spectrum.
    Power(C64),
}

pub fn matrix_fn(a: &HermitianOperator, f: MatrixFn) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    apply_matrix_fn(&eig, f)
}

pub(crate) fn apply_matrix_fn(eig: &HermEig, f: MatrixFn) -> Result<ComplexMatrix> {
    if !matches!(f, MatrixFn::Exp) {
        if let Some(&min) = eig.values.first() {
            if min <= 0.0 {
                return Err(Error::NotPositiveDefinite(min));
            }
        }
    }
    Ok(match f {
        MatrixFn::Exp => eig.apply(|x| C64::new(x.exp(), 0.0)),
        MatrixFn::Log => eig.apply(|x| C64::new(x.ln(), 0.0)),
        MatrixFn::Power(z) => eig.apply(|x| (z * x.ln()).exp()),
    })
}

/// Faithful density matrix with its cached spectral decomposition.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
    eig: HermEig,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(matrix)?)
    }

    /// Validates trace and faithfulness. Eigenvalues that fall below the floor
    /// only through roundoff (above `-floor`) are clamped up to the floor.
    pub fn from_hermitian(op: HermitianOperator) -> Result<Self> {
        let floor = tolerances::FAITHFULNESS_FLOOR;
        let tr = op.matrix().trace().re;
        if (tr - 1.0).abs() > tolerances::TRACE.max(1e-12 * op.dim() as f64) {
            return Err(Error::BadTrace(tr));
        }
        let mut eig = herm_eig(&op)?;
        let min = eig.values.first().copied().unwrap_or(1.0);
        if min < -floor {
            return Err(Error::NotFaithful {
                min_eigenvalue: min,
                floor,
            });
        }
        if min < floor {
            for v in eig.values.iter_mut() {
                *v = v.max(floor);
            }
            let total: f64 = eig.values.iter().sum();
            for v in eig.values.iter_mut() {
                *v /= total;
            }
            let rebuilt = eig.apply(|x| C64::new(x, 0.0));
            let op = HermitianOperator::new(rebuilt)?;
            return Ok(DensityMatrix { op, eig });
        }
        Ok(DensityMatrix { op, eig })
    }

    /// Normalizes a positive-definite Hermitian matrix to unit trace.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::BadTrace(tr));
        }
        Self::new(matrix.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let op = HermitianOperator::diag(&vec![1.0 / d as f64; d]);
        Self::from_hermitian(op).expect("maximally mixed state is faithful")
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::diag(p))
    }

    /// Gibbs state `exp(-beta h) / tr exp(-beta h)`.
    pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<Self> {
        let eig = herm_eig(h)?;
        let e0 = eig.values.first().copied().unwrap_or(0.0);
        let weights: Vec<f64> = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let rho = ComplexMatrix::from_fn(eig.values.len(), eig.values.len(), |i, j| {
            (0..weights.len())
                .map(|k| eig.vectors[(i, k)] * eig.vectors[(j, k)].conj() * (weights[k] / z))
                .sum()
        });
        Self::new(rho)
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn eigen(&self) -> &HermEig {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// `rho^z` on the principal branch.
    pub fn power(&self, z: C64) -> ComplexMatrix {
        if z == C64::new(0.0, 0.0) {
            return ComplexMatrix::identity(self.dim());
        }
        self.eig.apply(|x| (z * x.ln()).exp())
    }

    pub fn power_real(&self, p: f64) -> ComplexMatrix {
        self.power(C64::new(p, 0.0))
    }

    pub fn log(&self) -> ComplexMatrix {
        self.eig.apply(|x| C64::new(x.ln(), 0.0))
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        self.eig.apply(|x| C64::new(x.sqrt(), 0.0))
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        trace_product(self.matrix(), a)
    }
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
