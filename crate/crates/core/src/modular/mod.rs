//! Modular structure of a faithful state in the GNS (vectorized) picture.
//!
//! Vectorization is row major, `vec(X)[i d + j] = X[i, j]`, so that
//! `vec(A X B) = (A (x) B^T) vec(X)`. Then `Omega = vec(omega^{1/2})`,
//! `pi(A) = A (x) I`, `J vec(X) = vec(X^*)` and
//! `Delta_{mu|nu}^z vec(X) = vec(mu^z X nu^{-z})`.
//!
//! The modular flow is pinned to `sigma_omega^theta(A) = omega^{i theta} A omega^{-i theta}`.

mod cocycle;
mod entropy;

pub use cocycle::{
    chain_rule_residual, connes_cocycle, connes_cocycle_dyson, connes_cocycle_via_gns,
    gencocycle_residual, multiplicative_cocycle_check, MAX_DYSON_ORDER,
};
pub use entropy::{
    additive_cocycle_residual, cocycle_ct, ell, entropy_balance_residual,
    entropy_production_sigma, log_delta_residual, omega_sigma_residual, relative_entropy,
    relative_entropy_superop, tri_cocycle_residual, ct_quadrature_residual,
};

use crate::error::{Error, Result};
use crate::numkernel::{
    vec_row_major, unvec, ComplexMatrix, DensityMatrix, HermEig, C64, I,
};
use crate::qsystem::pinch_with;
use crate::tolerances;

/// Superoperator on `d x d` matrices, either as a sum of sandwiches
/// `X -> sum_k L_k X R_k` or as a dense `d^2 x d^2` matrix.
#[derive(Clone, Debug)]
pub enum SuperOperator {
    Factored(Vec<(ComplexMatrix, ComplexMatrix)>),
    Dense(ComplexMatrix),
}

impl SuperOperator {
    pub fn sandwich(left: ComplexMatrix, right: ComplexMatrix) -> Self {
        SuperOperator::Factored(vec![(left, right)])
    }

    pub fn base_dim(&self) -> usize {
        match self {
            SuperOperator::Factored(t) => t[0].0.nrows(),
            SuperOperator::Dense(m) => (m.nrows() as f64).sqrt().round() as usize,
        }
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match self {
            SuperOperator::Factored(terms) => {
                let mut acc = ComplexMatrix::zeros(x.nrows(), x.ncols());
                for (l, r) in terms {
                    acc = &acc + &l.matmul(x).matmul(r);
                }
                acc
            }
            SuperOperator::Dense(m) => {
                let d = x.nrows();
                unvec(&m.mul_vec(&vec_row_major(x)), d, d).expect("square input")
            }
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            SuperOperator::Dense(m) => m.mul_vec(v),
            SuperOperator::Factored(_) => {
                let d = self.base_dim();
                let x = unvec(v, d, d).expect("vector of length d^2");
                vec_row_major(&self.apply_matrix(&x))
            }
        }
    }

    /// Dense form `sum_k L_k (x) R_k^T`, refused above the dimension cap.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        match self {
            SuperOperator::Dense(m) => Ok(m.clone()),
            SuperOperator::Factored(terms) => {
                let d = self.base_dim();
                if d > tolerances::DENSE_SUPEROPERATOR_CAP {
                    return Err(Error::DimensionCap {
                        dim: d,
                        cap: tolerances::DENSE_SUPEROPERATOR_CAP,
                    });
                }
                let mut acc = ComplexMatrix::zeros(d * d, d * d);
                for (l, r) in terms {
                    acc = &acc + &crate::numkernel::kron(l, &r.transpose());
                }
                Ok(acc)
            }
        }
    }
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// GNS data of a faithful state.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    omega: DensityMatrix,
    omega_vec: Vec<C64>,
}

pub fn gns_build(omega: &DensityMatrix) -> GnsSpace {
    GnsSpace {
        omega: omega.clone(),
        omega_vec: cone_vector(omega),
    }
}

/// Natural-cone representative `vec(nu^{1/2})`.
pub fn cone_vector(nu: &DensityMatrix) -> Vec<C64> {
    vec_row_major(&nu.sqrt())
}

impl GnsSpace {
    pub fn base_dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn dim(&self) -> usize {
        self.base_dim() * self.base_dim()
    }

    pub fn omega(&self) -> &DensityMatrix {
        &self.omega
    }

    /// The cyclic vector `Omega`.
    pub fn vector(&self) -> &[C64] {
        &self.omega_vec
    }

    pub fn pi(&self, a: &ComplexMatrix) -> SuperOperator {
        SuperOperator::sandwich(a.clone(), ComplexMatrix::identity(self.base_dim()))
    }

    /// `J vec(X) = vec(X^*)`.
    pub fn j(&self, v: &[C64]) -> Vec<C64> {
        let d = self.base_dim();
        vec_row_major(&unvec(v, d, d).expect("vector of length d^2").adjoint())
    }

    /// `Delta_{mu|nu}^z`.
    pub fn relative_modular(mu: &DensityMatrix, nu: &DensityMatrix, z: C64) -> SuperOperator {
        SuperOperator::sandwich(mu.power(z), nu.power(-z))
    }

    pub fn modular(&self, z: C64) -> SuperOperator {
        Self::relative_modular(&self.omega, &self.omega, z)
    }
}

/// `sigma_omega^theta(A) = omega^{i theta} A omega^{-i theta}`.
pub fn modular_flow(omega: &DensityMatrix, theta: f64, a: &ComplexMatrix) -> ComplexMatrix {
    let z = I * theta;
    omega.power(z).matmul(a).matmul(&omega.power(-z))
}

/// Analytic continuation `sigma_omega^{-i alpha}(A) = omega^alpha A omega^{-alpha}`.
pub fn analytic_flow(omega: &DensityMatrix, alpha: C64, a: &ComplexMatrix) -> ComplexMatrix {
    omega.power(alpha).matmul(a).matmul(&omega.power(-alpha))
}

/// KMS boundary residual `|tr(omega A sigma^{-i}(B)) - tr(omega B A)|`.
pub fn kms_residual(omega: &DensityMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let shifted = analytic_flow(omega, C64::new(1.0, 0.0), b);
    let lhs = omega.matrix().matmul(a).matmul(&shifted).trace();
    let rhs = omega.matrix().matmul(b).matmul(a).trace();
    (lhs - rhs).norm()
}

/// Block pinching of `nu` onto the eigenspaces of `omega`.
pub fn pinch(nu: &ComplexMatrix, omega: &DensityMatrix) -> ComplexMatrix {
    let eig: &HermEig = omega.eigen();
    let fragile = eig.fragile_gaps(tolerances::EIGEN_GROUPING, tolerances::NEAR_DEGENERATE);
    if !fragile.is_empty() {
        log::warn!(
            "pinch: {} near-degenerate eigenvalue pairs of omega below {:e}",
            fragile.len(),
            tolerances::NEAR_DEGENERATE
        );
    }
    pinch_with(eig, nu, tolerances::EIGEN_GROUPING)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random::{random_density, random_hermitian, seeded};
    use crate::numkernel::trace_product;

    #[test]
    fn gns_basics() {
        let mut rng = seeded(1);
        let omega = random_density(&mut rng, 4, 0.1, false);
        let gns = gns_build(&omega);
        let v = gns.vector();
        assert!((inner(v, v).re - 1.0).abs() < 1e-12);
        let jv = gns.j(v);
        assert!(jv.iter().zip(v).all(|(a, b)| (a - b).norm() < 1e-13));
        let dv = gns.modular(C64::new(1.0, 0.0)).apply(v);
        assert!(dv.iter().zip(v).all(|(a, b)| (a - b).norm() < 1e-12));
        let a = random_hermitian(&mut rng, 4, false);
        let nu = random_density(&mut rng, 4, 0.1, false);
        let w = cone_vector(&nu);
        let lhs = inner(&w, &gns.pi(a.matrix()).apply(&w));
        assert!((lhs - trace_product(nu.matrix(), a.matrix())).norm() < 1e-11);
    }

    #[test]
    fn factored_and_dense_agree() {
        let mut rng = seeded(2);
        let a = random_hermitian(&mut rng, 3, false).into_matrix();
        let b = random_hermitian(&mut rng, 3, false).into_matrix();
        let x = random_hermitian(&mut rng, 3, false).into_matrix();
        let op = SuperOperator::Factored(vec![(a.clone(), b.clone()), (b, a)]);
        let dense = SuperOperator::Dense(op.to_dense().unwrap());
        let v = vec_row_major(&x);
        let d1 = op.apply(&v);
        let d2 = dense.apply(&v);
        assert!(d1.iter().zip(&d2).all(|(p, q)| (p - q).norm() < 1e-12));
    }

    #[test]
    fn kms_identity_and_flow() {
        let mut rng = seeded(3);
        let omega = random_density(&mut rng, 3, 0.1, false);
        let a = random_hermitian(&mut rng, 3, false).into_matrix();
        let b = random_hermitian(&mut rng, 3, false).into_matrix();
        assert!(kms_residual(&omega, &a, &b) < 1e-10);
        let f = modular_flow(&omega, 0.7, &a);
        let g = analytic_flow(&omega, C64::new(0.0, 0.7), &a);
        assert!(f.max_abs_diff(&g) < 1e-12);
        let two = modular_flow(&omega, 0.4, &modular_flow(&omega, 0.3, &a));
        assert!(two.max_abs_diff(&f) < 1e-12);
        let p = C64::new(0.3, 0.2);
        let q = C64::new(-0.1, 0.5);
        let lhs = analytic_flow(&omega, p, &analytic_flow(&omega, q, &a));
        assert!(lhs.max_abs_diff(&analytic_flow(&omega, p + q, &a)) < 1e-11);
    }

    #[test]
    fn analytic_flow_on_diagonal() {
        let omega = DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap();
        let mut e12 = ComplexMatrix::zeros(2, 2);
        e12[(0, 1)] = C64::new(1.0, 0.0);
        let alpha = C64::new(0.3, -0.4);
        let out = analytic_flow(&omega, alpha, &e12);
        let expected = (alpha * (0.8f64 / 0.2).ln()).exp();
        assert!((out[(0, 1)] - expected).norm() < 1e-13);
    }

    #[test]
    fn pinching_matches_theta_average() {
        let mut rng = seeded(4);
        let omega = random_density(&mut rng, 3, 0.2, false);
        let nu = random_density(&mut rng, 3, 0.2, false);
        let a = random_hermitian(&mut rng, 3, false).into_matrix();
        let exact = trace_product(&pinch(nu.matrix(), &omega), &a).re;
        // trapezoid average over theta in [0, R]
        let (r, n) = (5000.0, 200_000);
        let h = r / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            let th = h * k as f64;
            acc += w * trace_product(nu.matrix(), &modular_flow(&omega, th, &a)).re;
        }
        assert!((acc * h / r - exact).abs() < 5e-3);
    }
}
