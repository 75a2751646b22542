//! α-Liouvilleans as Kronecker sums on the vectorized algebra, their
//! algebraic identities, Liouvillean representations of the entropic
//! functionals, the spectral NESS and resolvent pole extraction.
//!
//! Every Liouvillean here has the form `vec(X) -> vec(A X - X G)`, so that
//! `e^{itL} vec(X) = vec(e^{itA} X e^{-itG})`. Representations use this
//! factored form; dense `d^2 x d^2` matrices are built only for spectra and
//! for the structural checks.

mod resonance;

pub use resonance::{
    asymptotic_residual, dominant_pole, resolvent_element, resonance_curve, AsymptoticFit,
    GeneratorFamily, QuantumFamily, ResonanceFamily, ResonanceResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{connes_cocycle, inner};
use crate::numkernel::{
    eigenvalues, expm_balanced, expm_general, general_eig, kron, multiset_distance, unvec, vec_row_major, ComplexMatrix,
    DensityMatrix, C64,
};
use crate::qsystem::FiniteQuantumSystem;
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiouvilleanKind {
    Standard,
    Alpha,
    Hat,
}

/// `vec(X) -> vec(A X - X G)`.
#[derive(Clone, Debug)]
pub struct AlphaLiouvillean {
    pub alpha: C64,
    pub kind: LiouvilleanKind,
    left: ComplexMatrix,
    right: ComplexMatrix,
    /// Eigenbasis of `omega`, where the modular weights are diagonal; the
    /// non-normal factors are exponentiated there after balancing.
    basis: Option<ComplexMatrix>,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl AlphaLiouvillean {
    pub fn base_dim(&self) -> usize {
        self.left.nrows()
    }

    pub fn left(&self) -> &ComplexMatrix {
        &self.left
    }

    pub fn right(&self) -> &ComplexMatrix {
        &self.right
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.left.matmul(x) - &x.matmul(&self.right)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.base_dim();
        vec_row_major(&self.apply_matrix(&unvec(v, d, d).expect("vector of length d^2")))
    }

    /// `A (x) I - I (x) G^T`, refused above the dense cap.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let d = self.base_dim();
        if d > tolerances::DENSE_SUPEROPERATOR_CAP {
            return Err(Error::DimensionCap {
                dim: d,
                cap: tolerances::DENSE_SUPEROPERATOR_CAP,
            });
        }
        let id = ComplexMatrix::identity(d);
        Ok(&kron(&self.left, &id) - &kron(&id, &self.right.transpose()))
    }

    /// `e^{itL}` in factored form: the pair `(e^{itA}, e^{-itG})`.
    pub fn propagator_factors(&self, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let exp = |g: &ComplexMatrix, s: f64| match &self.basis {
            Some(u) => {
                let inner = u.adjoint().matmul(g).matmul(u).scale(C64::new(0.0, s));
                Ok(u.matmul(&expm_balanced(&inner)?).matmul(&u.adjoint()))
            }
            None => expm_general(&g.scale(C64::new(0.0, s))),
        };
        Ok((exp(&self.left, t)?, exp(&self.right, -t)?))
    }

    /// `e^{itL} vec(X)`.
    pub fn evolve(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        let (l, r) = self.propagator_factors(t)?;
        let out = l.matmul(x).matmul(&r);
        out.check_finite().map_err(|_| Error::Overflow(f64::INFINITY))?;
        Ok(out)
    }

    /// Eigenvalues of the dense matrix.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.matrix()?)
    }
}

/// `L = H (x) I - I (x) H^T`, the standard Liouvillean.
pub fn standard_liouvillean(sys: &FiniteQuantumSystem) -> AlphaLiouvillean {
    let h = sys.hamiltonian().matrix().clone();
    AlphaLiouvillean {
        alpha: C64::new(0.0, 0.0),
        kind: LiouvilleanKind::Standard,
        left: h.clone(),
        right: h,
        basis: None,
    }
}

/// `L_alpha = L_fr + V - J sigma_omega^{-i conj(alpha)}(V) J`.
pub fn alpha_liouvillean(sys: &FiniteQuantumSystem, alpha: C64) -> Result<AlphaLiouvillean> {
    let split = sys.require_perturbation()?;
    let omega = sys.omega();
    let v = split.v.matrix();
    // J B J acts as right multiplication by B^*; here B^* = omega^{-alpha} V omega^{alpha}
    let dressed = omega.power(-alpha).matmul(v).matmul(&omega.power(alpha));
    Ok(AlphaLiouvillean {
        alpha,
        kind: LiouvilleanKind::Alpha,
        left: sys.hamiltonian().matrix().clone(),
        right: split.h_free.matrix() + &dressed,
        basis: Some(omega.eigen().vectors.clone()),
    })
}

/// `hat L_alpha = L_fr + sigma_omega^{i alpha/2}(V) - J sigma_omega^{-i(1 - conj alpha)/2}(V) J`.
pub fn hat_liouvillean(sys: &FiniteQuantumSystem, alpha: C64) -> Result<AlphaLiouvillean> {
    let split = sys.require_perturbation()?;
    let omega = sys.omega();
    let v = split.v.matrix();
    let h_fr = split.h_free.matrix();
    let left = omega.power(-alpha * 0.5).matmul(v).matmul(&omega.power(alpha * 0.5));
    let beta = (one() - alpha) * 0.5;
    let right = omega.power(-beta).matmul(v).matmul(&omega.power(beta));
    Ok(AlphaLiouvillean {
        alpha,
        kind: LiouvilleanKind::Hat,
        left: h_fr + &left,
        right: h_fr + &right,
        basis: Some(omega.eigen().vectors.clone()),
    })
}

fn omega_half(sys: &FiniteQuantumSystem) -> ComplexMatrix {
    sys.omega().sqrt()
}

/// `<vec X, vec Y> = tr(X^* Y)`.
fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    inner(&vec_row_major(x), &vec_row_major(y))
}

/// `<Omega, e^{itL_{1/2 - alpha}} Omega>`.
pub fn rep_2tm(sys: &FiniteQuantumSystem, t: f64, alpha: C64) -> Result<C64> {
    let l = alpha_liouvillean(sys, C64::new(0.5, 0.0) - alpha)?;
    let w = omega_half(sys);
    Ok(hs_inner(&w, &l.evolve(&w, t)?))
}

/// `<Omega, e^{iTL_{1/2}} e^{itL_{1/2 - alpha}} Omega>`.
pub fn rep_qpsc(sys: &FiniteQuantumSystem, big_t: f64, t: f64, alpha: C64) -> Result<C64> {
    let half = alpha_liouvillean(sys, C64::new(0.5, 0.0))?;
    let l = alpha_liouvillean(sys, C64::new(0.5, 0.0) - alpha)?;
    let w = omega_half(sys);
    let inner_vec = half.evolve(&l.evolve(&w, t)?, big_t)?;
    Ok(hs_inner(&w, &inner_vec))
}

/// `<Omega, e^{iTL_{1/2}} e^{it hat L_alpha} Omega>`.
pub fn rep_ancilla(sys: &FiniteQuantumSystem, big_t: f64, t: f64, alpha: C64) -> Result<C64> {
    let half = alpha_liouvillean(sys, C64::new(0.5, 0.0))?;
    let l = hat_liouvillean(sys, alpha)?;
    let w = omega_half(sys);
    let inner_vec = half.evolve(&l.evolve(&w, t)?, big_t)?;
    Ok(hs_inner(&w, &inner_vec))
}

/// `|e^{itL_{1/2 - alpha}} Omega - [D omega_{-t} : D omega]_alpha Omega|`.
pub fn hhis_residual(sys: &FiniteQuantumSystem, t: f64, alpha: C64) -> Result<f64> {
    let l = alpha_liouvillean(sys, C64::new(0.5, 0.0) - alpha)?;
    let w = omega_half(sys);
    let lhs = l.evolve(&w, t)?;
    let back = sys.evolve_state(sys.omega(), -t)?;
    let rhs = connes_cocycle(&back, sys.omega(), alpha).matmul(&w);
    Ok(lhs.max_abs_diff(&rhs))
}

/// `|L_{1/2} Omega|`.
pub fn l_half_kernel_residual(sys: &FiniteQuantumSystem) -> Result<f64> {
    let l = alpha_liouvillean(sys, C64::new(0.5, 0.0))?;
    Ok(l.apply_matrix(&omega_half(sys)).norm_max())
}

/// `|L_alpha^* - L_{-conj alpha}|` on dense matrices.
pub fn adjoint_residual(sys: &FiniteQuantumSystem, alpha: C64) -> Result<f64> {
    let a = alpha_liouvillean(sys, alpha)?.matrix()?;
    let b = alpha_liouvillean(sys, -alpha.conj())?.matrix()?;
    Ok(a.adjoint().max_abs_diff(&b))
}

/// `|e^{itL_alpha} - e^{itL} J [D omega_t : D omega]_{conj alpha} J|` on the
/// dense `d^2 x d^2` operators. Both sides are Kronecker products: the left
/// comes from the exponentials of the factors of `L_alpha`, the right from the
/// unitary group of `H` and the Connes cocycle.
pub fn tpar_l_residual(sys: &FiniteQuantumSystem, alpha: C64, t: f64) -> Result<f64> {
    let (a, g) = alpha_liouvillean(sys, alpha)?.propagator_factors(t)?;
    let lhs = kron(&a, &g.transpose());
    let omega_t = sys.evolve_state(sys.omega(), t)?;
    let b = connes_cocycle(&omega_t, sys.omega(), alpha.conj());
    // e^{itL} X = e^{itH} X e^{-itH} and J B J X = X B^*
    let right = b.adjoint().matmul(&sys.propagator(t));
    let rhs = kron(&sys.propagator(-t), &right.transpose());
    Ok(lhs.max_abs_diff(&rhs) / (1.0 + lhs.norm_max()))
}

/// Dense modular power `Delta_omega^z = omega^z (x) (omega^{-z})^T`.
fn modular_power_dense(omega: &DensityMatrix, z: C64) -> ComplexMatrix {
    kron(&omega.power(z), &omega.power(-z).transpose())
}

/// Residuals of `hat L_alpha = Delta^{-alpha/2} L_{1/2 - alpha} Delta^{alpha/2}`:
/// matrix identity and eigenvalue multiset distance.
pub fn sun_tuluz_residual(sys: &FiniteQuantumSystem, alpha: C64) -> Result<(f64, f64)> {
    let hat = hat_liouvillean(sys, alpha)?;
    let shifted = alpha_liouvillean(sys, C64::new(0.5, 0.0) - alpha)?;
    let omega = sys.omega();
    let conj = modular_power_dense(omega, -alpha * 0.5)
        .matmul(&shifted.matrix()?)
        .matmul(&modular_power_dense(omega, alpha * 0.5));
    let hat_m = hat.matrix()?;
    let identity = hat_m.max_abs_diff(&conj) / (1.0 + hat_m.norm_max());
    let spectral = multiset_distance(&hat.spectrum()?, &shifted.spectrum()?);
    Ok((identity, spectral))
}

/// Spectral NESS: the projection of `L_{1/2}` onto its kernel, applied as
/// `omega_+(A) = <Omega, P A Omega>`.
#[derive(Clone, Debug)]
pub struct SpectralNess {
    /// `unvec(P^* Omega)`, so that `omega_+(A) = tr(Y^* A omega^{1/2})`.
    dual: ComplexMatrix,
    omega_half: ComplexMatrix,
    pub kernel_dim: usize,
}

impl SpectralNess {
    pub fn new(sys: &FiniteQuantumSystem) -> Result<Self> {
        let l = alpha_liouvillean(sys, C64::new(0.5, 0.0))?;
        let m = l.matrix()?;
        let scale = 1.0 + m.norm_max();
        let eig = general_eig(&m, 1e-8 * scale)?;
        let cluster = eig
            .clusters
            .iter()
            .min_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
            .ok_or_else(|| Error::InvalidArgument("empty Liouvillean".into()))?;
        if cluster.value.norm() > 1e-8 * scale {
            return Err(Error::InvalidArgument(format!(
                "L_1/2 has no kernel, nearest eigenvalue {}",
                cluster.value
            )));
        }
        if !cluster.semisimple {
            return Err(Error::NonSemisimpleKernel);
        }
        let w = omega_half(sys);
        let p = cluster.projector();
        let dual_vec = p.adjoint().mul_vec(&vec_row_major(&w));
        let d = sys.dim();
        Ok(SpectralNess {
            dual: unvec(&dual_vec, d, d)?,
            omega_half: w,
            kernel_dim: cluster.multiplicity(),
        })
    }

    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        hs_inner(&self.dual, &a.matmul(&self.omega_half))
    }

    /// Density matrix `rho_+` with `omega_+(A) = tr(rho_+ A)`.
    pub fn density(&self) -> ComplexMatrix {
        self.omega_half.matmul(&self.dual.adjoint())
    }
}

pub fn ness_via_spectral_projection(sys: &FiniteQuantumSystem, a: &ComplexMatrix) -> Result<C64> {
    Ok(SpectralNess::new(sys)?.expectation(a))
}

/// `(1/T) \int_0^T omega_t dt` by the trapezoid rule with step `dt`.
pub fn cesaro_quadrature(sys: &FiniteQuantumSystem, big_t: f64, dt: f64) -> ComplexMatrix {
    let steps = (big_t / dt).round().max(1.0) as usize;
    let h = big_t / steps as f64;
    let eig = sys.h_eigen();
    let omega_e = eig.vectors.adjoint().matmul(sys.omega().matrix()).matmul(&eig.vectors);
    let d = sys.dim();
    // (omega_t)_{ab} = e^{-it(E_a - E_b)} omega_{ab} in the energy basis
    let mut acc = ComplexMatrix::zeros(d, d);
    for k in 0..=steps {
        let t = k as f64 * h;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        let step = ComplexMatrix::from_fn(d, d, |a, b| {
            let phase = C64::new(0.0, -t * (eig.values[a] - eig.values[b])).exp();
            omega_e[(a, b)] * phase * (w * h / big_t)
        });
        acc = &acc + &step;
    }
    eig.vectors.matmul(&acc).matmul(&eig.vectors.adjoint())
}
