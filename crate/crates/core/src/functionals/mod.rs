//! Entropic functionals of finite quantum systems: the two-time measurement
//! law and its Laplace transform, the ancilla and phase-space contraction
//! functionals, fluctuation relations and large-deviation tools.

mod ancilla;
mod fluctuation;
mod ldp;
mod measure;

pub use ancilla::{ancilla_simulate, AncillaRun};
pub use fluctuation::{
    es_symmetry_residual, measure_reflection_check, reflection_residual, sandwich_bounds_check,
    SandwichReport,
};
pub use ldp::{
    fluctuation_relation_residual, gartner_ellis, gartner_ellis_log, legendre, GartnerEllis, RateFunction,
    GE_LINEARITY_THRESHOLD,
};
pub use measure::AtomicMeasure;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::modular::pinch;
use crate::numkernel::{trace_product, ComplexMatrix, DensityMatrix, C64};
use crate::qsystem::FiniteQuantumSystem;
use crate::tolerances;

/// Law of `s_f - s_i` for two measurements of `S = -log omega` separated by time `t`,
/// with the system initially in `nu`.
pub fn two_time_measure(
    sys: &FiniteQuantumSystem,
    nu: &DensityMatrix,
    t: f64,
) -> Result<AtomicMeasure> {
    let omega = sys.omega();
    let eig = omega.eigen();
    let groups = eig.groups(tolerances::EIGEN_GROUPING);
    let e = &eig.vectors;
    let d = sys.dim();
    // everything in the eigenbasis of omega
    let u = e.adjoint().matmul(&sys.propagator(t)).matmul(e);
    let nu_is_omega = nu.matrix() == omega.matrix();
    let nu_e = if nu_is_omega {
        ComplexMatrix::diag_real(&eig.values)
    } else {
        e.adjoint().matmul(nu.matrix()).matmul(e)
    };
    let s_of = |mean: f64| -mean.ln();
    let mut raw = Vec::with_capacity(groups.len() * groups.len());
    for (pi, idx_i) in &groups {
        // rows of U P_i nu P_i U^* restricted to the diagonal
        let mut diag = vec![0.0f64; d];
        for (a, da) in diag.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &b in idx_i {
                if nu_is_omega {
                    acc += u[(a, b)].norm_sqr() * nu_e[(b, b)];
                    continue;
                }
                for &c in idx_i {
                    acc += u[(a, b)] * nu_e[(b, c)] * u[(a, c)].conj();
                }
            }
            *da = acc.re;
        }
        for (pf, idx_f) in &groups {
            let p: f64 = idx_f.iter().map(|&a| diag[a]).sum();
            raw.push((s_of(*pf) - s_of(*pi), p));
        }
    }
    AtomicMeasure::from_atoms(raw)
}

/// `omega_{-t}^alpha = e^{itH} omega^alpha e^{-itH}`.
fn omega_minus_t_power(sys: &FiniteQuantumSystem, t: f64, alpha: C64) -> ComplexMatrix {
    sys.heisenberg_matrix(&sys.omega().power(alpha), t)
}

/// `omega^{-alpha/2} omega_{-t}^alpha omega^{-alpha/2}`.
fn sandwich_operator(sys: &FiniteQuantumSystem, t: f64, alpha: C64) -> ComplexMatrix {
    let half = sys.omega().power(-alpha * 0.5);
    half.matmul(&omega_minus_t_power(sys, t, alpha)).matmul(&half)
}

/// `F^2tm_{nu,t}(alpha) = tr(pinch(nu) omega^{-alpha/2} omega_{-t}^alpha omega^{-alpha/2})`.
pub fn f2tm(sys: &FiniteQuantumSystem, nu: &DensityMatrix, t: f64, alpha: C64) -> C64 {
    let pinched = pinch(nu.matrix(), sys.omega());
    trace_product(&pinched, &sandwich_operator(sys, t, alpha))
}

/// `F^ancilla_{nu,t}(alpha) = tr(nu omega^{-alpha/2} omega_{-t}^alpha omega^{-alpha/2})`.
pub fn f_ancilla(sys: &FiniteQuantumSystem, nu: &DensityMatrix, t: f64, alpha: C64) -> C64 {
    trace_product(nu.matrix(), &sandwich_operator(sys, t, alpha))
}

/// `F^qpsc_{nu,t}(alpha) = tr(nu omega_{-t}^alpha omega^{-alpha})`.
pub fn f_qpsc(sys: &FiniteQuantumSystem, nu: &DensityMatrix, t: f64, alpha: C64) -> C64 {
    let m = omega_minus_t_power(sys, t, alpha).matmul(&sys.omega().power(-alpha));
    trace_product(nu.matrix(), &m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalKind {
    #[serde(rename = "2tm")]
    TwoTime,
    Ancilla,
    Qpsc,
}

impl FunctionalKind {
    pub fn evaluate(
        self,
        sys: &FiniteQuantumSystem,
        nu: &DensityMatrix,
        t: f64,
        alpha: C64,
    ) -> C64 {
        match self {
            FunctionalKind::TwoTime => f2tm(sys, nu, t, alpha),
            FunctionalKind::Ancilla => f_ancilla(sys, nu, t, alpha),
            FunctionalKind::Qpsc => f_qpsc(sys, nu, t, alpha),
        }
    }
}

/// Values of one functional along an alpha grid at fixed `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalGrid {
    pub kind: FunctionalKind,
    pub t: f64,
    pub state: String,
    pub alphas: Vec<C64>,
    pub values: Vec<C64>,
}

impl FunctionalGrid {
    /// Evaluates the grid as a parallel map; output order follows `alphas`.
    pub fn evaluate(
        kind: FunctionalKind,
        sys: &FiniteQuantumSystem,
        nu: &DensityMatrix,
        state: &str,
        t: f64,
        alphas: &[C64],
    ) -> Self {
        let values = alphas
            .par_iter()
            .map(|&a| kind.evaluate(sys, nu, t, a))
            .collect();
        FunctionalGrid {
            kind,
            t,
            state: state.to_string(),
            alphas: alphas.to_vec(),
            values,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha_re,alpha_im,F_re,F_im\n");
        for (a, v) in self.alphas.iter().zip(&self.values) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", a.re, a.im, v.re, v.im);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::relative_entropy;
    use crate::numkernel::random::{random_density, seeded};
    use crate::qsystem::{demo_system, random_finite_system};

    fn alpha_grid() -> Vec<C64> {
        let mut a: Vec<C64> = (0..11).map(|k| C64::new(0.0, -2.0 + 0.4 * k as f64)).collect();
        a.extend((1..=10).map(|k| C64::new(k as f64 / 11.0, 0.0)));
        a
    }

    #[test]
    fn measure_at_time_zero_is_point_mass() {
        let sys = random_finite_system(4, 6, false).unwrap();
        let q = two_time_measure(&sys, sys.omega(), 0.0).unwrap();
        assert!(q.weight_near(0.0, 1e-12).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn laplace_of_measure_is_f2tm() {
        let sys = random_finite_system(9, 7, false).unwrap();
        let nu = random_density(&mut seeded(10), 7, 0.1, false);
        for &t in &[0.3, 1.7] {
            let q = two_time_measure(&sys, &nu, t).unwrap();
            assert!((q.total_mass() - 1.0).abs() < 1e-12);
            for a in alpha_grid() {
                assert!((q.laplace(a) - f2tm(&sys, &nu, t, a)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn mean_is_entropy_production() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        let t = 1.1;
        let q = two_time_measure(sys, sys.omega(), t).unwrap();
        let ent = relative_entropy(&sys.evolve_state(sys.omega(), t).unwrap(), sys.omega()).unwrap();
        assert!((q.mean() + ent).abs() < 1e-10);
        assert!(q.mean() > 0.0);
    }

    #[test]
    fn functionals_coincide_at_omega() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        let w = sys.omega();
        for a in alpha_grid() {
            let f = f2tm(sys, w, 0.8, a);
            assert!((f - f_ancilla(sys, w, 0.8, a)).norm() < 1e-10);
            assert!((f - f_qpsc(sys, w, 0.8, a)).norm() < 1e-10);
        }
        // omega([D omega_{-t} : D omega]^*_{conj(alpha)/2} [D omega_{-t} : D omega]_{alpha/2})
        let back = sys.evolve_state(w, -0.8).unwrap();
        for a in alpha_grid() {
            let left = crate::modular::connes_cocycle(&back, w, a.conj() * 0.5).adjoint();
            let right = crate::modular::connes_cocycle(&back, w, a * 0.5);
            let via = trace_product(w.matrix(), &left.matmul(&right));
            assert!((via - f2tm(sys, w, 0.8, a)).norm() < 1e-10);
        }
        assert!((f2tm(sys, w, 0.8, C64::new(0.0, 0.0)) - 1.0).norm() < 1e-12);
        assert!((f2tm(sys, w, 0.8, C64::new(1.0, 0.0)) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn qpsc_against_dense_exponential() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        let ness = sys.ness_cesaro();
        let (t, a) = (0.5, 0.25);
        let direct = f_qpsc(sys, &ness, t, C64::new(a, 0.0));
        let quarter = sys.omega().power_real(a);
        let u = crate::numkernel::expm_general(
            &sys.hamiltonian().matrix().scale(C64::new(0.0, -t)),
        )
        .unwrap();
        let evolved = u.adjoint().matmul(&quarter).matmul(&u);
        let other = trace_product(ness.matrix(), &evolved.matmul(&quarter.inverse().unwrap()));
        assert!((direct - other).norm() < 1e-10);
    }

    #[test]
    fn commuting_case_reduces_to_classical() {
        let h = crate::numkernel::HermitianOperator::diag(&[0.0, 1.0, 2.5]);
        let omega = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let sys = FiniteQuantumSystem::new(h, omega).unwrap();
        let nu = DensityMatrix::from_diagonal(&[0.2, 0.2, 0.6]).unwrap();
        for a in alpha_grid() {
            let f = f2tm(&sys, &nu, 1.3, a);
            assert!((f - 1.0).norm() < 1e-12);
            assert!((f_ancilla(&sys, &nu, 1.3, a) - f).norm() < 1e-12);
            assert!((f_qpsc(&sys, &nu, 1.3, a) - f).norm() < 1e-12);
        }
    }
}
