use crate::error::{Error, Result};
use crate::modular::connes_cocycle;
use crate::numkernel::{expm_general, kron, partial_trace_first, ComplexMatrix, DensityMatrix, C64};
use crate::qsystem::FiniteQuantumSystem;

use super::f_ancilla;

/// Outcome of the ancilla protocol: final ancilla state, the tomographic
/// estimate and the consistency residuals measured along the way.
#[derive(Clone, Debug)]
pub struct AncillaRun {
    pub rho_t: ComplexMatrix,
    pub f_estimate: C64,
    /// `|f_estimate - f_ancilla|`.
    pub estimate_residual: f64,
    /// Largest change of a diagonal entry of the ancilla state.
    pub diagonal_residual: f64,
    /// `|H_+ - (H + W_alpha)|`, only for open systems.
    pub decomposition_residual: Option<f64>,
    /// `|e^{-itH_+} - e^{-itH} [D omega_{-t} : D omega]_{alpha/2}|`.
    pub cocycle_residual: Option<f64>,
}

/// Couples the system to a qubit through `H_alpha = e^{(alpha/2) log omega (x) sigma_z}
/// (H (x) 1) e^{-(alpha/2) log omega (x) sigma_z}`, evolves `nu (x) rho` and reads
/// `F^ancilla` off the coherence of the reduced ancilla state.
/// Ancilla basis: index 0 is `+`.
pub fn ancilla_simulate(
    sys: &FiniteQuantumSystem,
    nu: &DensityMatrix,
    rho: &DensityMatrix,
    alpha: C64,
    t: f64,
) -> Result<AncillaRun> {
    if alpha.re != 0.0 || !alpha.im.is_finite() {
        return Err(Error::AlphaNotImaginary(alpha));
    }
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "ancilla state",
            expected: 2,
            actual: rho.dim(),
        });
    }
    if nu.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "ancilla_simulate state",
            expected: sys.dim(),
            actual: nu.dim(),
        });
    }
    let coherence = rho.matrix()[(0, 1)];
    if coherence.norm() == 0.0 {
        return Err(Error::NoTomographicSignal);
    }
    let d = sys.dim();
    let omega = sys.omega();
    let h = sys.hamiltonian().matrix();
    let up = omega.power(alpha * 0.5);
    let down = omega.power(-alpha * 0.5);
    let h_plus = up.matmul(h).matmul(&down);
    let h_minus = down.matmul(h).matmul(&up);

    let p_plus = ComplexMatrix::diag_real(&[1.0, 0.0]);
    let p_minus = ComplexMatrix::diag_real(&[0.0, 1.0]);
    let h_hat = &kron(&h_plus, &p_plus) + &kron(&h_minus, &p_minus);
    let u_hat = expm_general(&h_hat.scale(C64::new(0.0, -t)))?;
    let initial = kron(nu.matrix(), rho.matrix());
    let evolved = u_hat.matmul(&initial).matmul(&u_hat.adjoint());
    let rho_t = partial_trace_first(&evolved, d, 2)?;

    let f_estimate = rho_t[(0, 1)] / coherence;
    let estimate_residual = (f_estimate - f_ancilla(sys, nu, t, alpha)).norm();
    let diagonal_residual = (0..2)
        .map(|k| (rho_t[(k, k)] - rho.matrix()[(k, k)]).norm())
        .fold(0.0, f64::max);

    let (decomposition_residual, cocycle_residual) = match sys.perturbation() {
        Some(split) => {
            let v = split.v.matrix();
            let w = &up.matmul(v).matmul(&down) - v;
            let dec = h_plus.max_abs_diff(&(h + &w));
            let lhs = expm_general(&h_plus.scale(C64::new(0.0, -t)))?;
            let omega_back = sys.evolve_state(omega, -t)?;
            let rhs = sys
                .propagator(t)
                .matmul(&connes_cocycle(&omega_back, omega, alpha * 0.5));
            (Some(dec), Some(lhs.max_abs_diff(&rhs)))
        }
        None => (None, None),
    };

    Ok(AncillaRun {
        rho_t,
        f_estimate,
        estimate_residual,
        diagonal_residual,
        decomposition_residual,
        cocycle_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random::{random_density, seeded};
    use crate::qsystem::demo_system;

    fn ancilla_state() -> DensityMatrix {
        DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![C64::new(0.6, 0.0), C64::new(0.3, 0.1)],
                vec![C64::new(0.3, -0.1), C64::new(0.4, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn demo_estimate_matches_trace_formula() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        let run = ancilla_simulate(sys, sys.omega(), &ancilla_state(), C64::new(0.0, 0.7), 1.2).unwrap();
        assert!(run.estimate_residual < 1e-9, "{}", run.estimate_residual);
        assert!(run.diagonal_residual < 1e-10);
        assert!(run.decomposition_residual.unwrap() < 1e-10);
        assert!(run.cocycle_residual.unwrap() < 1e-9);
    }

    #[test]
    fn trivial_cases() {
        let demo = demo_system(7, false).unwrap();
        let sys = demo.system();
        let nu = random_density(&mut seeded(3), sys.dim(), 0.2, false);
        let rho = ancilla_state();
        let run = ancilla_simulate(sys, &nu, &rho, C64::new(0.0, 0.4), 0.0).unwrap();
        assert!(run.rho_t.max_abs_diff(rho.matrix()) < 1e-12);
        assert!((run.f_estimate - 1.0).norm() < 1e-12);
        let run = ancilla_simulate(sys, &nu, &rho, C64::new(0.0, 0.0), 2.0).unwrap();
        assert!((run.f_estimate - 1.0).norm() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let demo = demo_system(7, true).unwrap();
        let sys = demo.system();
        let diag = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!(matches!(
            ancilla_simulate(sys, sys.omega(), &diag, C64::new(0.0, 0.3), 1.0),
            Err(Error::NoTomographicSignal)
        ));
        assert!(matches!(
            ancilla_simulate(sys, sys.omega(), &ancilla_state(), C64::new(0.3, 0.0), 1.0),
            Err(Error::AlphaNotImaginary(_))
        ));
    }
}
