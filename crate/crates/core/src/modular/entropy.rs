use crate::error::{Error, Result};
use crate::modular::{cone_vector, inner};
use crate::numkernel::quad::gauss_legendre;
use crate::numkernel::{trace_product, ComplexMatrix, DensityMatrix, HermitianOperator, I};
use crate::qsystem::FiniteQuantumSystem;

const QUAD_NODES: usize = 64;

fn check_pair(nu: &DensityMatrix, mu: &DensityMatrix) -> Result<()> {
    if nu.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy",
            expected: nu.dim(),
            actual: mu.dim(),
        });
    }
    Ok(())
}

/// `Ent(nu|mu) = tr(nu (log mu - log nu))`, nonpositive.
pub fn relative_entropy(nu: &DensityMatrix, mu: &DensityMatrix) -> Result<f64> {
    check_pair(nu, mu)?;
    let diff = &mu.log() - &nu.log();
    Ok(trace_product(nu.matrix(), &diff).re)
}

/// `<Omega_nu, log Delta_{mu|nu} Omega_nu>` with `log Delta_{mu|nu} X = log(mu) X - X log(nu)`.
pub fn relative_entropy_superop(nu: &DensityMatrix, mu: &DensityMatrix) -> Result<f64> {
    check_pair(nu, mu)?;
    let d = nu.dim();
    let id = ComplexMatrix::identity(d);
    let log_delta = crate::modular::SuperOperator::Factored(vec![
        (mu.log(), id.clone()),
        (id, nu.log().scale_real(-1.0)),
    ]);
    let v = cone_vector(nu);
    Ok(inner(&v, &log_delta.apply(&v)).re)
}

/// `l_{omega_t|omega} = log omega_t - log omega`.
pub fn ell(sys: &FiniteQuantumSystem, t: f64) -> Result<HermitianOperator> {
    let log_w = sys.omega().log();
    HermitianOperator::new(&sys.evolve_matrix(&log_w, t) - &log_w)
}

/// `c^t = tau^t(l_{omega_t|omega}) = log omega - log omega_{-t}`.
pub fn cocycle_ct(sys: &FiniteQuantumSystem, t: f64) -> Result<HermitianOperator> {
    let log_w = sys.omega().log();
    HermitianOperator::new(&log_w - &sys.heisenberg_matrix(&log_w, t))
}

/// Entropy production observable `sigma = i[log omega, V]`; zero for decoupled systems.
pub fn entropy_production_sigma(sys: &FiniteQuantumSystem) -> Result<HermitianOperator> {
    let pert = sys.require_perturbation()?;
    let c = sys.omega().log().commutator(pert.v.matrix());
    HermitianOperator::new(c.scale(I))
}

fn gl(t: f64) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(QUAD_NODES, 0.0, t)
}

/// `|c^t - \int_0^t tau^s(sigma) ds|` by Gauss-Legendre quadrature.
pub fn ct_quadrature_residual(sys: &FiniteQuantumSystem, t: f64) -> Result<f64> {
    let sigma = entropy_production_sigma(sys)?;
    let (x, w) = gl(t);
    let mut acc = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for (s, ws) in x.iter().zip(&w) {
        acc = &acc + &sys.heisenberg_matrix(sigma.matrix(), *s).scale_real(*ws);
    }
    Ok(acc.max_abs_diff(cocycle_ct(sys, t)?.matrix()))
}

/// `|c^{t+s} - c^t - tau^t(c^s)|`.
pub fn additive_cocycle_residual(sys: &FiniteQuantumSystem, t: f64, s: f64) -> Result<f64> {
    let lhs = cocycle_ct(sys, t + s)?;
    let rhs = cocycle_ct(sys, t)?
        .matrix()
        .clone();
    let rhs = &rhs + &sys.heisenberg_matrix(cocycle_ct(sys, s)?.matrix(), t);
    Ok(lhs.matrix().max_abs_diff(&rhs))
}

/// Maximum of `|Ent(omega_t|omega) + tr(omega c^t)|` and
/// `|Ent(omega_t|omega) + \int_0^t tr(omega_s sigma) ds|`.
pub fn entropy_balance_residual(sys: &FiniteQuantumSystem, t: f64) -> Result<f64> {
    let omega = sys.omega();
    let ent = relative_entropy(&sys.evolve_state(omega, t)?, omega)?;
    let via_ct = -trace_product(omega.matrix(), cocycle_ct(sys, t)?.matrix()).re;
    let sigma = entropy_production_sigma(sys)?;
    let (x, w) = gl(t);
    let integral: f64 = x
        .iter()
        .zip(&w)
        .map(|(s, ws)| ws * trace_product(&sys.evolve_matrix(omega.matrix(), *s), sigma.matrix()).re)
        .sum();
    Ok((ent - via_ct).abs().max((ent + integral).abs()))
}

/// `|tr(omega sigma)|`.
pub fn omega_sigma_residual(sys: &FiniteQuantumSystem) -> Result<f64> {
    Ok(trace_product(sys.omega().matrix(), entropy_production_sigma(sys)?.matrix()).norm())
}

/// `|log omega_t - log omega - \int_0^t tau^{-s}(sigma) ds|` together with the
/// operator form `log Delta_{omega_t|omega} = log Delta_omega + l` checked on a probe vector.
pub fn log_delta_residual(sys: &FiniteQuantumSystem, t: f64) -> Result<f64> {
    let sigma = entropy_production_sigma(sys)?;
    let (x, w) = gl(t);
    let mut acc = ComplexMatrix::zeros(sys.dim(), sys.dim());
    for (s, ws) in x.iter().zip(&w) {
        acc = &acc + &sys.evolve_matrix(sigma.matrix(), *s).scale_real(*ws);
    }
    let l = ell(sys, t)?;
    let quad = acc.max_abs_diff(l.matrix());
    // log Delta_{omega_t|omega} X = log(omega_t) X - X log(omega)
    let omega = sys.omega();
    let w_t = sys.evolve_state(omega, t)?;
    let probe = omega.sqrt();
    let lhs = &w_t.log().matmul(&probe) - &probe.matmul(&omega.log());
    let log_delta = &omega.log().matmul(&probe) - &probe.matmul(&omega.log());
    let rhs = &log_delta + &l.matrix().matmul(&probe);
    Ok(quad.max(lhs.max_abs_diff(&rhs)))
}

/// For time-reversal invariant systems: `max(|Theta(c^t) - c^{-t}|, |Theta(sigma) + sigma|)`.
pub fn tri_cocycle_residual(sys: &FiniteQuantumSystem, t: f64) -> Result<f64> {
    let c = sys.time_reversal(cocycle_ct(sys, t)?.matrix())?;
    let r1 = c.max_abs_diff(cocycle_ct(sys, -t)?.matrix());
    let sigma = entropy_production_sigma(sys)?;
    let r2 = (&sys.time_reversal(sigma.matrix())? + sigma.matrix()).norm_max();
    Ok(r1.max(r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random::{random_density, seeded};
    use crate::qsystem::demo_system;

    #[test]
    fn relative_entropy_values() {
        let nu = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let mu = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let e = relative_entropy(&nu, &mu).unwrap();
        assert!((e - 0.5 * 0.75f64.ln()).abs() < 1e-14);
        assert!(relative_entropy(&nu, &nu).unwrap().abs() < 1e-15);
        let mut rng = seeded(5);
        let a = random_density(&mut rng, 4, 0.1, false);
        let b = random_density(&mut rng, 4, 0.1, false);
        let e = relative_entropy(&a, &b).unwrap();
        assert!(e < 0.0);
        assert!((e - relative_entropy_superop(&a, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn entropy_production_identities_on_demo() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        assert!(ell(sys, 0.0).unwrap().matrix().norm_max() < 1e-13);
        assert!(ct_quadrature_residual(sys, 1.0).unwrap() < 1e-8);
        assert!(additive_cocycle_residual(sys, 0.6, 1.1).unwrap() < 1e-10);
        assert!(entropy_balance_residual(sys, 1.3).unwrap() < 1e-8);
        assert!(omega_sigma_residual(sys).unwrap() < 1e-11);
        assert!(log_delta_residual(sys, 0.9).unwrap() < 1e-8);
        assert!(tri_cocycle_residual(sys, 0.8).unwrap() < 1e-10);
    }
}
