use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::C64;
use crate::qsystem::FiniteQuantumSystem;

use super::{f2tm, f_ancilla, two_time_measure, AtomicMeasure};

/// Pairing tolerance between the atoms at `s` and `-s`.
const REFLECTION_PAIRING: f64 = 1e-9;
/// Atoms lighter than this are excluded from the reflection residual.
const REFLECTION_FLOOR: f64 = 1e-12;

/// `max |F(alpha) - conj F(1 - conj alpha)|` for `F = F^2tm_{omega,t}` over the grid.
///
/// Vanishes for time-reversal invariant systems; evaluated without assertion otherwise.
pub fn es_symmetry_residual(sys: &FiniteQuantumSystem, t: f64, alphas: &[C64]) -> f64 {
    let omega = sys.omega();
    alphas
        .iter()
        .map(|&a| {
            let mirror = C64::new(1.0, 0.0) - a.conj();
            (f2tm(sys, omega, t, a) - f2tm(sys, omega, t, mirror).conj()).norm()
        })
        .fold(0.0, f64::max)
}

/// `max |log(p(-s) / p(s)) + s|` over the atoms of a measure. An atom with no
/// mirror partner yields `+inf`.
pub fn reflection_residual(measure: &AtomicMeasure) -> f64 {
    let atoms = measure.atoms();
    let mut worst = 0.0f64;
    for &(s, p) in atoms {
        if p <= REFLECTION_FLOOR {
            continue;
        }
        let tol = REFLECTION_PAIRING * (1.0 + s.abs());
        match measure.weight_near(-s, tol) {
            Some(q) if q > 0.0 => worst = worst.max(((q / p).ln() + s).abs()),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Reflection residual of the two-time measurement law of `omega` at time `t`.
pub fn measure_reflection_check(sys: &FiniteQuantumSystem, t: f64) -> Result<f64> {
    Ok(reflection_residual(&two_time_measure(sys, sys.omega(), t)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub big_t: f64,
    pub t: f64,
    pub alpha: f64,
    pub c_t: f64,
    pub d_t: f64,
    pub f2tm_omega: f64,
    pub ancilla_omega_t: f64,
    pub f2tm_omega_t: f64,
    /// Slacks of the four inequalities, lower and upper for each chain.
    pub slacks: [f64; 4],
    pub holds: bool,
}

impl SandwichReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn real_positive(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-10 * (1.0 + z.re.abs()) || !(z.re > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{what} = {z} is not real positive for real alpha"
        )));
    }
    Ok(z.re)
}

/// Checks `D_T F^2tm_{omega,t} <= F^ancilla_{omega_T,t} <= C_T F^2tm_{omega,t}` and the
/// same chain for `F^2tm_{omega_T,t}`, with `omega_T` the state evolved to time `T`.
pub fn sandwich_bounds_check(
    sys: &FiniteQuantumSystem,
    big_t: f64,
    t: f64,
    alpha: f64,
    slack_tol: f64,
) -> Result<SandwichReport> {
    let v = sys.require_perturbation()?.v.matrix();
    let omega = sys.omega();
    let fwd = omega.power_real(0.5).matmul(v).matmul(&omega.power_real(-0.5));
    let bwd = omega.power_real(-0.5).matmul(v).matmul(&omega.power_real(0.5));
    let v_norm = v.op_norm()?;
    let c_t = (2.0 * big_t.abs() * (fwd.op_norm()? + v_norm)).exp();
    let d_t = (-2.0 * big_t.abs() * (bwd.op_norm()? + v_norm)).exp();

    let a = C64::new(alpha, 0.0);
    let omega_t = sys.evolve_state(omega, big_t)?;
    let base = real_positive(f2tm(sys, omega, t, a), "F2tm(omega)")?;
    let anc = real_positive(f_ancilla(sys, &omega_t, t, a), "Fancilla(omega_T)")?;
    let two = real_positive(f2tm(sys, &omega_t, t, a), "F2tm(omega_T)")?;
    let slacks = [
        anc - d_t * base,
        c_t * base - anc,
        two - d_t * base,
        c_t * base - two,
    ];
    // slack relative to the scale of the compared quantities
    let scale = 1.0 + c_t * base;
    let holds = slacks.iter().all(|&s| s >= -slack_tol * scale);
    Ok(SandwichReport {
        big_t,
        t,
        alpha,
        c_t,
        d_t,
        f2tm_omega: base,
        ancilla_omega_t: anc,
        f2tm_omega_t: two,
        slacks,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsystem::demo_system;

    fn strip() -> Vec<C64> {
        let mut out = Vec::new();
        for re in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for im in [-1.5, -0.5, 0.0, 0.7, 2.0] {
                out.push(C64::new(re, im));
            }
        }
        out
    }

    #[test]
    fn tri_demo_satisfies_es_symmetry() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        assert!(es_symmetry_residual(sys, 1.0, &strip()) < 1e-9);
        assert!(f2tm(sys, sys.omega(), 1.0, C64::new(0.5, 0.0)).im.abs() < 1e-12);
        for t in [0.5, 1.0, 2.0] {
            assert!(measure_reflection_check(sys, t).unwrap() < 1e-8);
        }
        assert_eq!(measure_reflection_check(sys, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn complex_control_breaks_symmetry() {
        let demo = demo_system(2024, false).unwrap();
        let sys = demo.system();
        assert!(es_symmetry_residual(sys, 1.0, &strip()) > 1e-4);
    }

    #[test]
    fn sandwich_bounds_demo() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        let r = sandwich_bounds_check(sys, 2.0, 1.0, 0.3, 1e-10).unwrap();
        assert!(r.holds, "{r:?}");
        let r0 = sandwich_bounds_check(sys, 0.0, 1.0, 0.3, 1e-10).unwrap();
        assert_eq!((r0.c_t, r0.d_t), (1.0, 1.0));
        assert!(r0.slacks.iter().all(|s| s.abs() < 1e-10));
    }
}
