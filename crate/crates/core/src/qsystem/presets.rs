use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::random::{random_density, random_hermitian, random_probabilities, seeded};
use crate::numkernel::{DensityMatrix, HermitianOperator};
use crate::qsystem::schema::derive_seed;
use crate::qsystem::{build_open_system, FiniteQuantumSystem, OpenQuantumSystem, Reservoir};

/// Names accepted by [`preset`].
pub const PRESETS: &[&str] = &["demo32", "demo32-complex", "pauli-z", "random-real-seeded"];

/// The default demonstration system: a qubit with `H_S = sigma_z / 2`,
/// `omega_S = I / 2`, two four-level reservoirs at `beta = 1, 2`, seeded random
/// couplings and `lambda = 0.5` (composite dimension 32). With `real = false`
/// the couplings carry imaginary parts and time-reversal invariance is lost.
pub fn demo_system(seed: u64, real: bool) -> Result<OpenQuantumSystem> {
    let h_small = HermitianOperator::diag(&[0.5, -0.5]);
    let omega_small = DensityMatrix::maximally_mixed(2);
    let mut reservoirs = Vec::new();
    let mut couplings = Vec::new();
    for (j, beta) in [1.0, 2.0].into_iter().enumerate() {
        let mut rng = seeded(derive_seed(seed, 1 + j as u64));
        reservoirs.push(Reservoir::new(random_hermitian(&mut rng, 4, true).scale(2.0), beta)?);
        let mut rng = seeded(derive_seed(seed, 101 + j as u64));
        couplings.push(random_hermitian(&mut rng, 8, real));
    }
    build_open_system(h_small, omega_small, reservoirs, couplings, 0.5)
}

/// Random open system with a small system of dimension `small_dim` and one
/// reservoir per entry of `reservoir_dims`. Inverse temperatures lie in [0.5, 2].
pub fn random_open_system(
    seed: u64,
    small_dim: usize,
    reservoir_dims: &[usize],
    lambda: f64,
    real: bool,
) -> Result<OpenQuantumSystem> {
    let mut rng = seeded(seed);
    let h_small = random_hermitian(&mut rng, small_dim, real);
    let p = random_probabilities(&mut rng, small_dim, 0.5);
    let eig = h_small.eig()?;
    let omega_small = DensityMatrix::new(eig.rebuild(&p))?;
    let mut reservoirs = Vec::new();
    let mut couplings = Vec::new();
    for &dr in reservoir_dims {
        let beta = 0.5 + 1.5 * rng.random::<f64>();
        reservoirs.push(Reservoir::new(random_hermitian(&mut rng, dr, real).scale(1.5), beta)?);
        couplings.push(random_hermitian(&mut rng, small_dim * dr, real));
    }
    build_open_system(h_small, omega_small, reservoirs, couplings, lambda)
}

/// Random Hamiltonian and random faithful state without an open-system structure.
pub fn random_finite_system(seed: u64, d: usize, real: bool) -> Result<FiniteQuantumSystem> {
    let mut rng = seeded(seed);
    let h = random_hermitian(&mut rng, d, real).scale(2.0);
    let omega = random_density(&mut rng, d, 0.2, real);
    FiniteQuantumSystem::new(h, omega)
}

pub fn preset(name: &str, seed: u64) -> Result<OpenQuantumSystem> {
    match name {
        "demo32" => demo_system(seed, true),
        "demo32-complex" => demo_system(seed, false),
        "pauli-z" => {
            let mut rng = seeded(derive_seed(seed, 7));
            build_open_system(
                HermitianOperator::diag(&[0.5, -0.5]),
                DensityMatrix::maximally_mixed(2),
                vec![Reservoir::new(HermitianOperator::diag(&[0.0, 1.0]), 1.0)?],
                vec![random_hermitian(&mut rng, 4, true)],
                0.5,
            )
        }
        "random-real-seeded" => random_open_system(seed, 2, &[2, 2], 0.5, true),
        other => Err(Error::InvalidArgument(format!(
            "unknown preset `{other}` (known: {})",
            PRESETS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_is_32_dimensional_and_tri() {
        let demo = demo_system(2024, true).unwrap();
        let sys = demo.system();
        assert_eq!(sys.dim(), 32);
        assert!(sys.is_tri());
        let p = sys.perturbation().unwrap();
        assert!(sys.omega().matrix().commutator(p.h_free.matrix()).norm_max() < 1e-12);
        assert!(!demo_system(2024, false).unwrap().system().is_tri());
    }

    #[test]
    fn thermal_entropy_observable_matches_log() {
        let demo = demo_system(5, true).unwrap();
        let s = demo.system().entropy_observable();
        let thermal = demo.entropy_observable_thermal().unwrap();
        let diff = &s - &thermal;
        // equal up to an additive constant
        let c = diff[(0, 0)];
        let n = diff.nrows();
        let id = crate::numkernel::ComplexMatrix::identity(n).scale(c);
        assert!(diff.max_abs_diff(&id) < 1e-10);
    }
}
