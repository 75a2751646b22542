//! Finite quantum dynamical systems and open systems built from a small
//! system coupled to finite reservoirs.
//!
//! Conventions: `tau^t(A) = e^{itH} A e^{-itH}` and the Schrödinger picture
//! state is `omega_t = e^{-itH} omega e^{itH}`, so that
//! `tr(omega_t A) = tr(omega tau^t(A))`.

mod presets;
mod schema;

pub use presets::{demo_system, random_finite_system, random_open_system, preset, PRESETS};
pub use schema::{OperatorSpec, ReservoirSpec, SmallSpec, StateSpec, SystemSpec};

use crate::error::{Error, Result};
use crate::numkernel::{
    embed, kron, ComplexMatrix, DensityMatrix, HermEig, HermitianOperator, C64, I,
};
use crate::tolerances;

/// Splitting `H = H_fr + V` of an open system's Hamiltonian.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub h_free: HermitianOperator,
    pub v: HermitianOperator,
}

/// Hamiltonian, reference state and the time-reversal flag.
#[derive(Clone, Debug)]
pub struct FiniteQuantumSystem {
    h: HermitianOperator,
    h_eig: HermEig,
    omega: DensityMatrix,
    tri: bool,
    split: Option<Perturbation>,
}

fn is_real(m: &ComplexMatrix) -> bool {
    m.max_imag() <= 1e-12
}

impl FiniteQuantumSystem {
    /// The TRI flag is set when both `H` and `omega` are real in the construction basis.
    pub fn new(h: HermitianOperator, omega: DensityMatrix) -> Result<Self> {
        if h.dim() != omega.dim() {
            return Err(Error::DimensionMismatch {
                context: "Hamiltonian vs reference state",
                expected: h.dim(),
                actual: omega.dim(),
            });
        }
        let tri = is_real(h.matrix()) && is_real(omega.matrix());
        let h_eig = h.eig()?;
        Ok(FiniteQuantumSystem {
            h,
            h_eig,
            omega,
            tri,
            split: None,
        })
    }

    /// Overrides the TRI flag downward; a flag of `true` is only accepted for real data.
    pub fn with_tri(mut self, tri: bool) -> Result<Self> {
        if tri && !(is_real(self.h.matrix()) && is_real(self.omega.matrix())) {
            return Err(Error::InvalidArgument(
                "tri_flag requires real H and omega".into(),
            ));
        }
        self.tri = tri;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn h_eigen(&self) -> &HermEig {
        &self.h_eig
    }

    pub fn omega(&self) -> &DensityMatrix {
        &self.omega
    }

    pub fn tri_flag(&self) -> bool {
        self.tri
    }

    /// `(H_fr, V)` when the system was built as an open system.
    pub fn perturbation(&self) -> Option<&Perturbation> {
        self.split.as_ref()
    }

    pub fn require_perturbation(&self) -> Result<&Perturbation> {
        self.split.as_ref().ok_or_else(|| {
            Error::InvalidArgument("operation needs an open system with H = H_fr + V".into())
        })
    }

    /// `e^{-itH}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.h_eig.apply(|e| (-I * (t * e)).exp())
    }

    /// Entropy observable `S = -log omega`.
    pub fn entropy_observable(&self) -> ComplexMatrix {
        self.omega.log().scale_real(-1.0)
    }

    fn check_dim(&self, n: usize, context: &'static str) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                actual: n,
            });
        }
        Ok(())
    }

    /// `nu_t = e^{-itH} nu e^{itH}`.
    pub fn evolve_state(&self, nu: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.check_dim(nu.dim(), "evolve_state")?;
        let u = self.propagator(t);
        DensityMatrix::new(u.matmul(nu.matrix()).matmul(&u.adjoint()))
    }

    /// `e^{-itH} X e^{itH}` for an arbitrary matrix.
    pub fn evolve_matrix(&self, x: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let u = self.propagator(t);
        u.matmul(x).matmul(&u.adjoint())
    }

    /// `tau^t(A) = e^{itH} A e^{-itH}`.
    pub fn heisenberg(&self, a: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
        self.check_dim(a.dim(), "heisenberg")?;
        HermitianOperator::new(self.heisenberg_matrix(a.matrix(), t))
    }

    pub fn heisenberg_matrix(&self, a: &ComplexMatrix, t: f64) -> ComplexMatrix {
        self.evolve_matrix(a, -t)
    }

    /// Block pinching of `omega` onto the spectral projections of `H`, the
    /// infinite-time Cesàro average of `omega_t`.
    pub fn ness_cesaro(&self) -> DensityMatrix {
        let fragile = self
            .h_eig
            .fragile_gaps(tolerances::EIGEN_GROUPING, tolerances::NEAR_DEGENERATE);
        if !fragile.is_empty() {
            log::warn!(
                "ness_cesaro: {} pairs of energies closer than {:e}; block pinching is sensitive to the grouping tolerance",
                fragile.len(),
                tolerances::NEAR_DEGENERATE
            );
        }
        let pinched = pinch_with(&self.h_eig, self.omega.matrix(), tolerances::EIGEN_GROUPING);
        DensityMatrix::new(pinched).expect("pinching preserves faithful states")
    }

    /// Quadruples of energies `(a, b, c, d)` with distinct gaps `E_a - E_b` and `E_c - E_d`
    /// that coincide within `tol`. Reported only as a diagnostic: the Cesàro
    /// average of the state is exact regardless.
    pub fn bohr_gap_coincidences(&self, tol: f64) -> Vec<(f64, f64)> {
        let levels: Vec<f64> = self
            .h_eig
            .groups(tolerances::EIGEN_GROUPING)
            .into_iter()
            .map(|(e, _)| e)
            .collect();
        let mut gaps: Vec<f64> = Vec::new();
        for (i, a) in levels.iter().enumerate() {
            for b in &levels[i + 1..] {
                gaps.push(b - a);
            }
        }
        gaps.sort_by(f64::total_cmp);
        gaps.windows(2)
            .filter(|w| w[1] - w[0] < tol)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    pub fn is_tri(&self) -> bool {
        self.tri
    }

    /// Time reversal: entrywise conjugation in the construction basis.
    pub fn time_reversal(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.tri {
            return Err(Error::NotTimeReversalInvariant);
        }
        Ok(a.conj())
    }
}

/// `sum_k P_k x P_k` over the grouped spectral projections in `eig`.
pub fn pinch_with(eig: &HermEig, x: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let u = &eig.vectors;
    // in the eigenbasis the pinching keeps the diagonal blocks
    let xe = u.adjoint().matmul(x).matmul(u);
    let n = eig.values.len();
    let mut block = vec![0usize; n];
    for (g, (_, idx)) in eig.groups(tol).into_iter().enumerate() {
        for k in idx {
            block[k] = g;
        }
    }
    let kept = ComplexMatrix::from_fn(n, n, |i, j| {
        if block[i] == block[j] {
            xe[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u.matmul(&kept).matmul(&u.adjoint())
}

#[derive(Clone, Debug)]
pub struct Reservoir {
    pub h: HermitianOperator,
    pub beta: f64,
    pub state: DensityMatrix,
}

impl Reservoir {
    pub fn new(h: HermitianOperator, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::BadTemperature(beta));
        }
        let state = DensityMatrix::gibbs(&h, beta)?;
        Ok(Reservoir { h, beta, state })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// Small system coupled to reservoirs, with its assembled composite system.
#[derive(Clone, Debug)]
pub struct OpenQuantumSystem {
    pub h_small: HermitianOperator,
    pub omega_small: DensityMatrix,
    pub reservoirs: Vec<Reservoir>,
    pub couplings: Vec<HermitianOperator>,
    pub lambda: f64,
    system: FiniteQuantumSystem,
}

impl OpenQuantumSystem {
    pub fn system(&self) -> &FiniteQuantumSystem {
        &self.system
    }

    pub fn into_system(self) -> FiniteQuantumSystem {
        self.system
    }

    /// Factor dimensions in the order (S, R_1, ..., R_M).
    pub fn factor_dims(&self) -> Vec<usize> {
        std::iter::once(self.h_small.dim())
            .chain(self.reservoirs.iter().map(Reservoir::dim))
            .collect()
    }

    /// `S = sum_j beta_j H_j` up to an additive constant, embedded in the composite space.
    pub fn entropy_observable_thermal(&self) -> Result<ComplexMatrix> {
        let dims = self.factor_dims();
        let n: usize = dims.iter().product();
        let mut s = ComplexMatrix::zeros(n, n);
        for (j, r) in self.reservoirs.iter().enumerate() {
            s = &s + &embed(&r.h.matrix().scale_real(r.beta), &dims, &[j + 1])?;
        }
        Ok(s)
    }
}

/// Assembles `H = H_S + sum_j H_j + lambda sum_j V_j` and `omega = omega_S (x) (x)_j omega_j`.
pub fn build_open_system(
    h_small: HermitianOperator,
    omega_small: DensityMatrix,
    reservoirs: Vec<Reservoir>,
    couplings: Vec<HermitianOperator>,
    lambda: f64,
) -> Result<OpenQuantumSystem> {
    let ds = h_small.dim();
    if omega_small.dim() != ds {
        return Err(Error::DimensionMismatch {
            context: "small system state",
            expected: ds,
            actual: omega_small.dim(),
        });
    }
    let comm = h_small.matrix().commutator(omega_small.matrix()).norm_max();
    if comm > 1e-12 {
        return Err(Error::NonInvariantSmallState(comm));
    }
    if couplings.len() != reservoirs.len() {
        return Err(Error::DimensionMismatch {
            context: "one coupling per reservoir",
            expected: reservoirs.len(),
            actual: couplings.len(),
        });
    }
    let dims: Vec<usize> = std::iter::once(ds)
        .chain(reservoirs.iter().map(Reservoir::dim))
        .collect();
    let n: usize = dims.iter().product();
    let mut h_free = embed(h_small.matrix(), &dims, &[0])?;
    let mut omega = omega_small.matrix().clone();
    for (j, r) in reservoirs.iter().enumerate() {
        h_free = &h_free + &embed(r.h.matrix(), &dims, &[j + 1])?;
        omega = kron(&omega, r.state.matrix());
    }
    let mut v = ComplexMatrix::zeros(n, n);
    for (j, (c, r)) in couplings.iter().zip(&reservoirs).enumerate() {
        if c.dim() != ds * r.dim() {
            return Err(Error::DimensionMismatch {
                context: "coupling support S (x) R_j",
                expected: ds * r.dim(),
                actual: c.dim(),
            });
        }
        v = &v + &embed(c.matrix(), &dims, &[0, j + 1])?;
    }
    let v = HermitianOperator::new(v.scale_real(lambda))?;
    let h_free = HermitianOperator::new(h_free)?;
    let omega = DensityMatrix::new(omega)?;
    let comm = omega.matrix().commutator(h_free.matrix()).norm_max();
    if comm > 1e-12 * (1.0 + h_free.matrix().norm_max()) {
        return Err(Error::NonCommutingFreeDynamics(comm));
    }
    let h = h_free.plus(&v);
    let mut system = FiniteQuantumSystem::new(h, omega)?;
    system.split = Some(Perturbation { h_free, v });
    Ok(OpenQuantumSystem {
        h_small,
        omega_small,
        reservoirs,
        couplings,
        lambda,
        system,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::random::{random_density, random_hermitian, seeded};

    fn qubit(h: &[Vec<f64>], rho: &[Vec<f64>]) -> FiniteQuantumSystem {
        FiniteQuantumSystem::new(
            HermitianOperator::from_real_symmetric(h).unwrap(),
            DensityMatrix::new(ComplexMatrix::from_real_rows(rho).unwrap()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rabi_rotation() {
        let sys = qubit(
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            &[vec![0.5, 0.0], vec![0.0, 0.5]],
        );
        let nu = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let out = sys.evolve_matrix(&nu, std::f64::consts::FRAC_PI_2);
        assert!(out.max_abs_diff(&ComplexMatrix::diag_real(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn heisenberg_duality_and_group_law() {
        let mut rng = seeded(3);
        let h = random_hermitian(&mut rng, 5, false);
        let omega = random_density(&mut rng, 5, 0.1, false);
        let nu = random_density(&mut rng, 5, 0.1, false);
        let a = random_hermitian(&mut rng, 5, false);
        let sys = FiniteQuantumSystem::new(h, omega).unwrap();
        let t = 0.83;
        let lhs = nu.expectation(sys.heisenberg(&a, t).unwrap().matrix());
        let rhs = sys.evolve_state(&nu, t).unwrap().expectation(a.matrix());
        assert!((lhs - rhs).norm() < 1e-11);
        let two = sys
            .evolve_state(&sys.evolve_state(&nu, 0.4).unwrap(), 1.1)
            .unwrap();
        let one = sys.evolve_state(&nu, 1.5).unwrap();
        assert!(two.matrix().max_abs_diff(one.matrix()) < 1e-10);
    }

    #[test]
    fn pinching_kills_coherences_and_is_invariant() {
        let sys = qubit(
            &[vec![1.0, 0.0], vec![0.0, -1.0]],
            &[vec![0.6, 0.2], vec![0.2, 0.4]],
        );
        let ness = sys.ness_cesaro();
        assert!(ness
            .matrix()
            .max_abs_diff(&ComplexMatrix::diag_real(&[0.6, 0.4]))
            < 1e-14);
        assert!(sys.hamiltonian().matrix().commutator(ness.matrix()).norm_max() < 1e-12);
    }

    #[test]
    fn time_reversal_reverses_dynamics() {
        let mut rng = seeded(11);
        let h = random_hermitian(&mut rng, 4, true);
        let omega = random_density(&mut rng, 4, 0.1, true);
        let sys = FiniteQuantumSystem::new(h, omega).unwrap();
        assert!(sys.is_tri());
        let a = random_hermitian(&mut rng, 4, false);
        let lhs = sys
            .time_reversal(&sys.heisenberg_matrix(a.matrix(), 0.7))
            .unwrap();
        let rhs = sys.heisenberg_matrix(&sys.time_reversal(a.matrix()).unwrap(), -0.7);
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        let complex = FiniteQuantumSystem::new(
            random_hermitian(&mut rng, 4, false),
            random_density(&mut rng, 4, 0.1, true),
        )
        .unwrap();
        assert!(matches!(
            complex.time_reversal(a.matrix()),
            Err(Error::NotTimeReversalInvariant)
        ));
    }

    #[test]
    fn decoupled_open_system_keeps_omega() {
        let hs = HermitianOperator::diag(&[0.5, -0.5]);
        let ws = DensityMatrix::maximally_mixed(2);
        let r = Reservoir::new(HermitianOperator::diag(&[0.0, 1.3]), 1.0).unwrap();
        let v = random_hermitian(&mut seeded(1), 4, true);
        let open = build_open_system(hs, ws, vec![r], vec![v], 0.0).unwrap();
        let sys = open.system();
        let w = sys.evolve_state(sys.omega(), 2.3).unwrap();
        assert!(w.matrix().max_abs_diff(sys.omega().matrix()) < 1e-12);
        assert!(sys.is_tri());
    }

    #[test]
    fn non_invariant_small_state_rejected() {
        let hs = HermitianOperator::from_real_symmetric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ws = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let err = build_open_system(hs, ws, vec![], vec![], 0.0).unwrap_err();
        assert!(matches!(err, Error::NonInvariantSmallState(_)));
    }
}
