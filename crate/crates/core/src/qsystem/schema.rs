//! System definition schema. The same structure is read from TOML or JSON by
//! the command-line runner.
//!
//! ```toml
//! lambda = 0.5
//!
//! [small.hamiltonian]
//! kind = "pauli-z"
//! scale = 0.5
//!
//! [small.state]
//! kind = "maximally-mixed"
//!
//! [[reservoirs]]
//! beta = 1.0
//! hamiltonian = { kind = "random-real-seeded", dim = 4, seed = 17 }
//!
//! [[couplings]]
//! kind = "random-real-seeded"
//! dim = 8
//! ```
//!
//! Random operators without an explicit `seed` draw one from the run seed;
//! building them without any seed is an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::random::{random_hermitian, seeded};
use crate::numkernel::{ComplexMatrix, DensityMatrix, HermitianOperator, C64};
use crate::qsystem::{build_open_system, OpenQuantumSystem, Reservoir};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub small: SmallSpec,
    #[serde(default)]
    pub reservoirs: Vec<ReservoirSpec>,
    #[serde(default)]
    pub couplings: Vec<OperatorSpec>,
    #[serde(default)]
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SmallSpec {
    pub hamiltonian: OperatorSpec,
    #[serde(default)]
    pub state: StateSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub hamiltonian: OperatorSpec,
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Matrix {
        real: Vec<Vec<f64>>,
        #[serde(default)]
        imag: Option<Vec<Vec<f64>>>,
    },
    Diagonal {
        values: Vec<f64>,
    },
    PauliZ {
        #[serde(default = "one")]
        scale: f64,
    },
    PauliX {
        #[serde(default = "one")]
        scale: f64,
    },
    RandomRealSeeded {
        dim: usize,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "one")]
        scale: f64,
    },
    RandomComplexSeeded {
        dim: usize,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    #[default]
    MaximallyMixed,
    /// Probabilities in the eigenbasis of the small Hamiltonian, ascending energy.
    Spectral { probabilities: Vec<f64> },
    Gibbs { beta: f64 },
}

fn complex_rows(real: &[Vec<f64>], imag: Option<&Vec<Vec<f64>>>) -> Result<ComplexMatrix> {
    let re = ComplexMatrix::from_real_rows(real)?;
    match imag {
        None => Ok(re),
        Some(im) => {
            let im = ComplexMatrix::from_real_rows(im)?;
            if im.nrows() != re.nrows() || im.ncols() != re.ncols() {
                return Err(Error::DimensionMismatch {
                    context: "imaginary part",
                    expected: re.nrows(),
                    actual: im.nrows(),
                });
            }
            Ok(&re + &im.scale(C64::new(0.0, 1.0)))
        }
    }
}

impl OperatorSpec {
    pub fn build(&self, run_seed: Option<u64>, slot: u64) -> Result<HermitianOperator> {
        let seed_of = |seed: &Option<u64>| {
            seed.or_else(|| run_seed.map(|g| derive_seed(g, slot)))
                .ok_or_else(|| Error::InvalidArgument("random operator needs a seed".into()))
        };
        match self {
            OperatorSpec::Matrix { real, imag } => {
                HermitianOperator::new(complex_rows(real, imag.as_ref())?)
            }
            OperatorSpec::Diagonal { values } => Ok(HermitianOperator::diag(values)),
            OperatorSpec::PauliZ { scale } => Ok(HermitianOperator::diag(&[*scale, -scale])),
            OperatorSpec::PauliX { scale } => {
                HermitianOperator::from_real_symmetric(&[vec![0.0, *scale], vec![*scale, 0.0]])
            }
            OperatorSpec::RandomRealSeeded { dim, seed, scale } => {
                let mut rng = seeded(seed_of(seed)?);
                Ok(random_hermitian(&mut rng, *dim, true).scale(*scale))
            }
            OperatorSpec::RandomComplexSeeded { dim, seed, scale } => {
                let mut rng = seeded(seed_of(seed)?);
                Ok(random_hermitian(&mut rng, *dim, false).scale(*scale))
            }
        }
    }

    pub fn uses_randomness(&self) -> bool {
        matches!(
            self,
            OperatorSpec::RandomRealSeeded { seed: None, .. }
                | OperatorSpec::RandomComplexSeeded { seed: None, .. }
        )
    }
}

/// Deterministic per-slot seed derived from the run seed.
pub(crate) fn derive_seed(run_seed: u64, slot: u64) -> u64 {
    run_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(slot.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        ^ slot
}

impl StateSpec {
    pub fn build(&self, h: &HermitianOperator) -> Result<DensityMatrix> {
        match self {
            StateSpec::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(h.dim())),
            StateSpec::Gibbs { beta } => DensityMatrix::gibbs(h, *beta),
            StateSpec::Spectral { probabilities } => {
                let eig = h.eig()?;
                if probabilities.len() != h.dim() {
                    return Err(Error::DimensionMismatch {
                        context: "spectral state",
                        expected: h.dim(),
                        actual: probabilities.len(),
                    });
                }
                DensityMatrix::new(eig.rebuild(probabilities))
            }
        }
    }
}

impl SystemSpec {
    pub fn uses_randomness(&self) -> bool {
        self.small.hamiltonian.uses_randomness()
            || self.reservoirs.iter().any(|r| r.hamiltonian.uses_randomness())
            || self.couplings.iter().any(OperatorSpec::uses_randomness)
    }

    pub fn build(&self, run_seed: Option<u64>) -> Result<OpenQuantumSystem> {
        let h_small = self.small.hamiltonian.build(run_seed, 0)?;
        let omega_small = self.small.state.build(&h_small)?;
        let mut slot = 1;
        let mut reservoirs = Vec::new();
        for r in &self.reservoirs {
            reservoirs.push(Reservoir::new(r.hamiltonian.build(run_seed, slot)?, r.beta)?);
            slot += 1;
        }
        let mut couplings = Vec::new();
        for c in &self.couplings {
            couplings.push(c.build(run_seed, slot)?);
            slot += 1;
        }
        build_open_system(h_small, omega_small, reservoirs, couplings, self.lambda)
    }
}
