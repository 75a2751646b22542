//! Numerical tolerances shared across the crate.
//!
//! Library routines use these defaults directly. The experiment runner copies
//! them into a [`Tolerances`] table that can be overridden per run.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative tolerance for the Hermiticity check, `|A - A^*| <= tol (1 + |A|)`.
pub const HERMITICITY: f64 = 1e-12;
/// Smallest eigenvalue admitted for a faithful density matrix.
pub const FAITHFULNESS_FLOOR: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE: f64 = 1e-12;
/// Absolute gap below which eigenvalues are grouped into one spectral projection.
pub const EIGEN_GROUPING: f64 = 1e-10;
/// Eigenvalue clusters closer than this are reported as fragile groupings.
pub const NEAR_DEGENERATE: f64 = 1e-8;
/// Merge tolerance for atoms of entropy-production measures.
pub const ATOM_MERGE: f64 = 1e-10;
/// Negative atom weights above `-ATOM_CLIP` are clipped to zero.
pub const ATOM_CLIP: f64 = 1e-12;
/// Condition-number cap for the eigenbasis exponential path.
pub const EIGENBASIS_CONDITION: f64 = 1e6;
/// Left/right overlap below which an eigenvalue is flagged as possibly non-semisimple.
pub const SEMISIMPLE_OVERLAP: f64 = 1e-10;
/// Smallest singular value of a unit-column eigenbasis below which a
/// multiple eigenvalue is treated as defective.
pub const EIGENBASIS_RANK: f64 = 1e-6;
/// Spectral-projection overlap below which a resonance is treated as invisible.
pub const POLE_OVERLAP: f64 = 1e-12;
/// Tie tolerance on growth rates when selecting the dominant resonance.
pub const POLE_TIE: f64 = 1e-10;
/// Rank tolerance for Jordan-order detection.
pub const JORDAN_RANK: f64 = 1e-8;
/// Distance to the spectrum below which the resolvent is refused.
pub const RESOLVENT_SINGULAR: f64 = 1e-12;
/// Largest base dimension for which dense `d^2 x d^2` superoperators are formed.
pub const DENSE_SUPEROPERATOR_CAP: usize = 64;

/// A named table of tolerances used to grade identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let entries: &[(&str, f64)] = &[
            ("oracle_2tm", 1e-9),
            ("reference_identical", 1e-10),
            ("ancilla_estimate", 1e-9),
            ("ancilla_diagonal", 1e-10),
            ("liouvillean_rep", 1e-8),
            ("hhis_vector", 1e-9),
            ("chain_rule", 1e-10),
            ("multiplicative_cocycle", 1e-9),
            ("additive_cocycle", 1e-10),
            ("entropy_balance", 1e-8),
            ("omega_sigma", 1e-11),
            ("log_delta", 1e-8),
            ("dyson", 1e-5),
            ("es_symmetry", 1e-9),
            ("reflection", 1e-8),
            ("sandwich_slack", 1e-10),
            ("l_half_kernel", 1e-10),
            ("adjoint", 1e-10),
            ("tpar_l", 1e-8),
            ("sun_tuluz", 1e-9),
            ("sun_tuluz_spectrum", 1e-8),
            ("ness_spectral", 1e-9),
            ("ness_cesaro", 5e-3),
            ("gc_symmetry", 1e-12),
            ("rate_function_gc", 1e-6),
            ("path_enumeration", 1e-12),
            ("pressure_finite_n", 5e-3),
            ("exchange_of_limits", 1e-4),
            ("perron_curve", 1e-9),
            ("pole", 1e-10),
        ];
        Tolerances(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or_else(|| panic!("unknown tolerance key {key}"))
    }

    /// Overrides one entry; unknown keys are rejected so typos do not pass silently.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(format!("unknown tolerance key `{key}`")),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
