use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numkernel::C64;
use crate::tolerances;

/// Finitely supported probability measure on the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Sorts by position, merges atoms closer than the merge tolerance, clips
    /// roundoff-negative weights and checks normalization.
    pub fn from_atoms(raw: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_tolerance(raw, tolerances::ATOM_MERGE)
    }

    pub fn with_tolerance(mut raw: Vec<(f64, f64)>, merge: f64) -> Result<Self> {
        if raw.iter().any(|(s, p)| !(s.is_finite() && p.is_finite())) {
            return Err(Error::InvalidArgument("non-finite atom".into()));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for (s, p) in raw {
            match atoms.last_mut() {
                Some(last) if s - anchor <= merge => last.1 += p,
                _ => {
                    anchor = s;
                    atoms.push((s, p));
                }
            }
        }
        let mut clipped = 0.0f64;
        for a in atoms.iter_mut() {
            if a.1 < 0.0 {
                if a.1 < -tolerances::ATOM_CLIP {
                    return Err(Error::InvalidArgument(format!(
                        "negative atom weight {:.3e} at s = {}",
                        a.1, a.0
                    )));
                }
                clipped = clipped.max(-a.1);
                a.1 = 0.0;
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "atomic measure has total mass {total}"
            )));
        }
        if clipped > 0.0 {
            log::debug!("clipped negative atom weights up to {clipped:.3e}");
            for a in atoms.iter_mut() {
                a.1 /= total;
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn point_mass(s: f64) -> Self {
        AtomicMeasure {
            atoms: vec![(s, 1.0)],
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(s, p)| s * p).sum()
    }

    /// `\int e^{-alpha s} dQ(s)`.
    pub fn laplace(&self, alpha: C64) -> C64 {
        self.atoms.iter().map(|&(s, p)| (-alpha * s).exp() * p).sum()
    }

    /// Image under `s -> s / t`.
    pub fn rescale(&self, t: f64) -> Result<Self> {
        if t == 0.0 {
            return Err(Error::InvalidArgument("rescaling by t = 0".into()));
        }
        Self::from_atoms(self.atoms.iter().map(|&(s, p)| (s / t, p)).collect())
    }

    /// Weight of the atom within `tol` of `s`, if any.
    pub fn weight_near(&self, s: f64, tol: f64) -> Option<f64> {
        let i = self.atoms.partition_point(|a| a.0 < s - tol);
        self.atoms.get(i).filter(|a| (a.0 - s).abs() <= tol).map(|a| a.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,p\n");
        for (s, p) in &self.atoms {
            let _ = writeln!(out, "{s:.16e},{p:.16e}");
        }
        out
    }
}
