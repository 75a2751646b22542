use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::inner;
use crate::numkernel::{
    expm_general, general_eig, spectral_projector_contour, ComplexMatrix, GeneralEig, C64,
};
use crate::qsystem::FiniteQuantumSystem;
use crate::tolerances;

use super::alpha_liouvillean;

/// Eigenvalues closer than this are treated as one (possibly defective) cluster.
const POLE_CLUSTER: f64 = 1e-6;
const CONTOUR_NODES: usize = 128;

/// Dominant resonance of `t -> <phi, e^{-itM} psi>`.
#[derive(Clone, Debug, Serialize)]
pub struct ResonanceResult {
    pub pole: C64,
    pub order: usize,
    /// `p(0) = <phi, P psi>`.
    pub residue: C64,
    /// `<phi, (M - pole)^k P psi>` for `k < order`.
    pub coefficients: Vec<C64>,
    /// Norms of `P^* phi` and `P psi`.
    pub overlap_left: f64,
    pub overlap_right: f64,
    /// `Im pole - max Im` over the other clusters with nonzero overlap; `inf` if none.
    pub gap: f64,
}

impl ResonanceResult {
    /// `p(t) = sum_k (-it)^k / k! <phi, (M - pole)^k P psi>`.
    pub fn prefactor(&self, t: f64) -> C64 {
        let mut term = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in self.coefficients.iter().enumerate() {
            if k > 0 {
                term *= C64::new(0.0, -t) / k as f64;
            }
            acc += term * c;
        }
        acc
    }

    /// `e^{-it pole} p(t)`.
    pub fn leading(&self, t: f64) -> C64 {
        (C64::new(0.0, -t) * self.pole).exp() * self.prefactor(t)
    }
}

/// `<phi, (z - M)^{-1} psi>` by a dense solve.
pub fn resolvent_element(m: &ComplexMatrix, phi: &[C64], psi: &[C64], z: C64) -> Result<C64> {
    let n = m.require_square()?;
    if phi.len() != n || psi.len() != n {
        return Err(Error::DimensionMismatch {
            context: "resolvent vectors",
            expected: n,
            actual: phi.len().min(psi.len()),
        });
    }
    let shifted = &ComplexMatrix::identity(n).scale(z) - m;
    let smallest = shifted.singular_values()?.last().copied().unwrap_or(0.0);
    if smallest <= tolerances::RESOLVENT_SINGULAR * (1.0 + m.norm_max()) {
        return Err(Error::ResolventAtSpectrum(smallest));
    }
    let rhs = ComplexMatrix::from_fn(n, 1, |i, _| psi[i]);
    let x = shifted.solve(&rhs)?;
    let xv = x.column(0);
    let back = shifted.mul_vec(&xv);
    let err = back
        .iter()
        .zip(psi)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let psi_norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if err > 1e-10 * psi_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Singular(format!("resolvent solve residual {err:.3e}")));
    }
    Ok(inner(phi, &xv))
}

struct ClusterData {
    value: C64,
    /// `P psi` and `P^* phi`.
    right: Vec<C64>,
    left: Vec<C64>,
    /// Full projector, formed only for non-semisimple clusters.
    projector: Option<ComplexMatrix>,
}

/// Projected vectors for every cluster. Semisimple clusters use their
/// eigenbases, so no `n x n` projector is formed per cluster.
fn cluster_data(
    m: &ComplexMatrix,
    phi: &[C64],
    psi: &[C64],
) -> Result<(GeneralEig, Vec<ClusterData>)> {
    let scale = 1.0 + m.norm_max();
    let eig = general_eig(m, POLE_CLUSTER * scale)?;
    let values: Vec<C64> = eig.clusters.iter().map(|c| c.value).collect();
    let data = eig
        .clusters
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if c.semisimple {
                let right = c.right.mul_vec(&c.left.adjoint().mul_vec(psi));
                let left = c.left.mul_vec(&c.right.adjoint().mul_vec(phi));
                return Ok(ClusterData {
                    value: c.value,
                    right,
                    left,
                    projector: None,
                });
            }
            // Riesz projector on a circle halfway to the nearest other cluster
            let dist = values
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, v)| (v - c.value).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = if dist.is_finite() { dist / 2.0 } else { scale };
            let p = spectral_projector_contour(m, c.value, radius, CONTOUR_NODES)?;
            Ok(ClusterData {
                value: c.value,
                right: p.mul_vec(psi),
                left: p.adjoint().mul_vec(phi),
                projector: Some(p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((eig, data))
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Dominant resonance of `<phi, e^{-itM} psi>`: among eigenvalues whose
/// spectral projection overlaps both vectors, the one of largest imaginary part.
pub fn dominant_pole(m: &ComplexMatrix, phi: &[C64], psi: &[C64]) -> Result<ResonanceResult> {
    let n = m.require_square()?;
    if phi.len() != n || psi.len() != n {
        return Err(Error::DimensionMismatch {
            context: "dominant_pole vectors",
            expected: n,
            actual: phi.len().min(psi.len()),
        });
    }
    let scale = vec_norm(phi) * vec_norm(psi);
    let (eig, clusters) = cluster_data(m, phi, psi)?;
    let mut live: Vec<(usize, C64, C64)> = clusters
        .iter()
        .enumerate()
        .filter_map(|(k, c)| {
            let w = inner(phi, &c.right);
            let thresh = tolerances::POLE_OVERLAP * scale.max(f64::MIN_POSITIVE);
            let visible = w.norm() > thresh
                && vec_norm(&c.right) > tolerances::POLE_OVERLAP
                && vec_norm(&c.left) > tolerances::POLE_OVERLAP;
            visible.then_some((k, c.value, w))
        })
        .collect();
    if live.is_empty() {
        return Err(Error::NoSpectralOverlap);
    }
    live.sort_by(|a, b| b.1.im.total_cmp(&a.1.im));
    let (chosen, pole, residue) = live[0];
    if let Some(runner) = live.get(1) {
        if pole.im - runner.1.im <= tolerances::POLE_TIE * (1.0 + pole.norm()) {
            return Err(Error::NonSimpleDominant(format!(
                "{} and {} share the growth rate {:.3e}",
                pole, runner.1, pole.im
            )));
        }
    }
    let gap = live.get(1).map_or(f64::INFINITY, |r| pole.im - r.1.im);
    let data = &clusters[chosen];
    let p = match &data.projector {
        Some(p) => p.clone(),
        None => eig.clusters[chosen].projector(),
    };
    let p = &p;

    // nilpotency index of (M - pole) P
    let shifted = m - &ComplexMatrix::identity(n).scale(pole);
    let p_norm = p.norm_max().max(1.0);
    let mut power = p.clone();
    let mut coefficients = Vec::new();
    for _ in 0..n {
        if power.norm_max() <= tolerances::JORDAN_RANK * p_norm * (1.0 + shifted.norm_max()) {
            break;
        }
        coefficients.push(inner(phi, &power.mul_vec(psi)));
        power = shifted.matmul(&power);
    }
    let order = coefficients.len().max(1);
    if coefficients.is_empty() {
        coefficients.push(residue);
    }
    Ok(ResonanceResult {
        pole,
        order,
        residue,
        coefficients,
        overlap_left: vec_norm(&data.left),
        overlap_right: vec_norm(&data.right),
        gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    /// `(t, |<phi, e^{-itM} psi> - e^{-it pole} p(t)| e^{(gap - Im pole) t})`.
    pub scaled: Vec<(f64, f64)>,
    /// Largest scaled residual over the grid.
    pub k: f64,
    pub bounded: bool,
}

/// Scaled remainder of the leading asymptotics over a time grid. The scaled
/// values stay bounded (up to polynomial factors from subleading Jordan
/// blocks) exactly when the leading term is right.
pub fn asymptotic_residual(
    m: &ComplexMatrix,
    phi: &[C64],
    psi: &[C64],
    result: &ResonanceResult,
    t_grid: &[f64],
) -> Result<AsymptoticFit> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidArgument("asymptotic_residual needs two or more times".into()));
    }
    let rate = if result.gap.is_finite() { result.gap } else { 0.0 };
    let mut scaled = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let u = expm_general(&m.scale(C64::new(0.0, -t)))?;
        let exact = inner(phi, &u.mul_vec(psi));
        let diff = (exact - result.leading(t)).norm();
        scaled.push((t, diff * ((rate - result.pole.im) * t).exp()));
    }
    let k = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
    let half = scaled.len() / 2;
    let early = scaled[..half.max(1)].iter().map(|p| p.1).fold(0.0, f64::max);
    let late = scaled[half..].iter().map(|p| p.1).fold(0.0, f64::max);
    let (t0, t1) = (t_grid[0].abs().max(1.0), t_grid[t_grid.len() - 1].abs());
    // allow the polynomial growth of one subleading Jordan chain of length <= n
    let allowance = 10.0 * (t1 / t0).powi(m.nrows() as i32 - 1).max(1.0);
    let bounded = k.is_finite() && late <= allowance * early.max(1e-300);
    Ok(AsymptoticFit { scaled, k, bounded })
}

/// A one-parameter family of generators for which a resonance is extracted.
pub trait ResonanceFamily: Sync {
    fn resonance(&self, alpha: C64) -> Result<ResonanceResult>;
}

/// `E(alpha) = dominant_pole(-L_alpha, Omega, Omega)`.
pub struct QuantumFamily<'a> {
    pub sys: &'a FiniteQuantumSystem,
}

impl ResonanceFamily for QuantumFamily<'_> {
    fn resonance(&self, alpha: C64) -> Result<ResonanceResult> {
        let l = alpha_liouvillean(self.sys, alpha)?;
        let m = l.matrix()?.scale_real(-1.0);
        let omega = crate::numkernel::vec_row_major(&self.sys.omega().sqrt());
        dominant_pole(&m, &omega, &omega)
    }
}

/// Family given by a generator-valued closure and fixed vectors.
pub struct GeneratorFamily<F> {
    pub generator: F,
    pub phi: Vec<C64>,
    pub psi: Vec<C64>,
}

impl<F> ResonanceFamily for GeneratorFamily<F>
where
    F: Fn(C64) -> ComplexMatrix + Sync,
{
    fn resonance(&self, alpha: C64) -> Result<ResonanceResult> {
        dominant_pole(&(self.generator)(alpha), &self.phi, &self.psi)
    }
}

/// `(alpha, E(alpha))` over a grid; failures are reported per point.
pub fn resonance_curve<F: ResonanceFamily + ?Sized>(
    family: &F,
    alphas: &[C64],
) -> Vec<(C64, Result<ResonanceResult>)> {
    use rayon::prelude::*;
    alphas
        .par_iter()
        .map(|&a| (a, family.resonance(a)))
        .collect()
}
