//! Markov–Gibbs instantiation of the classical entropic fluctuation theory.
//!
//! A path `x_0 ... x_n` of an irreducible chain with transition matrix `p`
//! carries the entropy increment `sum_k g(x_k, x_{k+1})`, `g(x, y) = log(p(x, y) / p(y, x))`.
//! Its generating function is powered by the tilted matrix
//! `M_alpha(x, y) = p(x, y)^{1 - alpha} p(y, x)^alpha`, whose Perron root gives
//! the pressure `e(alpha)`. Time reversal is path reversal under the
//! stationary measure.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    fluctuation_relation_residual, gartner_ellis_log, legendre, reflection_residual,
    AtomicMeasure, GartnerEllis, RateFunction,
};
use crate::numkernel::{general_eig, random::seeded, ComplexMatrix, C64};
use crate::transfer::{dominant_pole, resonance_curve, ResonanceFamily, ResonanceResult};

const ROW_SUM: f64 = 1e-12;
const STATIONARY_CHECK: f64 = 1e-12;
/// Paths longer than this are not enumerated.
pub const MAX_ENUMERATION_STEPS: usize = 14;

/// Model file layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub mu0: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct MarkovGibbsModel {
    p: Vec<Vec<f64>>,
    mu0: Vec<f64>,
    pi: Vec<f64>,
}

impl MarkovGibbsModel {
    /// Validates a row-stochastic, irreducible matrix with symmetric support.
    /// The initial measure defaults to the stationary one.
    pub fn new(p: Vec<Vec<f64>>, mu0: Option<Vec<f64>>) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::InvalidModel("empty transition matrix".into()));
        }
        for (x, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidModel(format!("row {x} has length {}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidModel(format!("row {x} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM {
                return Err(Error::InvalidModel(format!("row {x} sums to {sum}")));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if (p[x][y] > 0.0) != (p[y][x] > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "support not symmetric at ({x}, {y})"
                    )));
                }
            }
        }
        if !irreducible(&p) {
            return Err(Error::InvalidModel("transition graph is not irreducible".into()));
        }
        let pi = stationary_of(&p)?;
        let mu0 = match mu0 {
            Some(m) => {
                if m.len() != n || m.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidModel("initial measure must be faithful".into()));
                }
                let s: f64 = m.iter().sum();
                if (s - 1.0).abs() > ROW_SUM {
                    return Err(Error::InvalidModel(format!("initial measure sums to {s}")));
                }
                m
            }
            None => pi.clone(),
        };
        Ok(MarkovGibbsModel { p, mu0, pi })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        if spec.rows.len() != spec.n {
            return Err(Error::InvalidModel(format!(
                "n = {} but {} rows given",
                spec.n,
                spec.rows.len()
            )));
        }
        Self::new(spec.rows.clone(), spec.mu0.clone())
    }

    /// `p = [[1 - a, a], [b, 1 - b]]`.
    pub fn two_state(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - a, a], vec![b, 1.0 - b]], None)
    }

    /// Fully connected chain with seeded random rates in `[0.1, 1.1)` before normalization.
    pub fn random(seed: u64, n: usize) -> Result<Self> {
        let mut rng = seeded(seed);
        let p = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            })
            .collect();
        Self::new(p, None)
    }

    pub fn with_initial(&self, mu0: Vec<f64>) -> Result<Self> {
        Self::new(self.p.clone(), Some(mu0))
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn initial(&self) -> &[f64] {
        &self.mu0
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// `g(x, y) = log(p(x, y) / p(y, x))`, zero off the support.
    pub fn increment(&self, x: usize, y: usize) -> f64 {
        if self.p[x][y] > 0.0 {
            (self.p[x][y] / self.p[y][x]).ln()
        } else {
            0.0
        }
    }

    /// `mu p^k`.
    pub fn evolve_measure(&self, mu: &[f64], steps: usize) -> Vec<f64> {
        let mut v = mu.to_vec();
        for _ in 0..steps {
            v = row_times(&v, &self.p);
        }
        v
    }
}

fn irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    // with symmetric support, strong connectivity reduces to reachability from 0
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if p[x][y] > 0.0 && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn row_times(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut out = vec![0.0; n];
    for (x, vx) in v.iter().enumerate() {
        for y in 0..n {
            out[y] += vx * m[x][y];
        }
    }
    out
}

/// Stationary vector by a direct solve, cross-checked against power
/// iteration of the lazy chain `(p + I) / 2`.
fn stationary_of(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // (p^T - I) pi = 0 with the last equation replaced by normalization
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == n - 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(p[j][i] - if i == j { 1.0 } else { 0.0 }, 0.0)
        }
    });
    let rhs = ComplexMatrix::from_fn(n, 1, |i, _| C64::new((i == n - 1) as u8 as f64, 0.0));
    let direct: Vec<f64> = a.solve(&rhs)?.column(0).iter().map(|z| z.re).collect();

    let lazy: Vec<Vec<f64>> = (0..n)
        .map(|x| (0..n).map(|y| 0.5 * (p[x][y] + if x == y { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let next = row_times(&v, &lazy);
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-16 {
            break;
        }
    }
    let gap = direct.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > STATIONARY_CHECK || direct.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidModel(format!(
            "stationary vector cross-check failed (gap {gap:.3e})"
        )));
    }
    Ok(direct)
}

/// `M_alpha(x, y) = p(x, y)^{1 - alpha} p(y, x)^alpha`.
#[derive(Clone, Debug)]
pub struct TiltedMatrix {
    pub alpha: f64,
    pub m: Vec<Vec<f64>>,
}

impl TiltedMatrix {
    pub fn new(model: &MarkovGibbsModel, alpha: f64) -> Self {
        let p = model.transition();
        let n = p.len();
        let m = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        if p[x][y] > 0.0 {
                            p[x][y].powf(1.0 - alpha) * p[y][x].powf(alpha)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        TiltedMatrix { alpha, m }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        let n = self.m.len();
        ComplexMatrix::from_fn(n, n, |i, j| C64::new(self.m[i][j], 0.0))
    }
}

/// `e(alpha) = log rho(M_alpha)`.
pub fn pressure(model: &MarkovGibbsModel, alpha: f64) -> Result<f64> {
    let eig = general_eig(&TiltedMatrix::new(model, alpha).to_complex(), 0.0)?;
    let rho = eig.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(rho.ln())
}

/// Gap between the Perron root and the next eigenvalue modulus of `M_alpha`.
pub fn perron_margin(model: &MarkovGibbsModel, alpha: f64) -> Result<f64> {
    let eig = general_eig(&TiltedMatrix::new(model, alpha).to_complex(), 0.0)?;
    let mut mods: Vec<f64> = eig.values.iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    Ok(if mods.len() > 1 { mods[0] - mods[1] } else { mods[0] })
}

/// `log(mu^T M_alpha^n 1)`, with running renormalization.
fn log_generating(model: &MarkovGibbsModel, mu: &[f64], alpha: f64, n: usize) -> f64 {
    let m = TiltedMatrix::new(model, alpha).m;
    let mut v = mu.to_vec();
    let mut log_scale = 0.0;
    for _ in 0..n {
        v = row_times(&v, &m);
        let s: f64 = v.iter().sum();
        log_scale += s.ln();
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    log_scale + v.iter().sum::<f64>().ln()
}

/// `(1/n) log(mu0^T M_alpha^n 1)`.
pub fn path_cgf_exact(model: &MarkovGibbsModel, alpha: f64, n_steps: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    Ok(log_generating(model, model.initial(), alpha, n_steps) / n_steps as f64)
}

/// Visits every path of `n_steps` transitions from the initial measure, passing
/// `(x_0, x_n, probability, sum g)` to the callback.
fn for_each_path(
    model: &MarkovGibbsModel,
    mu: &[f64],
    n_steps: usize,
    visit: &mut impl FnMut(usize, usize, f64, f64),
) -> Result<()> {
    if n_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::CostGuard(format!(
            "path enumeration limited to {MAX_ENUMERATION_STEPS} steps, got {n_steps}"
        )));
    }
    fn go(
        model: &MarkovGibbsModel,
        start: usize,
        x: usize,
        left: usize,
        prob: f64,
        sum_g: f64,
        visit: &mut impl FnMut(usize, usize, f64, f64),
    ) {
        if left == 0 {
            visit(start, x, prob, sum_g);
            return;
        }
        for y in 0..model.n() {
            let q = model.p[x][y];
            if q > 0.0 {
                go(model, start, y, left - 1, prob * q, sum_g + model.increment(x, y), visit);
            }
        }
    }
    for (x0, &m0) in mu.iter().enumerate() {
        if m0 > 0.0 {
            go(model, x0, x0, n_steps, m0, 0.0, visit);
        }
    }
    Ok(())
}

/// Brute-force `(1/n) log sum_paths mu0(x_0) prod p e^{-alpha sum g}`.
pub fn path_cgf_enumerated(model: &MarkovGibbsModel, alpha: f64, n_steps: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let mut total = 0.0;
    for_each_path(model, model.initial(), n_steps, &mut |_, _, prob, g| {
        total += prob * (-alpha * g).exp();
    })?;
    Ok(total.ln() / n_steps as f64)
}

/// Entropy production of a path including the boundary term of the
/// stationary measure: `sum g + log pi(x_0) - log pi(x_n)`.
pub fn classical_cocycle(model: &MarkovGibbsModel, path: &[usize]) -> Result<f64> {
    if path.is_empty() || path.iter().any(|&x| x >= model.n()) {
        return Err(Error::InvalidArgument("path must be non-empty with valid states".into()));
    }
    let mut s = 0.0;
    for w in path.windows(2) {
        if model.p[w[0]][w[1]] == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "transition {} -> {} has zero probability",
                w[0], w[1]
            )));
        }
        s += model.increment(w[0], w[1]);
    }
    let pi = model.stationary();
    Ok(s + pi[path[0]].ln() - pi[path[path.len() - 1]].ln())
}

/// Law of the path cocycle under the stationary measure.
pub fn cocycle_measure(model: &MarkovGibbsModel, n_steps: usize) -> Result<AtomicMeasure> {
    let pi = model.stationary().to_vec();
    let ln_pi: Vec<f64> = pi.iter().map(|v| v.ln()).collect();
    let mut atoms = Vec::new();
    for_each_path(model, &pi, n_steps, &mut |x0, xn, prob, g| {
        atoms.push((g + ln_pi[x0] - ln_pi[xn], prob));
    })?;
    AtomicMeasure::from_atoms(atoms)
}

#[derive(Clone, Debug, Serialize)]
pub struct EvansSearles {
    pub n_steps: usize,
    pub reflection_residual: f64,
    pub mean: f64,
}

/// Reflection symmetry `P(-s) = e^{-s} P(s)` of the cocycle law under the
/// stationary measure, which plays the role of time-reversal invariance here.
pub fn evans_searles_check(model: &MarkovGibbsModel, n_steps: usize) -> Result<EvansSearles> {
    let q = cocycle_measure(model, n_steps)?;
    Ok(EvansSearles {
        n_steps,
        reflection_residual: reflection_residual(&q),
        mean: q.mean(),
    })
}

/// Domain half-width beyond `[0, 1]` used for Legendre transforms of the pressure.
pub const PRESSURE_WINDOW: f64 = 2.0;

/// Legendre transform of the pressure on `[-W, 1 + W]`.
pub fn classical_rate_function(model: &MarkovGibbsModel, s_grid: &[f64]) -> Result<RateFunction> {
    // a failing eigensolve would make the pressure undefined; surface it first
    pressure(model, 0.5)?;
    legendre(
        |a| pressure(model, a).unwrap_or(f64::NAN),
        (-PRESSURE_WINDOW, 1.0 + PRESSURE_WINDOW),
        s_grid,
        true,
    )
}

/// `max |e(alpha) - e(1 - alpha)|` over the grid.
pub fn gc_symmetry_residual(model: &MarkovGibbsModel, alphas: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &a in alphas {
        worst = worst.max((pressure(model, a)? - pressure(model, 1.0 - a)?).abs());
    }
    Ok(worst)
}

/// Fitted constant `C = max n |path_cgf_exact(n) - e|` over the given lengths.
pub fn finite_n_constant(model: &MarkovGibbsModel, alpha: f64, ns: &[usize]) -> Result<f64> {
    let e = pressure(model, alpha)?;
    let mut c = 0.0f64;
    for &n in ns {
        c = c.max(n as f64 * (path_cgf_exact(model, alpha, n)? - e).abs());
    }
    Ok(c)
}

/// Gärtner–Ellis fits of `log(mu^T M_alpha^n 1)` for several initial measures.
#[derive(Clone, Debug, Serialize)]
pub struct ExchangeOfLimits {
    pub alpha: f64,
    pub pressure: f64,
    pub fits: Vec<GartnerEllis>,
    /// `max |fit - e(alpha)|`.
    pub residual: f64,
}

pub fn exchange_of_limits(
    model: &MarkovGibbsModel,
    alpha: f64,
    initials: &[Vec<f64>],
    n_grid: &[usize],
) -> Result<ExchangeOfLimits> {
    let e = pressure(model, alpha)?;
    let mut fits = Vec::with_capacity(initials.len());
    for mu in initials {
        if mu.len() != model.n() {
            return Err(Error::DimensionMismatch {
                context: "initial measure",
                expected: model.n(),
                actual: mu.len(),
            });
        }
        let samples: Vec<(f64, f64)> = n_grid
            .iter()
            .map(|&n| (n as f64, log_generating(model, mu, alpha, n)))
            .collect();
        fits.push(gartner_ellis_log(&samples)?);
    }
    let residual = fits.iter().map(|f| (f.estimate - e).abs()).fold(0.0, f64::max);
    Ok(ExchangeOfLimits {
        alpha,
        pressure: e,
        fits,
        residual,
    })
}

/// Resonance adapter: `M_alpha^n = e^{-in G}` with `G = i log M_alpha`, so the
/// dominant pole is `i log rho(M_alpha)` up to the argument of the Perron root.
pub struct ClassicalFamily<'a> {
    pub model: &'a MarkovGibbsModel,
}

impl ClassicalFamily<'_> {
    pub fn generator(&self, alpha: f64) -> Result<ComplexMatrix> {
        let m = TiltedMatrix::new(self.model, alpha).to_complex();
        let eig = general_eig(&m, 0.0)?;
        let n = m.nrows();
        let mut right = ComplexMatrix::zeros(n, n);
        let mut logs = Vec::with_capacity(n);
        let mut col = 0;
        for c in &eig.clusters {
            for k in 0..c.multiplicity() {
                for i in 0..n {
                    right[(i, col)] = c.right[(i, k)];
                }
                logs.push(C64::new(0.0, 1.0) * c.members[k].ln());
                col += 1;
            }
        }
        let inv = right.inverse()?;
        Ok(right.matmul(&ComplexMatrix::diag(&logs)).matmul(&inv))
    }
}

impl ResonanceFamily for ClassicalFamily<'_> {
    fn resonance(&self, alpha: C64) -> Result<ResonanceResult> {
        if alpha.im != 0.0 {
            return Err(Error::InvalidArgument("classical family takes real alpha".into()));
        }
        let g = self.generator(alpha.re)?;
        let phi: Vec<C64> = self.model.initial().iter().map(|&v| C64::new(v, 0.0)).collect();
        let psi = vec![C64::new(1.0, 0.0); self.model.n()];
        dominant_pole(&g, &phi, &psi)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub pressure: f64,
    pub pole: C64,
    pub residual: f64,
}

/// Pressure curve and its resonance counterpart `Im E(alpha) = log rho(M_alpha)`.
pub fn classical_transfer_spectrum(
    model: &MarkovGibbsModel,
    alphas: &[f64],
) -> Result<Vec<SpectrumPoint>> {
    let family = ClassicalFamily { model };
    let grid: Vec<C64> = alphas.iter().map(|&a| C64::new(a, 0.0)).collect();
    resonance_curve(&family, &grid)
        .into_iter()
        .map(|(a, r)| {
            let r = r?;
            let e = pressure(model, a.re)?;
            Ok(SpectrumPoint {
                alpha: a.re,
                pressure: e,
                pole: r.pole,
                residual: (r.pole.im - e).abs().max(r.pole.re.abs()),
            })
        })
        .collect()
}

pub fn pressure_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("alpha,pressure\n");
    for (a, e) in points {
        let _ = writeln!(out, "{a:.16e},{e:.16e}");
    }
    out
}

/// `I(-s) - I(s) - s` residual of the classical rate function.
pub fn rate_function_gc_residual(model: &MarkovGibbsModel, s_grid: &[f64]) -> Result<f64> {
    Ok(fluctuation_relation_residual(&classical_rate_function(model, s_grid)?))
}

#[cfg(test)]
mod tests;
