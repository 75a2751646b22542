use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// RMS deviation from linearity above which a Gärtner–Ellis estimate is
/// reported as not converged.
pub const GE_LINEARITY_THRESHOLD: f64 = 1e-6;

const LEGENDRE_GRID: usize = 4001;
const GOLDEN_ITERS: usize = 100;

/// Slope estimate of `log F_t` together with its convergence diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct GartnerEllis {
    pub estimate: f64,
    /// RMS residual of the linear fit over the top half of the grid.
    pub linearity_residual: f64,
    /// Peak-to-peak spread of the fit residuals.
    pub oscillation: f64,
    pub converged: bool,
}

/// Least-squares slope of `log F_t` against `t` over the upper half of an
/// increasing time grid. Diagnostics flag quasi-periodic behaviour rather
/// than asserting a limit.
pub fn gartner_ellis(samples: &[(f64, f64)]) -> Result<GartnerEllis> {
    if samples.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "gartner_ellis needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    if let Some(&(t, value)) = samples.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositiveSample { t, value });
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(t, v)| (t, v.ln())).collect();
    gartner_ellis_log(&logs)
}

/// Same estimate from samples of `log F_t`, for generating functions that
/// overflow in linear scale.
pub fn gartner_ellis_log(samples: &[(f64, f64)]) -> Result<GartnerEllis> {
    if samples.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "gartner_ellis needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    if samples.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::InvalidArgument("non-finite log sample".into()));
    }
    let top = &samples[samples.len() / 2..];
    let n = top.len() as f64;
    let xs: Vec<f64> = top.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = top.iter().map(|p| p.1).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - my - slope * (x - mx))
        .collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GartnerEllis {
        estimate: slope,
        linearity_residual: rms,
        oscillation: hi - lo,
        converged: rms <= GE_LINEARITY_THRESHOLD,
    })
}

/// Rate function on a grid; `+inf` marks points outside the effective domain.
#[derive(Clone, Debug, Serialize)]
pub struct RateFunction {
    pub s_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Effective domain `[a, b]`, the range of `-F'` over the input interval.
    pub a: f64,
    pub b: f64,
}

impl RateFunction {
    /// Largest violation of discrete convexity over consecutive finite triples.
    pub fn convexity_residual(&self) -> f64 {
        let (s, v) = (&self.s_grid, &self.values);
        let mut worst = 0.0f64;
        for k in 1..s.len().saturating_sub(1) {
            if !(v[k - 1].is_finite() && v[k].is_finite() && v[k + 1].is_finite()) {
                continue;
            }
            let chord = ((s[k + 1] - s[k]) * v[k - 1] + (s[k] - s[k - 1]) * v[k + 1])
                / (s[k + 1] - s[k - 1]);
            worst = worst.max(v[k] - chord);
        }
        worst
    }

    /// `(s, I(s))` at the smallest grid value.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        self.s_grid
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(s, v)| (*s, *v))
    }

    pub fn value_at(&self, s: f64) -> Option<f64> {
        self.s_grid
            .iter()
            .position(|&x| (x - s).abs() <= 1e-12 * (1.0 + s.abs()))
            .map(|k| self.values[k])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,I\n");
        for (s, v) in self.s_grid.iter().zip(&self.values) {
            if v.is_finite() {
                let _ = writeln!(out, "{s:.16e},{v:.16e}");
            } else {
                let _ = writeln!(out, "{s:.16e},inf");
            }
        }
        out
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `I(s) = sup_alpha (s alpha - F(-alpha))` for a convex `F` given on `[lo, hi]`.
///
/// With `truncated = true` the interval is a window onto a larger domain of
/// `F`, so points outside the effective domain `[a, b]` are marked `+inf`
/// instead of being reported with a boundary-limited supremum.
pub fn legendre(
    f: impl Fn(f64) -> f64,
    domain: (f64, f64),
    s_grid: &[f64],
    truncated: bool,
) -> Result<RateFunction> {
    let (lo, hi) = domain;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad Legendre domain ({lo}, {hi})")));
    }
    let n = LEGENDRE_GRID;
    let betas: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let fv: Vec<f64> = betas.iter().map(|&b| f(b)).collect();
    if let Some(k) = fv.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("F({}) is not finite", betas[k])));
    }
    let h = (hi - lo) * 1e-6;
    let a = -(f(hi) - f(hi - h)) / h;
    let b = -(f(lo + h) - f(lo)) / h;
    let slack = 1e-6 * (1.0 + a.abs().max(b.abs()));

    let values = s_grid
        .iter()
        .map(|&s| {
            if truncated && (s < a - slack || s > b + slack) {
                return f64::INFINITY;
            }
            // I(s) = sup_beta (-s beta - F(beta)) with beta = -alpha
            let g = |beta: f64| -s * beta - f(beta);
            let (k, _) = fv
                .iter()
                .enumerate()
                .map(|(k, v)| (k, -s * betas[k] - v))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            let left = betas[k.saturating_sub(1)];
            let right = betas[(k + 1).min(n - 1)];
            let (_, best) = golden_max(&g, left, right);
            best.max(-s * betas[k] - fv[k])
        })
        .collect();
    Ok(RateFunction {
        s_grid: s_grid.to_vec(),
        values,
        a,
        b,
    })
}

/// `max |I(-s) - I(s) - s|` over grid points whose mirror is also on the grid
/// and where both values are finite.
pub fn fluctuation_relation_residual(rate: &RateFunction) -> f64 {
    let mut worst = 0.0f64;
    for (k, &s) in rate.s_grid.iter().enumerate() {
        let v = rate.values[k];
        if !v.is_finite() {
            continue;
        }
        if let Some(m) = rate.value_at(-s) {
            if m.is_finite() {
                worst = worst.max((m - v - s).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn quadratic_pair() {
        let s = grid(-2.0, 2.0, 81);
        let rate = legendre(|a| a * a / 2.0, (-5.0, 5.0), &s, true).unwrap();
        for (x, v) in s.iter().zip(&rate.values) {
            assert!((v - x * x / 2.0).abs() < 2e-6, "{x} {v}");
        }
        assert!(rate.convexity_residual() <= 1e-8);
        let (smin, imin) = rate.minimum().unwrap();
        assert!(smin.abs() < 1e-12 && imin.abs() < 1e-12);
    }

    #[test]
    fn linear_pressure_is_degenerate() {
        let k = 0.7;
        let s = grid(0.0, 1.4, 15);
        let rate = legendre(|a| -k * a, (-3.0, 3.0), &s, true).unwrap();
        assert!(rate.value_at(0.7).unwrap().abs() < 1e-9);
        for (x, v) in s.iter().zip(&rate.values) {
            if (x - k).abs() > 1e-9 {
                assert!(v.is_infinite());
            }
        }
        let bounded = legendre(|a| -k * a, (-3.0, 3.0), &s, false).unwrap();
        assert!((bounded.value_at(0.0).unwrap() - 3.0 * 0.7).abs() < 1e-9);
    }

    #[test]
    fn gallavotti_cohen_symmetry_propagates() {
        let c = 0.8;
        let s = grid(-1.5, 1.5, 61);
        let w = 2.0;
        let rate = legendre(|a| c * a * (a - 1.0), (-w, 1.0 + w), &s, true).unwrap();
        assert!(fluctuation_relation_residual(&rate) <= 1e-6);
        for (x, v) in s.iter().zip(&rate.values) {
            assert!((v - (c - x).powi(2) / (4.0 * c)).abs() < 2e-6);
        }
    }

    #[test]
    fn point_rate_function() {
        let rate = RateFunction {
            s_grid: vec![-1.0, 0.0, 1.0],
            values: vec![f64::INFINITY, 0.0, f64::INFINITY],
            a: 0.0,
            b: 0.0,
        };
        assert_eq!(fluctuation_relation_residual(&rate), 0.0);
    }

    #[test]
    fn exact_exponential_samples() {
        let samples: Vec<(f64, f64)> = grid(1.0, 20.0, 40)
            .into_iter()
            .map(|t| (t, (0.37 * t + 0.2).exp()))
            .collect();
        let ge = gartner_ellis(&samples).unwrap();
        assert!((ge.estimate - 0.37).abs() < 1e-12);
        assert!(ge.converged && ge.linearity_residual < 1e-12);
    }

    #[test]
    fn oscillating_samples_flagged() {
        let samples: Vec<(f64, f64)> = grid(1.0, 20.0, 40)
            .into_iter()
            .map(|t| (t, 1.0 + 0.3 * t.sin().powi(2)))
            .collect();
        let ge = gartner_ellis(&samples).unwrap();
        assert!(!ge.converged);
        assert!(matches!(
            gartner_ellis(&[(0.0, 1.0); 3]),
            Err(Error::InvalidArgument(_))
        ));
        let mut bad = samples.clone();
        bad[3].1 = 0.0;
        assert!(matches!(gartner_ellis(&bad), Err(Error::NonPositiveSample { .. })));
    }
}
