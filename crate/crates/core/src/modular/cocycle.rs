use crate::error::{Error, Result};
use crate::modular::{analytic_flow, GnsSpace};
use crate::numkernel::quad::{gauss_legendre, integration_matrix};
use crate::numkernel::{unvec, vec_row_major, ComplexMatrix, DensityMatrix, C64, I};
use crate::qsystem::FiniteQuantumSystem;
use crate::report::Residual;
use crate::tolerances::Tolerances;

/// Largest Dyson order accepted by [`connes_cocycle_dyson`].
pub const MAX_DYSON_ORDER: usize = 4;
const DYSON_NODES: usize = 24;

/// `[D mu : D nu]_alpha = mu^alpha nu^{-alpha}`.
pub fn connes_cocycle(mu: &DensityMatrix, nu: &DensityMatrix, alpha: C64) -> ComplexMatrix {
    mu.power(alpha).matmul(&nu.power(-alpha))
}

/// The cocycle read off from `Delta_{mu|nu}^alpha Delta_nu^{-alpha}` acting on `vec(I)`.
pub fn connes_cocycle_via_gns(mu: &DensityMatrix, nu: &DensityMatrix, alpha: C64) -> ComplexMatrix {
    let d = mu.dim();
    let id = vec_row_major(&ComplexMatrix::identity(d));
    let step = GnsSpace::relative_modular(nu, nu, -alpha).apply(&id);
    let out = GnsSpace::relative_modular(mu, nu, alpha).apply(&step);
    unvec(&out, d, d).expect("square")
}

/// Truncated Dyson series for `[D omega_t : D omega]_alpha`,
/// `I + sum_n (it)^n \int_{theta_1 <= ... <= theta_n} tau^{-t theta_n}(W) ... tau^{-t theta_1}(W)`
/// with `W = omega^alpha V omega^{-alpha} - V`. Simplex integrals use nested
/// Gauss-Legendre quadrature on 24 nodes.
pub fn connes_cocycle_dyson(
    sys: &FiniteQuantumSystem,
    t: f64,
    alpha: C64,
    order: usize,
) -> Result<ComplexMatrix> {
    if order == 0 || order > MAX_DYSON_ORDER {
        return Err(Error::CostGuard(format!(
            "Dyson order {order} outside 1..={MAX_DYSON_ORDER}"
        )));
    }
    let pert = sys.require_perturbation()?;
    let omega = sys.omega();
    let comm = omega.matrix().commutator(pert.h_free.matrix()).norm_max();
    if comm > 1e-10 {
        return Err(Error::NonCommutingFreeDynamics(comm));
    }
    let v = pert.v.matrix();
    let w = &analytic_flow(omega, alpha, v) - v;
    let d = sys.dim();
    let (x, wts) = gauss_legendre(DYSON_NODES, 0.0, 1.0);
    let s = integration_matrix(&x);
    // g_k = tau^{-t x_k}(W) = e^{-i t x_k H} W e^{i t x_k H}
    let g: Vec<ComplexMatrix> = x.iter().map(|&xk| sys.evolve_matrix(&w, t * xk)).collect();
    let mut prev: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(d); DYSON_NODES];
    let mut total = ComplexMatrix::identity(d);
    let mut coeff = C64::new(1.0, 0.0);
    for _ in 0..order {
        coeff *= I * t;
        let gi: Vec<ComplexMatrix> = g.iter().zip(&prev).map(|(gk, pk)| gk.matmul(pk)).collect();
        let mut at_one = ComplexMatrix::zeros(d, d);
        for (wk, m) in wts.iter().zip(&gi) {
            at_one = &at_one + &m.scale_real(*wk);
        }
        total = &total + &at_one.scale(coeff);
        prev = s
            .iter()
            .map(|row| {
                let mut acc = ComplexMatrix::zeros(d, d);
                for (skj, m) in row.iter().zip(&gi) {
                    acc = &acc + &m.scale_real(*skj);
                }
                acc
            })
            .collect();
    }
    Ok(total)
}

/// `[D mu:D nu]_alpha [D nu:D omega]_alpha = [D mu:D omega]_alpha`.
pub fn chain_rule_residual(
    mu: &DensityMatrix,
    nu: &DensityMatrix,
    omega: &DensityMatrix,
    alpha: C64,
) -> f64 {
    let lhs = connes_cocycle_via_gns(mu, nu, alpha).matmul(&connes_cocycle_via_gns(nu, omega, alpha));
    lhs.max_abs_diff(&connes_cocycle_via_gns(mu, omega, alpha))
}

/// `[D mu:D nu]_{a+b} = [D mu:D nu]_a sigma_nu^{-ia}([D mu:D nu]_b)`.
pub fn gencocycle_residual(mu: &DensityMatrix, nu: &DensityMatrix, a: C64, b: C64) -> f64 {
    let lhs = connes_cocycle_via_gns(mu, nu, a + b);
    let rhs = connes_cocycle_via_gns(mu, nu, a)
        .matmul(&analytic_flow(nu, a, &connes_cocycle_via_gns(mu, nu, b)));
    lhs.max_abs_diff(&rhs)
}

/// Multiplicative cocycle relation
/// `[D omega_{t+s}:D omega]_alpha = tau^{-t}([D omega_s:D omega]_alpha) [D omega_t:D omega]_alpha`,
/// together with the chain rule and the cocycle law in `alpha` on the same states.
pub fn multiplicative_cocycle_check(
    sys: &FiniteQuantumSystem,
    t: f64,
    s: f64,
    alpha: C64,
    tol: &Tolerances,
) -> Result<Vec<Residual>> {
    let omega = sys.omega();
    let w_t = sys.evolve_state(omega, t)?;
    let w_s = sys.evolve_state(omega, s)?;
    let w_ts = sys.evolve_state(omega, t + s)?;
    let lhs = connes_cocycle_via_gns(&w_ts, omega, alpha);
    let rhs = sys
        .evolve_matrix(&connes_cocycle_via_gns(&w_s, omega, alpha), t)
        .matmul(&connes_cocycle_via_gns(&w_t, omega, alpha));
    let tom = lhs.max_abs_diff(&rhs);
    let chain = chain_rule_residual(&w_ts, &w_t, omega, alpha);
    let gen = gencocycle_residual(&w_t, omega, alpha, alpha * 0.5 + C64::new(0.0, 0.3));
    let tag = |r: Residual| r.with("t", t).with("s", s).with("alpha_re", alpha.re).with("alpha_im", alpha.im);
    Ok(vec![
        tag(Residual::new("multiplicative_cocycle", tom, tol.get("multiplicative_cocycle"))),
        tag(Residual::new("chain_rule", chain, tol.get("chain_rule"))),
        tag(Residual::new("gencocycle", gen, tol.get("multiplicative_cocycle"))),
    ])
}
