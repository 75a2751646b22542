//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so every line is printed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use entropic::classical::{
    exchange_of_limits, finite_n_constant, gc_symmetry_residual, path_cgf_enumerated,
    path_cgf_exact, pressure, rate_function_gc_residual, MarkovGibbsModel,
};
use entropic::functionals::{
    ancilla_simulate, es_symmetry_residual, f2tm, f_ancilla, f_qpsc, measure_reflection_check,
    sandwich_bounds_check, two_time_measure,
};
use entropic::modular::{
    additive_cocycle_residual, connes_cocycle, connes_cocycle_dyson, entropy_balance_residual,
    log_delta_residual, multiplicative_cocycle_check, omega_sigma_residual,
};
use entropic::numkernel::random::{random_density, seeded};
use entropic::numkernel::{ComplexMatrix, DensityMatrix, C64};
use entropic::qsystem::{demo_system, random_open_system, FiniteQuantumSystem};
use entropic::tolerances::Tolerances;
use entropic::transfer::{
    adjoint_residual, asymptotic_residual, cesaro_quadrature, dominant_pole,
    l_half_kernel_residual, rep_2tm, rep_ancilla, rep_qpsc, sun_tuluz_residual, tpar_l_residual,
    SpectralNess,
};
use rand::Rng;

type Outcome = entropic::Result<(bool, String)>;

const DEMO_SEED: u64 = 2024;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn demo(real: bool) -> FiniteQuantumSystem {
    demo_system(DEMO_SEED, real).expect("demo system").into_system()
}

/// d = 16, 8, 6, 8, 16.
fn random_systems() -> Vec<FiniteQuantumSystem> {
    let shapes: [(u64, usize, &[usize], bool); 5] = [
        (11, 2, &[2, 4], true),
        (12, 2, &[2, 2], false),
        (13, 3, &[2], false),
        (14, 2, &[4], true),
        (15, 4, &[2, 2], false),
    ];
    shapes
        .iter()
        .map(|&(seed, ds, dr, real)| {
            random_open_system(seed, ds, dr, 0.6, real)
                .expect("random system")
                .into_system()
        })
        .collect()
}

fn two_time_alphas() -> Vec<C64> {
    let mut a: Vec<C64> = (0..11).map(|k| c(0.0, -2.0 + 0.4 * k as f64)).collect();
    a.extend((0..10).map(|k| c(0.05 + 0.1 * k as f64, 0.0)));
    a
}

fn criterion_1() -> Outcome {
    let mut systems = vec![demo(true)];
    systems.extend(random_systems());
    let ts = [0.3, 0.9, 1.5, 2.2, 3.0];
    let alphas = two_time_alphas();
    let mut worst = 0.0f64;
    for sys in &systems {
        for &t in &ts {
            let q = two_time_measure(sys, sys.omega(), t)?;
            for &a in &alphas {
                worst = worst.max((f2tm(sys, sys.omega(), t, a) - q.laplace(a)).norm());
            }
        }
    }
    Ok((
        worst <= 1e-9,
        format!("max |f2tm - Laplace(Q)| = {worst:.2e} over 6 systems x 5 t x 21 alpha (tol 1e-9)"),
    ))
}

fn criterion_2() -> Outcome {
    let sys = demo(true);
    let mut rng = seeded(77);
    let states = vec![
        sys.omega().clone(),
        sys.evolve_state(sys.omega(), 0.7)?,
        random_density(&mut rng, sys.dim(), 0.3, false),
    ];
    let rho = DensityMatrix::new(ComplexMatrix::from_rows(&[
        vec![c(0.6, 0.0), c(0.3, 0.1)],
        vec![c(0.3, -0.1), c(0.4, 0.0)],
    ])?)?;
    let (mut est, mut diag, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let nu = &states[k % states.len()];
        let alpha = c(0.0, -2.0 + 4.0 * k as f64 / 49.0);
        let t = 0.2 + 2.8 * ((7 * k) % 50) as f64 / 49.0;
        let run = ancilla_simulate(&sys, nu, &rho, alpha, t)?;
        est = est.max(run.estimate_residual);
        diag = diag.max(run.diagonal_residual);
        oracle = oracle.max((run.f_estimate - f_ancilla(&sys, nu, t, alpha)).norm());
    }
    Ok((
        est <= 1e-9 && oracle <= 1e-9 && diag <= 1e-10,
        format!(
            "50 triples: |estimate - F^anc| = {oracle:.2e} (tol 1e-9), diagonal drift = {diag:.2e} (tol 1e-10)"
        ),
    ))
}

fn criterion_3() -> Outcome {
    let systems = vec![demo(true), random_open_system(21, 2, &[2, 2], 0.6, false)?.into_system()];
    let grid = [0.0, 0.8, 1.5];
    let alphas: Vec<C64> = (0..=10).map(|k| c(0.1 * k as f64, 0.0)).collect();
    let (mut w2, mut wq, mut wa) = (0.0f64, 0.0f64, 0.0f64);
    for sys in &systems {
        for &big_t in &grid {
            let nu = sys.evolve_state(sys.omega(), big_t)?;
            for &t in &grid {
                for &a in &alphas {
                    w2 = w2.max((rep_2tm(sys, t, a)? - f2tm(sys, sys.omega(), t, a)).norm());
                    wq = wq.max((rep_qpsc(sys, big_t, t, a)? - f_qpsc(sys, &nu, t, a)).norm());
                    wa = wa.max((rep_ancilla(sys, big_t, t, a)? - f_ancilla(sys, &nu, t, a)).norm());
                }
            }
        }
    }
    let worst = w2.max(wq).max(wa);
    Ok((
        worst <= 1e-8,
        format!("rep vs trace: 2tm {w2:.2e}, qpsc {wq:.2e}, ancilla {wa:.2e} on d = 32, 8 (tol 1e-8)"),
    ))
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut systems = vec![demo(true)];
    systems.push(random_open_system(31, 2, &[2, 2], 0.6, false)?.into_system());
    let mut failures = Vec::new();
    let mut note = |name: &str, value: f64, bound: f64| {
        if !(value <= bound) {
            failures.push(format!("{name} = {value:.2e} > {bound:.0e}"));
        }
    };
    let mut count = 0;
    for sys in &systems {
        for alpha in [c(0.0, 0.4), c(0.0, -1.1)] {
            for (t, s) in [(0.7, 1.3), (-0.5, 0.9)] {
                for r in multiplicative_cocycle_check(sys, t, s, alpha, &tol)? {
                    count += 1;
                    note(&r.identity, r.residual, r.tolerance);
                }
            }
        }
        for (t, s) in [(0.4, 1.1), (1.5, -0.6)] {
            note("additive_cocycle", additive_cocycle_residual(sys, t, s)?, tol.get("additive_cocycle"));
        }
        for t in [0.5, 2.0] {
            note("entropy_balance", entropy_balance_residual(sys, t)?, tol.get("entropy_balance"));
            note("log_delta", log_delta_residual(sys, t)?, tol.get("log_delta"));
        }
        note("omega_sigma", omega_sigma_residual(sys)?, tol.get("omega_sigma"));
        count += 7;
    }
    let sys = &systems[0];
    let (t, alpha) = (0.3, c(0.0, 0.25));
    let exact = connes_cocycle(&sys.evolve_state(sys.omega(), t)?, sys.omega(), alpha);
    let dyson = connes_cocycle_dyson(sys, t, alpha, 4)?.max_abs_diff(&exact);
    note("dyson", dyson, tol.get("dyson"));
    count += 1;
    let ok = failures.is_empty();
    Ok((
        ok,
        if ok {
            format!("{count} modular identities within tolerance; Dyson order 4 gap {dyson:.2e}")
        } else {
            failures.join("; ")
        },
    ))
}

fn criterion_5() -> Outcome {
    let sys = demo(true);
    let control = demo(false);
    let alphas = two_time_alphas();
    let (mut es, mut refl, mut ctrl) = (0.0f64, 0.0f64, f64::INFINITY);
    for t in [0.5, 1.0, 2.0] {
        es = es.max(es_symmetry_residual(&sys, t, &alphas));
        refl = refl.max(measure_reflection_check(&sys, t)?);
        ctrl = ctrl.min(es_symmetry_residual(&control, t, &alphas));
    }
    Ok((
        sys.is_tri() && es <= 1e-9 && refl <= 1e-8 && ctrl > 1e-4,
        format!("ES symmetry {es:.2e} (tol 1e-9), reflection {refl:.2e} (tol 1e-8), non-TRI control {ctrl:.2e} (> 1e-4)"),
    ))
}

fn criterion_6() -> Outcome {
    let sys = demo(true);
    let mut worst = f64::INFINITY;
    for big_t in [0.0, 1.0, 2.0] {
        for t in [0.5, 1.5] {
            for a in [-0.4, 0.3, 0.45] {
                worst = worst.min(sandwich_bounds_check(&sys, big_t, t, a, 1e-10)?.min_slack());
            }
        }
    }
    Ok((worst >= -1e-10, format!("min slack over 18 points = {worst:.3e} (>= -1e-10)")))
}

fn criterion_7() -> Outcome {
    let sys = demo(true);
    let kernel = l_half_kernel_residual(&sys)?;
    let alphas = [c(0.3, 0.0), c(1.0, 0.0), c(0.25, 0.7), c(0.0, -0.4), c(-0.5, 0.0)];
    let (mut adj, mut tpar) = (0.0f64, 0.0f64);
    for &a in &alphas {
        adj = adj.max(adjoint_residual(&sys, a)?);
        for t in [-3.0, -1.5, 0.5, 3.0] {
            tpar = tpar.max(tpar_l_residual(&sys, a, t)?);
        }
    }
    let (mut sim, mut spec) = (0.0f64, 0.0f64);
    for a in [c(0.3, 0.0), c(0.0, 0.4)] {
        let (i, s) = sun_tuluz_residual(&sys, a)?;
        sim = sim.max(i);
        spec = spec.max(s);
    }
    Ok((
        kernel <= 1e-10 && adj <= 1e-10 && tpar <= 1e-8 && sim <= 1e-9 && spec <= 1e-8,
        format!(
            "L_1/2 Omega {kernel:.1e}, adjoint {adj:.1e}, tpar-L {tpar:.1e}, similarity {sim:.1e}, spectra {spec:.1e}"
        ),
    ))
}

fn criterion_8() -> Outcome {
    let sys = demo(true);
    let ness = SpectralNess::new(&sys)?;
    let rho = ness.density();
    let pinched = sys.ness_cesaro();
    let quad = cesaro_quadrature(&sys, 2000.0, 0.05);
    let mut observables = vec![sys.hamiltonian().matrix().clone(), sys.entropy_observable()];
    let mut rng = seeded(8);
    observables.push(random_density(&mut rng, sys.dim(), 0.5, false).matrix().clone());
    let (mut vs_pinch, mut vs_quad) = (rho.max_abs_diff(pinched.matrix()), rho.max_abs_diff(&quad));
    for a in &observables {
        let w = ness.expectation(a);
        vs_pinch = vs_pinch.max((w - pinched.expectation(a)).norm());
        vs_quad = vs_quad.max((w - entropic::numkernel::trace_product(&quad, a)).norm());
    }
    Ok((
        vs_pinch <= 1e-9 && vs_quad <= 5e-3,
        format!(
            "spectral vs pinching {vs_pinch:.2e} (tol 1e-9), vs T=2000 quadrature {vs_quad:.2e} (tol 5e-3), kernel dim {}",
            ness.kernel_dim
        ),
    ))
}

/// `S J S^{-1}` with a random well-conditioned `S`.
fn similar(seed: u64, j: &ComplexMatrix) -> entropic::Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let mut rng = seeded(seed);
    let n = j.nrows();
    let noise = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let s = &ComplexMatrix::identity(n) + &noise.scale_real(0.8);
    let s_inv = s.inverse()?;
    Ok((s.matmul(j).matmul(&s_inv), s, s_inv))
}

fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn criterion_9() -> Outcome {
    let pole = c(0.3, -0.1);
    let rest = [c(-0.7, -0.6), c(1.1, -0.8), c(0.0, -1.0), c(-1.4, -0.75), c(0.6, -1.3)];
    let t_grid: Vec<f64> = (0..=25).map(|k| 5.0 + k as f64).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    for (case, seed) in [("simple", 91u64), ("simple", 92), ("simple", 93), ("jordan", 94)] {
        let jordan = case == "jordan";
        let mut diag = vec![pole];
        diag.extend_from_slice(&rest);
        if jordan {
            diag[1] = pole;
        }
        let mut j = ComplexMatrix::diag(&diag);
        if jordan {
            j[(0, 1)] = c(1.0, 0.0);
        }
        let (m, s, s_inv) = similar(seed, &j)?;
        let mut rng = seeded(seed + 100);
        let (phi, psi) = (random_vec(&mut rng, 6), random_vec(&mut rng, 6));
        // known projector onto the block of `pole`
        let size = if jordan { 2 } else { 1 };
        let e = ComplexMatrix::from_fn(6, 6, |i, k| c((i == k && i < size) as u8 as f64, 0.0));
        let p = s.matmul(&e).matmul(&s_inv);
        let residue = inner(&phi, &p.mul_vec(&psi));
        let mut nil = ComplexMatrix::zeros(6, 6);
        if jordan {
            nil[(0, 1)] = c(1.0, 0.0);
        }
        let slope = inner(&phi, &s.matmul(&nil).matmul(&s_inv).mul_vec(&psi));
        let r = dominant_pole(&m, &phi, &psi)?;
        let fit = asymptotic_residual(&m, &phi, &psi, &r, &t_grid)?;
        let pole_err = (r.pole - pole).norm();
        let res_err = (r.residue - residue).norm() / (1.0 + residue.norm());
        let order_ok = r.order == size;
        let degree_err = if jordan {
            match r.coefficients.get(1) {
                Some(c1) if r.coefficients.len() == 2 => (c1 - slope).norm() / (1.0 + slope.norm()),
                _ => f64::INFINITY,
            }
        } else {
            0.0
        };
        let degree_ok = degree_err <= 1e-8;
        let runner = diag[size..].iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let gap_ok = (r.gap - (pole.im - runner)).abs() <= 1e-8;
        let this = pole_err <= 1e-10 && res_err <= 1e-9 && order_ok && degree_ok && gap_ok && fit.bounded;
        ok &= this;
        lines.push(format!(
            "{case}: pole {pole_err:.1e} order {} residue {res_err:.1e} degree-1 {degree_err:.1e} gap {:.3} K {:.2e}",
            r.order, r.gap, fit.k
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn criterion_10() -> Outcome {
    let models = vec![
        ("two-state", MarkovGibbsModel::two_state(0.1, 0.2)?),
        ("random 4-state", MarkovGibbsModel::random(11, 4)?),
    ];
    let alphas: Vec<f64> = (0..=50).map(|k| -2.0 + 0.1 * k as f64).collect();
    let s_grid: Vec<f64> = (0..=200).map(|k| -1.0 + 0.01 * k as f64).collect();
    let probe = [-1.5, -0.5, 0.25, 0.5, 1.3, 2.5];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, model) in &models {
        let gc = gc_symmetry_residual(model, &alphas)?;
        let mut finite = 0.0f64;
        let mut fitted = 0.0f64;
        for &a in &probe {
            finite = finite.max((path_cgf_exact(model, a, 400)? - pressure(model, a)?).abs());
            fitted = fitted.max(finite_n_constant(model, a, &[50, 100, 200, 400])? / 400.0);
        }
        let rate = rate_function_gc_residual(model, &s_grid)?;
        let mut enumeration = 0.0f64;
        for &a in &[-0.5, 0.5, 1.3] {
            for n in 1..=12 {
                enumeration = enumeration
                    .max((path_cgf_exact(model, a, n)? - path_cgf_enumerated(model, a, n)?).abs());
            }
        }
        let k = model.n();
        let mut skewed: Vec<f64> = (0..k).map(|i| (i + 1) as f64).collect();
        let total: f64 = skewed.iter().sum();
        skewed.iter_mut().for_each(|v| *v /= total);
        let initials = vec![model.stationary().to_vec(), vec![1.0 / k as f64; k], skewed];
        let n_grid: Vec<usize> = (1..=8).map(|i| 50 * i).collect();
        let mut exchange = 0.0f64;
        for &a in &probe {
            exchange = exchange.max(exchange_of_limits(model, a, &initials, &n_grid)?.residual);
        }
        let this = gc <= 1e-12 && finite <= 5e-3 && fitted <= 5e-3 && rate <= 1e-6 && enumeration <= 1e-12 && exchange <= 1e-4;
        ok &= this;
        lines.push(format!(
            "{name}: GC {gc:.1e}, n=400 {finite:.1e} (C/n {fitted:.1e}), rate GC {rate:.1e}, enumeration {enumeration:.1e}, initial measure {exchange:.1e}"
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_entropic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    match status.code() {
        Some(0) => Ok(()),
        other => Err(format!("`{}` exited with {other:?}", args.join(" "))),
    }
}

fn dir_contents(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        out.push((name, std::fs::read(&path).map_err(|e| e.to_string())?));
    }
    out.sort();
    Ok(out)
}

fn criterion_11() -> Result<(bool, String), String> {
    let root: PathBuf = std::env::temp_dir().join(format!("entropic-acceptance-{}", std::process::id()));
    let runs: [&[&str]; 4] = [
        &["run", "two-time", "--preset", "demo32", "--seed", "5", "--t", "0.5,1.5", "--alpha", "0:1:6"],
        &["run", "ancilla", "--preset", "random-real-seeded", "--seed", "9"],
        &["run", "fluctuation-check", "--preset", "random-real-seeded", "--seed", "9", "--t", "0.5,1"],
        &["run", "classical-pref", "--model", "random4", "--seed", "3", "--alpha", "-1:2:61"],
    ];
    let mut files = 0;
    let mut mismatches = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let a = root.join(format!("{k}a"));
        let b = root.join(format!("{k}b"));
        run_cli(args, &a)?;
        run_cli(args, &b)?;
        let (da, db) = (dir_contents(&a)?, dir_contents(&b)?);
        files += da.len();
        if da != db {
            mismatches.push(args[1].to_string());
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    Ok((
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("4 experiments run twice, {files} files byte-identical")
        } else {
            format!("outputs differ for {}", mismatches.join(", "))
        },
    ))
}

fn report(n: usize, title: &str, budget: Option<f64>, f: impl FnOnce() -> Result<(bool, String), String>) -> bool {
    let start = Instant::now();
    let result = f();
    let secs = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let timing = match budget {
        Some(b) => {
            if secs > b {
                passed = false;
                detail.push_str(&format!("; runtime over budget {b} s"));
            }
            format!("{secs:.1} s of {b} s")
        }
        None => format!("{secs:.1} s"),
    };
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!("criterion {n:>2} [{verdict}] {title}: {detail} ({timing})\n");
    // written to the raw stream so the line shows even when output is captured
    let _ = std::io::stderr().write_all(line.as_bytes());
    passed
}

fn lift(o: Outcome) -> Result<(bool, String), String> {
    o.map_err(|e| e.to_string())
}

fn main() {
    let mut all = true;
    all &= report(1, "two-time oracle", Some(60.0), || lift(criterion_1()));
    all &= report(2, "ancilla simulation", Some(30.0), || lift(criterion_2()));
    all &= report(3, "Liouvillean representations", Some(120.0), || lift(criterion_3()));
    all &= report(4, "modular algebra", Some(90.0), || lift(criterion_4()));
    all &= report(5, "fluctuation relations", None, || lift(criterion_5()));
    all &= report(6, "sandwich bounds", None, || lift(criterion_6()));
    all &= report(7, "alpha-Liouvillean structure", None, || lift(criterion_7()));
    all &= report(8, "spectral NESS", None, || lift(criterion_8()));
    all &= report(9, "dominant resonance", None, || lift(criterion_9()));
    all &= report(10, "classical strong PREF", Some(120.0), || lift(criterion_10()));
    all &= report(11, "CLI determinism", None, criterion_11);
    if !all {
        let _ = std::io::stderr().write_all(b"acceptance: some criteria failed\n");
        std::process::exit(1);
    }
    let _ = std::io::stderr().write_all(b"acceptance: all 11 criteria passed\n");
}
