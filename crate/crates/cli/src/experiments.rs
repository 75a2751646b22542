//! One handler per experiment. Each builds its inputs from the merged config,
//! writes CSV data through a [`Sink`] and records every identity check it runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use entropic::classical::{
    classical_rate_function, classical_transfer_spectrum, cocycle_measure, evans_searles_check,
    exchange_of_limits, gc_symmetry_residual, path_cgf_enumerated, path_cgf_exact, pressure,
    pressure_csv, MarkovGibbsModel, ModelSpec,
};
use entropic::functionals::{
    ancilla_simulate, es_symmetry_residual, fluctuation_relation_residual,
    measure_reflection_check, sandwich_bounds_check, two_time_measure, FunctionalGrid,
    FunctionalKind,
};
use entropic::numkernel::{multiset_distance, ComplexMatrix, DensityMatrix, C64};
use entropic::qsystem::{preset, FiniteQuantumSystem, SystemSpec};
use entropic::report::Residual;
use entropic::tolerances::Tolerances;
use entropic::transfer::{
    adjoint_residual, alpha_liouvillean, cesaro_quadrature, l_half_kernel_residual, rep_qpsc,
    resonance_curve, sun_tuluz_residual, tpar_l_residual, QuantumFamily, ResonanceFamily,
    SpectralNess,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{load_structured, Axis, Experiment, ExperimentConfig, GridSpec};
use crate::output::{to_json, Sink};
use crate::CliError;

/// Built-in Markov models accepted by `--model`.
pub const MODELS: &[&str] = &["two-state", "random4"];

type Params = BTreeMap<&'static str, Value>;

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    tol: Tolerances,
    sink: Sink,
    params: Params,
}

impl Ctx<'_> {
    fn check(&mut self, r: Residual) {
        if !r.passed {
            log::warn!("{} failed: {:.3e} > {:.1e}", r.identity, r.residual, r.tolerance);
        }
        self.sink.check(r);
    }

    fn residual(&self, key: &str, value: f64) -> Residual {
        Residual::new(key, value, self.tol.get(key))
    }

    fn grid(&mut self, key: &'static str, spec: &Option<GridSpec>, default: GridSpec) -> Result<Vec<f64>, CliError> {
        let g = spec.clone().unwrap_or(default);
        let v = g.expand(key)?;
        self.params.insert(key, json!(v));
        Ok(v)
    }

    fn alphas(&mut self, default: GridSpec, axis: Axis) -> Result<Vec<C64>, CliError> {
        let g = self.cfg.alpha.clone().unwrap_or(default);
        let v = g.expand_complex("alpha", axis)?;
        self.params
            .insert("alpha", json!(v.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>()));
        Ok(v)
    }

    fn real_alphas(&mut self, default: GridSpec) -> Result<Vec<f64>, CliError> {
        let a = self.alphas(default, Axis::Real)?;
        if a.iter().any(|z| z.im != 0.0) {
            return Err(CliError::Config {
                path: "alpha.axis".into(),
                message: format!("{} takes a real alpha grid", self.experiment().name()),
            });
        }
        Ok(a.into_iter().map(|z| z.re).collect())
    }

    fn experiment(&self) -> Experiment {
        self.cfg.experiment.expect("experiment set by merge")
    }

    fn system(&mut self) -> Result<FiniteQuantumSystem, CliError> {
        let cfg = self.cfg;
        if cfg.model.is_some() {
            return Err(CliError::Config {
                path: "model".into(),
                message: format!("{} runs on a quantum system, not a Markov model", self.experiment().name()),
            });
        }
        let seed_err = |what: &str| CliError::Config {
            path: "seed".into(),
            message: format!("{what} uses randomness; pass --seed"),
        };
        let open = match (&cfg.preset, &cfg.system) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config {
                    path: "system".into(),
                    message: "give either a preset or a system file".into(),
                })
            }
            (None, Some(path)) => {
                let spec: SystemSpec = load_structured(path)?;
                if spec.uses_randomness() && cfg.seed.is_none() {
                    return Err(seed_err("system file"));
                }
                self.params.insert("system", json!(path.display().to_string()));
                spec.build(cfg.seed)?
            }
            (preset_name, None) => {
                let name = preset_name.as_deref().unwrap_or("demo32");
                let seed = match (name, cfg.seed) {
                    (_, Some(s)) => s,
                    ("pauli-z", None) => 0,
                    _ => return Err(seed_err(&format!("preset `{name}`"))),
                };
                self.params.insert("preset", json!(name));
                preset(name, seed).map_err(|e| CliError::Config {
                    path: "preset".into(),
                    message: e.to_string(),
                })?
            }
        };
        self.params.insert("seed", json!(cfg.seed));
        let sys = open.into_system();
        log::info!("system dimension {}", sys.dim());
        Ok(sys)
    }
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<bool, CliError> {
    let mut tol = Tolerances::default();
    for (k, v) in &cfg.tolerances {
        tol.set(k, *v).map_err(|message| CliError::Config {
            path: format!("tolerances.{k}"),
            message,
        })?;
    }
    let experiment = cfg.experiment.ok_or_else(|| CliError::Config {
        path: "experiment".into(),
        message: "missing".into(),
    })?;
    let mut ctx = Ctx {
        cfg,
        tol,
        sink: Sink::new(out)?,
        params: Params::new(),
    };
    let expected: Vec<&str> = match experiment {
        Experiment::TwoTime => two_time(&mut ctx)?,
        Experiment::Ancilla => ancilla(&mut ctx)?,
        Experiment::Qpsc => qpsc(&mut ctx)?,
        Experiment::TransferSpectrum => transfer_spectrum(&mut ctx)?,
        Experiment::ResonanceCurve => resonance(&mut ctx)?,
        Experiment::Ness => ness(&mut ctx)?,
        Experiment::ClassicalPref => classical_pref(&mut ctx)?,
        Experiment::FluctuationCheck => fluctuation_check(&mut ctx)?,
    };
    ctx.params.insert("tolerances", serde_json::to_value(&ctx.tol).map_err(|e| CliError::Internal(e.to_string()))?);
    ctx.sink.finish(experiment.name(), &ctx.params, &expected)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn tagged(prefix: &str, tags: &[(&str, usize)]) -> String {
    let mut s = prefix.to_string();
    for (k, i) in tags {
        let _ = write!(s, "_{k}{i:03}");
    }
    s.push_str(".csv");
    s
}

fn index_csv(header: &str, rows: &[(String, Vec<f64>)]) -> String {
    let mut out = format!("file,{header}\n");
    for (name, vals) in rows {
        out.push_str(name);
        for v in vals {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

fn two_time(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let ts = ctx.grid("t", &ctx.cfg.t.clone(), GridSpec::values(&[0.5, 1.0, 2.0]))?;
    let alphas = ctx.alphas(GridSpec::range(0.0, 1.0, 21), Axis::Real)?;
    let omega = sys.omega();
    let mut index = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let measure = two_time_measure(&sys, omega, t)?;
        let grid = FunctionalGrid::evaluate(FunctionalKind::TwoTime, &sys, omega, "omega", t, &alphas);
        let oracle = grid
            .alphas
            .iter()
            .zip(&grid.values)
            .map(|(&a, &f)| rel(f, measure.laplace(a)))
            .fold(0.0, f64::max);
        let r = ctx.residual("oracle_2tm", oracle).with("t", t);
        ctx.check(r);
        let reference = alphas
            .par_iter()
            .zip(&grid.values)
            .map(|(&a, &f)| {
                let q = FunctionalKind::Qpsc.evaluate(&sys, omega, t, a);
                let n = FunctionalKind::Ancilla.evaluate(&sys, omega, t, a);
                rel(q, f).max(rel(n, f))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
        let r = ctx.residual("reference_identical", reference).with("t", t);
        ctx.check(r);
        let fname = tagged("f2tm", &[("t", k)]);
        let mname = tagged("measure", &[("t", k)]);
        ctx.sink.write(&fname, &grid.to_csv())?;
        ctx.sink.write(&mname, &measure.to_csv())?;
        index.push((fname, vec![t]));
        index.push((mname, vec![t]));
    }
    ctx.sink.write("index.csv", &index_csv("t", &index))?;
    Ok(vec!["oracle_2tm", "reference_identical"])
}

fn ancilla_probe() -> Result<DensityMatrix, CliError> {
    let rho = ComplexMatrix::from_rows(&[
        vec![C64::new(0.6, 0.0), C64::new(0.3, 0.1)],
        vec![C64::new(0.3, -0.1), C64::new(0.4, 0.0)],
    ])?;
    Ok(DensityMatrix::new(rho)?)
}

fn ancilla(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let big_ts = ctx.grid("T", &ctx.cfg.big_t.clone(), GridSpec::values(&[0.0, 1.0]))?;
    let ts = ctx.grid("t", &ctx.cfg.t.clone(), GridSpec::values(&[0.5, 1.0]))?;
    let alphas = ctx.alphas(GridSpec::range(-2.0, 2.0, 21), Axis::Imaginary)?;
    if alphas.iter().any(|a| a.re != 0.0) {
        return Err(CliError::Config {
            path: "alpha.axis".into(),
            message: "the ancilla protocol needs an imaginary alpha grid".into(),
        });
    }
    let rho = ancilla_probe()?;
    let mut index = Vec::new();
    for (i, &big_t) in big_ts.iter().enumerate() {
        let nu = sys.evolve_state(sys.omega(), big_t)?;
        for (j, &t) in ts.iter().enumerate() {
            let grid = FunctionalGrid::evaluate(FunctionalKind::Ancilla, &sys, &nu, "omega_T", t, &alphas);
            let runs = alphas
                .par_iter()
                .map(|&a| ancilla_simulate(&sys, &nu, &rho, a, t))
                .collect::<Vec<_>>();
            let mut est = 0.0f64;
            let mut diag = 0.0f64;
            for run in runs {
                let run = run?;
                est = est.max(run.estimate_residual);
                diag = diag.max(run.diagonal_residual);
            }
            let r = ctx.residual("ancilla_estimate", est).with("T", big_t).with("t", t);
            ctx.check(r);
            let r = ctx.residual("ancilla_diagonal", diag).with("T", big_t).with("t", t);
            ctx.check(r);
            let name = tagged("ancilla", &[("T", i), ("t", j)]);
            ctx.sink.write(&name, &grid.to_csv())?;
            index.push((name, vec![big_t, t]));
        }
    }
    ctx.sink.write("index.csv", &index_csv("T,t", &index))?;
    Ok(vec!["ancilla_estimate", "ancilla_diagonal"])
}

fn qpsc(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let big_ts = ctx.grid("T", &ctx.cfg.big_t.clone(), GridSpec::values(&[0.0, 0.8, 1.5]))?;
    let ts = ctx.grid("t", &ctx.cfg.t.clone(), GridSpec::values(&[0.8, 1.5]))?;
    let alphas = ctx.alphas(GridSpec::range(0.0, 1.0, 11), Axis::Real)?;
    let mut index = Vec::new();
    for (i, &big_t) in big_ts.iter().enumerate() {
        let nu = sys.evolve_state(sys.omega(), big_t)?;
        for (j, &t) in ts.iter().enumerate() {
            let grid = FunctionalGrid::evaluate(FunctionalKind::Qpsc, &sys, &nu, "omega_T", t, &alphas);
            let reps = alphas
                .par_iter()
                .map(|&a| rep_qpsc(&sys, big_t, t, a))
                .collect::<Vec<_>>();
            let mut worst = 0.0f64;
            for (rep, &f) in reps.into_iter().zip(&grid.values) {
                worst = worst.max(rel(rep?, f));
            }
            let r = ctx.residual("liouvillean_rep", worst).with("T", big_t).with("t", t);
            ctx.check(r);
            let name = tagged("qpsc", &[("T", i), ("t", j)]);
            ctx.sink.write(&name, &grid.to_csv())?;
            index.push((name, vec![big_t, t]));
        }
    }
    ctx.sink.write("index.csv", &index_csv("T,t", &index))?;
    Ok(vec!["liouvillean_rep"])
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn transfer_spectrum(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let alphas = ctx.alphas(GridSpec::values(&[0.0, 0.25, 0.5, 0.75, 1.0]), Axis::Real)?;
    let ts = ctx.grid("t", &ctx.cfg.t.clone(), GridSpec::values(&[-3.0, -1.0, 1.0, 3.0]))?;
    let results = alphas
        .iter()
        .map(|&a| -> Result<_, CliError> {
            let spec = sorted(alpha_liouvillean(&sys, a)?.spectrum()?);
            let adj = adjoint_residual(&sys, a)?;
            let (st, st_spec) = sun_tuluz_residual(&sys, a)?;
            let tpar = ts
                .par_iter()
                .map(|&t| tpar_l_residual(&sys, a, t))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok((spec, adj, st, st_spec, tpar))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("alpha_re,alpha_im,index,lambda_re,lambda_im\n");
    for (&a, (spec, adj, st, st_spec, tpar)) in alphas.iter().zip(results) {
        for (k, l) in spec.iter().enumerate() {
            let _ = writeln!(csv, "{:.16e},{:.16e},{k},{:.16e},{:.16e}", a.re, a.im, l.re, l.im);
        }
        for (key, v) in [("adjoint", adj), ("sun_tuluz", st), ("sun_tuluz_spectrum", st_spec), ("tpar_l", tpar)] {
            let r = ctx.residual(key, v).with("alpha_re", a.re).with("alpha_im", a.im);
            ctx.check(r);
        }
    }
    ctx.sink.write("spectrum.csv", &csv)?;
    let r = ctx.residual("l_half_kernel", l_half_kernel_residual(&sys)?);
    ctx.check(r);
    // sp(L_alpha) = conj sp(L_{-conj alpha})
    let mut worst = 0.0f64;
    for &a in &alphas {
        let s1 = alpha_liouvillean(&sys, a)?.spectrum()?;
        let s2: Vec<C64> = alpha_liouvillean(&sys, -a.conj())?.spectrum()?.iter().map(|z| z.conj()).collect();
        worst = worst.max(multiset_distance(&s1, &s2));
    }
    let r = ctx.residual("sun_tuluz_spectrum", worst).with("conjugate_pairing", 1.0);
    ctx.check(r);
    Ok(vec!["adjoint", "sun_tuluz", "sun_tuluz_spectrum", "tpar_l", "l_half_kernel"])
}

fn load_model(ctx: &mut Ctx) -> Result<MarkovGibbsModel, CliError> {
    let cfg = ctx.cfg;
    let name = cfg.model.clone().ok_or_else(|| CliError::Config {
        path: "model".into(),
        message: format!("pass --model ({} or a model file)", MODELS.join(", ")),
    })?;
    if cfg.preset.is_some() || cfg.system.is_some() {
        return Err(CliError::Config {
            path: "model".into(),
            message: "a Markov model cannot be combined with a quantum system".into(),
        });
    }
    ctx.params.insert("model", json!(name));
    let model = match name.as_str() {
        "two-state" => MarkovGibbsModel::two_state(0.1, 0.2)?,
        "random4" => {
            let seed = cfg.seed.ok_or_else(|| CliError::Config {
                path: "seed".into(),
                message: "model `random4` uses randomness; pass --seed".into(),
            })?;
            ctx.params.insert("seed", json!(seed));
            MarkovGibbsModel::random(seed, 4)?
        }
        path => {
            let spec: ModelSpec = load_structured(Path::new(path))?;
            MarkovGibbsModel::from_spec(&spec).map_err(|e| CliError::Config {
                path: format!("{path}: rows"),
                message: e.to_string(),
            })?
        }
    };
    Ok(model)
}

fn resonance(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    if ctx.cfg.model.is_some() {
        let model = load_model(ctx)?;
        let alphas = ctx.real_alphas(GridSpec::range(-1.0, 2.0, 31))?;
        let family = entropic::classical::ClassicalFamily { model: &model };
        let grid: Vec<C64> = alphas.iter().map(|&a| C64::new(a, 0.0)).collect();
        let curve = resonance_curve(&family, &grid);
        let mut worst = 0.0f64;
        for (a, r) in &curve {
            if let Ok(r) = r {
                let e = pressure(&model, a.re)?;
                worst = worst.max((r.pole.im - e).abs().max(r.pole.re.abs()));
            }
        }
        write_curve(ctx, &curve)?;
        let r = ctx.residual("perron_curve", worst);
        ctx.check(r);
        return Ok(vec!["perron_curve"]);
    }
    let sys = ctx.system()?;
    let alphas = ctx.alphas(GridSpec::range(0.0, 1.0, 6), Axis::Real)?;
    let family = QuantumFamily { sys: &sys };
    // one point at a time: each holds several d^2 x d^2 factorizations
    let curve: Vec<_> = alphas.iter().map(|&a| (a, family.resonance(a))).collect();
    let mut worst: Option<f64> = None;
    for (a, r) in &curve {
        if let Ok(r) = r {
            let m = alpha_liouvillean(&sys, *a)?.matrix()?.scale_real(-1.0);
            let n = m.nrows();
            let shifted = &m - &ComplexMatrix::identity(n).scale(r.pole);
            let smin = shifted.singular_values()?.into_iter().fold(f64::INFINITY, f64::min);
            let w = smin / (1.0 + m.norm_max());
            worst = Some(worst.map_or(w, |x: f64| x.max(w)));
        }
    }
    write_curve(ctx, &curve)?;
    match worst {
        Some(w) => {
            // each reported pole must be an eigenvalue of -L_alpha
            let r = ctx.residual("pole", w);
            ctx.check(r);
            Ok(vec!["pole"])
        }
        None => {
            ctx.sink.notes.push(
                "no isolated dominant resonance on this grid: in finite dimension e^{itL_alpha} stays bounded, \
                 so the spectrum is real and the top growth rate is shared"
                    .into(),
            );
            Ok(vec![])
        }
    }
}

fn write_curve(
    ctx: &mut Ctx,
    curve: &[(C64, entropic::Result<entropic::transfer::ResonanceResult>)],
) -> Result<(), CliError> {
    let mut csv = String::from("alpha_re,alpha_im,E_re,E_im,gap,order\n");
    let mut records = Vec::new();
    for (a, r) in curve {
        match r {
            Ok(r) => {
                let _ = writeln!(
                    csv,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                    a.re, a.im, r.pole.re, r.pole.im, r.gap, r.order
                );
                records.push(json!({ "alpha": [a.re, a.im], "result": r }));
            }
            Err(e) => {
                let _ = writeln!(csv, "{:.16e},{:.16e},nan,nan,nan,nan", a.re, a.im);
                ctx.sink.notes.push(format!("alpha = {a}: {e}"));
                records.push(json!({ "alpha": [a.re, a.im], "error": e.to_string() }));
            }
        }
    }
    ctx.sink.write("resonance.csv", &csv)?;
    ctx.sink.write("resonance.json", &to_json(&records)?)?;
    Ok(())
}

fn ness(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let big_t = ctx.grid("T", &ctx.cfg.big_t.clone(), GridSpec::values(&[2000.0]))?;
    let big_t = big_t[big_t.len() - 1];
    let dt = 0.05;
    ctx.params.insert("dt", json!(dt));
    let spectral = SpectralNess::new(&sys)?;
    let rho = spectral.density();
    let pinched = sys.ness_cesaro();
    let cesaro = cesaro_quadrature(&sys, big_t, dt);
    let d = sys.dim();
    let mut csv = String::from("row,col,spectral_re,spectral_im,pinched_re,pinched_im,cesaro_re,cesaro_im\n");
    for i in 0..d {
        for j in 0..d {
            let (a, b, c) = (rho[(i, j)], pinched.matrix()[(i, j)], cesaro[(i, j)]);
            let _ = writeln!(
                csv,
                "{i},{j},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                a.re, a.im, b.re, b.im, c.re, c.im
            );
        }
    }
    ctx.sink.write("ness.csv", &csv)?;
    let r = ctx.residual("ness_spectral", rho.max_abs_diff(pinched.matrix()));
    ctx.check(r);
    let r = ctx.residual("ness_cesaro", rho.max_abs_diff(&cesaro)).with("T", big_t).with("dt", dt);
    ctx.check(r);
    ctx.sink.notes.push(format!("kernel of L_1/2 has dimension {}", spectral.kernel_dim));
    let near = sys.bohr_gap_coincidences(1e-8);
    if !near.is_empty() {
        ctx.sink.notes.push(format!(
            "{} near-coincident Bohr frequencies; Cesaro average may converge slowly",
            near.len()
        ));
    }
    Ok(vec!["ness_spectral", "ness_cesaro"])
}

fn classical_pref(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let model = load_model(ctx)?;
    let alphas = ctx.real_alphas(GridSpec::range(-1.0, 2.0, 301))?;
    let s_grid = ctx.grid("s", &ctx.cfg.s.clone(), GridSpec::range(-1.0, 1.0, 201))?;
    let n = 400usize;

    let curve: Vec<(f64, f64)> = alphas
        .par_iter()
        .map(|&a| pressure(&model, a).map(|e| (a, e)))
        .collect::<Result<_, _>>()?;
    ctx.sink.write("pressure.csv", &pressure_csv(&curve))?;
    let r = ctx.residual("gc_symmetry", gc_symmetry_residual(&model, &alphas)?);
    ctx.check(r);

    let rate = classical_rate_function(&model, &s_grid)?;
    ctx.sink.write("rate.csv", &rate.to_csv())?;
    let r = ctx.residual("rate_function_gc", fluctuation_relation_residual(&rate));
    ctx.check(r);

    let probe = [-0.5, 0.25, 0.5, 1.3];
    let steps = if model.n() <= 4 { 10 } else { 6 };
    let mut enum_worst = 0.0f64;
    let mut finite_worst = 0.0f64;
    for &a in &probe {
        for k in 1..=steps {
            enum_worst = enum_worst.max((path_cgf_exact(&model, a, k)? - path_cgf_enumerated(&model, a, k)?).abs());
        }
        finite_worst = finite_worst.max((path_cgf_exact(&model, a, n)? - pressure(&model, a)?).abs());
    }
    let r = ctx.residual("path_enumeration", enum_worst).with("max_steps", steps as f64);
    ctx.check(r);
    let r = ctx.residual("pressure_finite_n", finite_worst).with("n", n as f64);
    ctx.check(r);

    let k = model.n();
    let uniform = vec![1.0 / k as f64; k];
    let mut skewed: Vec<f64> = (0..k).map(|i| (i + 1) as f64).collect();
    let total: f64 = skewed.iter().sum();
    skewed.iter_mut().for_each(|v| *v /= total);
    let initials = vec![model.stationary().to_vec(), uniform, model.evolve_measure(&skewed, 3)];
    let n_grid: Vec<usize> = (1..=8).map(|i| 50 * i).collect();
    let mut ex_worst = 0.0f64;
    for &a in &probe {
        ex_worst = ex_worst.max(exchange_of_limits(&model, a, &initials, &n_grid)?.residual);
    }
    let r = ctx.residual("exchange_of_limits", ex_worst);
    ctx.check(r);

    let coarse: Vec<f64> = alphas.iter().copied().step_by((alphas.len() / 31).max(1)).collect();
    let spectrum = classical_transfer_spectrum(&model, &coarse)?;
    let worst = spectrum.iter().map(|p| p.residual).fold(0.0, f64::max);
    let r = ctx.residual("perron_curve", worst);
    ctx.check(r);

    let es_steps = if model.n() <= 4 { 8 } else { 5 };
    let stationary = model.with_initial(model.stationary().to_vec())?;
    let es = evans_searles_check(&stationary, es_steps)?;
    ctx.sink.write("measure.csv", &cocycle_measure(&stationary, es_steps)?.to_csv())?;
    let r = ctx.residual("reflection", es.reflection_residual).with("n", es_steps as f64);
    ctx.check(r);
    Ok(vec![
        "gc_symmetry",
        "rate_function_gc",
        "path_enumeration",
        "pressure_finite_n",
        "exchange_of_limits",
        "perron_curve",
        "reflection",
    ])
}

fn fluctuation_check(ctx: &mut Ctx) -> Result<Vec<&'static str>, CliError> {
    let sys = ctx.system()?;
    let ts = ctx.grid("t", &ctx.cfg.t.clone(), GridSpec::values(&[0.5, 1.0, 2.0]))?;
    let mut default = GridSpec::range(-2.0, 2.0, 9);
    default.axis = Some(Axis::Strip);
    let alphas = ctx.alphas(default, Axis::Strip)?;
    let big_ts = ctx.grid("T", &ctx.cfg.big_t.clone(), GridSpec::values(&[0.0, 1.0, 2.0]))?;
    let sandwich = ctx.grid(
        "sandwich-alpha",
        &ctx.cfg.sandwich_alpha.clone(),
        GridSpec::values(&[-0.4, 0.3, 0.45]),
    )?;
    if !sys.is_tri() {
        ctx.sink
            .notes
            .push("system is not time-reversal invariant; symmetry checks are expected to fail".into());
    }
    for &t in &ts {
        let r = ctx.residual("es_symmetry", es_symmetry_residual(&sys, t, &alphas)).with("t", t);
        ctx.check(r);
        let r = ctx.residual("reflection", measure_reflection_check(&sys, t)?).with("t", t);
        ctx.check(r);
    }
    let tol = ctx.tol.get("sandwich_slack");
    let mut csv = String::from("T,t,alpha,C_T,D_T,F2tm_omega,ancilla_omega_T,F2tm_omega_T,min_slack\n");
    for &big_t in &big_ts {
        for &t in &ts {
            for &a in &sandwich {
                let rep = sandwich_bounds_check(&sys, big_t, t, a, tol)?;
                let _ = writeln!(
                    csv,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    big_t, t, a, rep.c_t, rep.d_t, rep.f2tm_omega, rep.ancilla_omega_t, rep.f2tm_omega_t,
                    rep.min_slack()
                );
                let r = ctx
                    .residual("sandwich_slack", (-rep.min_slack()).max(0.0))
                    .with("T", big_t)
                    .with("t", t)
                    .with("alpha", a);
                ctx.check(r);
            }
        }
    }
    ctx.sink.write("sandwich.csv", &csv)?;
    Ok(vec!["es_symmetry", "reflection", "sandwich_slack"])
}
