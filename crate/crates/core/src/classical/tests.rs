use super::*;

fn two_state() -> MarkovGibbsModel {
    MarkovGibbsModel::two_state(0.1, 0.2).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn stationary_vectors() {
    let m = two_state();
    assert!((m.stationary()[0] - 2.0 / 3.0).abs() < 1e-14);
    assert!((m.stationary()[1] - 1.0 / 3.0).abs() < 1e-14);
    let sym = MarkovGibbsModel::new(
        vec![vec![0.5, 0.3, 0.2], vec![0.3, 0.4, 0.3], vec![0.2, 0.3, 0.5]],
        None,
    )
    .unwrap();
    for v in sym.stationary() {
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }
}

#[test]
fn validation() {
    assert!(MarkovGibbsModel::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]], None).is_err());
    assert!(MarkovGibbsModel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], None).is_err());
    assert!(MarkovGibbsModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], None).is_err());
    assert!(two_state().with_initial(vec![1.0, 0.0]).is_err());
}

#[test]
fn pressure_examples() {
    let m = two_state();
    assert!(pressure(&m, 0.0).unwrap().abs() < 1e-14);
    let s = 0.02f64.sqrt();
    let lam = 0.85 + (0.05f64.powi(2) + s * s).sqrt();
    assert!((pressure(&m, 0.5).unwrap() - lam.ln()).abs() < 1e-14);
    let r = MarkovGibbsModel::random(17, 4).unwrap();
    let alphas = grid(-2.0, 3.0, 51);
    assert!(gc_symmetry_residual(&r, &alphas).unwrap() < 1e-12);
    let e: Vec<f64> = alphas.iter().map(|&a| pressure(&r, a).unwrap()).collect();
    for k in 1..e.len() - 1 {
        assert!(e[k] <= 0.5 * (e[k - 1] + e[k + 1]) + 1e-10);
    }
    assert!(perron_margin(&r, 0.3).unwrap() > 0.0);
}

#[test]
fn enumeration_matches_powering() {
    let m = two_state();
    let r = MarkovGibbsModel::random(17, 4).unwrap();
    let r = r.with_initial(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    for a in [-0.7, 0.0, 0.5, 1.3] {
        for n in [1, 5, 10] {
            let exact = path_cgf_exact(&m, a, n).unwrap();
            let brute = path_cgf_enumerated(&m, a, n).unwrap();
            assert!((exact - brute).abs() < 1e-12);
            let exact = path_cgf_exact(&r, a, n).unwrap();
            let brute = path_cgf_enumerated(&r, a, n).unwrap();
            assert!((exact - brute).abs() < 1e-12);
        }
    }
    assert!(path_cgf_exact(&r, 0.0, 7).unwrap().abs() < 1e-14);
    assert!(matches!(path_cgf_enumerated(&r, 0.1, 40), Err(Error::CostGuard(_))));
}

#[test]
fn evans_searles_and_rate_function() {
    let m = two_state();
    let es = evans_searles_check(&m, 6).unwrap();
    assert!(es.reflection_residual < 1e-9);
    assert!(es.mean >= -1e-15);
    let r = MarkovGibbsModel::random(5, 3).unwrap();
    let es = evans_searles_check(&r, 8).unwrap();
    assert!(es.reflection_residual < 1e-9, "{}", es.reflection_residual);
    assert!(es.mean > 0.0);
    let s = grid(-1.0, 1.0, 41);
    let rate = classical_rate_function(&r, &s).unwrap();
    assert!(fluctuation_relation_residual(&rate) < 1e-6);
    assert!(rate.convexity_residual() < 1e-8);
}

#[test]
fn symmetric_chain_is_degenerate() {
    let sym = MarkovGibbsModel::new(vec![vec![0.7, 0.3], vec![0.3, 0.7]], None).unwrap();
    let q = cocycle_measure(&sym, 5).unwrap();
    assert_eq!(q.len(), 1);
    let s = grid(-1.0, 1.0, 11);
    let rate = classical_rate_function(&sym, &s).unwrap();
    for (x, v) in s.iter().zip(&rate.values) {
        if x.abs() < 1e-12 {
            assert!(v.abs() < 1e-12);
        } else {
            assert!(v.is_infinite());
        }
    }
}

#[test]
fn transfer_adapter_matches_perron() {
    let r = MarkovGibbsModel::random(17, 4).unwrap();
    let pts = classical_transfer_spectrum(&r, &grid(-1.0, 2.0, 7)).unwrap();
    for p in &pts {
        assert!(p.residual < 1e-9, "{p:?}");
    }
    assert!(pts[0].pressure > 0.0);
}

#[test]
fn limits_independent_of_initial_measure() {
    let r = MarkovGibbsModel::random(17, 4).unwrap();
    let pi = r.stationary().to_vec();
    let skew = vec![0.7, 0.1, 0.1, 0.1];
    let evolved = r.evolve_measure(&skew, 3);
    let ns: Vec<usize> = (1..=16).map(|k| 25 * k).collect();
    let ex = exchange_of_limits(&r, 0.3, &[pi, skew, evolved], &ns).unwrap();
    assert!(ex.residual < 1e-4, "{}", ex.residual);
    assert!(finite_n_constant(&r, 0.3, &[100, 200, 400]).unwrap() < 5e-3 * 400.0);
}
