//! Seeded random operators. All generators draw from a caller-owned
//! `ChaCha8Rng`, so a seed fixes every sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numkernel::{ComplexMatrix, DensityMatrix, HermitianOperator, C64};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian Hermitian matrix with entries of variance `1/d` (real symmetric when `real`).
pub fn random_hermitian(rng: &mut impl Rng, d: usize, real: bool) -> HermitianOperator {
    let s = (1.0 / d as f64).sqrt();
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(normal(rng) * s, 0.0);
        for j in i + 1..d {
            let re = normal(rng) * s / std::f64::consts::SQRT_2;
            let im = if real {
                0.0
            } else {
                normal(rng) * s / std::f64::consts::SQRT_2
            };
            m[(i, j)] = C64::new(re, im);
            m[(j, i)] = C64::new(re, -im);
        }
    }
    HermitianOperator::new(m).expect("constructed Hermitian")
}

/// Ginibre-type faithful state `(1 - mix) G G^* / tr + mix I / d`.
pub fn random_density(rng: &mut impl Rng, d: usize, mix: f64, real: bool) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        let re = normal(rng);
        let im = if real { 0.0 } else { normal(rng) };
        C64::new(re, im)
    });
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    let rho = &w.scale_real((1.0 - mix) / tr) + &ComplexMatrix::identity(d).scale_real(mix / d as f64);
    DensityMatrix::new(rho).expect("mixture with the identity is faithful")
}

/// Random probability vector with entries bounded below by `floor / n`.
pub fn random_probabilities(rng: &mut impl Rng, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + floor / n as f64).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| C64::new(normal(rng), normal(rng))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
