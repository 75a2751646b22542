use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 60;

/// Matrix exponential by degree-13 Padé approximation with scaling and squaring.
pub fn expm_general(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    a.check_finite()?;
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = a.norm_one();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if s > MAX_SQUARINGS {
        return Err(Error::Overflow(norm));
    }
    let a = a.scale_real(0.5f64.powi(s));
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = |k: usize| PADE13[k];
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| {
        let mut m = a6.scale_real(c6);
        m = &m + &a4.scale_real(c4);
        m = &m + &a2.scale_real(c2);
        &m + &id.scale_real(c0)
    };
    let inner_u = lin(b(13), b(11), b(9), 0.0);
    let u = a.matmul(&(&a6.matmul(&inner_u) + &lin(b(7), b(5), b(3), b(1))));
    let inner_v = lin(b(12), b(10), b(8), 0.0);
    let v = &a6.matmul(&inner_v) + &lin(b(6), b(4), b(2), b(0));
    let mut r = (&v - &u).solve(&(&v + &u))?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r.check_finite().map_err(|_| Error::Overflow(norm))?;
    Ok(r)
}

/// Diagonal scaling `d`, powers of two, such that `D^{-1} A D` has matching
/// off-diagonal row and column 1-norms (Parlett–Reinsch).
pub fn balance(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0f64; n];
    let mut m = a.clone();
    for _ in 0..200 {
        let mut done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                c += m[(j, i)].norm();
                r += m[(i, j)].norm();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * total {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    d
}

/// `e^A = D e^{D^{-1} A D} D^{-1}` with `D` from [`balance`]. The rescaling is
/// exact, and badly scaled non-normal generators lose far less accuracy.
pub fn expm_balanced(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square()?;
    a.check_finite()?;
    let d = balance(a);
    let n = d.len();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| a[(i, j)] * (d[j] / d[i]));
    let e = expm_general(&scaled)?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| e[(i, j)] * (d[i] / d[j])))
}

/// Alias of [`expm_general`]; Hermitian generators should go through the
/// spectral calculus instead.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    expm_general(a)
}

/// Action `exp(A) v` by truncated Taylor series with step splitting.
///
/// `apply` computes `A x`; `norm_bound` is any upper bound on `|A|` and fixes
/// the number of steps so that each step has norm at most one.
pub fn expm_multiply(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    norm_bound: f64,
    v: &[C64],
) -> Result<Vec<C64>> {
    if !norm_bound.is_finite() {
        return Err(Error::Overflow(norm_bound));
    }
    let steps = norm_bound.ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut x = v.to_vec();
    for _ in 0..steps {
        let mut term = x.clone();
        let mut acc = x.clone();
        for k in 1..=60 {
            term = apply(&term);
            let f = h / k as f64;
            let mut tnorm = 0.0f64;
            for (t, a) in term.iter_mut().zip(acc.iter_mut()) {
                *t *= f;
                *a += *t;
                tnorm = tnorm.max(t.norm());
            }
            let anorm = acc.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if tnorm <= 1e-17 * anorm.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        x = acc;
    }
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Overflow(norm_bound));
    }
    Ok(x)
}
