use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64, ZERO};

/// Kronecker product `A (x) B`; first factor indexes the slow digit.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    ComplexMatrix::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Row-major vectorization, `vec(X)[i d + j] = X[i, j]`.
pub fn vec_row_major(x: &ComplexMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(x.nrows() * x.ncols());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            out.push(x[(i, j)]);
        }
    }
    out
}

pub fn unvec(v: &[C64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            context: "unvec",
            expected: rows * cols,
            actual: v.len(),
        });
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

fn check_bipartite(x: &ComplexMatrix, d1: usize, d2: usize) -> Result<()> {
    let n = x.require_square()?;
    if n != d1 * d2 {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: d1 * d2,
            actual: n,
        });
    }
    Ok(())
}

/// Traces out the first factor of `C^d1 (x) C^d2`.
pub fn partial_trace_first(x: &ComplexMatrix, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    check_bipartite(x, d1, d2)?;
    Ok(ComplexMatrix::from_fn(d2, d2, |a, b| {
        (0..d1).fold(ZERO, |acc, k| acc + x[(k * d2 + a, k * d2 + b)])
    }))
}

/// Traces out the second factor of `C^d1 (x) C^d2`.
pub fn partial_trace_second(x: &ComplexMatrix, d1: usize, d2: usize) -> Result<ComplexMatrix> {
    check_bipartite(x, d1, d2)?;
    Ok(ComplexMatrix::from_fn(d1, d1, |a, b| {
        (0..d2).fold(ZERO, |acc, k| acc + x[(a * d2 + k, b * d2 + k)])
    }))
}

/// Embeds `op`, acting on the factors `sites` (in that order), into the
/// product space with factor dimensions `dims`. Other factors carry the identity.
pub fn embed(op: &ComplexMatrix, dims: &[usize], sites: &[usize]) -> Result<ComplexMatrix> {
    let local: usize = sites.iter().map(|&s| dims[s]).product();
    let n = op.require_square()?;
    if n != local {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected: local,
            actual: n,
        });
    }
    let total: usize = dims.iter().product();
    let digits = |mut k: usize| {
        let mut d = vec![0usize; dims.len()];
        for f in (0..dims.len()).rev() {
            d[f] = k % dims[f];
            k /= dims[f];
        }
        d
    };
    let local_index = |d: &[usize]| sites.iter().fold(0, |acc, &s| acc * dims[s] + d[s]);
    let all_digits: Vec<Vec<usize>> = (0..total).map(digits).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (&all_digits[i], &all_digits[j]);
            let spectators_equal = (0..dims.len())
                .filter(|f| !sites.contains(f))
                .all(|f| di[f] == dj[f]);
            if spectators_equal {
                out[(i, j)] = op[(local_index(di), local_index(dj))];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn vec_of_sandwich_is_kron_with_transpose() {
        let a = m(&[&[1.0, 2.0], &[0.5, -1.0]]);
        let x = m(&[&[0.3, 0.1], &[-2.0, 4.0]]);
        let b = m(&[&[0.0, 1.0], &[3.0, 0.25]]);
        let lhs = vec_row_major(&a.matmul(&x).matmul(&b));
        let rhs = kron(&a, &b.transpose()).mul_vec(&vec_row_major(&x));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-14);
        }
    }

    #[test]
    fn partial_traces_of_product_state() {
        let a = m(&[&[0.7, 0.1], &[0.1, 0.3]]);
        let b = m(&[&[0.2, 0.0, 0.0], &[0.0, 0.5, 0.05], &[0.0, 0.05, 0.3]]);
        let ab = kron(&a, &b);
        assert!(partial_trace_first(&ab, 2, 3).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(partial_trace_second(&ab, 2, 3).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace_first(&ab, 3, 3).is_err());
    }

    #[test]
    fn embed_matches_kron_with_identity() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = m(&[&[1.0, 2.0, 0.0], &[2.0, 0.0, 1.0], &[0.0, 1.0, -1.0]]);
        let ab = kron(&a, &b);
        let id2 = ComplexMatrix::identity(2);
        let dims = [2, 2, 3];
        let direct = kron(&kron(&a, &id2), &b);
        assert!(embed(&ab, &dims, &[0, 2]).unwrap().max_abs_diff(&direct) < 1e-15);
        let middle = kron(&kron(&id2, &a), &ComplexMatrix::identity(3));
        assert!(embed(&a, &dims, &[1]).unwrap().max_abs_diff(&middle) < 1e-15);
    }

    #[test]
    fn unvec_inverts_vec() {
        let x = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(unvec(&vec_row_major(&x), 2, 3).unwrap(), x);
    }
}
