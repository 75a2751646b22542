use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64, I};
use crate::tolerances;

/// Eigenvalues of a general matrix grouped into clusters with their
/// right and left invariant bases.
#[derive(Clone, Debug)]
pub struct GeneralEig {
    pub values: Vec<C64>,
    pub clusters: Vec<EigCluster>,
}

#[derive(Clone, Debug)]
pub struct EigCluster {
    /// Mean of the member eigenvalues.
    pub value: C64,
    pub members: Vec<C64>,
    /// Right eigenvectors as columns.
    pub right: ComplexMatrix,
    /// Left eigenvectors as columns, normalized so that `left^* right = I`
    /// whenever the cluster is semisimple.
    pub left: ComplexMatrix,
    /// Smallest singular value of the normalized left/right Gram matrix.
    pub overlap: f64,
    pub semisimple: bool,
}

impl EigCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    /// Oblique spectral projector `right left^*`.
    pub fn projector(&self) -> ComplexMatrix {
        self.right.matmul(&self.left.adjoint())
    }
}

fn faer_eig(m: &ComplexMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    let n = m.nrows();
    let e = m
        .as_faer()
        .eigen()
        .map_err(|e| Error::Convergence(format!("general eigensolver, n = {n}: {e:?}")))?;
    let s = e.S().column_vector();
    let values = (0..n).map(|i| s[i]).collect();
    Ok((values, ComplexMatrix::from_faer(e.U().to_owned())))
}

/// Eigenvalues only, in solver order.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.require_square()?;
    m.check_finite()?;
    if n == 0 {
        return Ok(vec![]);
    }
    m.as_faer()
        .eigenvalues()
        .map_err(|e| Error::Convergence(format!("general eigenvalues, n = {n}: {e:?}")))
}

fn cluster_indices(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

fn select_columns(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), idx.len(), |i, k| m[(i, idx[k])])
}

fn normalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let norms: Vec<f64> = (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] / norms[j].max(f64::MIN_POSITIVE)
    })
}

/// Eigendecomposition of a general square matrix.
///
/// Eigenvalues within `cluster_tol` (absolute, chained) form one cluster.
/// Left eigenvectors come from the eigenproblem of `M^*` and are paired with
/// the cluster whose conjugated eigenvalues they match. A cluster is flagged
/// non-semisimple when its left/right Gram matrix is numerically singular or
/// either eigenbasis is rank deficient.
pub fn general_eig(m: &ComplexMatrix, cluster_tol: f64) -> Result<GeneralEig> {
    let n = m.require_square()?;
    m.check_finite()?;
    if n == 0 {
        return Ok(GeneralEig {
            values: vec![],
            clusters: vec![],
        });
    }
    let (values, right) = faer_eig(m)?;
    let (left_values, left) = faer_eig(&m.adjoint())?;
    let right = normalize_columns(&right);
    let left = normalize_columns(&left);
    let mut taken = vec![false; n];
    let mut clusters = Vec::new();
    for idx in cluster_indices(&values, cluster_tol) {
        let members: Vec<C64> = idx.iter().map(|&i| values[i]).collect();
        let value = members.iter().sum::<C64>() / members.len() as f64;
        // nearest unclaimed conjugate eigenvalues of M^*
        let mut order: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
        order.sort_by(|&a, &b| {
            let da = (left_values[a].conj() - value).norm();
            let db = (left_values[b].conj() - value).norm();
            da.total_cmp(&db)
        });
        let lidx: Vec<usize> = order.into_iter().take(idx.len()).collect();
        for &j in &lidx {
            taken[j] = true;
        }
        let r = select_columns(&right, &idx);
        let l = select_columns(&left, &lidx);
        let gram = l.adjoint().matmul(&r);
        let overlap = gram
            .singular_values()?
            .last()
            .copied()
            .unwrap_or(0.0);
        // a defective block splits into nearly parallel eigenvectors
        let independent = idx.len() == 1
            || [&r, &l].iter().all(|b| {
                b.singular_values()
                    .ok()
                    .and_then(|s| s.last().copied())
                    .is_some_and(|s| s >= tolerances::EIGENBASIS_RANK)
            });
        let semisimple = independent && overlap >= tolerances::SEMISIMPLE_OVERLAP;
        let l = if semisimple {
            // W <- W G^{-*} so that W^* V = I
            l.matmul(&gram.inverse()?.adjoint())
        } else {
            l
        };
        clusters.push(EigCluster {
            value,
            members,
            right: r,
            left: l,
            overlap,
            semisimple,
        });
    }
    Ok(GeneralEig { values, clusters })
}

/// Riesz projector `(2 pi i)^{-1} \oint (z - M)^{-1} dz` over the circle of
/// the given center and radius, by the trapezoid rule with `nodes` points.
pub fn spectral_projector_contour(
    m: &ComplexMatrix,
    center: C64,
    radius: f64,
    nodes: usize,
) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    let id = ComplexMatrix::identity(n);
    let mut acc = ComplexMatrix::zeros(n, n);
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64;
        let e = (I * theta).exp();
        let z = center + e * radius;
        let shifted = &id.scale(z) - m;
        let res = shifted.inverse()?;
        acc = &acc + &res.scale(e * (radius / nodes as f64));
    }
    Ok(acc)
}

/// Minimum-cost assignment (Kuhn-Munkres). Returns `col[row]`.
pub fn hungarian_pairing(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return vec![];
    }
    let m = cost[0].len();
    assert!(m >= n, "more rows than columns");
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut ans = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            ans[p[j] - 1] = j - 1;
        }
    }
    ans
}

/// Largest distance between two equally sized multisets under optimal pairing.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    hungarian_pairing(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn upper(rows: &[Vec<f64>]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn projectors_resolve_identity_for_diagonalizable() {
        let m = upper(&[
            vec![1.0, 2.0, 0.5],
            vec![0.0, -0.5, 3.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let e = general_eig(&m, 1e-9).unwrap();
        assert_eq!(e.clusters.len(), 3);
        let mut sum = ComplexMatrix::zeros(3, 3);
        for c in &e.clusters {
            assert!(c.semisimple);
            let p = c.projector();
            assert!(p.matmul(&p).max_abs_diff(&p) < 1e-10);
            let mp = m.matmul(&p);
            assert!(mp.max_abs_diff(&p.scale(c.value)) < 1e-10);
            sum = &sum + &p;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn jordan_block_is_flagged() {
        let m = upper(&[vec![2.0, 1.0], vec![0.0, 2.0]]);
        let e = general_eig(&m, 1e-6).unwrap();
        assert_eq!(e.clusters.len(), 1);
        assert!(!e.clusters[0].semisimple);
    }

    #[test]
    fn hidden_jordan_block_is_flagged() {
        let j = upper(&[
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.5, 0.0],
            vec![0.0, 0.0, -1.0],
        ]);
        let s = upper(&[
            vec![1.0, 0.3, -0.4],
            vec![0.2, 1.1, 0.5],
            vec![-0.3, 0.1, 0.9],
        ]);
        let m = s.matmul(&j).matmul(&s.inverse().unwrap());
        let e = general_eig(&m, 1e-6 * (1.0 + m.norm_max())).unwrap();
        let c = e.clusters.iter().find(|c| c.multiplicity() == 2).unwrap();
        assert!(!c.semisimple);
    }

    #[test]
    fn contour_projector_matches_eigen_projector() {
        let m = upper(&[vec![1.0, 5.0], vec![0.0, 3.0]]);
        let p = spectral_projector_contour(&m, C64::new(1.0, 0.0), 1.0, 64).unwrap();
        let e = general_eig(&m, 1e-9).unwrap();
        let c = e
            .clusters
            .iter()
            .find(|c| (c.value - C64::new(1.0, 0.0)).norm() < 1e-12)
            .unwrap();
        assert!(p.max_abs_diff(&c.projector()) < 1e-12);
    }

    #[test]
    fn hungarian_finds_optimum() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = hungarian_pairing(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn multiset_distance_ignores_order() {
        let a = [C64::new(1.0, 0.0), C64::new(-2.0, 1.0), C64::new(0.0, 3.0)];
        let b = [C64::new(0.0, 3.0), C64::new(1.0, 1e-9), C64::new(-2.0, 1.0)];
        assert!(multiset_distance(&a, &b) < 2e-9);
    }
}
