//! Gauss-Legendre rules and the spectral integration matrix used for
//! time-ordered integrals.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Nodes (ascending) and weights of the `n`-point rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let n = NonZeroUsize::new(n).expect("at least one node");
    let rule = GaussLegendre::new(n);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * ((b - a) * x + (b + a)), 0.5 * (b - a) * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Composite rule with `panels` equal panels of `order` points each.
pub fn composite_gauss_legendre(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (x0, w0) = gauss_legendre(order, 0.0, 1.0);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let left = a + h * p as f64;
        for (x, w) in x0.iter().zip(&w0) {
            xs.push(left + h * x);
            ws.push(h * w);
        }
    }
    (xs, ws)
}

/// `S[k][j] = \int_0^{x_k} l_j(x) dx` for the Lagrange basis `l_j` on `nodes`.
///
/// Applied to samples of a smooth `g`, `S g` approximates the running integral
/// of `g` at every node.
pub fn integration_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let lagrange = |j: usize, x: f64| {
        nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .fold(1.0, |acc, (_, &xi)| acc * (x - xi) / (nodes[j] - xi))
    };
    nodes
        .iter()
        .map(|&xk| {
            let (y, w) = gauss_legendre(m, 0.0, xk);
            (0..m)
                .map(|j| y.iter().zip(&w).map(|(&yy, &ww)| ww * lagrange(j, yy)).sum())
                .collect()
        })
        .collect()
}
