//! One-dimensional Gauss-Lobatto-Legendre machinery.
//!
//! The nodal tensor-product space on the reference square `[-1, 1]^2` is built
//! from the Lagrange polynomials through the GLL points. Quadrature at those
//! same points, together with the collocation derivative, gives a diagonal-norm
//! summation-by-parts pair: `W D + (W D)^T = diag(-1, 0, ..., 0, 1)`.

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// GLL nodes, weights and the collocation differentiation matrix of order `p`.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major, `diff[i * (p + 1) + j] = l_j'(xi_i)`.
    diff: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(order: usize) -> Result<Self> {
        let (nodes, weights) = gll_nodes_weights(order)?;
        let diff = lagrange_diff_matrix(&nodes)?;
        Ok(Self {
            order,
            nodes,
            weights,
            diff,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of nodes per direction, `p + 1`.
    pub fn len(&self) -> usize {
        self.order + 1
    }

    /// Always false; a basis has at least two nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.diff[i * (self.order + 1) + j]
    }

    /// Values of all Lagrange cardinal polynomials at `x`.
    pub fn lagrange_values(&self, x: f64) -> Vec<f64> {
        let nodes = &self.nodes;
        (0..nodes.len())
            .map(|i| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, &xk)| (x - xk) / (nodes[i] - xk))
                    .product()
            })
            .collect()
    }

    /// Tensor-product Lagrange evaluation of nodal values at `(xi, eta)`.
    ///
    /// `nodal` is indexed `j * (p + 1) + i` with `i` along `xi`. No clamping is
    /// applied; coordinates outside the reference square extrapolate.
    pub fn interpolate(&self, nodal: &[f64], xi: f64, eta: f64) -> f64 {
        let n = self.len();
        debug_assert_eq!(nodal.len(), n * n);
        let lx = self.lagrange_values(xi);
        let ly = self.lagrange_values(eta);
        let mut acc = 0.0;
        for j in 0..n {
            let row: f64 = (0..n).map(|i| lx[i] * nodal[j * n + i]).sum();
            acc += ly[j] * row;
        }
        acc
    }
}

/// Legendre polynomials `(P_p(x), P_{p-1}(x))` by the three-term recurrence.
pub fn legendre_pair(p: usize, x: f64) -> (f64, f64) {
    if p == 0 {
        return (1.0, 0.0);
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// GLL nodes (ascending) and weights of order `p`.
///
/// Nodes are the roots of `(1 - x^2) P_p'(x)`, found by Newton iteration from
/// Chebyshev-Lobatto guesses, then symmetrised about the origin.
pub fn gll_nodes_weights(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if p < 1 {
        return Err(Error::InvalidOrder(p));
    }
    let pf = p as f64;
    let mut nodes: Vec<f64> = (0..=p)
        .map(|i| -(std::f64::consts::PI * i as f64 / pf).cos())
        .collect();

    for x in nodes.iter_mut().take(p).skip(1) {
        for _ in 0..NEWTON_MAX_ITER {
            let (pp, pm) = legendre_pair(p, *x);
            // Newton on (1 - x^2) P_p' = p (P_{p-1} - x P_p), whose derivative
            // is -p (p + 1) P_p by the Legendre equation.
            let dx = (*x * pp - pm) / ((pf + 1.0) * pp);
            *x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
    }
    nodes[0] = -1.0;
    nodes[p] = 1.0;

    for i in 0..=p / 2 {
        let m = p - i;
        if i == m {
            nodes[i] = 0.0;
        } else {
            let s = 0.5 * (nodes[m] - nodes[i]);
            nodes[i] = -s;
            nodes[m] = s;
        }
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (pp, _) = legendre_pair(p, x);
            2.0 / (pf * (pf + 1.0) * pp * pp)
        })
        .collect();
    for i in 0..=p / 2 {
        let m = p - i;
        let w = 0.5 * (weights[i] + weights[m]);
        weights[i] = w;
        weights[m] = w;
    }
    Ok((nodes, weights))
}

/// Collocation derivative `D[i][j] = l_j'(x_i)` (row-major) via barycentric
/// weights. The diagonal is the negated off-diagonal row sum so that rows sum
/// to zero.
pub fn lagrange_diff_matrix(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if nodes[i] == nodes[j] {
                return Err(Error::DegenerateBasis(i, j));
            }
        }
    }
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product::<f64>()
        })
        .collect();

    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(k: u32) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn order_zero_is_rejected() {
        assert!(matches!(gll_nodes_weights(0), Err(Error::InvalidOrder(0))));
        assert!(ReferenceBasis::new(0).is_err());
    }

    #[test]
    fn low_order_nodes_and_weights() {
        let (x, w) = gll_nodes_weights(1).unwrap();
        assert_eq!(x, vec![-1.0, 1.0]);
        assert_eq!(w, vec![1.0, 1.0]);

        let (x, w) = gll_nodes_weights(2).unwrap();
        let expect_w = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for i in 0..3 {
            assert!((x[i] - [-1.0, 0.0, 1.0][i]).abs() < 1e-15);
            assert!((w[i] - expect_w[i]).abs() < 1e-15);
        }

        let (x, w) = gll_nodes_weights(3).unwrap();
        let r = (0.2f64).sqrt();
        let expect_x = [-1.0, -r, r, 1.0];
        let expect_w = [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0];
        for i in 0..4 {
            assert!((x[i] - expect_x[i]).abs() < 1e-15);
            assert!((w[i] - expect_w[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_exactness_through_degree_2p_minus_1() {
        for p in 1..=8 {
            let (x, w) = gll_nodes_weights(p).unwrap();
            for k in 0..(2 * p as u32) {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(k as i32))
                    .sum();
                assert!(
                    (q - monomial_integral(k)).abs() < 1e-13,
                    "p={p} k={k} q={q}"
                );
            }
        }
    }

    #[test]
    fn sbp_identity_and_row_sums() {
        for p in 1..=8 {
            let b = ReferenceBasis::new(p).unwrap();
            let n = b.len();
            for i in 0..n {
                let row: f64 = (0..n).map(|j| b.d(i, j)).sum();
                assert!(row.abs() < 1e-13);
                for j in 0..n {
                    let q = b.weights()[i] * b.d(i, j) + b.weights()[j] * b.d(j, i);
                    let expect = if i == j && i == 0 {
                        -1.0
                    } else if i == j && i == n - 1 {
                        1.0
                    } else {
                        0.0
                    };
                    assert!((q - expect).abs() < 1e-13, "p={p} ({i},{j}) {q}");
                }
            }
        }
    }

    #[test]
    fn derivative_of_cubic_is_exact() {
        let b = ReferenceBasis::new(3).unwrap();
        let n = b.len();
        let f: Vec<f64> = b.nodes().iter().map(|x| x.powi(3)).collect();
        let id: Vec<f64> = b.nodes().to_vec();
        for i in 0..n {
            let df: f64 = (0..n).map(|j| b.d(i, j) * f[j]).sum();
            let did: f64 = (0..n).map(|j| b.d(i, j) * id[j]).sum();
            assert!((df - 3.0 * b.nodes()[i].powi(2)).abs() < 1e-13);
            assert!((did - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn duplicate_nodes_are_degenerate() {
        assert!(matches!(
            lagrange_diff_matrix(&[-1.0, 0.5, 0.5, 1.0]),
            Err(Error::DegenerateBasis(1, 2))
        ));
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let b = ReferenceBasis::new(3).unwrap();
        let n = b.len();
        let mut nodal = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (b.nodes()[i], b.nodes()[j]);
                nodal[j * n + i] = x * x * y;
            }
        }
        assert!((b.interpolate(&nodal, 0.3, -0.7) - (-0.063)).abs() < 1e-14);
        assert_eq!(
            b.interpolate(&nodal, b.nodes()[1], b.nodes()[2]),
            nodal[2 * n + 1]
        );
        let constant = vec![4.25; n * n];
        assert!((b.interpolate(&constant, -0.41, 0.77) - 4.25).abs() < 1e-14);
    }
}
