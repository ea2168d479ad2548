//! Gauss quadrature rules on [0, 1] and barycentric interpolation.
//!
//! `gauss_legendre` discretizes the radial integral operator (Nyström grid);
//! `gauss_jacobi_weight_r` supplies the zero-bandlimit starting rule for the
//! generalized-Gaussian radial quadrature; `Barycentric` evaluates grid
//! functions off-grid with optional derivatives.

use faer::{Mat, Side};

/// Gauss–Legendre nodes/weights on [0, 1].
///
/// Nodes are the Legendre roots by Newton iteration from the Chebyshev-like
/// initial guesses; converges in ≤ 5 iterations for any practical n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(z) and its derivative by upward recurrence.
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        // Map [-1, 1] → [0, 1]; weight halves with the interval.
        let wi = 1.0 / ((1.0 - z * z) * pp * pp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss rule with weight function r on [0, 1]:
/// `Σ_i W_i·f(r_i)·r_i = ∫₀¹ f(r)·r dr` exactly for polynomials f of
/// degree ≤ 2n−1. Returned weights are the `W_i` (the extra factor `r_i`
/// is kept explicit to match the radial-rule convention).
pub fn gauss_jacobi_weight_r(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Golub–Welsch on the monic Jacobi(0, 1) recurrence over [-1, 1] with
    // weight (1+x): diag a_k = 1/((2k+1)(2k+3)), offdiag² b_k = k(k+1)/(2k+1)²,
    // zeroth moment μ₀ = 2.
    let mut m = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        m[(k, k)] = 1.0 / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0));
        if k >= 1 {
            let b = kf * (kf + 1.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 1.0));
            m[(k, k - 1)] = b.sqrt();
            m[(k - 1, k)] = b.sqrt();
        }
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .expect("Jacobi matrix eigendecomposition cannot fail");
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = evd.S()[i];
            let q0 = evd.U()[(0, i)];
            (node, 2.0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // x ∈ [-1,1] → r = (1+x)/2; ∫₀¹ f r dr = Σ ŵ/4 · f(r) ⇒ W = ŵ/(4r).
    let r: Vec<f64> = pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect();
    let w: Vec<f64> = pairs
        .iter()
        .zip(&r)
        .map(|(p, &ri)| p.1 / (4.0 * ri))
        .collect();
    (r, w)
}

/// Barycentric Lagrange interpolation on a fixed node set.
///
/// Weights are computed through log-magnitude sums so that grids of a
/// thousand-plus points stay representable; only weight ratios matter.
pub struct Barycentric {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Barycentric {
    pub fn new(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let mut logw = vec![0.0f64; n];
        let mut sign = vec![1.0f64; n];
        for j in 0..n {
            let (mut ls, mut sg) = (0.0f64, 1.0f64);
            for i in 0..n {
                if i != j {
                    let d = nodes[j] - nodes[i];
                    ls -= d.abs().ln();
                    if d < 0.0 {
                        sg = -sg;
                    }
                }
            }
            logw[j] = ls;
            sign[j] = sg;
        }
        let lmax = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = logw
            .iter()
            .zip(&sign)
            .map(|(&l, &s)| s * (l - lmax).exp())
            .collect();
        Barycentric { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Row vector `v` with `p(t) = Σ_j v_j·f(x_j)` for any grid function f.
    pub fn value_row(&self, t: f64) -> Vec<f64> {
        self.rows(t, false).0
    }

    /// Value row plus derivative row `d` with `p'(t) = Σ_j d_j·f(x_j)`.
    pub fn value_and_derivative_rows(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (v, d) = self.rows(t, true);
        (v, d.unwrap())
    }

    fn rows(&self, t: f64, want_d: bool) -> (Vec<f64>, Option<Vec<f64>>) {
        let n = self.nodes.len();
        // On-node queries degenerate to a delta row; the derivative row is
        // the matching row of the differentiation matrix.
        let mut jhit = None;
        for (j, &xj) in self.nodes.iter().enumerate() {
            if (t - xj).abs() < 1e-14 {
                jhit = Some(j);
                break;
            }
        }
        if let Some(j) = jhit {
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            if !want_d {
                return (v, None);
            }
            let mut d = vec![0.0; n];
            let mut diag = 0.0;
            for i in 0..n {
                if i != j {
                    d[i] = (self.weights[i] / self.weights[j]) / (self.nodes[j] - self.nodes[i]);
                    diag -= d[i];
                }
            }
            d[j] = diag;
            return (v, Some(d));
        }
        let mut ww = vec![0.0; n];
        let mut s = 0.0;
        for j in 0..n {
            ww[j] = self.weights[j] / (t - self.nodes[j]);
            s += ww[j];
        }
        let v: Vec<f64> = ww.iter().map(|&q| q / s).collect();
        if !want_d {
            return (v, None);
        }
        // p'(t) from differentiating the barycentric ratio form.
        let mut sp = 0.0;
        let mut wwp = vec![0.0; n];
        for j in 0..n {
            let d = t - self.nodes[j];
            wwp[j] = -self.weights[j] / (d * d);
            sp += wwp[j];
        }
        let drow: Vec<f64> = (0..n).map(|j| (wwp[j] - v[j] * sp) / s).collect();
        (v, Some(drow))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_moment01(k: u32) -> f64 {
        // ∫₀¹ r^k dr
        1.0 / (k as f64 + 1.0)
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        for k in 0..=23u32 {
            let s: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            assert!((s - poly_moment01(k)).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn jacobi_rule_integrates_weighted_polynomials_exactly() {
        let (r, w) = gauss_jacobi_weight_r(9);
        for k in 0..=17u32 {
            let s: f64 = r
                .iter()
                .zip(&w)
                .map(|(&ri, &wi)| wi * ri.powi(k as i32) * ri)
                .sum();
            // ∫₀¹ r^k·r dr = 1/(k+2)
            let exact = 1.0 / (k as f64 + 2.0);
            assert!((s - exact).abs() < 1e-14, "degree {k}: {s} vs {exact}");
        }
    }

    #[test]
    fn jacobi_nodes_interior_and_increasing() {
        let (r, w) = gauss_jacobi_weight_r(24);
        for i in 0..r.len() {
            assert!(r[i] > 0.0 && r[i] < 1.0);
            assert!(w[i] > 0.0);
            if i > 0 {
                assert!(r[i] > r[i - 1]);
            }
        }
    }

    #[test]
    fn barycentric_reproduces_smooth_function_and_derivative() {
        let (x, _) = gauss_legendre(40);
        let bary = Barycentric::new(x.clone());
        let f: Vec<f64> = x.iter().map(|&xi| (3.0 * xi).sin()).collect();
        for &t in &[0.05, 0.37, 0.68, 0.93] {
            let (v, d) = bary.value_and_derivative_rows(t);
            let p: f64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
            let dp: f64 = d.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((p - (3.0 * t).sin()).abs() < 1e-13);
            assert!((dp - 3.0 * (3.0 * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn barycentric_on_node_is_delta_row() {
        let (x, _) = gauss_legendre(17);
        let bary = Barycentric::new(x.clone());
        let f: Vec<f64> = x.iter().map(|&xi| xi * xi).collect();
        let (v, d) = bary.value_and_derivative_rows(x[5]);
        let p: f64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
        let dp: f64 = d.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert_eq!(p, f[5]);
        assert!((dp - 2.0 * x[5]).abs() < 1e-9);
    }
}
