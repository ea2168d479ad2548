//! Nyström solution of the radial prolate eigenproblem.
//!
//! The radial eigenfunctions satisfy `β·R(r) = ∫₀¹ R(ρ)·J_N(c·r·ρ)·ρ dρ`.
//! Symmetrizing with `φ = R·√r` turns the kernel into
//! `K(r,ρ) = J_N(c·r·ρ)·√(c·r·ρ)` (and the eigenvalue into `γ = β·√c`),
//! which a Gauss–Legendre grid reduces to a dense symmetric eigenproblem.

use crate::bessel;
use crate::gauss::{gauss_legendre, Barycentric};
use faer::{Mat, Side};

/// All retained eigenpairs of one angular index at one bandlimit.
///
/// `values` stores the eigenfunctions column-wise on the Gauss grid,
/// normalized to `∫₀¹ R²(r)·r dr = 1` with the leading significant value
/// positive, ordered by non-increasing `|β|`. `R` itself is smooth on
/// [0, 1] (unlike `φ = R·√r`, whose derivative blows up at 0), so
/// barycentric interpolation acts on `R` directly.
pub struct RadialSolution {
    pub n_angular: u32,
    pub c: f64,
    pub grid: Vec<f64>,
    pub grid_weights: Vec<f64>,
    pub beta: Vec<f64>,
    /// Column-major: `values[k * grid.len() + i]` is `R_k(grid[i])`.
    pub values: Vec<f64>,
    interp: Barycentric,
}

/// Spec grid size for the Nyström discretization at bandlimit `c`.
pub fn default_grid_size(c: f64) -> usize {
    (4.0 * (2.0 * c / std::f64::consts::PI + 30.0)).ceil() as usize
}

/// Retention cut for the sorted `|γ|` sequence.
///
/// Two regimes produce junk eigenpairs that must not be kept: the LAPACK
/// roundoff floor near `ε·max`, and the "plateau" where `1 − |λ|²`
/// underflows and eigenvalues stop decaying. The plateau test fires when
/// the decay ratio flattens below 10⁻¹²·max; one extra index before the
/// plateau is dropped because it is already noise-contaminated.
fn retention_cut(gammas: &[f64]) -> usize {
    let max = gammas[0].abs();
    for k in 1..gammas.len() {
        let a = gammas[k].abs();
        if a <= 1e-16 * max {
            return k;
        }
        if a < 1e-12 * max && a > 0.7 * gammas[k - 1].abs() {
            return (k - 1).max(1);
        }
    }
    gammas.len()
}

/// Solve the radial eigenproblem for angular index `n_angular` at
/// bandlimit `c` on a `grid_size`-point Gauss–Legendre grid.
pub fn solve_radial(n_angular: u32, c: f64, grid_size: usize) -> RadialSolution {
    let (x, w) = gauss_legendre(grid_size);
    let sw: Vec<f64> = w.iter().map(|&wi| wi.sqrt()).collect();

    let mut m = Mat::<f64>::zeros(grid_size, grid_size);
    for i in 0..grid_size {
        for j in 0..=i {
            let z = c * x[i] * x[j];
            let k = bessel::jn(n_angular as usize, z) * z.sqrt();
            let v = sw[i] * k * sw[j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }

    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigendecomposition failed");
    let mut order: Vec<usize> = (0..grid_size).collect();
    order.sort_by(|&a, &b| evd.S()[b].abs().total_cmp(&evd.S()[a].abs()));

    let gammas: Vec<f64> = order.iter().map(|&i| evd.S()[i]).collect();
    let keep = retention_cut(&gammas);

    let mut beta = Vec::with_capacity(keep);
    let mut values = Vec::with_capacity(keep * grid_size);
    for k in 0..keep {
        beta.push(gammas[k] / c.sqrt());
        let col = order[k];
        let offset = values.len();
        for i in 0..grid_size {
            // u unit-norm in the weighted metric ⇒ ∫ R² r dr = 1 on the grid.
            values.push(evd.U()[(i, col)] / (sw[i] * x[i].sqrt()));
        }
        let first_sig = values[offset..]
            .iter()
            .position(|v| v.abs() > 1e-8)
            .unwrap_or(0);
        if values[offset + first_sig] < 0.0 {
            for v in &mut values[offset..] {
                *v = -*v;
            }
        }
    }

    RadialSolution {
        n_angular,
        c,
        interp: Barycentric::new(x.clone()),
        grid: x,
        grid_weights: w,
        beta,
        values,
    }
}

impl RadialSolution {
    pub fn count(&self) -> usize {
        self.beta.len()
    }

    /// `|λ| = c·|β|`, the disk energy-concentration amplitude.
    pub fn lambda_abs(&self, k: usize) -> f64 {
        self.c * self.beta[k].abs()
    }

    pub fn column(&self, k: usize) -> &[f64] {
        let g = self.grid.len();
        &self.values[k * g..(k + 1) * g]
    }

    /// Evaluate eigenfunction `k` at arbitrary radii in [0, 1].
    pub fn eval(&self, k: usize, radii: &[f64]) -> Vec<f64> {
        let col = self.column(k);
        radii
            .iter()
            .map(|&r| {
                let row = self.interp.value_row(r);
                row.iter().zip(col).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Value rows of the grid interpolant at one radius (shared across k).
    pub fn interpolant(&self) -> &Barycentric {
        &self.interp
    }

    /// Radial moments `∫₀¹ R_k(r)·r dr` for every retained k.
    pub fn moments(&self) -> Vec<f64> {
        let g = self.grid.len();
        (0..self.count())
            .map(|k| {
                let col = self.column(k);
                (0..g)
                    .map(|i| self.grid_weights[i] * self.grid[i] * col[i])
                    .sum()
            })
            .collect()
    }

    /// Worst integral-equation residual `‖β·R − ∫R J_N(c·rρ)ρ dρ‖_∞ / |β|`
    /// over the first `probe` eigenfunctions, evaluated on the grid itself.
    pub fn residual(&self, probe: usize) -> f64 {
        let g = self.grid.len();
        let mut worst = 0.0f64;
        for k in 0..probe.min(self.count()) {
            let col = self.column(k);
            for i in (0..g).step_by(7) {
                let mut int = 0.0;
                for j in 0..g {
                    let z = self.c * self.grid[i] * self.grid[j];
                    int += col[j]
                        * bessel::jn(self.n_angular as usize, z)
                        * self.grid[j]
                        * self.grid_weights[j];
                }
                let res = (self.beta[k] * col[i] - int).abs() / self.beta[k].abs();
                worst = worst.max(res);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_decay_and_norms_are_unit() {
        let c = 4.0 * std::f64::consts::PI;
        let sol = solve_radial(0, c, default_grid_size(c));
        assert!(sol.count() >= 6);
        for k in 1..sol.count() {
            assert!(
                sol.beta[k].abs() <= sol.beta[k - 1].abs() * (1.0 + 1e-12),
                "|β| must be non-increasing at k={k}"
            );
        }
        // Unit weighted norm on the grid.
        for k in 0..sol.count().min(5) {
            let col = sol.column(k);
            let norm: f64 = (0..sol.grid.len())
                .map(|i| sol.grid_weights[i] * sol.grid[i] * col[i] * col[i])
                .sum();
            assert!((norm - 1.0).abs() < 1e-12, "k={k}: norm {norm}");
        }
    }

    #[test]
    fn integral_equation_residual_small() {
        let c = 4.0 * std::f64::consts::PI;
        let sol = solve_radial(0, c, default_grid_size(c));
        assert!(sol.residual(4) < 1e-13);
        let sol5 = solve_radial(5, c, default_grid_size(c));
        assert!(sol5.residual(3) < 1e-13);
    }

    #[test]
    fn doubling_grid_leaves_beta_fixed() {
        // Self-convergence: the spec's resolution contract.
        let c = 4.0 * std::f64::consts::PI;
        let a = solve_radial(0, c, default_grid_size(c));
        let b = solve_radial(0, c, 2 * default_grid_size(c));
        let n = a.count().min(b.count());
        for k in 0..n {
            assert!(
                (a.beta[k] - b.beta[k]).abs() < 1e-14,
                "k={k}: {} vs {}",
                a.beta[k],
                b.beta[k]
            );
        }
    }

    #[test]
    fn zero_order_function_positive_at_origin() {
        let c = 8.0;
        let sol = solve_radial(0, c, default_grid_size(c));
        let v = sol.eval(0, &[0.0, 0.01])[0];
        assert!(v > 0.0);
    }

    #[test]
    fn high_angular_index_vanishes_at_origin() {
        let c = 4.0 * std::f64::consts::PI;
        let sol = solve_radial(7, c, default_grid_size(c));
        let v = sol.eval(0, &[0.0])[0];
        assert!(v.abs() < 1e-8);
    }
}
