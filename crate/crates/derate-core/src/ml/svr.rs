//! ε-insensitive support vector regression trained by sequential minimal
//! optimisation.
//!
//! The dual is solved in the doubled variable vector `z = (α, α*)` with
//! signs `p = (+1…, −1…)`, box `0 ≤ z ≤ C` and the equality `pᵀz = 0`.
//! Each step picks the maximal violating pair (the classic first-order
//! working-set selection), solves the two-variable subproblem exactly and
//! updates the gradient incrementally. Convergence is declared when the
//! largest KKT violation `m − M` drops to the tolerance; if the pair-update
//! budget runs out first, the model is still returned with its diagnostics
//! flagging the miss.

use serde::{Deserialize, Serialize};

use super::kernel::{kernel_matrix, KernelKind};
use super::linalg::Matrix;

/// Default KKT violation tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Solver health carried on the trained model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrDiagnostics {
    pub converged: bool,
    /// Largest KKT violation at exit (`m − M`).
    pub kkt_violation: f64,
    pub pair_updates: u64,
}

/// Raw dual solution, exposed so tests can audit optimality independently.
#[derive(Clone, Debug, PartialEq)]
pub struct SvrSolution {
    /// `β = α − α*`, one per training row.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub kkt_violation: f64,
    pub pair_updates: u64,
    /// Dual objective after every sweep of `n` pair updates; non-decreasing
    /// up to floating-point noise.
    pub objective_trace: Vec<f64>,
}

/// Maximises the dual objective
/// `W(β) = −½ βᵀKβ − ε Σ|βᵢ| + Σ yᵢ βᵢ` subject to `Σβᵢ = 0`, `|βᵢ| ≤ C`.
pub fn solve_dual(
    k: &Matrix,
    y: &[f64],
    c: f64,
    epsilon: f64,
    tolerance: f64,
    max_pair_updates: u64,
) -> SvrSolution {
    let n = k.rows();
    assert_eq!(k.cols(), n);
    assert_eq!(y.len(), n);
    let m2 = 2 * n;

    // sign of each doubled variable and its linear term
    let p = |u: usize| if u < n { 1.0 } else { -1.0 };
    let q = |u: usize| {
        if u < n {
            epsilon - y[u]
        } else {
            epsilon + y[u - n]
        }
    };

    let mut z = vec![0.0f64; m2];
    let mut grad: Vec<f64> = (0..m2).map(q).collect();

    let mut pair_updates = 0u64;
    let mut trace = Vec::new();
    let final_violation;

    let objective = |z: &[f64], grad: &[f64]| -> f64 {
        // W = Σ yᵢβᵢ − ε Σ(αᵢ + α*ᵢ) − ½ Σ βᵢ gᵢ with g = Kβ, and
        // gᵢ = gradᵢ − qᵢ for the α half.
        let mut w = 0.0;
        for i in 0..z.len() / 2 {
            let beta = z[i] - z[i + z.len() / 2];
            let g = grad[i] - (epsilon - y[i]);
            w += y[i] * beta - epsilon * (z[i] + z[i + z.len() / 2]) - 0.5 * beta * g;
        }
        w
    };

    loop {
        // maximal violating pair: i maximises −p·grad over the set that can
        // move up, j minimises it over the set that can move down
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = usize::MAX;
        let mut mm_val = f64::INFINITY;
        let mut mm_idx = usize::MAX;
        for u in 0..m2 {
            let v = -p(u) * grad[u];
            let up = if u < n { z[u] < c } else { z[u] > 0.0 };
            let down = if u < n { z[u] > 0.0 } else { z[u] < c };
            if up && v > m_val {
                m_val = v;
                m_idx = u;
            }
            if down && v < mm_val {
                mm_val = v;
                mm_idx = u;
            }
        }
        let violation = m_val - mm_val;
        if !(violation > tolerance)
            || m_idx == usize::MAX
            || mm_idx == usize::MAX
            || pair_updates >= max_pair_updates
        {
            final_violation = violation;
            break;
        }

        let (i, j) = (m_idx, mm_idx);
        let (bi, bj) = (i % n, j % n);
        // two-variable subproblem along the feasible direction
        // δzᵢ = t, δzⱼ = s·t with s = −pᵢpⱼ
        let s = -p(i) * p(j);
        let eta = (k.get(bi, bi) + k.get(bj, bj) - 2.0 * k.get(bi, bj)).max(1e-12);
        let linear = grad[i] - p(i) * p(j) * grad[j];
        let mut t = -linear / eta;
        // box constraints on both variables
        let (mut lo, mut hi) = (-z[i], c - z[i]);
        if s > 0.0 {
            lo = lo.max(-z[j]);
            hi = hi.min(c - z[j]);
        } else {
            lo = lo.max(z[j] - c);
            hi = hi.min(z[j]);
        }
        t = t.clamp(lo, hi);

        z[i] += t;
        z[j] += s * t;
        // keep hard bounds exact so the selection sets stay crisp
        z[i] = z[i].clamp(0.0, c);
        z[j] = z[j].clamp(0.0, c);

        let di = p(i) * t;
        let dj = p(j) * (s * t);
        for r in 0..n {
            let delta = k.get(r, bi) * di + k.get(r, bj) * dj;
            grad[r] += delta;
            grad[r + n] -= delta;
        }

        pair_updates += 1;
        if pair_updates % n as u64 == 0 {
            trace.push(objective(&z, &grad));
        }
    }
    trace.push(objective(&z, &grad));

    // bias from the free variables' stationarity, else from the violation
    // interval midpoint
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for u in 0..m2 {
        if z[u] > 0.0 && z[u] < c {
            free_sum += -p(u) * grad[u];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_val = f64::NEG_INFINITY;
        let mut mm_val = f64::INFINITY;
        for u in 0..m2 {
            let v = -p(u) * grad[u];
            let up = if u < n { z[u] < c } else { z[u] > 0.0 };
            let down = if u < n { z[u] > 0.0 } else { z[u] < c };
            if up {
                m_val = m_val.max(v);
            }
            if down {
                mm_val = mm_val.min(v);
            }
        }
        if m_val.is_finite() && mm_val.is_finite() {
            (m_val + mm_val) / 2.0
        } else {
            0.0
        }
    };

    SvrSolution {
        beta: (0..n).map(|i| z[i] - z[i + n]).collect(),
        bias,
        converged: final_violation <= tolerance,
        kkt_violation: final_violation.max(0.0),
        pair_updates,
        objective_trace: trace,
    }
}

/// Fits on standardized features and keeps only the support vectors.
pub fn fit(
    z: &Matrix,
    y: &[f64],
    c: f64,
    epsilon: f64,
    kernel: &KernelKind,
) -> (Matrix, Vec<f64>, f64, SvrDiagnostics) {
    let n = z.rows();
    let k = kernel_matrix(kernel, z, z);
    let budget = 10 * (n as u64) * (n as u64);
    let solution = solve_dual(&k, y, c, epsilon, DEFAULT_TOLERANCE, budget.max(1000));
    let support: Vec<usize> = (0..n).filter(|&i| solution.beta[i] != 0.0).collect();
    let support_x = Matrix::from_rows(
        &support
            .iter()
            .map(|&i| z.row(i).to_vec())
            .collect::<Vec<_>>(),
    );
    let support_coef: Vec<f64> = support.iter().map(|&i| solution.beta[i]).collect();
    (
        support_x,
        support_coef,
        solution.bias,
        SvrDiagnostics {
            converged: solution.converged,
            kkt_violation: solution.kkt_violation,
            pair_updates: solution.pair_updates,
        },
    )
}
