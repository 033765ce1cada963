//! Two-variable SMO on the SVM dual
//!
//! ```text
//! max  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij   s.t.  0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! Working pair: the maximal KKT violator `i` among the multipliers that can
//! still move up, paired with the `j` that can move down and maximizes
//! `|E_i − E_j|`. Both choices are deterministic (lowest index on ties).
//! The sweep stops when the violation gap `m − M` falls below `tol`; the bias
//! is then chosen inside `[M, m]`, which puts every margin within `tol` of its
//! KKT condition.

use alloc::vec;
use alloc::vec::Vec;

/// Curvature floor for degenerate pairs (identical points).
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    /// Budget in sweeps; one sweep is `n` pair updates.
    pub max_passes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_passes: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// Unsigned multipliers `α_i ∈ [0, C]`.
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective after every sweep and at termination.
    pub objective_trace: Vec<f64>,
}

impl DualSolution {
    /// Signed coefficients `α_i y_i`.
    pub fn coefficients(&self, y: &[f64]) -> Vec<f64> {
        self.alpha.iter().zip(y).map(|(a, y)| a * y).collect()
    }
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    // with grad = Qα − 1: Σα − ½αᵀQα = ½ Σ α_t (1 − grad_t)
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
}

/// Solves the dual for a precomputed kernel matrix `gram` (row-major `n × n`)
/// and labels `y ∈ {−1, +1}`.
pub fn solve_dual(gram: &[f64], y: &[f64], params: &SmoParams) -> DualSolution {
    let n = y.len();
    assert_eq!(gram.len(), n * n, "kernel matrix must be n x n");
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = Vec::new();
    let budget = params.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;

    let can_rise = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let can_fall = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let (mut m_up, mut m_low) = (f64::NEG_INFINITY, f64::INFINITY);
    while iterations < budget {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        m_up = f64::NEG_INFINITY;
        m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if can_rise(alpha[t], y[t]) && v > m_up {
                m_up = v;
                i = t;
            }
            if can_fall(alpha[t], y[t]) && v < m_low {
                m_low = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m_up - m_low < params.tol {
            converged = true;
            break;
        }

        let (qi, qj) = (&gram[i * n..(i + 1) * n], &gram[j * n..(j + 1) * n]);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        // Q_ij = y_i y_j K_ij, so the pair curvature is K_ii + K_jj − 2 K_ij either way
        let mut quad = qi[i] + qj[j] - 2.0 * qi[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        // grad_t += Q_ti Δα_i + Q_tj Δα_j with Q_ts = y_t y_s K_ts
        let di = (alpha[i] - ai_old) * y[i];
        let dj = (alpha[j] - aj_old) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (qi[t] * di + qj[t] * dj);
        }

        iterations += 1;
        if iterations % n.max(1) == 0 {
            trace.push(dual_objective(&alpha, &grad));
        }
    }
    trace.push(dual_objective(&alpha, &grad));

    let free: Vec<f64> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| -y[t] * grad[t])
        .collect();
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else if m_up.is_finite() && m_low.is_finite() {
        0.5 * (m_up + m_low)
    } else if m_up.is_finite() {
        m_up
    } else if m_low.is_finite() {
        m_low
    } else {
        0.0
    };

    DualSolution { alpha, bias, converged, iterations, objective_trace: trace }
}
