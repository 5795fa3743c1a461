use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest agent count the exact active-set search accepts.
pub const MAX_WEIGHT_AGENTS: usize = 16;
const DEGENERATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditFit {
    pub weights: Vec<f64>,
    /// All individual estimates coincide, so every simplex point fits equally well.
    pub degenerate: bool,
    /// Weighted squared residual at the returned weights.
    pub residual: f64,
}

/// Weights on the simplex minimising `sum_k mu_k (target_k - sum_i w_i q_i[k])^2`.
///
/// The minimiser is found exactly by solving the equality-constrained least
/// squares problem on every support subset and keeping the best feasible one.
pub fn fit_credit_weights(estimates: &[Vec<f64>], target: &[f64], mu: &[f64]) -> Result<CreditFit> {
    let n = estimates.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no agent estimates".into()));
    }
    if n > MAX_WEIGHT_AGENTS {
        return Err(Error::InvalidArgument(format!("at most {MAX_WEIGHT_AGENTS} agents, got {n}")));
    }
    let k = target.len();
    if mu.len() != k {
        return Err(Error::SupportMismatch(format!("mu has {} cells, target {k}", mu.len())));
    }
    if let Some(e) = estimates.iter().find(|e| e.len() != k) {
        return Err(Error::SupportMismatch(format!("estimate has {} cells, target {k}", e.len())));
    }
    let residual = |w: &[f64]| -> f64 {
        (0..k)
            .map(|c| {
                let fit: f64 = w.iter().zip(estimates).map(|(wi, q)| wi * q[c]).sum();
                mu[c] * (target[c] - fit).powi(2)
            })
            .sum()
    };
    let degenerate =
        estimates.iter().all(|e| e.iter().zip(&estimates[0]).all(|(a, b)| (a - b).abs() <= DEGENERATE_TOLERANCE));
    if degenerate {
        let w = vec![1.0 / n as f64; n];
        return Ok(CreditFit { residual: residual(&w), weights: w, degenerate: true });
    }
    let mut gram = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for c in 0..k {
        for i in 0..n {
            rhs[i] += mu[c] * estimates[i][c] * target[c];
            for j in 0..n {
                gram[i][j] += mu[c] * estimates[i][c] * estimates[j][c];
            }
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some(sub) = constrained_solve(&gram, &rhs, &idx) else { continue };
        if sub.iter().any(|w| *w < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; n];
        for (i, v) in idx.iter().zip(&sub) {
            w[*i] = v.max(0.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let r = residual(&w);
        if best.as_ref().is_none_or(|(b, _)| r < *b - 1e-15 * b.abs().max(1.0)) {
            best = Some((r, w));
        }
    }
    let (residual, weights) = best.expect("every singleton subset is feasible");
    Ok(CreditFit { weights, degenerate: false, residual })
}

/// KKT system `[G 1; 1' 0] [w; l] = [b; 1]` restricted to `idx`.
fn constrained_solve(gram: &[Vec<f64>], rhs: &[f64], idx: &[usize]) -> Option<Vec<f64>> {
    let m = idx.len();
    let mut a = vec![vec![0.0; m + 2]; m + 1];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r][c] = gram[i][j];
        }
        a[r][m] = 1.0;
        a[r][m + 1] = rhs[i];
    }
    a[m][..m].fill(1.0);
    a[m][m + 1] = 1.0;
    let x = gauss(a)?;
    Some(x[..m].to_vec())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|x, y| a[*x][col].abs().total_cmp(&a[*y][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot = a[col].clone();
                    for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                        *x -= f * p;
                    }
                }
            }
        }
    }
    Some((0..n).map(|r| a[r][n] / a[r][r]).collect())
}
