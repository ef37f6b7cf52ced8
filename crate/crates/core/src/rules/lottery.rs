//! Maximal lotteries: optimal strategies of the symmetric zero-sum majority
//! margin game.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{PairwiseShares, Rule, RuleOutcome};

pub const ML_TOLERANCE: f64 = 1e-6;
pub const ML_MAX_ITERATIONS: usize = 1_000_000;

const PIVOT_EPS: f64 = 1e-12;

/// Equilibrium method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlSolver {
    /// Linear programming with Bland's pivoting rule.
    #[default]
    Simplex,
    /// Alternating regret matching+, linearly averaged.
    RegretMatching,
}

/// `M[j][k] = s_{j,k} − s_{k,j}`, row-major.
pub fn margin_matrix<T: PairwiseShares + ?Sized>(t: &T) -> Vec<f64> {
    let m = t.num_candidates();
    let mut out = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            if j != k {
                out[j * m + k] = t.pairwise_share(j, k) - t.pairwise_share(k, j);
            }
        }
    }
    out
}

/// How far `lottery` is from maximal: `max(0, −min_k Σ_j L_j M[j][k])`.
pub fn maximality_gap(margins: &[f64], lottery: &[f64]) -> f64 {
    let m = lottery.len();
    let worst = (0..m)
        .map(|k| (0..m).map(|j| lottery[j] * margins[j * m + k]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (-worst).max(0.0)
}

/// A lottery `L` with `Σ_j L_j M[j][k] ≥ −tolerance` for every `k`.
pub fn maximal_lotteries<T: PairwiseShares + ?Sized>(t: &T, tolerance: f64) -> Result<RuleOutcome> {
    maximal_lotteries_with(t, tolerance, MlSolver::Simplex)
}

pub fn maximal_lotteries_with<T: PairwiseShares + ?Sized>(
    t: &T,
    tolerance: f64,
    solver: MlSolver,
) -> Result<RuleOutcome> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let m = t.num_candidates();
    let margins = margin_matrix(t);
    let lottery = match solver {
        MlSolver::Simplex => {
            let l = solve_simplex(&margins, m);
            if maximality_gap(&margins, &l) <= tolerance {
                l
            } else {
                regret_matching(&margins, m, tolerance, ML_MAX_ITERATIONS)?.0
            }
        }
        MlSolver::RegretMatching => regret_matching(&margins, m, tolerance, ML_MAX_ITERATIONS)?.0,
    };
    Ok(RuleOutcome { lottery, scores: None, rule: Rule::MaximalLotteries.to_string(), tiebreak: None })
}

/// Solves `max Σz` subject to `(M + 2) z ≤ 1`, `z ≥ 0`; the normalized `z` is
/// an optimal strategy of the column player, which for a skew-symmetric game
/// is maximal.
pub fn solve_simplex(margins: &[f64], m: usize) -> Vec<f64> {
    let cols = 2 * m + 1;
    let rhs = 2 * m;
    let mut tab = vec![0.0; (m + 1) * cols];
    for i in 0..m {
        for j in 0..m {
            tab[i * cols + j] = margins[i * m + j] + 2.0;
        }
        tab[i * cols + m + i] = 1.0;
        tab[i * cols + rhs] = 1.0;
    }
    let obj = m * cols;
    for j in 0..m {
        tab[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (m..2 * m).collect();

    // Bland's rule terminates without cycling
    while let Some(e) = (0..2 * m).find(|&j| tab[obj + j] < -PIVOT_EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * cols + e];
            if a > PIVOT_EPS {
                let ratio = tab[i * cols + rhs] / a;
                leave = match leave {
                    Some((l, r)) if ratio > r + PIVOT_EPS || (ratio >= r - PIVOT_EPS && basis[i] > basis[l]) => {
                        Some((l, r))
                    }
                    _ => Some((i, ratio)),
                };
            }
        }
        // positive constraint matrix keeps the program bounded
        let (l, _) = leave.expect("bounded program");
        let piv = tab[l * cols + e];
        for c in 0..cols {
            tab[l * cols + c] /= piv;
        }
        for r in 0..=m {
            if r == l {
                continue;
            }
            let f = tab[r * cols + e];
            if f != 0.0 {
                for c in 0..cols {
                    tab[r * cols + c] -= f * tab[l * cols + c];
                }
            }
        }
        basis[l] = e;
    }

    let mut z = vec![0.0; m];
    for (i, &b) in basis.iter().enumerate() {
        if b < m {
            z[b] = tab[i * cols + rhs].max(0.0);
        }
    }
    let total: f64 = z.iter().sum();
    z.iter_mut().for_each(|x| *x /= total);
    z
}

/// Regret matching+ in self-play. Returns the averaged strategy, its gap and
/// the number of iterations used.
pub fn regret_matching(margins: &[f64], m: usize, tolerance: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let strategy = |q: &[f64]| -> Vec<f64> {
        let s: f64 = q.iter().sum();
        if s > 0.0 {
            q.iter().map(|x| x / s).collect()
        } else {
            vec![1.0 / m as f64; m]
        }
    };
    let mut qx = vec![0.0; m];
    let mut qy = vec![0.0; m];
    let mut avg = vec![0.0; m];
    let mut weight = 0.0;
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        let x = strategy(&qx);
        let y = strategy(&qy);
        // row payoffs against y
        let ux: Vec<f64> = (0..m).map(|i| (0..m).map(|k| margins[i * m + k] * y[k]).sum()).collect();
        let vx: f64 = ux.iter().zip(&x).map(|(u, p)| u * p).sum();
        for i in 0..m {
            qx[i] = (qx[i] + ux[i] - vx).max(0.0);
        }
        let x = strategy(&qx);
        // the column player minimizes x^T M y
        let uy: Vec<f64> = (0..m).map(|k| -(0..m).map(|i| x[i] * margins[i * m + k]).sum::<f64>()).collect();
        let vy: f64 = uy.iter().zip(&y).map(|(u, p)| u * p).sum();
        for k in 0..m {
            qy[k] = (qy[k] + uy[k] - vy).max(0.0);
        }
        let w = it as f64;
        for i in 0..m {
            avg[i] += w * x[i];
        }
        weight += w;
        if it % 32 == 0 || it == max_iter {
            let l: Vec<f64> = avg.iter().map(|a| a / weight).collect();
            gap = maximality_gap(margins, &l);
            if gap <= tolerance {
                return Ok((l, gap, it));
            }
        }
    }
    Err(Error::NonConvergence { gap, iterations: max_iter })
}
