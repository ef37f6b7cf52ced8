//! Finite-precision views of the majority tournament.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{PairwiseShares, TallyStats};

/// Quotients this close to an integer are snapped to it before flooring, so
/// that margins landing exactly on a multiple of `rho` are not lost to
/// rounding.
const SNAP: f64 = 1e-9;

/// Edge weights `W(j,k) = ⌊(s_{j,k} − 1/2)/ρ⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarsenedTournament {
    pub rho: f64,
    pub m: usize,
    /// Row-major `m × m`; the diagonal is zero and carries no meaning.
    pub weights: Vec<i64>,
}

impl CoarsenedTournament {
    pub fn weight(&self, j: usize, k: usize) -> i64 {
        self.weights[j * self.m + k]
    }

    /// Row sums of positive weights.
    pub fn out_weight(&self, j: usize) -> i64 {
        (0..self.m).filter(|&k| k != j).map(|k| self.weight(j, k).max(0)).sum()
    }
}

fn floor_snapped(q: f64) -> i64 {
    let r = q.round();
    if (q - r).abs() <= SNAP * r.abs().max(1.0) {
        r as i64
    } else {
        q.floor() as i64
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")))
    }
}

/// Coarsens an empirical tally, working from exact counts.
pub fn coarsen(t: &TallyStats, rho: f64) -> Result<CoarsenedTournament> {
    check_rho(rho)?;
    let (m, n) = (t.m(), t.n() as f64);
    let mut weights = vec![0; m * m];
    for j in 0..m {
        for k in 0..m {
            if j != k {
                let excess = 2.0 * t.wins(j, k) as f64 - n;
                weights[j * m + k] = floor_snapped(excess / (2.0 * n * rho));
            }
        }
    }
    Ok(CoarsenedTournament { rho, m, weights })
}

/// Coarsens any source of pairwise shares.
pub fn coarsen_shares<T: PairwiseShares + ?Sized>(t: &T, rho: f64) -> Result<CoarsenedTournament> {
    check_rho(rho)?;
    let m = t.num_candidates();
    let mut weights = vec![0; m * m];
    for j in 0..m {
        for k in 0..m {
            if j != k {
                weights[j * m + k] = floor_snapped((t.pairwise_share(j, k) - 0.5) / rho);
            }
        }
    }
    Ok(CoarsenedTournament { rho, m, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::tests::Matrix;
    use crate::rules::tally;
    use crate::sampling::Profile;

    fn pair(s: f64) -> Matrix {
        Matrix(2, vec![0.0, s, 1.0 - s, 0.0])
    }

    #[test]
    fn direct_values() {
        for rho in [0.01, 0.1, 0.37] {
            assert_eq!(coarsen_shares(&pair(0.5), rho).unwrap().weight(0, 1), 0);
        }
        let c = coarsen_shares(&pair(0.72), 0.1).unwrap();
        assert_eq!(c.weight(0, 1), 2);
        assert_eq!(c.weight(1, 0), -3);
        assert_eq!(coarsen_shares(&pair(0.45), 0.1).unwrap().weight(0, 1), -1);
    }

    #[test]
    fn exact_multiples_from_counts() {
        // s = 0.6 exactly: (0.6 − 0.5)/0.1 is 1 in exact arithmetic
        let mut rs = vec![[0usize, 1]; 6];
        rs.extend([[1, 0]; 4]);
        let t = tally(Profile::from_rankings(2, rs).unwrap());
        let c = coarsen(&t, 0.1).unwrap();
        assert_eq!((c.weight(0, 1), c.weight(1, 0)), (1, -1));
        assert!(coarsen(&t, 0.0).is_err());
    }
}
