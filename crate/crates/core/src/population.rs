//! Exact large-electorate limits of the tally statistics.
//!
//! As the number of voters grows, pairwise fractions, top fractions, bottom
//! fractions and per-voter welfare converge to mixture-weighted expectations
//! of single-voter quantities. This module computes those expectations
//! exactly (bottom probabilities through a dynamic program over the multiset
//! of remaining candidates).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Component, Instance};
use crate::sigmoid::sigma;

/// Upper bound on dynamic-program states for exact bottom probabilities.
/// With all-distinct utilities this admits exactly `m ≤ 20`.
pub const MAX_BOTTOM_STATES: usize = 1 << 20;

/// Population-limit statistics of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub m: usize,
    /// Row-major `m × m`; entry `(j, k)` is `p_{j,k}`, the probability a
    /// random voter ranks `j` above `k`. The diagonal is zero.
    pub pairwise: Vec<f64>,
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
    pub util: Vec<f64>,
}

impl PopulationStats {
    #[inline]
    pub fn p(&self, j: usize, k: usize) -> f64 {
        self.pairwise[j * self.m + k]
    }

    /// Index of the welfare-maximizing candidate (lowest index on ties).
    pub fn optimal(&self) -> usize {
        let mut best = 0;
        for j in 1..self.m {
            if self.util[j] > self.util[best] {
                best = j;
            }
        }
        best
    }

    pub fn max_util(&self) -> f64 {
        self.util[self.optimal()]
    }
}

/// Top-choice probabilities of one voter: softmax of `β u`.
pub fn voter_top(utilities: &[f64], beta: f64) -> Vec<f64> {
    let hi = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = utilities.iter().map(|&u| (beta * (u - hi)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Probability that each candidate is ranked last by a voter with these
/// utilities.
///
/// Candidates with equal utility are interchangeable, so the program runs
/// over the counts of remaining candidates per distinct utility value rather
/// than over subsets. That covers every `m ≤ 20` and the equal-others
/// structures of the lower-bound constructions at any `m`; otherwise the
/// exact path is reported unavailable.
pub fn bottom_prob_exact(utilities: &[f64], beta: f64) -> Result<Vec<f64>> {
    let m = utilities.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty utility vector".into()));
    }
    if m == 1 {
        return Ok(vec![1.0]);
    }
    // distinct utility values with their multiplicities
    let mut values: Vec<f64> = utilities.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let group_of: Vec<usize> = utilities
        .iter()
        .map(|u| values.partition_point(|v| v.total_cmp(u).is_lt()))
        .collect();
    let g = values.len();
    let mut count = vec![0usize; g];
    for &gi in &group_of {
        count[gi] += 1;
    }
    let states: u128 = count.iter().map(|&c| c as u128 + 1).product();
    if states > MAX_BOTTOM_STATES as u128 {
        return Err(Error::ExactPathUnavailable { m, states, limit: MAX_BOTTOM_STATES });
    }
    let hi = values[g - 1];
    let weight: Vec<f64> = values.iter().map(|&v| (beta * (v - hi)).exp()).collect();

    // Mixed-radix state index: idx = Σ c_g stride_g. Removing one member of
    // group g lowers the index by stride_g, so a descending sweep visits every
    // state after all of its predecessors.
    let mut stride = vec![1usize; g];
    for i in 1..g {
        stride[i] = stride[i - 1] * (count[i - 1] + 1);
    }
    let states = states as usize;
    let mut reach = vec![0.0f64; states];
    let full: usize = (0..g).map(|i| count[i] * stride[i]).sum();
    reach[full] = 1.0;
    let mut left = vec![0usize; g];
    for idx in (1..=full).rev() {
        let p = reach[idx];
        if p == 0.0 {
            continue;
        }
        let mut rest = idx;
        let mut alive = 0;
        for i in (0..g).rev() {
            left[i] = rest / stride[i];
            rest %= stride[i];
            alive += left[i];
        }
        if alive <= 1 {
            continue;
        }
        let total: f64 = (0..g).map(|i| left[i] as f64 * weight[i]).sum();
        for i in 0..g {
            if left[i] > 0 {
                reach[idx - stride[i]] += p * left[i] as f64 * weight[i] / total;
            }
        }
    }
    // one survivor from group i: each of its members is equally likely
    Ok(group_of.iter().map(|&gi| reach[stride[gi]] / count[gi] as f64).collect())
}

/// Adds `fraction ×` the statistics of one voter into the accumulators.
fn accumulate_voter(acc: &mut PopulationStats, u: &[f64], beta: f64, fraction: f64) -> Result<()> {
    let m = acc.m;
    for (j, t) in voter_top(u, beta).into_iter().enumerate() {
        acc.top[j] += fraction * t;
    }
    for (j, b) in bottom_prob_exact(u, beta)?.into_iter().enumerate() {
        acc.bottom[j] += fraction * b;
    }
    for j in 0..m {
        acc.util[j] += fraction * u[j];
        for k in j + 1..m {
            acc.pairwise[j * m + k] += fraction * sigma(beta, u[j] - u[k]);
        }
    }
    Ok(())
}

/// Exact population-limit statistics of `instance`.
///
/// Symmetric subset families are handled through one representative voter
/// whose statistics are averaged over relabelings of the non-special
/// candidates, which is exactly the marginal under a uniform random subset.
pub fn population_stats(instance: &Instance) -> Result<PopulationStats> {
    let m = instance.m();
    let beta = instance.beta();
    let zero = || PopulationStats {
        m,
        pairwise: vec![0.0; m * m],
        top: vec![0.0; m],
        bottom: vec![0.0; m],
        util: vec![0.0; m],
    };
    let mut acc = zero();
    for c in instance.components() {
        match c {
            Component::Type(t) => accumulate_voter(&mut acc, &t.utilities, beta, t.fraction)?,
            Component::Family(f) => {
                let mut one = zero();
                accumulate_voter(&mut one, &f.representative(m), beta, 1.0)?;
                let one = symmetrize(one, f.special);
                for (a, b) in acc.pairwise.iter_mut().zip(&one.pairwise) {
                    *a += f.fraction * b;
                }
                for j in 0..m {
                    acc.top[j] += f.fraction * one.top[j];
                    acc.bottom[j] += f.fraction * one.bottom[j];
                    acc.util[j] += f.fraction * one.util[j];
                }
            }
        }
    }
    // lower triangle by complement, so p_{j,k} + p_{k,j} = 1 holds exactly
    for j in 0..m {
        for k in j + 1..m {
            acc.pairwise[k * m + j] = 1.0 - acc.pairwise[j * m + k];
        }
    }
    Ok(acc)
}

/// Averages per-candidate and pairwise quantities (upper triangle filled)
/// over all permutations of the candidates other than `special`.
fn symmetrize(mut s: PopulationStats, special: usize) -> PopulationStats {
    let m = s.m;
    let others: Vec<usize> = (0..m).filter(|&j| j != special).collect();
    let r = others.len() as f64;
    for v in [&mut s.top, &mut s.bottom, &mut s.util] {
        let mean = others.iter().map(|&j| v[j]).sum::<f64>() / r;
        for &j in &others {
            v[j] = mean;
        }
    }
    let upper = |s: &PopulationStats, j: usize, k: usize| {
        if j < k {
            s.pairwise[j * m + k]
        } else {
            1.0 - s.pairwise[k * m + j]
        }
    };
    let vs_special = others.iter().map(|&j| upper(&s, special, j)).sum::<f64>() / r;
    // Two non-special candidates are exchangeable under relabeling.
    let among = 0.5;
    for j in 0..m {
        for k in j + 1..m {
            s.pairwise[j * m + k] = if j == special {
                vs_special
            } else if k == special {
                1.0 - vs_special
            } else {
                among
            };
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{SymmetricSubsetFamily, VoterType};
    use approx::assert_relative_eq;

    /// Probability of a full ranking under the sequential construction.
    fn ranking_prob(order: &[usize], u: &[f64], beta: f64) -> f64 {
        let mut p = 1.0;
        for i in 0..order.len() {
            let z: f64 = order[i..].iter().map(|&j| (beta * u[j]).exp()).sum();
            p *= (beta * u[order[i]]).exp() / z;
        }
        p
    }

    fn permutations(m: usize) -> Vec<Vec<usize>> {
        if m == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(m - 1) {
            for pos in 0..m {
                let mut q = p.clone();
                q.insert(pos, m - 1);
                out.push(q);
            }
        }
        out
    }

    fn bottom_by_enumeration(u: &[f64], beta: f64) -> Vec<f64> {
        let mut b = vec![0.0; u.len()];
        for p in permutations(u.len()) {
            b[*p.last().unwrap()] += ranking_prob(&p, u, beta);
        }
        b
    }

    #[test]
    fn bottom_matches_enumeration_small() {
        let u = [1.0, 0.5, 0.0];
        let got = bottom_prob_exact(&u, 1.0).unwrap();
        let want = bottom_by_enumeration(&u, 1.0);
        for j in 0..3 {
            assert_relative_eq!(got[j], want[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn bottom_matches_enumeration_up_to_six() {
        let cases: [&[f64]; 5] = [
            &[0.2, 0.9],
            &[0.3, 0.3, 0.8, 0.1],
            &[0.0, 1.0, 0.5, 0.25, 0.75],
            &[0.6, 0.6, 0.6, 0.1, 0.1, 0.9],
            &[0.11, 0.42, 0.93, 0.05, 0.67, 0.38],
        ];
        for u in cases {
            for beta in [1.0, 3.0, 12.0] {
                let got = bottom_prob_exact(u, beta).unwrap();
                let want = bottom_by_enumeration(u, beta);
                for j in 0..u.len() {
                    assert!((got[j] - want[j]).abs() < 1e-10, "{u:?} beta={beta}");
                }
            }
        }
    }

    #[test]
    fn bottom_equal_utilities_uniform() {
        let got = bottom_prob_exact(&[0.4; 7], 5.0).unwrap();
        for b in got {
            assert_relative_eq!(b, 1.0 / 7.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bottom_equal_others_product_formula() {
        // one candidate at 0, the rest at v: P(last) = Π (m−k)e^{βv} / ((m−k)e^{βv} + 1)
        let (m, beta, v) = (400usize, 10.0, 2.0 / (10.0 * 400f64.ln()));
        let mut u = vec![v; m];
        u[0] = 0.0;
        let got = bottom_prob_exact(&u, beta).unwrap()[0];
        let a = (beta * v).exp();
        let want: f64 = (1..m).map(|k| (m - k) as f64 * a / ((m - k) as f64 * a + 1.0)).product();
        assert_relative_eq!(got, want, max_relative = 1e-12);
        let floor = 1.0 / (std::f64::consts::E * m as f64).powf((-2.0 / (m as f64).ln()).exp());
        assert!(got >= floor);
    }

    #[test]
    fn bottom_unavailable_for_large_distinct() {
        let u: Vec<f64> = (0..21).map(|j| j as f64 / 20.0).collect();
        assert!(matches!(bottom_prob_exact(&u, 1.0), Err(Error::ExactPathUnavailable { .. })));
        let u: Vec<f64> = (0..20).map(|j| j as f64 / 19.0).collect();
        assert!(bottom_prob_exact(&u, 1.0).is_ok());
    }

    #[test]
    fn symmetric_single_type() {
        let inst = Instance::single(3.0, vec![0.7; 5]).unwrap();
        let s = population_stats(&inst).unwrap();
        for j in 0..5 {
            assert_relative_eq!(s.top[j], 0.2, epsilon = 1e-15);
            assert_relative_eq!(s.bottom[j], 0.2, epsilon = 1e-14);
            for k in 0..5 {
                if j != k {
                    assert_eq!(s.p(j, k), 0.5);
                }
            }
        }
    }

    #[test]
    fn pairwise_complementary() {
        let inst = Instance::new(
            4,
            4.0,
            vec![
                VoterType { fraction: 0.3, utilities: vec![0.1, 0.9, 0.3, 0.5] },
                VoterType { fraction: 0.7, utilities: vec![0.8, 0.2, 0.6, 0.0] },
            ],
            vec![],
        )
        .unwrap();
        let s = population_stats(&inst).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    assert!((s.p(j, k) + s.p(k, j) - 1.0).abs() <= 1e-12);
                }
            }
        }
        assert_relative_eq!(s.top.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.bottom.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.p(0, 1), 0.3 * sigma(4.0, -0.8) + 0.7 * sigma(4.0, 0.6), epsilon = 1e-15);
    }

    /// Explicitly enumerates all C(m−1, k) subset types.
    fn expanded_family(m: usize, f: &SymmetricSubsetFamily, beta: f64) -> Instance {
        let others: Vec<usize> = (0..m).filter(|&j| j != f.special).collect();
        let mut subsets = Vec::new();
        for mask in 0u32..(1 << others.len()) {
            if mask.count_ones() as usize == f.k {
                subsets.push(mask);
            }
        }
        let w = f.fraction / subsets.len() as f64;
        let types = subsets
            .iter()
            .map(|mask| {
                let mut u = vec![f.low; m];
                u[f.special] = f.base;
                for (i, &j) in others.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        u[j] = f.high;
                    }
                }
                VoterType { fraction: w, utilities: u }
            })
            .collect();
        Instance::new(m, beta, types, vec![]).unwrap()
    }

    #[test]
    fn family_marginals_match_expansion() {
        let f = SymmetricSubsetFamily { fraction: 1.0, special: 1, base: 0.5, high: 1.0, low: 0.0, k: 2 };
        let fam = Instance::new(6, 3.0, vec![], vec![f.clone()]).unwrap();
        let a = population_stats(&fam).unwrap();
        let b = population_stats(&expanded_family(6, &f, 3.0)).unwrap();
        for j in 0..6 {
            assert_relative_eq!(a.top[j], b.top[j], epsilon = 1e-12);
            assert_relative_eq!(a.bottom[j], b.bottom[j], epsilon = 1e-12);
            assert_relative_eq!(a.util[j], b.util[j], epsilon = 1e-12);
            for k in 0..6 {
                assert_relative_eq!(a.p(j, k), b.p(j, k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn family_special_top_closed_form() {
        let (m, k, beta) = (9usize, 3usize, 2.0);
        let f = SymmetricSubsetFamily { fraction: 1.0, special: 4, base: 0.3, high: 0.9, low: 0.1, k };
        let s = population_stats(&Instance::new(m, beta, vec![], vec![f]).unwrap()).unwrap();
        let e = |x: f64| (beta * x).exp();
        let want = e(0.3) / (e(0.3) + k as f64 * e(0.9) + (m - 1 - k) as f64 * e(0.1));
        assert_relative_eq!(s.top[4], want, epsilon = 1e-14);
        assert_relative_eq!(s.top[0], (1.0 - want) / 8.0, epsilon = 1e-14);
    }
}
