//! Sufficient statistics of a profile.

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use crate::population::PopulationStats;
use crate::sampling::Profile;

/// Access to top-choice shares `t_j`.
pub trait TopShares {
    fn num_candidates(&self) -> usize;
    fn top_share(&self, j: usize) -> f64;
}

/// Access to pairwise shares `s_{j,k}` (fraction ranking `j` above `k`).
pub trait PairwiseShares {
    fn num_candidates(&self) -> usize;
    fn pairwise_share(&self, j: usize, k: usize) -> f64;

    /// Whether `j` beats, ties or loses to `k` head to head.
    fn majority(&self, j: usize, k: usize) -> Ordering {
        self.pairwise_share(j, k).total_cmp(&0.5)
    }

    /// A score proportional to `n Σ_{k≠j} s_{j,k}`. Implementations backed by
    /// counts return the exact integer total so ties compare equal.
    fn borda_score(&self, j: usize) -> f64 {
        (0..self.num_candidates())
            .filter(|&k| k != j)
            .map(|k| self.pairwise_share(j, k))
            .sum()
    }
}

/// Pairwise, top and bottom counts of `n` rankings, optionally keeping the
/// rankings themselves (needed by the veto rules). When built from a profile
/// the pairwise counts are computed on first use.
#[derive(Clone, Debug)]
pub struct TallyStats {
    m: usize,
    n: u64,
    wins: OnceLock<Vec<u64>>,
    top: Vec<u64>,
    bottom: Vec<u64>,
    profile: Option<Arc<Profile>>,
}

impl TallyStats {
    pub(crate) fn empty(m: usize) -> Self {
        TallyStats { m, n: 0, wins: OnceLock::from(vec![0; m * m]), top: vec![0; m], bottom: vec![0; m], profile: None }
    }

    pub(crate) fn add_ranking(&mut self, order: &[u16]) {
        let m = self.m;
        self.n += 1;
        self.top[order[0] as usize] += 1;
        self.bottom[order[m - 1] as usize] += 1;
        if let Some(w) = self.wins.get_mut() {
            count_pairs(w, m, order);
        }
    }

    /// Sums two tallies over disjoint voter sets.
    pub(crate) fn merge(mut self, other: TallyStats) -> TallyStats {
        self.n += other.n;
        let theirs = other.pairwise_counts().to_vec();
        for (a, b) in self.pairwise_counts_mut().iter_mut().zip(theirs) {
            *a += b;
        }
        for (a, b) in self.top.iter_mut().zip(other.top) {
            *a += b;
        }
        for (a, b) in self.bottom.iter_mut().zip(other.bottom) {
            *a += b;
        }
        self
    }

    /// Exact counts of `profile`, keeping a handle to it.
    pub fn from_profile(profile: Arc<Profile>) -> TallyStats {
        let m = profile.m();
        let mut t = TallyStats { wins: OnceLock::new(), ..TallyStats::empty(m) };
        for r in profile.iter() {
            t.add_ranking(r);
        }
        t.profile = Some(profile);
        t
    }

    fn pairwise_counts(&self) -> &[u64] {
        self.wins.get_or_init(|| {
            let mut w = vec![0; self.m * self.m];
            for r in self.profile.iter().flat_map(|p| p.iter()) {
                count_pairs(&mut w, self.m, r);
            }
            w
        })
    }

    fn pairwise_counts_mut(&mut self) -> &mut Vec<u64> {
        self.pairwise_counts();
        self.wins.get_mut().expect("initialized above")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of voters ranking `j` above `k`.
    pub fn wins(&self, j: usize, k: usize) -> u64 {
        self.pairwise_counts()[j * self.m + k]
    }

    pub fn top_count(&self, j: usize) -> u64 {
        self.top[j]
    }

    pub fn bottom_count(&self, j: usize) -> u64 {
        self.bottom[j]
    }

    pub fn s(&self, j: usize, k: usize) -> f64 {
        self.wins(j, k) as f64 / self.n as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.top[j] as f64 / self.n as f64
    }

    pub fn b(&self, j: usize) -> f64 {
        self.bottom[j] as f64 / self.n as f64
    }

    pub fn profile(&self) -> Option<&Arc<Profile>> {
        self.profile.as_ref()
    }
}

fn count_pairs(wins: &mut [u64], m: usize, order: &[u16]) {
    for (a, &hi) in order.iter().enumerate() {
        let row = &mut wins[hi as usize * m..(hi as usize + 1) * m];
        for &lo in &order[a + 1..] {
            row[lo as usize] += 1;
        }
    }
}

/// Counts the profile's sufficient statistics.
pub fn tally(profile: Profile) -> TallyStats {
    TallyStats::from_profile(Arc::new(profile))
}

impl TopShares for TallyStats {
    fn num_candidates(&self) -> usize {
        self.m
    }

    fn top_share(&self, j: usize) -> f64 {
        self.t(j)
    }
}

impl PairwiseShares for TallyStats {
    fn num_candidates(&self) -> usize {
        self.m
    }

    fn pairwise_share(&self, j: usize, k: usize) -> f64 {
        self.s(j, k)
    }

    fn majority(&self, j: usize, k: usize) -> Ordering {
        self.wins(j, k).cmp(&self.wins(k, j))
    }

    fn borda_score(&self, j: usize) -> f64 {
        (0..self.m).filter(|&k| k != j).map(|k| self.wins(j, k)).sum::<u64>() as f64
    }
}

/// Top-choice counts only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopTally {
    n: u64,
    top: Vec<u64>,
}

impl TopTally {
    pub fn from_counts(top: Vec<u64>) -> TopTally {
        TopTally { n: top.iter().sum(), top }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn top_count(&self, j: usize) -> u64 {
        self.top[j]
    }
}

impl TopShares for TopTally {
    fn num_candidates(&self) -> usize {
        self.top.len()
    }

    fn top_share(&self, j: usize) -> f64 {
        self.top[j] as f64 / self.n as f64
    }
}

impl TopShares for PopulationStats {
    fn num_candidates(&self) -> usize {
        self.m
    }

    fn top_share(&self, j: usize) -> f64 {
        self.top[j]
    }
}

impl PairwiseShares for PopulationStats {
    fn num_candidates(&self) -> usize {
        self.m
    }

    fn pairwise_share(&self, j: usize, k: usize) -> f64 {
        self.p(j, k)
    }
}
