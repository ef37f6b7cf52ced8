//! Plackett-Luce ranking samplers and seeded profile simulation.
//!
//! Two samplers are provided and are distributionally identical: the
//! sequential one draws the next position with probability proportional to
//! `e^{βu}` among the remaining candidates, the Gumbel one perturbs every
//! utility with i.i.d. Gumbel noise of scale `1/β` and sorts. Profile
//! simulation uses the Gumbel sampler.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gumbel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Component, Instance};
use crate::rules::tally::{TallyStats, TopTally};
use crate::seed::{self, CHUNK, CHUNK_VOTERS};

/// A ranking of all candidates, best first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking {
    pub order: Vec<u16>,
}

impl Ranking {
    pub fn top(&self) -> usize {
        self.order[0] as usize
    }

    pub fn bottom(&self) -> usize {
        *self.order.last().expect("non-empty ranking") as usize
    }
}

fn softmax_weights(utilities: &[f64], beta: f64) -> Vec<f64> {
    let hi = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    utilities.iter().map(|&u| (beta * (u - hi)).exp()).collect()
}

/// Draws a ranking position by position: the next candidate is chosen among
/// the remaining ones with probability proportional to `e^{β u_j}`.
pub fn sample_ranking_sequential<R: Rng + ?Sized>(utilities: &[f64], beta: f64, rng: &mut R) -> Ranking {
    let mut remaining: Vec<u16> = (0..utilities.len() as u16).collect();
    let mut order = Vec::with_capacity(utilities.len());
    let mut weights = Vec::with_capacity(utilities.len());
    while remaining.len() > 1 {
        // renormalize against the best remaining utility to avoid underflow
        let rest: Vec<f64> = remaining.iter().map(|&j| utilities[j as usize]).collect();
        weights.clear();
        weights.extend(softmax_weights(&rest, beta));
        let total: f64 = weights.iter().sum();
        let mut r = rng.random::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (slot, &w) in weights.iter().enumerate() {
            r -= w;
            if r < 0.0 {
                pick = slot;
                break;
            }
        }
        order.push(remaining.remove(pick));
    }
    order.extend(remaining);
    Ranking { order }
}

/// Exact probability of drawing the ranking `order`.
pub fn ranking_probability(utilities: &[f64], beta: f64, order: &[usize]) -> f64 {
    let mut p = 1.0;
    for (i, &j) in order.iter().enumerate() {
        let rest = &order[i..];
        let hi = rest.iter().map(|&k| utilities[k]).fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = rest.iter().map(|&k| (beta * (utilities[k] - hi)).exp()).sum();
        p *= (beta * (utilities[j] - hi)).exp() / z;
    }
    p
}

/// Gumbel-perturbed argsort: reusable buffers for repeated draws.
pub(crate) struct GumbelSorter {
    keys: Vec<(f64, u16)>,
    noise: Gumbel<f64>,
}

impl GumbelSorter {
    pub(crate) fn new(m: usize) -> Self {
        GumbelSorter { keys: Vec::with_capacity(m), noise: Gumbel::new(0.0, 1.0).expect("unit Gumbel") }
    }

    /// Writes a ranking of `utilities` into `out` (length m).
    pub(crate) fn fill<R: Rng + ?Sized>(&mut self, utilities: &[f64], beta: f64, rng: &mut R, out: &mut [u16]) {
        self.keys.clear();
        // β·u + G with G ~ Gumbel(0, 1) orders the same as u + G/β.
        self.keys
            .extend(utilities.iter().enumerate().map(|(j, &u)| (beta * u + self.noise.sample(rng), j as u16)));
        self.keys.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        for (slot, &(_, j)) in out.iter_mut().zip(&self.keys) {
            *slot = j;
        }
    }
}

/// Adds i.i.d. Gumbel noise of scale `1/β` to each utility and sorts
/// descending.
pub fn sample_ranking_gumbel<R: Rng + ?Sized>(utilities: &[f64], beta: f64, rng: &mut R) -> Ranking {
    let mut order = vec![0u16; utilities.len()];
    GumbelSorter::new(utilities.len()).fill(utilities, beta, rng, &mut order);
    Ranking { order }
}

/// `n` rankings over `m` candidates stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    m: usize,
    rankings: Vec<u16>,
}

impl Profile {
    /// Builds a profile from explicit rankings, checking each is a permutation.
    pub fn from_rankings<I, R>(m: usize, rankings: I) -> Result<Profile>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[usize]>,
    {
        if m < 2 || m > u16::MAX as usize {
            return Err(Error::MalformedProfile(format!("unsupported candidate count {m}")));
        }
        let mut flat = Vec::new();
        for (i, r) in rankings.into_iter().enumerate() {
            let r = r.as_ref();
            if !crate::instance::is_permutation(r, m) {
                return Err(Error::MalformedProfile(format!("ranking {i} is not a permutation of 0..{m}")));
            }
            flat.extend(r.iter().map(|&j| j as u16));
        }
        if flat.is_empty() {
            return Err(Error::MalformedProfile("no rankings".into()));
        }
        Ok(Profile { m, rankings: flat })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.rankings.len() / self.m
    }

    pub fn ranking(&self, i: usize) -> &[u16] {
        &self.rankings[i * self.m..(i + 1) * self.m]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        self.rankings.chunks_exact(self.m)
    }
}

/// Per-chunk voter generator: picks a mixture component, then utilities.
struct VoterDraw<'a> {
    instance: &'a Instance,
    components: Vec<Component<'a>>,
    cumulative: Vec<f64>,
    utilities: Vec<f64>,
}

impl<'a> VoterDraw<'a> {
    fn new(instance: &'a Instance) -> Self {
        let components: Vec<_> = instance.components().collect();
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|c| {
                acc += c.fraction();
                acc
            })
            .collect();
        VoterDraw { instance, components, cumulative, utilities: vec![0.0; instance.m()] }
    }

    fn component<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        self.cumulative.partition_point(|&c| c <= r).min(self.components.len() - 1)
    }

    /// Draws a voter and returns their utility vector.
    fn utilities<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[f64] {
        match self.components[self.component(rng)] {
            Component::Type(t) => &t.utilities,
            Component::Family(f) => {
                f.fill_random(rng, &mut self.utilities);
                &self.utilities
            }
        }
    }

    fn ranking<R: Rng + ?Sized>(&mut self, sorter: &mut GumbelSorter, rng: &mut R, out: &mut [u16]) {
        let beta = self.instance.beta();
        let u = self.utilities(rng);
        sorter.fill(u, beta, rng, out);
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("number of voters must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Draws `n` i.i.d. voters from `instance` and a Plackett-Luce ranking for
/// each. Deterministic in `seed` regardless of thread count.
pub fn sample_profile(instance: &Instance, n: usize, seed: u64) -> Result<Profile> {
    check_n(n)?;
    let m = instance.m();
    let mut rankings = vec![0u16; n * m];
    rankings
        .par_chunks_mut(CHUNK_VOTERS * m)
        .enumerate()
        .for_each(|(c, block)| {
            let mut rng = seed::stream(seed, &[CHUNK, c as u64]);
            let mut draw = VoterDraw::new(instance);
            let mut sorter = GumbelSorter::new(m);
            for out in block.chunks_exact_mut(m) {
                draw.ranking(&mut sorter, &mut rng, out);
            }
        });
    Ok(Profile { m, rankings })
}

fn chunk_sizes(n: usize) -> Vec<usize> {
    let full = n / CHUNK_VOTERS;
    let mut sizes = vec![CHUNK_VOTERS; full];
    if !n.is_multiple_of(CHUNK_VOTERS) {
        sizes.push(n % CHUNK_VOTERS);
    }
    sizes
}

/// Simulates `n` voters and returns their pairwise, top and bottom counts
/// without keeping the rankings.
pub fn sample_tally(instance: &Instance, n: usize, seed: u64) -> Result<TallyStats> {
    check_n(n)?;
    let m = instance.m();
    let partial = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(c, size)| {
            let mut rng = seed::stream(seed, &[CHUNK, c as u64]);
            let mut draw = VoterDraw::new(instance);
            let mut sorter = GumbelSorter::new(m);
            let mut counts = TallyStats::empty(m);
            let mut order = vec![0u16; m];
            for _ in 0..size {
                draw.ranking(&mut sorter, &mut rng, &mut order);
                counts.add_ranking(&order);
            }
            counts
        })
        .reduce(|| TallyStats::empty(m), TallyStats::merge);
    Ok(partial)
}

/// Per-component top-choice distribution used by [`sample_top_tally`].
enum TopLaw {
    /// Cumulative top-choice probabilities of a fixed utility vector.
    Fixed(Vec<f64>),
    /// Symmetric family: special candidate with this probability, otherwise
    /// uniform over the others.
    Special { special: usize, p: f64 },
}

/// Simulates only the top choices of `n` voters. Equivalent in distribution
/// to tallying full sampled rankings, at a fraction of the cost.
pub fn sample_top_tally(instance: &Instance, n: usize, seed: u64) -> Result<TopTally> {
    check_n(n)?;
    let m = instance.m();
    let beta = instance.beta();
    let laws: Vec<TopLaw> = instance
        .components()
        .map(|c| match c {
            Component::Type(t) => {
                let w = softmax_weights(&t.utilities, beta);
                let z: f64 = w.iter().sum();
                let mut acc = 0.0;
                TopLaw::Fixed(
                    w.iter()
                        .map(|x| {
                            acc += x / z;
                            acc
                        })
                        .collect(),
                )
            }
            Component::Family(f) => {
                let top = crate::population::voter_top(&f.representative(m), beta);
                TopLaw::Special { special: f.special, p: top[f.special] }
            }
        })
        .collect();
    let counts = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(c, size)| {
            let mut rng = seed::stream(seed, &[CHUNK, c as u64]);
            let draw = VoterDraw::new(instance);
            let mut top = vec![0u64; m];
            for _ in 0..size {
                let j = match &laws[draw.component(&mut rng)] {
                    TopLaw::Fixed(cum) => {
                        let r = rng.random::<f64>() * cum[m - 1];
                        cum.partition_point(|&c| c <= r).min(m - 1)
                    }
                    TopLaw::Special { special, p } => {
                        if rng.random::<f64>() < *p {
                            *special
                        } else {
                            let i = rng.random_range(0..m - 1);
                            if i >= *special {
                                i + 1
                            } else {
                                i
                            }
                        }
                    }
                };
                top[j] += 1;
            }
            top
        })
        .reduce(
            || vec![0u64; m],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(TopTally::from_counts(counts))
}

/// Samples a profile and tallies it, keeping the profile for veto rules.
pub fn sample_tally_with_profile(instance: &Instance, n: usize, seed: u64) -> Result<TallyStats> {
    let profile = sample_profile(instance, n, seed)?;
    Ok(TallyStats::from_profile(Arc::new(profile)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{SymmetricSubsetFamily, VoterType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn is_perm(r: &Ranking, m: usize) -> bool {
        let v: Vec<usize> = r.order.iter().map(|&j| j as usize).collect();
        crate::instance::is_permutation(&v, m)
    }

    #[test]
    fn samplers_emit_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = [0.3, 0.9, 0.0, 0.5, 1.0];
        for _ in 0..200 {
            assert!(is_perm(&sample_ranking_sequential(&u, 3.0, &mut rng), 5));
            assert!(is_perm(&sample_ranking_gumbel(&u, 3.0, &mut rng), 5));
        }
    }

    #[test]
    fn huge_beta_is_deterministic_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = [0.3, 0.9, 0.0, 0.5];
        let want = vec![1, 3, 0, 2];
        assert_eq!(sample_ranking_sequential(&u, 1e4, &mut rng).order, want);
        assert_eq!(sample_ranking_gumbel(&u, 1e4, &mut rng).order, want);
    }

    #[test]
    fn two_candidate_top_frequency() {
        // P(0 first) = σ_1(1)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 200_000;
        let p = crate::sigmoid::sigma(1.0, 1.0);
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let seq = (0..draws).filter(|_| sample_ranking_sequential(&[1.0, 0.0], 1.0, &mut rng).top() == 0).count();
        let gum = (0..draws).filter(|_| sample_ranking_gumbel(&[1.0, 0.0], 1.0, &mut rng).top() == 0).count();
        assert!((seq as f64 / draws as f64 - p).abs() < 4.0 * se);
        assert!((gum as f64 / draws as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn zero_voters_rejected() {
        let inst = Instance::single(1.0, vec![0.0, 1.0]).unwrap();
        assert!(sample_profile(&inst, 0, 1).is_err());
        assert!(sample_tally(&inst, 0, 1).is_err());
        assert!(sample_top_tally(&inst, 0, 1).is_err());
    }

    #[test]
    fn profile_is_seed_deterministic() {
        let inst = Instance::new(
            4,
            2.0,
            vec![VoterType { fraction: 0.5, utilities: vec![0.1, 0.2, 0.3, 0.4] }],
            vec![SymmetricSubsetFamily { fraction: 0.5, special: 0, base: 0.5, high: 1.0, low: 0.0, k: 2 }],
        )
        .unwrap();
        let a = sample_profile(&inst, 20_000, 7).unwrap();
        let b = sample_profile(&inst, 20_000, 7).unwrap();
        let c = sample_profile(&inst, 20_000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.n(), 20_000);
    }

    #[test]
    fn streamed_tally_matches_profile_tally() {
        // Same seed and chunking: streaming and storing draw identical voters.
        let inst = Instance::single(2.0, vec![0.1, 0.7, 0.4]).unwrap();
        let streamed = sample_tally(&inst, 10_000, 3).unwrap();
        let stored = sample_tally_with_profile(&inst, 10_000, 3).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(streamed.wins(j, k), stored.wins(j, k));
            }
            assert_eq!(streamed.top_count(j), stored.top_count(j));
        }
    }

    #[test]
    fn profile_from_rankings_validates() {
        assert!(Profile::from_rankings(3, [[0, 1, 2], [2, 1, 0]]).is_ok());
        assert!(Profile::from_rankings(3, [[0, 1, 1]]).is_err());
        assert!(Profile::from_rankings(3, Vec::<Vec<usize>>::new()).is_err());
    }
}
