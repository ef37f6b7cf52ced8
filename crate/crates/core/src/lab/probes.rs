//! Numeric checks of the distortion bounds on generated and constructed
//! instances.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Candidate, Instance, VoterType};
use crate::population::{population_stats, PopulationStats};
use crate::rules::{Rule, TieBreakOrder};
use crate::seed::{self, trial_seed, SWEEP};
use crate::sigmoid::{chord_factor, sigma, two_candidate_bound};

use super::bounds::rule_bounds;
use super::empirical::{sample_outcome, Z95};
use super::{population_distortion, population_winner_from_stats, DEFAULT_TAU};

/// Both sides of the two-candidate inequality for the pair `(x, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoCandidateReport {
    pub x: Candidate,
    pub z: Candidate,
    pub p_xz: f64,
    pub util_x: f64,
    pub util_z: f64,
    /// `Util_Z / Util_X`, with `0/0 = 1`.
    pub ratio: f64,
    pub bound: f64,
    /// Whether `p_{X,Z} ≥ 1/2`, so that the bound applies.
    pub applicable: bool,
    pub holds: bool,
}

pub fn two_candidate_probe(instance: &Instance, x: usize, z: usize) -> Result<TwoCandidateReport> {
    let m = instance.m();
    if x >= m || z >= m || x == z {
        return Err(Error::InvalidArgument(format!("need two distinct candidates below {m}, got {x} and {z}")));
    }
    let stats = population_stats(instance)?;
    Ok(two_candidate_from_stats(&stats, instance.beta(), x, z))
}

fn two_candidate_from_stats(stats: &PopulationStats, beta: f64, x: usize, z: usize) -> TwoCandidateReport {
    let (ux, uz) = (stats.util[x], stats.util[z]);
    let ratio = if uz <= 0.0 {
        1.0
    } else if ux <= 0.0 {
        f64::INFINITY
    } else {
        uz / ux
    };
    let bound = two_candidate_bound(beta);
    let p_xz = stats.p(x, z);
    let applicable = p_xz >= 0.5;
    TwoCandidateReport {
        x: Candidate(x),
        z: Candidate(z),
        p_xz,
        util_x: ux,
        util_z: uz,
        ratio,
        bound,
        applicable,
        holds: !applicable || ratio <= bound * (1.0 + 1e-12),
    }
}

/// A two-type, two-candidate instance in which `X = 0` wins its majority by
/// exactly one half while `Z = 1` has as much welfare as possible: a share
/// loves `Z`, the rest mildly prefer `X` by `delta`. As `delta → 0` the
/// ratio approaches the bound.
pub fn two_candidate_extremal(beta: f64, delta: f64) -> Result<(Instance, TwoCandidateReport)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1]")));
    }
    let sd = sigma(beta, delta);
    let a = (sd - 0.5) / (sd - sigma(beta, -1.0));
    let inst = Instance::new(
        2,
        beta,
        vec![
            VoterType { fraction: a, utilities: vec![0.0, 1.0] },
            VoterType { fraction: 1.0 - a, utilities: vec![delta, 0.0] },
        ],
        vec![],
    )?;
    let report = two_candidate_probe(&inst, 0, 1)?;
    Ok((inst, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack allowed by [`linearization_probe`].
pub const LINEARIZATION_SLACK: f64 = 1e-9;

/// `Σ_i [σ_β(x_i − z_i) − σ_β(−z_i)]` against
/// `(Σx − Σz)/2 · (1 − e^{−β})/(1 + e^{−β})`.
pub fn linearization_probe(x: &[f64], z: &[f64], beta: f64) -> Result<LinearizationReport> {
    if x.len() != z.len() {
        return Err(Error::InvalidArgument(format!("length mismatch: {} vs {}", x.len(), z.len())));
    }
    let lhs: f64 = x.iter().zip(z).map(|(&a, &b)| sigma(beta, a - b) - sigma(beta, -b)).sum();
    let diff: f64 = x.iter().sum::<f64>() - z.iter().sum::<f64>();
    let rhs = diff / 2.0 * chord_factor(beta);
    Ok(LinearizationReport { lhs, rhs, holds: lhs >= rhs - LINEARIZATION_SLACK })
}

/// Outcome of a randomized sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rule: String,
    pub beta: f64,
    pub samples: usize,
    /// Samples skipped because the limit outcome was ambiguous.
    pub ambiguous: usize,
    pub violations: usize,
    /// Largest observed value over the bound.
    pub max_ratio: f64,
    pub max_observed: f64,
    pub worst: Option<Instance>,
}

impl SweepReport {
    fn record(&mut self, observed: f64, bound: f64, rel_tol: f64, inst: &Instance) {
        let ratio = observed / bound;
        if observed > bound * (1.0 + rel_tol) {
            self.violations += 1;
        }
        if ratio > self.max_ratio || self.worst.is_none() {
            self.max_ratio = ratio;
            self.worst = Some(inst.clone());
        }
        self.max_observed = self.max_observed.max(observed);
    }
}

/// `samples` random `(x, z, β)` triples with up to 100 voters and
/// `β ∈ [1, 50]`; the worst slack is reported as `max_ratio` (as `rhs − lhs`).
pub fn linearization_sweep(samples: usize, seed: u64) -> SweepReport {
    let mut rep = SweepReport { rule: "linearization".into(), max_ratio: f64::NEG_INFINITY, ..Default::default() };
    let mut rng = seed::stream(seed, &[SWEEP]);
    for _ in 0..samples {
        let n = rng.random_range(1..=100);
        let beta = rng.random_range(1.0..=50.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let r = linearization_probe(&x, &z, beta).expect("equal lengths");
        rep.samples += 1;
        rep.violations += usize::from(!r.holds);
        rep.max_ratio = rep.max_ratio.max(r.rhs - r.lhs);
    }
    rep
}

/// A random finite mixture: `m` drawn from `m_range`, between 1 and
/// `max_types` types, flat-Dirichlet fractions and uniform utilities.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    m_range: RangeInclusive<usize>,
    max_types: usize,
    beta: f64,
) -> Result<Instance> {
    let m = rng.random_range(m_range);
    let k = rng.random_range(1..=max_types.max(1));
    let raw: Vec<f64> = (0..k).map(|_| f64::max(Exp1.sample(rng), 1e-9)).collect();
    let total: f64 = raw.iter().sum();
    let types = raw
        .into_iter()
        .map(|w| VoterType { fraction: w / total, utilities: (0..m).map(|_| rng.random()).collect() })
        .collect();
    Instance::new(m, beta, types, vec![])
}

/// Checks the rules' population distortion against their upper bounds on
/// `samples` random instances. Instance `i` depends only on `(seed, i)` and
/// `β`, so every rule sees the same instances.
pub fn upper_bound_sweep(
    rule_list: &[Rule],
    m_range: RangeInclusive<usize>,
    max_types: usize,
    beta: f64,
    samples: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<Vec<SweepReport>> {
    if rule_list.iter().any(|r| r.needs_profile()) {
        return Err(Error::UnsupportedRule("veto rules have no upper bound to sweep".into()));
    }
    let mut reports: Vec<SweepReport> = rule_list
        .iter()
        .map(|r| SweepReport { rule: r.to_string(), beta, ..Default::default() })
        .collect();
    for i in 0..samples {
        let mut rng = seed::stream(seed, &[SWEEP, i as u64]);
        let inst = random_instance(&mut rng, m_range.clone(), max_types, beta)?;
        let stats = population_stats(&inst)?;
        let tb = TieBreakOrder::identity(inst.m());
        for (rep, &rule) in reports.iter_mut().zip(rule_list) {
            rep.samples += 1;
            let ub = rule_bounds(rule, beta, inst.m(), 0.0)?.upper_bound.value().expect("bounded rule");
            match population_winner_from_stats(&stats, rule, &tb, DEFAULT_TAU)?.decided() {
                Some(o) => rep.record(population_distortion(&stats, &o.lottery), ub, rel_tol, &inst),
                None => rep.ambiguous += 1,
            }
        }
    }
    Ok(reports)
}

/// Estimated probability that `rule` elects the population Condorcet loser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PclcReport {
    pub rule: String,
    pub loser: Candidate,
    pub probability: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub threshold: f64,
    /// Whether the estimate is below `1/m`.
    pub below_threshold: bool,
    pub n: usize,
    pub trials: usize,
}

/// The candidate losing every population majority by more than `tau`.
pub fn condorcet_loser(stats: &PopulationStats, tau: f64) -> Option<usize> {
    (0..stats.m).find(|&c| (0..stats.m).filter(|&k| k != c).all(|k| stats.p(c, k) < 0.5 - tau))
}

pub fn pclc_probe(
    instance: &Instance,
    rule: Rule,
    n: usize,
    trials: usize,
    seed: u64,
    tau: f64,
) -> Result<PclcReport> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and trials >= 1".into()));
    }
    let stats = population_stats(instance)?;
    let loser = condorcet_loser(&stats, tau).ok_or(Error::NoCondorcetLoser { tau })?;
    let tb = TieBreakOrder::identity(instance.m());
    let mass: Vec<f64> = (0..trials)
        .map(|t| Ok(sample_outcome(instance, rule, n, trial_seed(seed, t as u64), &tb)?.lottery[loser]))
        .collect::<Result<_>>()?;
    let mean = mass.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        mass.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let half = Z95 * (var / trials as f64).sqrt();
    let threshold = 1.0 / instance.m() as f64;
    Ok(PclcReport {
        rule: rule.to_string(),
        loser: Candidate(loser),
        probability: mean,
        ci_lo: (mean - half).max(0.0),
        ci_hi: (mean + half).min(1.0),
        threshold,
        below_threshold: mean < threshold,
        n,
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VetoVerdict {
    /// More expected vetoes than tokens: eliminated in the limit.
    Loses,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VetoProbe {
    pub candidate: Candidate,
    pub top: f64,
    pub bottom: f64,
    pub verdict: VetoVerdict,
}

/// Compares a candidate's limiting top and bottom shares.
pub fn veto_limit_probe(instance: &Instance, candidate: usize, tau: f64) -> Result<VetoProbe> {
    if candidate >= instance.m() {
        return Err(Error::InvalidArgument(format!("candidate {candidate} out of range")));
    }
    let stats = population_stats(instance)?;
    let (top, bottom) = (stats.top[candidate], stats.bottom[candidate]);
    let verdict = if bottom > top + tau { VetoVerdict::Loses } else { VetoVerdict::Undetermined };
    Ok(VetoProbe { candidate: Candidate(candidate), top, bottom, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::construct_pluralityveto_lb;

    #[test]
    fn two_candidate_identical() {
        let inst = Instance::single(3.0, vec![0.4, 0.4]).unwrap();
        let r = two_candidate_probe(&inst, 0, 1).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert!(r.applicable && r.holds);
    }

    #[test]
    fn extremal_family_approaches_bound() {
        let beta = 4.0;
        let mut last = 0.0;
        for delta in [0.5, 0.1, 0.01, 0.001] {
            let (_, r) = two_candidate_extremal(beta, delta).unwrap();
            assert!((r.p_xz - 0.5).abs() < 1e-12 && r.holds);
            assert!(r.ratio > last);
            last = r.ratio;
        }
        assert!((last / two_candidate_bound(beta) - 1.0).abs() < 1e-3, "{last}");
    }

    #[test]
    fn linearization_cases() {
        let r = linearization_probe(&[0.0, 0.0], &[0.0, 0.0], 5.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = linearization_probe(&[0.3, 0.6], &[0.3, 0.6], 5.0).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds && r.lhs >= 0.0);
        let r = linearization_probe(&[0.1], &[0.9], 5.0).unwrap();
        assert!(r.rhs < 0.0 && r.lhs >= 0.0 && r.holds);
        assert_eq!(linearization_sweep(2000, 1).violations, 0);
    }

    #[test]
    fn small_sweep_has_no_violations() {
        let reps = upper_bound_sweep(&[Rule::Copeland, Rule::Borda], 2..=5, 4, 5.0, 300, 9, 1e-9).unwrap();
        for r in reps {
            assert_eq!(r.violations, 0);
            assert!(r.max_ratio <= 1.0);
        }
    }

    #[test]
    fn all_zero_utilities_have_distortion_one() {
        let inst = Instance::single(2.0, vec![0.0; 4]).unwrap();
        let stats = population_stats(&inst).unwrap();
        let o = population_winner_from_stats(&stats, Rule::RandomDictator, &TieBreakOrder::identity(4), 1e-6).unwrap();
        assert_eq!(population_distortion(&stats, &o.decided().unwrap().lottery), 1.0);
    }

    #[test]
    fn veto_probe_cases() {
        let r = construct_pluralityveto_lb(400, 10.0).unwrap();
        assert_eq!(veto_limit_probe(&r.instance, 0, 1e-9).unwrap().verdict, VetoVerdict::Loses);
        let inst = Instance::single(30.0, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(veto_limit_probe(&inst, 0, 1e-9).unwrap().verdict, VetoVerdict::Undetermined);
        let flat = Instance::single(2.0, vec![0.5; 3]).unwrap();
        assert_eq!(veto_limit_probe(&flat, 1, 1e-9).unwrap().verdict, VetoVerdict::Undetermined);
    }

    #[test]
    fn pclc_cases() {
        // 2 is the Condorcet loser
        let inst = Instance::single(5.0, vec![0.6, 0.8, 0.1]).unwrap();
        let c = pclc_probe(&inst, Rule::Copeland, 2000, 5, 1, 1e-6).unwrap();
        assert_eq!(c.loser, Candidate(2));
        assert_eq!(c.probability, 0.0);
        let flat = Instance::single(2.0, vec![0.5; 3]).unwrap();
        assert!(matches!(pclc_probe(&flat, Rule::Copeland, 10, 1, 1, 1e-6), Err(Error::NoCondorcetLoser { .. })));
    }
}
