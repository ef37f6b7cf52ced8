//! Monte Carlo distortion estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::population::{population_stats, PopulationStats};
use crate::rules::{self, Rule, RuleOutcome, TallyStats, TieBreakOrder, ML_TOLERANCE};
use crate::sampling::{sample_tally, sample_tally_with_profile, sample_top_tally};
use crate::seed::trial_seed;

use super::{distortion_ratio, outcome_welfare, population_winner_from_stats, serde_inf, DEFAULT_TAU};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Distortion of one rule on one instance: the population limit and a
/// Monte Carlo estimate over independent elections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionEstimate {
    pub rule: String,
    /// `None` when the limit outcome is ambiguous or has no share-based form.
    #[serde(with = "serde_inf::option")]
    pub population_value: Option<f64>,
    /// `max_j Util_j` over the mean welfare of the elected outcomes; infinite
    /// when that mean is zero.
    #[serde(with = "serde_inf")]
    pub empirical_mean: f64,
    /// 95% interval from inverting the normal interval of the mean welfare;
    /// present only with at least two trials.
    #[serde(with = "serde_inf::option")]
    pub ci_lo: Option<f64>,
    #[serde(with = "serde_inf::option")]
    pub ci_hi: Option<f64>,
    pub optimal_welfare: f64,
    pub mean_welfare: f64,
    /// Summed outcome lotteries: for deterministic rules, how often each
    /// candidate was elected.
    pub selections: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl DistortionEstimate {
    pub fn is_unbounded(&self) -> bool {
        self.empirical_mean.is_infinite()
    }

    /// Whether `x` lies in the confidence interval, with relative slack
    /// `rel` for degenerate zero-width intervals.
    pub fn ci_contains(&self, x: f64, rel: f64) -> bool {
        match (self.ci_lo, self.ci_hi) {
            (Some(lo), Some(hi)) => x >= lo * (1.0 - rel) && x <= hi * (1.0 + rel),
            _ => false,
        }
    }
}

/// Which sufficient statistic a rule needs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Need {
    Top,
    Pairwise,
    Rankings,
}

fn need(rule: Rule) -> Need {
    match rule {
        Rule::Plurality | Rule::RandomDictator => Need::Top,
        Rule::Borda | Rule::Copeland | Rule::MaximalLotteries => Need::Pairwise,
        Rule::PluralityVeto | Rule::PrunedPluralityVeto { .. } => Need::Rankings,
    }
}

enum Sample {
    Top(rules::TopTally),
    Full(TallyStats),
}

fn draw(instance: &Instance, level: Need, n: usize, seed: u64) -> Result<Sample> {
    Ok(match level {
        Need::Top => Sample::Top(sample_top_tally(instance, n, seed)?),
        Need::Pairwise => Sample::Full(sample_tally(instance, n, seed)?),
        Need::Rankings => Sample::Full(sample_tally_with_profile(instance, n, seed)?),
    })
}

fn apply(rule: Rule, s: &Sample, tb: &TieBreakOrder) -> Result<RuleOutcome> {
    match (rule, s) {
        (Rule::Plurality, Sample::Top(t)) => rules::plurality(t, tb),
        (Rule::RandomDictator, Sample::Top(t)) => Ok(rules::random_dictator(t)),
        (Rule::MaximalLotteries, Sample::Full(t)) => rules::maximal_lotteries(t, ML_TOLERANCE),
        (_, Sample::Full(t)) => rule.apply(t, tb),
        (_, Sample::Top(_)) => unreachable!("top-only sample drawn for {rule}"),
    }
}

/// Draws one election of `n` voters and applies `rule`, using the cheapest
/// sufficient statistic for the rule.
pub fn sample_outcome(instance: &Instance, rule: Rule, n: usize, seed: u64, tb: &TieBreakOrder) -> Result<RuleOutcome> {
    apply(rule, &draw(instance, need(rule), n, seed)?, tb)
}

fn summarize(
    rule: Rule,
    stats: &PopulationStats,
    population_value: Option<f64>,
    outcomes: &[RuleOutcome],
    n: usize,
    seed: u64,
) -> DistortionEstimate {
    let m = stats.m;
    let trials = outcomes.len();
    let welfare: Vec<f64> = outcomes.iter().map(|o| outcome_welfare(stats, &o.lottery)).collect();
    let mean = welfare.iter().sum::<f64>() / trials as f64;
    let opt = stats.max_util();
    let mut selections = vec![0.0; m];
    for o in outcomes {
        for (s, p) in selections.iter_mut().zip(&o.lottery) {
            *s += p;
        }
    }
    let (ci_lo, ci_hi) = if trials >= 2 {
        let var = welfare.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let half = Z95 * (var / trials as f64).sqrt();
        (Some(distortion_ratio(opt, mean + half)), Some(distortion_ratio(opt, mean - half)))
    } else {
        (None, None)
    };
    DistortionEstimate {
        rule: rule.to_string(),
        population_value,
        empirical_mean: distortion_ratio(opt, mean),
        ci_lo,
        ci_hi,
        optimal_welfare: opt,
        mean_welfare: mean,
        selections,
        n,
        trials,
        seed,
    }
}

fn limit_value(stats: &PopulationStats, rule: Rule, tb: &TieBreakOrder) -> Result<Option<f64>> {
    if rule.needs_profile() {
        return Ok(None);
    }
    let o = population_winner_from_stats(stats, rule, tb, DEFAULT_TAU)?;
    Ok(o.decided().map(|o| super::population_distortion(stats, &o.lottery)))
}

fn check(n: usize, trials: usize) -> Result<()> {
    if n == 0 || trials == 0 {
        return Err(Error::InvalidArgument(format!("need n >= 1 and trials >= 1, got n = {n}, trials = {trials}")));
    }
    Ok(())
}

/// Runs `trials` independent elections of `n` voters. Trial `t` uses the
/// stream derived from `(seed, t)`.
pub fn empirical_distortion(
    instance: &Instance,
    rule: Rule,
    n: usize,
    trials: usize,
    seed: u64,
    tb: &TieBreakOrder,
) -> Result<DistortionEstimate> {
    Ok(empirical_distortions(instance, &[rule], n, trials, seed, tb)?.remove(0))
}

/// Like [`empirical_distortion`] for several rules evaluated on the same
/// elections. Each trial draws the richest statistic any listed rule needs,
/// so results for a rule can differ from a single-rule run with the same
/// seed.
pub fn empirical_distortions(
    instance: &Instance,
    rule_list: &[Rule],
    n: usize,
    trials: usize,
    seed: u64,
    tb: &TieBreakOrder,
) -> Result<Vec<DistortionEstimate>> {
    check(n, trials)?;
    let stats = population_stats(instance)?;
    let level = rule_list.iter().map(|&r| need(r)).max().unwrap_or(Need::Top);
    let mut outcomes: Vec<Vec<RuleOutcome>> = vec![Vec::with_capacity(trials); rule_list.len()];
    for t in 0..trials {
        let sample = draw(instance, level, n, trial_seed(seed, t as u64))?;
        for (slot, &rule) in outcomes.iter_mut().zip(rule_list) {
            slot.push(apply(rule, &sample, tb)?);
        }
    }
    rule_list
        .iter()
        .zip(&outcomes)
        .map(|(&rule, os)| Ok(summarize(rule, &stats, limit_value(&stats, rule, tb)?, os, n, seed)))
        .collect()
}
