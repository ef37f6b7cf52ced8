//! Distortion measurement and numeric probes.

pub mod bounds;
pub mod empirical;
pub mod probes;
pub(crate) mod serde_inf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Candidate, Instance};
use crate::population::{population_stats, PopulationStats};
use crate::rules::{self, Rule, RuleOutcome, TieBreakOrder, ML_TOLERANCE};

pub use bounds::{rule_bounds, Bound, BoundReport};
pub use empirical::{empirical_distortion, empirical_distortions, sample_outcome, DistortionEstimate};
pub use probes::{
    linearization_probe, linearization_sweep, pclc_probe, random_instance, two_candidate_probe, upper_bound_sweep,
    veto_limit_probe, LinearizationReport, PclcReport, SweepReport, TwoCandidateReport, VetoProbe, VetoVerdict,
};

/// Default tolerance on decisive margins.
pub const DEFAULT_TAU: f64 = 1e-6;

/// A population-limit outcome, unless the limit is decided by a margin
/// smaller than the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PopulationOutcome {
    Decided { outcome: RuleOutcome },
    Ambiguous { margin: f64 },
}

impl PopulationOutcome {
    pub fn decided(&self) -> Option<&RuleOutcome> {
        match self {
            PopulationOutcome::Decided { outcome } => Some(outcome),
            PopulationOutcome::Ambiguous { .. } => None,
        }
    }

    pub fn winner(&self) -> Option<Candidate> {
        self.decided().and_then(|o| o.winner()).map(Candidate)
    }

    pub fn is_ambiguous(&self) -> bool {
        matches!(self, PopulationOutcome::Ambiguous { .. })
    }
}

fn score_gap(scores: &[f64]) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    if s.len() < 2 {
        f64::INFINITY
    } else {
        s[0] - s[1]
    }
}

/// Applies `rule` to the limiting shares of `stats`.
pub fn population_winner_from_stats(
    stats: &PopulationStats,
    rule: Rule,
    tb: &TieBreakOrder,
    tau: f64,
) -> Result<PopulationOutcome> {
    let decided = |outcome| Ok(PopulationOutcome::Decided { outcome });
    match rule {
        Rule::Plurality | Rule::Borda => {
            let o = if rule == Rule::Plurality { rules::plurality(stats, tb)? } else { rules::borda(stats, tb)? };
            let gap = score_gap(o.scores.as_deref().unwrap_or_default());
            if gap < tau {
                Ok(PopulationOutcome::Ambiguous { margin: gap })
            } else {
                decided(o)
            }
        }
        Rule::Copeland => {
            let m = stats.m;
            let closest = (0..m)
                .flat_map(|j| (j + 1..m).map(move |k| (j, k)))
                .map(|(j, k)| (stats.p(j, k) - 0.5).abs())
                .fold(f64::INFINITY, f64::min);
            if closest < tau {
                Ok(PopulationOutcome::Ambiguous { margin: closest })
            } else {
                decided(rules::copeland(stats, tb)?)
            }
        }
        Rule::RandomDictator => decided(rules::random_dictator(stats)),
        Rule::MaximalLotteries => decided(rules::maximal_lotteries(stats, ML_TOLERANCE)?),
        Rule::PluralityVeto | Rule::PrunedPluralityVeto { .. } => Err(Error::UnsupportedRule(format!(
            "{rule} has no share-based limit; use veto_limit_probe"
        ))),
    }
}

/// The rule's outcome in the large-electorate limit of `instance`.
pub fn population_winner(instance: &Instance, rule: Rule, tb: &TieBreakOrder, tau: f64) -> Result<PopulationOutcome> {
    population_winner_from_stats(&population_stats(instance)?, rule, tb, tau)
}

/// Expected per-voter welfare of an outcome lottery.
pub fn outcome_welfare(stats: &PopulationStats, lottery: &[f64]) -> f64 {
    lottery.iter().zip(&stats.util).map(|(p, u)| p * u).sum()
}

/// `max_j Util_j / welfare`, taking `0/0` as 1 and `x/0` as infinite.
pub fn distortion_ratio(optimal: f64, welfare: f64) -> f64 {
    if optimal <= 0.0 {
        1.0
    } else if welfare <= 0.0 {
        f64::INFINITY
    } else {
        optimal / welfare
    }
}

/// Population distortion of an outcome lottery.
pub fn population_distortion(stats: &PopulationStats, lottery: &[f64]) -> f64 {
    distortion_ratio(stats.max_util(), outcome_welfare(stats, lottery))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::construct_copeland_lb;

    #[test]
    fn copeland_construction_elects_w() {
        let r = construct_copeland_lb(30.0, 0.1).unwrap();
        let o = population_winner(&r.instance, Rule::Copeland, r.tiebreak.as_ref().unwrap(), DEFAULT_TAU).unwrap();
        assert_eq!(o.winner(), Some(r.role("W")));
    }

    #[test]
    fn plurality_follows_utilities_at_large_beta() {
        let inst = Instance::single(40.0, vec![0.2, 0.9, 0.5]).unwrap();
        let o = population_winner(&inst, Rule::Plurality, &TieBreakOrder::identity(3), DEFAULT_TAU).unwrap();
        assert_eq!(o.winner(), Some(Candidate(1)));
    }

    #[test]
    fn exact_ties_are_ambiguous() {
        let inst = Instance::single(3.0, vec![0.7, 0.7, 0.1]).unwrap();
        let tb = TieBreakOrder::identity(3);
        for rule in [Rule::Plurality, Rule::Borda, Rule::Copeland] {
            assert!(population_winner(&inst, rule, &tb, DEFAULT_TAU).unwrap().is_ambiguous(), "{rule}");
        }
        assert!(!population_winner(&inst, Rule::RandomDictator, &tb, DEFAULT_TAU).unwrap().is_ambiguous());
        assert!(population_winner(&inst, Rule::PluralityVeto, &tb, DEFAULT_TAU).is_err());
    }

    #[test]
    fn distortion_conventions() {
        assert_eq!(distortion_ratio(0.0, 0.0), 1.0);
        assert_eq!(distortion_ratio(0.5, 0.0), f64::INFINITY);
        assert_eq!(distortion_ratio(0.5, 0.25), 2.0);
    }
}
