//! Voting rules over tallied profiles.
//!
//! Tournament and positional rules only need shares, so they accept anything
//! implementing [`TopShares`] or [`PairwiseShares`]: an empirical
//! [`TallyStats`] or the population limit
//! [`PopulationStats`](crate::population::PopulationStats). The veto rules
//! need the rankings themselves.

pub mod coarsen;
pub mod lottery;
pub mod tally;
pub mod veto;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::is_permutation;

pub use coarsen::{coarsen, coarsen_shares, CoarsenedTournament};
pub use lottery::{maximal_lotteries, maximality_gap, MlSolver, ML_MAX_ITERATIONS, ML_TOLERANCE};
pub use tally::{tally, PairwiseShares, TallyStats, TopShares, TopTally};
pub use veto::{plurality_veto, pruned_plurality_veto, PPV_DEFAULT_ALPHA};

/// Strict priority over candidates; earlier entries win ties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TieBreakOrder {
    priority: Vec<usize>,
    rank: Vec<usize>,
}

impl TieBreakOrder {
    pub fn new(priority: Vec<usize>) -> Result<Self> {
        if !is_permutation(&priority, priority.len()) {
            return Err(Error::InvalidArgument(format!("tie-break {priority:?} is not a permutation")));
        }
        let mut rank = vec![0; priority.len()];
        for (r, &c) in priority.iter().enumerate() {
            rank[c] = r;
        }
        Ok(TieBreakOrder { priority, rank })
    }

    pub fn identity(m: usize) -> Self {
        TieBreakOrder { priority: (0..m).collect(), rank: (0..m).collect() }
    }

    pub fn len(&self) -> usize {
        self.priority.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priority.is_empty()
    }

    pub fn priority(&self) -> &[usize] {
        &self.priority
    }

    /// Whether `a ▷ b`.
    #[inline]
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::InvalidArgument(format!("tie-break covers {} candidates, expected {m}", self.len())));
        }
        Ok(())
    }

    /// Index of the largest score, ties going to the preferred candidate.
    pub fn argmax(&self, scores: &[f64]) -> usize {
        let mut best = 0;
        for j in 1..scores.len() {
            match scores[j].total_cmp(&scores[best]) {
                Ordering::Greater => best = j,
                Ordering::Equal if self.prefers(j, best) => best = j,
                _ => {}
            }
        }
        best
    }
}

impl TryFrom<Vec<usize>> for TieBreakOrder {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        TieBreakOrder::new(v)
    }
}

impl From<TieBreakOrder> for Vec<usize> {
    fn from(t: TieBreakOrder) -> Self {
        t.priority
    }
}

/// The lottery a rule outputs, with optional per-candidate scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub lottery: Vec<f64>,
    #[serde(default)]
    pub scores: Option<Vec<f64>>,
    pub rule: String,
    #[serde(default)]
    pub tiebreak: Option<Vec<usize>>,
}

impl RuleOutcome {
    pub fn point_mass(m: usize, winner: usize, rule: Rule) -> Self {
        let mut lottery = vec![0.0; m];
        lottery[winner] = 1.0;
        RuleOutcome { lottery, scores: None, rule: rule.to_string(), tiebreak: None }
    }

    fn with_scores(mut self, scores: Vec<f64>) -> Self {
        self.scores = Some(scores);
        self
    }

    fn with_tiebreak(mut self, tb: &TieBreakOrder) -> Self {
        self.tiebreak = Some(tb.priority.clone());
        self
    }

    /// The winner of a deterministic outcome.
    pub fn winner(&self) -> Option<usize> {
        self.lottery.iter().position(|&p| p == 1.0)
    }

    /// Probability assigned to `j`.
    pub fn prob(&self, j: usize) -> f64 {
        self.lottery[j]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }
}

/// The supported rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Plurality,
    Borda,
    Copeland,
    PluralityVeto,
    PrunedPluralityVeto { alpha: f64 },
    RandomDictator,
    MaximalLotteries,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Plurality,
        Rule::Borda,
        Rule::Copeland,
        Rule::PluralityVeto,
        Rule::PrunedPluralityVeto { alpha: PPV_DEFAULT_ALPHA },
        Rule::RandomDictator,
        Rule::MaximalLotteries,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Plurality => "plurality",
            Rule::Borda => "borda",
            Rule::Copeland => "copeland",
            Rule::PluralityVeto => "plurality_veto",
            Rule::PrunedPluralityVeto { .. } => "pruned_plurality_veto",
            Rule::RandomDictator => "random_dictator",
            Rule::MaximalLotteries => "maximal_lotteries",
        }
    }

    /// Rules whose output is a genuine lottery rather than a point mass.
    pub fn is_randomized(&self) -> bool {
        matches!(self, Rule::RandomDictator | Rule::MaximalLotteries)
    }

    /// Rules that need the full rankings, not just shares.
    pub fn needs_profile(&self) -> bool {
        matches!(self, Rule::PluralityVeto | Rule::PrunedPluralityVeto { .. })
    }

    /// Applies the rule to an empirical tally.
    ///
    /// The veto rules require the tally to carry its profile and use voter
    /// index order for vetoes.
    pub fn apply(&self, t: &TallyStats, tb: &TieBreakOrder) -> Result<RuleOutcome> {
        match *self {
            Rule::Plurality => plurality(t, tb),
            Rule::Borda => borda(t, tb),
            Rule::Copeland => copeland(t, tb),
            Rule::PluralityVeto => plurality_veto(t, None),
            Rule::PrunedPluralityVeto { alpha } => pruned_plurality_veto(t, alpha, None),
            Rule::RandomDictator => Ok(random_dictator(t)),
            Rule::MaximalLotteries => maximal_lotteries(t, ML_TOLERANCE),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::PrunedPluralityVeto { alpha } if *alpha != PPV_DEFAULT_ALPHA => {
                write!(f, "{}:{alpha}", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for Rule {
    type Err = Error;

    /// Accepts the snake_case names (hyphens allowed) and
    /// `pruned_plurality_veto:<alpha>`.
    fn from_str(s: &str) -> Result<Rule> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let (head, arg) = match norm.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (norm.as_str(), None),
        };
        let rule = match head {
            "plurality" => Rule::Plurality,
            "borda" => Rule::Borda,
            "copeland" => Rule::Copeland,
            "plurality_veto" | "pv" => Rule::PluralityVeto,
            "pruned_plurality_veto" | "ppv" => {
                let alpha = match arg {
                    Some(a) => a.parse().map_err(|_| Error::UnknownRule(s.to_string()))?,
                    None => PPV_DEFAULT_ALPHA,
                };
                if !(alpha > 0.0 && f64::is_finite(alpha)) {
                    return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
                }
                return Ok(Rule::PrunedPluralityVeto { alpha });
            }
            "random_dictator" | "rd" => Rule::RandomDictator,
            "maximal_lotteries" | "ml" => Rule::MaximalLotteries,
            _ => return Err(Error::UnknownRule(s.to_string())),
        };
        if arg.is_some() {
            return Err(Error::UnknownRule(s.to_string()));
        }
        Ok(rule)
    }
}

/// Most top choices.
pub fn plurality<T: TopShares + ?Sized>(t: &T, tb: &TieBreakOrder) -> Result<RuleOutcome> {
    let m = t.num_candidates();
    tb.check(m)?;
    let scores: Vec<f64> = (0..m).map(|j| t.top_share(j)).collect();
    let w = tb.argmax(&scores);
    Ok(RuleOutcome::point_mass(m, w, Rule::Plurality).with_scores(scores).with_tiebreak(tb))
}

/// Highest Borda score. Scores are `Σ_{k≠j} s_{j,k}`, in voter units for
/// count-backed tallies.
pub fn borda<T: PairwiseShares + ?Sized>(t: &T, tb: &TieBreakOrder) -> Result<RuleOutcome> {
    let m = t.num_candidates();
    tb.check(m)?;
    let scores: Vec<f64> = (0..m).map(|j| t.borda_score(j)).collect();
    let w = tb.argmax(&scores);
    Ok(RuleOutcome::point_mass(m, w, Rule::Borda).with_scores(scores).with_tiebreak(tb))
}

/// Most pairwise wins; exact halves count for the preferred candidate.
pub fn copeland<T: PairwiseShares + ?Sized>(t: &T, tb: &TieBreakOrder) -> Result<RuleOutcome> {
    let m = t.num_candidates();
    tb.check(m)?;
    let scores: Vec<f64> = (0..m)
        .map(|j| {
            (0..m)
                .filter(|&k| k != j)
                .filter(|&k| match t.majority(j, k) {
                    Ordering::Greater => true,
                    Ordering::Equal => tb.prefers(j, k),
                    Ordering::Less => false,
                })
                .count() as f64
        })
        .collect();
    let w = tb.argmax(&scores);
    Ok(RuleOutcome::point_mass(m, w, Rule::Copeland).with_scores(scores).with_tiebreak(tb))
}

/// The lottery equal to the top-choice shares.
pub fn random_dictator<T: TopShares + ?Sized>(t: &T) -> RuleOutcome {
    let lottery = (0..t.num_candidates()).map(|j| t.top_share(j)).collect();
    RuleOutcome { lottery, scores: None, rule: Rule::RandomDictator.to_string(), tiebreak: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Profile;

    struct Shares(Vec<f64>);

    impl TopShares for Shares {
        fn num_candidates(&self) -> usize {
            self.0.len()
        }
        fn top_share(&self, j: usize) -> f64 {
            self.0[j]
        }
    }

    pub(crate) struct Matrix(pub usize, pub Vec<f64>);

    impl PairwiseShares for Matrix {
        fn num_candidates(&self) -> usize {
            self.0
        }
        fn pairwise_share(&self, j: usize, k: usize) -> f64 {
            self.1[j * self.0 + k]
        }
    }

    pub(crate) fn cycle(margin: f64) -> Matrix {
        let (a, b) = (0.5 + margin, 0.5 - margin);
        Matrix(3, vec![0.0, a, b, b, 0.0, a, a, b, 0.0])
    }

    fn prof(m: usize, rs: &[&[usize]]) -> TallyStats {
        tally(Profile::from_rankings(m, rs.iter()).unwrap())
    }

    #[test]
    fn plurality_argmax_and_ties() {
        let id = TieBreakOrder::identity(3);
        assert_eq!(plurality(&Shares(vec![0.5, 0.3, 0.2]), &id).unwrap().winner(), Some(0));
        let tb = TieBreakOrder::new(vec![1, 0, 2]).unwrap();
        let o = plurality(&Shares(vec![0.4, 0.4, 0.2]), &tb).unwrap();
        assert_eq!(o.lottery, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn borda_unanimous_and_two_candidates() {
        let t = prof(3, &[&[2, 0, 1][..]; 5]);
        let o = borda(&t, &TieBreakOrder::identity(3)).unwrap();
        assert_eq!(o.winner(), Some(2));
        assert_eq!(o.scores.unwrap()[2], 10.0);

        let t = prof(2, &[&[1, 0], &[1, 0], &[0, 1]]);
        let id = TieBreakOrder::identity(2);
        assert_eq!(borda(&t, &id).unwrap().winner(), plurality(&t, &id).unwrap().winner());
    }

    #[test]
    fn copeland_cycle_uses_tiebreak() {
        let tb = TieBreakOrder::new(vec![1, 2, 0]).unwrap();
        let o = copeland(&cycle(0.1), &tb).unwrap();
        assert_eq!(o.scores.as_deref(), Some(&[1.0, 1.0, 1.0][..]));
        assert_eq!(o.winner(), Some(1));
    }

    #[test]
    fn copeland_half_margin() {
        // 0 and 1 tie head to head; both beat 2
        let t = prof(3, &[&[0, 1, 2], &[1, 0, 2]]);
        let o = copeland(&t, &TieBreakOrder::new(vec![1, 0, 2]).unwrap()).unwrap();
        assert_eq!(o.scores.as_deref(), Some(&[1.0, 2.0, 0.0][..]));
        assert_eq!(o.winner(), Some(1));
        let o = copeland(&t, &TieBreakOrder::identity(3)).unwrap();
        assert_eq!(o.winner(), Some(0));
    }

    #[test]
    fn random_dictator_is_top_shares() {
        let t = prof(3, &[&[0, 1, 2], &[1, 0, 2], &[1, 2, 0], &[2, 1, 0]]);
        assert_eq!(random_dictator(&t).lottery, vec![0.25, 0.5, 0.25]);
        assert_eq!(random_dictator(&Shares(vec![1.0, 0.0, 0.0])).winner(), Some(0));
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.to_string().parse::<Rule>().unwrap(), r);
        }
        assert_eq!("ppv:1.3".parse::<Rule>().unwrap(), Rule::PrunedPluralityVeto { alpha: 1.3 });
        assert_eq!("Plurality-Veto".parse::<Rule>().unwrap(), Rule::PluralityVeto);
        assert!("ppv:-1".parse::<Rule>().is_err());
        assert!("approval".parse::<Rule>().is_err());
    }

    #[test]
    fn outcome_json_shape() {
        let o = plurality(&Shares(vec![0.2, 0.8]), &TieBreakOrder::identity(2)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.to_json()).unwrap();
        assert_eq!(v["rule"], "plurality");
        assert_eq!(v["lottery"], serde_json::json!([0.0, 1.0]));
        assert_eq!(v["tiebreak"], serde_json::json!([0, 1]));
        assert!(v["scores"].is_array());
    }

    #[test]
    fn tiebreak_validation() {
        assert!(TieBreakOrder::new(vec![0, 0]).is_err());
        assert!(plurality(&Shares(vec![0.5, 0.5]), &TieBreakOrder::identity(3)).is_err());
        let tb: TieBreakOrder = serde_json::from_str("[2,0,1]").unwrap();
        assert!(tb.prefers(2, 0) && tb.prefers(0, 1));
    }
}
