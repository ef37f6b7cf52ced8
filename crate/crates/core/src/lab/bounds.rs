//! Closed-form distortion bounds by rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::Rule;
use crate::sigmoid::two_candidate_bound;

/// A bound value, or its absence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Bound {
    Exact(f64),
    /// Holds only in a limit; the value is the leading term.
    Asymptotic(f64),
    NoneStated,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Bound::Exact(x) | Bound::Asymptotic(x) => Some(x),
            Bound::NoneStated => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(x) => write!(f, "{x:.6}"),
            Bound::Asymptotic(x) => write!(f, "{x:.6} (asymptotic)"),
            Bound::NoneStated => f.write_str("none stated"),
        }
    }
}

/// Known bounds for one rule at `(β, m, ε)`, optionally compared with an
/// observed distortion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rule: String,
    pub beta: f64,
    pub m: usize,
    pub epsilon: f64,
    pub upper_bound: Bound,
    pub lower_bound: Bound,
    /// Optimal distortion among rules with the probabilistic Condorcet loser
    /// property.
    pub pclc_bound: f64,
    pub observed: Option<f64>,
    pub satisfied: Option<bool>,
}

impl BoundReport {
    /// Records `observed` and checks it against the upper bound with
    /// relative tolerance `rel_tol`.
    pub fn with_observed(mut self, observed: f64, rel_tol: f64) -> Self {
        self.observed = Some(observed);
        self.satisfied = self.upper_bound.value().map(|ub| observed <= ub * (1.0 + rel_tol));
        self
    }
}

/// `β (1 + e^{−β}) / (1 − e^{−β})`.
pub fn tournament_upper(beta: f64) -> f64 {
    2.0 * two_candidate_bound(beta)
}

pub fn plurality_upper(beta: f64, m: usize) -> f64 {
    let mf = m as f64;
    f64::min((2.0 * beta).exp() / beta, mf * beta.exp() / ((mf - 1.0).ln() + 2.0) + 1.0)
}

pub fn plurality_lower(beta: f64, m: usize, epsilon: f64) -> f64 {
    f64::min(beta.exp() / (2.0 + epsilon) - 1.0, m as f64 / (2.0 + epsilon) - 1.0)
}

pub fn veto_lower(beta: f64, m: usize) -> f64 {
    beta * (m as f64).ln() / 6.0
}

pub fn rd_upper(beta: f64, m: usize) -> f64 {
    m as f64 * beta.exp()
}

/// Bounds for `rule`. Maximal lotteries attain the PCLC bound, which is
/// reported as their upper bound.
pub fn rule_bounds(rule: Rule, beta: f64, m: usize, epsilon: f64) -> Result<BoundReport> {
    if !(beta.is_finite() && beta > 0.0) || m < 2 {
        return Err(Error::InvalidArgument(format!("need beta > 0 and m >= 2, got beta = {beta}, m = {m}")));
    }
    let (ub, lb) = match rule {
        Rule::Copeland => (Bound::Exact(tournament_upper(beta)), Bound::Exact((1.0 - epsilon) * beta)),
        Rule::Borda => (Bound::Exact(tournament_upper(beta)), Bound::Asymptotic(beta)),
        Rule::Plurality => (Bound::Exact(plurality_upper(beta, m)), Bound::Exact(plurality_lower(beta, m, epsilon))),
        Rule::PluralityVeto | Rule::PrunedPluralityVeto { .. } => (Bound::NoneStated, Bound::Exact(veto_lower(beta, m))),
        Rule::RandomDictator => (Bound::Exact(rd_upper(beta, m)), Bound::Exact((1.0 - epsilon) * m as f64)),
        Rule::MaximalLotteries => (Bound::Exact(two_candidate_bound(beta)), Bound::NoneStated),
    };
    Ok(BoundReport {
        rule: rule.name().to_string(),
        beta,
        m,
        epsilon,
        upper_bound: ub,
        lower_bound: lb,
        pclc_bound: two_candidate_bound(beta),
        observed: None,
        satisfied: None,
    })
}
