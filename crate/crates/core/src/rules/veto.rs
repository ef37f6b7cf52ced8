//! PluralityVeto and its pruned variant.

use crate::error::{Error, Result};
use crate::instance::is_permutation;
use crate::sampling::Profile;

use super::{Rule, RuleOutcome, TallyStats};

/// Default pruning strength.
pub const PPV_DEFAULT_ALPHA: f64 = 1.0;

fn profile_of(t: &TallyStats) -> Result<&Profile> {
    match t.profile() {
        Some(p) if p.n() as u64 == t.n() => Ok(p),
        Some(p) => Err(Error::MalformedProfile(format!("{} rankings for a tally of {} voters", p.n(), t.n()))),
        None => Err(Error::MalformedProfile("the veto rules need the full rankings".into())),
    }
}

/// Runs the token and veto phases restricted to `active` candidates.
///
/// Returns the winner and the phase-one token counts.
fn run(profile: &Profile, active: &[bool], veto_order: Option<&[usize]>) -> Result<(usize, Vec<u64>)> {
    let (m, n) = (profile.m(), profile.n());
    if let Some(order) = veto_order {
        if !is_permutation(order, n) {
            return Err(Error::InvalidArgument(format!("veto order is not a permutation of the {n} voters")));
        }
    }
    let mut tokens = vec![0u64; m];
    for r in profile.iter() {
        let top = r.iter().find(|&&c| active[c as usize]).expect("some candidate is active");
        tokens[*top as usize] += 1;
    }
    let initial = tokens.clone();
    let mut alive = tokens.iter().filter(|&&c| c > 0).count();
    let mut step = 0;
    while alive > 1 {
        let voter = veto_order.map_or(step, |o| o[step]);
        step += 1;
        let r = profile.ranking(voter);
        let last = *r.iter().rev().find(|&&c| tokens[c as usize] > 0).expect("tokens remain");
        tokens[last as usize] -= 1;
        if tokens[last as usize] == 0 {
            alive -= 1;
        }
    }
    let winner = tokens.iter().position(|&c| c > 0).expect("one candidate keeps a token");
    Ok((winner, initial))
}

/// Every voter places a token on their top choice, then voters in
/// `veto_order` (voter index order by default) remove a token from their
/// lowest-ranked candidate still holding one. The last candidate holding
/// tokens wins.
pub fn plurality_veto(t: &TallyStats, veto_order: Option<&[usize]>) -> Result<RuleOutcome> {
    let profile = profile_of(t)?;
    let (w, tokens) = run(profile, &vec![true; profile.m()], veto_order)?;
    let scores = tokens.into_iter().map(|c| c as f64).collect();
    Ok(RuleOutcome { scores: Some(scores), ..RuleOutcome::point_mass(profile.m(), w, Rule::PluralityVeto) })
}

/// PluralityVeto on the candidates with at least `α n / ((6 + α) m)` top
/// votes, with rankings projected onto them.
pub fn pruned_plurality_veto(t: &TallyStats, alpha: f64, veto_order: Option<&[usize]>) -> Result<RuleOutcome> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let profile = profile_of(t)?;
    let m = profile.m();
    let threshold = alpha * t.n() as f64 / ((6.0 + alpha) * m as f64);
    let active: Vec<bool> = (0..m).map(|j| t.top_count(j) as f64 >= threshold).collect();
    if !active.contains(&true) {
        return Err(Error::EmptyCandidateSet);
    }
    let (w, tokens) = run(profile, &active, veto_order)?;
    let scores = tokens.into_iter().map(|c| c as f64).collect();
    Ok(RuleOutcome {
        scores: Some(scores),
        ..RuleOutcome::point_mass(m, w, Rule::PrunedPluralityVeto { alpha })
    })
}

/// Candidates that survive pruning at strength `alpha`.
pub fn pruning_survivors(t: &TallyStats, alpha: f64) -> Vec<usize> {
    let m = t.m();
    let threshold = alpha * t.n() as f64 / ((6.0 + alpha) * m as f64);
    (0..m).filter(|&j| t.top_count(j) as f64 >= threshold).collect()
}
