//! Adversarial instance families with known population-limit outcomes.
//!
//! Each constructor validates its parameter window, builds the instance,
//! evaluates it exactly through [`population_stats`] and reports the
//! intended outcome alongside the derived parameters and the status of every
//! precondition.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Candidate, Instance, SymmetricSubsetFamily, VoterType};
use crate::population::{population_stats, PopulationStats};
use crate::rules::coarsen::coarsen_shares;
use crate::rules::TieBreakOrder;
use crate::sigmoid::sigma;

/// Failure probability used for the reported Hoeffding sample size.
pub const HOEFFDING_ALPHA: f64 = 0.01;

/// What the construction forces the rule to do in the large-electorate
/// limit, and how bad it is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub family: String,
    pub instance: Instance,
    /// The low-welfare winner the construction forces, when the rule is
    /// deterministic and the winner is pinned down.
    pub predicted_winner: Option<Candidate>,
    /// A candidate the rule is forced to reject.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_loser: Option<Candidate>,
    /// The limiting output lottery, for randomized rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_lottery: Option<Vec<f64>>,
    pub optimal_candidate: Candidate,
    /// Welfare of the optimum over welfare of the forced outcome, from the
    /// exact population statistics.
    pub population_distortion: f64,
    /// The same ratio from the family's closed form.
    pub closed_form_distortion: f64,
    pub internal_params: BTreeMap<String, f64>,
    pub validity_flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiebreak: Option<TieBreakOrder>,
    /// Candidate index of each named role.
    pub roles: BTreeMap<String, Candidate>,
}

impl ConstructionReport {
    pub fn all_valid(&self) -> bool {
        self.validity_flags.values().all(|&v| v)
    }

    pub fn param(&self, name: &str) -> f64 {
        self.internal_params[name]
    }

    pub fn role(&self, name: &str) -> Candidate {
        self.roles[name]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Builder {
    params: BTreeMap<String, f64>,
    flags: BTreeMap<String, bool>,
    roles: BTreeMap<String, Candidate>,
}

impl Builder {
    fn new() -> Self {
        Builder { params: BTreeMap::new(), flags: BTreeMap::new(), roles: BTreeMap::new() }
    }

    fn param(&mut self, k: &str, v: f64) -> &mut Self {
        self.params.insert(k.to_string(), v);
        self
    }

    fn flag(&mut self, k: &str, v: bool) -> &mut Self {
        self.flags.insert(k.to_string(), v);
        self
    }

    fn role(&mut self, k: &str, j: usize) -> &mut Self {
        self.roles.insert(k.to_string(), Candidate(j));
        self
    }

    fn report(self, family: &str, instance: Instance, stats: &PopulationStats, realized: f64, closed: f64) -> ConstructionReport {
        ConstructionReport {
            family: family.to_string(),
            instance,
            predicted_winner: None,
            predicted_loser: None,
            predicted_lottery: None,
            optimal_candidate: Candidate(stats.optimal()),
            population_distortion: stats.max_util() / realized,
            closed_form_distortion: closed,
            internal_params: self.params,
            validity_flags: self.flags,
            tiebreak: None,
            roles: self.roles,
        }
    }
}

fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

/// Top-choice probability of `B` for one voter of the random-dictator family.
pub fn rd_top_prob_b(m: usize, beta: f64, epsilon: f64) -> f64 {
    1.0 / ((beta * epsilon).exp() + 1.0 + (m as f64 - 2.0) * (-beta * (1.0 - epsilon)).exp())
}

/// `m − 1` equiprobable voter types; type `k` values its own candidate at 1,
/// the compromise `B = 0` at `1 − ε` and everyone else at 0.
pub fn construct_rd_lb(m: usize, beta: f64, epsilon: f64) -> Result<ConstructionReport> {
    if m < 3 {
        return Err(precondition(format!("m = {m} < 3")));
    }
    let cap = (m as f64 - 2.0) / (m as f64 - 1.0);
    if !(epsilon > 0.0 && epsilon < cap) {
        return Err(precondition(format!("epsilon = {epsilon} outside (0, (m-2)/(m-1)) = (0, {cap})")));
    }
    let w = 1.0 / (m - 1) as f64;
    let types = (1..m)
        .map(|k| {
            let mut u = vec![0.0; m];
            u[0] = 1.0 - epsilon;
            u[k] = 1.0;
            VoterType { fraction: w, utilities: u }
        })
        .collect();
    let inst = Instance::new(m, beta, types, vec![])?;
    let stats = population_stats(&inst)?;
    let q_b = rd_top_prob_b(m, beta, epsilon);
    let closed = (1.0 - epsilon) / (q_b * (1.0 - epsilon) + (1.0 - q_b) * w);
    let realized: f64 = (0..m).map(|j| stats.top[j] * stats.util[j]).sum();

    let mut b = Builder::new();
    b.param("epsilon", epsilon)
        .param("q_B", q_b)
        .param("util_B", 1.0 - epsilon)
        .param("util_other", w)
        .param("limit_distortion", (1.0 - epsilon) * (m - 1) as f64)
        .flag("B_is_optimal", stats.optimal() == 0)
        .role("B", 0);
    let lottery = stats.top.clone();
    let mut r = b.report("rd", inst, &stats, realized, closed);
    r.predicted_lottery = Some(lottery);
    Ok(r)
}

/// The share `γ` of voters who like only `W`.
pub fn plurality_gamma(m: usize, beta: f64, epsilon: f64) -> f64 {
    if beta.exp() <= m as f64 {
        (2.0 + epsilon) / beta.exp()
    } else {
        (2.0 + epsilon) / m as f64
    }
}

/// A `γ` share likes only `W = 0`; everyone else likes all candidates but `W`
/// equally, so they split their top votes.
pub fn construct_plurality_lb(m: usize, beta: f64, epsilon: f64) -> Result<ConstructionReport> {
    if m < 4 {
        return Err(precondition(format!("m = {m} < 4")));
    }
    if !(beta >= 4f64.ln()) {
        return Err(precondition(format!("beta = {beta} < ln 4")));
    }
    if !(epsilon > 0.0) {
        return Err(precondition(format!("epsilon = {epsilon} must be positive")));
    }
    let gamma = plurality_gamma(m, beta, epsilon);
    if gamma >= 1.0 {
        return Err(precondition(format!("gamma = {gamma} >= 1; epsilon is too large")));
    }
    let mut fan = vec![0.0; m];
    fan[0] = 1.0;
    let mut rest = vec![1.0; m];
    rest[0] = 0.0;
    let inst = Instance::new(
        m,
        beta,
        vec![VoterType { fraction: gamma, utilities: fan }, VoterType { fraction: 1.0 - gamma, utilities: rest }],
        vec![],
    )?;
    let stats = population_stats(&inst)?;
    let t_w = stats.top[0];
    let mut b = Builder::new();
    b.param("gamma", gamma)
        .param("epsilon", epsilon)
        .param("top_share_W", t_w)
        .param("top_share_other", stats.top[1])
        .param("case", if beta.exp() <= m as f64 { 1.0 } else { 2.0 })
        .flag("top_share_W_gt_1_over_m", t_w > 1.0 / m as f64)
        .flag("W_strictly_most_top_votes", (1..m).all(|j| stats.top[j] < t_w))
        .role("W", 0);
    let mut r = b.report("plurality", inst, &stats, stats.util[0], (1.0 - gamma) / gamma);
    r.predicted_winner = Some(Candidate(0));
    Ok(r)
}

/// The interval of `β` allowed by both PluralityVeto conditions at `m`,
/// or `None` when they are incompatible.
pub fn pluralityveto_beta_window(m: usize) -> Option<(f64, f64)> {
    let lnm = (m as f64).ln();
    let hi = m as f64 / (3.0 * lnm);
    let g = |b: f64| b - 2.0 * b.ln() - 2.0 * lnm.ln();
    // g is increasing for β > 2
    if g(hi) < 0.0 {
        return None;
    }
    let (mut a, mut z) = (2.0, hi);
    if g(a) >= 0.0 {
        return Some((a, hi));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + z);
        if g(mid) >= 0.0 {
            z = mid;
        } else {
            a = mid;
        }
    }
    Some((z, hi))
}

/// Half the voters are indifferent among all candidates but `B = 0`, which
/// they value at 0; the other half value `B` at 1/2 and a random subset of
/// the rest at 1.
pub fn construct_pluralityveto_lb(m: usize, beta: f64) -> Result<ConstructionReport> {
    if m < 10 {
        return Err(precondition(format!("m = {m} < 10")));
    }
    let mf = m as f64;
    let lnm = mf.ln();
    if !(beta <= mf / (3.0 * lnm)) {
        return Err(precondition(format!("beta <= m/(3 ln m) fails: {beta} > {}", mf / (3.0 * lnm))));
    }
    if !(beta >= 2.0 * beta.ln() + 2.0 * lnm.ln()) {
        return Err(precondition(format!(
            "beta >= 2 ln beta + 2 ln ln m fails: {beta} < {}",
            2.0 * beta.ln() + 2.0 * lnm.ln()
        )));
    }
    let k = ((mf - 1.0) / (beta * lnm)).floor() as usize;
    let low = 2.0 / (beta * lnm);
    let mut u1 = vec![low; m];
    u1[0] = 0.0;
    let fam = SymmetricSubsetFamily { fraction: 0.5, special: 0, base: 0.5, high: 1.0, low: 0.0, k };
    let inst = Instance::new(m, beta, vec![VoterType { fraction: 0.5, utilities: u1 }], vec![fam])?;
    let stats = population_stats(&inst)?;

    let best_other = (1..m).map(|j| stats.util[j]).fold(0.0, f64::max);
    let e2 = (-2.0 / lnm).exp();
    let bottom_bound = 0.5 / (E * mf).powf(e2);
    let top_bound = 5.0 / (4.0 * mf);
    let min_top = stats.top.iter().copied().fold(f64::INFINITY, f64::min);
    let mut b = Builder::new();
    b.param("k", k as f64)
        .param("type1_other_utility", low)
        .param("top_B", stats.top[0])
        .param("top_B_bound", top_bound)
        .param("bottom_B", stats.bottom[0])
        .param("bottom_B_bound", bottom_bound)
        .param("util_B", stats.util[0])
        .param("util_other_max", best_other)
        .param("util_other_bound", 3.0 / (2.0 * beta * lnm))
        .param("distortion_bound", beta * lnm / 6.0)
        .param("min_top_share", min_top)
        .flag("beta_le_m_over_3lnm", true)
        .flag("beta_ge_2lnbeta_plus_2lnlnm", true)
        .flag("relaxed_beta_ge_3(1+lnlnm)", beta >= 3.0 * (1.0 + lnm.ln()))
        .flag("floor_k_ge_2m_over_3beta_lnm", k as f64 >= 2.0 * mf / (3.0 * beta * lnm))
        .flag("top_B_le_5_over_4m", stats.top[0] <= top_bound)
        .flag("bottom_bound_gt_5_over_4m", bottom_bound > top_bound)
        .flag("bottom_B_gt_top_B", stats.bottom[0] > stats.top[0])
        .flag("no_pruning_alpha_1_3", min_top >= 1.3 / (7.3 * mf))
        .role("B", 0);
    let mut r = b.report("plurality_veto", inst, &stats, best_other, 0.25 / best_other);
    r.predicted_loser = Some(Candidate(0));
    Ok(r)
}

/// Margins and the derived `p`, `q` for the Copeland construction.
fn copeland_params(beta: f64, eta: f64, delta: f64) -> (f64, f64) {
    let eps1 = 1.0 / beta;
    let sd = sigma(beta, delta / beta);
    let sm1 = sigma(beta, -1.0);
    let p = (sd - 0.5 - eps1) / (sd - sm1);
    let q = (p * (sigma(beta, eta) - 0.5) - eps1) / (0.5 - sm1);
    (p, q)
}

/// Three candidates `B = 0`, `W = 1`, `Y = 2` whose population majority
/// relation is the cycle `W → Y → B → W`, with ties broken `W ▷ Y ▷ B`.
pub fn construct_copeland_lb(beta: f64, epsilon: f64) -> Result<ConstructionReport> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(precondition(format!("epsilon = {epsilon} outside (0, 1/4)")));
    }
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(precondition(format!("beta = {beta} must be finite and >= 1")));
    }
    let eta = epsilon;
    let delta = (3.0 * epsilon).sqrt();
    let (p, q) = copeland_params(beta, eta, delta);
    if !(p > 0.0 && q > 0.0 && p + q < 1.0) {
        return Err(precondition(format!("beta = {beta} too small: p = {p}, q = {q}")));
    }
    let (bi, wi, yi) = (0, 1, 2);
    let util = |ub: f64, uw: f64, uy: f64| vec![ub, uw, uy];
    let types = vec![
        VoterType { fraction: p, utilities: util(1.0 - eta, 0.0, 1.0) },
        VoterType { fraction: q, utilities: util(1.0, delta / beta, 0.0) },
        VoterType { fraction: 1.0 - p - q, utilities: util(0.0, delta / beta, 0.0) },
    ];
    let inst = Instance::new(3, beta, types, vec![])?;
    let stats = population_stats(&inst)?;
    let (wy, yb, bw) = (stats.p(wi, yi), stats.p(yi, bi), stats.p(bi, wi));
    if !(wy > 0.5 && yb > 0.5 && bw > 0.5) {
        return Err(precondition(format!(
            "beta = {beta} too small: margins p_WY = {wy}, p_YB = {yb}, p_BW = {bw} not all above 1/2"
        )));
    }
    let closed = beta * (p * (1.0 - eta) + q) / (delta * (1.0 - p));
    let alpha = delta * (1.0 - delta * delta / 12.0);
    let mut b = Builder::new();
    b.param("p", p)
        .param("q", q)
        .param("eta", eta)
        .param("delta", delta)
        .param("epsilon_prime", 1.0 / beta)
        .param("s", sigma(1.0, delta))
        .param("p_WY", wy)
        .param("p_YB", yb)
        .param("p_BW", bw)
        .param("p_limit", alpha / (2.0 + alpha))
        .param("ratio_limit", (1.0 - delta * delta / 12.0) * (1.0 - eta / 2.0))
        .flag("p_positive", p > 0.0)
        .flag("q_positive", q > 0.0)
        .flag("p_plus_q_le_1", p + q <= 1.0)
        .flag("margin_WY_gt_half", wy > 0.5)
        .flag("margin_YB_gt_half", yb > 0.5)
        .flag("margin_BW_gt_half", bw > 0.5)
        .flag("distortion_ge_(1-eps)beta", closed >= (1.0 - epsilon) * beta)
        .role("B", bi)
        .role("W", wi)
        .role("Y", yi);
    let mut r = b.report("copeland", inst, &stats, stats.util[wi], closed);
    r.predicted_winner = Some(Candidate(wi));
    r.tiebreak = Some(TieBreakOrder::new(vec![wi, yi, bi])?);
    Ok(r)
}

/// The idealized parameters `(p, q, s)` for margin excess `γ`.
pub fn tournament_params(gamma: f64) -> (f64, f64, f64) {
    let g2 = gamma * gamma;
    let p = (6.0 * gamma + 4.0 * g2) / (1.0 + 6.0 * gamma);
    let q = (4.0 * gamma - 8.0 * g2) / (1.0 + 6.0 * gamma);
    let s = (0.5 + 4.0 * gamma + 6.0 * g2) / (1.0 - 4.0 * g2);
    (p, q, s)
}

/// The error term bounding how far each population margin sits from
/// `1/2 + γ`.
pub fn tournament_error(beta: f64, eta: f64, delta: f64) -> f64 {
    (-beta).exp() + (-beta * eta).exp() + (-beta * (1.0 - eta)).exp() + (delta - beta).exp()
}

/// Default `γ` for precision `ρ`.
pub fn default_tournament_gamma(rho: f64) -> f64 {
    0.01 * f64::min(1.0, 2.0 * rho / 3.0 * 0.9)
}

/// Smallest `β` (to bisection precision) with error term below `γ/4`.
pub fn tournament_beta0(epsilon: f64, gamma: f64) -> f64 {
    let eta = 4.0 * epsilon / 3.0;
    let (_, _, s) = tournament_params(gamma);
    let delta = (s / (1.0 - s)).ln();
    let ok = |b: f64| tournament_error(b, eta, delta) < gamma / 4.0;
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Three candidates `B = 0`, `W = 1`, `Y = 2` whose population margins all
/// sit within `γ/4` of `1/2 + γ`, so every `ρ`-coarsening of a large sample
/// is the symmetric zero cycle.
pub fn construct_tournament_lb(rho: f64, epsilon: f64, gamma: f64, beta: f64) -> Result<ConstructionReport> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(precondition(format!("rho = {rho} must be positive")));
    }
    if !(epsilon > 0.0 && 4.0 * epsilon / 3.0 < 1.0) {
        return Err(precondition(format!("epsilon = {epsilon} must lie in (0, 3/4)")));
    }
    if !(gamma > 0.0 && gamma < 2.0 * rho / 3.0) {
        return Err(precondition(format!("gamma = {gamma} outside (0, 2 rho/3) = (0, {})", 2.0 * rho / 3.0)));
    }
    let eta = 4.0 * epsilon / 3.0;
    let (p, q, s) = tournament_params(gamma);
    if !(q > 0.0 && s < 1.0) {
        return Err(precondition(format!("gamma = {gamma} too large: q = {q}, s = {s}")));
    }
    let delta = (s / (1.0 - s)).ln();
    let err = tournament_error(beta, eta, delta);
    let beta0 = tournament_beta0(epsilon, gamma);
    if !(err < gamma / 4.0) {
        return Err(precondition(format!(
            "error term E = {err} >= gamma/4 = {}; need beta >= {beta0:.4}",
            gamma / 4.0
        )));
    }
    let (bi, wi, yi) = (0, 1, 2);
    let util = |ub: f64, uw: f64, uy: f64| vec![ub, uw, uy];
    let types = vec![
        VoterType { fraction: p, utilities: util(1.0 - eta, 0.0, 1.0) },
        VoterType { fraction: q, utilities: util(1.0, delta / beta, 0.0) },
        VoterType { fraction: 1.0 - p - q, utilities: util(0.0, delta / beta, 0.0) },
    ];
    let inst = Instance::new(3, beta, types, vec![])?;
    let stats = population_stats(&inst)?;
    let margins = [stats.p(wi, yi), stats.p(yi, bi), stats.p(bi, wi)];
    let (lo, hi) = (0.5 + 0.75 * gamma, 0.5 + 1.25 * gamma);
    let coarse = coarsen_shares(&stats, rho)?;
    let zero_cycle = coarse.weight(wi, yi) == 0 && coarse.weight(yi, bi) == 0 && coarse.weight(bi, wi) == 0;
    let coefficient = (p * (1.0 - eta) + q) / (delta * (1.0 - p));
    let mut b = Builder::new();
    b.param("rho", rho)
        .param("epsilon", epsilon)
        .param("gamma", gamma)
        .param("eta", eta)
        .param("p", p)
        .param("q", q)
        .param("s", s)
        .param("delta", delta)
        .param("E", err)
        .param("beta0", beta0)
        .param("p_WY", margins[0])
        .param("p_YB", margins[1])
        .param("p_BW", margins[2])
        .param("welfare_coefficient", coefficient)
        .param("coefficient_limit", (5.0 - 3.0 * eta) / 8.0)
        .param("hoeffding_n", 32.0 / (gamma * gamma) * (6.0 / HOEFFDING_ALPHA).ln())
        .flag("gamma_lt_2rho_over_3", true)
        .flag("E_lt_gamma_over_4", true)
        .flag("margins_in_band", margins.iter().all(|&x| x > lo && x < hi))
        .flag("coarsened_zero_cycle", zero_cycle)
        .role("B", bi)
        .role("W", wi)
        .role("Y", yi);
    let mut r = b.report("tournament", inst, &stats, stats.util[wi], beta * coefficient);
    r.predicted_winner = Some(Candidate(wi));
    Ok(r)
}

/// One cyclic reassignment of roles to candidate indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relabeling {
    pub shift: usize,
    pub instance: Instance,
    pub roles: BTreeMap<String, Candidate>,
}

impl Relabeling {
    /// The role played by candidate `c`, if any.
    pub fn role_of(&self, c: Candidate) -> Option<&str> {
        self.roles.iter().find(|(_, &v)| v == c).map(|(k, _)| k.as_str())
    }
}

/// The `m` cyclic shifts `j → j + r (mod m)` of a construction, identity
/// first.
pub fn cyclic_relabelings(report: &ConstructionReport) -> Result<Vec<Relabeling>> {
    let m = report.instance.m();
    (0..m)
        .map(|r| {
            let perm: Vec<usize> = (0..m).map(|j| (j + r) % m).collect();
            let roles = report.roles.iter().map(|(k, c)| (k.clone(), Candidate(perm[c.0]))).collect();
            Ok(Relabeling { shift: r, instance: report.instance.relabel(&perm)?, roles })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rd_family() {
        let r = construct_rd_lb(20, 50.0, 0.2).unwrap();
        assert!(r.population_distortion >= 15.0);
        assert_relative_eq!(r.population_distortion, r.closed_form_distortion, max_relative = 1e-9);
        assert_eq!(r.optimal_candidate, Candidate(0));
        let far = construct_rd_lb(20, 700.0, 0.2).unwrap();
        assert_relative_eq!(far.closed_form_distortion, 0.8 * 19.0, max_relative = 1e-9);
        assert!(construct_rd_lb(20, 5.0, 18.0 / 19.0).is_err());
        assert!(construct_rd_lb(2, 5.0, 0.1).is_err());
    }

    #[test]
    fn plurality_family_cases() {
        let eps = 0.1;
        let r = construct_plurality_lb(100, 3.0, eps).unwrap();
        assert_relative_eq!(r.closed_form_distortion, 3f64.exp() / (2.0 + eps) - 1.0, max_relative = 1e-12);
        assert!((r.closed_form_distortion - 8.56).abs() < 0.01);
        assert!(r.all_valid(), "{:?}", r.validity_flags);
        assert_relative_eq!(r.population_distortion, r.closed_form_distortion, max_relative = 1e-9);

        let r = construct_plurality_lb(10, 5.0, eps).unwrap();
        assert_relative_eq!(r.closed_form_distortion, 10.0 / (2.0 + eps) - 1.0, max_relative = 1e-12);
        assert!(r.all_valid());
        assert!(construct_plurality_lb(3, 5.0, eps).is_err());
        assert!(construct_plurality_lb(10, 1.2, eps).is_err());
    }

    #[test]
    fn pluralityveto_window_contains_reference_interval() {
        let (lo, hi) = pluralityveto_beta_window(400).unwrap();
        assert!(lo <= 7.77 && hi >= 22.22, "{lo} {hi}");
        assert!(construct_pluralityveto_lb(400, 7.0).unwrap_err().to_string().contains("2 ln beta"));
        assert!(construct_pluralityveto_lb(400, 23.0).unwrap_err().to_string().contains("m/(3 ln m)"));
    }

    #[test]
    fn pluralityveto_family() {
        let r = construct_pluralityveto_lb(400, 10.0).unwrap();
        assert!(r.all_valid(), "{:?}", r.validity_flags);
        assert_relative_eq!(r.param("util_B"), 0.25, max_relative = 1e-12);
        assert!(r.param("util_other_max") <= r.param("util_other_bound"));
        assert!(r.population_distortion >= r.param("distortion_bound"));
        assert_relative_eq!(r.population_distortion, r.closed_form_distortion, max_relative = 1e-9);
        let (bottom, top) = (r.param("bottom_B_bound"), r.param("top_B_bound"));
        assert!((1.0 / bottom - 299.0).abs() < 1.0, "{}", 1.0 / bottom);
        assert_relative_eq!(top, 1.0 / 320.0);
    }

    #[test]
    fn copeland_family() {
        let r = construct_copeland_lb(30.0, 0.1).unwrap();
        let rp = |k| r.param(k);
        assert_relative_eq!(rp("p_WY"), 0.5 + 1.0 / 30.0, max_relative = 1e-9);
        assert_relative_eq!(rp("p_YB"), 0.5 + 1.0 / 30.0, max_relative = 1e-9);
        assert!(rp("p_BW") > 0.5);
        assert_relative_eq!(r.population_distortion, r.closed_form_distortion, max_relative = 1e-9);
        assert_eq!(r.tiebreak.as_ref().unwrap().priority(), &[1, 2, 0]);

        // the ratio to beta approaches its limit from below as beta grows
        let limit = rp("ratio_limit");
        let mut last = 0.0;
        for beta in [30.0, 300.0, 3000.0, 30000.0] {
            let x = construct_copeland_lb(beta, 0.1).unwrap().closed_form_distortion / beta;
            assert!(x > last && x < limit + 1e-3, "{beta}: {x}");
            last = x;
        }
        assert!(construct_copeland_lb(2.0, 0.1).is_err());
    }

    #[test]
    fn tournament_params_for_small_gamma() {
        let (p, q, s) = tournament_params(0.01);
        assert!((p - 0.0569811).abs() < 1e-6);
        assert!((q - 0.036981).abs() < 1e-6);
        assert!((s - 0.540817).abs() < 1e-6);
        // the idealized system holds exactly
        assert_relative_eq!((1.0 - p) * s, 0.51, max_relative = 1e-12);
        assert_relative_eq!(p + (1.0 - p - q) / 2.0, 0.51, max_relative = 1e-12);
        assert_relative_eq!(p + q + (1.0 - p - q) * (1.0 - s), 0.51, max_relative = 1e-12);
    }

    #[test]
    fn tournament_family() {
        let beta0 = tournament_beta0(0.1, 0.01);
        assert!(beta0 > 40.0 && beta0 < 50.0, "{beta0}");
        let e = construct_tournament_lb(0.1, 0.1, 0.01, beta0 * 0.99).unwrap_err();
        assert!(e.to_string().contains("need beta >="));
        assert!(construct_tournament_lb(0.1, 0.1, 0.07, 60.0).is_err());

        let r = construct_tournament_lb(0.1, 0.1, 0.01, 60.0).unwrap();
        assert!(r.all_valid(), "{:?}", r.validity_flags);
        assert_relative_eq!(r.population_distortion, r.closed_form_distortion, max_relative = 1e-9);
        assert_relative_eq!(r.param("coefficient_limit"), 0.625 - 0.05, max_relative = 1e-12);
    }

    #[test]
    fn relabelings_share_the_coarsened_tournament() {
        let r = construct_tournament_lb(0.1, 0.1, 0.01, 60.0).unwrap();
        let rs = cyclic_relabelings(&r).unwrap();
        assert_eq!(rs[0].instance, r.instance);
        let views: Vec<_> = rs
            .iter()
            .map(|x| coarsen_shares(&population_stats(&x.instance).unwrap(), 0.1).unwrap())
            .collect();
        assert!(views.iter().all(|v| v == &views[0]));
        for k in 0..3 {
            let hits = rs.iter().filter(|x| x.role_of(Candidate(k)) == Some("W")).count();
            assert_eq!(hits, 1);
        }
    }
}
