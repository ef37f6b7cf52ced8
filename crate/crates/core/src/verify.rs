//! Named verification suites. Each suite evaluates one family of claims and
//! tabulates expected against observed values.

use std::collections::HashMap;
use std::fmt::{self, Display};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::constructions::{
    construct_copeland_lb, construct_plurality_lb, construct_pluralityveto_lb, construct_rd_lb,
    construct_tournament_lb, cyclic_relabelings, rd_top_prob_b, tournament_beta0, tournament_params,
};
use crate::error::{Error, Result};
use crate::lab::{
    empirical_distortion, empirical_distortions, linearization_sweep, population_winner, rule_bounds,
    upper_bound_sweep, Bound, DEFAULT_TAU,
};
use crate::population::population_stats;
use crate::rules::{coarsen, coarsen_shares, Rule, TieBreakOrder};
use crate::sampling::{ranking_probability, sample_ranking_gumbel, sample_ranking_sequential, sample_tally};
use crate::seed::{self, VERIFY};
use crate::sigmoid::{sigma, sigma_prime, two_candidate_bound};

/// One tabulated comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// What the expectation rests on: a closed form, a sweep, a simulation.
    pub basis: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, basis: &str, expected: impl Display, observed: impl Display, passed: bool) -> Check {
        Check {
            name: name.to_string(),
            basis: basis.to_string(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criterion: usize,
    pub checks: Vec<Check>,
    pub elapsed_secs: f64,
    pub budget_secs: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// A plain-text table of the checks.
    pub fn table(&self) -> String {
        let headers = ["check", "basis", "expected", "observed", "result"];
        let rows: Vec<[String; 5]> = self
            .checks
            .iter()
            .map(|c| {
                let r = if c.passed { "pass" } else { "FAIL" };
                [c.name.clone(), c.basis.clone(), c.expected.clone(), c.observed.clone(), r.to_string()]
            })
            .collect();
        let mut width = headers.map(str::len);
        for r in &rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            let padded: Vec<String> = cells.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(headers);
        out += &line(width.map(|w| "-".repeat(w)).each_ref().map(String::as_str));
        for r in &rows {
            out += &line(r.each_ref().map(String::as_str));
        }
        out
    }
}

/// The suites, numbered as the acceptance criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Sigmoid,
    Samplers,
    Linearization,
    UpperBounds,
    CopelandLb,
    PluralityLb,
    RandomDictator,
    PluralityVetoLb,
    TournamentLb,
    BoundsTable,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Sigmoid,
        Suite::Samplers,
        Suite::Linearization,
        Suite::UpperBounds,
        Suite::CopelandLb,
        Suite::PluralityLb,
        Suite::RandomDictator,
        Suite::PluralityVetoLb,
        Suite::TournamentLb,
        Suite::BoundsTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sigmoid => "sigmoid",
            Suite::Samplers => "samplers",
            Suite::Linearization => "linearization",
            Suite::UpperBounds => "upper-bounds",
            Suite::CopelandLb => "copeland-lb",
            Suite::PluralityLb => "plurality-lb",
            Suite::RandomDictator => "random-dictator",
            Suite::PluralityVetoLb => "plurality-veto-lb",
            Suite::TournamentLb => "tournament-lb",
            Suite::BoundsTable => "bounds-table",
        }
    }

    pub fn criterion(self) -> usize {
        Suite::ALL.iter().position(|&s| s == self).expect("listed") + 1
    }

    /// Wall-clock budget in seconds.
    pub fn budget_secs(self) -> f64 {
        match self {
            Suite::Sigmoid | Suite::BoundsTable => 1.0,
            Suite::Samplers => 30.0,
            Suite::Linearization => 10.0,
            Suite::UpperBounds => 300.0,
            Suite::CopelandLb | Suite::PluralityLb => 120.0,
            Suite::RandomDictator | Suite::TournamentLb => 60.0,
            Suite::PluralityVetoLb => 600.0,
        }
    }
}

impl Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        if let Ok(k) = norm.parse::<usize>() {
            if (1..=10).contains(&k) {
                return Ok(Suite::ALL[k - 1]);
            }
        }
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

/// Overrides of a suite's default sizes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random instances or triples for the sweep suites.
    pub samples: Option<usize>,
    /// Inverse temperature for the Copeland construction.
    pub beta: Option<f64>,
    pub trials: Option<usize>,
    /// Voters per election, or draws per sampler.
    pub n: Option<usize>,
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut checks = match suite {
        Suite::Sigmoid => sigmoid_suite(opts),
        Suite::Samplers => sampler_suite(opts)?,
        Suite::Linearization => linearization_suite(opts),
        Suite::UpperBounds => upper_bound_suite(opts)?,
        Suite::CopelandLb => copeland_suite(opts)?,
        Suite::PluralityLb => plurality_suite(opts)?,
        Suite::RandomDictator => rd_suite(opts)?,
        Suite::PluralityVetoLb => veto_suite(opts)?,
        Suite::TournamentLb => tournament_suite(opts)?,
        Suite::BoundsTable => bounds_table_suite(),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let budget = suite.budget_secs();
    checks.push(Check::new("runtime", "budget", format!("< {budget} s"), format!("{elapsed:.3} s"), elapsed < budget));
    Ok(SuiteReport { suite: suite.name().to_string(), criterion: suite.criterion(), checks, elapsed_secs: elapsed, budget_secs: budget })
}

const SIGMOID_BETAS: [f64; 5] = [1.0, 2.0, 5.0, 10.0, 30.0];

fn sigmoid_suite(opts: &SuiteOptions) -> Vec<Check> {
    let mut rng = seed::stream(opts.seed, &[VERIFY, 1]);
    let points = opts.samples.unwrap_or(1000);
    let (mut shape_bad, mut slope_bad, mut sym_bad) = (0, 0, 0);
    let mut worst_fd = 0.0f64;
    for beta in SIGMOID_BETAS {
        let mut xs: Vec<f64> = (0..points).map(|_| rng.random_range(-1.0..=1.0)).collect();
        xs.sort_by(f64::total_cmp);
        let s = |x: f64| sigma(beta, x);
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = s(0.5 * (a + b));
            let chord = 0.5 * (s(a) + s(b));
            let increasing = s(b) >= s(a) && sigma_prime(beta, a) > 0.0;
            let curvature_ok = if a >= 0.0 {
                mid >= chord - 1e-15
            } else if b <= 0.0 {
                mid <= chord + 1e-15
            } else {
                true
            };
            shape_bad += usize::from(!(increasing && curvature_ok));
        }
        let h = 1e-4 / beta;
        for &x in &xs {
            // difference quotient on the lower tail, where σ has full relative precision
            let y = -x.abs();
            let fd = (s(y + h) - s(y - h)) / (2.0 * h);
            let d = sigma_prime(beta, x);
            let rel = (fd - d).abs() / d;
            worst_fd = worst_fd.max(rel);
            slope_bad += usize::from(rel > 1e-6 || d > beta / 4.0 || fd > beta / 4.0 * (1.0 + 1e-6));
            sym_bad += usize::from((s(x) + s(-x) - 1.0).abs() > f64::EPSILON);
        }
        slope_bad += usize::from(sigma_prime(beta, 0.0) != beta / 4.0);
        sym_bad += usize::from(s(0.0) != 0.5);
    }
    let n = points * SIGMOID_BETAS.len();
    vec![
        Check::new(
            "increasing; concave for x >= 0, convex for x <= 0",
            "midpoint chords",
            "0 violations",
            format!("{shape_bad} violations over {n} points"),
            shape_bad == 0,
        ),
        Check::new(
            "derivative beta*s*(1-s), maximum beta/4 at 0",
            "finite differences",
            "rel err <= 1e-6, slope <= beta/4",
            format!("max rel err {worst_fd:.2e}, {slope_bad} violations"),
            slope_bad == 0,
        ),
        Check::new(
            "s(0) = 1/2 and s(x) + s(-x) = 1",
            "identity",
            "exact to 1 ulp",
            format!("{sym_bad} violations"),
            sym_bad == 0,
        ),
    ]
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, m - 1);
            out.push(q);
        }
    }
    out
}

fn sampler_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let draws = opts.n.unwrap_or(1_000_000);
    let beta = 2.0;
    let mut checks = Vec::new();
    for m in [2usize, 3, 4] {
        let perms = permutations(m);
        let index: HashMap<Vec<u16>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p.iter().map(|&c| c as u16).collect(), i)).collect();
        for v in 0..3u64 {
            let mut urng = seed::stream(opts.seed, &[VERIFY, 2, m as u64, v]);
            let u: Vec<f64> = (0..m).map(|_| urng.random()).collect();
            let expected: Vec<f64> = perms.iter().map(|p| ranking_probability(&u, beta, p) * draws as f64).collect();
            let mut seq = vec![0u64; perms.len()];
            let mut gum = vec![0u64; perms.len()];
            let mut r1 = seed::stream(opts.seed, &[VERIFY, 2, m as u64, v, 1]);
            let mut r2 = seed::stream(opts.seed, &[VERIFY, 2, m as u64, v, 2]);
            for _ in 0..draws {
                seq[index[&sample_ranking_sequential(&u, beta, &mut r1).order]] += 1;
                gum[index[&sample_ranking_gumbel(&u, beta, &mut r2).order]] += 1;
            }
            let df = (perms.len() - 1) as f64;
            let chi = ChiSquared::new(df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let pval = |c: &[u64]| {
                let stat: f64 = c.iter().zip(&expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
                1.0 - chi.cdf(stat)
            };
            let (p1, p2) = (pval(&seq), pval(&gum));
            let tv = 0.5 * seq.iter().zip(&gum).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>() / draws as f64;
            checks.push(Check::new(
                &format!("m = {m}, utilities #{v}"),
                "chi-square vs exact ranking law",
                "p > 0.001 (both), TV < 0.01",
                format!("p = {p1:.4} / {p2:.4}, TV = {tv:.5}"),
                p1 > 0.001 && p2 > 0.001 && tv < 0.01,
            ));
        }
    }
    Ok(checks)
}

fn linearization_suite(opts: &SuiteOptions) -> Vec<Check> {
    let samples = opts.samples.unwrap_or(100_000);
    let r = linearization_sweep(samples, seed::derive(opts.seed, &[VERIFY, 3]));
    vec![Check::new(
        "linearization inequality",
        "random sweep",
        "0 violations beyond 1e-9",
        format!("{} violations in {} triples; max rhs - lhs {:.3e}", r.violations, r.samples, r.max_ratio),
        r.violations == 0 && r.samples == samples,
    )]
}

const SWEEP_BETAS: [f64; 3] = [2.0, 5.0, 10.0];
const SWEEP_REL_TOL: f64 = 1e-9;

fn sweep_checks(opts: &SuiteOptions, rule_list: &[Rule], label: &str) -> Result<Vec<Check>> {
    let samples = opts.samples.unwrap_or(10_000);
    let mut checks = Vec::new();
    for beta in SWEEP_BETAS {
        let seed = seed::derive(opts.seed, &[VERIFY, 4, beta.to_bits()]);
        for r in upper_bound_sweep(rule_list, 2..=8, 6, beta, samples, seed, SWEEP_REL_TOL)? {
            checks.push(Check::new(
                &format!("{} {label}, beta = {beta}", r.rule),
                "random instances, m <= 8, <= 6 types",
                "0 violations",
                format!(
                    "{} violations in {} ({} ambiguous); max ratio {:.6}",
                    r.violations, r.samples, r.ambiguous, r.max_ratio
                ),
                r.violations == 0,
            ));
        }
    }
    Ok(checks)
}

fn upper_bound_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    sweep_checks(opts, &[Rule::Copeland, Rule::Borda], "upper bound")
}

fn copeland_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let beta = opts.beta.unwrap_or(30.0);
    let epsilon = 0.1;
    let trials = opts.trials.unwrap_or(100);
    let n = opts.n.unwrap_or(1_000_000);
    let r = construct_copeland_lb(beta, epsilon)?;
    let tb = r.tiebreak.clone().expect("construction fixes the tie-break");
    let w = r.role("W");
    let limit = population_winner(&r.instance, Rule::Copeland, &tb, DEFAULT_TAU)?;
    let margins = [r.param("p_WY"), r.param("p_YB"), r.param("p_BW")];
    let target = (1.0 - epsilon) * beta;
    let mut wins = 0;
    for t in 0..trials {
        let tally = sample_tally(&r.instance, n, seed::trial_seed(opts.seed, t as u64))?;
        if Rule::Copeland.apply(&tally, &tb)?.winner() == Some(w.0) {
            wins += 1;
        }
    }
    let need = (trials * 99).div_ceil(100);
    Ok(vec![
        Check::new(
            "population Copeland winner",
            "exact limit, tie-break W > Y > B",
            format!("W = {w}"),
            limit.winner().map_or("ambiguous".to_string(), |c| c.to_string()),
            limit.winner() == Some(w),
        ),
        Check::new(
            "margins W>Y, Y>B, B>W above 1/2",
            "exact limit",
            "> 0.5 each",
            format!("{:.6}, {:.6}, {:.6}", margins[0], margins[1], margins[2]),
            margins.iter().all(|&x| x > 0.5),
        ),
        Check::new(
            "population distortion",
            "(1 - eps) * beta",
            format!(">= {target}"),
            format!("{:.4} ({:.4} beta)", r.population_distortion, r.population_distortion / beta),
            r.population_distortion >= target,
        ),
        Check::new(
            "simulated elections won by W",
            &format!("{trials} trials of {n} voters"),
            format!(">= {need}"),
            wins,
            wins >= need,
        ),
    ])
}

fn plurality_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (m, beta, epsilon) = (100, 3.0, 0.1);
    let n = opts.n.unwrap_or(1_000_000);
    let trials = opts.trials.unwrap_or(20);
    let r = construct_plurality_lb(m, beta, epsilon)?;
    let tb = TieBreakOrder::identity(m);
    let limit = population_winner(&r.instance, Rule::Plurality, &tb, DEFAULT_TAU)?;
    let gamma = r.param("gamma");
    let closed = (1.0 - gamma) / gamma;
    let e = empirical_distortion(&r.instance, Rule::Plurality, n, trials, opts.seed, &tb)?;
    // W wins every trial, so the interval has zero width; allow rounding
    let inside = e.ci_contains(closed, 1e-9);
    let mut checks = vec![
        Check::new(
            "population plurality winner",
            "exact limit",
            "W = 0",
            limit.winner().map_or("ambiguous".to_string(), |c| c.to_string()),
            limit.winner() == Some(r.role("W")),
        ),
        Check::new(
            "top share of W",
            "exact limit",
            format!("> 1/m = {}", 1.0 / m as f64),
            format!("{:.6}", r.param("top_share_W")),
            r.param("top_share_W") > 1.0 / m as f64,
        ),
        Check::new(
            "empirical distortion",
            &format!("{trials} trials of {n} voters, 95% CI"),
            format!("contains (1 - g)/g = {closed:.6}"),
            format!(
                "mean {:.6}, CI [{:.6}, {:.6}]",
                e.empirical_mean,
                e.ci_lo.unwrap_or(f64::NAN),
                e.ci_hi.unwrap_or(f64::NAN)
            ),
            inside,
        ),
    ];
    checks.extend(sweep_checks(opts, &[Rule::Plurality], "upper bound")?);
    Ok(checks)
}

fn rd_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (m, beta, epsilon) = (20, 50.0, 0.2);
    let r = construct_rd_lb(m, beta, epsilon)?;
    let q = rd_top_prob_b(m, beta, epsilon);
    let closed = (1.0 - epsilon) / (q * (1.0 - epsilon) + (1.0 - q) / (m - 1) as f64);
    let rel = (r.population_distortion / closed - 1.0).abs();
    let mut checks = vec![
        Check::new(
            "population distortion vs closed form",
            "exact limit",
            format!("within 1% of {closed:.6}"),
            format!("{:.6} (rel diff {rel:.1e})", r.population_distortion),
            rel <= 0.01,
        ),
        Check::new(
            "population distortion",
            "lower bound",
            ">= 14.9",
            format!("{:.6}", r.population_distortion),
            r.population_distortion >= 14.9,
        ),
    ];
    checks.extend(sweep_checks(opts, &[Rule::RandomDictator], "upper bound m e^beta")?);
    Ok(checks)
}

fn veto_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (m, beta) = (400usize, 10.0);
    let n = opts.n.unwrap_or(100_000);
    let trials = opts.trials.unwrap_or(20);
    let r = construct_pluralityveto_lb(m, beta)?;
    let mf = m as f64;
    let bottom = 1.0 / (2.0 * (std::f64::consts::E * mf).powf((-2.0 / mf.ln()).exp()));
    let top = 5.0 / (4.0 * mf);
    let target = beta * mf.ln() / 6.0;
    let failed: Vec<&String> = r.validity_flags.iter().filter(|(_, &v)| !v).map(|(k, _)| k).collect();
    let tb = TieBreakOrder::identity(m);
    let rules = [Rule::PluralityVeto, Rule::PrunedPluralityVeto { alpha: 1.0 }];
    let est = empirical_distortions(&r.instance, &rules, n, trials, opts.seed, &tb)?;
    let b = r.role("B").0;
    let mut checks = vec![
        Check::new(
            "construction preconditions",
            "validity flags",
            "all hold",
            if failed.is_empty() { "all hold".to_string() } else { format!("failed: {failed:?}") },
            failed.is_empty(),
        ),
        Check::new(
            "bottom bound vs top bound for B",
            "closed forms",
            "bottom > top",
            format!("1/{:.2} vs 1/{:.2}", 1.0 / bottom, 1.0 / top),
            bottom > top,
        ),
        Check::new(
            "population distortion",
            "beta ln m / 6",
            format!(">= {target:.4}"),
            format!("{:.4}", r.population_distortion),
            r.population_distortion >= target,
        ),
    ];
    for e in &est {
        checks.push(Check::new(
            &format!("{} never elects B", e.rule),
            &format!("{trials} trials of {n} voters"),
            "0 wins for B",
            format!("{} wins; distortion {:.4}", e.selections[b], e.empirical_mean),
            e.selections[b] == 0.0 && e.empirical_mean >= target,
        ));
    }
    Ok(checks)
}

fn tournament_suite(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let (rho, epsilon, gamma) = (0.05, 0.1, 0.01);
    let beta = tournament_beta0(epsilon, gamma);
    let r = construct_tournament_lb(rho, epsilon, gamma, beta)?;
    let (p, q) = (r.param("p"), r.param("q"));
    let p_formula = (6.0 * gamma + 4.0 * gamma * gamma) / (1.0 + 6.0 * gamma);
    let margins = [r.param("p_WY"), r.param("p_YB"), r.param("p_BW")];
    let (lo, hi) = (0.5 + 0.75 * gamma, 0.5 + 1.25 * gamma);

    let relabeled = cyclic_relabelings(&r)?;
    let mut population_views = Vec::new();
    let mut sample_views = Vec::new();
    let n = opts.n.unwrap_or(r.param("hoeffding_n").ceil() as usize);
    for (i, x) in relabeled.iter().enumerate() {
        population_views.push(coarsen_shares(&population_stats(&x.instance)?, rho)?);
        let t = sample_tally(&x.instance, n, seed::derive(opts.seed, &[VERIFY, 9, i as u64]))?;
        sample_views.push(coarsen(&t, rho)?);
    }
    let zero_cycle = |v: &crate::rules::CoarsenedTournament| v.weight(1, 2) == 0 && v.weight(2, 0) == 0 && v.weight(0, 1) == 0;
    let identical = |vs: &[crate::rules::CoarsenedTournament]| vs.iter().all(|v| v == &vs[0]) && vs.iter().all(zero_cycle);

    let eta = 4.0 * epsilon / 3.0;
    let limit = (5.0 - 3.0 * eta) / 8.0;
    let coef = |g: f64| {
        let (p, q, s) = tournament_params(g);
        (p * (1.0 - eta) + q) / ((s / (1.0 - s)).ln() * (1.0 - p))
    };
    let scaled: Vec<f64> = [0.01, 0.005, 0.001, 0.0001].iter().map(|&g| (coef(g) - limit) / g).collect();
    let c = r.param("welfare_coefficient");
    Ok(vec![
        Check::new(
            "parameters p, q",
            "recomputed formulas",
            format!("p = {p_formula:.7}, q = 0.036981, q = p - 2 gamma"),
            format!("p = {p:.7}, q = {q:.7}"),
            (p - p_formula).abs() < 1e-15 && (q - 0.036981).abs() < 1e-6 && (q - (p - 2.0 * gamma)).abs() < 1e-12,
        ),
        Check::new(
            "auto beta",
            "bisection on the error term",
            "E < gamma/4",
            format!("beta = {beta:.4}, E = {:.3e}", r.param("E")),
            r.param("E") < gamma / 4.0,
        ),
        Check::new(
            "population margins",
            "exact limit",
            format!("in ({lo}, {hi})"),
            format!("{:.6}, {:.6}, {:.6}", margins[0], margins[1], margins[2]),
            margins.iter().all(|&x| x > lo && x < hi),
        ),
        Check::new(
            "coarsened tournaments of the 3 relabelings",
            "exact limit",
            "identical, zero on the cycle",
            if identical(&population_views) { "identical, zero" } else { "differ" },
            identical(&population_views),
        ),
        Check::new(
            "coarsened tournaments of the 3 relabelings",
            &format!("one sample of {n} voters each"),
            "identical, zero on the cycle",
            if identical(&sample_views) { "identical, zero" } else { "differ" },
            identical(&sample_views),
        ),
        Check::new(
            "welfare coefficient",
            "limit (5 - 3 eta)/8",
            format!("within 2 gamma of {limit}"),
            format!("{c:.6}"),
            (c - limit).abs() <= 2.0 * gamma,
        ),
        Check::new(
            "(coefficient - limit)/gamma as gamma shrinks",
            "gamma in 1e-2 .. 1e-4",
            "bounded by 2",
            format!("{scaled:.3?}"),
            scaled.iter().all(|x| x.abs() <= 2.0),
        ),
    ])
}

fn bounds_table_suite() -> Vec<Check> {
    let (beta, m, epsilon) = (5.0_f64, 10usize, 0.1);
    let mf = m as f64;
    let eb = (-beta).exp();
    let expect = [
        (Rule::Borda, Some(beta * (1.0 + eb) / (1.0 - eb)), Some(beta)),
        (Rule::Copeland, Some(beta * (1.0 + eb) / (1.0 - eb)), Some((1.0 - epsilon) * beta)),
        (
            Rule::Plurality,
            Some(f64::min((2.0 * beta).exp() / beta, mf * beta.exp() / ((mf - 1.0).ln() + 2.0) + 1.0)),
            Some(f64::min(beta.exp() / (2.0 + epsilon) - 1.0, mf / (2.0 + epsilon) - 1.0)),
        ),
        (Rule::PluralityVeto, None, Some(beta * mf.ln() / 6.0)),
        (Rule::PrunedPluralityVeto { alpha: 1.0 }, None, Some(beta * mf.ln() / 6.0)),
        (Rule::RandomDictator, Some(mf * beta.exp()), Some((1.0 - epsilon) * mf)),
    ];
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => ((x - y) / y).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    };
    let show = |b: Bound| b.to_string();
    let want = |x: Option<f64>| x.map_or("none stated".to_string(), |v| format!("{v:.9}"));
    let mut checks: Vec<Check> = expect
        .iter()
        .map(|&(rule, ub, lb)| {
            let rep = rule_bounds(rule, beta, m, epsilon).expect("valid arguments");
            let ok = close(rep.upper_bound.value(), ub) && close(rep.lower_bound.value(), lb);
            Check::new(
                &format!("{} bounds at beta = 5, m = 10", rule.name()),
                "independent recomputation",
                format!("{} / {}", want(ub), want(lb)),
                format!("{} / {}", show(rep.upper_bound), show(rep.lower_bound)),
                ok,
            )
        })
        .collect();
    let pclc = two_candidate_bound(beta);
    let rep = rule_bounds(Rule::Copeland, beta, m, epsilon).expect("valid arguments");
    let ub = rep.upper_bound.value().expect("stated");
    checks.push(Check::new(
        "Copeland upper bound = 2 x PCLC bound",
        "identity",
        format!("{:.12}", 2.0 * pclc),
        format!("{ub:.12}"),
        ub == 2.0 * pclc && (rep.pclc_bound - beta / 2.0 * (1.0 + eb) / (1.0 - eb)).abs() <= 1e-12 * pclc,
    ));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(s.criterion().to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Sigmoid, Suite::BoundsTable] {
            let r = run_suite(s, &SuiteOptions::default()).unwrap();
            assert!(r.passed(), "{}", r.table());
        }
        assert_eq!(run_suite(Suite::Sigmoid, &SuiteOptions::default()).unwrap().checks.len(), 4);
    }

    #[test]
    fn reduced_sampler_suite() {
        let opts = SuiteOptions { n: Some(20_000), ..Default::default() };
        let r = run_suite(Suite::Samplers, &opts).unwrap();
        assert_eq!(r.checks.len(), 10);
    }

    #[test]
    fn table_layout() {
        let r = run_suite(Suite::BoundsTable, &SuiteOptions::default()).unwrap();
        let t = r.table();
        assert!(t.starts_with("check"));
        assert_eq!(t.lines().count(), r.checks.len() + 2);
    }
}
