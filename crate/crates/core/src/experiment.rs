//! Manifest-driven experiment runs persisted as CSV and JSON.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::constructions::{
    construct_copeland_lb, construct_plurality_lb, construct_pluralityveto_lb, construct_rd_lb,
    construct_tournament_lb, tournament_beta0, ConstructionReport,
};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lab::{
    empirical_distortion, population_distortion, population_winner_from_stats, rule_bounds, BoundReport, DistortionEstimate,
    DEFAULT_TAU,
};
use crate::population::population_stats;
use crate::rules::{Rule, TieBreakOrder};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative slack when comparing an observed distortion with an upper bound.
pub const DEFAULT_BOUND_TOLERANCE: f64 = 1e-9;

/// ε used for lower-bound formulas when neither the manifest nor the
/// construction fixes one.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Either a number or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaChoice {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl BetaChoice {
    pub const AUTO: BetaChoice = BetaChoice::Auto(AutoTag::Auto);
}

impl std::str::FromStr for BetaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BetaChoice::AUTO);
        }
        s.parse()
            .map(BetaChoice::Value)
            .map_err(|_| Error::InvalidArgument(format!("beta must be a number or `auto`, got `{s}`")))
    }
}

impl fmt::Display for BetaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaChoice::Value(b) => write!(f, "{b}"),
            BetaChoice::Auto(_) => f.write_str("auto"),
        }
    }
}

/// A lower-bound family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Construction {
    Rd { m: usize, beta: f64, epsilon: f64 },
    Plurality { m: usize, beta: f64, epsilon: f64 },
    PluralityVeto { m: usize, beta: f64 },
    Copeland { beta: f64, epsilon: f64 },
    Tournament { rho: f64, epsilon: f64, gamma: f64, beta: BetaChoice },
}

impl Construction {
    pub fn family(&self) -> &'static str {
        match self {
            Construction::Rd { .. } => "rd",
            Construction::Plurality { .. } => "plurality",
            Construction::PluralityVeto { .. } => "plurality_veto",
            Construction::Copeland { .. } => "copeland",
            Construction::Tournament { .. } => "tournament",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Construction::Rd { epsilon, .. }
            | Construction::Plurality { epsilon, .. }
            | Construction::Copeland { epsilon, .. }
            | Construction::Tournament { epsilon, .. } => Some(epsilon),
            Construction::PluralityVeto { .. } => None,
        }
    }

    /// The inverse temperature the construction will use, resolving `auto`.
    pub fn beta(&self) -> f64 {
        match *self {
            Construction::Rd { beta, .. }
            | Construction::Plurality { beta, .. }
            | Construction::PluralityVeto { beta, .. }
            | Construction::Copeland { beta, .. } => beta,
            Construction::Tournament { beta: BetaChoice::Value(b), .. } => b,
            Construction::Tournament { epsilon, gamma, beta: BetaChoice::Auto(_), .. } => tournament_beta0(epsilon, gamma),
        }
    }

    pub fn with_beta(&self, b: f64) -> Construction {
        let mut c = self.clone();
        match &mut c {
            Construction::Rd { beta, .. }
            | Construction::Plurality { beta, .. }
            | Construction::PluralityVeto { beta, .. }
            | Construction::Copeland { beta, .. } => *beta = b,
            Construction::Tournament { beta, .. } => *beta = BetaChoice::Value(b),
        }
        c
    }

    pub fn build(&self) -> Result<ConstructionReport> {
        match *self {
            Construction::Rd { m, beta, epsilon } => construct_rd_lb(m, beta, epsilon),
            Construction::Plurality { m, beta, epsilon } => construct_plurality_lb(m, beta, epsilon),
            Construction::PluralityVeto { m, beta } => construct_pluralityveto_lb(m, beta),
            Construction::Copeland { beta, epsilon } => construct_copeland_lb(beta, epsilon),
            Construction::Tournament { rho, epsilon, gamma, .. } => construct_tournament_lb(rho, epsilon, gamma, self.beta()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Path to an instance JSON file, relative to the manifest.
    Instance(PathBuf),
    Construct(Construction),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub id: String,
    #[serde(flatten)]
    pub source: Source,
    pub rules: Vec<String>,
    /// Inverse temperatures to sweep; empty means the source's own.
    #[serde(default)]
    pub betas: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentManifest {
    pub fn from_json(s: &str) -> Result<ExperimentManifest> {
        let m: ExperimentManifest = serde_json::from_str(s)?;
        m.check()?;
        Ok(m)
    }

    /// Reads a manifest and resolves an instance path against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentManifest> {
        let path = path.as_ref();
        let mut m = ExperimentManifest::from_json(&fs::read_to_string(path)?)?;
        if let Source::Instance(p) = &mut m.source {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
            if !p.is_file() {
                return Err(Error::InvalidArgument(format!("instance file {} does not exist", p.display())));
            }
        }
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let ok_id = !self.id.is_empty() && self.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !ok_id {
            return Err(Error::InvalidArgument(format!("manifest id `{}` must be non-empty [A-Za-z0-9._-]", self.id)));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidArgument("manifest lists no rules".into()));
        }
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("n and trials must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one (rule, β) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub rule: String,
    pub beta: f64,
    pub m: Option<usize>,
    /// `true` when the population outcome is decided by a margin below the
    /// ambiguity tolerance.
    pub ambiguous: bool,
    pub estimate: Option<DistortionEstimate>,
    pub bounds: Option<BoundReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub manifest: ExperimentManifest,
    pub version: String,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub bound_tolerance: f64,
    pub tau: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { bound_tolerance: DEFAULT_BOUND_TOLERANCE, tau: DEFAULT_TAU }
    }
}

struct Prepared {
    instance: Instance,
    tiebreak: TieBreakOrder,
}

fn prepare(source: &Source, beta: Option<f64>) -> Result<Prepared> {
    match source {
        Source::Instance(p) => {
            let inst = Instance::load(p)?;
            let inst = match beta {
                Some(b) => inst.with_beta(b)?,
                None => inst,
            };
            let tiebreak = TieBreakOrder::identity(inst.m());
            Ok(Prepared { instance: inst, tiebreak })
        }
        Source::Construct(c) => {
            let c = beta.map_or_else(|| c.clone(), |b| c.with_beta(b));
            let r = c.build()?;
            let tiebreak = r.tiebreak.clone().unwrap_or_else(|| TieBreakOrder::identity(r.instance.m()));
            Ok(Prepared { instance: r.instance, tiebreak })
        }
    }
}

fn run_cell(p: &Prepared, rule: Rule, epsilon: f64, manifest: &ExperimentManifest, opts: &RunOptions) -> Result<RunRow> {
    let inst = &p.instance;
    let mut est = empirical_distortion(inst, rule, manifest.n, manifest.trials, manifest.seed, &p.tiebreak)?;
    let mut ambiguous = false;
    if !rule.needs_profile() {
        let stats = population_stats(inst)?;
        let o = population_winner_from_stats(&stats, rule, &p.tiebreak, opts.tau)?;
        ambiguous = o.is_ambiguous();
        est.population_value = o.decided().map(|o| population_distortion(&stats, &o.lottery));
    }
    let observed = est.population_value.unwrap_or(est.empirical_mean);
    let bounds = rule_bounds(rule, inst.beta(), inst.m(), epsilon)?.with_observed(observed, opts.bound_tolerance);
    Ok(RunRow {
        rule: rule.to_string(),
        beta: inst.beta(),
        m: Some(inst.m()),
        ambiguous,
        estimate: Some(est),
        bounds: Some(bounds),
        error: None,
    })
}

fn failed(rule: &str, beta: f64, m: Option<usize>, e: Error) -> RunRow {
    RunRow { rule: rule.to_string(), beta, m, ambiguous: false, estimate: None, bounds: None, error: Some(e.to_string()) }
}

/// Evaluates every (β, rule) cell of the manifest. Cell failures are
/// recorded in their rows and do not stop the run.
pub fn run_experiment(manifest: &ExperimentManifest, opts: &RunOptions) -> RunRecord {
    let start = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let epsilon = manifest
        .epsilon
        .or(match &manifest.source {
            Source::Construct(c) => c.epsilon(),
            Source::Instance(_) => None,
        })
        .unwrap_or(DEFAULT_EPSILON);
    let betas: Vec<Option<f64>> =
        if manifest.betas.is_empty() { vec![None] } else { manifest.betas.iter().copied().map(Some).collect() };
    let mut rows = Vec::new();
    for beta in betas {
        let prepared = prepare(&manifest.source, beta);
        let nominal = beta.unwrap_or_else(|| match &manifest.source {
            Source::Construct(c) => c.beta(),
            Source::Instance(_) => prepared.as_ref().map_or(f64::NAN, |p| p.instance.beta()),
        });
        for name in &manifest.rules {
            let row = match (&prepared, name.parse::<Rule>()) {
                (_, Err(e)) => failed(name, nominal, None, e),
                (Err(e), Ok(_)) => failed(name, nominal, None, Error::InvalidArgument(e.to_string())),
                (Ok(p), Ok(rule)) => run_cell(p, rule, epsilon, manifest, opts)
                    .unwrap_or_else(|e| failed(&rule.to_string(), nominal, Some(p.instance.m()), e)),
            };
            rows.push(row);
        }
    }
    RunRecord {
        manifest: manifest.clone(),
        version: VERSION.to_string(),
        started_unix,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        rows,
    }
}

/// One line of the results CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub rule: String,
    pub m: String,
    pub beta: String,
    pub n: String,
    pub trials: String,
    pub seed: String,
    pub population_distortion: String,
    pub empirical_mean: String,
    pub ci_lo: String,
    pub ci_hi: String,
    pub ub: String,
    pub lb: String,
    pub satisfied: String,
    pub version: String,
    pub error: String,
}

/// Shortest round-trip text for `x`, with `inf` for infinity.
pub fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

impl CsvRow {
    pub fn from_run(row: &RunRow, manifest: &ExperimentManifest) -> CsvRow {
        let est = row.estimate.as_ref();
        let b = row.bounds.as_ref();
        let population = match est {
            Some(e) if e.population_value.is_some() => opt_num(e.population_value),
            Some(_) if row.ambiguous => "ambiguous".to_string(),
            _ => String::new(),
        };
        CsvRow {
            rule: row.rule.clone(),
            m: row.m.map(|m| m.to_string()).unwrap_or_default(),
            beta: fmt_num(row.beta),
            n: manifest.n.to_string(),
            trials: manifest.trials.to_string(),
            seed: manifest.seed.to_string(),
            population_distortion: population,
            empirical_mean: est.map(|e| fmt_num(e.empirical_mean)).unwrap_or_default(),
            ci_lo: opt_num(est.and_then(|e| e.ci_lo)),
            ci_hi: opt_num(est.and_then(|e| e.ci_hi)),
            ub: opt_num(b.and_then(|b| b.upper_bound.value())),
            lb: opt_num(b.and_then(|b| b.lower_bound.value())),
            satisfied: b.and_then(|b| b.satisfied).map(|s| s.to_string()).unwrap_or_default(),
            version: VERSION.to_string(),
            error: row.error.clone().unwrap_or_default(),
        }
    }
}

pub fn write_csv(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in &record.rows {
        w.serialize(CsvRow::from_run(row, &record.manifest))?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`persist`].
#[derive(Clone, Debug)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub record: PathBuf,
}

/// Writes `<dir>/<id>.csv` and `<dir>/<id>.json`. Refuses to replace an
/// existing record unless `overwrite` is set.
pub fn persist(record: &RunRecord, dir: impl AsRef<Path>, overwrite: bool) -> Result<RunFiles> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let id = &record.manifest.id;
    let files = RunFiles { csv: dir.join(format!("{id}.csv")), record: dir.join(format!("{id}.json")) };
    if !overwrite && files.record.exists() {
        return Err(Error::InvalidArgument(format!("run `{id}` already exists in {}", dir.display())));
    }
    write_csv(record, &files.csv)?;
    fs::write(&files.record, serde_json::to_string_pretty(record)?)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(json: &str) -> ExperimentManifest {
        ExperimentManifest::from_json(json).unwrap()
    }

    const COPELAND: &str = r#"{"id": "t", "construct": {"family": "copeland", "beta": 30, "epsilon": 0.1},
        "rules": ["copeland", "borda", "nonsense"], "n": 2000, "trials": 3, "seed": 5}"#;

    #[test]
    fn manifest_shapes() {
        let m = manifest(COPELAND);
        assert_eq!(m.source, Source::Construct(Construction::Copeland { beta: 30.0, epsilon: 0.1 }));
        let t = manifest(
            r#"{"id": "x", "construct": {"family": "tournament", "rho": 0.05, "epsilon": 0.1, "gamma": 0.01, "beta": "auto"},
            "rules": ["copeland"], "n": 10, "trials": 2}"#,
        );
        match &t.source {
            Source::Construct(c) => assert!(c.beta() > 40.0),
            _ => unreachable!(),
        }
        assert!(ExperimentManifest::from_json(r#"{"id": "a b", "instance": "x.json", "rules": ["rd"], "n": 1, "trials": 1}"#).is_err());
    }

    #[test]
    fn unknown_rule_is_row_error() {
        let r = run_experiment(&manifest(COPELAND), &RunOptions::default());
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.failures(), 1);
        assert!(r.rows[2].error.as_ref().unwrap().contains("nonsense"));
        let c = CsvRow::from_run(&r.rows[0], &r.manifest);
        assert_eq!(c.satisfied, "true");
        assert_eq!(c.version, VERSION);
    }

    #[test]
    fn beta_grid_rows() {
        let mut m = manifest(COPELAND);
        m.rules.truncate(1);
        m.betas = vec![20.0, 30.0, 0.5];
        let r = run_experiment(&m, &RunOptions::default());
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[1].beta, 30.0);
        assert!(r.rows[2].error.is_some());
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 27.000000000000004] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }
}
