use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pldist::experiment::{
    persist, run_experiment, BetaChoice, Construction, ExperimentManifest, RunOptions, DEFAULT_BOUND_TOLERANCE,
};
use pldist::lab::{rule_bounds, DEFAULT_TAU};
use pldist::report::render_report;
use pldist::verify::{run_suite, Suite, SuiteOptions};
use pldist::{sample_profile, Error, Instance, Rule};

#[derive(Parser)]
#[command(name = "pldist", version, about = "Plackett-Luce voting and distortion experiments")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative tolerance when checking observed distortion against upper bounds.
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND_TOLERANCE)]
    tolerance: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a lower-bound instance and write instance and report JSON.
    Construct(ConstructArgs),
    /// Execute an experiment manifest.
    Run {
        manifest: PathBuf,
        /// Replace an existing run with the same id.
        #[arg(long)]
        force: bool,
        /// Margin below which population outcomes count as ambiguous.
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Render SVG charts from result CSVs.
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
    /// Run a verification suite, or `all`.
    Verify(VerifyArgs),
    /// Draw one profile from an instance and dump its rankings.
    Sample {
        instance: PathBuf,
        #[arg(long, short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print closed-form distortion bounds.
    Bounds {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Restrict to these rules.
        #[arg(long, value_delimiter = ',')]
        rule: Vec<Rule>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Rd,
    Plurality,
    #[value(name = "plurality_veto", alias = "plurality-veto")]
    PluralityVeto,
    Copeland,
    Tournament,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    m: Option<usize>,
    /// A number, or `auto` for the tournament family.
    #[arg(long)]
    beta: Option<BetaChoice>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, short)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    format: TableFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Table,
    Json,
}

/// How a failed command should exit.
enum Failure {
    Check(String),
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let usage = e.chain().any(|c| {
            matches!(
                c.downcast_ref::<Error>(),
                Some(
                    Error::InvalidArgument(_)
                        | Error::InvalidInstance(_)
                        | Error::Precondition(_)
                        | Error::UnknownRule(_)
                        | Error::Json(_)
                )
            )
        });
        if usage {
            Failure::Usage(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn need<T>(v: Option<T>, flag: &str, family: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(anyhow::anyhow!("`construct {family}` needs --{flag}")))
}

fn fixed_beta(b: Option<BetaChoice>, family: &str) -> std::result::Result<f64, Failure> {
    match need(b, "beta", family)? {
        BetaChoice::Value(x) => Ok(x),
        BetaChoice::Auto(_) => Err(Failure::Usage(anyhow::anyhow!("--beta auto is only available for tournament"))),
    }
}

fn construction(a: &ConstructArgs) -> std::result::Result<Construction, Failure> {
    Ok(match a.family {
        Family::Rd => Construction::Rd {
            m: need(a.m, "m", "rd")?,
            beta: fixed_beta(a.beta, "rd")?,
            epsilon: need(a.epsilon, "epsilon", "rd")?,
        },
        Family::Plurality => Construction::Plurality {
            m: need(a.m, "m", "plurality")?,
            beta: fixed_beta(a.beta, "plurality")?,
            epsilon: need(a.epsilon, "epsilon", "plurality")?,
        },
        Family::PluralityVeto => Construction::PluralityVeto {
            m: need(a.m, "m", "plurality_veto")?,
            beta: fixed_beta(a.beta, "plurality_veto")?,
        },
        Family::Copeland => Construction::Copeland {
            beta: fixed_beta(a.beta, "copeland")?,
            epsilon: need(a.epsilon, "epsilon", "copeland")?,
        },
        Family::Tournament => Construction::Tournament {
            rho: need(a.rho, "rho", "tournament")?,
            epsilon: need(a.epsilon, "epsilon", "tournament")?,
            gamma: need(a.gamma, "gamma", "tournament")?,
            beta: a.beta.unwrap_or(BetaChoice::AUTO),
        },
    })
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_construct(cli: &Cli, a: &ConstructArgs) -> CmdResult {
    let c = construction(a)?;
    let report = c.build()?;
    let dir = out_dir(cli);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let family = c.family();
    let inst_path = dir.join(format!("{family}_instance.json"));
    let report_path = dir.join(format!("{family}_report.json"));
    report.instance.save(&inst_path)?;
    fs::write(&report_path, report.to_json()).with_context(|| format!("writing {}", report_path.display()))?;
    println!("family        {family}");
    println!("beta          {}", report.instance.beta());
    println!("m             {}", report.instance.m());
    println!("distortion    {:.6}", report.population_distortion);
    println!("closed form   {:.6}", report.closed_form_distortion);
    for (k, v) in &report.validity_flags {
        println!("flag {k:<32} {v}");
    }
    println!("wrote {} and {}", inst_path.display(), report_path.display());
    for (k, _) in report.validity_flags.iter().filter(|(_, v)| !**v) {
        eprintln!("warning: flag {k} is false");
    }
    Ok(())
}

fn cmd_run(cli: &Cli, manifest: &Path, force: bool, tau: f64) -> CmdResult {
    let mut m = ExperimentManifest::load(manifest)?;
    if let Some(s) = cli.seed {
        m.seed = s;
    }
    let dir = cli.out.clone().or_else(|| m.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let record = run_experiment(&m, &RunOptions { bound_tolerance: cli.tolerance, tau });
    let files = persist(&record, &dir, force)?;
    let mut unsatisfied = 0;
    for r in &record.rows {
        let status = match (&r.error, r.bounds.as_ref().and_then(|b| b.satisfied)) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(false)) => {
                unsatisfied += 1;
                "bound violated".to_string()
            }
            _ => "ok".to_string(),
        };
        let value = r.estimate.as_ref().map_or(String::new(), |e| {
            format!("{:.6}", e.population_value.unwrap_or(e.empirical_mean))
        });
        println!("{:<28} beta={:<10} {:>12}  {status}", r.rule, r.beta, value);
    }
    println!("wrote {} and {}", files.csv.display(), files.record.display());
    let failures = record.failures();
    if failures + unsatisfied > 0 {
        return Err(Failure::Check(format!("{failures} failed rows, {unsatisfied} bound violations")));
    }
    Ok(())
}

fn cmd_report(cli: &Cli, csv: &[PathBuf]) -> CmdResult {
    for p in render_report(csv, out_dir(cli))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CmdResult {
    let suites: Vec<Suite> =
        if a.suite == "all" { Suite::ALL.to_vec() } else { vec![a.suite.parse::<Suite>()?] };
    let opts = SuiteOptions { seed: cli.seed.unwrap_or(0), samples: a.samples, beta: a.beta, trials: a.trials, n: a.n };
    let mut failed = Vec::new();
    for s in suites {
        let r = run_suite(s, &opts)?;
        match a.format {
            TableFormat::Table => {
                println!("== {} (criterion {}) ==", r.suite, r.criterion);
                print!("{}", r.table());
                println!();
            }
            TableFormat::Json => println!("{}", serde_json::to_string_pretty(&r).context("serializing report")?),
        }
        if !r.passed() {
            failed.push(r.suite);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed suites: {}", failed.join(", "))))
    }
}

fn cmd_sample(cli: &Cli, instance: &Path, n: usize, format: Format) -> CmdResult {
    let inst = Instance::load(instance)?;
    let profile = sample_profile(&inst, n, cli.seed.unwrap_or(0))?;
    let mut buf: Box<dyn Write> = match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let ext = if matches!(format, Format::Csv) { "csv" } else { "json" };
            Box::new(io::BufWriter::new(fs::File::create(dir.join(format!("profile.{ext}"))).context("creating profile file")?))
        }
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
            w.write_record((0..inst.m()).map(|r| format!("rank{r}"))).context("writing profile")?;
            for r in profile.iter() {
                w.write_record(r.iter().map(|c| c.to_string())).context("writing profile")?;
            }
            w.flush().context("writing profile")?;
        }
        Format::Json => {
            let rows: Vec<&[u16]> = profile.iter().collect();
            serde_json::to_writer(&mut buf, &serde_json::json!({"m": inst.m(), "n": n, "rankings": rows}))
                .context("writing profile")?;
            writeln!(buf).context("writing profile")?;
        }
    }
    Ok(())
}

fn cmd_bounds(beta: f64, m: usize, epsilon: f64, rules: &[Rule], format: Format) -> CmdResult {
    let rules = if rules.is_empty() { Rule::ALL.to_vec() } else { rules.to_vec() };
    let reports = rules.iter().map(|&r| rule_bounds(r, beta, m, epsilon)).collect::<pldist::Result<Vec<_>>>()?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports).context("serializing bounds")?),
        Format::Csv => {
            println!("rule,beta,m,epsilon,upper_bound,lower_bound,pclc_bound");
            for r in &reports {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.rule, r.beta, r.m, r.epsilon, r.upper_bound, r.lower_bound, r.pclc_bound
                );
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(anyhow::anyhow!("--threads: {e}")))?;
    }
    match &cli.cmd {
        Cmd::Construct(a) => cmd_construct(cli, a),
        Cmd::Run { manifest, force, tau } => cmd_run(cli, manifest, *force, *tau),
        Cmd::Report { csv } => cmd_report(cli, csv),
        Cmd::Verify(a) => cmd_verify(cli, a),
        Cmd::Sample { instance, n, format } => cmd_sample(cli, instance, *n, *format),
        Cmd::Bounds { beta, m, epsilon, rule, format } => cmd_bounds(*beta, *m, *epsilon, rule, *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
