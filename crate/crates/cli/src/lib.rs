//! Command-line front end: argument parsing, weight ingestion and report
//! emission. Exit status 0 means every executed check passed, 1 means a
//! check failed, 2 means bad usage or unreadable input.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use signsum_core::bounds::{
    bd_tail_bound, check_concavity, check_endpoint_value, check_g_dominates_f, cubic_density,
    half_mixture_bound, inverse_sqrt_map, mixture_bound, normal_tail_bound, quadratic_bound,
    quartic_tail, BoundTable, DEFAULT_GRID_STEP,
};
use signsum_core::claims::{report_all, SuiteConfig, CLAIM_IDS};
use signsum_core::dist::{Caps, Counter, Engine, WeightVector};
use signsum_core::numerics::{std_normal_cdf, std_normal_upper_tail};
use signsum_core::search::minimize_prob;
use signsum_core::stopping::theorem_certificate_with_caps;
use signsum_core::VerificationReport;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Naive,
    Mim,
    Auto,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Naive => Engine::Naive,
            EngineArg::Mim => Engine::Mim,
            EngineArg::Auto => Engine::Auto,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "signsum",
    version,
    about = "Exact randomly signed sums and bound checks"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, env = "SSL_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 26)]
    pub naive_cap: usize,
    #[arg(long, global = true, default_value_t = 50)]
    pub mim_cap: usize,
    #[arg(long, global = true, default_value_t = 22)]
    pub path_cap: usize,
}

impl GlobalArgs {
    pub fn caps(&self) -> Caps {
        Caps {
            naive_n: self.naive_cap,
            mim_n: self.mim_cap,
            path_n: self.path_cap,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate bound functions or run the analytic checks
    Bounds {
        /// Function name (G, F, H, L, Z, bd, h, half-mix, cdf, tail) and its arguments
        #[arg(long, num_args = 2..=3, value_names = ["NAME", "X"], allow_negative_numbers = true)]
        eval: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        grid_step: f64,
    },
    /// Exact distribution or interval probability of S
    Dist {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        interval: Option<Vec<f64>>,
        /// P(S ≥ T)
        #[arg(long, allow_negative_numbers = true, conflicts_with = "interval")]
        tail: Option<f64>,
    },
    /// Stopping-time certificate for one instance
    Stopping {
        #[arg(long)]
        weights: PathBuf,
    },
    /// Run claims from the verification suite
    Verify {
        #[arg(long)]
        all: bool,
        /// Claim ids to keep (repeatable)
        #[arg(long = "claim")]
        claims: Vec<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        grid_step: f64,
    },
    /// Local search for small P(|S| ≤ 1)
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
    },
    /// The full claim table
    Report {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
        grid_step: f64,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(signsum_core::Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) => f.write_str(m),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<signsum_core::Error> for CliError {
    fn from(e: signsum_core::Error) -> Self {
        Self::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A command's result in every output shape.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub pass: bool,
    pub json: Value,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    pub text: String,
}

impl Emitted {
    fn from_reports(reports: &[VerificationReport], json: Value) -> Self {
        let mut text = String::new();
        for r in reports {
            let status = if r.skipped {
                "SKIP"
            } else if r.pass {
                "PASS"
            } else {
                "FAIL"
            };
            let _ = writeln!(text, "{:<24} {status}  margin {:.6e}", r.claim_id, r.margin);
        }
        Self {
            pass: reports.iter().all(|r| r.pass),
            json,
            csv_header: vec!["claim_id".into(), "pass".into(), "margin".into()],
            csv_rows: reports
                .iter()
                .map(|r| vec![r.claim_id.clone(), r.pass.to_string(), r.margin.to_string()])
                .collect(),
            text,
        }
    }

    fn scalar(name: &str, value: f64) -> Self {
        Self {
            pass: true,
            json: json!({ "name": name, "value": value }),
            csv_header: vec!["name".into(), "value".into()],
            csv_rows: vec![vec![name.into(), value.to_string()]],
            text: format!("{name} = {value:.12}\n"),
        }
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                Ok(serde_json::to_string_pretty(&self.json).expect("json value") + "\n")
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.csv_header)
                    .map_err(|e| CliError::Io(e.to_string()))?;
                for row in &self.csv_rows {
                    w.write_record(row)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv is utf-8"))
            }
            Format::Text => Ok(constants_header() + &self.text),
        }
    }
}

/// Constant table printed above every text report.
pub fn constants_header() -> String {
    let t = BoundTable::compute();
    format!(
        "G(1/4) = {:.10}  F(1/4) = {:.10}  c* = {:.10}  tail(sqrt 2) = {:.10}\n\n",
        t.g_quarter, t.f_quarter, t.c_star, t.phi_bar_sqrt2
    )
}

fn read_weights(path: &Path) -> CliResult<WeightVector> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(WeightVector::parse(&text)?)
}

fn parse_f64(s: &str) -> CliResult<f64> {
    s.parse()
        .map_err(|_| CliError::Usage(format!("not a number: {s:?}")))
}

fn eval_function(args: &[String]) -> CliResult<Emitted> {
    let name = args[0].as_str();
    let x = parse_f64(&args[1])?;
    let second = args.get(2).map(|s| parse_f64(s)).transpose()?;
    let order = |x: f64| -> CliResult<u32> {
        if x.fract() == 0.0 && (1.0..=f64::from(u32::MAX)).contains(&x) {
            Ok(x as u32)
        } else {
            Err(CliError::Usage(format!(
                "{name} takes a positive integer, got {x}"
            )))
        }
    };
    let value = match (name, second) {
        ("G", None) => normal_tail_bound(x)?,
        ("F", None) => quadratic_bound(x)?,
        ("H", None) => quartic_tail(x)?,
        ("L", None) => cubic_density(x)?,
        ("bd", None) => bd_tail_bound(x)?,
        ("h", None) => mixture_bound(order(x)?)?,
        ("half-mix", None) => half_mixture_bound(order(x)?)?,
        ("cdf", None) => std_normal_cdf(x)?,
        ("tail", None) => std_normal_upper_tail(x)?,
        ("Z", Some(eps)) => inverse_sqrt_map(x, eps)?,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown function {name:?} with {} argument(s)",
                args.len() - 1
            )))
        }
    };
    Ok(Emitted::scalar(name, value))
}

fn bounds_checks(grid_step: f64) -> CliResult<Emitted> {
    let reports = vec![
        check_g_dominates_f(8.0, grid_step)?.report,
        check_concavity(0.75, 0.0, 4.0 / 9.0, 1000)?.to_report("concavity_xi_3_4"),
        check_concavity(-1.25, 0.0, 4.0 / 9.0, 1000)?.to_report("concavity_xi_neg_5_4"),
        check_endpoint_value().report,
    ];
    let json = json!({ "constants": BoundTable::compute(), "checks": reports });
    Ok(Emitted::from_reports(&reports, json))
}

fn dist(
    cfg: &GlobalArgs,
    weights: &Path,
    interval: Option<&[f64]>,
    tail: Option<f64>,
) -> CliResult<Emitted> {
    let w = read_weights(weights)?;
    let counter = Counter::with_caps(cfg.engine.into(), cfg.caps())?;
    let query = match (interval, tail) {
        (Some(iv), _) => Some((
            "interval",
            json!(iv),
            counter.prob_in_interval(&w, iv[0], iv[1])?,
        )),
        (None, Some(t)) => Some(("tail", json!(t), counter.tail_prob(&w, t)?)),
        (None, None) => None,
    };
    if let Some((kind, at, p)) = query {
        let json = json!({
            "n": w.len(),
            "exact": w.is_exact(),
            kind: at,
            "probability": p.to_string(),
            "value": p.value(),
            "boundary_resolved": p.boundary_resolved,
        });
        return Ok(Emitted {
            pass: true,
            csv_header: ["numerator", "denominator", "value", "boundary_resolved"]
                .map(String::from)
                .to_vec(),
            csv_rows: vec![vec![
                p.numerator.to_string(),
                p.denominator().to_string(),
                p.value().to_string(),
                p.boundary_resolved.to_string(),
            ]],
            text: format!(
                "P = {p} = {:.12} (boundary-resolved sums: {})\n",
                p.value(),
                p.boundary_resolved
            ),
            json,
        });
    }
    let d = counter.enumerate(&w)?;
    let rows: Vec<(f64, u64, f64)> = d.rows().collect();
    let mut text = String::new();
    for (v, c, p) in &rows {
        let _ = writeln!(text, "{v:>22.15}  {c:>10}  {p:.12}");
    }
    Ok(Emitted {
        pass: true,
        json: json!({
            "n": d.n(),
            "exact": d.is_exact(),
            "atoms": rows.iter().map(|(v, c, p)| json!({"value": v, "count": c, "prob": p})).collect::<Vec<_>>(),
        }),
        csv_header: ["value", "count", "prob"].map(String::from).to_vec(),
        csv_rows: rows
            .iter()
            .map(|(v, c, p)| vec![v.to_string(), c.to_string(), p.to_string()])
            .collect(),
        text,
    })
}

fn stopping(cfg: &GlobalArgs, weights: &Path) -> CliResult<Emitted> {
    let w = read_weights(weights)?;
    let cert = theorem_certificate_with_caps(&w, &cfg.caps())?;
    let mut text = format!("K = {}  n = {}  branch {:?}\n", cert.k, cert.n, cert.branch);
    for (t, p) in &cert.per_t {
        let _ = writeln!(
            text,
            "T = {t:>2}  count {:>8}  P(|S|<=1 | T) = {:.6}  bound {:.6}  margin {:+.6}",
            p.count, p.cond_prob, p.bound, p.margin
        );
    }
    let _ = writeln!(
        text,
        "final {:.6} >= mixture {:.6} >= branch bound {:.6} >= G(1/4) {:.6}: {}",
        cert.final_prob,
        cert.mixture_bound,
        cert.final_bound,
        cert.g_quarter,
        if cert.pass { "PASS" } else { "FAIL" }
    );
    Ok(Emitted {
        pass: cert.pass,
        json: serde_json::to_value(&cert).expect("certificate serializes"),
        csv_header: ["T", "count", "cond_prob", "bound", "margin"]
            .map(String::from)
            .to_vec(),
        csv_rows: cert
            .per_t
            .iter()
            .map(|(t, p)| {
                vec![
                    t.to_string(),
                    p.count.to_string(),
                    p.cond_prob.to_string(),
                    p.bound.to_string(),
                    p.margin.to_string(),
                ]
            })
            .collect(),
        text,
    })
}

fn suite_config(seed: u64, trials: Option<usize>, grid_step: f64) -> SuiteConfig {
    let mut cfg = SuiteConfig {
        seed,
        grid_step,
        ..SuiteConfig::default()
    };
    if let Some(t) = trials {
        cfg.lemma_trials = t;
        cfg.tail_trials = t;
        cfg.theorem_trials = t;
    }
    cfg
}

fn suite(cfg: SuiteConfig, keep: &[String]) -> CliResult<Emitted> {
    if let Some(bad) = keep.iter().find(|id| !CLAIM_IDS.contains(&id.as_str())) {
        return Err(CliError::Usage(format!("unknown claim id {bad:?}")));
    }
    let mut report = report_all(&cfg)?;
    if !keep.is_empty() {
        report.claims.retain(|c| keep.contains(&c.claim_id));
        report.pass = report.claims.iter().all(|c| c.pass);
    }
    let json = serde_json::to_value(&report).expect("suite serializes");
    Ok(Emitted::from_reports(&report.claims, json))
}

#[derive(Serialize)]
struct SearchOut<'a> {
    n: usize,
    best_prob: String,
    best_value: f64,
    floor: f64,
    result: &'a signsum_core::search::SearchResult,
}

fn search(cfg: &GlobalArgs, n: usize, restarts: usize) -> CliResult<Emitted> {
    let r = minimize_prob(n, restarts, cfg.seed)?;
    let floor = signsum_core::bounds::g_quarter();
    let pass = r.best_prob.value() >= floor;
    let out = SearchOut {
        n,
        best_prob: r.best_prob.to_string(),
        best_value: r.best_prob.value(),
        floor,
        result: &r,
    };
    let weights: Vec<String> = r
        .best_weights
        .weights()
        .iter()
        .map(|v| format!("{v:.9}"))
        .collect();
    Ok(Emitted {
        pass,
        json: serde_json::to_value(&out).expect("search serializes"),
        csv_header: ["index", "weight"].map(String::from).to_vec(),
        csv_rows: r
            .best_weights
            .weights()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), v.to_string()])
            .collect(),
        text: format!(
            "best P(|S|<=1) = {} = {:.6} after {} evaluations\nweights: {}\n",
            r.best_prob,
            r.best_prob.value(),
            r.evaluations,
            weights.join(" ")
        ),
    })
}

/// Executes one parsed command.
pub fn execute(cfg: &RunConfig) -> CliResult<Emitted> {
    let g = &cfg.global;
    g.caps().validate()?;
    match &cfg.command {
        Command::Bounds {
            eval: Some(args), ..
        } => eval_function(args),
        Command::Bounds {
            eval: None,
            grid_step,
        } => bounds_checks(*grid_step),
        Command::Dist {
            weights,
            interval,
            tail,
        } => dist(g, weights, interval.as_deref(), *tail),
        Command::Stopping { weights } => stopping(g, weights),
        Command::Verify {
            all,
            claims,
            trials,
            grid_step,
        } => {
            if !all && claims.is_empty() {
                return Err(CliError::Usage(
                    "verify needs --all or at least one --claim".into(),
                ));
            }
            suite(suite_config(g.seed, *trials, *grid_step), claims)
        }
        Command::Search { n, restarts } => search(g, *n, *restarts),
        Command::Report { trials, grid_step } => {
            suite(suite_config(g.seed, *trials, *grid_step), &[])
        }
    }
}

/// Runs the command, writes the report and returns the exit status.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match cfg.global.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
            .and_then(|pool| pool.install(|| execute(cfg))),
        None => execute(cfg),
    };
    let written = outcome.and_then(|e| {
        let body = e.render(cfg.global.format)?;
        match &cfg.global.out {
            Some(path) => std::fs::write(path, &body)
                .map_err(|err| CliError::Io(format!("{}: {err}", path.display()))),
            None => stdout
                .write_all(body.as_bytes())
                .map_err(|err| CliError::Io(err.to_string())),
        }?;
        Ok(e.pass)
    });
    if let Err(e) = &written {
        let _ = writeln!(stderr, "error: {e}");
    }
    exit_code(&written)
}

/// Maps a command outcome (did every check pass?) to the exit status.
pub fn exit_code(outcome: &CliResult<bool>) -> i32 {
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(_) => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            code
        }
    }
}
