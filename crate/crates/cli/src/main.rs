mod family;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ksgof::classifier::{classify_pure, classify_tp1, decompose_tp3, Tp1Options, DEFAULT_SCALE_BUDGET};
use ksgof::gaussian::{
    anderson_gap, coupling_distance, noncrossing_prob, PathConfig, ShiftFunction, DEFAULT_GRID, DEFAULT_PATH_REPS,
};
use ksgof::ks::{critical_value, EmpiricalCdf, TestDecision};
use ksgof::model::DEFAULT_C_EPS;
use ksgof::power::{estimate_power, run_suite, suite_catalog, ExperimentConfig, SuiteOptions};
use serde_json::{json, Value};

use family::{read_coefficients, read_descriptor, spec_json, FamilyArgs};
use output::{csv_doc, emit, json_doc};

/// Malformed option; exits with status 2 and names the key.
#[derive(Debug)]
pub struct Usage {
    key: String,
    msg: String,
}

impl Usage {
    pub fn new(key: &str, msg: impl fmt::Display) -> Self {
        Self { key: key.to_string(), msg: msg.to_string() }
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid --{}: {}", self.key, self.msg)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug)]
struct SuiteFailed(String);

impl fmt::Display for SuiteFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "suite {} failed", self.0)
    }
}

impl std::error::Error for SuiteFailed {}

#[derive(Debug, Parser)]
#[command(name = "ksgof", version, about = "Kolmogorov test consistency experiments")]
struct Cli {
    /// Worker threads for Monte Carlo loops; results do not depend on it.
    #[arg(long, global = true, env = "KSGOF_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Tp1,
    Pure,
    Decompose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaussMode {
    Noncrossing,
    Gap,
    Coupling,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a sample from a model.
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the resolved model descriptor here.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Kolmogorov test of a data file, or of a sample drawn from a model.
    Test {
        /// Numbers separated by whitespace or commas; `#` starts a comment.
        #[arg(long, conflicts_with_all = ["family", "model"])]
        data: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        e1: f64,
        #[arg(long, default_value_t = 1.0)]
        e2: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consistency verdict for the coefficient field of a model file.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum, default_value_t = Method::Tp1)]
        method: Method,
        #[arg(long, default_value_t = 3)]
        window: i64,
        #[arg(long, default_value_t = 1.0)]
        c_small: f64,
        #[arg(long, default_value_t = 0.0)]
        e1: f64,
        #[arg(long, default_value_t = 1.0)]
        e2: f64,
        /// Tolerance of the coarse-scale check, or of the pure and decompose methods.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_C_EPS)]
        c_eps: i64,
        /// Scales past the critical one excluded from the pure-consistency tail.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n1: i64,
        /// Keep the extra `n^r` factor of the pure-consistency criterion.
        #[arg(long)]
        literal: bool,
        #[arg(long, default_value_t = DEFAULT_SCALE_BUDGET)]
        budget: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo power table over a grid of sample sizes.
    Power {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated, strictly ascending sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        e1: f64,
        #[arg(long, default_value_t = 1.0)]
        e2: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shifted Brownian bridge experiments.
    Gaussian {
        #[arg(long, value_enum, default_value_t = GaussMode::Noncrossing)]
        mode: GaussMode,
        /// `zero`, `constant:V` or `triangle:LO,HI,HEIGHT`.
        #[arg(long, conflicts_with = "model")]
        shift: Option<String>,
        /// Model whose scaled CDF deviation is the shift (needs --n).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Boundary of the non-crossing event.
        #[arg(long, default_value_t = 1.3581)]
        c: f64,
        #[arg(long, default_value_t = DEFAULT_PATH_REPS)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite; exits with 3 when it fails.
    Suite {
        #[arg(long, required_unless_present = "list")]
        id: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the suite catalog and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<SuiteFailed>() {
                ExitCode::from(3)
            } else if err.is::<Usage>() || err.is::<ksgof::Error>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn usage(key: &str) -> impl Fn(ksgof::Error) -> Usage + '_ {
    move |e| Usage::new(key, e)
}

fn check_unit_open(key: &str, v: f64) -> Result<(), Usage> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Usage::new(key, format!("{v} outside (0, 1)")))
    }
}

fn check_interval(e1: f64, e2: f64) -> Result<(), Usage> {
    if !(0.0..1.0).contains(&e1) {
        return Err(Usage::new("e1", format!("{e1} outside [0, 1)")));
    }
    if !(e2 > e1 && e2 <= 1.0) {
        return Err(Usage::new("e2", format!("{e2} must lie in ({e1}, 1]")));
    }
    Ok(())
}

fn echo(config: &Value) {
    eprintln!("config: {config}");
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Usage::new("workers", "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    let workers = rayon::current_num_threads();
    match cli.command {
        Command::Simulate { family, n, seed, out, model_out } => {
            if n == 0 {
                return Err(Usage::new("n", "must be at least 1").into());
            }
            let spec = family.spec()?;
            let model = spec.build(n).map_err(usage("family"))?;
            let config = json!({
                "command": "simulate", "family": spec_json(&spec), "n": n, "seed": seed, "workers": workers,
            });
            echo(&config);
            let batch = model.sample(n, seed).map_err(usage("family"))?;
            let mut body = String::from("index,x\n");
            for (k, x) in batch.values.iter().enumerate() {
                body.push_str(&format!("{k},{x}\n"));
            }
            emit(out.as_deref(), &csv_doc(&config, &body))?;
            if let Some(path) = model_out {
                let mut desc = serde_json::to_value(model.descriptor())?;
                desc["config"] = config;
                emit(Some(&path), &(serde_json::to_string_pretty(&desc)? + "\n"))?;
            }
        }
        Command::Test { data, family, n, seed, alpha, e1, e2, out } => {
            check_unit_open("alpha", alpha)?;
            check_interval(e1, e2)?;
            let (values, source) = match &data {
                Some(path) => (read_data(path)?, json!({ "data": path.display().to_string() })),
                None => {
                    let n = n.ok_or_else(|| Usage::new("n", "required when sampling from a model"))?;
                    let spec = family.spec()?;
                    let model = spec.build(n).map_err(usage("family"))?;
                    let batch = model.sample(n, seed).map_err(usage("n"))?;
                    (batch.values, json!({ "family": spec_json(&spec), "n": n, "seed": seed }))
                }
            };
            let config = json!({
                "command": "test", "source": source, "alpha": alpha, "e1": e1, "e2": e2,
                "seed": seed, "workers": workers,
            });
            echo(&config);
            let ecdf = EmpiricalCdf::new(values).map_err(usage("data"))?;
            let crit = critical_value(ecdf.n(), alpha).map_err(usage("alpha"))?;
            let stat = ecdf.statistic(e1, e2).map_err(usage("e1"))?;
            let decision = TestDecision::new(stat, crit.value, alpha);
            let result = json!({
                "n": ecdf.n(), "decision": decision, "achieved_size": crit.achieved_size, "method": crit.method,
            });
            emit(out.as_deref(), &json_doc(&config, "result", &result))?;
        }
        Command::Classify {
            model,
            n,
            r,
            method,
            window,
            c_small,
            e1,
            e2,
            eps,
            c_eps,
            n1,
            literal,
            budget,
            out,
        } => {
            if n < 2 {
                return Err(Usage::new("n", "must be at least 2").into());
            }
            if !(r > 0.0 && r < 0.5) {
                return Err(Usage::new("r", format!("{r} outside (0, 1/2)")).into());
            }
            check_interval(e1, e2)?;
            if !(eps > 0.0) {
                return Err(Usage::new("eps", "must be positive").into());
            }
            let coeffs = read_coefficients(&model)?;
            let opts = Tp1Options { window, c_small, e1, e2, g_eps: eps, c_eps, ..Tp1Options::default() };
            let config = json!({
                "command": "classify", "model": model.display().to_string(), "n": n, "r": r,
                "method": format!("{method:?}").to_lowercase(), "options": opts, "n1": n1,
                "literal": literal, "budget": budget, "workers": workers,
            });
            echo(&config);
            let doc = match method {
                Method::Tp1 => {
                    let v = classify_tp1(&coeffs, n, r, &opts).map_err(usage("model"))?;
                    json_doc(&config, "verdict", &v)
                }
                Method::Pure => {
                    let v = classify_pure(&coeffs, n, r, eps, n1, literal).map_err(usage("model"))?;
                    json_doc(&config, "verdict", &v)
                }
                Method::Decompose => {
                    let d = decompose_tp3(&coeffs, n, r, eps, c_eps, budget).map_err(usage("model"))?;
                    json_doc(&config, "decomposition", &d)
                }
            };
            emit(out.as_deref(), &doc)?;
        }
        Command::Power { family, n, alpha, reps, seed, e1, e2, format, out } => {
            check_unit_open("alpha", alpha)?;
            check_interval(e1, e2)?;
            let spec = family.spec()?;
            let cfg = ExperimentConfig::new(n, alpha, reps, seed)
                .and_then(|c| c.with_interval(e1, e2))
                .map_err(|e| Usage::new(if reps < ksgof::power::MIN_REPS { "reps" } else { "n" }, e))?;
            let config = json!({
                "command": "power", "family": spec_json(&spec), "experiment": cfg, "workers": workers,
            });
            echo(&config);
            let table = estimate_power(&spec, &cfg).map_err(usage("family"))?;
            let doc = match format {
                Format::Csv => csv_doc(&config, &table.to_csv()),
                Format::Json => json_doc(&config, "table", &table),
            };
            emit(out.as_deref(), &doc)?;
        }
        Command::Gaussian { mode, shift, model, n, c, reps, grid, seed, out } => {
            if !(c > 0.0) {
                return Err(Usage::new("c", "must be positive").into());
            }
            let cfg = PathConfig::new(reps, grid, seed)
                .map_err(|e| Usage::new(if reps == 0 { "reps" } else { "grid" }, e))?;
            let config = json!({
                "command": "gaussian", "mode": format!("{mode:?}").to_lowercase(), "shift": shift,
                "model": model.as_ref().map(|p| p.display().to_string()), "n": n, "c": c,
                "paths": cfg, "seed": seed, "workers": workers,
            });
            let doc = if mode == GaussMode::Coupling {
                let path = model.ok_or_else(|| Usage::new("model", "required by --mode coupling"))?;
                let n = n.ok_or_else(|| Usage::new("n", "required by --mode coupling"))?;
                let m = ksgof::model::AlternativeDensity::from_descriptor(&read_descriptor(&path)?)
                    .map_err(usage("model"))?;
                echo(&config);
                json_doc(&config, "coupling", &coupling_distance(&m, n, &cfg).map_err(usage("model"))?)
            } else {
                let u = match (&shift, &model) {
                    (Some(s), _) => parse_shift(s)?,
                    (None, Some(path)) => {
                        let n = n.ok_or_else(|| Usage::new("n", "required with --model"))?;
                        let m = ksgof::model::AlternativeDensity::from_descriptor(&read_descriptor(path)?)
                            .map_err(usage("model"))?;
                        ShiftFunction::from_model(&m, n).map_err(usage("model"))?
                    }
                    (None, None) => ShiftFunction::zero(),
                };
                echo(&config);
                if mode == GaussMode::Gap {
                    json_doc(&config, "gap", &anderson_gap(&u, c, &cfg).map_err(usage("shift"))?)
                } else {
                    json_doc(&config, "estimate", &noncrossing_prob(&u, c, &cfg).map_err(usage("shift"))?)
                }
            };
            emit(out.as_deref(), &doc)?;
        }
        Command::Suite { id, reps, seed, out, list } => {
            if list {
                let mut body = String::new();
                for s in suite_catalog() {
                    body.push_str(&format!("{:>2} {:<30} {}\n", s.criterion, s.id, s.title));
                }
                return emit(None, &body);
            }
            let id = id.expect("clap requires --id");
            let opts = SuiteOptions { seed, reps };
            let config = json!({ "command": "suite", "id": id, "options": opts, "workers": workers });
            echo(&config);
            let report = run_suite(&id, &opts).map_err(|e| match e {
                ksgof::Error::UnknownSuite(_) => Usage::new("id", e),
                e => Usage::new("reps", e),
            })?;
            eprintln!("{}", report.summary_line());
            emit(out.as_deref(), &json_doc(&config, "report", &report))?;
            if !report.passed {
                return Err(SuiteFailed(id).into());
            }
        }
    }
    Ok(())
}

fn read_data(path: &std::path::Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage::new("data", format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let x = tok
                .parse::<f64>()
                .map_err(|_| Usage::new("data", format!("line {}: `{tok}` is not a number", lineno + 1)))?;
            values.push(x);
        }
    }
    if values.is_empty() {
        return Err(Usage::new("data", "no values").into());
    }
    Ok(values)
}

fn parse_shift(s: &str) -> anyhow::Result<ShiftFunction> {
    let bad = |m: &str| Usage::new("shift", format!("`{s}`: {m}"));
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("bad number"))?
    };
    let u = match (kind, nums.as_slice()) {
        ("zero", []) => ShiftFunction::zero(),
        ("constant", [v]) => ShiftFunction::constant(*v),
        ("triangle", [lo, hi, h]) => ShiftFunction::triangle(*lo, *hi, *h).map_err(|e| bad(&e.to_string()))?,
        _ => return Err(bad("expected zero, constant:V or triangle:LO,HI,HEIGHT").into()),
    };
    Ok(u)
}
