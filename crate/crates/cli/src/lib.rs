//! Command-line front end: picks a model or parses a custom Hamiltonian,
//! runs the requested suites and writes the report.

pub mod expr;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use dunkl_core::models::{catalog, ModelKind, ModelSpec};
use dunkl_core::ring::{Param, Rat, MAX_DIMS};
use dunkl_core::verify::{
    appendix_suite, coproduct_suite, core_suite, independence_suite, model_suite, render_markdown, run_suite, universal_suite,
    Context, HamiltonianBuilder, Mode, RunOptions, SuiteReport, VerifyError,
};

use crate::expr::Ast;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SKIPPED: i32 = 3;

/// Set to `1` to record wall-clock milliseconds per check. Off by default
/// so that reports are byte-reproducible.
pub const TIMINGS_ENV: &str = "DUNKL_REPORT_TIMINGS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Core,
    Coproduct,
    Model,
    Appendix,
    Independence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Symbolic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Markdown,
}

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Exact verification of Dunkl-type superintegrable Hamiltonians")]
pub struct Args {
    /// Model name (see --list-models), or `custom` together with --expr.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of dimensions N.
    #[arg(long)]
    pub dims: Option<usize>,
    /// Comma-separated suites to run.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "core,coproduct,model")]
    pub suites: Vec<SuiteName>,
    /// Defaults to symbolic for N <= 3 and sampled above.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Highest probe exponent; probes use exponents from -2 up to this.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(i8).range(0..=8))]
    pub probe_degree: i8,
    /// JSON object mapping parameter names to rationals, e.g. {"omega": "2/3"}.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: Output,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "DUNKL_JOBS")]
    pub jobs: Option<usize>,
    /// Largest intermediate product, in terms, before a check is skipped.
    #[arg(long)]
    pub term_budget: Option<usize>,
    /// Treat skipped checks as an error (exit code 3).
    #[arg(long)]
    pub strict: bool,
    /// Source of a custom Hamiltonian.
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long)]
    pub list_models: bool,
}

#[derive(Debug, Clone)]
pub enum ModelChoice {
    Named(ModelKind),
    Custom { source: String, ast: Ast },
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub dims: usize,
    pub model: ModelChoice,
    pub suites: Vec<SuiteName>,
    pub mode: Mode,
    pub seed: u64,
    pub probe_degree: i8,
    pub params: Vec<(Param, Rat)>,
    pub output: Output,
    pub jobs: usize,
    pub term_budget: Option<usize>,
    pub strict: bool,
    pub timings: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read parameter file {path}: {err}")]
    ParamsIo { path: PathBuf, err: std::io::Error },
    #[error("parameter file {path}: {msg}")]
    Params { path: PathBuf, msg: String },
    #[error("{0}")]
    Model(#[from] dunkl_core::models::ModelError),
    #[error("--expr: {0}")]
    Expr(#[from] expr::ParseError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads a parameter file: a JSON object of `name: "p/q"` pairs.
pub fn read_params(path: &PathBuf, dims: usize) -> Result<Vec<(Param, Rat)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|err| CliError::ParamsIo { path: path.clone(), err })?;
    let bad = |msg: String| CliError::Params { path: path.clone(), msg };
    let map: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| bad(format!("expected a JSON object: {e}")))?;
    let mut out = Vec::new();
    for (name, v) in map {
        let p = Param::parse(&name, dims).ok_or_else(|| bad(format!("unknown parameter `{name}` for N = {dims}")))?;
        let s = v.as_str().ok_or_else(|| bad(format!("value of `{name}` must be a string like \"2/3\"")))?;
        let r = s.parse::<Rat>().map_err(|e| bad(format!("`{name}`: {e}")))?;
        out.push((p, r));
    }
    Ok(out)
}

impl CliConfig {
    pub fn from_args(a: &Args) -> Result<CliConfig, CliError> {
        let dims = a.dims.ok_or_else(|| usage("--dims is required"))?;
        if dims == 0 || dims > MAX_DIMS {
            return Err(usage(format!("--dims must be between 1 and {MAX_DIMS}, got {dims}")));
        }
        let model = match (a.model.as_deref(), &a.expr) {
            (None | Some("custom"), Some(src)) => {
                ModelChoice::Custom { source: src.clone(), ast: expr::parse(src, dims)? }
            }
            (Some("custom"), None) => return Err(usage("--model custom needs --expr")),
            (None, None) => return Err(usage("one of --model, --expr or --list-models is required")),
            (Some(_), Some(_)) => return Err(usage("--expr only goes with --model custom")),
            (Some(name), None) => {
                let kind: ModelKind = name.parse()?;
                ModelSpec::new(kind, dims)?;
                ModelChoice::Named(kind)
            }
        };
        let mut suites = Vec::new();
        for s in &a.suites {
            if !suites.contains(s) {
                suites.push(*s);
            }
        }
        if let ModelChoice::Custom { .. } = model {
            if let Some(s) = suites.iter().find(|s| matches!(s, SuiteName::Appendix | SuiteName::Independence)) {
                let name = s.to_possible_value().expect("no skipped variants").get_name().to_string();
                return Err(usage(format!("custom models run core, coproduct and model suites only, not {name}")));
            }
        }
        let mode = match a.mode {
            Some(ModeArg::Symbolic) => Mode::Symbolic,
            Some(ModeArg::Sampled) => Mode::Sampled,
            None => Mode::default_for(dims),
        };
        let params = match &a.params {
            Some(p) => read_params(p, dims)?,
            None => Vec::new(),
        };
        if a.term_budget == Some(0) {
            return Err(usage("--term-budget must be positive"));
        }
        Ok(CliConfig {
            dims,
            model,
            suites,
            mode,
            seed: a.seed,
            probe_degree: a.probe_degree,
            params,
            output: a.output,
            jobs: a.jobs.unwrap_or(0),
            term_budget: a.term_budget,
            strict: a.strict,
            timings: std::env::var(TIMINGS_ENV).is_ok_and(|v| v == "1"),
        })
    }

    fn context(&self) -> Context {
        let mut ctx = Context::new(self.dims, self.mode, self.seed);
        ctx.fixed = self.params.clone();
        if let Some(b) = self.term_budget {
            ctx.budget = b;
        }
        ctx
    }

    fn options(&self) -> RunOptions {
        RunOptions { jobs: self.jobs, probe_degree: self.probe_degree, timings: self.timings, ..RunOptions::default() }
    }

    /// Runs every selected suite in order.
    pub fn reports(&self) -> Result<Vec<SuiteReport>, VerifyError> {
        let ctx = self.context();
        let opts = self.options();
        let mut out = Vec::new();
        for &s in &self.suites {
            let r = match (s, &self.model) {
                (SuiteName::Core, _) => run_suite(core_suite, &ctx, &opts)?,
                (SuiteName::Coproduct, _) => run_suite(coproduct_suite, &ctx, &opts)?,
                (SuiteName::Appendix, _) => run_suite(appendix_suite, &ctx, &opts)?,
                (SuiteName::Model, ModelChoice::Named(k)) => run_suite(|c| model_suite(*k, c), &ctx, &opts)?,
                (SuiteName::Independence, ModelChoice::Named(k)) => run_suite(|c| independence_suite(*k, c), &ctx, &opts)?,
                (SuiteName::Model, ModelChoice::Custom { ast, .. }) => {
                    let cfg = ast.site_config(self.dims);
                    let tree = ast.clone();
                    let build: HamiltonianBuilder = Arc::new(move |d| Ok(tree.to_expr(d)?));
                    run_suite(|c| universal_suite("custom", cfg.clone(), &build, c), &ctx, &opts)?
                }
                (SuiteName::Independence, ModelChoice::Custom { .. }) => unreachable!("rejected in from_args"),
            };
            out.push(r);
        }
        Ok(out)
    }
}

/// Exit status for a finished run.
pub fn exit_code(reports: &[SuiteReport], strict: bool) -> i32 {
    if reports.iter().any(|r| r.summary.failed > 0) {
        EXIT_FAIL
    } else if strict && reports.iter().any(|r| r.summary.skipped > 0) {
        EXIT_SKIPPED
    } else {
        EXIT_PASS
    }
}

pub fn render(reports: &[SuiteReport], output: Output) -> String {
    match output {
        Output::Json => serde_json::to_string_pretty(reports).expect("reports serialize") + "\n",
        Output::Markdown => render_markdown(reports),
    }
}

fn list_models(output: Output) -> String {
    let models = catalog();
    match output {
        Output::Json => serde_json::to_string_pretty(&models).expect("catalog serializes") + "\n",
        Output::Markdown => {
            let mut s = String::from("| name | min N | extra integrals | hamiltonian |\n|---|---|---|---|\n");
            for m in models {
                s += &format!("| {} | {} | {} | {} |\n", m.name, m.min_dims, m.extra_integrals, m.hamiltonian);
            }
            s
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write) -> Result<i32, CliError> {
    if args.list_models {
        out.write_all(list_models(args.output).as_bytes())?;
        return Ok(EXIT_PASS);
    }
    let cfg = CliConfig::from_args(args)?;
    let reports = cfg.reports()?;
    out.write_all(render(&reports, cfg.output).as_bytes())?;
    Ok(exit_code(&reports, cfg.strict))
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("dunkl").chain(v.iter().copied())).unwrap()
    }

    fn run(v: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(std::iter::once("dunkl").chain(v.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn defaults() {
        let c = CliConfig::from_args(&args(&["--model", "osc", "--dims", "4"])).unwrap();
        assert_eq!(c.mode, Mode::Sampled);
        assert_eq!(c.suites, vec![SuiteName::Core, SuiteName::Coproduct, SuiteName::Model]);
        assert_eq!((c.seed, c.probe_degree, c.output), (0, 3, Output::Json));
        let c = CliConfig::from_args(&args(&["--model", "KC", "--dims", "3", "--suites", "model,model,core"])).unwrap();
        assert_eq!(c.mode, Mode::Symbolic);
        assert_eq!(c.suites, vec![SuiteName::Model, SuiteName::Core]);
    }

    #[test]
    fn config_errors_exit_two() {
        let (code, _, err) = run(&["--model", "kc", "--dims", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("KC-family requires N ≥ 2"), "{err}");
        assert_eq!(run(&["--model", "nope", "--dims", "2"]).0, EXIT_USAGE);
        assert_eq!(run(&["--model", "osc"]).0, EXIT_USAGE);
        assert_eq!(run(&["--model", "osc", "--dims", "9"]).0, EXIT_USAGE);
        assert_eq!(run(&["--model", "custom", "--dims", "2"]).0, EXIT_USAGE);
        assert_eq!(run(&["--expr", "Jp", "--dims", "2", "--suites", "appendix"]).0, EXIT_USAGE);
        assert_eq!(run(&["--model", "osc", "--dims", "2", "--suites", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["--model", "osc", "--dims", "2", "--probe-degree", "20"]).0, EXIT_USAGE);
        let (code, _, err) = run(&["--expr", "inv(x3)", "--dims", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("column 5"), "{err}");
    }

    #[test]
    fn params_file() {
        let dir = std::env::temp_dir().join(format!("dunkl-cli-params-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.json");
        std::fs::write(&good, r#"{"omega": "2/3", "mu2": "-1"}"#).unwrap();
        let p = read_params(&good, 2).unwrap();
        assert_eq!(p, vec![(Param::Mu(1), Rat::int(-1)), (Param::Omega, Rat::new(2, 3))]);
        assert!(read_params(&good, 1).is_err());
        let bad = dir.join("bad.json");
        std::fs::write(&bad, r#"{"omega": 2}"#).unwrap();
        assert!(matches!(read_params(&bad, 2), Err(CliError::Params { .. })));
        assert!(matches!(read_params(&dir.join("missing.json"), 2), Err(CliError::ParamsIo { .. })));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn list_models_prints_catalog() {
        let (code, out, _) = run(&["--list-models"]);
        assert_eq!(code, EXIT_PASS);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 12);
        let (_, md, _) = run(&["--list-models", "--output", "markdown"]);
        assert!(md.contains("| qgentaubnut |"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_PASS);
        assert!(out.contains("--term-budget"));
    }
}
