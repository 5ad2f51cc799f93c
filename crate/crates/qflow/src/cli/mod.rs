//! Command-line front end: configuration, suites and report emission.

mod report;
mod suites;

pub use report::{emit, Format, Record, Report, SuiteReport, Value};
pub use suites::{explain, run_suite, Suite};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qflow", version, about = "Verification suites for the Laplacian-generated stochastic flow on flat tori")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one or more suites and write a report.
    Run(RunArgs),
    /// List the available suites.
    ListSuites,
    /// Describe what a suite checks.
    Explain { suite: String },
}

#[derive(clap::Args, Debug, Default)]
pub struct RunArgs {
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suite name, comma list, or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub cap: Option<i64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tolerance override `suite=value`; repeatable.
    #[arg(long = "tol")]
    pub tol: Vec<String>,
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub cap: i64,
    pub cutoff: f64,
    pub depth: usize,
    /// Number of pieces in sampled noise paths.
    pub mesh: usize,
    pub t_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub tol: BTreeMap<String, f64>,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub samples: usize,
}

pub const TOL_KEYS: [&str; 6] = ["identities", "growth", "flow", "trace", "theta", "action"];

impl Default for RunConfig {
    fn default() -> Self {
        let tol = [
            ("identities", 1e-12),
            ("growth", 1e-10),
            ("flow", 1e-10),
            ("trace", 1e-9),
            ("theta", 1e-10),
            ("action", 1e-2),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        RunConfig {
            dim: 1,
            cap: 8,
            cutoff: 6.0,
            depth: 3,
            mesh: 2,
            t_grid: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0],
            lambda_grid: vec![5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0],
            tol,
            suites: Suite::ALL.to_vec(),
            out: None,
            format: Format::Csv,
            seed: 0,
            samples: 50,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid { field: field.to_string(), reason: reason.into() }
}

fn parse_num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| invalid(field, format!("cannot parse `{v}`")))
}

fn parse_grid(field: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(field, s)).collect()
}

fn parse_suites(v: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for name in v.split(',').map(str::trim) {
        if name == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        let s = Suite::from_name(name).ok_or_else(|| invalid("suite", format!("unknown suite `{name}`")))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(invalid("suite", "no suite selected"));
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dim" => self.dim = parse_num("dim", value)?,
            "cap" => self.cap = parse_num("cap", value)?,
            "cutoff" => self.cutoff = parse_num("cutoff", value)?,
            "depth" => self.depth = parse_num("depth", value)?,
            "mesh" => self.mesh = parse_num("mesh", value)?,
            "seed" => self.seed = parse_num("seed", value)?,
            "samples" => self.samples = parse_num("samples", value)?,
            "t_grid" => self.t_grid = parse_grid("t_grid", value)?,
            "lambda_grid" => self.lambda_grid = parse_grid("lambda_grid", value)?,
            "suite" => self.suites = parse_suites(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Format::from_name(value).ok_or_else(|| invalid("format", "expected csv or json"))?,
            k => match k.strip_prefix("tol.") {
                Some(suite) if TOL_KEYS.contains(&suite) => {
                    self.tol.insert(suite.to_string(), parse_num(k, value)?);
                }
                _ => return Err(invalid(k, "unknown key")),
            },
        }
        Ok(())
    }

    /// Parses a `key=value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(&format!("line {}", n + 1), "expected key=value"))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path).map_err(|e| invalid("config", e.to_string()))?;
            cfg.apply_text(&text)?;
        }
        if let Some(s) = &args.suite {
            cfg.set("suite", s)?;
        }
        if let Some(o) = &args.out {
            cfg.out = Some(o.clone());
        }
        if let Some(f) = &args.format {
            cfg.set("format", f)?;
        }
        cfg.dim = args.dim.unwrap_or(cfg.dim);
        cfg.cap = args.cap.unwrap_or(cfg.cap);
        cfg.cutoff = args.cutoff.unwrap_or(cfg.cutoff);
        cfg.depth = args.depth.unwrap_or(cfg.depth);
        cfg.seed = args.seed.unwrap_or(cfg.seed);
        cfg.samples = args.samples.unwrap_or(cfg.samples);
        for t in &args.tol {
            let (k, v) = t.split_once('=').ok_or_else(|| invalid("tol", format!("expected suite=value, got `{t}`")))?;
            cfg.set(&format!("tol.{}", k.trim()), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(invalid("dim", format!("{} not in 1..=3", self.dim)));
        }
        if (self.cap as f64) < self.cutoff {
            return Err(invalid("cap", format!("cap {} below cutoff {}", self.cap, self.cutoff)));
        }
        if self.cutoff < 0.0 {
            return Err(invalid("cutoff", "must be nonnegative"));
        }
        if self.depth > 6 {
            return Err(invalid("depth", format!("{} exceeds 6", self.depth)));
        }
        if !(1..=4).contains(&self.mesh) {
            return Err(invalid("mesh", format!("{} not in 1..=4", self.mesh)));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        for (k, v) in &self.tol {
            if !positive(*v) {
                return Err(invalid(&format!("tol.{k}"), format!("{v} is not positive")));
            }
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !positive(*t)) {
            return Err(invalid("t_grid", "needs positive times"));
        }
        if self.lambda_grid.len() < 2 || self.lambda_grid.iter().any(|l| !positive(*l)) {
            return Err(invalid("lambda_grid", "needs at least two positive values"));
        }
        Ok(())
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }

    /// `(key, value)` pairs for the report metadata.
    pub fn echo(&self) -> Vec<(String, String)> {
        let grid = |g: &[f64]| g.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let mut out = vec![
            ("dim".to_string(), self.dim.to_string()),
            ("cap".to_string(), self.cap.to_string()),
            ("cutoff".to_string(), self.cutoff.to_string()),
            ("depth".to_string(), self.depth.to_string()),
            ("mesh".to_string(), self.mesh.to_string()),
            ("t_grid".to_string(), grid(&self.t_grid)),
            ("lambda_grid".to_string(), grid(&self.lambda_grid)),
            ("suite".to_string(), self.suites.iter().map(|s| s.name()).collect::<Vec<_>>().join(",")),
            ("format".to_string(), self.format.name().to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("samples".to_string(), self.samples.to_string()),
        ];
        for (k, v) in &self.tol {
            out.push((format!("tol.{k}"), v.to_string()));
        }
        out
    }
}

/// Runs the selected suites concurrently and assembles them in order.
pub fn run(cfg: &RunConfig) -> Report {
    let start = Instant::now();
    let suites: Vec<SuiteReport> = cfg.suites.par_iter().map(|s| run_suite(*s, cfg)).collect();
    Report { config: cfg.echo(), suites, wall_time: start.elapsed().as_secs_f64() }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::ListSuites => {
            for s in Suite::ALL {
                println!("{:<11} {}", s.name(), s.summary());
            }
            0
        }
        Command::Explain { suite } => match Suite::from_name(&suite) {
            Some(s) => {
                print!("{}", explain(s));
                0
            }
            None => {
                eprintln!("unknown suite `{suite}`; try `qflow list-suites`");
                2
            }
        },
        Command::Run(args) => {
            let cfg = match RunConfig::from_args(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 2;
                }
            };
            let report = run(&cfg);
            if let Err(e) = emit(&report, cfg.format, cfg.out.as_deref().map(Path::new)) {
                eprintln!("error: {e}");
                return 1;
            }
            for s in &report.suites {
                let failed = s.failures();
                let status = if s.passed() { "PASS" } else { "FAIL" };
                eprintln!("{status} {:<11} {} records, {} failed", s.name, s.records.len(), failed);
                if let Some(err) = &s.error {
                    eprintln!("     {err}");
                }
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("dim = 2\ncap=7 # comment\n\ntol.trace=1e-8\nsuite=trace,action\nt_grid=0.5,1\n").unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.cap, 7);
        assert_eq!(cfg.tol("trace"), 1e-8);
        assert_eq!(cfg.suites, vec![Suite::Trace, Suite::Action]);
        assert_eq!(cfg.t_grid, vec![0.5, 1.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let bad = |f: &dyn Fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            f(&mut c);
            matches!(c.validate(), Err(Error::ConfigInvalid { .. }))
        };
        assert!(bad(&|c| c.dim = 4));
        assert!(bad(&|c| c.cap = 3));
        assert!(bad(&|c| c.depth = 7));
        assert!(bad(&|c| {
            c.tol.insert("flow".into(), 0.0);
        }));
        let mut c = RunConfig::default();
        assert!(c.set("bogus", "1").is_err());
        assert!(c.set("suite", "nope").is_err());
    }

    #[test]
    fn args_override_file() {
        let args = RunArgs { dim: Some(2), tol: vec!["flow=1e-9".into()], ..Default::default() };
        let cfg = RunConfig::from_args(&args).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.tol("flow"), 1e-9);
        let args = RunArgs { tol: vec!["flow=-1".into()], ..Default::default() };
        assert!(RunConfig::from_args(&args).is_err());
    }
}
