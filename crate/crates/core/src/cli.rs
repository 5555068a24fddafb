//! `biham` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 configuration error,
//! 3 blow-up or ladder break.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flow::{evolve_with, DriftSeries, EvolveOptions, FlowState, DEFAULT_RECORD_INTERVAL};
use crate::fourier::{random_band_limited, GridFunction, DEFAULT_N};
use crate::hierarchy::{burgers_closed_form, ch_explicit, generate, HierarchyResult};
use crate::io::{read_grid, to_json_string};
use crate::lie_ops::{CocycleOperator, InertiaOperator};
use crate::verify::{self, Suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const CONFIG_ENV: &str = "BIHAM_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "biham", version, about = "Euler equations on the circle: hierarchies, flows and structure checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the Euler equation and track hierarchy drifts (CSV + JSON summary).
    Simulate(Flags),
    /// Build the Lenard ladder at a base point (JSON).
    Hierarchy(Flags),
    /// Run invariant suites (JSON report).
    Verify(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// Inertia operator A = aI + bD².
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Even coefficients a0,a2,a4,... of A (overrides --a/--b).
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    /// Cocycle Q = αD + βD³ (α = 2·m0).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m0: Option<f64>,
    /// Grid size (power of two, at least 16).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Initial velocity u₀: zero | cosine:AMP | random:SEED | file:PATH.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// poisson | lenard | involution | classification | cohomology | all
    #[arg(long)]
    suite: Option<String>,
    /// Steps between recorded snapshots.
    #[arg(long)]
    record_interval: Option<usize>,
    /// Apply the exponential spectral filter after each step.
    #[arg(long)]
    filter: bool,
}

const CONFIG_KEYS: [&str; 17] = [
    "a", "b", "coeffs", "alpha", "beta", "m0", "n", "dt", "steps", "depth", "seed", "tol", "init", "out",
    "suite", "record_interval", "filter",
];

/// `key = value` lines; `#` starts a comment.
fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

struct Layered {
    config: BTreeMap<String, String>,
}

impl Layered {
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }
}

struct Settings {
    inertia: InertiaOperator,
    cocycle: Option<CocycleOperator>,
    n: usize,
    dt: f64,
    steps: usize,
    depth: Option<usize>,
    seed: u64,
    tol: Option<f64>,
    init: Option<String>,
    out: Option<PathBuf>,
    suite: Option<String>,
    record_interval: usize,
    filter: bool,
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad coefficient {s:?}: {e}"))))
        .collect()
}

fn resolve(flags: Flags) -> Result<Settings> {
    let config = match std::env::var_os(CONFIG_ENV) {
        Some(path) => parse_config(&std::fs::read_to_string(&path).map_err(|e| {
            Error::Parse(format!("cannot read config {}: {e}", Path::new(&path).display()))
        })?)?,
        None => BTreeMap::new(),
    };
    let l = Layered { config };
    let n = l.pick(flags.n, "n")?.unwrap_or(DEFAULT_N);
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(n));
    }
    let coeffs = l.pick(flags.coeffs, "coeffs")?;
    let a = l.pick(flags.a, "a")?;
    let b = l.pick(flags.b, "b")?;
    let inertia = match coeffs {
        Some(list) => {
            if a.is_some() || b.is_some() {
                return Err(Error::InvalidArgument("give either --coeffs or --a/--b, not both".into()));
            }
            InertiaOperator::new(parse_list(&list)?)?
        }
        None => InertiaOperator::new(vec![a.unwrap_or(1.0), b.unwrap_or(-1.0)])?,
    };
    inertia.check_invertible(n)?;

    let alpha = l.pick(flags.alpha, "alpha")?;
    let m0 = l.pick(flags.m0, "m0")?;
    let beta = l.pick(flags.beta, "beta")?;
    let alpha = match (alpha, m0) {
        (Some(al), Some(m)) if (al - 2.0 * m).abs() > 1e-15 * al.abs().max(1.0) => {
            return Err(Error::InvalidArgument(format!("--alpha {al} conflicts with --m0 {m} (alpha = 2·m0)")))
        }
        (Some(al), _) => Some(al),
        (None, Some(m)) => Some(2.0 * m),
        (None, None) => None,
    };
    let cocycle = match (alpha, beta) {
        (None, None) => None,
        (al, be) => Some(CocycleOperator::alpha_beta(al.unwrap_or(0.0), be.unwrap_or(0.0))),
    };

    let dt = l.pick(flags.dt, "dt")?.unwrap_or(1e-3);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let record_interval = l
        .pick(flags.record_interval, "record_interval")?
        .unwrap_or(DEFAULT_RECORD_INTERVAL);
    if record_interval == 0 {
        return Err(Error::InvalidArgument("record_interval must be positive".into()));
    }
    let filter = flags.filter || l.pick(None::<bool>, "filter")?.unwrap_or(false);
    let tol = l.pick(flags.tol, "tol")?;
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be non-negative, got {t}")));
        }
    }
    Ok(Settings {
        inertia,
        cocycle,
        n,
        dt,
        steps: l.pick(flags.steps, "steps")?.unwrap_or(1000),
        depth: l.pick(flags.depth, "depth")?,
        seed: l.pick(flags.seed, "seed")?.unwrap_or(42),
        tol,
        init: l.pick(flags.init, "init")?,
        out: l.pick(flags.out, "out")?,
        suite: l.pick(flags.suite, "suite")?,
        record_interval,
        filter,
    })
}

/// Initial velocity from an `--init` spec.
fn initial_velocity(spec: &str, n: usize) -> Result<GridFunction> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = |what: &str| Error::Parse(format!("bad --init {spec:?}: {what}"));
    let u = match kind {
        "zero" => GridFunction::zeros(n),
        "cosine" => {
            let amp: f64 = if arg.is_empty() { 1.0 } else { arg.parse().map_err(|_| bad("amplitude"))? };
            GridFunction::from_fn(n, |x| amp * x.cos())
        }
        "random" => {
            let seed: u64 = arg.parse().map_err(|_| bad("seed"))?;
            random_band_limited(n, seed)
        }
        "file" => read_grid(Path::new(arg))?,
        _ => return Err(bad("expected zero, cosine:AMP, random:SEED or file:PATH")),
    };
    if u.n() != n {
        return Err(Error::GridMismatch { left: n, right: u.n() });
    }
    Ok(u)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp { .. } | Error::LadderBreak { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary {
    status: &'static str,
    inertia: Vec<f64>,
    n: usize,
    dt: f64,
    steps: usize,
    depth: usize,
    t_final: f64,
    initial_h: Vec<f64>,
    final_h: Vec<f64>,
    max_drifts: Vec<f64>,
    runtime_seconds: f64,
}

fn summarize(status: &'static str, s: &Settings, depth: usize, series: &DriftSeries, start: Instant) -> SimulateSummary {
    SimulateSummary {
        status,
        inertia: s.inertia.even_coeffs().to_vec(),
        n: s.n,
        dt: s.dt,
        steps: s.steps,
        depth,
        t_final: series.times.last().copied().unwrap_or(0.0),
        initial_h: series.h_values.iter().filter_map(|h| h.first().copied()).collect(),
        final_h: series.h_values.iter().filter_map(|h| h.last().copied()).collect(),
        max_drifts: series.max_drifts(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}

fn simulate(s: Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let depth = s.depth.unwrap_or(3);
    let u0 = initial_velocity(s.init.as_deref().unwrap_or("cosine:0.2"), s.n)?;
    let state = FlowState::new(s.inertia.apply(&u0), s.inertia.clone());
    let opts = EvolveOptions {
        dt: s.dt,
        steps: s.steps,
        depth,
        record_interval: s.record_interval,
        filter: s.filter,
    };
    let start = Instant::now();
    let (status, series, code) = match evolve_with(&state, &opts) {
        Ok((_, series)) => ("ok", series, EXIT_OK),
        Err(Error::BlowUp { t, partial }) => {
            writeln!(stderr, "error: solution blew up at t = {t}")?;
            ("blow_up", *partial, EXIT_NUMERICAL)
        }
        Err(e) => return Err(e),
    };
    let summary = to_json_string(&summarize(status, &s, depth, &series, start))?;
    match &s.out {
        Some(path) => {
            std::fs::write(path, series.to_csv())?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => {
            stdout.write_all(series.to_csv().as_bytes())?;
            stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(code)
}

fn level_json(r: &HierarchyResult) -> Vec<Value> {
    r.levels
        .iter()
        .map(|l| {
            json!({
                "k": l.k,
                "h_value": l.h_value,
                "x_mean": l.x.mean(),
                "lenard_residual": r.diagnostics.lenard_residuals.get(l.k - 1),
                "g": l.g.samples(),
            })
        })
        .collect()
}

fn hierarchy(s: Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let depth = s.depth.unwrap_or(5);
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let init = s.init.clone().unwrap_or_else(|| format!("random:{}", s.seed));
    let m = s.inertia.apply(&initial_velocity(&init, s.n)?);
    let tol = s.tol.unwrap_or(1e-9);
    let result = match generate(&s.inertia, &m, depth) {
        Ok(r) => r,
        Err(Error::LadderBreak { level, mean, partial }) => {
            writeln!(stderr, "error: ladder broke at level {level} (mean {mean:e})")?;
            let body = json!({
                "status": "ladder_break",
                "break_level": level,
                "break_mean": mean,
                "inertia": s.inertia.even_coeffs(),
                "n": s.n,
                "depth": depth,
                "levels": level_json(&partial),
            });
            emit(&s.out, &to_json_string(&body)?, stdout)?;
            return Ok(EXIT_NUMERICAL);
        }
        Err(e) => return Err(e),
    };
    let oracle: Option<(&str, Vec<f64>)> = if s.inertia == InertiaOperator::identity() {
        Some(("burgers", (0..depth).map(|k| burgers_closed_form(k, &m)).collect()))
    } else if s.inertia == InertiaOperator::camassa_holm() {
        Some(("camassa_holm", (1..=depth.min(3)).map(|k| ch_explicit(k, &m)).collect::<Result<_>>()?))
    } else {
        None
    };
    let (oracle_kind, oracle_values, max_err, matched) = match &oracle {
        Some((kind, vals)) => {
            let err = vals
                .iter()
                .zip(&result.levels)
                .map(|(o, l)| (l.h_value - o).abs() / o.abs().max(1.0))
                .fold(0.0, f64::max);
            (Some(*kind), Some(vals.clone()), Some(err), Some(err <= tol))
        }
        None => (None, None, None, None),
    };
    let body = json!({
        "status": "ok",
        "inertia": s.inertia.even_coeffs(),
        "n": s.n,
        "depth": depth,
        "init": init,
        "h_values": result.h_values(),
        "levels": level_json(&result),
        "oracle": oracle_kind,
        "oracle_values": oracle_values,
        "oracle_max_rel_err": max_err,
        "oracle_tol": tol,
        "oracle_match": matched,
    });
    emit(&s.out, &to_json_string(&body)?, stdout)?;
    Ok(if matched == Some(false) { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

fn run_verify(s: Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let suite: Suite = s.suite.as_deref().unwrap_or("all").parse()?;
    let cfg = VerifyConfig {
        seed: s.seed,
        n: s.n,
        depth: s.depth.unwrap_or(4),
        tol: s.tol,
        cocycle: s.cocycle.clone(),
        ..VerifyConfig::default()
    };
    let report = verify::run(suite, &cfg)?;
    emit(&s.out, &to_json_string(&report)?, stdout)?;
    if report.passed {
        Ok(EXIT_OK)
    } else {
        for f in &report.failures {
            writeln!(stderr, "FAILED {f}")?;
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(f) => resolve(f).and_then(|s| simulate(s, stdout, stderr)),
        Command::Hierarchy(f) => resolve(f).and_then(|s| hierarchy(s, stdout, stderr)),
        Command::Verify(f) => resolve(f).and_then(|s| run_verify(s, stdout, stderr)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = parse_config("# comment\n a = 2\nrecord-interval=5 # trailing\n\n").unwrap();
        assert_eq!(c["a"], "2");
        assert_eq!(c["record_interval"], "5");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("a 1").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let l = Layered {
            config: [("n".to_string(), "64".to_string())].into_iter().collect(),
        };
        assert_eq!(l.pick(Some(32usize), "n").unwrap(), Some(32));
        assert_eq!(l.pick(None::<usize>, "n").unwrap(), Some(64));
        assert_eq!(l.pick(None::<usize>, "steps").unwrap(), None);
    }

    #[test]
    fn init_specs() {
        assert_eq!(initial_velocity("zero", 16).unwrap().max_abs(), 0.0);
        assert!((initial_velocity("cosine:0.5", 16).unwrap().max_abs() - 0.5).abs() < 1e-15);
        assert_eq!(initial_velocity("random:3", 16).unwrap(), random_band_limited(16, 3));
        assert!(initial_velocity("bogus", 16).is_err());
        assert!(initial_velocity("cosine:x", 16).is_err());
    }

    #[test]
    fn exit_codes() {
        let mut o = Vec::new();
        let mut e = Vec::new();
        assert_eq!(run(["biham", "verify", "--suite", "nope", "--n", "16"], &mut o, &mut e), EXIT_CONFIG);
        assert_eq!(run(["biham", "frobnicate"], &mut o, &mut e), EXIT_CONFIG);
        e.clear();
        assert_eq!(run(["biham", "simulate", "--a", "1", "--b", "1"], &mut o, &mut e), EXIT_CONFIG);
        assert!(String::from_utf8_lossy(&e).contains("n = 1"));
        assert_eq!(run(["biham", "hierarchy", "--depth", "0"], &mut o, &mut e), EXIT_CONFIG);
        assert_eq!(run(["biham", "simulate", "--n", "100"], &mut o, &mut e), EXIT_CONFIG);
    }
}
