//! The `nk` command line.
//!
//! Every run prints one JSON record to stdout:
//!
//! ```text
//! {"command": ..., "params": {...}, "result": {...}, "seed": ..., "n_samples": ...,
//!  "elapsed_ms": ..., "warnings": [...]}
//! ```
//!
//! With `--sweep` (or `--format csv`) the output is CSV with the fixed header
//! [`CSV_HEADER`], one row per parameter combination.
//!
//! Parameter precedence: command-line flags, then `NK_SEED` (seed only), then
//! the `--config` file (`key = value` lines, keys spelled like the long flags),
//! then built-in defaults.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 size rejected as
//! infeasible, 4 numeric failure (including a failed algorithm self-test).

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{NkError, Result};
use crate::estimate::{compare_dists, conditional_mc, direct_mc, normal_saddle, normal_upper_bound};
use crate::fattail::enumerate::ratio_to_f64;
use crate::fattail::{
    algorithm_selftest, enumerate_exact, f_r_gap_mc, f_r_mc, mc_p_fat_with, table1_predict,
    torus_measure_exact, torus_measure_mc, Table1Options,
};
use crate::k1exact::{
    find_z0, growth_rate, mc_h_star, recursion_exact, recursion_float, riccati_residual,
    EXACT_MAX_N,
};
use crate::model::{count_lfm, DistributionKind, FullLandscape, ModelParams};

pub const CSV_HEADER: &str =
    "command,n_loci,k,dist,method,r_max,samples,seed,value,stderr,exact,elapsed_ms";

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(name = "nk", version, about = "Local maxima of NK fitness landscapes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Number of loci N.
    #[arg(long, global = true)]
    n_loci: Option<usize>,
    /// Epistasis K.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// normal, uniform01, exponential, negexponential or cauchy.
    #[arg(long, global = true)]
    dist: Option<String>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Estimator variant; meaning depends on the command.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Longest cover sequence to enumerate.
    #[arg(long, global = true)]
    r_max: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Torus dimension for `fat fr` and `fat torus-measure`.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Torus shrink parameter in [0, 1].
    #[arg(long, global = true)]
    y: Option<f64>,
    /// Last index of the K = 1 recursion.
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Parameter grid, e.g. "k=1,2;n-loci=8..12:2".
    #[arg(long, global = true)]
    sweep: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// key = value file of defaults.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Monte Carlo estimate of p(N, K) (method direct or conditional).
    Estimate,
    #[command(subcommand)]
    Normal(NormalCmd),
    #[command(subcommand)]
    Fat(FatCmd),
    #[command(subcommand)]
    K1(K1Cmd),
    #[command(subcommand)]
    Lfm(LfmCmd),
    /// p_F(N, K) for every built-in distribution next to p_fat(N, K).
    CompareDists,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum NormalCmd {
    /// Upper-bound integral for normal fitnesses.
    Bound,
    /// Location and height of the bound integrand's peak.
    Saddle,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum FatCmd {
    /// Exact p_fat(N, K) by enumeration of cover sequences.
    Exact,
    /// Monte Carlo p_fat(N, K).
    Mc,
    /// Cover algorithm against the event definition on random draws.
    AlgorithmSelftest,
    /// Torus integral f_r(y) (method gap or indicator).
    Fr,
    /// Measure of the torus set T(y).
    TorusMeasure,
    /// Leading-order prediction of p_fat(N, K) for large K.
    Table1,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum K1Cmd {
    /// p_0..p_{n-max} (method exact or float).
    Recursion,
    /// Growth rate of p_N from the float recursion.
    Growth,
    /// Radius of convergence from the Bessel denominator.
    Z0,
    /// Monte Carlo of the sliced chain with N = n-loci rows.
    Mc,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum LfmCmd {
    /// Local maxima of one random landscape.
    Count,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Normal(NormalCmd::Bound) => "normal bound",
            Command::Normal(NormalCmd::Saddle) => "normal saddle",
            Command::Fat(FatCmd::Exact) => "fat exact",
            Command::Fat(FatCmd::Mc) => "fat mc",
            Command::Fat(FatCmd::AlgorithmSelftest) => "fat algorithm-selftest",
            Command::Fat(FatCmd::Fr) => "fat fr",
            Command::Fat(FatCmd::TorusMeasure) => "fat torus-measure",
            Command::Fat(FatCmd::Table1) => "fat table1",
            Command::K1(K1Cmd::Recursion) => "k1 recursion",
            Command::K1(K1Cmd::Growth) => "k1 growth",
            Command::K1(K1Cmd::Z0) => "k1 z0",
            Command::K1(K1Cmd::Mc) => "k1 mc",
            Command::Lfm(LfmCmd::Count) => "lfm count",
            Command::CompareDists => "compare-dists",
        }
    }

    /// Settings keys the command reads, in output order.
    fn keys(&self) -> &'static [&'static str] {
        match self {
            Command::Estimate => &["n-loci", "k", "dist", "method", "samples", "seed"],
            Command::Normal(NormalCmd::Bound) => &["n-loci", "k", "tol"],
            Command::Normal(NormalCmd::Saddle) => &["n-loci", "k"],
            Command::Fat(FatCmd::Exact) => &["n-loci", "k", "r-max"],
            Command::Fat(FatCmd::Mc) => &["n-loci", "k", "dist", "samples", "seed"],
            Command::Fat(FatCmd::AlgorithmSelftest) => &["n-loci", "k", "samples", "seed"],
            Command::Fat(FatCmd::Fr) => &["r", "y", "method", "samples", "seed"],
            Command::Fat(FatCmd::TorusMeasure) => &["r", "y", "samples", "seed"],
            Command::Fat(FatCmd::Table1) => &["n-loci", "k", "samples", "seed"],
            Command::K1(K1Cmd::Recursion) => &["n-max", "method"],
            Command::K1(K1Cmd::Growth) => &["n-max"],
            Command::K1(K1Cmd::Z0) => &["tol"],
            Command::K1(K1Cmd::Mc) => &["n-loci", "samples", "seed"],
            Command::Lfm(LfmCmd::Count) => &["n-loci", "k", "dist", "seed"],
            Command::CompareDists => &["n-loci", "k", "samples", "seed"],
        }
    }
}

/// Resolved parameters after flags, environment and config are merged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub n_loci: Option<usize>,
    pub k: Option<usize>,
    pub dist: Option<DistributionKind>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub method: Option<String>,
    pub r_max: Option<usize>,
    pub tol: Option<f64>,
    pub r: Option<usize>,
    pub y: Option<f64>,
    pub n_max: Option<usize>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| NkError::invalid(format!("bad value `{v}` for `{key}`")))
}

impl Settings {
    /// Sets one parameter from its textual form; keys are the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match key.as_str() {
            "n-loci" => self.n_loci = Some(parse(&key, value)?),
            "k" => self.k = Some(parse(&key, value)?),
            "dist" => self.dist = Some(value.trim().parse()?),
            "samples" => self.samples = Some(parse(&key, value)?),
            "seed" => self.seed = Some(parse(&key, value)?),
            "method" => self.method = Some(value.trim().to_string()),
            "r-max" => self.r_max = Some(parse(&key, value)?),
            "tol" => self.tol = Some(parse(&key, value)?),
            "r" => self.r = Some(parse(&key, value)?),
            "y" => self.y = Some(parse(&key, value)?),
            "n-max" => self.n_max = Some(parse(&key, value)?),
            other => return Err(NkError::invalid(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    fn get_json(&self, key: &str) -> Value {
        match key {
            "n-loci" => json!(self.n_loci),
            "k" => json!(self.k),
            "dist" => json!(self.dist_or_default().name()),
            "samples" => json!(self.samples_or_default()),
            "seed" => json!(self.seed_or_default()),
            "method" => json!(self.method),
            "r-max" => json!(self.r_max),
            "tol" => json!(self.tol),
            "r" => json!(self.r),
            "y" => json!(self.y),
            "n-max" => json!(self.n_max),
            _ => Value::Null,
        }
    }

    fn dist_or_default(&self) -> DistributionKind {
        self.dist.unwrap_or(DistributionKind::Normal)
    }

    fn samples_or_default(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
        v.ok_or_else(|| NkError::invalid(format!("--{flag} is required")))
    }

    fn n_loci(&self) -> Result<usize> {
        Self::need(self.n_loci, "n-loci")
    }

    fn k(&self) -> Result<usize> {
        Self::need(self.k, "k")
    }
}

/// Parses a `key = value` config file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| NkError::invalid(format!("config line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn expand_range(key: &str, grid: &str) -> Result<Vec<String>> {
    let (range, step) = match grid.split_once(':') {
        Some((r, s)) => (r, Some(s)),
        None => (grid, None),
    };
    let (a, b) = range.split_once("..").expect("caller checked for ..");
    if let (Ok(a), Ok(b)) = (a.trim().parse::<i64>(), b.trim().parse::<i64>()) {
        let step: i64 = match step {
            Some(s) => parse(key, s)?,
            None => 1,
        };
        if step <= 0 || b < a {
            return Err(NkError::invalid(format!("empty range `{grid}` for `{key}`")));
        }
        return Ok((a..=b).step_by(step as usize).map(|v| v.to_string()).collect());
    }
    let (a, b): (f64, f64) = (parse(key, a)?, parse(key, b)?);
    let step: f64 = match step {
        Some(s) => parse(key, s)?,
        None => return Err(NkError::invalid(format!("fractional range `{grid}` needs a step"))),
    };
    if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || b < a {
        return Err(NkError::invalid(format!("empty range `{grid}` for `{key}`")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| format!("{}", a + i as f64 * step)).map(|s| trim_float(&s)).collect())
}

fn trim_float(s: &str) -> String {
    // 0.30000000000000004 -> 0.3
    match s.parse::<f64>() {
        Ok(v) => {
            let short = format!("{:.12}", v);
            let short = short.trim_end_matches('0').trim_end_matches('.');
            short.to_string()
        }
        Err(_) => s.to_string(),
    }
}

/// Expands `"key=v1,v2;key2=a..b[:step]"` into the Cartesian product of
/// assignments, earlier keys varying slowest.
pub fn parse_sweep(grid: &str) -> Result<Vec<Vec<(String, String)>>> {
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for part in grid.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| NkError::invalid(format!("sweep term `{part}` needs key=values")))?;
        let key = key.trim().to_string();
        let mut vals = Vec::new();
        for v in values.split(',').map(str::trim).filter(|v| !v.is_empty()) {
            if v.contains("..") {
                vals.extend(expand_range(&key, v)?);
            } else {
                vals.push(v.to_string());
            }
        }
        if vals.is_empty() {
            return Err(NkError::invalid(format!("sweep key `{key}` has no values")));
        }
        axes.push((key, vals));
    }
    if axes.is_empty() {
        return Err(NkError::invalid("empty sweep specification"));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, vals) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vals.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    Ok(combos)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub result: Value,
    pub seed: u64,
    pub n_samples: u64,
    pub elapsed_ms: u64,
    pub warnings: Vec<String>,
}

/// What a command produced, before it is wrapped into a record.
struct Outcome {
    result: Value,
    value: f64,
    stderr: Option<f64>,
    exact: Option<String>,
    n_samples: u64,
    warnings: Vec<String>,
    failed_check: bool,
}

impl Outcome {
    fn new(result: impl Serialize, value: f64) -> Self {
        Outcome {
            result: serde_json::to_value(result).expect("results serialize"),
            value,
            stderr: None,
            exact: None,
            n_samples: 0,
            warnings: Vec::new(),
            failed_check: false,
        }
    }

    fn estimate(e: &crate::mc::Estimate) -> Self {
        let mut o = Outcome::new(e, e.p_hat);
        o.stderr = Some(e.stderr);
        o.n_samples = e.n_samples;
        o
    }
}

fn rational_json(r: &BigRational) -> Value {
    json!({ "exact": r.to_string(), "decimal": ratio_to_f64(r) })
}

fn exchangeable_warning(n: usize, k: usize, warnings: &mut Vec<String>) {
    if k + 1 == n {
        warnings.push(format!(
            "k = n - 1: every window is the whole genome; the answer is 1/(n+1) = {}",
            1.0 / (n as f64 + 1.0)
        ));
    }
}

fn method_or<'a>(s: &'a Settings, default: &'a str, allowed: &[&str]) -> Result<&'a str> {
    let m = s.method.as_deref().unwrap_or(default);
    if allowed.contains(&m) {
        Ok(m)
    } else {
        Err(NkError::invalid(format!(
            "unknown method `{m}`; expected one of {}",
            allowed.join(", ")
        )))
    }
}

/// Fills command-specific defaults so records show the values actually used.
fn apply_defaults(cmd: Command, s: &mut Settings) {
    let (tol, method, n_max) = match cmd {
        Command::Estimate => (None, Some("direct"), None),
        Command::Normal(NormalCmd::Bound) | Command::K1(K1Cmd::Z0) => (Some(1e-10), None, None),
        Command::Fat(FatCmd::Fr) => (None, Some("gap"), None),
        Command::K1(K1Cmd::Recursion) => (None, Some("exact"), Some(20)),
        Command::K1(K1Cmd::Growth) => (None, None, Some(2000)),
        _ => (None, None, None),
    };
    s.tol = s.tol.or(tol);
    s.method = s.method.take().or(method.map(String::from));
    s.n_max = s.n_max.or(n_max);
}

fn execute(cmd: Command, s: &Settings) -> Result<Outcome> {
    let seed = s.seed_or_default();
    let samples = s.samples_or_default();
    let out = match cmd {
        Command::Estimate => {
            let p = ModelParams::new(s.n_loci()?, s.k()?, s.dist_or_default())?;
            let e = match method_or(s, "direct", &["direct", "conditional"])? {
                "direct" => direct_mc(&p, samples, seed)?,
                _ => conditional_mc(&p, samples, seed)?,
            };
            let mut o = Outcome::estimate(&e);
            exchangeable_warning(p.n, p.k, &mut o.warnings);
            o
        }
        Command::Normal(NormalCmd::Bound) => {
            let (n, k) = (s.n_loci()?, s.k()?);
            let v = normal_upper_bound(n, k, s.tol.unwrap_or(1e-10))?;
            Outcome::new(json!({ "bound": v }), v)
        }
        Command::Normal(NormalCmd::Saddle) => {
            let r = normal_saddle(s.n_loci()?, s.k()?)?;
            Outcome::new(r, r.log_i_max)
        }
        Command::Fat(FatCmd::Exact) => {
            let (n, k) = (s.n_loci()?, s.k()?);
            let e = enumerate_exact(n, k, s.r_max)?;
            let by_r: Vec<Value> = e
                .by_r
                .iter()
                .map(|(r, v)| json!({ "r": r, "probability": rational_json(v) }))
                .collect();
            let result = json!({
                "mode": e.mode,
                "total": rational_json(&e.total),
                "by_r": by_r,
                "remainder_bound": e.remainder_bound,
            });
            let mut o = Outcome::new(result, e.total_f64());
            o.exact = Some(e.total.to_string());
            exchangeable_warning(n, k, &mut o.warnings);
            o
        }
        Command::Fat(FatCmd::Mc) => {
            let (n, k) = (s.n_loci()?, s.k()?);
            let e = mc_p_fat_with(n, k, samples, seed, s.dist_or_default())?;
            let mut o = Outcome::estimate(&e);
            exchangeable_warning(n, k, &mut o.warnings);
            o
        }
        Command::Fat(FatCmd::AlgorithmSelftest) => {
            let r = algorithm_selftest(s.n_loci()?, s.k()?, samples, seed)?;
            let mut o = Outcome::new(json!({ "passed": r.passed(), "report": r }), r.mismatches as f64);
            o.n_samples = samples;
            if !r.passed() {
                o.warnings.push(format!(
                    "{} verdict mismatches, {} non-minimal witnesses",
                    r.mismatches, r.bad_witnesses
                ));
                o.failed_check = true;
            }
            o
        }
        Command::Fat(FatCmd::Fr) => {
            let r = Settings::need(s.r, "r")?;
            let y = Settings::need(s.y, "y")?;
            let e = match method_or(s, "gap", &["gap", "indicator"])? {
                "gap" => f_r_gap_mc(r, y, samples, seed)?,
                _ => f_r_mc(r, y, samples, seed)?,
            };
            Outcome::estimate(&e)
        }
        Command::Fat(FatCmd::TorusMeasure) => {
            let r = Settings::need(s.r, "r")?;
            let y = Settings::need(s.y, "y")?;
            let e = torus_measure_mc(r, y, samples, seed)?;
            let exact = torus_measure_exact(r, y)?;
            let mut o = Outcome::new(json!({ "estimate": e, "exact": exact }), e.p_hat);
            o.stderr = Some(e.stderr);
            o.n_samples = e.n_samples;
            o.exact = Some(format!("{exact}"));
            o
        }
        Command::Fat(FatCmd::Table1) => {
            let opts = Table1Options {
                samples,
                seed,
                ..Default::default()
            };
            let p = table1_predict(s.n_loci()?, s.k()?, &opts)?;
            let mut o = Outcome::new(&p, p.value);
            o.n_samples = if matches!(p.row, crate::fattail::table1::Table1Row::Torus { .. }) {
                2 * samples
            } else {
                0
            };
            o.warnings = p.warnings.clone();
            o
        }
        Command::K1(K1Cmd::Recursion) => {
            let n_max = s.n_max.unwrap_or(20);
            match method_or(s, "exact", &["exact", "float"])? {
                "exact" => {
                    let seq = recursion_exact(n_max)?;
                    let ric = riccati_residual(&seq);
                    let values: Vec<Value> = seq.values.iter().map(rational_json).collect();
                    let last = seq.values.last().expect("p_0 always present");
                    let mut o = Outcome::new(
                        json!({
                            "p": values,
                            "riccati_max_residual": ric.max_abs_residual.to_string(),
                            "riccati_orders_checked": ric.orders_checked,
                        }),
                        ratio_to_f64(last),
                    );
                    o.exact = Some(last.to_string());
                    o
                }
                _ => {
                    let seq = recursion_float(n_max)?;
                    let last = seq.log_p(seq.n_max());
                    Outcome::new(json!({ "log_p": seq.log_values }), last)
                }
            }
        }
        Command::K1(K1Cmd::Growth) => {
            let r = growth_rate(&recursion_float(s.n_max.unwrap_or(2000))?)?;
            Outcome::new(r, r.rate)
        }
        Command::K1(K1Cmd::Z0) => {
            let r = find_z0(s.tol.unwrap_or(1e-10))?;
            Outcome::new(r, r.z0)
        }
        Command::K1(K1Cmd::Mc) => {
            let n = s.n_loci()?;
            let e = mc_h_star(n, samples, seed)?;
            let mut o = Outcome::estimate(&e);
            if n <= EXACT_MAX_N {
                let exact = recursion_exact(n)?.values.pop().expect("p_n present");
                o.result = json!({ "estimate": e, "exact": rational_json(&exact) });
                o.exact = Some(exact.to_string());
            }
            o
        }
        Command::Lfm(LfmCmd::Count) => {
            let p = ModelParams::new(s.n_loci()?, s.k()?, s.dist_or_default())?;
            let land = FullLandscape::sample(&p, seed)?;
            let c = count_lfm(&land);
            let mut o = Outcome::new(
                json!({ "count": c, "genomes": 1u64 << p.n, "fraction": c as f64 / (1u64 << p.n) as f64 }),
                c as f64,
            );
            exchangeable_warning(p.n, p.k, &mut o.warnings);
            o
        }
        Command::CompareDists => {
            let c = compare_dists(s.n_loci()?, s.k()?, samples, seed)?;
            let lowest = c.rows.iter().map(|r| r.estimate.p_hat).fold(f64::INFINITY, f64::min);
            let mut o = Outcome::new(&c, lowest);
            o.n_samples = 6 * samples;
            for r in c.rows.iter().filter(|r| !r.at_least_fat) {
                o.warnings.push(format!("{} falls more than 4σ below the fat-tail value", r.dist));
            }
            o
        }
    };
    Ok(out)
}

fn csv_field(v: Option<String>) -> String {
    let v = v.unwrap_or_default();
    if v.contains(',') || v.contains('"') {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v
    }
}

fn csv_row(cmd: Command, s: &Settings, o: &Outcome, elapsed_ms: u64) -> String {
    let uses = |k: &str| cmd.keys().contains(&k);
    let opt = |present: bool, v: String| present.then_some(v);
    [
        Some(cmd.name().to_string()),
        s.n_loci.map(|v| v.to_string()),
        s.k.map(|v| v.to_string()),
        opt(uses("dist"), s.dist_or_default().name().to_string()),
        s.method.clone(),
        s.r_max.map(|v| v.to_string()),
        opt(uses("samples"), s.samples_or_default().to_string()),
        opt(uses("seed"), s.seed_or_default().to_string()),
        Some(format!("{}", o.value)),
        o.stderr.map(|v| format!("{v}")),
        o.exact.clone(),
        Some(elapsed_ms.to_string()),
    ]
    .into_iter()
    .map(csv_field)
    .collect::<Vec<_>>()
    .join(",")
}

fn record(cmd: Command, s: &Settings, o: Outcome, elapsed_ms: u64) -> RunRecord {
    let params = cmd
        .keys()
        .iter()
        .map(|k| (k.to_string(), s.get_json(k)))
        .collect();
    RunRecord {
        command: cmd.name().to_string(),
        params,
        result: o.result,
        seed: s.seed_or_default(),
        n_samples: o.n_samples,
        elapsed_ms,
        warnings: o.warnings,
    }
}

/// Merges config file, `NK_SEED` and flags, in increasing priority.
fn resolve(common: &Common, env_seed: Option<String>) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NkError::invalid(format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in parse_config(&text)? {
            s.set(&k, &v)?;
        }
    }
    if let Some(v) = env_seed {
        s.seed = Some(parse("NK_SEED", &v)?);
    }
    macro_rules! flag {
        ($field:ident) => {
            if let Some(v) = common.$field.clone() {
                s.$field = Some(v);
            }
        };
    }
    flag!(n_loci);
    flag!(k);
    flag!(samples);
    flag!(seed);
    flag!(method);
    flag!(r_max);
    flag!(tol);
    flag!(r);
    flag!(y);
    flag!(n_max);
    if let Some(d) = &common.dist {
        s.dist = Some(d.parse()?);
    }
    Ok(s)
}

fn run_parsed(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    let base = resolve(&cli.common, std::env::var("NK_SEED").ok())?;
    let cmd = cli.command;
    let combos = match &cli.common.sweep {
        Some(grid) => parse_sweep(grid)?,
        None => vec![Vec::new()],
    };
    let format = cli.common.format.unwrap_or(if cli.common.sweep.is_some() {
        Format::Csv
    } else {
        Format::Json
    });
    let write_err = |e: std::io::Error| NkError::numeric(format!("cannot write output: {e}"));
    if format == Format::Csv {
        writeln!(out, "{CSV_HEADER}").map_err(write_err)?;
    }
    let mut all_passed = true;
    for combo in combos {
        let mut s = base.clone();
        for (k, v) in &combo {
            s.set(k, v)?;
        }
        apply_defaults(cmd, &mut s);
        let start = Instant::now();
        let o = execute(cmd, &s)?;
        let elapsed_ms = start.elapsed().as_millis() as u64;
        all_passed &= !o.failed_check;
        match format {
            Format::Csv => writeln!(out, "{}", csv_row(cmd, &s, &o, elapsed_ms)),
            Format::Json => {
                let rec = record(cmd, &s, o, elapsed_ms);
                writeln!(out, "{}", serde_json::to_string(&rec).expect("records serialize"))
            }
        }
        .map_err(write_err)?;
    }
    Ok(all_passed)
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let jobs = cli.common.jobs;
    let go = move || {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run_parsed(cli, &mut lock)
    };
    let res = match jobs {
        Some(0) => Err(NkError::invalid("--jobs must be at least 1")),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(go),
            Err(e) => Err(NkError::numeric(format!("cannot start worker pool: {e}"))),
        },
        None => go(),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 4,
        Err(e) => {
            eprintln!("nk: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_expansion() {
        let c = parse_sweep("k=1,2;n-loci=8..12:2").unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![("k".into(), "1".into()), ("n-loci".into(), "8".into())]);
        assert_eq!(c[5], vec![("k".into(), "2".into()), ("n-loci".into(), "12".into())]);
        let c = parse_sweep("y=0.1..0.5:0.1").unwrap();
        let ys: Vec<&str> = c.iter().map(|v| v[0].1.as_str()).collect();
        assert_eq!(ys, ["0.1", "0.2", "0.3", "0.4", "0.5"]);
        assert!(parse_sweep("k").is_err());
        assert!(parse_sweep("k=5..1").is_err());
        assert!(parse_sweep("y=0.1..0.5").is_err());
    }

    #[test]
    fn config_and_precedence() {
        let cfg = parse_config("# defaults\nn-loci = 8\nk=2\nseed = 5 # comment\n").unwrap();
        assert_eq!(cfg.len(), 3);
        assert!(parse_config("garbage").is_err());
        let dir = std::env::temp_dir().join(format!("nk-cli-test-{}", std::process::id()));
        std::fs::write(&dir, "n-loci = 8\nk = 2\nseed = 5\n").unwrap();
        let common = Common {
            config: Some(dir.clone()),
            k: Some(3),
            ..Default::default()
        };
        let s = resolve(&common, None).unwrap();
        assert_eq!((s.n_loci, s.k, s.seed), (Some(8), Some(3), Some(5)));
        let s = resolve(&common, Some("9".into())).unwrap();
        assert_eq!(s.seed, Some(9));
        let common = Common {
            seed: Some(11),
            ..common
        };
        assert_eq!(resolve(&common, Some("9".into())).unwrap().seed, Some(11));
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn settings_reject_unknown_keys() {
        let mut s = Settings::default();
        assert!(s.set("bogus", "1").is_err());
        assert!(s.set("k", "x").is_err());
        s.set("--n_loci", "7").unwrap();
        assert_eq!(s.n_loci, Some(7));
    }

    #[test]
    fn csv_header_is_stable() {
        assert_eq!(CSV_HEADER.split(',').count(), 12);
        let mut s = Settings::default();
        s.set("n-loci", "4").unwrap();
        s.set("k", "1").unwrap();
        s.set("r-max", "2").unwrap();
        let cmd = Command::Fat(FatCmd::Exact);
        apply_defaults(cmd, &mut s);
        let o = execute(cmd, &s).unwrap();
        let row = csv_row(cmd, &s, &o, 0);
        assert_eq!(row.split(',').count(), 12);
        assert!(row.contains("1/21"));
    }
}
