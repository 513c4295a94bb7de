//! Command-line front end.
//!
//! Exit codes: 0 success (including indeterminate verdicts), 1 verification
//! failure, 2 invalid input, 3 artifact requested for infeasible parameters.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{
    classify_bounds, stopping_time_series, tail_sequence_for, SupportBounds, TailCondition, TailSeq, Verdict,
    DEFAULT_SERIES_TERMS,
};
use crate::invtower::{monotonicity_audit, Feasibility, InvTowerCdf, InvTowerParams, Violation};
use crate::sim::{
    backward_samples, estimate_stopping_time, forward_finals, oscillation_gap, path_rng, run_paths, tower_forward,
    DistributionSpec, OscillationReport, StoppingEstimate, TowerSample,
};
use crate::stats::{ks_one_sample, KsResult, Summary};
use crate::verify::{run_suite, CriterionReport, Suite, DEFAULT_SEED};
use crate::xfun::{g_boundary, log_star, E_NEG_E};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "powertower", version, about = "Random infinite power towers")]
pub struct Cli {
    /// Seed for all Monte Carlo work.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; changes wall time only.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Classify convergence from support bounds and, when needed, the tail near 1.
    Classify(ClassifyArgs),
    /// Tabulate the boundary function G.
    GTable(GTableArgs),
    /// Monte Carlo towers for a base distribution.
    Simulate(SimulateArgs),
    /// Inverse tower distribution of U^r, U ~ Unif[alpha, beta].
    InvTower(InvTowerArgs),
    /// Run an acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// JSON stopping sequence q(n) = P(A <= e^{1/(e⋆n)}).
    #[arg(long)]
    pub tail_file: Option<PathBuf>,
    /// JSON distribution spec; supplies bounds and tail when not given.
    #[arg(long)]
    pub dist: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GTableArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Add the bisection oracle column and a max-deviation footer.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Report {
    Dist,
    Osc,
    Stopping,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, value_enum, default_value_t = Mode::Backward)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Report::Dist)]
    pub report: Report,
    /// Per-path CSV of samples (or full trajectories with --trajectories).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// In forward mode, write every height of every path to the CSV.
    #[arg(long)]
    pub trajectories: bool,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("artifact").args(["eval", "table", "sample", "audit"]))]
pub struct InvTowerArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Evaluate F at this point.
    #[arg(long, allow_negative_numbers = true)]
    pub eval: Option<f64>,
    /// CSV of F over its support.
    #[arg(long)]
    pub table: bool,
    /// Draw this many samples from F.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Scan F for monotonicity and range violations; allowed for infeasible parameters.
    #[arg(long)]
    pub audit: bool,
    /// Grid size for --table and --audit.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn bad(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_BAD_INPUT, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => EXIT_INFEASIBLE,
            _ => EXIT_BAD_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Meta<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: &'a Cli,
}

impl<'a> Meta<'a> {
    fn of(cli: &'a Cli) -> Self {
        Meta { tool: "powertower", version: env!("CARGO_PKG_VERSION"), seed: cli.seed, config: cli }
    }

    /// Metadata as `#`-prefixed CSV preamble lines.
    fn csv_preamble(&self) -> String {
        format!(
            "# tool={} version={} seed={}\n# config={}\n",
            self.tool,
            self.version,
            self.seed,
            serde_json::to_string(self.config).expect("config serializes")
        )
    }
}

/// Parses `args` and runs the command, writing the main output to `out`
/// (or `--output`) and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let written = match &cli.output {
                Some(p) => fs::write(p, &text).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_BAD_INPUT;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli) -> CliResult<(String, i32)> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::bad("--threads must be positive"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::bad(e.to_string()))?;
        return pool.install(|| dispatch(cli));
    }
    dispatch(cli)
}

fn dispatch(cli: &Cli) -> CliResult<(String, i32)> {
    let meta = Meta::of(cli);
    match &cli.command {
        Command::Classify(a) => cmd_classify(&meta, a).map(|s| (s, EXIT_OK)),
        Command::GTable(a) => cmd_g_table(&meta, a).map(|s| (s, EXIT_OK)),
        Command::Simulate(a) => cmd_simulate(&meta, a).map(|s| (s, EXIT_OK)),
        Command::InvTower(a) => cmd_inv_tower(&meta, a).map(|s| (s, EXIT_OK)),
        Command::Verify(a) => cmd_verify(&meta, a),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn read_file(path: &PathBuf) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::bad(format!("cannot read {}: {e}", path.display())))
}

fn load_dist(path: &PathBuf) -> CliResult<DistributionSpec> {
    Ok(DistributionSpec::from_json(&read_file(path)?)?)
}

#[derive(Debug, Serialize)]
pub struct SeriesEvidence {
    pub terms: usize,
    pub value: f64,
    pub leading_partial_sums: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClassifyOutput<'a> {
    pub meta: Meta<'a>,
    pub a: f64,
    pub b: f64,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub g_b: Option<f64>,
    pub series: Option<SeriesEvidence>,
}

fn cmd_classify(meta: &Meta, args: &ClassifyArgs) -> CliResult<String> {
    let dist = args.dist.as_ref().map(load_dist).transpose()?;
    let support = dist.as_ref().map(|d| d.support());
    let a = args.a.or(support.map(|s| s.a)).ok_or_else(|| CliError::bad("need --a or --dist"))?;
    let b = args.b.or(support.map(|s| s.b)).ok_or_else(|| CliError::bad("need --b or --dist"))?;
    let sb = SupportBounds::new(a, b)?;

    let tail = match (&args.tail_file, &dist) {
        (Some(p), _) => {
            let q: TailSeq = serde_json::from_str(&read_file(p)?).map_err(|e| CliError::bad(e.to_string()))?;
            q.validate(256)?;
            Some(q)
        }
        (None, Some(d)) if a == 1.0 => match tail_sequence_for(d, 64) {
            Ok(q) => Some(q),
            Err(Error::UnsupportedDistribution(_)) => None,
            Err(e) => return Err(e.into()),
        },
        _ => None,
    };
    let cond = tail.clone().map_or(TailCondition::Unknown, TailCondition::TailSequence);
    let verdict = classify_bounds(sb, &cond)?;

    let g_b = if b > 0.0 && b < E_NEG_E { Some(g_boundary(b)?) } else { None };
    let series = match &tail {
        Some(q) if a == 1.0 => {
            let s = stopping_time_series(q, DEFAULT_SERIES_TERMS);
            Some(SeriesEvidence {
                terms: s.partial_sums.len(),
                value: s.value(),
                leading_partial_sums: s.partial_sums.iter().take(10).copied().collect(),
            })
        }
        _ => None,
    };
    Ok(to_json(&ClassifyOutput { meta: *meta, a, b, verdict, g_b, series }))
}

fn cmd_g_table(meta: &Meta, args: &GTableArgs) -> CliResult<String> {
    if !(args.min > 0.0 && args.min < args.max && args.max <= 1.0) {
        return Err(CliError::bad(format!("need 0 < min < max <= 1, got [{}, {}]", args.min, args.max)));
    }
    if args.steps < 2 {
        return Err(CliError::bad("--steps must be at least 2"));
    }
    let xs: Vec<f64> = (0..args.steps)
        .map(|i| {
            if i == args.steps - 1 {
                args.max
            } else {
                args.min + (args.max - args.min) * i as f64 / (args.steps - 1) as f64
            }
        })
        .collect();
    let rows: Vec<crate::Result<(f64, f64, Option<f64>)>> = run_paths(xs.len(), |i| {
        let x = xs[i as usize];
        let g = g_boundary(x)?;
        let h = if args.verify { Some(crate::alt::h_oracle(x)?) } else { None };
        Ok((x, g, h))
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    if args.verify {
        w.write_record(["x", "G", "H_oracle", "abs_dev"]).expect("in-memory write");
    } else {
        w.write_record(["x", "G"]).expect("in-memory write");
    }
    let mut max_dev = 0.0f64;
    for row in rows {
        let (x, g, h) = row?;
        match h {
            Some(h) => {
                let d = (g - h).abs();
                max_dev = max_dev.max(d);
                w.serialize((x, g, h, d)).expect("in-memory write");
            }
            None => w.serialize((x, g)).expect("in-memory write"),
        }
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv");
    let mut s = meta.csv_preamble();
    s.push_str(&body);
    if args.verify {
        s.push_str(&format!("# max_abs_deviation={max_dev:e}\n"));
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct SimulateOutput<'a> {
    pub meta: Meta<'a>,
    pub family: &'static str,
    pub support: SupportBounds,
    pub diverged_fraction: f64,
    pub finite_fraction: f64,
    /// Over the finite final values.
    pub values: Summary,
    pub mean_log_star: f64,
    /// KS test of the final values against the tower limit law, when known.
    pub ks_vs_tower_law: Option<KsResult>,
    pub oscillation: Option<OscillationReport>,
    pub stopping: Option<StoppingEstimate>,
    /// Series value of `E[min(N, depth)]` when the tail is known analytically.
    pub stopping_series: Option<f64>,
}

fn write_csv<P: AsRef<std::path::Path>>(path: P, preamble: &str, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv");
    fs::write(path.as_ref(), format!("{preamble}{body}"))
        .map_err(|e| CliError::bad(format!("cannot write {}: {e}", path.as_ref().display())))
}

fn sample_row(path: usize, height: usize, s: &TowerSample) -> Vec<String> {
    vec![
        path.to_string(),
        height.to_string(),
        format!("{:e}", s.value.to_f64()),
        s.value.level().to_string(),
        log_star(s.value).to_string(),
        s.diverged.to_string(),
    ]
}

const SAMPLE_HEADER: [&str; 6] = ["path", "height", "value", "level", "log_star", "diverged"];

fn cmd_simulate(meta: &Meta, args: &SimulateArgs) -> CliResult<String> {
    let dist = load_dist(&args.dist)?;
    if args.depth == 0 || args.paths == 0 {
        return Err(CliError::bad("--depth and --paths must be positive"));
    }
    let seed = meta.seed;
    let mut oscillation = None;
    let mut stopping = None;
    let mut stopping_series = None;
    match args.report {
        Report::Dist => {}
        Report::Osc => oscillation = Some(oscillation_gap(&dist, args.depth, args.paths, seed)?),
        Report::Stopping => {
            stopping = Some(estimate_stopping_time(&dist, args.depth, args.paths, seed)?);
            stopping_series = tail_sequence_for(&dist, args.depth.max(64))
                .ok()
                .map(|q| stopping_time_series(&q, args.depth).censored_mean(args.depth));
        }
    }

    let (finals, csv_rows): (Vec<TowerSample>, Vec<Vec<String>>) = match args.mode {
        Mode::Backward => {
            let f = backward_samples(&dist, args.depth, args.paths, seed);
            let rows = f.iter().enumerate().map(|(i, s)| sample_row(i, args.depth, s)).collect();
            (f, rows)
        }
        Mode::Forward if args.trajectories => {
            let trajs: Vec<Vec<TowerSample>> =
                run_paths(args.paths, |i| tower_forward(&dist, args.depth, &mut path_rng(seed, i)));
            let rows = trajs
                .iter()
                .enumerate()
                .flat_map(|(i, t)| t.iter().enumerate().map(move |(h, s)| sample_row(i, h + 1, s)))
                .collect();
            (trajs.iter().map(|t| *t.last().expect("depth >= 1")).collect(), rows)
        }
        Mode::Forward => {
            let f = forward_finals(&dist, args.depth, args.paths, seed);
            let rows = f.iter().enumerate().map(|(i, s)| sample_row(i, args.depth, s)).collect();
            (f, rows)
        }
    };
    if let Some(p) = &args.csv {
        write_csv(p, &meta.csv_preamble(), &SAMPLE_HEADER, csv_rows)?;
    }

    let n = finals.len() as f64;
    let diverged = finals.iter().filter(|s| s.diverged).count() as f64;
    let finite: Vec<f64> = finals.iter().map(|s| s.value.to_f64()).filter(|v| v.is_finite()).collect();
    let mean_log_star = finals.iter().map(|s| log_star(s.value) as f64).sum::<f64>() / n;
    let ks_vs_tower_law = if finite.len() == finals.len() && dist.tower_law_cdf(0.5).is_some() {
        ks_one_sample(&finite, |x| dist.tower_law_cdf(x).expect("checked")).ok()
    } else {
        None
    };
    Ok(to_json(&SimulateOutput {
        meta: *meta,
        family: dist.family_name(),
        support: dist.support(),
        diverged_fraction: diverged / n,
        finite_fraction: finite.len() as f64 / n,
        values: Summary::of(&finite),
        mean_log_star,
        ks_vs_tower_law,
        oscillation,
        stopping,
        stopping_series,
    }))
}

#[derive(Debug, Serialize)]
#[serde(tag = "artifact", rename_all = "snake_case")]
pub enum InvArtifact {
    Eval { x: f64, value: f64, steps: usize, truncated: bool },
    Audit { grid: usize, violations: Vec<Violation> },
}

#[derive(Debug, Serialize)]
pub struct InvTowerOutput<'a> {
    pub meta: Meta<'a>,
    pub params: InvTowerParams,
    pub feasibility: Feasibility,
    pub r_bound: f64,
    pub support: (f64, f64),
    pub value_at_one: f64,
    pub result: Option<InvArtifact>,
}

fn cmd_inv_tower(meta: &Meta, args: &InvTowerArgs) -> CliResult<String> {
    let params = InvTowerParams::new(args.alpha, args.beta, args.r);
    let feas = params.feasibility();
    if !(args.alpha.is_finite() && args.beta.is_finite() && args.alpha >= 0.0 && args.beta > args.alpha)
        || args.r.is_nan()
    {
        return Err(CliError::bad(feas.reason));
    }
    let wants_checked = args.eval.is_some() || args.table || args.sample.is_some();
    if wants_checked && !feas.feasible {
        return Err(CliError { code: EXIT_INFEASIBLE, message: format!("infeasible parameters: {}", feas.reason) });
    }
    let cdf = InvTowerCdf::unchecked(params);
    let support = if feas.feasible || params.r.is_finite() { params.support() } else { (f64::NAN, f64::NAN) };

    if args.table || args.sample.is_some() {
        let mut w = csv::Writer::from_writer(Vec::new());
        if args.table {
            let grid = args.grid.max(2);
            let (lo, hi) = support;
            w.write_record(["x", "F"]).expect("in-memory write");
            for i in 0..grid {
                let x = if i == grid - 1 { hi } else { lo + (hi - lo) * i as f64 / (grid - 1) as f64 };
                w.serialize((x, cdf.eval(x))).expect("in-memory write");
            }
        } else {
            let n = args.sample.expect("checked");
            let draws: Vec<crate::Result<f64>> = run_paths(n, |i| cdf.sample(&mut path_rng(meta.seed, i)));
            w.write_record(["index", "x"]).expect("in-memory write");
            for (i, d) in draws.into_iter().enumerate() {
                w.serialize((i, d?)).expect("in-memory write");
            }
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv");
        let mut s = meta.csv_preamble();
        s.push_str(&format!("# feasible={} reason={}\n", feas.feasible, feas.reason));
        s.push_str(&body);
        return Ok(s);
    }

    let result = if let Some(x) = args.eval {
        let e = cdf.eval_instrumented(x);
        Some(InvArtifact::Eval { x, value: e.value, steps: e.steps, truncated: e.truncated })
    } else if args.audit {
        Some(InvArtifact::Audit { grid: args.grid, violations: monotonicity_audit(&cdf, args.grid) })
    } else {
        None
    };
    Ok(to_json(&InvTowerOutput {
        meta: *meta,
        params,
        feasibility: feas,
        r_bound: params.r_bound(),
        support,
        value_at_one: cdf.value_at_one(),
        result,
    }))
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput<'a> {
    pub meta: Meta<'a>,
    pub suite: Suite,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

fn cmd_verify(meta: &Meta, args: &VerifyArgs) -> CliResult<(String, i32)> {
    let criteria = run_suite(args.suite, meta.seed)?;
    let passed = criteria.iter().all(|c| c.passed);
    let out = to_json(&VerifyOutput { meta: *meta, suite: args.suite, passed, criteria });
    Ok((out, if passed { EXIT_OK } else { EXIT_FAILED }))
}
