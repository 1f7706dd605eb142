use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cpscan::asymptotics::{
    p1_fixed, p2_fixed, p2_free_delta, p3_fixed, p3_free_delta, p4_tail, statistic_pvalue, ContinuousProblemParams,
    Penalty, TailApprox,
};
use cpscan::fieldsim::{simulate_sup, simulate_sup_two_level, FieldKind, RECOMMENDED_MIN_GRID, RECOMMENDED_MIN_REPS};
use cpscan::pickands::{
    default_step, estimate_h_two_level, estimate_p_two_level, estimate_q_two_level, Estimator, HForm, McConfig,
    DEFAULT_LAMBDA1_P, DEFAULT_LAMBDA_H, DEFAULT_LAMBDA_P,
};
use cpscan::report::{CurveRow, Results, RunReport, StatEntry};
use cpscan::seed::entropy_seed;
use cpscan::stats::{statistic, HypothesisParams, ObservationSeries, StatKind};
use cpscan::{Error, Result};

/// Change-point scan statistics, tail approximations and Monte Carlo checks.
#[derive(Parser)]
#[command(name = "cpscan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Z1–Z4 for a series (one value per line) with approximate p-values.
    Stat(StatArgs),
    /// Evaluate a closed-form tail approximation.
    Pvalue(PvalueArgs),
    /// Estimate H, P or Q constants by Monte Carlo at steps η and η/2.
    Constants(ConstantsArgs),
    /// Estimate a field tail probability by direct simulation on grids m and 2m.
    Simulate(SimulateArgs),
    /// Write a CSV of the approximation over a range of u (optionally with simulation).
    Curve(CurveArgs),
}

#[derive(Args, Serialize)]
struct RunOpts {
    /// Master seed (drawn from system entropy if omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = available parallelism)
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    threads: usize,
}

#[derive(Args, Serialize)]
struct StatArgs {
    /// Input file, one observation per line
    #[arg(long)]
    input: PathBuf,
    /// z1, z2, z3, z4 or all
    #[arg(long, default_value = "all")]
    kind: String,
    /// Baseline mean (Z1)
    #[arg(long, allow_hyphen_values = true)]
    mu0: Option<f64>,
    /// Mean shift under the alternative (Z1–Z3)
    #[arg(long)]
    delta: Option<f64>,
    /// Skip the first line of the input
    #[arg(long)]
    skip_header: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PvalueArgs {
    /// p1, p2, p3, p4, free2 or free3
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ConstantsArgs {
    /// H, P or Q
    #[arg(long)]
    kind: String,
    #[arg(long)]
    alpha: f64,
    /// Horizon λ (default 8 for H, 4 for P and Q)
    #[arg(long)]
    lambda: Option<f64>,
    /// Lag width λ1 for P and Q (default 2)
    #[arg(long)]
    lambda1: Option<f64>,
    /// Grid step η (default 0.01 for α ≥ 1, 0.002 otherwise)
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    /// H only: rate (increment form) or lambda (H(λ) itself)
    #[arg(long, default_value = "rate")]
    form: String,
    /// P only: coefficient of |t|^α in the penalty
    #[arg(long, default_value_t = 0.0)]
    b_over_a: f64,
    /// P only: linear penalty coefficient (α = 2)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c_over_sqrt_a: f64,
    /// tilted or direct
    #[arg(long, default_value = "tilted")]
    estimator: String,
    #[command(flatten)]
    run: RunOpts,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// p1, p2, p3, p4, free2 or free3
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Penalty level for p1–p3; the threshold itself for p4
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Threshold scale (not used by p4)
    #[arg(long)]
    u: Option<f64>,
    /// Number of grid intervals m on [0, 1]
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[command(flatten)]
    run: RunOpts,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CurveArgs {
    /// p1, p2, p3, p4, free2 or free3
    #[arg(long)]
    kind: String,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Penalty level for p1–p3 (p4 sweeps d over [u-min, u-max])
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    #[arg(long)]
    u_min: f64,
    #[arg(long)]
    u_max: f64,
    #[arg(long, default_value_t = 20)]
    n_points: usize,
    /// Add an empirical column from this many simulated replicates per point
    #[arg(long)]
    reps: Option<usize>,
    /// Grid intervals for the empirical column
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    #[command(flatten)]
    run: RunOpts,
    /// CSV destination (stdout if omitted)
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Also write the JSON report to this path
    #[arg(long)]
    #[serde(skip)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stat(a) => {
            let r = cmd_stat(&a)?;
            emit(&r.to_json(), a.out.as_ref())
        }
        Command::Pvalue(a) => {
            let r = cmd_pvalue(&a)?;
            emit(&r.to_json(), a.out.as_ref())
        }
        Command::Constants(a) => {
            let r = with_threads(a.run.threads, || cmd_constants(&a))?;
            emit(&r.to_json(), a.out.as_ref())
        }
        Command::Simulate(a) => {
            let r = with_threads(a.run.threads, || cmd_simulate(&a))?;
            emit(&r.to_json(), a.out.as_ref())
        }
        Command::Curve(a) => {
            let r = with_threads(a.run.threads, || cmd_curve(&a))?;
            emit(&curve_csv(&r), a.out.as_ref())?;
            match &a.report {
                Some(p) => emit(&r.to_json(), Some(p)),
                None => Ok(()),
            }
        }
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, format!("{text}\n")).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| Error::Input(format!("cannot write to stdout: {e}")))
        }
    }
}

fn inputs<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn flag_tail(report: &mut RunReport, what: &str, t: &TailApprox) {
    if t.pre_asymptotic {
        report.flag(format!("pre-asymptotic: {what} value > 1"));
    }
}

fn read_series(path: &PathBuf, skip_header: bool) -> Result<ObservationSeries> {
    let bytes = fs::read(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Input(format!("{} is not valid UTF-8", path.display())))?;
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate().skip(skip_header as usize) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Input(format!("line {}: '{line}' is not a number", n + 1)))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Input(format!("{} contains no observations", path.display())));
    }
    ObservationSeries::new(values)
}

fn cmd_stat(a: &StatArgs) -> Result<RunReport> {
    let kinds: Vec<StatKind> = if a.kind == "all" { StatKind::ALL.to_vec() } else { vec![a.kind.parse()?] };
    let h = HypothesisParams::new(a.mu0, a.delta)?;
    let x = read_series(&a.input, a.skip_header)?;
    let mut flags = Vec::new();
    if a.skip_header {
        flags.push("header line skipped".to_string());
    }
    let mut entries = Vec::new();
    for kind in kinds {
        let report = match statistic(kind, &x, &h) {
            Ok(r) => r,
            Err(e) if a.kind == "all" => {
                flags.push(format!("{kind} skipped: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let (pvalue, continuous) = if kind == StatKind::Z4 || h.delta.is_some() {
            match statistic_pvalue(kind, x.len(), h.delta, report.value) {
                Ok((t, q)) => {
                    if t.pre_asymptotic {
                        flags.push(format!("pre-asymptotic: {kind} p-value > 1"));
                    }
                    (Some(t), q)
                }
                Err(e) => {
                    flags.push(format!("{kind} p-value unavailable: {e}"));
                    (None, None)
                }
            }
        } else {
            (None, None)
        };
        entries.push(StatEntry { report, pvalue, continuous });
    }
    let mut r = RunReport::new("stat", None, inputs(a), Results::Stat { entries });
    for f in flags {
        r.flag(f);
    }
    Ok(r)
}

fn require(v: Option<f64>, name: &str, kind: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Parameter(format!("kind {kind} requires --{name}")))
}

/// Closed form for `kind` at level `x` (u, or d for p4).
fn analytic(
    kind: &str,
    c: Option<f64>,
    d: Option<f64>,
    x: f64,
) -> Result<(TailApprox, Option<ContinuousProblemParams>)> {
    let fixed = |f: fn(&ContinuousProblemParams) -> Result<TailApprox>| -> Result<_> {
        let q = ContinuousProblemParams::new(require(c, "c", kind)?, require(d, "d", kind)?, x);
        Ok((f(&q)?, Some(q)))
    };
    match kind {
        "p1" => fixed(p1_fixed),
        "p2" => fixed(p2_fixed),
        "p3" => fixed(p3_fixed),
        "p4" => Ok((p4_tail(x)?, None)),
        "free2" => Ok((p2_free_delta(require(c, "c", kind)?, x)?, None)),
        "free3" => Ok((p3_free_delta(require(c, "c", kind)?, x)?, None)),
        _ => Err(Error::Parameter(format!("unknown kind '{kind}' (expected p1, p2, p3, p4, free2, free3)"))),
    }
}

fn cmd_pvalue(a: &PvalueArgs) -> Result<RunReport> {
    let level = if a.kind == "p4" { require(a.d, "d", "p4")? } else { require(a.u, "u", &a.kind)? };
    let (approx, params) = analytic(&a.kind, a.c, a.d, level)?;
    let mut r = RunReport::new("pvalue", None, inputs(a), Results::Pvalue { kind: a.kind.clone(), approx, params });
    flag_tail(&mut r, &a.kind, &approx);
    Ok(r)
}

fn cmd_constants(a: &ConstantsArgs) -> Result<RunReport> {
    let seed = a.run.seed.unwrap_or_else(entropy_seed);
    let estimator: Estimator = a.estimator.parse()?;
    let step = a.step.unwrap_or_else(|| default_step(a.alpha));
    let cfg = McConfig::new(step, a.reps, seed).with_estimator(estimator);
    let est = match a.kind.as_str() {
        "H" | "h" => {
            let form = match a.form.as_str() {
                "rate" => HForm::Rate,
                "lambda" => HForm::OfLambda,
                f => return Err(Error::Parameter(format!("unknown form '{f}' (expected rate or lambda)"))),
            };
            estimate_h_two_level(a.alpha, a.lambda.unwrap_or(DEFAULT_LAMBDA_H), form, &cfg)?
        }
        "P" | "p" => {
            let pen = Penalty { b_over_a: a.b_over_a, c_over_sqrt_a: a.c_over_sqrt_a };
            estimate_p_two_level(
                a.alpha,
                pen,
                a.lambda.unwrap_or(DEFAULT_LAMBDA_P),
                a.lambda1.unwrap_or(DEFAULT_LAMBDA1_P),
                &cfg,
            )?
        }
        "Q" | "q" => estimate_q_two_level(
            a.alpha,
            a.lambda.unwrap_or(DEFAULT_LAMBDA_P),
            a.lambda1.unwrap_or(DEFAULT_LAMBDA1_P),
            &cfg,
        )?,
        k => return Err(Error::Parameter(format!("unknown constant kind '{k}' (expected H, P or Q)"))),
    };
    let mut r =
        RunReport::new("constants", Some(seed), inputs(a), Results::Constants { coarse: est.coarse, fine: est.fine });
    if a.alpha != 2.0 && a.c_over_sqrt_a != 0.0 {
        r.flag("c_over_sqrt_a ignored: the linear penalty applies only at alpha = 2");
    }
    Ok(r)
}

fn field_level(kind: &str, d: Option<f64>, u: Option<f64>) -> Result<f64> {
    if kind == "p4" {
        require(d, "d", kind)
    } else {
        require(u, "u", kind)
    }
}

fn run_flags(r: &mut RunReport, grid: usize, reps: usize) {
    if grid < RECOMMENDED_MIN_GRID {
        r.flag(format!("coarse grid: {grid} < {RECOMMENDED_MIN_GRID} intervals"));
    }
    if reps < RECOMMENDED_MIN_REPS {
        r.flag(format!("few replicates: {reps} < {RECOMMENDED_MIN_REPS}"));
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<RunReport> {
    let seed = a.run.seed.unwrap_or_else(entropy_seed);
    let kind = FieldKind::from_parts(&a.kind, a.c, a.d)?;
    let level = field_level(&a.kind, a.d, a.u)?;
    let (estimate, refined) = simulate_sup_two_level(kind, level, a.grid, a.reps, seed)?;
    let analytic = kind.analytic(level).ok();
    let mut r = RunReport::new("simulate", Some(seed), inputs(a), Results::Simulate { estimate, refined, analytic });
    run_flags(&mut r, a.grid, a.reps);
    if let Some(t) = &analytic {
        flag_tail(&mut r, &a.kind, t);
    }
    Ok(r)
}

fn cmd_curve(a: &CurveArgs) -> Result<RunReport> {
    if !(a.u_min.is_finite() && a.u_max.is_finite() && a.u_min < a.u_max) {
        return Err(Error::Parameter(format!("requires u-min < u-max, got {} and {}", a.u_min, a.u_max)));
    }
    if a.n_points < 2 {
        return Err(Error::Parameter(format!("n-points must be at least 2, got {}", a.n_points)));
    }
    let seed = a.reps.map(|_| a.run.seed.unwrap_or_else(entropy_seed));
    let field = match a.reps {
        Some(_) => Some(FieldKind::from_parts(&a.kind, a.c, a.d)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(a.n_points);
    let mut pre = false;
    for k in 0..a.n_points {
        let u = a.u_min + (a.u_max - a.u_min) * k as f64 / (a.n_points - 1) as f64;
        let (t, _) = analytic(&a.kind, a.c, a.d, u)?;
        pre |= t.pre_asymptotic;
        let empirical = match (field, a.reps, seed) {
            // each point gets its own derived seed so the columns are independent
            (Some(f), Some(n), Some(s)) => Some(simulate_sup(f, u, a.grid, n, s.wrapping_add(k as u64))?),
            _ => None,
        };
        rows.push(CurveRow { u, analytic: t.value, empirical });
    }
    let mut r = RunReport::new("curve", seed, inputs(a), Results::Curve { rows });
    if pre {
        r.flag(format!("pre-asymptotic: {} value > 1 somewhere on the curve", a.kind));
    }
    if let Some(n) = a.reps {
        run_flags(&mut r, a.grid, n);
    }
    Ok(r)
}

fn curve_csv(r: &RunReport) -> String {
    let Results::Curve { rows } = &r.results else { unreachable!() };
    let empirical = rows.iter().any(|row| row.empirical.is_some());
    let mut s = String::from(if empirical { "u,analytic,empirical,ci_low,ci_high" } else { "u,analytic" });
    for row in rows {
        s.push('\n');
        match &row.empirical {
            Some(e) => s.push_str(&format!("{},{},{},{},{}", row.u, row.analytic, e.p_hat, e.ci_low, e.ci_high)),
            None => s.push_str(&format!("{},{}", row.u, row.analytic)),
        }
    }
    s
}
