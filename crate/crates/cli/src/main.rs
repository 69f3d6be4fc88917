#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use heatsharp_core::experiments::{
    blowup_ratio, counterexample_lower_bound_check, counterexample_norms, counterexample_p_partials, decay_slope,
    equality_root_record, initial_convergence, verify_sharpness_ratio, Probe, Route, ASYMPTOTIC_TOL, BLOWUP_SLOPE_TOL,
    INITIAL_CONDITION_THRESHOLD, ROOT_TOL, SLOPE_TOL,
};
use heatsharp_core::fit::{linspace, logspace};
use heatsharp_core::format::fmt_g17;
use heatsharp_core::gridfn::{heat_evolve, heat_evolve_fft, pde_residual, sample, GridFunction, GridPlan};
use heatsharp_core::selftest;
use heatsharp_core::{
    BoundSense, DecayModulus, ExperimentRecord, Exponent, FunctionSpec, Row, SharpConstants, Verdict,
};

#[derive(Parser)]
#[command(
    name = "heatsharp",
    version,
    about = "Sharp Lebesgue-norm estimates for the 1-D heat equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp constants c_p, α_q, C, K, extremal β and decay exponent (r from 1/p + 1/q = 1 + 1/r).
    Constants(ConstantsArgs),
    /// Equality equation β^{1-1/q}(β+1)^{-(1-1/r)} = RHS: residual at the extremal β and uniqueness scan.
    VerifyEquality(EqualityArgs),
    /// Evolve an input profile under the heat flow on a uniform grid (u_t = u_xx, u_0 = f).
    Evolve(EvolveArgs),
    /// Ratio ||f*Θ_t||_r / (K ||f||_p t^{-(1-1/q)/2}), which must not exceed 1.
    Sharpness(SharpnessArgs),
    /// Fitted decay exponent of ||f*Θ_t||_r in t; equals -(1-1/q)/2 for the extremal family.
    DecayFit(DecayFitArgs),
    /// Operator ratio ||Θ_2t||_r / (ψ(t) ||Θ_t||_p) for ψ(t) = t^{-γ}, unbounded unless γ = (1-1/q)/2.
    Blowup(BlowupArgs),
    /// f(x) = x^{-1/p} ln^{-2} x on [e, inf): in L^p, not in L^s for s < p, and f*Θ_t ≳ f/2.
    Counterexample(CounterexampleArgs),
    /// ||u_t - f||_p as t -> 0+, which must tend to 0.
    InitialCondition(InitialArgs),
    /// Max |u_xx - u_t| of the numerically evolved profile.
    PdeResidual(PdeArgs),
    /// Run the full acceptance matrix and print one pass/fail row per criterion.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Input exponent p: decimal, fraction such as 4/3, or inf.
    #[arg(long)]
    p: Exponent,
    /// Kernel exponent q: decimal, fraction such as 4/3, or inf.
    #[arg(long)]
    q: Exponent,
}

#[derive(Args)]
struct SpecArgs {
    /// Input profile as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: Option<String>,
}

/// A list of abscissae, either explicit or a range.
#[derive(Args)]
struct TimeRange {
    /// Explicit time values, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_min", "t_max"])]
    t: Option<Vec<f64>>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 3)]
    t_count: usize,
    /// Space the range linearly instead of logarithmically.
    #[arg(long)]
    linear: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct EqualityArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Scan [β/span, span·β].
    #[arg(long, default_value_t = 100.0)]
    span: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long, default_value_t = ROOT_TOL)]
    tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Fft,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    t: f64,
    /// Explicit grid; by default the grid is planned from the spec.
    #[arg(long, requires_all = ["x_max", "n"])]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per shortest length scale when planning.
    #[arg(long, default_value_t = 8.0)]
    resolution: f64,
    #[arg(long, value_enum, default_value_t = Method::Direct)]
    method: Method,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    ClosedForm,
    Grid,
}

#[derive(Args)]
struct SharpnessArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    spec: SpecArgs,
    /// Use Θ_t^β evolved for the same t (β defaults to the extremal exponent).
    #[arg(long, conflicts_with = "spec")]
    extremal: bool,
    #[arg(long, requires = "extremal")]
    beta: Option<f64>,
    #[command(flatten)]
    times: TimeRange,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    route: RouteArg,
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DecayFitArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, conflicts_with = "spec")]
    extremal: bool,
    #[arg(long, requires = "extremal")]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 9)]
    t_count: usize,
    #[arg(long, default_value_t = SLOPE_TOL)]
    tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BlowupArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Exponent of ψ(t) = t^{-γ}.
    #[arg(long)]
    gamma: f64,
    #[command(flatten)]
    times: TimeRange,
    #[arg(long, default_value_t = BLOWUP_SLOPE_TOL)]
    tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CounterMode {
    /// Growth of ∫_e^L f^s against convergence of ∫_e^L f^p.
    Norms,
    /// ∫_e^L f^p against its limit 1/(2p-1).
    Partials,
    /// (f*Θ_t)(x)/f(x) against erf((x-e)/(2√t))/2.
    LowerBound,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long, value_enum, default_value_t = CounterMode::Norms)]
    mode: CounterMode,
    #[arg(long)]
    p: Exponent,
    /// Exponent s < p (norms mode).
    #[arg(long)]
    s: Option<Exponent>,
    #[arg(long, default_value_t = 10.0)]
    l_min: f64,
    #[arg(long, default_value_t = 1e12)]
    l_max: f64,
    #[arg(long, default_value_t = 12)]
    l_count: usize,
    /// Restrict the growth fit to L in [fit-lo, fit-hi].
    #[arg(long, requires = "fit_hi")]
    fit_lo: Option<f64>,
    #[arg(long)]
    fit_hi: Option<f64>,
    /// Evolution time (lower-bound mode).
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 3.0)]
    x_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    x_max: f64,
    #[arg(long, default_value_t = 10)]
    x_count: usize,
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct InitialArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    p: Exponent,
    #[command(flatten)]
    times: TimeRange,
    /// Final distance must fall below this.
    #[arg(long, default_value_t = INITIAL_CONDITION_THRESHOLD)]
    tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PdeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    x_max: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

/// Malformed flags exit with 2, failed computations or verdicts with 1.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("HEATSHARP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("HEATSHARP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Data(anyhow!("thread pool: {e}")))
}

fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Constants(a) => constants(a),
        Command::VerifyEquality(a) => {
            let mut rec = equality_root_record(a.pair.p, a.pair.q, a.span, a.points).context("--p/--q")?;
            if rec.verdict != Verdict::Informational {
                let at_root = rec.number("residual_at_beta").unwrap_or(f64::NAN);
                let unique = rec.number("slope_sign_changes") == Some(1.0)
                    && rec.number("max_off_root_residual").is_some_and(|r| r < 0.0);
                rec.tolerance = a.tolerance;
                rec.verdict = Verdict::from_pass(at_root.abs() <= a.tolerance && unique);
            }
            emit_record(&rec, &a.out)
        }
        Command::Evolve(a) => evolve(a),
        Command::Sharpness(a) => {
            let probe = probe(&a.spec, a.extremal, a.beta)?;
            let ts = a.times.values()?;
            let route = match a.route {
                RouteArg::Auto => Route::Auto,
                RouteArg::ClosedForm => Route::ClosedForm,
                RouteArg::Grid => Route::Grid,
            };
            let mut rec = verify_sharpness_ratio(a.pair.p, a.pair.q, &probe, &ts, route).context("sharpness")?;
            if let Some(tol) = a.tolerance {
                rec.tolerance = tol;
                rec.verdict = Verdict::from_pass(rec.bounds_hold());
            }
            emit_record(&rec, &a.out)
        }
        Command::DecayFit(a) => {
            let probe = probe(&a.spec, a.extremal, a.beta)?;
            check_range("--t-min/--t-max/--t-count", a.t_min, a.t_max, a.t_count)?;
            let mut rec = decay_slope(a.pair.p, a.pair.q, &probe, a.t_min, a.t_max, a.t_count).context("decay-fit")?;
            if rec.verdict != Verdict::Informational {
                let gap =
                    (rec.number("slope").unwrap_or(f64::NAN) - rec.number("expected_slope").unwrap_or(f64::NAN)).abs();
                rec.tolerance = a.tolerance;
                rec.verdict = Verdict::from_pass(gap <= a.tolerance);
            }
            emit_record(&rec, &a.out)
        }
        Command::Blowup(a) => {
            let psi = DecayModulus::new(a.gamma).context("--gamma")?;
            let ts = a.times.values()?;
            let mut rec = blowup_ratio(a.pair.p, a.pair.q, psi, &ts).context("blowup")?;
            let gap =
                (rec.number("slope").unwrap_or(f64::NAN) - rec.number("expected_slope").unwrap_or(f64::NAN)).abs();
            rec.tolerance = a.tolerance;
            rec.verdict = if gap <= a.tolerance {
                Verdict::Informational
            } else {
                Verdict::Fail
            };
            emit_record(&rec, &a.out)
        }
        Command::Counterexample(a) => counterexample(a),
        Command::InitialCondition(a) => {
            let spec = require_spec(&a.spec)?;
            let ts = a.times.values()?;
            let mut rec = initial_convergence(&spec, a.p, &ts).context("--spec/--p")?;
            let v = rec.values();
            rec.tolerance = a.tolerance;
            rec.verdict = Verdict::from_pass(v.windows(2).all(|w| w[1] > w[0]) && v[0] < a.tolerance);
            emit_record(&rec, &a.out)
        }
        Command::PdeResidual(a) => {
            let spec = require_spec(&a.spec)?;
            let r = pde_residual(&spec, a.t, (a.x_min, a.x_max), a.h, a.delta).context("pde-residual")?;
            let mut rec = ExperimentRecord::new("pde_residual", a.tolerance, vec![Row::new(a.t, r, Some(a.tolerance))])
                .map_err(anyhow::Error::from)?
                .with_param("h", a.h)
                .with_param("delta", a.delta)
                .with_param("x_min", a.x_min)
                .with_param("x_max", a.x_max)
                .with_sense(BoundSense::Upper);
            rec.verdict = Verdict::from_pass(r <= a.tolerance);
            emit_record(&rec, &a.out)
        }
        Command::Selftest => {
            let outcomes = selftest::run_all();
            let mut all = true;
            for o in &outcomes {
                println!("{o}");
                all &= o.passed;
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            Ok(all)
        }
    }
}

impl TimeRange {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        if let Some(ts) = &self.t {
            if ts.is_empty() {
                return Err(usage("--t needs at least one value"));
            }
            return Ok(ts.clone());
        }
        let (Some(lo), Some(hi)) = (self.t_min, self.t_max) else {
            return Err(usage("give either --t or both --t-min and --t-max"));
        };
        check_range("--t-min/--t-max/--t-count", lo, hi, self.t_count)?;
        let v = if self.linear {
            linspace(lo, hi, self.t_count)
        } else {
            logspace(lo, hi, self.t_count)
        };
        v.map_err(|e| usage(format!("--t-min/--t-max: {e}")))
    }
}

fn check_range(flags: &str, lo: f64, hi: f64, count: usize) -> Result<(), Failure> {
    if !(lo < hi) || count < 2 {
        return Err(usage(format!(
            "{flags}: need min < max and count >= 2 (got {lo}, {hi}, {count})"
        )));
    }
    Ok(())
}

fn require_spec(s: &SpecArgs) -> Result<FunctionSpec, Failure> {
    let raw = s.spec.as_deref().ok_or_else(|| usage("--spec is required"))?;
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        fs::read_to_string(raw).map_err(|e| usage(format!("--spec: cannot read {raw}: {e}")))?
    };
    let spec: FunctionSpec = serde_json::from_str(&text).map_err(|e| usage(format!("--spec: {e}")))?;
    spec.validate().map_err(|e| usage(format!("--spec: {e}")))?;
    Ok(spec)
}

fn probe(s: &SpecArgs, extremal: bool, beta: Option<f64>) -> Result<Probe, Failure> {
    if extremal {
        Ok(Probe::Extremal { beta })
    } else {
        Ok(Probe::Spec(require_spec(s)?))
    }
}

fn write_out(text: &str, out: &OutputArgs) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("--output {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).context("stdout")?,
    }
    Ok(())
}

fn emit_record(rec: &ExperimentRecord, out: &OutputArgs) -> Result<bool, Failure> {
    let text = match out.format {
        Format::Json => rec.to_json() + "\n",
        Format::Csv => rec.to_csv(),
    };
    write_out(&text, out)?;
    if !rec.verdict.is_ok() {
        eprintln!("{}: verdict fail (tolerance {})", rec.name, fmt_g17(rec.tolerance));
    }
    Ok(rec.verdict.is_ok())
}

fn constants(a: ConstantsArgs) -> Result<bool, Failure> {
    let c = SharpConstants::new(a.pair.p, a.pair.q).context("--p/--q")?;
    let text = match a.out.format {
        Format::Json => c.to_json() + "\n",
        Format::Csv => {
            let g = fmt_g17;
            format!(
                "p,q,r,c_p,c_q,c_r,alpha_q,C,K,beta,beta_limit_only,decay\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.triple.p,
                c.triple.q,
                c.triple.r,
                g(c.c_p),
                g(c.c_q),
                g(c.c_r),
                g(c.alpha_q),
                g(c.young),
                g(c.heat),
                c.beta,
                c.beta.is_limit_only(),
                g(c.decay)
            )
        }
    };
    write_out(&text, &a.out)?;
    Ok(true)
}

fn evolve(a: EvolveArgs) -> Result<bool, Failure> {
    let spec = require_spec(&a.spec)?;
    if !(a.t > 0.0) {
        return Err(usage(format!("--t must be positive, got {}", a.t)));
    }
    let f = match (a.x_min, a.x_max, a.n) {
        (Some(lo), Some(hi), Some(n)) => {
            check_range("--x-min/--x-max/--n", lo, hi, n)?;
            sample(&spec, lo, hi, n).context("--spec")?
        }
        _ => GridPlan::for_spec(&spec, a.t, a.t, a.resolution)
            .and_then(|plan| plan.sample(&spec))
            .context("--spec: planning a grid (give --x-min/--x-max/--n for unbounded profiles)")?,
    };
    let u = match a.method {
        Method::Direct => heat_evolve(&f, a.t),
        Method::Fft => heat_evolve_fft(&f, a.t),
    }
    .context("evolve")?;
    for w in u.warnings() {
        eprintln!("warning: {w}");
    }
    let text = match a.out.format {
        Format::Csv => u.to_csv(),
        Format::Json => grid_json(&u, a.t),
    };
    write_out(&text, &a.out)?;
    Ok(true)
}

fn grid_json(u: &GridFunction, t: f64) -> String {
    let xs: Vec<String> = (0..u.n()).map(|i| fmt_g17(u.x(i))).collect();
    let vs: Vec<String> = u.samples().iter().map(|v| fmt_g17(*v)).collect();
    let ws: Vec<String> = u
        .warnings()
        .iter()
        .map(|w| serde_json::to_string(&w.to_string()).expect("string"))
        .collect();
    let (lo, hi) = u.trusted();
    format!(
        "{{\"t\":{},\"h\":{},\"trusted\":[{},{}],\"warnings\":[{}],\"x\":[{}],\"value\":[{}]}}\n",
        fmt_g17(t),
        fmt_g17(u.h()),
        fmt_g17(lo),
        fmt_g17(hi),
        ws.join(","),
        xs.join(","),
        vs.join(",")
    )
}

fn counterexample(a: CounterexampleArgs) -> Result<bool, Failure> {
    let mut rec = match a.mode {
        CounterMode::Norms | CounterMode::Partials => {
            check_range("--l-min/--l-max/--l-count", a.l_min, a.l_max, a.l_count)?;
            let ls = logspace(a.l_min, a.l_max, a.l_count).map_err(|e| usage(format!("--l-min/--l-max: {e}")))?;
            if let CounterMode::Partials = a.mode {
                let mut rec = counterexample_p_partials(a.p, &ls).context("--p")?;
                if let Some(tol) = a.tolerance {
                    rec.tolerance = tol;
                    let increasing = rec.values().windows(2).all(|w| w[1] > w[0]);
                    rec.verdict = Verdict::from_pass(rec.bounds_hold() && increasing);
                }
                rec
            } else {
                let s = a.s.ok_or_else(|| usage("--s is required in norms mode"))?;
                let window = a.fit_lo.zip(a.fit_hi);
                let mut rec = counterexample_norms(a.p, s, &ls, window).context("--p/--s")?;
                let tol = a.tolerance.unwrap_or(ASYMPTOTIC_TOL);
                let gap = (rec.number("fitted_exponent").unwrap_or(f64::NAN)
                    - rec.number("expected_exponent").unwrap_or(f64::NAN))
                .abs();
                let flag = |k: &str| rec.param(k).is_none_or(|v| *v == "true".into());
                let ok = gap <= tol && flag("s_increments_growing") && flag("p_increments_shrinking");
                rec.tolerance = tol;
                rec.verdict = Verdict::from_pass(ok);
                rec
            }
        }
        CounterMode::LowerBound => {
            check_range("--x-min/--x-max/--x-count", a.x_min, a.x_max, a.x_count)?;
            let xs = logspace(a.x_min, a.x_max, a.x_count).map_err(|e| usage(format!("--x-min/--x-max: {e}")))?;
            let mut rec = counterexample_lower_bound_check(a.p, a.t, &xs).context("--p/--t/--x-min")?;
            if let Some(tol) = a.tolerance {
                rec.tolerance = tol;
                let trusted = rec.number("untrusted_points") == Some(0.0);
                rec.verdict = Verdict::from_pass(rec.bounds_hold() && trusted);
            }
            rec
        }
    };
    if let Some(tol) = a.tolerance {
        rec = rec.with_param("tolerance_override", tol);
    }
    emit_record(&rec, &a.out)
}
