//! `mtsharp`: batch front end for mtsharp-core. Every command writes one JSON
//! artifact `{tool_version, config, results}` and, where a profile is
//! produced, a CSV next to it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mtsharp_core::constants::omega_sphere;
use mtsharp_core::green::{extract_a0, solve_green_with, GreenOptions, GreenTable};
use mtsharp_core::halfline::{aux_brute, aux_maximizer_on, AUX_GRID};
use mtsharp_core::limits::LimitValues;
use mtsharp_core::optimizer::{maximize_mt, OptimizerOptions};
use mtsharp_core::profile::{profile_samples_from_csv, profile_to_csv, weighted_integral};
use mtsharp_core::rearrangement::{distribution_function, polya_szego_check, symmetric_rearrangement, SampledFunction};
use mtsharp_core::verify::{battery_ok, run_all, run_check, VerifyOptions, CHECK_NAMES};
use mtsharp_core::{Criticality, MtError, MtParams, NonlinearitySpec};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const THREADS_ENV: &str = "MTSHARP_THREADS";

#[derive(Parser, Debug, Serialize)]
#[command(name = "mtsharp", version, about = "Sharp Moser-Trudinger functionals on radial profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Solve for the Green profile and extract its regular part A0.
    Green(GreenArgs),
    /// Vanishing and concentration limits of a nonlinearity.
    Limits(LimitsArgs),
    /// Closed-form and brute-force solutions of the half-line auxiliary problem.
    Aux1d(AuxArgs),
    /// Multi-start maximization of the functional with an existence certificate.
    Optimize(OptimizeArgs),
    /// Run the invariant battery (`all` or named checks).
    Verify(VerifyArgs),
    /// Symmetric decreasing rearrangement of a sampled radial function.
    Rearrange(RearrangeArgs),
}

#[derive(Args, Debug, Serialize)]
struct OutArgs {
    /// Path prefix for `<prefix>.json` and `<prefix>.csv`; JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GreenArgs {
    #[arg(long = "N", alias = "n")]
    n: u32,
    #[arg(long, default_value_t = 1e-6)]
    rmin: f64,
    /// Defaults to 50 N.
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SpecKind {
    PhiCritical,
    PhiMinusPower,
    Polynomial,
}

#[derive(Args, Debug, Serialize)]
struct SpecArgs {
    #[arg(long = "N", alias = "n", default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = SpecKind::PhiCritical)]
    spec: SpecKind,
    /// `λ` for phi-minus-power.
    #[arg(long)]
    lambda: Option<f64>,
    /// `C(F)` for polynomial.
    #[arg(long)]
    c_of_f: Option<f64>,
    /// `C_N, ..., C_{2(N-1)}` for polynomial.
    #[arg(long, value_delimiter = ',')]
    coeffs: Vec<f64>,
    /// Key-value spec file; overrides the other spec flags.
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LimitsArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct AuxArgs {
    #[arg(long = "N", alias = "n", default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 10.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = AUX_GRID)]
    grid: usize,
    /// Grid of the brute-force ascent; 0 skips it.
    #[arg(long, default_value_t = 512)]
    brute_grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 600)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-5)]
    rmin: f64,
    #[arg(long, default_value_t = 200.0)]
    rmax: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.2])]
    vanishing_seeds: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2])]
    liruf_seeds: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 1.0, 3.0])]
    bump_widths: Vec<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// `all` or any of the check names.
    #[arg(default_value = "all")]
    checks: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid sizes of the two optimizer runs.
    #[arg(long, value_delimiter = ',', default_values_t = [300, 600])]
    optimizer_nodes: Vec<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct RearrangeArgs {
    /// CSV with `r,u` rows; a `# N=<n> beta=<b>` header supplies N.
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "N", alias = "n")]
    n: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(MtError),
    Io(String),
}

impl From<MtError> for CliError {
    fn from(e: MtError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(_) => "computation",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Artifact<'a, C: Serialize, R: Serialize> {
    tool_version: &'a str,
    config: C,
    results: R,
}

#[derive(Serialize)]
struct Config<'a, A: Serialize> {
    command: &'a str,
    args: &'a A,
    threads: usize,
    parallel: bool,
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn config<'a, A: Serialize>(command: &'a str, args: &'a A) -> Config<'a, A> {
    Config { command, args, threads: rayon::current_num_threads(), parallel: mtsharp_core::par::is_parallel() }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Write the JSON artifact (stdout when no prefix) and the optional CSV.
fn emit<C: Serialize, R: Serialize>(out: &OutArgs, config: C, results: R, csv: Option<String>) -> CliResult<()> {
    let art = Artifact { tool_version: TOOL_VERSION, config, results };
    let json = serde_json::to_string_pretty(&art).map_err(|e| CliError::Io(format!("cannot serialize: {e}")))?;
    match &out.out {
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::Io(format!("cannot write to stdout: {e}")));
                }
                _ => {}
            }
        }
        Some(prefix) => {
            write_text(&prefix.with_extension("json"), &json)?;
            if let Some(c) = csv {
                write_text(&prefix.with_extension("csv"), &c)?;
            }
        }
    }
    Ok(())
}

fn default_green(n: u32) -> CliResult<GreenTable> {
    Ok(solve_green_with(n, &GreenOptions::new(n))?)
}

fn build_spec(a: &SpecArgs) -> CliResult<NonlinearitySpec> {
    if let Some(path) = &a.spec_file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        return Ok(NonlinearitySpec::from_kv(&text)?);
    }
    let params = MtParams::new(a.n, a.beta)?;
    Ok(match a.spec {
        SpecKind::PhiCritical => NonlinearitySpec::phi_critical(params),
        SpecKind::PhiMinusPower => {
            let Some(l) = a.lambda else { return usage("--spec phi-minus-power needs --lambda") };
            NonlinearitySpec::phi_minus_power(params, l)?
        }
        SpecKind::Polynomial => {
            let Some(c) = a.c_of_f else { return usage("--spec polynomial needs --c-of-f") };
            NonlinearitySpec::polynomial(params, c, a.coeffs.clone())?
        }
    })
}

#[derive(Serialize)]
struct GreenResults<'a> {
    a0: f64,
    a0_fit_spread: f64,
    fit_error: f64,
    report: &'a mtsharp_core::green::ResidualReport,
}

fn cmd_green(a: &GreenArgs) -> CliResult<()> {
    if a.n < 2 {
        return usage(format!("--N must be at least 2, got {}", a.n));
    }
    let opts = GreenOptions {
        r_min: a.rmin,
        r_max: a.rmax.unwrap_or(50.0 * a.n as f64),
        nodes: a.nodes,
        tol: a.tol,
        ..GreenOptions::new(a.n)
    };
    if !(opts.r_min > 0.0 && opts.r_max > opts.r_min) {
        return usage("need 0 < --rmin < --rmax");
    }
    let table = solve_green_with(a.n, &opts)?;
    let (a0, spread) = extract_a0(&table)?;
    let mut csv = format!("# N={}\nr,G,G_prime\n", a.n);
    for i in 0..table.radii.len() {
        csv.push_str(&format!("{},{},{}\n", table.radii[i], table.g[i], table.g_prime[i]));
    }
    let results = GreenResults { a0, a0_fit_spread: spread, fit_error: table.fit_error, report: &table.report };
    emit(&a.out, config("green", a), results, Some(csv))
}

#[derive(Serialize)]
struct LimitsResults {
    spec: String,
    limits: LimitValues,
}

fn cmd_limits(a: &LimitsArgs) -> CliResult<()> {
    let spec = build_spec(&a.spec)?;
    let a0 = match spec.criticality {
        Criticality::Critical => default_green(spec.params.n())?.a0,
        Criticality::Subcritical => f64::NAN,
    };
    let results = LimitsResults { spec: spec.to_kv()?, limits: LimitValues::new(&spec, a0) };
    emit(&a.out, config("limits", a), results, None)
}

#[derive(Serialize)]
struct AuxResults {
    gamma: f64,
    sup_value: f64,
    expansion: f64,
    remainder: f64,
    energy: f64,
    el_residual: f64,
    brute_value: Option<f64>,
    brute_relative_gap: Option<f64>,
}

fn cmd_aux(a: &AuxArgs) -> CliResult<()> {
    let params = MtParams::new(a.n, a.beta)?;
    let green = default_green(a.n)?;
    let s = aux_maximizer_on(a.a, a.b, &params, &green, a.grid)?;
    let brute = match a.brute_grid {
        0 => None,
        g => Some(aux_brute(a.a, a.b, &params, g, a.seed)?.0),
    };
    let mut csv = format!("# N={} beta={} a={} b={}\nt,w\n", a.n, a.beta, a.a, a.b);
    for (t, w) in s.profile.t().iter().zip(s.profile.w()) {
        csv.push_str(&format!("{t},{w}\n"));
    }
    let results = AuxResults {
        gamma: s.gamma,
        sup_value: s.sup_value,
        expansion: s.expansion,
        remainder: s.remainder,
        energy: s.energy,
        el_residual: s.el_residual,
        brute_value: brute,
        brute_relative_gap: brute.map(|b| (s.sup_value - b) / s.sup_value),
    };
    emit(&a.out, config("aux1d", a), results, Some(csv))
}

fn cmd_optimize(a: &OptimizeArgs) -> CliResult<()> {
    let spec = build_spec(&a.spec)?;
    let opts = OptimizerOptions {
        r_min: a.rmin,
        r_max: a.rmax,
        nodes: a.nodes,
        max_iter: a.max_iter,
        rel_tol: a.rel_tol,
        seed: a.seed,
        vanishing_seeds: a.vanishing_seeds.clone(),
        liruf_seeds: a.liruf_seeds.clone(),
        bump_widths: a.bump_widths.clone(),
        ..OptimizerOptions::default()
    };
    let green = match spec.criticality {
        Criticality::Critical => Some(default_green(spec.params.n())?),
        Criticality::Subcritical => None,
    };
    let report = maximize_mt(&spec, &opts, green.as_ref())?;
    let csv = profile_to_csv(&report.best_profile, &spec.params);
    #[derive(Serialize)]
    struct Cfg<'a> {
        args: Config<'a, OptimizeArgs>,
        spec: String,
        options: &'a OptimizerOptions,
    }
    let cfg = Cfg { args: config("optimize", a), spec: spec.to_kv()?, options: &opts };
    emit(&a.out, cfg, &report, Some(csv))
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<bool> {
    let [n1, n2] = a.optimizer_nodes[..] else { return usage("--optimizer-nodes takes two grid sizes") };
    let opts = VerifyOptions { seed: a.seed, optimizer_nodes: (n1, n2) };
    if let Some(c) = a.checks.iter().find(|c| *c != "all" && !CHECK_NAMES.contains(&c.as_str())) {
        return usage(format!("unknown check '{c}'; known: all, {}", CHECK_NAMES.join(", ")));
    }
    let outcomes = if a.checks.iter().any(|c| c == "all") {
        run_all(&opts)
    } else {
        a.checks.iter().filter_map(|c| run_check(c, &opts)).collect()
    };
    eprintln!("{:<6} {:<20} {:>8}  detail", "status", "check", "seconds");
    for o in &outcomes {
        let tag = match (o.passed, o.known_unattainable) {
            (true, _) => "PASS",
            (false, true) => "FAIL*",
            (false, false) => "FAIL",
        };
        eprintln!("{tag:<6} {:<20} {:>8.2}  {}", o.name, o.seconds, o.detail);
    }
    if outcomes.iter().any(|o| !o.passed && o.known_unattainable) {
        eprintln!("* known unattainable at the stated parameters; does not fail the battery");
    }
    let ok = battery_ok(&outcomes);
    emit(&a.out, config("verify", a), &outcomes, None)?;
    Ok(ok)
}

#[derive(Serialize)]
struct RearrangeResults {
    n: u32,
    grad_before: f64,
    grad_after: f64,
    /// `(p, ∫|f|^p before, after)` for `p = 1, N, 2N`.
    lp_norms: Vec<(f64, f64, f64)>,
    /// `(t, μ_f(t), μ_{f♯}(t))` at ten levels.
    distribution: Vec<(f64, f64, f64)>,
}

fn cmd_rearrange(a: &RearrangeArgs) -> CliResult<()> {
    let text =
        fs::read_to_string(&a.input).map_err(|e| CliError::Io(format!("cannot read {}: {e}", a.input.display())))?;
    let (header, radii, values) = profile_samples_from_csv(&text)?;
    let params = match (a.n, header) {
        (Some(n), Some(p)) if n != p.n() => return usage(format!("--N {n} disagrees with the file header N={}", p.n())),
        (Some(n), Some(p)) => MtParams::new(n, p.beta())?,
        (Some(n), None) => MtParams::new(n, 0.0)?,
        (None, Some(p)) => p,
        (None, None) => return usage("no N given: pass --N or add a '# N=<n>' header"),
    };
    let n = params.n();
    let f = SampledFunction::radial(radii.clone(), values.clone())?;
    let star = symmetric_rearrangement(&f, n)?;
    let (grad_before, grad_after) = polya_szego_check(&f, n)?;
    let omega = omega_sphere(n)?;
    let nf = n as f64;
    let lp_norms = [1.0, nf, 2.0 * nf]
        .iter()
        .map(|&p| {
            let g = |v: f64| v.abs().powf(p);
            (p, weighted_integral(omega, &radii, &values, nf, g), weighted_integral(omega, star.radii(), star.values(), nf, g))
        })
        .collect();
    let top = star.sup();
    let star_f = SampledFunction::from_profile(&star);
    let mut distribution = Vec::new();
    for k in 0..10 {
        let t = top * k as f64 / 10.0;
        distribution.push((t, distribution_function(&f, n, t)?, distribution_function(&star_f, n, t)?));
    }
    let results = RearrangeResults { n, grad_before, grad_after, lp_norms, distribution };
    emit(&a.out, config("rearrange", a), results, Some(profile_to_csv(&star, &params)))
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = match v.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))
}

fn run(cli: &Cli) -> CliResult<bool> {
    init_threads()?;
    match &cli.command {
        Command::Green(a) => cmd_green(a).map(|_| true),
        Command::Limits(a) => cmd_limits(a).map(|_| true),
        Command::Aux1d(a) => cmd_aux(a).map(|_| true),
        Command::Optimize(a) => cmd_optimize(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Rearrange(a) => cmd_rearrange(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let body = serde_json::json!({ "error": { "kind": e.kind(), "message": e.message() } });
            eprintln!("{body}");
            ExitCode::from(e.exit_code())
        }
    }
}
