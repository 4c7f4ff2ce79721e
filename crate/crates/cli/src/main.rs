//! `ergm-phase`: exact, asymptotic and Monte Carlo analysis of the
//! directed edge/out-star exponential random graph ensemble, exposed as
//! plotting-friendly CSV/JSON subcommands.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ergm_core::asymptotics::limiting_values_for;
use ergm_core::curve::{self, classify_point};
use ergm_core::ensemble::free_energy_density;
use ergm_core::model::{critical_point, ModelParams, Regime};
use ergm_core::sampler::scaling_study;
use ergm_core::Error as CoreError;

use output::{emit, render_csv, render_json, Table, Value};

/// Default RNG seed when neither `--seed` nor `ERGM_PHASE_SEED` is set.
const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParams(_) | CoreError::Domain { .. } => Self {
                code: 2,
                message: e.to_string(),
            },
            _ => Self {
                code: 3,
                message: e.to_string(),
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ergm-phase",
    version,
    about = "Exact and asymptotic analysis of a directed random graph ensemble \
             with edge and out-star statistics",
    after_help = "The environment variable ERGM_PHASE_SEED overrides the default \
                  seed (0x5EED = 24301); --seed wins over the environment."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact free energy density per n against its limit.
    ///
    /// Columns: n, psi_n, psi_limit, gap, bound. The bound column is the
    /// reference envelope 5 ln(n) / n for the finite-size gap.
    FreeEnergy(FreeEnergyArgs),
    /// Classify a parameter point and report its limiting constants.
    ///
    /// Columns: regime, beta1, beta2, p, x1, x2, psi_limit,
    /// var_edge_limit, var_star_limit, cov_limit, scale_exponent,
    /// edge_prob_limit, mixture_weight. x2 and mixture_weight are only
    /// present for two-phase points.
    Classify(ClassifyArgs),
    /// Trace the phase transition curve beta2 = q(beta1).
    ///
    /// Columns: beta1, beta2, x_low, x_high, slope, residual. Grid
    /// points at or above the critical beta1 are skipped with a warning.
    Curve(CurveArgs),
    /// Exact vs Monte Carlo vs predicted variance scaling over n.
    ///
    /// Columns: n, exact_var_edge, exact_var_star, exact_cov,
    /// mc_var_edge, mc_var_edge_se, mc_var_star, mc_var_star_se, mc_cov,
    /// mc_cov_se, pred_var_edge, pred_var_star, pred_cov,
    /// scale_exponent.
    Scaling(ScalingArgs),
    /// Run the built-in self-check suite (exit 1 on any failure).
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    /// Edge parameter.
    #[arg(long, allow_negative_numbers = true)]
    beta1: f64,
    /// Star parameter.
    #[arg(long, allow_negative_numbers = true)]
    beta2: f64,
    /// Star order (integer >= 2).
    #[arg(long)]
    p: u32,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.beta1, self.beta2, self.p)?)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write atomically to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !(v.is_finite() && (1.0..=1e18).contains(&v) && v.fract() == 0.0) {
        return Err(format!("`{s}` is not a positive integer count"));
    }
    Ok(v as u64)
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let mut grid = Vec::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        grid.push(parse_count(piece)?);
    }
    if grid.is_empty() {
        return Err("empty n grid".into());
    }
    Ok(Grid(grid))
}

#[derive(Clone, Debug)]
struct Grid(Vec<u64>);

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SizeArgs {
    /// Single node count (scientific notation accepted).
    #[arg(long, value_parser = parse_count)]
    n: Option<u64>,
    /// Comma-separated node counts (scientific notation accepted).
    #[arg(long = "n-grid", value_parser = parse_grid)]
    n_grid: Option<Grid>,
}

impl SizeArgs {
    fn counts(&self) -> Vec<u64> {
        match (&self.n, &self.n_grid) {
            (Some(n), _) => vec![*n],
            (None, Some(g)) => g.0.clone(),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args)]
struct FreeEnergyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    size: SizeArgs,
    /// Absolute x accuracy of the maximizer solve.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Tolerance for curve/critical classification.
    #[arg(long = "curve-tol", default_value_t = 1e-10)]
    curve_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Tolerance for curve/critical classification.
    #[arg(long = "curve-tol", default_value_t = 1e-10)]
    curve_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CurveArgs {
    /// Star order (integer >= 2).
    #[arg(long)]
    p: u32,
    /// Starting beta1 (the larger value).
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    /// Final beta1 (the smaller value).
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    /// Step in beta1 (positive; the trace marches downward).
    #[arg(long)]
    step: f64,
    /// Equal-height tolerance of the curve solve.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Comma-separated ascending node counts.
    #[arg(long = "n-grid", value_parser = parse_grid)]
    n_grid: Grid,
    /// Monte Carlo replicas per grid cell.
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    /// RNG seed (decimal; falls back to ERGM_PHASE_SEED, then 0x5EED).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip the checks that need n >= 1e5.
    #[arg(long)]
    quick: bool,
    #[arg(long, hide = true)]
    inject_bad_gamma: bool,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("ERGM_PHASE_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::usage(format!("ERGM_PHASE_SEED=`{v}` is not a u64"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn emit_table(table: &Table, output: &OutputArgs) -> Result<(), CliError> {
    let text = match output.format {
        Format::Csv => render_csv(table),
        Format::Json => render_json(table)?,
    };
    emit(&text, output.out.as_deref())
}

fn cmd_free_energy(args: &FreeEnergyArgs) -> Result<(), CliError> {
    let params = args.params.build()?;
    let cls = ergm_core::model::classify_with(&params, args.tol, args.curve_tol)?;
    let psi_limit = cls.max_potential;
    let mut table = Table::new(vec!["n", "psi_n", "psi_limit", "gap", "bound"]);
    for n in args.size.counts() {
        let psi = free_energy_density(&params, n)?;
        let nf = n as f64;
        table.push(vec![
            Value::Int(n),
            Value::Float(psi),
            Value::Float(psi_limit),
            Value::Float((psi - psi_limit).abs()),
            Value::Float(5.0 * nf.ln() / nf),
        ]);
    }
    emit_table(&table, &args.output)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let params = args.params.build()?;
    let cls = classify_point(&params, args.curve_tol)?;
    let limits = limiting_values_for(&cls, &params);
    let (regime, x1, x2) = match cls.regime {
        Regime::OffCurve { maximizer } => ("off-curve", maximizer, None),
        Regime::OnCurve { lower, upper } => ("on-curve", lower, Some(upper)),
        Regime::Critical { maximizer } => ("critical", maximizer, None),
    };
    let mut table = Table::new(vec![
        "regime",
        "beta1",
        "beta2",
        "p",
        "x1",
        "x2",
        "psi_limit",
        "var_edge_limit",
        "var_star_limit",
        "cov_limit",
        "scale_exponent",
        "edge_prob_limit",
        "mixture_weight",
    ]);
    table.push(vec![
        Value::Str(regime),
        Value::Float(params.beta1()),
        Value::Float(params.beta2()),
        Value::Int(params.p() as u64),
        Value::Float(x1),
        x2.map_or(Value::Missing, Value::Float),
        Value::Float(limits.free_energy_limit),
        Value::Float(limits.var_edge),
        Value::Float(limits.var_star),
        Value::Float(limits.cov_edge_star),
        Value::Float(limits.scale_exponent),
        Value::Float(limits.edge_prob),
        limits.mixture_weight.map_or(Value::Missing, Value::Float),
    ]);
    emit_table(&table, &args.output)
}

fn cmd_curve(args: &CurveArgs) -> Result<(), CliError> {
    if !args.step.is_finite() || args.step <= 0.0 {
        return Err(CliError::usage("--step must be positive"));
    }
    if !args.to.is_finite() || args.to >= args.from {
        return Err(CliError::usage("--to must be below --from"));
    }
    let (b1c, _) = critical_point(args.p)?;
    let ceiling = b1c - curve::NEAR_CRITICAL_CUTOFF;
    // Drop leading grid points at or above the critical beta1.
    let mut skipped = 0u64;
    let mut start = None;
    let mut k = 0u64;
    loop {
        let b1 = args.from - k as f64 * args.step;
        if b1 < args.to - 1e-9 * args.to.abs().max(1.0) {
            break;
        }
        if b1 < ceiling {
            start = Some(b1);
            break;
        }
        skipped += 1;
        k += 1;
    }
    if skipped > 0 {
        // Slope of the curve at its (excluded) critical endpoint:
        // -p^(p-2)/(p-1)^(p-1).
        let pf = args.p as f64;
        let limit_slope = -pf.powi(args.p as i32 - 2) / (pf - 1.0).powi(args.p as i32 - 1);
        eprintln!(
            "warning: skipped {skipped} grid point(s) with beta1 above {ceiling:.6}; \
             the transition curve only exists below the critical point ({b1c:.6}), \
             where its slope approaches {limit_slope:.6}"
        );
    }
    let Some(start) = start else {
        return Err(CliError::usage(
            "no grid points lie below the critical beta1; nothing to trace",
        ));
    };
    let points = curve::trace_curve_with_tol(args.p, start, args.to, args.step, args.tol)?;
    let mut table = Table::new(vec!["beta1", "beta2", "x_low", "x_high", "slope", "residual"]);
    for pt in &points {
        table.push(vec![
            Value::Float(pt.beta1),
            Value::Float(pt.beta2),
            Value::Float(pt.x_low),
            Value::Float(pt.x_high),
            Value::Float(pt.slope),
            Value::Float(pt.residual),
        ]);
    }
    emit_table(&table, &args.output)
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), CliError> {
    let params = args.params.build()?;
    let seed = resolve_seed(args.seed)?;
    let records = scaling_study(&params, &args.n_grid.0, args.replicas, seed)?;
    let mut table = Table::new(vec![
        "n",
        "exact_var_edge",
        "exact_var_star",
        "exact_cov",
        "mc_var_edge",
        "mc_var_edge_se",
        "mc_var_star",
        "mc_var_star_se",
        "mc_cov",
        "mc_cov_se",
        "pred_var_edge",
        "pred_var_star",
        "pred_cov",
        "scale_exponent",
    ]);
    for r in &records {
        table.push(vec![
            Value::Int(r.n),
            Value::Float(r.exact.d2_edge),
            Value::Float(r.exact.d2_star),
            Value::Float(r.exact.d2_mixed),
            Value::Float(r.mc.var_edge_scaled),
            Value::Float(r.mc.se_var_edge),
            Value::Float(r.mc.var_star_scaled),
            Value::Float(r.mc.se_var_star),
            Value::Float(r.mc.cov_scaled),
            Value::Float(r.mc.se_cov),
            Value::Float(r.predicted_var_edge),
            Value::Float(r.predicted_var_star),
            Value::Float(r.predicted_cov),
            Value::Float(r.scale_exponent),
        ]);
    }
    emit_table(&table, &args.output)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::FreeEnergy(args) => cmd_free_energy(args).map(|()| ExitCode::SUCCESS),
        Command::Classify(args) => cmd_classify(args).map(|()| ExitCode::SUCCESS),
        Command::Curve(args) => cmd_curve(args).map(|()| ExitCode::SUCCESS),
        Command::Scaling(args) => cmd_scaling(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => {
            let failures = verify::run(&verify::Options {
                quick: args.quick,
                inject_bad_gamma: args.inject_bad_gamma,
            });
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
