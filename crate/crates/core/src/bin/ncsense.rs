//! Batch experiment runner for the sensing library.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ncsense::config::{load_config, SimulationConfig, ValidationOutcome, VelocityDurationMode};
use ncsense::error::{Error, Result};
use ncsense::estimators::Method;
use ncsense::runner::{
    estimate_csv, estimate_json, run_estimate, run_sweep, run_tables, write_json,
    write_spectra, write_with_timestamp, EstimateOutcome, LambdaSource, Scenario, SweepSpec,
    TablesSpec,
};
use ncsense::tuning::{kcv_summary_csv, KcvOutcome};

#[derive(Parser)]
#[command(
    name = "ncsense",
    version,
    about = "Range/velocity estimation experiments for OFDM sensing on non-continuous spectrum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate range and velocity once per method at a single SNR.
    Estimate(EstimateArgs),
    /// Monte-Carlo RMSE sweep over a list of SNRs.
    Sweep(SweepArgs),
    /// Closed-form resolutions, RMSE bounds, and SNR-gain tables.
    Tables(TablesArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (key = value lines); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set n_symbols=28. Repeatable;
    /// applied after --config in the order given.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Velocity reporting duration: "symbol" (total symbol incl. prefix) or
    /// "elementary". Applied last.
    #[arg(long, value_name = "MODE")]
    duration_mode: Option<String>,

    /// Also write a JSON mirror next to every CSV output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Occupancy plan: s1, s2, or file:PATH.
    #[arg(long, default_value = "s1")]
    scenario: String,

    /// Signal-to-noise ratio in dB.
    #[arg(long = "snr-db", default_value_t = 10.0, allow_hyphen_values = true)]
    snr_db: f64,

    /// Base RNG seed for the noise draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Comma-separated methods: jcmsa, masked-2dfft, plain-2dfft.
    #[arg(long, default_value = "jcmsa", value_delimiter = ',')]
    method: Vec<String>,

    /// Sparsity weight: a number, "table", or "tune".
    #[arg(long, default_value = "table", allow_hyphen_values = true)]
    lambda: String,

    /// Write the reports to this CSV path (JSON mirror with --json).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write each accumulated spectrum as CSV (requires --out).
    #[arg(long)]
    emit_spectra: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Occupancy plan: s1, s2, or file:PATH.
    #[arg(long, default_value = "s1")]
    scenario: String,

    /// Comma-separated SNRs in dB, e.g. --snr-db=-30,-20,-10,0,10.
    #[arg(
        long = "snr-db",
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    snr_db: Vec<f64>,

    /// Independent noise draws per (SNR, method).
    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Base seed; per-trial seeds derive from it deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Comma-separated methods to compare on identical noise draws.
    #[arg(
        long,
        default_value = "jcmsa,masked-2dfft,plain-2dfft",
        value_delimiter = ','
    )]
    method: Vec<String>,

    /// Sparsity weight: a number, "table", or "tune" (tuned once per SNR).
    #[arg(long, default_value = "table", allow_hyphen_values = true)]
    lambda: String,

    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv", value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated solver-gain values for the gain table.
    #[arg(long, default_value = "0,1,10", value_delimiter = ',')]
    varpi: Vec<f64>,

    /// Comma-separated noise variances for the gain table.
    #[arg(long, default_value = "0.1,1,10", value_delimiter = ',')]
    sigma2: Vec<f64>,

    /// Skip the gain table and emit resolutions and bounds only.
    #[arg(long)]
    no_gains: bool,

    /// Output CSV path.
    #[arg(long, default_value = "tables.csv", value_name = "PATH")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Tables(args) => cmd_tables(args),
    }
}

fn load_cfg(common: &CommonArgs) -> Result<SimulationConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => SimulationConfig::default(),
    };
    for assignment in &common.set {
        cfg.apply_override(assignment)?;
    }
    if let Some(mode) = &common.duration_mode {
        cfg.velocity_duration_mode = VelocityDurationMode::parse(mode)?;
    }
    if let ValidationOutcome::Violations(list) = cfg.validate() {
        return Err(Error::Config(format!(
            "invalid configuration: {}",
            list.join("; ")
        )));
    }
    Ok(cfg)
}

fn parse_methods(tokens: &[String]) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for token in tokens {
        let method = Method::parse(token)?;
        if !methods.contains(&method) {
            methods.push(method);
        }
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument("at least one method is required".into()));
    }
    Ok(methods)
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6}")
    }
}

fn print_outcome(outcome: &EstimateOutcome) {
    let lambdas = match (outcome.lambda_range, outcome.lambda_velocity) {
        (Some(lr), Some(lv)) => format!(" lambda_range={lr} lambda_velocity={lv}"),
        _ => String::new(),
    };
    println!(
        "method={} snr_db={} seed={}{}",
        outcome.method, outcome.snr_db, outcome.seed, lambdas
    );
    println!(
        "  range: estimate={} m bin={} psr_db={} solver_iters={}",
        fmt(outcome.range.estimate),
        outcome.range.peak_bin,
        fmt(outcome.range.psr_db),
        outcome.range.solver_iters_total
    );
    println!(
        "  velocity: estimate={} m/s bin={} psr_db={} solver_iters={}",
        fmt(outcome.velocity.estimate),
        outcome.velocity.peak_bin,
        fmt(outcome.velocity.psr_db),
        outcome.velocity.solver_iters_total
    );
}

fn write_kcv(
    stem: &std::path::Path,
    method: Method,
    axis: &str,
    outcome: &KcvOutcome,
) -> Result<()> {
    let base = stem.with_extension("");
    let path = PathBuf::from(format!("{}_{}_kcv_{}.csv", base.display(), method, axis));
    write_with_timestamp(&path, &kcv_summary_csv(outcome))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let cfg = load_cfg(&args.common)?;
    let scenario: Scenario = args.scenario.parse()?;
    let lambda: LambdaSource = args.lambda.parse()?;
    let methods = parse_methods(&args.method)?;
    if args.emit_spectra && args.out.is_none() {
        return Err(Error::InvalidArgument(
            "--emit-spectra needs --out to name the spectrum files".into(),
        ));
    }

    let mut outcomes = Vec::new();
    for method in methods {
        let outcome = run_estimate(&cfg, &scenario, args.snr_db, method, &lambda, args.seed)?;
        print_outcome(&outcome);
        outcomes.push(outcome);
    }

    if let Some(out) = &args.out {
        write_with_timestamp(out, &estimate_csv(&outcomes))?;
        println!("wrote {}", out.display());
        if args.common.json {
            let json = serde_json::Value::Array(outcomes.iter().map(estimate_json).collect());
            let json_path = out.with_extension("json");
            write_json(&json_path, &json)?;
            println!("wrote {}", json_path.display());
        }
        for outcome in &outcomes {
            if args.emit_spectra {
                for path in write_spectra(outcome, &cfg, out)? {
                    println!("wrote {}", path.display());
                }
            }
            if let Some(kcv) = &outcome.kcv_range {
                write_kcv(out, outcome.method, "range", kcv)?;
            }
            if let Some(kcv) = &outcome.kcv_velocity {
                write_kcv(out, outcome.method, "velocity", kcv)?;
            }
        }
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = load_cfg(&args.common)?;
    let spec = SweepSpec {
        snr_db_list: args.snr_db.clone(),
        trials: args.trials,
        scenario: args.scenario.parse()?,
        methods: parse_methods(&args.method)?,
        lambda_source: args.lambda.parse()?,
        output_path: args.out.clone(),
    };
    let rows = run_sweep(&spec, &cfg, args.seed, args.common.json)?;
    for row in &rows {
        println!(
            "snr_db={} method={} rmse_range_m={} rmse_velocity_mps={} failures={}/{}",
            row.snr_db,
            row.method,
            fmt(row.rmse_range_m),
            fmt(row.rmse_velocity_mps),
            row.failures,
            row.trials
        );
    }
    println!("wrote {}", args.out.display());
    if args.common.json {
        println!("wrote {}", args.out.with_extension("json").display());
    }
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> Result<()> {
    let cfg = load_cfg(&args.common)?;
    let spec = TablesSpec {
        sigma2_list: args.sigma2.clone(),
        varpi_list: args.varpi.clone(),
        include_gains: !args.no_gains,
        output_path: args.out.clone(),
    };
    let out = run_tables(&spec, &cfg, args.common.json)?;
    for (method, r, v) in &out.resolutions {
        println!("resolution method={method} range_m={} velocity_mps={}", fmt(*r), fmt(*v));
    }
    for (mode, b) in &out.bounds {
        println!(
            "rmse_bounds mode={} range=[{}, {}] velocity=[{}, {}]",
            mode.as_str(),
            fmt(b.range_lower_m),
            fmt(b.range_upper_m),
            fmt(b.velocity_lower_mps),
            fmt(b.velocity_upper_mps)
        );
    }
    if !out.gains.is_empty() {
        println!("gain rows: {}", out.gains.len());
    }
    println!("wrote {}", args.out.display());
    if args.common.json {
        println!("wrote {}", args.out.with_extension("json").display());
    }
    Ok(())
}
