//! End-to-end pipelines: single estimates, Monte-Carlo SNR sweeps, and
//! analytic tables, with CSV and JSON emission.
//!
//! A pipeline run is deterministic given its base seed. Trial seeds derive
//! from the base through a counter mix, so any single trial can be reproduced
//! in isolation, and every method at a given (SNR, trial) sees the same noise
//! draw. Output files open with a `# generated_unix` header line; everything
//! below it is byte-reproducible.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Number, Value};

use crate::channel::{apply_mask, synthesize, ChannelMatrix, TargetTruth};
use crate::config::{SimulationConfig, ValidationOutcome, VelocityDurationMode};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_plain_2dfft, estimate_range_jcmsa, estimate_range_masked2dfft,
    estimate_velocity_jcmsa, estimate_velocity_masked2dfft, spectrum_csv, EstimationReport,
    Method, SpectrumAxis,
};
use crate::fista::FistaConfig;
use crate::lambda::{table_lambda, TableScenario};
use crate::metrics::{
    gain_range, gain_velocity, resolution, rmse, rmse_bounds, GainParams, RmseBounds,
};
use crate::occupancy::{load_mask_csv, scenario1_mask, scenario2_mask, OccupancyMask};
use crate::tuning::{build_problem_set, kcv_select_lambda, KcvOutcome, LambdaGrid};

/// Which occupancy plan an experiment runs under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scenario {
    /// Static edge bands on every symbol.
    S1,
    /// Edge bands for the first half-frame, complementary center band after.
    S2,
    /// Mask loaded from a CSV file.
    File(PathBuf),
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::S1 => "s1".into(),
            Scenario::S2 => "s2".into(),
            Scenario::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            _ => {
                if let Some(path) = s.strip_prefix("file:") {
                    if path.is_empty() {
                        return Err(Error::InvalidArgument(
                            "file: scenario needs a path after the colon".into(),
                        ));
                    }
                    Ok(Scenario::File(PathBuf::from(path)))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "unknown scenario '{s}'; expected s1, s2, or file:PATH"
                    )))
                }
            }
        }
    }
}

/// Where the sparse solver's weight comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSource {
    /// One value applied to both axes.
    Fixed(f64),
    /// Built-in per-scenario, per-SNR table.
    Table,
    /// K-fold cross validation on the observed matrix.
    Tune,
}

impl LambdaSource {
    pub fn label(&self) -> String {
        match self {
            LambdaSource::Fixed(v) => format!("{v}"),
            LambdaSource::Table => "table".into(),
            LambdaSource::Tune => "tune".into(),
        }
    }
}

impl FromStr for LambdaSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(LambdaSource::Table),
            "tune" => Ok(LambdaSource::Tune),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(LambdaSource::Fixed)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "lambda must be 'table', 'tune', or a nonnegative number, got '{s}'"
                    ))
                }),
        }
    }
}

/// Materialize the mask for a scenario, checking file masks against the
/// configured dimensions.
pub fn build_mask(cfg: &SimulationConfig, scenario: &Scenario) -> Result<OccupancyMask> {
    match scenario {
        Scenario::S1 => scenario1_mask(cfg),
        Scenario::S2 => scenario2_mask(cfg),
        Scenario::File(path) => {
            let mask = load_mask_csv(path)?;
            if mask.rows() != cfg.n_subcarriers || mask.cols() != cfg.n_symbols {
                return Err(Error::Shape(format!(
                    "mask file is {}x{} but the configuration needs {}x{}",
                    mask.rows(),
                    mask.cols(),
                    cfg.n_subcarriers,
                    cfg.n_symbols
                )));
            }
            Ok(mask)
        }
    }
}

/// Counter mix for per-trial seeds; a small change in either input flips
/// about half the output bits.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_config(cfg: &SimulationConfig) -> Result<()> {
    if let ValidationOutcome::Violations(list) = cfg.validate() {
        return Err(Error::Config(format!(
            "invalid configuration: {}",
            list.join("; ")
        )));
    }
    Ok(())
}

fn table_scenario(scenario: &Scenario) -> Result<TableScenario> {
    match scenario {
        Scenario::S1 => Ok(TableScenario::Scenario1),
        Scenario::S2 => Ok(TableScenario::Scenario2),
        Scenario::File(_) => Err(Error::Tuning(
            "no built-in weight table for custom occupancy masks; pass a numeric value or tune"
                .into(),
        )),
    }
}

/// Resolved sparsity weight for one axis, with the tuning record when cross
/// validation produced it.
#[allow(clippy::too_many_arguments)]
fn resolve_lambda(
    source: &LambdaSource,
    scenario: &Scenario,
    axis: SpectrumAxis,
    snr_db: f64,
    masked: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
    truth: &TargetTruth,
) -> Result<(f64, Option<KcvOutcome>)> {
    match source {
        LambdaSource::Fixed(v) => Ok((*v, None)),
        LambdaSource::Table => {
            Ok((table_lambda(table_scenario(scenario)?, axis, snr_db)?, None))
        }
        LambdaSource::Tune => {
            let problems = build_problem_set(masked, mask, cfg, truth, axis)?;
            let grid = match axis {
                SpectrumAxis::Range => LambdaGrid::range_default(),
                SpectrumAxis::Velocity => LambdaGrid::velocity_default(),
            };
            let outcome =
                kcv_select_lambda(&problems, &grid, cfg.kcv_folds, &FistaConfig::new(0.0))?;
            Ok((outcome.best_lambda, Some(outcome)))
        }
    }
}

/// One method's range and velocity reports for one synthesized observation.
#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub method: Method,
    pub snr_db: f64,
    pub seed: u64,
    pub lambda_range: Option<f64>,
    pub lambda_velocity: Option<f64>,
    pub kcv_range: Option<KcvOutcome>,
    pub kcv_velocity: Option<KcvOutcome>,
    pub range: EstimationReport,
    pub velocity: EstimationReport,
}

fn estimate_with_method(
    method: Method,
    masked: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
    lambda_range: f64,
    lambda_velocity: f64,
) -> Result<(EstimationReport, EstimationReport)> {
    match method {
        Method::Jcmsa => {
            let range =
                estimate_range_jcmsa(masked, mask, cfg, &FistaConfig::new(lambda_range))?;
            let velocity =
                estimate_velocity_jcmsa(masked, mask, cfg, &FistaConfig::new(lambda_velocity))?;
            Ok((range, velocity))
        }
        Method::Masked2dfft => {
            let range = estimate_range_masked2dfft(masked, mask, cfg)?;
            let velocity = estimate_velocity_masked2dfft(masked, mask, cfg)?;
            Ok((range, velocity))
        }
        Method::Plain2dfft => estimate_plain_2dfft(masked, cfg),
    }
}

/// Full single-shot pipeline: build the mask, synthesize one noisy
/// observation, mask it, resolve the sparsity weight, and estimate both axes
/// with the requested method.
pub fn run_estimate(
    cfg: &SimulationConfig,
    scenario: &Scenario,
    snr_db: f64,
    method: Method,
    lambda_source: &LambdaSource,
    seed: u64,
) -> Result<EstimateOutcome> {
    check_config(cfg)?;
    let mask = build_mask(cfg, scenario)?;
    let truth = TargetTruth::from_config(cfg);
    let masked = apply_mask(&synthesize(cfg, &truth, snr_db, seed), &mask)?;

    let (lambda_range, lambda_velocity, kcv_range, kcv_velocity) = if method == Method::Jcmsa {
        let (lr, kr) = resolve_lambda(
            lambda_source,
            scenario,
            SpectrumAxis::Range,
            snr_db,
            &masked,
            &mask,
            cfg,
            &truth,
        )?;
        let (lv, kv) = resolve_lambda(
            lambda_source,
            scenario,
            SpectrumAxis::Velocity,
            snr_db,
            &masked,
            &mask,
            cfg,
            &truth,
        )?;
        (Some(lr), Some(lv), kr, kv)
    } else {
        (None, None, None, None)
    };

    let (range, velocity) = estimate_with_method(
        method,
        &masked,
        &mask,
        cfg,
        lambda_range.unwrap_or(0.0),
        lambda_velocity.unwrap_or(0.0),
    )?;
    Ok(EstimateOutcome {
        method,
        snr_db,
        seed,
        lambda_range,
        lambda_velocity,
        kcv_range,
        kcv_velocity,
        range,
        velocity,
    })
}

/// Monte-Carlo sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub lambda_source: LambdaSource,
    pub output_path: PathBuf,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("sweep needs at least one trial".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one SNR".into()));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("sweep SNRs must be finite".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one method".into()));
        }
        Ok(())
    }
}

/// Aggregated results for one (SNR, method) cell.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: Method,
    pub trials: usize,
    /// Trials whose estimation failed (for example a zero spectrum); they are
    /// excluded from every aggregate in the row.
    pub failures: usize,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    pub mean_psr_range_db: f64,
    pub mean_psr_velocity_db: f64,
    /// Mean of per-trial total solver iterations (both axes combined).
    pub mean_iterations: f64,
    pub lambda_range: Option<f64>,
    pub lambda_velocity: Option<f64>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Run the sweep and write its CSV (and JSON mirror when asked). Rows are
/// also returned for programmatic use, sorted by (SNR, method).
pub fn run_sweep(
    spec: &SweepSpec,
    cfg: &SimulationConfig,
    base_seed: u64,
    emit_json: bool,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    check_config(cfg)?;
    let mask = build_mask(cfg, &spec.scenario)?;
    let truth = TargetTruth::from_config(cfg);
    let needs_lambda = spec.methods.contains(&Method::Jcmsa);

    let mut rows = Vec::new();
    for (si, &snr_db) in spec.snr_db_list.iter().enumerate() {
        // The weight is resolved once per SNR. Tuning uses the first trial's
        // observation as its dataset, mirroring how the tables were built.
        let (lambda_range, lambda_velocity) = if needs_lambda {
            let seed0 = derive_seed(base_seed, (si as u64) << 32);
            let masked0 = apply_mask(&synthesize(cfg, &truth, snr_db, seed0), &mask)?;
            let (lr, _) = resolve_lambda(
                &spec.lambda_source,
                &spec.scenario,
                SpectrumAxis::Range,
                snr_db,
                &masked0,
                &mask,
                cfg,
                &truth,
            )?;
            let (lv, _) = resolve_lambda(
                &spec.lambda_source,
                &spec.scenario,
                SpectrumAxis::Velocity,
                snr_db,
                &masked0,
                &mask,
                cfg,
                &truth,
            )?;
            (Some(lr), Some(lv))
        } else {
            (None, None)
        };

        struct Cell {
            range_estimates: Vec<f64>,
            velocity_estimates: Vec<f64>,
            psr_range: Vec<f64>,
            psr_velocity: Vec<f64>,
            iters: Vec<f64>,
            failures: usize,
        }
        let mut cells: Vec<Cell> = spec
            .methods
            .iter()
            .map(|_| Cell {
                range_estimates: Vec::new(),
                velocity_estimates: Vec::new(),
                psr_range: Vec::new(),
                psr_velocity: Vec::new(),
                iters: Vec::new(),
                failures: 0,
            })
            .collect();

        for trial in 0..spec.trials {
            let seed = derive_seed(base_seed, ((si as u64) << 32) | trial as u64);
            let masked = apply_mask(&synthesize(cfg, &truth, snr_db, seed), &mask)?;
            for (mi, &method) in spec.methods.iter().enumerate() {
                match estimate_with_method(
                    method,
                    &masked,
                    &mask,
                    cfg,
                    lambda_range.unwrap_or(0.0),
                    lambda_velocity.unwrap_or(0.0),
                ) {
                    Ok((r, v)) => {
                        let cell = &mut cells[mi];
                        cell.range_estimates.push(r.estimate);
                        cell.velocity_estimates.push(v.estimate);
                        cell.psr_range.push(r.psr_db);
                        cell.psr_velocity.push(v.psr_db);
                        cell.iters
                            .push((r.solver_iters_total + v.solver_iters_total) as f64);
                    }
                    Err(_) => cells[mi].failures += 1,
                }
            }
        }

        for (mi, &method) in spec.methods.iter().enumerate() {
            let cell = &cells[mi];
            let is_sparse = method == Method::Jcmsa;
            rows.push(SweepRow {
                snr_db,
                method,
                trials: spec.trials,
                failures: cell.failures,
                rmse_range_m: if cell.range_estimates.is_empty() {
                    f64::NAN
                } else {
                    rmse(&cell.range_estimates, cfg.target_range_m)
                },
                rmse_velocity_mps: if cell.velocity_estimates.is_empty() {
                    f64::NAN
                } else {
                    rmse(&cell.velocity_estimates, cfg.target_velocity_mps)
                },
                mean_psr_range_db: mean(&cell.psr_range),
                mean_psr_velocity_db: mean(&cell.psr_velocity),
                mean_iterations: mean(&cell.iters),
                lambda_range: if is_sparse { lambda_range } else { None },
                lambda_velocity: if is_sparse { lambda_velocity } else { None },
            });
        }
    }

    rows.sort_by(|a, b| {
        a.snr_db
            .partial_cmp(&b.snr_db)
            .unwrap()
            .then_with(|| a.method.as_str().cmp(b.method.as_str()))
    });

    let csv = sweep_csv(&rows);
    write_with_timestamp(&spec.output_path, &csv)?;
    if emit_json {
        let json = Value::Array(rows.iter().map(sweep_row_json).collect());
        write_json(&spec.output_path.with_extension("json"), &json)?;
    }
    Ok(rows)
}

/// Analytic-table request: which noise variances and solver gains to grid.
#[derive(Debug, Clone)]
pub struct TablesSpec {
    pub sigma2_list: Vec<f64>,
    pub varpi_list: Vec<f64>,
    pub include_gains: bool,
    pub output_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct GainRow {
    pub axis: SpectrumAxis,
    pub method: Method,
    pub sigma2: f64,
    pub varpi: f64,
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct TablesOutput {
    /// (method, range resolution in meters, velocity resolution in m/s).
    pub resolutions: Vec<(Method, f64, f64)>,
    /// Quantization bounds under each velocity duration mode.
    pub bounds: Vec<(VelocityDurationMode, RmseBounds)>,
    pub gains: Vec<GainRow>,
}

/// Evaluate the closed-form tables and write them.
pub fn run_tables(
    spec: &TablesSpec,
    cfg: &SimulationConfig,
    emit_json: bool,
) -> Result<TablesOutput> {
    check_config(cfg)?;
    let methods = [Method::Jcmsa, Method::Masked2dfft, Method::Plain2dfft];
    let resolutions: Vec<(Method, f64, f64)> = methods
        .iter()
        .map(|&m| {
            let (r, v) = resolution(cfg, m);
            (m, r, v)
        })
        .collect();

    let mut bounds = Vec::new();
    for mode in [VelocityDurationMode::SymbolTotal, VelocityDurationMode::Elementary] {
        let mode_cfg = SimulationConfig { velocity_duration_mode: mode, ..cfg.clone() };
        bounds.push((mode, rmse_bounds(&mode_cfg)));
    }

    let mut gains = Vec::new();
    if spec.include_gains {
        for axis in [SpectrumAxis::Range, SpectrumAxis::Velocity] {
            for &method in &methods {
                for &sigma2 in &spec.sigma2_list {
                    for &varpi in &spec.varpi_list {
                        let params = GainParams {
                            m_sym: cfg.n_symbols,
                            n_occ: cfg.n_occupied,
                            n_sub: cfg.n_subcarriers,
                            noise_var: sigma2,
                            fista_gain: varpi,
                        };
                        let gain = match axis {
                            SpectrumAxis::Range => gain_range(&params, method)?,
                            SpectrumAxis::Velocity => gain_velocity(&params, method)?,
                        };
                        gains.push(GainRow { axis, method, sigma2, varpi, gain });
                    }
                }
            }
        }
    }

    let out = TablesOutput { resolutions, bounds, gains };
    write_with_timestamp(&spec.output_path, &tables_csv(&out))?;
    if emit_json {
        write_json(&spec.output_path.with_extension("json"), &tables_json(&out))?;
    }
    Ok(out)
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// CSV body for sweep rows (no timestamp line).
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "snr_db,method,trials,failures,rmse_range_m,rmse_velocity_mps,\
         mean_psr_range_db,mean_psr_velocity_db,mean_iterations,lambda_range,lambda_velocity\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.snr_db),
            r.method,
            r.trials,
            r.failures,
            fmt_f64(r.rmse_range_m),
            fmt_f64(r.rmse_velocity_mps),
            fmt_f64(r.mean_psr_range_db),
            fmt_f64(r.mean_psr_velocity_db),
            fmt_f64(r.mean_iterations),
            fmt_opt(r.lambda_range),
            fmt_opt(r.lambda_velocity),
        ));
    }
    out
}

fn number(v: f64) -> Value {
    Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn opt_number(v: Option<f64>) -> Value {
    v.map(number).unwrap_or(Value::Null)
}

fn sweep_row_json(r: &SweepRow) -> Value {
    let mut map = Map::new();
    map.insert("snr_db".into(), number(r.snr_db));
    map.insert("method".into(), Value::String(r.method.as_str().into()));
    map.insert("trials".into(), Value::from(r.trials));
    map.insert("failures".into(), Value::from(r.failures));
    map.insert("rmse_range_m".into(), number(r.rmse_range_m));
    map.insert("rmse_velocity_mps".into(), number(r.rmse_velocity_mps));
    map.insert("mean_psr_range_db".into(), number(r.mean_psr_range_db));
    map.insert("mean_psr_velocity_db".into(), number(r.mean_psr_velocity_db));
    map.insert("mean_iterations".into(), number(r.mean_iterations));
    map.insert("lambda_range".into(), opt_number(r.lambda_range));
    map.insert("lambda_velocity".into(), opt_number(r.lambda_velocity));
    Value::Object(map)
}

fn report_json(r: &EstimationReport) -> Value {
    let mut map = Map::new();
    map.insert("estimate".into(), number(r.estimate));
    map.insert("peak_bin".into(), Value::from(r.peak_bin));
    map.insert("psr_db".into(), number(r.psr_db));
    map.insert("solver_iters_total".into(), Value::from(r.solver_iters_total));
    map.insert("contributing".into(), Value::from(r.spectrum.contributing));
    Value::Object(map)
}

/// JSON object for one estimate outcome (spectra omitted; they go to their
/// own CSV files on request).
pub fn estimate_json(outcome: &EstimateOutcome) -> Value {
    let mut map = Map::new();
    map.insert("method".into(), Value::String(outcome.method.as_str().into()));
    map.insert("snr_db".into(), number(outcome.snr_db));
    map.insert("seed".into(), Value::from(outcome.seed));
    map.insert("lambda_range".into(), opt_number(outcome.lambda_range));
    map.insert("lambda_velocity".into(), opt_number(outcome.lambda_velocity));
    map.insert("range".into(), report_json(&outcome.range));
    map.insert("velocity".into(), report_json(&outcome.velocity));
    Value::Object(map)
}

/// CSV body for estimate outcomes: one row per axis per outcome.
pub fn estimate_csv(outcomes: &[EstimateOutcome]) -> String {
    let mut out = String::from(
        "method,snr_db,seed,axis,estimate,peak_bin,psr_db,solver_iters_total,lambda\n",
    );
    for o in outcomes {
        for (axis, report, lambda) in [
            ("range", &o.range, o.lambda_range),
            ("velocity", &o.velocity, o.lambda_velocity),
        ] {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                o.method,
                fmt_f64(o.snr_db),
                o.seed,
                axis,
                fmt_f64(report.estimate),
                report.peak_bin,
                fmt_f64(report.psr_db),
                report.solver_iters_total,
                fmt_opt(lambda),
            ));
        }
    }
    out
}

/// Sectioned CSV for the analytic tables; sections are separated by blank
/// lines and each carries its own header.
pub fn tables_csv(out: &TablesOutput) -> String {
    let mut text = String::from("table,method,range_resolution_m,velocity_resolution_mps\n");
    for (method, r, v) in &out.resolutions {
        text.push_str(&format!("resolution,{},{},{}\n", method, fmt_f64(*r), fmt_f64(*v)));
    }
    text.push('\n');
    text.push_str(
        "table,duration_mode,range_upper_m,range_lower_m,velocity_upper_mps,velocity_lower_mps\n",
    );
    for (mode, b) in &out.bounds {
        text.push_str(&format!(
            "rmse_bounds,{},{},{},{},{}\n",
            mode.as_str(),
            fmt_f64(b.range_upper_m),
            fmt_f64(b.range_lower_m),
            fmt_f64(b.velocity_upper_mps),
            fmt_f64(b.velocity_lower_mps),
        ));
    }
    if !out.gains.is_empty() {
        text.push('\n');
        text.push_str("table,axis,method,sigma2,varpi,gain\n");
        for g in &out.gains {
            text.push_str(&format!(
                "gain,{},{},{},{},{}\n",
                g.axis.as_str(),
                g.method,
                fmt_f64(g.sigma2),
                fmt_f64(g.varpi),
                fmt_f64(g.gain),
            ));
        }
    }
    text
}

fn tables_json(out: &TablesOutput) -> Value {
    let resolutions: Vec<Value> = out
        .resolutions
        .iter()
        .map(|(m, r, v)| {
            let mut map = Map::new();
            map.insert("method".into(), Value::String(m.as_str().into()));
            map.insert("range_resolution_m".into(), number(*r));
            map.insert("velocity_resolution_mps".into(), number(*v));
            Value::Object(map)
        })
        .collect();
    let bounds: Vec<Value> = out
        .bounds
        .iter()
        .map(|(mode, b)| {
            let mut map = Map::new();
            map.insert("duration_mode".into(), Value::String(mode.as_str().into()));
            map.insert("range_upper_m".into(), number(b.range_upper_m));
            map.insert("range_lower_m".into(), number(b.range_lower_m));
            map.insert("velocity_upper_mps".into(), number(b.velocity_upper_mps));
            map.insert("velocity_lower_mps".into(), number(b.velocity_lower_mps));
            Value::Object(map)
        })
        .collect();
    let gains: Vec<Value> = out
        .gains
        .iter()
        .map(|g| {
            let mut map = Map::new();
            map.insert("axis".into(), Value::String(g.axis.as_str().into()));
            map.insert("method".into(), Value::String(g.method.as_str().into()));
            map.insert("sigma2".into(), number(g.sigma2));
            map.insert("varpi".into(), number(g.varpi));
            map.insert("gain".into(), number(g.gain));
            Value::Object(map)
        })
        .collect();
    let mut map = Map::new();
    map.insert("resolutions".into(), Value::Array(resolutions));
    map.insert("rmse_bounds".into(), Value::Array(bounds));
    map.insert("gains".into(), Value::Array(gains));
    Value::Object(map)
}

fn timestamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated_unix {secs}\n")
}

/// Write a text file with the timestamp header line prepended.
pub fn write_with_timestamp(path: &Path, body: &str) -> Result<()> {
    let mut content = timestamp_line();
    content.push_str(body);
    std::fs::write(path, content)?;
    Ok(())
}

/// Write pretty JSON (no timestamp; the payload is fully deterministic).
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Write per-axis spectrum CSVs for an outcome next to `stem`, returning the
/// paths written.
pub fn write_spectra(
    outcome: &EstimateOutcome,
    cfg: &SimulationConfig,
    stem: &Path,
) -> Result<Vec<PathBuf>> {
    let base = stem.with_extension("");
    let mut written = Vec::new();
    for (axis, report) in [("range", &outcome.range), ("velocity", &outcome.velocity)] {
        let path = PathBuf::from(format!(
            "{}_{}_{}_spectrum.csv",
            base.display(),
            outcome.method,
            axis
        ));
        write_with_timestamp(&path, &spectrum_csv(&report.spectrum, cfg))?;
        written.push(path);
    }
    Ok(written)
}
