//! Sparsity-weight selection by K-fold cross validation.
//!
//! Each occupied column (range) or row (velocity) of a masked channel matrix
//! becomes one tuning problem: its sensing operator, its observed samples,
//! and an ideal reconstruction. The ideal is a single impulse at the target's
//! grid bin whose height is the noise-free matched-filter peak, so a perfect
//! sparse recovery scores zero error. Problems are dealt round-robin into K
//! folds; every grid lambda is solved on every fold, errors and iteration
//! counts are averaged per lambda, min-max normalized across the grid, and
//! combined 90/10 (accuracy/speed). Smallest score wins, ties to the smaller
//! lambda.

use num_complex::Complex64;

use crate::channel::{steering_range_at, steering_velocity_at, ChannelMatrix, TargetTruth};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::estimators::SpectrumAxis;
use crate::fista::{self, FistaConfig};
use crate::occupancy::{column_selection, row_selection, OccupancyMask};
use crate::transforms::{
    range_sensing_operator, velocity_sensing_operator, LinearOperator, SensingOperator,
};

/// Arithmetic grid of candidate sparsity weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LambdaGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidArgument("grid bounds must be finite".into()));
        }
        if start < 0.0 || start >= stop || step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs 0 <= start < stop and positive step, got [{start}, {stop}] step {step}"
            )));
        }
        let grid = LambdaGrid { start, stop, step };
        if grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "grid must contain at least two values".into(),
            ));
        }
        Ok(grid)
    }

    /// Default range grid: 1 to 10000 in steps of 100.
    pub fn range_default() -> Self {
        LambdaGrid { start: 1.0, stop: 10_000.0, step: 100.0 }
    }

    /// Default velocity grid, extended downward so sub-unit optima are
    /// reachable: 0.02 to 5 in steps of 0.02.
    pub fn velocity_default() -> Self {
        LambdaGrid { start: 0.02, stop: 5.0, step: 0.02 }
    }

    /// Velocity grid restricted to 1 through 5.
    pub fn velocity_narrow() -> Self {
        LambdaGrid { start: 1.0, stop: 5.0, step: 0.02 }
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.start + k as f64 * self.step).collect()
    }
}

/// One cross-validation unit: operator, observation, and what a perfect
/// reconstruction's magnitudes would be.
#[derive(Debug, Clone)]
pub struct TuningProblem {
    pub operator: SensingOperator,
    pub observation: Vec<Complex64>,
    pub ideal: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct KcvOutcome {
    pub best_lambda: f64,
    /// Candidate values, in grid order; all matrices below are indexed by it.
    pub lambdas: Vec<f64>,
    /// Combined 90/10 score per candidate.
    pub scores: Vec<f64>,
    /// Mean reconstruction error per (candidate, fold).
    pub per_fold_errors: Vec<Vec<f64>>,
    /// Mean iteration count per (candidate, fold).
    pub per_fold_iters: Vec<Vec<f64>>,
    /// Mean final residual norm per (candidate, fold), kept for diagnostics.
    pub per_fold_residuals: Vec<Vec<f64>>,
}

fn true_bin(truth_value: f64, bin_width: f64, bins: usize) -> usize {
    ((truth_value / bin_width).round() as usize) % bins
}

/// Zero-based grid bin of the configured target range.
pub fn true_range_bin(cfg: &SimulationConfig, truth: &TargetTruth) -> usize {
    true_bin(truth.range_m, cfg.range_bin_width_m(), cfg.n_subcarriers)
}

/// Zero-based grid bin of the configured target velocity. The bin follows the
/// observation phase ramp, which always advances by the total symbol
/// duration, independent of the reporting duration mode.
pub fn true_velocity_bin(cfg: &SimulationConfig, truth: &TargetTruth) -> usize {
    let width = cfg.light_speed_mps
        / (2.0 * cfg.n_symbols as f64 * cfg.symbol_duration_s * cfg.carrier_freq_hz);
    true_bin(truth.velocity_mps, width, cfg.n_symbols)
}

/// Build one tuning problem per energy-carrying column (range axis) or row
/// (velocity axis) of a masked matrix. The ideal spectrum is an impulse at
/// the target bin with the noise-free matched-filter height, so its scale
/// tracks the operator and amplitude rather than an arbitrary unit.
pub fn build_problem_set(
    chan: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
    truth: &TargetTruth,
    axis: SpectrumAxis,
) -> Result<Vec<TuningProblem>> {
    let sr = steering_range_at(cfg, truth.range_m);
    let sv = steering_velocity_at(cfg, truth.velocity_mps);
    let mut problems = Vec::new();
    match axis {
        SpectrumAxis::Range => {
            let bin = true_range_bin(cfg, truth);
            for (m, &sv_m) in sv.iter().enumerate() {
                let sel = column_selection(mask, m)?;
                if sel.is_empty() {
                    continue;
                }
                let col = chan.column(m);
                let y: Vec<Complex64> = sel.iter().map(|i| col[i]).collect();
                if y.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let op = range_sensing_operator(&mask.column_bits(m), &sel)?;
                let clean: Vec<Complex64> =
                    sel.iter().map(|n| truth.amplitude * sr[n] * sv_m).collect();
                let height = op.adjoint(&clean)[bin].norm();
                let mut ideal = vec![0.0; op.domain_len()];
                ideal[bin] = height;
                problems.push(TuningProblem { operator: op, observation: y, ideal });
            }
        }
        SpectrumAxis::Velocity => {
            let bin = true_velocity_bin(cfg, truth);
            for (n, &sr_n) in sr.iter().enumerate() {
                let sel = row_selection(mask, n)?;
                if sel.is_empty() {
                    continue;
                }
                let row = chan.row(n);
                let y: Vec<Complex64> = sel.iter().map(|i| row[i]).collect();
                if y.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let op = velocity_sensing_operator(&mask.row_bits(n), &sel)?;
                let clean: Vec<Complex64> =
                    sel.iter().map(|m| truth.amplitude * sr_n * sv[m]).collect();
                let height = op.adjoint(&clean)[bin].norm();
                let mut ideal = vec![0.0; op.domain_len()];
                ideal[bin] = height;
                problems.push(TuningProblem { operator: op, observation: y, ideal });
            }
        }
    }
    if problems.is_empty() {
        return Err(Error::NoData(
            "no energy-carrying vectors to build tuning problems from".into(),
        ));
    }
    Ok(problems)
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - min) / (max - min)).collect()
}

/// Cross-validate the grid and pick the best sparsity weight.
pub fn kcv_select_lambda(
    problems: &[TuningProblem],
    grid: &LambdaGrid,
    folds: usize,
    fista_cfg: &FistaConfig,
) -> Result<KcvOutcome> {
    if folds < 2 {
        return Err(Error::Tuning(format!(
            "cross validation needs at least 2 folds, got {folds}"
        )));
    }
    if problems.len() < folds {
        return Err(Error::Tuning(format!(
            "{} problems cannot fill {} folds",
            problems.len(),
            folds
        )));
    }
    let lambdas = grid.values();
    let fold_of: Vec<usize> = (0..problems.len()).map(|i| i % folds).collect();

    let mut per_fold_errors = Vec::with_capacity(lambdas.len());
    let mut per_fold_iters = Vec::with_capacity(lambdas.len());
    let mut per_fold_residuals = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let solve_cfg = FistaConfig { lambda, ..*fista_cfg };
        let mut errors = vec![0.0; folds];
        let mut iters = vec![0.0; folds];
        let mut residuals = vec![0.0; folds];
        let mut counts = vec![0usize; folds];
        for (i, problem) in problems.iter().enumerate() {
            let sol = fista::solve(&problem.operator, &problem.observation, &solve_cfg)?;
            let err: f64 = sol
                .solution
                .iter()
                .zip(problem.ideal.iter())
                .map(|(z, ideal)| {
                    let d = z.norm() - ideal;
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            let f = fold_of[i];
            errors[f] += err;
            iters[f] += sol.iterations as f64;
            residuals[f] += sol.residual_history.last().copied().unwrap_or(0.0);
            counts[f] += 1;
        }
        for f in 0..folds {
            let c = counts[f].max(1) as f64;
            errors[f] /= c;
            iters[f] /= c;
            residuals[f] /= c;
        }
        per_fold_errors.push(errors);
        per_fold_iters.push(iters);
        per_fold_residuals.push(residuals);
    }

    let avg = |matrix: &[Vec<f64>]| -> Vec<f64> {
        matrix
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    };
    let norm_errors = min_max_normalize(&avg(&per_fold_errors));
    let norm_iters = min_max_normalize(&avg(&per_fold_iters));
    let scores: Vec<f64> = norm_errors
        .iter()
        .zip(norm_iters.iter())
        .map(|(e, i)| 0.9 * e + 0.1 * i)
        .collect();

    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    Ok(KcvOutcome {
        best_lambda: lambdas[best],
        lambdas,
        scores,
        per_fold_errors,
        per_fold_iters,
        per_fold_residuals,
    })
}

/// CSV with one row per (lambda, fold): error, iterations, final residual.
pub fn kcv_detail_csv(outcome: &KcvOutcome) -> String {
    let mut out = String::from("lambda,fold,error,iterations,residual\n");
    for (li, lambda) in outcome.lambdas.iter().enumerate() {
        for f in 0..outcome.per_fold_errors[li].len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                lambda,
                f,
                outcome.per_fold_errors[li][f],
                outcome.per_fold_iters[li][f],
                outcome.per_fold_residuals[li][f],
            ));
        }
    }
    out
}

/// CSV with one summary row per lambda: its combined score and whether it won.
pub fn kcv_summary_csv(outcome: &KcvOutcome) -> String {
    let mut out = String::from("lambda,score,selected\n");
    for (li, lambda) in outcome.lambdas.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            lambda,
            outcome.scores[li],
            if *lambda == outcome.best_lambda { 1 } else { 0 }
        ));
    }
    out
}
