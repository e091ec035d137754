//! Divided channel information matrix for a single moving point target.
//!
//! After the receiver divides received modulation symbols by the transmitted
//! ones, each resource element (n, m) carries the product of a range phase
//! ramp across subcarriers and a Doppler phase ramp across symbols, scaled by
//! the channel coefficient, plus noise from the division. This module builds
//! that matrix, with white circular Gaussian noise injected at a prescribed
//! per-element SNR, and applies occupancy masks to it.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::occupancy::OccupancyMask;

/// Whether a matrix still carries every resource element or has had the
/// licensed-away cells zeroed. Informational: estimators that ignore the mask
/// accept either kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Unprocessed,
    Masked,
}

/// Ground truth of the simulated target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetTruth {
    pub range_m: f64,
    pub velocity_mps: f64,
    /// Channel coefficient. The default scales with the subcarrier count so
    /// that sparsity weights in the few-thousand range, as published for this
    /// configuration size, sit inside the useful window of the range LASSO;
    /// all peak-bin behavior is invariant to rescaling amplitude and lambda
    /// together.
    pub amplitude: Complex64,
}

impl TargetTruth {
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        TargetTruth {
            range_m: cfg.target_range_m,
            velocity_mps: cfg.target_velocity_mps,
            amplitude: Complex64::new(cfg.n_subcarriers as f64, 0.0),
        }
    }
}

/// Row-major complex matrix, `n_subcarriers` rows by `n_symbols` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    kind: MatrixKind,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn new(rows: usize, cols: usize, kind: MatrixKind, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(ChannelMatrix { rows, cols, kind, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.rows).map(|n| self.get(n, col)).collect()
    }

    pub fn row(&self, row: usize) -> Vec<Complex64> {
        self.data[row * self.cols..(row + 1) * self.cols].to_vec()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Element-wise scaling, preserving kind.
    pub fn scaled(&self, factor: Complex64) -> ChannelMatrix {
        ChannelMatrix {
            rows: self.rows,
            cols: self.cols,
            kind: self.kind,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Dumps the matrix as CSV with `re,im` pairs, two cells per element.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for n in 0..self.rows {
            let mut cells = Vec::with_capacity(2 * self.cols);
            for m in 0..self.cols {
                let z = self.get(n, m);
                cells.push(format!("{}", z.re));
                cells.push(format!("{}", z.im));
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn tau(cfg: &SimulationConfig, range_m: f64) -> f64 {
    2.0 * range_m / cfg.light_speed_mps
}

/// Range phase ramp across subcarriers at the given range:
/// entry n (0-based) is exp(-j 2 pi (n+1) Δf tau) with tau the round-trip
/// delay. Subcarrier frequencies are 1-based multiples of the spacing.
pub fn steering_range_at(cfg: &SimulationConfig, range_m: f64) -> Vec<Complex64> {
    let t = tau(cfg, range_m);
    (0..cfg.n_subcarriers)
        .map(|n| {
            let phase = -2.0 * std::f64::consts::PI * (n as f64 + 1.0) * cfg.subcarrier_spacing_hz * t;
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Doppler phase ramp across symbols at the given velocity: entry m (0-based)
/// is exp(+j 2 pi (m+1) T_sym f_D) with f_D = 2 v f_c / c. Synthesis always
/// advances by the total symbol duration; the duration mode only affects the
/// inverse mapping from bins to velocity.
pub fn steering_velocity_at(cfg: &SimulationConfig, velocity_mps: f64) -> Vec<Complex64> {
    let doppler = 2.0 * velocity_mps * cfg.carrier_freq_hz / cfg.light_speed_mps;
    (0..cfg.n_symbols)
        .map(|m| {
            let phase = 2.0 * std::f64::consts::PI * (m as f64 + 1.0) * cfg.symbol_duration_s * doppler;
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

pub fn steering_range(cfg: &SimulationConfig) -> Vec<Complex64> {
    steering_range_at(cfg, cfg.target_range_m)
}

pub fn steering_velocity(cfg: &SimulationConfig) -> Vec<Complex64> {
    steering_velocity_at(cfg, cfg.target_velocity_mps)
}

/// Builds the divided channel information matrix: amplitude times the outer
/// product of the two steering ramps, plus circular complex Gaussian noise of
/// per-element variance |amplitude|^2 * 10^(-snr_db/10). The same seed
/// reproduces the matrix exactly.
pub fn synthesize(
    cfg: &SimulationConfig,
    truth: &TargetTruth,
    snr_db: f64,
    seed: u64,
) -> ChannelMatrix {
    let d_r = steering_range_at(cfg, truth.range_m);
    let d_v = steering_velocity_at(cfg, truth.velocity_mps);
    let noise_var = truth.amplitude.norm_sqr() * 10f64.powf(-snr_db / 10.0);
    let sigma_per_axis = (noise_var / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(cfg.n_subcarriers * cfg.n_symbols);
    for &dr in &d_r {
        for &dv in &d_v {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let noise = Complex64::new(re, im) * sigma_per_axis;
            data.push(truth.amplitude * dr * dv + noise);
        }
    }
    ChannelMatrix {
        rows: cfg.n_subcarriers,
        cols: cfg.n_symbols,
        kind: MatrixKind::Unprocessed,
        data,
    }
}

/// Zeroes every licensed-away element. The shapes must agree.
pub fn apply_mask(chan: &ChannelMatrix, mask: &OccupancyMask) -> Result<ChannelMatrix> {
    if chan.rows() != mask.rows() || chan.cols() != mask.cols() {
        return Err(Error::Shape(format!(
            "channel is {}x{} but mask is {}x{}",
            chan.rows(),
            chan.cols(),
            mask.rows(),
            mask.cols()
        )));
    }
    let mut data = chan.data.clone();
    for n in 0..chan.rows() {
        for m in 0..chan.cols() {
            if !mask.get(n, m) {
                data[n * chan.cols() + m] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(ChannelMatrix {
        rows: chan.rows,
        cols: chan.cols,
        kind: MatrixKind::Masked,
        data,
    })
}
