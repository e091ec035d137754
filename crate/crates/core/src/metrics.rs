//! Performance metrics: empirical SNR, peak-to-sidelobe ratio, RMSE, and the
//! closed-form gain, resolution, and RMSE-bound expressions.
//!
//! The gain formulas compare three processing chains on both axes. The sparse
//! solver contributes a nonnegative extra term (its denoising gain) on top of
//! the masked-transform baseline, and the plain periodogram pays for the full
//! subcarrier count in its noise bandwidth while only collecting energy from
//! the occupied part.

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::estimators::Method;
use num_complex::Complex64;

/// Ratio of mean signal power to mean noise power (linear, not dB).
pub fn snr_of_sequence(signal: &[Complex64], noise: &[Complex64]) -> Result<f64> {
    if signal.len() != noise.len() {
        return Err(Error::Shape(format!(
            "signal length {} does not match noise length {}",
            signal.len(),
            noise.len()
        )));
    }
    if signal.is_empty() {
        return Err(Error::InvalidArgument("empty sequences have no SNR".into()));
    }
    let p_signal: f64 = signal.iter().map(|z| z.norm_sqr()).sum::<f64>() / signal.len() as f64;
    let p_noise: f64 = noise.iter().map(|z| z.norm_sqr()).sum::<f64>() / noise.len() as f64;
    if p_noise <= 0.0 {
        return Err(Error::InvalidArgument(
            "noise power is zero; SNR is undefined".into(),
        ));
    }
    Ok(p_signal / p_noise)
}

/// Peak-to-sidelobe ratio in dB: the spectrum maximum against the largest
/// value outside a +-`exclusion`-bin zone around it. Infinite when everything
/// outside the zone is below 1e-12 of the peak. The spectrum must extend
/// beyond the exclusion zone.
pub fn psr_db(values: &[f64], exclusion: usize) -> Result<f64> {
    if values.len() <= 2 * exclusion + 1 {
        return Err(Error::InvalidArgument(format!(
            "spectrum of {} bins has no room outside a +-{} bin exclusion zone",
            values.len(),
            exclusion
        )));
    }
    let mut peak_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[peak_idx] {
            peak_idx = i;
        }
    }
    let peak = values[peak_idx];
    let lo = peak_idx.saturating_sub(exclusion);
    let hi = (peak_idx + exclusion).min(values.len() - 1);
    let max_outside = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < lo || *i > hi)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_outside < 1e-12 * peak {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (peak / max_outside).log10())
    }
}

/// Root-mean-square error of a batch of estimates against a single truth.
pub fn rmse(estimates: &[f64], truth: f64) -> f64 {
    assert!(!estimates.is_empty(), "RMSE of an empty batch");
    let mse: f64 = estimates.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>()
        / estimates.len() as f64;
    mse.sqrt()
}

/// Inputs to the closed-form SNR-gain expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParams {
    pub m_sym: usize,
    pub n_occ: usize,
    pub n_sub: usize,
    pub noise_var: f64,
    /// Extra denoising gain contributed by the sparse solver; zero models it
    /// away.
    pub fista_gain: f64,
}

impl GainParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_occ == 0 || self.n_occ > self.n_sub {
            return Err(Error::InvalidArgument(format!(
                "occupied count {} must lie in [1, {}]",
                self.n_occ, self.n_sub
            )));
        }
        if self.m_sym == 0 {
            return Err(Error::InvalidArgument("symbol count must be positive".into()));
        }
        if self.noise_var.is_nan() || self.noise_var <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {}",
                self.noise_var
            )));
        }
        if self.fista_gain.is_nan() || self.fista_gain < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "solver gain must be nonnegative, got {}",
                self.fista_gain
            )));
        }
        Ok(())
    }
}

/// Post-processing SNR gain along the range axis.
pub fn gain_range(p: &GainParams, method: Method) -> Result<f64> {
    p.validate()?;
    let m = p.m_sym as f64;
    let n_occ = p.n_occ as f64;
    let n_sub = p.n_sub as f64;
    // The sparse method's gain is the accumulation baseline plus the solver
    // term, written as that sum so the two coincide exactly at zero gain.
    let accumulated = m.sqrt() * n_occ / p.noise_var;
    Ok(match method {
        Method::Jcmsa => accumulated + m.sqrt() * p.fista_gain,
        Method::Masked2dfft => accumulated,
        Method::Plain2dfft => n_occ * n_occ / (n_sub * p.noise_var),
    })
}

/// Post-processing SNR gain along the velocity axis.
pub fn gain_velocity(p: &GainParams, method: Method) -> Result<f64> {
    p.validate()?;
    let m = p.m_sym as f64;
    let n_occ = p.n_occ as f64;
    let accumulated = n_occ.sqrt() * m / p.noise_var;
    Ok(match method {
        Method::Jcmsa => accumulated + n_occ.sqrt() * p.fista_gain,
        Method::Masked2dfft => accumulated,
        Method::Plain2dfft => m / p.noise_var,
    })
}

/// Grid resolutions (range meters, velocity m/s) for each method. The sparse
/// and masked chains share the two-way grid; the plain periodogram's stated
/// resolution is twice as coarse on both axes.
pub fn resolution(cfg: &SimulationConfig, method: Method) -> (f64, f64) {
    let fine_r = cfg.range_bin_width_m();
    let fine_v = cfg.velocity_bin_width_mps();
    match method {
        Method::Jcmsa | Method::Masked2dfft => (fine_r, fine_v),
        Method::Plain2dfft => (2.0 * fine_r, 2.0 * fine_v),
    }
}

/// Quantization-error bounds for bin-mapped estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseBounds {
    pub range_upper_m: f64,
    pub range_lower_m: f64,
    pub velocity_upper_mps: f64,
    pub velocity_lower_mps: f64,
}

fn axis_bounds(truth: f64, bin_width: f64, bins: usize) -> (f64, f64) {
    // 1-based index of the grid point nearest the truth.
    let ind = (truth / bin_width).round() as usize + 1;
    let lower = ((ind as f64 - 1.0) * bin_width - truth).abs();
    // Worst case is the grid endpoint farthest from the truth.
    let upper = ((bins as f64 - 1.0) * bin_width - truth).max(truth);
    (upper, lower)
}

/// Best and worst absolute errors a grid-quantized estimator can produce for
/// the configured target: the lower bound is the distance from the truth to
/// its nearest grid point, the upper the distance to the far end of the grid.
pub fn rmse_bounds(cfg: &SimulationConfig) -> RmseBounds {
    let (range_upper_m, range_lower_m) = axis_bounds(
        cfg.target_range_m,
        cfg.range_bin_width_m(),
        cfg.n_subcarriers,
    );
    let (velocity_upper_mps, velocity_lower_mps) = axis_bounds(
        cfg.target_velocity_mps,
        cfg.velocity_bin_width_mps(),
        cfg.n_symbols,
    );
    RmseBounds {
        range_upper_m,
        range_lower_m,
        velocity_upper_mps,
        velocity_lower_mps,
    }
}

/// Diagnostic: realized peak SNR of an accumulated spectrum, peak power over
/// mean power outside a +-`exclusion` zone.
pub fn spectrum_peak_snr(values: &[f64], exclusion: usize) -> Result<f64> {
    if values.len() <= 2 * exclusion + 1 {
        return Err(Error::InvalidArgument(
            "spectrum has no bins outside the exclusion zone".into(),
        ));
    }
    let mut peak_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[peak_idx] {
            peak_idx = i;
        }
    }
    let peak = values[peak_idx];
    let lo = peak_idx.saturating_sub(exclusion);
    let hi = (peak_idx + exclusion).min(values.len() - 1);
    let (sum, count) = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < lo || *i > hi)
        .fold((0.0, 0usize), |(s, c), (_, &v)| (s + v * v, c + 1));
    let mean_sq = sum / count as f64;
    if mean_sq < 1e-24 * peak * peak {
        Ok(f64::INFINITY)
    } else {
        Ok(peak * peak / mean_sq)
    }
}
