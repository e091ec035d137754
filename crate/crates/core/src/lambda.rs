//! Pre-tuned sparsity weights per scenario, axis, and SNR.
//!
//! Each entry is the cross-validation optimum for integer SNRs 0 through
//! 10 dB at the default simulation geometry, obtained with the grids in the
//! tuning module. The optima jitter between neighboring SNRs because the
//! selection depends on the noise draw; any value in the same neighborhood
//! recovers the target bin.
//!
//! Lookup policy outside the tabulated window: below 0 dB the weight drops to
//! zero, which turns the sparse solve into plain least squares (the masked
//! transform), because thresholding buys nothing once noise drowns the peak
//! window. Above 10 dB the 10 dB entry is reused; the optimum saturates once
//! the peak stands clear of the noise floor.

use crate::error::{Error, Result};
use crate::estimators::SpectrumAxis;

/// Which built-in occupancy plan a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableScenario {
    Scenario1,
    Scenario2,
}

const S1_RANGE: [f64; 11] = [
    5401.0, 5601.0, 5001.0, 4601.0, 5401.0, 5201.0, 5001.0, 5601.0, 5601.0, 5601.0, 5201.0,
];

const S1_VELOCITY: [f64; 11] = [
    2.16, 1.56, 1.54, 1.08, 1.2, 1.12, 0.74, 0.68, 1.16, 1.7, 1.5,
];

const S2_RANGE: [f64; 11] = [
    2501.0, 3501.0, 4501.0, 3001.0, 5001.0, 4001.0, 4801.0, 5101.0, 5201.0, 5601.0, 5101.0,
];

const S2_VELOCITY: [f64; 11] = [
    1.32, 1.70, 1.44, 1.28, 0.92, 1.20, 1.10, 1.46, 1.70, 1.56, 1.54,
];

fn table(scenario: TableScenario, axis: SpectrumAxis) -> &'static [f64; 11] {
    match (scenario, axis) {
        (TableScenario::Scenario1, SpectrumAxis::Range) => &S1_RANGE,
        (TableScenario::Scenario1, SpectrumAxis::Velocity) => &S1_VELOCITY,
        (TableScenario::Scenario2, SpectrumAxis::Range) => &S2_RANGE,
        (TableScenario::Scenario2, SpectrumAxis::Velocity) => &S2_VELOCITY,
    }
}

/// Tabulated sparsity weight for the given SNR. Finite input required.
pub fn table_lambda(scenario: TableScenario, axis: SpectrumAxis, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "SNR must be finite to index the weight table, got {snr_db}"
        )));
    }
    if snr_db < 0.0 {
        return Ok(0.0);
    }
    let idx = (snr_db.round() as usize).min(10);
    Ok(table(scenario, axis)[idx])
}
