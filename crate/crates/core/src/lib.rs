//! Range and velocity estimation for OFDM joint communication and sensing on
//! non-continuous spectrum.
//!
//! When parts of the band are licensed to other users, only a subset of
//! subcarriers carries sensing-usable symbols. The classic 2D-FFT periodogram
//! then suffers masked-aperture sidelobes and wasted noise bandwidth. This
//! crate implements the compressed-sensing alternative: per-column (range) and
//! per-row (velocity) partial-Fourier sensing operators solved with FISTA,
//! plus K-fold cross-validated selection of the sparsity weight, the two
//! 2D-FFT baselines, and closed-form gain/resolution/RMSE-bound formulas.
//!
//! ```
//! use ncsense::config::SimulationConfig;
//! use ncsense::runner::{run_estimate, LambdaSource, Scenario};
//! use ncsense::estimators::Method;
//!
//! let cfg = SimulationConfig::default();
//! let out = run_estimate(&cfg, &Scenario::S1, 10.0, Method::Jcmsa,
//!                        &LambdaSource::Table, 7).unwrap();
//! assert_eq!(out.range.estimate, 117.1875);
//! assert_eq!(out.range.peak_bin, 7);
//! ```

pub mod channel;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fista;
pub mod lambda;
pub mod metrics;
pub mod occupancy;
pub mod runner;
pub mod transforms;
pub mod tuning;

pub use error::{Error, Result};
