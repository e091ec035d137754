//! Simulation parameters for the sensing chain.
//!
//! Defaults follow a 24 GHz system with 512 subcarriers at 15 kHz spacing,
//! half of them occupied, 14 OFDM symbols per frame, and a single target at
//! 117 m / 13 m/s. A config can be loaded from a flat `key = value` file,
//! overridden key-by-key (the CLI's `--set`), and saved back out; the
//! load/save pair round-trips bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Which duration multiplies the Doppler term when a velocity bin index is
/// mapped back to meters per second.
///
/// `SymbolTotal` uses the full symbol duration (elementary plus cyclic
/// prefix); `Elementary` uses the elementary symbol duration alone. Both are
/// legitimate conventions and they disagree by the CP fraction, so the choice
/// is explicit. Synthesis always advances the target phase by the total
/// symbol duration; the mode affects only the bin-to-velocity mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityDurationMode {
    SymbolTotal,
    Elementary,
}

impl VelocityDurationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VelocityDurationMode::SymbolTotal => "symbol_total",
            VelocityDurationMode::Elementary => "elementary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "symbol_total" | "symbol" => Ok(VelocityDurationMode::SymbolTotal),
            "elementary" => Ok(VelocityDurationMode::Elementary),
            other => Err(Error::Config(format!(
                "velocity_duration_mode must be symbol_total or elementary, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Total number of subcarriers N_c.
    pub n_subcarriers: usize,
    /// Number of occupied (sensing-usable) subcarriers per column.
    pub n_occupied: usize,
    /// OFDM symbols per frame M_sym.
    pub n_symbols: usize,
    /// Carrier frequency in Hz.
    pub carrier_freq_hz: f64,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing_hz: f64,
    /// Elementary OFDM symbol duration in seconds (1/spacing nominally).
    pub elementary_symbol_s: f64,
    /// Cyclic prefix duration in seconds.
    pub cp_length_s: f64,
    /// Total symbol duration in seconds; must equal elementary + CP.
    pub symbol_duration_s: f64,
    /// True target range in meters.
    pub target_range_m: f64,
    /// True target radial velocity in meters per second.
    pub target_velocity_mps: f64,
    /// Propagation speed in meters per second.
    pub light_speed_mps: f64,
    /// Fold count for cross-validated lambda selection.
    pub kcv_folds: usize,
    /// Base RNG seed for noise synthesis.
    pub rng_seed: u64,
    /// Duration convention for the velocity bin mapping.
    pub velocity_duration_mode: VelocityDurationMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_subcarriers: 512,
            n_occupied: 256,
            n_symbols: 14,
            carrier_freq_hz: 24.0e9,
            subcarrier_spacing_hz: 15.0e3,
            elementary_symbol_s: 66.67e-6,
            cp_length_s: 16.67e-6,
            symbol_duration_s: 83.34e-6,
            target_range_m: 117.0,
            target_velocity_mps: 13.0,
            light_speed_mps: 3.0e8,
            kcv_folds: 14,
            rng_seed: 0,
            velocity_duration_mode: VelocityDurationMode::SymbolTotal,
        }
    }
}

/// Result of a config sanity check. Violations are data, not a fault: an
/// unphysical config is reportable without tearing down the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationOutcome {
    Ok,
    Violations(Vec<String>),
}

impl ValidationOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationOutcome::Ok)
    }
}

impl SimulationConfig {
    /// Maximum unambiguous range c / (2 Δf). Targets must sit strictly below.
    pub fn unambiguous_range_m(&self) -> f64 {
        self.light_speed_mps / (2.0 * self.subcarrier_spacing_hz)
    }

    /// Range bin width c / (2 N_c Δf) of the oversampled (double-resolution)
    /// spectrum grid.
    pub fn range_bin_width_m(&self) -> f64 {
        self.light_speed_mps / (2.0 * self.n_subcarriers as f64 * self.subcarrier_spacing_hz)
    }

    /// Velocity bin width c / (2 M_sym T f_c), with T chosen by the duration
    /// mode.
    pub fn velocity_bin_width_mps(&self) -> f64 {
        self.light_speed_mps
            / (2.0 * self.n_symbols as f64 * self.velocity_mapping_duration_s() * self.carrier_freq_hz)
    }

    /// The duration the velocity bin mapping uses under the current mode.
    pub fn velocity_mapping_duration_s(&self) -> f64 {
        match self.velocity_duration_mode {
            VelocityDurationMode::SymbolTotal => self.symbol_duration_s,
            VelocityDurationMode::Elementary => self.elementary_symbol_s,
        }
    }

    pub fn validate(&self) -> ValidationOutcome {
        let mut v = Vec::new();
        if self.n_subcarriers == 0 {
            v.push("n_subcarriers must be at least 1".to_string());
        }
        if self.n_occupied == 0 {
            v.push("n_occupied must be at least 1".to_string());
        }
        if self.n_occupied > self.n_subcarriers {
            v.push(format!(
                "n_occupied ({}) exceeds n_subcarriers ({})",
                self.n_occupied, self.n_subcarriers
            ));
        }
        if self.n_symbols == 0 {
            v.push("n_symbols must be at least 1".to_string());
        }
        if self.kcv_folds == 0 {
            v.push("kcv_folds must be at least 1".to_string());
        }
        if self.kcv_folds > self.n_symbols {
            v.push(format!(
                "kcv_folds ({}) exceeds n_symbols ({})",
                self.kcv_folds, self.n_symbols
            ));
        }
        for (name, val) in [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("elementary_symbol_s", self.elementary_symbol_s),
            ("symbol_duration_s", self.symbol_duration_s),
            ("light_speed_mps", self.light_speed_mps),
        ] {
            if !(val.is_finite() && val > 0.0) {
                v.push(format!("{name} must be finite and positive, got {val}"));
            }
        }
        if !(self.cp_length_s.is_finite() && self.cp_length_s >= 0.0) {
            v.push(format!(
                "cp_length_s must be finite and nonnegative, got {}",
                self.cp_length_s
            ));
        }
        let sum = self.elementary_symbol_s + self.cp_length_s;
        if self.symbol_duration_s > 0.0
            && ((self.symbol_duration_s - sum).abs() > 1e-9 * self.symbol_duration_s)
        {
            v.push(format!(
                "symbol_duration_s ({}) is not elementary_symbol_s + cp_length_s ({})",
                self.symbol_duration_s, sum
            ));
        }
        if !(self.target_range_m.is_finite() && self.target_range_m >= 0.0) {
            v.push(format!(
                "target_range_m must be finite and nonnegative, got {}",
                self.target_range_m
            ));
        } else if self.subcarrier_spacing_hz > 0.0
            && self.light_speed_mps > 0.0
            && self.target_range_m >= self.unambiguous_range_m()
        {
            v.push(format!(
                "target_range_m ({}) is not strictly below the unambiguous range ({})",
                self.target_range_m,
                self.unambiguous_range_m()
            ));
        }
        if !self.target_velocity_mps.is_finite() {
            v.push("target_velocity_mps must be finite".to_string());
        }
        if v.is_empty() {
            ValidationOutcome::Ok
        } else {
            ValidationOutcome::Violations(v)
        }
    }

    /// Sets one field from its textual key/value form. Shared by the file
    /// loader and the CLI `--set` override, so both accept exactly the same
    /// keys and value syntax.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        fn int(key: &str, value: &str) -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("{key}: {e} (got {value:?})")))
        }
        fn real(key: &str, value: &str) -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("{key}: {e} (got {value:?})")))
        }
        match key {
            "n_subcarriers" => self.n_subcarriers = int(key, value)?,
            "n_occupied" => self.n_occupied = int(key, value)?,
            "n_symbols" => self.n_symbols = int(key, value)?,
            "carrier_freq_hz" => self.carrier_freq_hz = real(key, value)?,
            "subcarrier_spacing_hz" => self.subcarrier_spacing_hz = real(key, value)?,
            "elementary_symbol_s" => self.elementary_symbol_s = real(key, value)?,
            "cp_length_s" => self.cp_length_s = real(key, value)?,
            "symbol_duration_s" => self.symbol_duration_s = real(key, value)?,
            "target_range_m" => self.target_range_m = real(key, value)?,
            "target_velocity_mps" => self.target_velocity_mps = real(key, value)?,
            "light_speed_mps" => self.light_speed_mps = real(key, value)?,
            "kcv_folds" => self.kcv_folds = int(key, value)?,
            "rng_seed" => {
                self.rng_seed = value
                    .parse::<u64>()
                    .map_err(|e| Error::Config(format!("rng_seed: {e} (got {value:?})")))?
            }
            "velocity_duration_mode" => {
                self.velocity_duration_mode = VelocityDurationMode::parse(value)?
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key=value` (the CLI `--set` argument form).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::Config(format!("--set expects key=value, got {assignment:?}"))
        })?;
        self.set_key(key.trim(), value)
    }

    /// Renders the config in the same `key = value` format the loader reads.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sensing chain configuration");
        let _ = writeln!(s, "n_subcarriers = {}", self.n_subcarriers);
        let _ = writeln!(s, "n_occupied = {}", self.n_occupied);
        let _ = writeln!(s, "n_symbols = {}", self.n_symbols);
        let _ = writeln!(s, "carrier_freq_hz = {}", self.carrier_freq_hz);
        let _ = writeln!(s, "subcarrier_spacing_hz = {}", self.subcarrier_spacing_hz);
        let _ = writeln!(s, "elementary_symbol_s = {}", self.elementary_symbol_s);
        let _ = writeln!(s, "cp_length_s = {}", self.cp_length_s);
        let _ = writeln!(s, "symbol_duration_s = {}", self.symbol_duration_s);
        let _ = writeln!(s, "target_range_m = {}", self.target_range_m);
        let _ = writeln!(s, "target_velocity_mps = {}", self.target_velocity_mps);
        let _ = writeln!(s, "light_speed_mps = {}", self.light_speed_mps);
        let _ = writeln!(s, "kcv_folds = {}", self.kcv_folds);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(
            s,
            "velocity_duration_mode = {}",
            self.velocity_duration_mode.as_str()
        );
        s
    }
}

/// Parses config text: one `key = value` per line, `#` starts a comment,
/// blank lines ignored. Keys not listed keep their defaults; unknown keys are
/// fatal. Later duplicates overwrite earlier ones.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let mut cfg = SimulationConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((head, _)) => head,
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
        })?;
        cfg.set_key(key.trim(), value)?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn save_config(cfg: &SimulationConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_config_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_consistent() {
        let cfg = SimulationConfig::default();
        assert!(cfg.validate().is_ok(), "{:?}", cfg.validate());
        assert_eq!(cfg.unambiguous_range_m(), 10_000.0);
        assert_eq!(cfg.range_bin_width_m(), 19.53125);
    }

    #[test]
    fn symbol_duration_mismatch_is_a_violation() {
        let cfg = SimulationConfig {
            symbol_duration_s: 90.0e-6,
            ..SimulationConfig::default()
        };
        match cfg.validate() {
            ValidationOutcome::Violations(v) => {
                assert!(v.iter().any(|m| m.contains("symbol_duration_s")), "{v:?}")
            }
            ValidationOutcome::Ok => panic!("expected violation"),
        }
    }

    #[test]
    fn range_at_unambiguous_limit_is_a_violation() {
        let cfg = SimulationConfig {
            target_range_m: 10_000.0,
            ..SimulationConfig::default()
        };
        match cfg.validate() {
            ValidationOutcome::Violations(v) => {
                assert!(v.iter().any(|m| m.contains("unambiguous")), "{v:?}")
            }
            ValidationOutcome::Ok => panic!("expected violation"),
        }
    }

    #[test]
    fn folds_beyond_symbols_is_a_violation() {
        let cfg = SimulationConfig {
            kcv_folds: 15,
            ..SimulationConfig::default()
        };
        assert!(!cfg.validate().is_ok());
    }

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, SimulationConfig::default());
    }

    #[test]
    fn partial_file_keeps_defaults_elsewhere() {
        let cfg = parse_config("# comment\nrng_seed = 9\ntarget_range_m = 80.5 # trailing\n").unwrap();
        assert_eq!(cfg.rng_seed, 9);
        assert_eq!(cfg.target_range_m, 80.5);
        assert_eq!(cfg.n_subcarriers, 512);
    }

    #[test]
    fn unknown_key_is_fatal() {
        let err = parse_config("bogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn duration_mode_parses_both_ways() {
        let cfg = parse_config("velocity_duration_mode = elementary\n").unwrap();
        assert_eq!(cfg.velocity_duration_mode, VelocityDurationMode::Elementary);
        assert!(VelocityDurationMode::parse("sideways").is_err());
    }

    #[test]
    fn save_load_round_trips_bit_exactly() {
        let cfg = SimulationConfig {
            target_range_m: 117.1875,
            elementary_symbol_s: 66.67e-6,
            rng_seed: u64::MAX,
            velocity_duration_mode: VelocityDurationMode::Elementary,
            ..SimulationConfig::default()
        };
        let text = cfg.to_config_text();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.elementary_symbol_s.to_bits(), cfg.elementary_symbol_s.to_bits());
    }

    #[test]
    fn override_parses_key_value() {
        let mut cfg = SimulationConfig::default();
        cfg.apply_override("n_symbols=28").unwrap();
        assert_eq!(cfg.n_symbols, 28);
        assert!(cfg.apply_override("n_symbols").is_err());
        assert!(cfg.apply_override("nope=3").is_err());
    }
}
