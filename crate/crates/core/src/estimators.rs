//! Range and velocity estimators: sparse per-column/per-row recovery, the
//! masked transform baseline, and the plain two-dimensional periodogram.
//!
//! The sparse path solves one LASSO problem per occupied column (range) or
//! row (velocity) and accumulates solution magnitudes non-coherently; the
//! masked baseline replaces the solve with a single unitary transform of the
//! zero-filled vector. Both skip vectors that carry no energy and normalize
//! by the number that contributed. Peak bins are reported 1-based and mapped
//! to physical units at the reporting boundary only.

use num_complex::Complex64;

use crate::channel::{ChannelMatrix, MatrixKind};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::fista::{self, FistaConfig};
use crate::metrics::psr_db;
use crate::occupancy::{column_selection, row_selection, OccupancyMask};
use crate::transforms::{
    dft, idft, periodogram_2d, range_sensing_operator, velocity_sensing_operator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Jcmsa,
    Masked2dfft,
    Plain2dfft,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Jcmsa => "jcmsa",
            Method::Masked2dfft => "masked-2dfft",
            Method::Plain2dfft => "plain-2dfft",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "jcmsa" => Ok(Method::Jcmsa),
            "masked-2dfft" => Ok(Method::Masked2dfft),
            "plain-2dfft" => Ok(Method::Plain2dfft),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}'; expected jcmsa, masked-2dfft, or plain-2dfft"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumAxis {
    Range,
    Velocity,
}

impl SpectrumAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumAxis::Range => "range",
            SpectrumAxis::Velocity => "velocity",
        }
    }
}

/// Accumulated, count-normalized magnitude spectrum along one axis.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub axis: SpectrumAxis,
    pub values: Vec<f64>,
    /// Number of vectors that contributed to the accumulation.
    pub contributing: usize,
}

/// Result of one estimator run along one axis.
#[derive(Debug, Clone)]
pub struct EstimationReport {
    pub method: Method,
    /// Physical estimate in meters (range axis) or meters per second.
    pub estimate: f64,
    /// 1-based index of the spectrum peak.
    pub peak_bin: usize,
    /// Peak-to-sidelobe ratio in decibels; infinite when everything outside
    /// the exclusion zone is numerically zero.
    pub psr_db: f64,
    /// Total solver iterations across all per-vector solves; zero for the
    /// transform-only methods.
    pub solver_iters_total: usize,
    pub spectrum: PowerSpectrum,
}

/// 1-based index of the global maximum; ties go to the smallest index.
pub fn peak_search(spectrum: &PowerSpectrum) -> usize {
    assert!(!spectrum.values.is_empty(), "peak search on an empty spectrum");
    let mut best = 0;
    for (i, &v) in spectrum.values.iter().enumerate() {
        if v > spectrum.values[best] {
            best = i;
        }
    }
    best + 1
}

/// Map a 1-based range bin to meters: bin 1 is zero range and each step is
/// c / (2 N df).
pub fn range_from_bin(k0: usize, cfg: &SimulationConfig) -> f64 {
    cfg.range_bin_width_m() * (k0 as f64 - 1.0)
}

/// Map a 1-based velocity bin to meters per second: bin 1 is zero velocity
/// and each step is c / (2 M T fc), with T set by the duration mode.
pub fn velocity_from_bin(l0: usize, cfg: &SimulationConfig) -> f64 {
    cfg.velocity_bin_width_mps() * (l0 as f64 - 1.0)
}

fn require_masked(chan: &ChannelMatrix, mask: &OccupancyMask) -> Result<()> {
    if chan.kind() != MatrixKind::Masked {
        return Err(Error::InvalidArgument(
            "estimator requires a masked channel matrix; apply the mask first".into(),
        ));
    }
    if chan.rows() != mask.rows() || chan.cols() != mask.cols() {
        return Err(Error::Shape(format!(
            "channel matrix is {}x{} but mask is {}x{}",
            chan.rows(),
            chan.cols(),
            mask.rows(),
            mask.cols()
        )));
    }
    Ok(())
}

fn finish(
    method: Method,
    axis: SpectrumAxis,
    mut acc: Vec<f64>,
    contributing: usize,
    iters: usize,
    cfg: &SimulationConfig,
) -> Result<EstimationReport> {
    if contributing == 0 {
        return Err(Error::NoData(
            "every vector along the requested axis is zero; nothing to estimate".into(),
        ));
    }
    for v in &mut acc {
        *v /= contributing as f64;
    }
    if acc.iter().all(|&v| v == 0.0) {
        return Err(Error::NoData(
            "accumulated spectrum is identically zero; the sparsity weight may exceed \
             every correlation peak"
                .into(),
        ));
    }
    let spectrum = PowerSpectrum { axis, values: acc, contributing };
    let peak_bin = peak_search(&spectrum);
    let estimate = match axis {
        SpectrumAxis::Range => range_from_bin(peak_bin, cfg),
        SpectrumAxis::Velocity => velocity_from_bin(peak_bin, cfg),
    };
    // A spectrum too short to have bins outside the exclusion zone has no
    // sidelobes at all, which reports as infinite.
    let psr = psr_db(&spectrum.values, 1).unwrap_or(f64::INFINITY);
    Ok(EstimationReport {
        method,
        estimate,
        peak_bin,
        psr_db: psr,
        solver_iters_total: iters,
        spectrum,
    })
}

/// Sparse range estimation: for every column with energy, gather its occupied
/// entries, solve the partial-DFT LASSO problem, and accumulate the solution
/// magnitude; the peak of the normalized accumulation gives the range bin.
pub fn estimate_range_jcmsa(
    chan: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
    fista_cfg: &FistaConfig,
) -> Result<EstimationReport> {
    require_masked(chan, mask)?;
    let n = chan.rows();
    let mut acc = vec![0.0; n];
    let mut contributing = 0;
    let mut iters = 0;
    for m in 0..chan.cols() {
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
        let sol = fista::solve(&op, &y, fista_cfg)?;
        for (a, z) in acc.iter_mut().zip(sol.solution.iter()) {
            *a += z.norm();
        }
        iters += sol.iterations;
        contributing += 1;
    }
    finish(Method::Jcmsa, SpectrumAxis::Range, acc, contributing, iters, cfg)
}

/// Sparse velocity estimation: the row-wise mirror of the range path, using
/// partial-IDFT operators over the symbol axis.
pub fn estimate_velocity_jcmsa(
    chan: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
    fista_cfg: &FistaConfig,
) -> Result<EstimationReport> {
    require_masked(chan, mask)?;
    let m_len = chan.cols();
    let mut acc = vec![0.0; m_len];
    let mut contributing = 0;
    let mut iters = 0;
    for nrow in 0..chan.rows() {
        let sel = row_selection(mask, nrow)?;
        if sel.is_empty() {
            continue;
        }
        let row = chan.row(nrow);
        let y: Vec<Complex64> = sel.iter().map(|i| row[i]).collect();
        if y.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let op = velocity_sensing_operator(&mask.row_bits(nrow), &sel)?;
        let sol = fista::solve(&op, &y, fista_cfg)?;
        for (a, z) in acc.iter_mut().zip(sol.solution.iter()) {
            *a += z.norm();
        }
        iters += sol.iterations;
        contributing += 1;
    }
    finish(Method::Jcmsa, SpectrumAxis::Velocity, acc, contributing, iters, cfg)
}

/// Baseline range estimation on masked data: inverse-transform each
/// zero-filled column and accumulate magnitudes. Identical to the sparse path
/// with the solve replaced by one unitary transform.
pub fn estimate_range_masked2dfft(
    chan: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
) -> Result<EstimationReport> {
    require_masked(chan, mask)?;
    let n = chan.rows();
    let mut acc = vec![0.0; n];
    let mut contributing = 0;
    for m in 0..chan.cols() {
        let col = chan.column(m);
        if col.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        for (a, z) in acc.iter_mut().zip(idft(&col).iter()) {
            *a += z.norm();
        }
        contributing += 1;
    }
    finish(Method::Masked2dfft, SpectrumAxis::Range, acc, contributing, 0, cfg)
}

/// Baseline velocity estimation on masked data: forward-transform each
/// zero-filled row and accumulate magnitudes.
pub fn estimate_velocity_masked2dfft(
    chan: &ChannelMatrix,
    mask: &OccupancyMask,
    cfg: &SimulationConfig,
) -> Result<EstimationReport> {
    require_masked(chan, mask)?;
    let m_len = chan.cols();
    let mut acc = vec![0.0; m_len];
    let mut contributing = 0;
    for nrow in 0..chan.rows() {
        let row = chan.row(nrow);
        if row.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        for (a, z) in acc.iter_mut().zip(dft(&row).iter()) {
            *a += z.norm();
        }
        contributing += 1;
    }
    finish(Method::Masked2dfft, SpectrumAxis::Velocity, acc, contributing, 0, cfg)
}

/// Conventional two-dimensional periodogram. The marginal power profiles
/// along each axis are reported, and each estimate comes from its marginal
/// peak. Accepts unprocessed or masked input alike.
pub fn estimate_plain_2dfft(
    chan: &ChannelMatrix,
    cfg: &SimulationConfig,
) -> Result<(EstimationReport, EstimationReport)> {
    let power = periodogram_2d(chan);
    if power.iter().all(|&p| p == 0.0) {
        return Err(Error::NoData("channel matrix is identically zero".into()));
    }
    let rows = chan.rows();
    let cols = chan.cols();
    let mut range_profile = vec![0.0; rows];
    let mut velocity_profile = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            let p = power[r * cols + c];
            range_profile[r] += p;
            velocity_profile[c] += p;
        }
    }
    let range = finish(
        Method::Plain2dfft,
        SpectrumAxis::Range,
        range_profile,
        cols,
        0,
        cfg,
    )?;
    let velocity = finish(
        Method::Plain2dfft,
        SpectrumAxis::Velocity,
        velocity_profile,
        rows,
        0,
        cfg,
    )?;
    Ok((range, velocity))
}

/// Render a spectrum as CSV text: 1-based bin, accumulated value, and the
/// physical coordinate of that bin.
pub fn spectrum_csv(spectrum: &PowerSpectrum, cfg: &SimulationConfig) -> String {
    let mut out = String::from("bin,value,physical\n");
    for (i, v) in spectrum.values.iter().enumerate() {
        let physical = match spectrum.axis {
            SpectrumAxis::Range => range_from_bin(i + 1, cfg),
            SpectrumAxis::Velocity => velocity_from_bin(i + 1, cfg),
        };
        out.push_str(&format!("{},{},{}\n", i + 1, v, physical));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_mask, synthesize, ChannelMatrix, MatrixKind, TargetTruth};
    use crate::config::{SimulationConfig, VelocityDurationMode};
    use crate::occupancy::{scenario1_mask, OccupancyMask};
    use num_complex::Complex64;

    fn small_cfg() -> SimulationConfig {
        SimulationConfig {
            n_subcarriers: 32,
            n_occupied: 16,
            n_symbols: 8,
            ..SimulationConfig::default()
        }
    }

    fn full_mask(cfg: &SimulationConfig) -> OccupancyMask {
        OccupancyMask::new(
            cfg.n_subcarriers,
            cfg.n_symbols,
            vec![true; cfg.n_subcarriers * cfg.n_symbols],
        )
        .unwrap()
    }

    #[test]
    fn peak_search_takes_the_first_of_equal_maxima() {
        let spec = PowerSpectrum {
            axis: SpectrumAxis::Range,
            values: vec![0.0, 1.0, 0.0],
            contributing: 1,
        };
        assert_eq!(peak_search(&spec), 2);
        let spec = PowerSpectrum {
            axis: SpectrumAxis::Range,
            values: vec![1.0, 1.0],
            contributing: 1,
        };
        assert_eq!(peak_search(&spec), 1);
    }

    #[test]
    fn bin_mappings_hit_the_published_values() {
        let cfg = SimulationConfig::default();
        assert_eq!(range_from_bin(7, &cfg), 117.1875);
        assert_eq!(range_from_bin(1, &cfg), 0.0);
        assert_eq!(range_from_bin(512, &cfg), 9980.46875);
        assert_eq!(velocity_from_bin(1, &cfg), 0.0);
        let sym = velocity_from_bin(3, &cfg);
        assert!((sym - 10.7134).abs() < 1e-3, "symbol-total mode gave {sym}");
        let elem_cfg = SimulationConfig {
            velocity_duration_mode: VelocityDurationMode::Elementary,
            ..cfg
        };
        let elem = velocity_from_bin(3, &elem_cfg);
        assert!((elem - 13.3929).abs() < 1e-3, "elementary mode gave {elem}");
    }

    #[test]
    fn sparse_range_estimate_is_bin_exact_at_high_snr() {
        let cfg = SimulationConfig::default();
        let truth = TargetTruth::from_config(&cfg);
        let mask = scenario1_mask(&cfg).unwrap();
        let chan = apply_mask(&synthesize(&cfg, &truth, 10.0, 3), &mask).unwrap();
        let report =
            estimate_range_jcmsa(&chan, &mask, &cfg, &FistaConfig::new(5201.0)).unwrap();
        assert_eq!(report.peak_bin, 7);
        assert_eq!(report.estimate, 117.1875);
        assert!(report.solver_iters_total > 0);
        assert_eq!(report.spectrum.contributing, cfg.n_symbols);
    }

    #[test]
    fn sparse_velocity_estimate_matches_the_published_bin() {
        let cfg = SimulationConfig {
            velocity_duration_mode: VelocityDurationMode::Elementary,
            ..SimulationConfig::default()
        };
        let truth = TargetTruth::from_config(&cfg);
        let mask = scenario1_mask(&cfg).unwrap();
        let chan = apply_mask(&synthesize(&cfg, &truth, 10.0, 4), &mask).unwrap();
        let report =
            estimate_velocity_jcmsa(&chan, &mask, &cfg, &FistaConfig::new(1.5)).unwrap();
        assert_eq!(report.peak_bin, 3);
        assert!((report.estimate - 13.3929).abs() < 1e-3);
        // Only occupied rows contribute.
        assert_eq!(report.spectrum.contributing, cfg.n_occupied);
    }

    #[test]
    fn masked_baseline_finds_the_same_bins_without_noise() {
        let cfg = small_cfg();
        let truth = TargetTruth::from_config(&cfg);
        let mask = scenario1_mask(&cfg).unwrap();
        let chan = apply_mask(&synthesize(&cfg, &truth, 400.0, 5), &mask).unwrap();
        let r = estimate_range_masked2dfft(&chan, &mask, &cfg).unwrap();
        let v = estimate_velocity_masked2dfft(&chan, &mask, &cfg).unwrap();
        let fista_cfg = FistaConfig::new(0.5);
        let rj = estimate_range_jcmsa(&chan, &mask, &cfg, &fista_cfg).unwrap();
        let vj = estimate_velocity_jcmsa(&chan, &mask, &cfg, &fista_cfg).unwrap();
        assert_eq!(r.peak_bin, rj.peak_bin);
        assert_eq!(v.peak_bin, vj.peak_bin);
        assert_eq!(r.solver_iters_total, 0);
    }

    #[test]
    fn masked_sidelobes_are_finite_but_sparse_solution_zeroes_them() {
        let cfg = SimulationConfig {
            target_range_m: 117.1875,
            ..SimulationConfig::default()
        };
        let truth = TargetTruth::from_config(&cfg);
        let mask = scenario1_mask(&cfg).unwrap();
        let chan = apply_mask(&synthesize(&cfg, &truth, 10.0, 6), &mask).unwrap();
        let masked = estimate_range_masked2dfft(&chan, &mask, &cfg).unwrap();
        assert!(masked.psr_db.is_finite(), "masked transform keeps sidelobes");
        let sparse =
            estimate_range_jcmsa(&chan, &mask, &cfg, &FistaConfig::new(5201.0)).unwrap();
        assert!(sparse.psr_db.is_infinite(), "psr {}", sparse.psr_db);
    }

    #[test]
    fn plain_periodogram_reports_marginal_peaks() {
        let cfg = SimulationConfig::default();
        let truth = TargetTruth::from_config(&cfg);
        let chan = synthesize(&cfg, &truth, 300.0, 7);
        let (r, v) = estimate_plain_2dfft(&chan, &cfg).unwrap();
        assert_eq!(r.peak_bin, 7);
        assert_eq!(v.peak_bin, 3);
        assert_eq!(r.method, Method::Plain2dfft);
    }

    #[test]
    fn zero_matrix_is_a_no_data_error() {
        let cfg = small_cfg();
        let zero = ChannelMatrix::new(
            cfg.n_subcarriers,
            cfg.n_symbols,
            MatrixKind::Unprocessed,
            vec![Complex64::new(0.0, 0.0); cfg.n_subcarriers * cfg.n_symbols],
        )
        .unwrap();
        assert!(estimate_plain_2dfft(&zero, &cfg).is_err());
        let mask = full_mask(&cfg);
        let masked = apply_mask(&zero, &mask).unwrap();
        assert!(estimate_range_masked2dfft(&masked, &mask, &cfg).is_err());
        assert!(estimate_range_jcmsa(&masked, &mask, &cfg, &FistaConfig::new(1.0)).is_err());
    }

    #[test]
    fn unmasked_input_is_rejected_by_masked_estimators() {
        let cfg = small_cfg();
        let truth = TargetTruth::from_config(&cfg);
        let chan = synthesize(&cfg, &truth, 10.0, 8);
        let mask = full_mask(&cfg);
        assert!(estimate_range_masked2dfft(&chan, &mask, &cfg).is_err());
    }

    #[test]
    fn full_occupancy_least_squares_equals_the_masked_spectrum() {
        let cfg = small_cfg();
        let truth = TargetTruth::from_config(&cfg);
        let mask = full_mask(&cfg);
        let chan = apply_mask(&synthesize(&cfg, &truth, 5.0, 9), &mask).unwrap();
        let fista_cfg = FistaConfig {
            lambda: 0.0,
            max_iters: 300,
            error_tol: 0.0,
            lipschitz: crate::fista::Lipschitz::Auto,
        };
        let sparse = estimate_range_jcmsa(&chan, &mask, &cfg, &fista_cfg).unwrap();
        let masked = estimate_range_masked2dfft(&chan, &mask, &cfg).unwrap();
        for (a, b) in sparse.spectrum.values.iter().zip(masked.spectrum.values.iter()) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn skipped_zero_columns_shrink_the_contributing_count() {
        let cfg = small_cfg();
        let truth = TargetTruth::from_config(&cfg);
        // Mask that blanks every column beyond the first two.
        let mut bits = vec![false; cfg.n_subcarriers * cfg.n_symbols];
        for r in 0..cfg.n_subcarriers {
            for c in 0..2 {
                bits[r * cfg.n_symbols + c] = true;
            }
        }
        let mask = OccupancyMask::new(cfg.n_subcarriers, cfg.n_symbols, bits).unwrap();
        let chan = apply_mask(&synthesize(&cfg, &truth, 20.0, 10), &mask).unwrap();
        let report = estimate_range_masked2dfft(&chan, &mask, &cfg).unwrap();
        assert_eq!(report.spectrum.contributing, 2);
    }

    #[test]
    fn spectrum_csv_carries_physical_coordinates() {
        let cfg = SimulationConfig::default();
        let spec = PowerSpectrum {
            axis: SpectrumAxis::Range,
            values: vec![0.5, 2.0, 0.25],
            contributing: 3,
        };
        let text = spectrum_csv(&spec, &cfg);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin,value,physical");
        assert_eq!(lines[2], "2,2,19.53125");
    }
}
