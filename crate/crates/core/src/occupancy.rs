//! Spectrum occupancy masks.
//!
//! A mask records, per subcarrier and per OFDM symbol, whether that resource
//! element is available for sensing (1) or licensed away (0). Two builtin
//! layouts are provided: a static edge-band split (scenario 1) and a
//! time-varying layout whose second half-frame flips to the complementary
//! center band (scenario 2). Arbitrary layouts load from CSV.

use std::path::Path;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};

/// Ascending list of occupied indices along one axis of the mask.
///
/// Invariant: strictly increasing, every index below `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionIndex {
    indices: Vec<usize>,
    bound: usize,
}

impl SelectionIndex {
    pub fn new(indices: Vec<usize>, bound: usize) -> Result<Self> {
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Mask(format!(
                    "selection indices must be strictly ascending, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= bound {
                return Err(Error::Mask(format!(
                    "selection index {last} out of bounds for axis of length {bound}"
                )));
            }
        }
        Ok(SelectionIndex { indices, bound })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Length of the full axis this selection draws from.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

/// Occupancy grid, `n_subcarriers` rows by `n_symbols` columns, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl OccupancyMask {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Mask("mask must have at least one row and column".into()));
        }
        if bits.len() != rows * cols {
            return Err(Error::Shape(format!(
                "mask data length {} does not match {rows}x{cols}",
                bits.len()
            )));
        }
        Ok(OccupancyMask { rows, cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    /// Occupied-cell count of column `col`.
    pub fn column_count(&self, col: usize) -> usize {
        (0..self.rows).filter(|&n| self.get(n, col)).count()
    }

    /// Occupied-cell count of row `row`.
    pub fn row_count(&self, row: usize) -> usize {
        (0..self.cols).filter(|&m| self.get(row, m)).count()
    }

    /// Column `col` as a bit vector over subcarriers.
    pub fn column_bits(&self, col: usize) -> Vec<bool> {
        (0..self.rows).map(|n| self.get(n, col)).collect()
    }

    /// Row `row` as a bit vector over symbols.
    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        self.bits[row * self.cols..(row + 1) * self.cols].to_vec()
    }

    pub fn total_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Occupied subcarrier indices of symbol `col`, ascending.
pub fn column_selection(mask: &OccupancyMask, col: usize) -> Result<SelectionIndex> {
    if col >= mask.cols() {
        return Err(Error::Shape(format!(
            "column {col} out of bounds for mask with {} columns",
            mask.cols()
        )));
    }
    let idx: Vec<usize> = (0..mask.rows()).filter(|&n| mask.get(n, col)).collect();
    SelectionIndex::new(idx, mask.rows())
}

/// Occupied symbol indices of subcarrier `row`, ascending.
pub fn row_selection(mask: &OccupancyMask, row: usize) -> Result<SelectionIndex> {
    if row >= mask.rows() {
        return Err(Error::Shape(format!(
            "row {row} out of bounds for mask with {} rows",
            mask.rows()
        )));
    }
    let idx: Vec<usize> = (0..mask.cols()).filter(|&m| mask.get(row, m)).collect();
    SelectionIndex::new(idx, mask.cols())
}

fn check_band_split(cfg: &SimulationConfig) -> Result<(usize, usize)> {
    let n = cfg.n_subcarriers;
    let occ = cfg.n_occupied;
    if occ > n {
        return Err(Error::Mask(format!(
            "n_occupied ({occ}) exceeds n_subcarriers ({n})"
        )));
    }
    if !occ.is_multiple_of(2) {
        return Err(Error::Mask(format!(
            "edge-band layout needs an even n_occupied, got {occ}"
        )));
    }
    Ok((n, occ))
}

fn edge_column(n: usize, occ: usize) -> Vec<bool> {
    let half = occ / 2;
    (0..n).map(|i| i < half || i >= n - half).collect()
}

fn center_column(n: usize, occ: usize) -> Vec<bool> {
    edge_column(n, occ).into_iter().map(|b| !b).collect()
}

/// Static layout: every symbol occupies the lowest and highest
/// `n_occupied / 2` subcarriers, leaving the band center licensed away.
pub fn scenario1_mask(cfg: &SimulationConfig) -> Result<OccupancyMask> {
    let (n, occ) = check_band_split(cfg)?;
    let col = edge_column(n, occ);
    let mut bits = vec![false; n * cfg.n_symbols];
    for (row, &bit) in col.iter().enumerate() {
        for m in 0..cfg.n_symbols {
            bits[row * cfg.n_symbols + m] = bit;
        }
    }
    OccupancyMask::new(n, cfg.n_symbols, bits)
}

/// Time-varying layout: the first half of the frame uses the edge bands, the
/// second half the complementary center band. Needs an even symbol count.
pub fn scenario2_mask(cfg: &SimulationConfig) -> Result<OccupancyMask> {
    let (n, occ) = check_band_split(cfg)?;
    if !cfg.n_symbols.is_multiple_of(2) {
        return Err(Error::Mask(format!(
            "half-frame layout needs an even n_symbols, got {}",
            cfg.n_symbols
        )));
    }
    let edge = edge_column(n, occ);
    let center = center_column(n, occ);
    let half = cfg.n_symbols / 2;
    let mut bits = vec![false; n * cfg.n_symbols];
    for row in 0..n {
        for m in 0..cfg.n_symbols {
            bits[row * cfg.n_symbols + m] = if m < half { edge[row] } else { center[row] };
        }
    }
    OccupancyMask::new(n, cfg.n_symbols, bits)
}

/// Reads a mask from CSV: one row per subcarrier, comma-separated 0/1 cells,
/// no header, rectangular.
pub fn load_mask_csv(path: &Path) -> Result<OccupancyMask> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Mask(format!("{}: {e}", path.display())))?;
    parse_mask_csv(&text)
}

pub fn parse_mask_csv(text: &str) -> Result<OccupancyMask> {
    let mut bits = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match cols {
            None => cols = Some(cells.len()),
            Some(c) if c != cells.len() => {
                return Err(Error::Mask(format!(
                    "row {} has {} cells, expected {c}",
                    lineno + 1,
                    cells.len()
                )));
            }
            _ => {}
        }
        for cell in cells {
            match cell {
                "0" => bits.push(false),
                "1" => bits.push(true),
                other => {
                    return Err(Error::Mask(format!(
                        "row {}: cells must be 0 or 1, got {other:?}",
                        lineno + 1
                    )));
                }
            }
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Mask("mask CSV is empty".into()))?;
    OccupancyMask::new(rows, cols, bits)
}

pub fn save_mask_csv(mask: &OccupancyMask, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in 0..mask.rows() {
        let line: Vec<&str> = (0..mask.cols())
            .map(|m| if mask.get(row, m) { "1" } else { "0" })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(n: usize, occ: usize, syms: usize) -> SimulationConfig {
        SimulationConfig {
            n_subcarriers: n,
            n_occupied: occ,
            n_symbols: syms,
            kcv_folds: 1,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn edge_layout_matches_hand_example() {
        let mask = scenario1_mask(&small_cfg(8, 4, 3)).unwrap();
        let expected = [true, true, false, false, false, false, true, true];
        for m in 0..3 {
            assert_eq!(mask.column_bits(m), expected);
            assert_eq!(mask.column_count(m), 4);
        }
    }

    #[test]
    fn half_frame_layout_flips_to_center() {
        let mask = scenario2_mask(&small_cfg(8, 4, 4)).unwrap();
        let edge = [true, true, false, false, false, false, true, true];
        let center = [false, false, true, true, true, true, false, false];
        assert_eq!(mask.column_bits(0), edge);
        assert_eq!(mask.column_bits(1), edge);
        assert_eq!(mask.column_bits(2), center);
        assert_eq!(mask.column_bits(3), center);
    }

    #[test]
    fn half_frame_halves_are_complementary() {
        let cfg = SimulationConfig::default();
        let mask = scenario2_mask(&cfg).unwrap();
        for row in 0..mask.rows() {
            assert_ne!(mask.get(row, 0), mask.get(row, cfg.n_symbols - 1));
        }
        // Center-band columns hold the complement count.
        assert_eq!(
            mask.column_count(cfg.n_symbols - 1),
            cfg.n_subcarriers - cfg.n_occupied
        );
        assert_eq!(mask.column_count(0), cfg.n_occupied);
    }

    #[test]
    fn odd_occupied_and_odd_symbols_are_rejected() {
        assert!(scenario1_mask(&small_cfg(8, 3, 2)).is_err());
        assert!(scenario1_mask(&small_cfg(8, 10, 2)).is_err());
        assert!(scenario2_mask(&small_cfg(8, 4, 3)).is_err());
    }

    #[test]
    fn selections_are_ascending_and_match_counts() {
        let mask = scenario2_mask(&small_cfg(16, 8, 4)).unwrap();
        for m in 0..4 {
            let sel = column_selection(&mask, m).unwrap();
            assert_eq!(sel.len(), mask.column_count(m));
            assert!(sel.as_slice().windows(2).all(|w| w[0] < w[1]));
        }
        for n in 0..16 {
            let sel = row_selection(&mask, n).unwrap();
            assert_eq!(sel.len(), mask.row_count(n));
        }
        assert!(column_selection(&mask, 4).is_err());
        assert!(row_selection(&mask, 16).is_err());
    }

    #[test]
    fn row_column_counts_agree_on_total() {
        let mask = scenario2_mask(&small_cfg(32, 12, 6)).unwrap();
        let by_cols: usize = (0..mask.cols()).map(|m| mask.column_count(m)).sum();
        let by_rows: usize = (0..mask.rows()).map(|n| mask.row_count(n)).sum();
        assert_eq!(by_cols, by_rows);
        assert_eq!(by_cols, mask.total_ones());
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let mask = scenario2_mask(&small_cfg(8, 4, 4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.csv");
        save_mask_csv(&mask, &path).unwrap();
        let back = load_mask_csv(&path).unwrap();
        assert_eq!(back, mask);

        assert!(parse_mask_csv("1,0\n0\n").is_err());
        assert!(parse_mask_csv("1,2\n").is_err());
        assert!(parse_mask_csv("").is_err());
    }

    #[test]
    fn selection_index_rejects_disorder_and_overflow() {
        assert!(SelectionIndex::new(vec![0, 2, 2], 8).is_err());
        assert!(SelectionIndex::new(vec![3, 1], 8).is_err());
        assert!(SelectionIndex::new(vec![0, 8], 8).is_err());
        let ok = SelectionIndex::new(vec![0, 5, 7], 8).unwrap();
        assert_eq!(ok.len(), 3);
        assert_eq!(ok.bound(), 8);
    }
}
