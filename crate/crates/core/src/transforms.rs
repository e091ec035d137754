//! Unitary Fourier transforms and partial-Fourier sensing operators.
//!
//! Both transform directions carry the 1/sqrt(N) factor, so the DFT matrix is
//! unitary and its adjoint equals its inverse. A sensing operator is a row
//! gather of one of those matrices: applying it means transforming the full
//! vector and keeping the occupied entries, and its adjoint scatters back and
//! applies the opposite direction. Selected rows of a unitary Fourier matrix
//! are orthonormal, which pins the operator norm at exactly one.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::occupancy::SelectionIndex;

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    // Plans are cached per size and direction; the solver applies the same
    // transform thousands of times.
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
}

fn plan(size: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry((size, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(size)
                } else {
                    planner.plan_fft_inverse(size)
                }
            })
            .clone()
    })
}

fn transform(x: &[Complex64], forward: bool) -> Vec<Complex64> {
    assert!(!x.is_empty(), "transform of an empty vector");
    let mut buf = x.to_vec();
    plan(x.len(), forward).process(&mut buf);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// Unitary forward DFT: X[k] = (1/sqrt(N)) sum_n x[n] exp(-j 2 pi n k / N).
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, true)
}

/// Unitary inverse DFT: x[n] = (1/sqrt(N)) sum_k X[k] exp(+j 2 pi n k / N).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// Full-size unitary DFT in either direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierOperator {
    size: usize,
    direction: TransformDirection,
}

impl FourierOperator {
    pub fn new(size: usize, direction: TransformDirection) -> Self {
        FourierOperator { size, direction }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn direction(&self) -> TransformDirection {
        self.direction
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "operator size mismatch");
        match self.direction {
            TransformDirection::Forward => dft(x),
            TransformDirection::Inverse => idft(x),
        }
    }

    /// The adjoint of a unitary transform is the opposite direction.
    pub fn adjoint_apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "operator size mismatch");
        match self.direction {
            TransformDirection::Forward => idft(x),
            TransformDirection::Inverse => dft(x),
        }
    }
}

/// Anything that acts like a matrix on complex vectors. The solver only needs
/// forward and adjoint applications, so operators never materialize.
pub trait LinearOperator {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;
    fn forward(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

/// Row gather of a unitary Fourier matrix: the measurement model of one
/// masked column (range) or one masked row (velocity).
#[derive(Debug, Clone)]
pub struct SensingOperator {
    base: FourierOperator,
    selection: SelectionIndex,
    mask: Vec<bool>,
}

impl SensingOperator {
    /// The selection must list exactly the positions where the mask is set.
    pub fn new(base: FourierOperator, selection: SelectionIndex, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != base.size() || selection.bound() != base.size() {
            return Err(Error::Shape(format!(
                "mask length {} and selection bound {} must both equal operator size {}",
                mask.len(),
                selection.bound(),
                base.size()
            )));
        }
        let from_mask: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        if from_mask != selection.as_slice() {
            return Err(Error::Mask(
                "selection is inconsistent with the mask's occupied positions".into(),
            ));
        }
        if selection.is_empty() {
            return Err(Error::NoData("selection is empty; nothing is observed".into()));
        }
        Ok(SensingOperator { base, selection, mask })
    }

    pub fn selection(&self) -> &SelectionIndex {
        &self.selection
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn base(&self) -> FourierOperator {
        self.base
    }
}

impl LinearOperator for SensingOperator {
    fn domain_len(&self) -> usize {
        self.base.size()
    }

    fn range_len(&self) -> usize {
        self.selection.len()
    }

    fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let full = self.base.apply(x);
        self.selection.iter().map(|i| full[i]).collect()
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.selection.len(), "adjoint input length mismatch");
        let mut full = vec![Complex64::new(0.0, 0.0); self.base.size()];
        for (slot, value) in self.selection.iter().zip(y.iter()) {
            full[slot] = *value;
        }
        self.base.adjoint_apply(&full)
    }
}

/// Measurement operator for one masked column: selected rows of the unitary
/// forward DFT, mapping a range spectrum to the observed subcarrier samples.
pub fn range_sensing_operator(
    mask_column: &[bool],
    selection: &SelectionIndex,
) -> Result<SensingOperator> {
    SensingOperator::new(
        FourierOperator::new(mask_column.len(), TransformDirection::Forward),
        selection.clone(),
        mask_column.to_vec(),
    )
}

/// Measurement operator for one masked row: selected rows of the unitary
/// inverse DFT, mapping a velocity spectrum to the observed symbol samples.
pub fn velocity_sensing_operator(
    mask_row: &[bool],
    selection: &SelectionIndex,
) -> Result<SensingOperator> {
    SensingOperator::new(
        FourierOperator::new(mask_row.len(), TransformDirection::Inverse),
        selection.clone(),
        mask_row.to_vec(),
    )
}

/// Two-dimensional power spectrum: IDFT along every column (range axis), DFT
/// along every row of the result (velocity axis), squared magnitude.
/// Row-major `rows x cols` output.
pub fn periodogram_2d(chan: &ChannelMatrix) -> Vec<f64> {
    let rows = chan.rows();
    let cols = chan.cols();
    let mut stage = vec![Complex64::new(0.0, 0.0); rows * cols];
    for m in 0..cols {
        let col = idft(&chan.column(m));
        for n in 0..rows {
            stage[n * cols + m] = col[n];
        }
    }
    let mut power = vec![0.0; rows * cols];
    for n in 0..rows {
        let row = dft(&stage[n * cols..(n + 1) * cols]);
        for m in 0..cols {
            power[n * cols + m] = row[m].norm_sqr();
        }
    }
    power
}
