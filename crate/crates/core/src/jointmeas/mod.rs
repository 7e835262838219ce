//! Simultaneous von Neumann instruments on pre/postselected ensembles.
//!
//! Instrument `k` couples through `exp(i q_k A_k)`. Conditioning on both selections
//! reduces the instruments' joint dynamics to multiplication by a scalar Kraus
//! function `F(q) = <psi_f|exp(i sum_k q_k A_k)|psi_i> / <psi_f|psi_i>` in the
//! coupling representation, so the instruments never share a tensor state with
//! the system.

mod experiment;
mod fit;
mod kraus;
mod pointer;
mod states;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::{Error, Result};

pub use experiment::{
    canonical_inference_experiment, factorization_residual, four_variable_experiment, ladder_commutators,
    naive_pointer_sweep, ConvergenceRow, FourVariableConfig, FourVariableReport, InferenceConfig, InferenceReport,
    LadderCommutators, PointerSummary, SweepRow,
};
pub use fit::{phase_fit, PhaseFit, MIN_FIT_MODULUS};
pub use kraus::{kraus_sample, kraus_sample_factorized, kraus_sample_split, SplitPropagator};
pub use pointer::{
    conditional_pointer_distribution, total_variation, uncertainty_products, PointerDistribution, UncertaintyReport,
};
pub use states::{naive_ensemble, regularized_epr_ensemble, EPRSelection, Envelope, NaiveSelection};

/// Coupling grid `q_j = -q_max + j dq`, `dq = 2 q_max / (n - 1)`, shared by every axis,
/// together with one pointer spread per instrument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstrumentGrid {
    n: usize,
    q_max: f64,
    spreads: Vec<f64>,
}

impl InstrumentGrid {
    pub fn new(n: usize, q_max: f64, spreads: Vec<f64>) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!("instrument grid needs n >= 8, got {n}")));
        }
        if !(q_max.is_finite() && q_max > 0.0) {
            return Err(Error::InvalidParameter(format!("q_max must be positive, got {q_max}")));
        }
        if spreads.len() != 2 && spreads.len() != 4 {
            return Err(Error::InvalidParameter(format!("2 or 4 instruments supported, got {}", spreads.len())));
        }
        if let Some(s) = spreads.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidParameter(format!("pointer spreads must be positive, got {s}")));
        }
        Ok(Self { n, q_max, spreads })
    }

    /// Same coupling points, different instrument spreads.
    pub fn with_spreads(&self, spreads: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.q_max, spreads)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn axes(&self) -> usize {
        self.spreads.len()
    }

    pub fn spreads(&self) -> &[f64] {
        &self.spreads
    }

    /// Coupling-variable spreads of minimal-uncertainty instruments, `dq_k = 1/(2 dpi_k)`.
    pub fn coupling_spreads(&self) -> Vec<f64> {
        self.spreads.iter().map(|s| 0.5 / s).collect()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.q_max / (self.n - 1) as f64
    }

    pub fn q(&self, j: usize) -> f64 {
        -self.q_max + j as f64 * self.step()
    }

    pub fn q_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.q(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.axes() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of flat index `idx` (row-major, axis 0 slowest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        unravel(idx, self.n, self.axes()).into_iter().map(|j| self.q(j)).collect()
    }

    /// Spacing of the pointer grid dual to the coupling grid.
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.step())
    }

    /// Pointer values in ascending order (FFT frequencies, zero-centred).
    pub fn pi_values(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n).map(|m| (m - n / 2) as f64 * self.dual_spacing()).collect()
    }

    /// Index of `q = 0` when the grid contains it.
    pub fn origin_index(&self) -> Option<usize> {
        (self.n % 2 == 1).then(|| (0..self.axes()).fold(0, |acc, _| acc * self.n + self.n / 2))
    }
}

pub(crate) fn unravel(mut idx: usize, n: usize, axes: usize) -> Vec<usize> {
    let mut out = vec![0; axes];
    for k in (0..axes).rev() {
        out[k] = idx % n;
        idx /= n;
    }
    out
}

/// Kraus function sampled on the coupling grid, normalized by `<psi_f|psi_i>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausSample {
    pub n: usize,
    pub q_max: f64,
    pub axes: usize,
    /// Row-major over the product grid, axis 0 slowest.
    pub values: Vec<C64>,
}

impl KrausSample {
    /// Samples `f` on the grid points; used for synthetic models.
    pub fn from_fn(grid: &InstrumentGrid, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { n: grid.n(), q_max: grid.q_max(), axes: grid.axes(), values }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.q_max / (self.n - 1) as f64
    }

    pub fn q(&self, j: usize) -> f64 {
        -self.q_max + j as f64 * self.step()
    }

    pub fn at(&self, index: &[usize]) -> C64 {
        self.values[index.iter().fold(0, |acc, &j| acc * self.n + j)]
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `max | |F| - 1 |`.
    pub fn flatness(&self) -> f64 {
        self.values.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub(crate) fn matches(&self, grid: &InstrumentGrid) -> Result<()> {
        if self.n != grid.n() || self.axes != grid.axes() || (self.q_max - grid.q_max()).abs() > 1e-12 * grid.q_max() {
            return Err(Error::InvalidParameter(format!(
                "Kraus sample (n={}, q_max={}, axes={}) does not match instrument grid (n={}, q_max={}, axes={})",
                self.n,
                self.q_max,
                self.axes,
                grid.n(),
                grid.q_max(),
                grid.axes()
            )));
        }
        Ok(())
    }
}
