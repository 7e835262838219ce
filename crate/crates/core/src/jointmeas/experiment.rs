use num_complex::Complex64 as C64;
use serde::Serialize;

use super::fit::{phase_fit, PhaseFit};
use super::kraus::{kraus_sample, kraus_sample_factorized, kraus_sample_split};
use super::pointer::{conditional_pointer_distribution, uncertainty_products, PointerDistribution, UncertaintyReport};
use super::states::{naive_ensemble, regularized_epr_ensemble, EPRSelection, Envelope, NaiveSelection};
use super::InstrumentGrid;
use crate::qlinalg::{grid_canonical_pair, CanonicalGrid};
use crate::qlinalg::{unitary_from_generator, CMatrix, StateVector};
use crate::weakcore::state_matrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InferenceConfig {
    pub d: usize,
    pub length: f64,
    /// Fine grid for the phase fit.
    pub fit_grid: InstrumentGrid,
    /// Coarser, wider grid for pointer distributions.
    pub pointer_grid: Option<InstrumentGrid>,
    /// Extra grid sizes fitted for the convergence table.
    pub convergence_dims: Vec<usize>,
}

impl InferenceConfig {
    pub fn new(d: usize, length: f64) -> Self {
        Self {
            d,
            length,
            fit_grid: InstrumentGrid::new(9, 0.5, vec![1.0, 1.0]).expect("static grid"),
            pointer_grid: None,
            convergence_dims: vec![32, 64, 128],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub d: usize,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub residual_rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerSummary {
    pub centroid: Vec<f64>,
    pub dual_spacing: f64,
    /// Largest centroid deviation from the prediction, in dual-grid spacings.
    pub centroid_error_spacings: f64,
    pub uncertainty: UncertaintyReport,
    /// Output over instrument spread, per axis.
    pub spread_ratios: Vec<f64>,
    #[serde(skip)]
    pub distribution: PointerDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InferenceReport {
    pub selection: EPRSelection,
    pub d: usize,
    pub length: f64,
    pub predicted: [f64; 2],
    pub fit: PhaseFit,
    /// Largest `|alpha_k - predicted_k|`.
    pub alpha_error: f64,
    /// Fit of the naive momentum/position selection on the same grids.
    pub naive_fit: PhaseFit,
    /// `|beta_epr| / |beta_naive|`.
    pub beta_ratio: f64,
    pub pointer: Option<PointerSummary>,
    pub convergence: Vec<ConvergenceRow>,
}

fn epr_fit(sel: &EPRSelection, d: usize, length: f64, grid: &InstrumentGrid) -> Result<PhaseFit> {
    let cg = CanonicalGrid::new(d, length)?;
    let ens = regularized_epr_ensemble(sel, &cg)?;
    let (x, p) = grid_canonical_pair(&cg);
    phase_fit(&kraus_sample(&ens, &[x, p], grid)?)
}

fn pointer_summary(
    sample: &super::KrausSample,
    grid: &InstrumentGrid,
    predicted: &[f64],
) -> Result<PointerSummary> {
    let dist = conditional_pointer_distribution(sample, grid)?;
    let centroid = dist.centroid();
    let err = centroid.iter().zip(predicted).map(|(c, p)| (c - p).abs()).fold(0.0, f64::max);
    let uncertainty = uncertainty_products(&dist);
    let spread_ratios = uncertainty.output_spreads.iter().zip(grid.spreads()).map(|(o, s)| o / s).collect();
    Ok(PointerSummary {
        centroid,
        dual_spacing: grid.dual_spacing(),
        centroid_error_spacings: err / grid.dual_spacing(),
        uncertainty,
        spread_ratios,
        distribution: dist,
    })
}

/// Joint inference of `(x, p)` with EPR ancilla selections, compared with the
/// naive momentum-then-position selection on the same grid.
pub fn canonical_inference_experiment(sel: &EPRSelection, cfg: &InferenceConfig) -> Result<InferenceReport> {
    if cfg.fit_grid.axes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: cfg.fit_grid.axes() });
    }
    let cg = CanonicalGrid::new(cfg.d, cfg.length)?;
    let ens = regularized_epr_ensemble(sel, &cg)?;
    let (x, p) = grid_canonical_pair(&cg);
    let obs = [x, p];
    let predicted = [sel.x(), sel.p()];
    let fit = phase_fit(&kraus_sample(&ens, &obs, &cfg.fit_grid)?)?;
    let alpha_error = fit.alpha.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).fold(0.0, f64::max);

    let naive = naive_ensemble(&NaiveSelection::plane_wave(sel.x(), sel.p()), &cg)?;
    let naive_fit = phase_fit(&kraus_sample(&naive, &obs, &cfg.fit_grid)?)?;
    let beta_ratio = fit.beta(0, 1).abs() / naive_fit.beta(0, 1).abs();

    let pointer = match &cfg.pointer_grid {
        Some(pg) => Some(pointer_summary(&kraus_sample(&ens, &obs, pg)?, pg, &predicted)?),
        None => None,
    };

    let mut convergence = Vec::new();
    for &d in &cfg.convergence_dims {
        let f = if d == cfg.d { fit.clone() } else { epr_fit(sel, d, cfg.length, &cfg.fit_grid)? };
        convergence.push(ConvergenceRow { d, alpha: f.alpha.clone(), beta: f.beta(0, 1), residual_rms: f.residual_rms });
    }
    Ok(InferenceReport {
        selection: *sel,
        d: cfg.d,
        length: cfg.length,
        predicted,
        fit,
        alpha_error,
        naive_fit,
        beta_ratio,
        pointer,
        convergence,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourVariableConfig {
    pub d: usize,
    pub length: f64,
    pub fit_grid: InstrumentGrid,
    /// Coupling grid for the pointer sweep; its own spreads are not used.
    pub pointer_grid: InstrumentGrid,
    pub sweep: Vec<Vec<f64>>,
}

impl FourVariableConfig {
    pub fn new(d: usize, length: f64) -> Self {
        let mut sweep: Vec<Vec<f64>> = [0.75, 1.0, 1.5, 2.0].iter().map(|&s| vec![s; 4]).collect();
        sweep.extend([[1.0, 2.0, 2.0, 1.0], [2.0, 1.0, 1.0, 2.0], [1.0, 1.0, 2.0, 2.0], [2.0, 2.0, 1.0, 1.0]].map(Vec::from));
        Self {
            d,
            length,
            fit_grid: InstrumentGrid::new(9, 0.5, vec![1.0; 4]).expect("static grid"),
            pointer_grid: InstrumentGrid::new(16, 3.0, vec![1.0; 4]).expect("static grid"),
            sweep,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub spreads: Vec<f64>,
    pub output_spreads: Vec<f64>,
    pub product: f64,
    pub meets_floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourVariableReport {
    pub selection: EPRSelection,
    pub d: usize,
    pub length: f64,
    /// `(x, p, x_a, p_a)`.
    pub predicted: [f64; 4],
    pub fit: PhaseFit,
    /// `(beta_14, beta_23)`.
    pub crossed: [f64; 2],
    /// `(beta_12, beta_34)`.
    pub direct: [f64; 2],
    /// Empirical check of the four-product floor `1/4`, which is conjectural.
    pub conjecture_check: Vec<SweepRow>,
    pub min_product: f64,
}

/// Four instruments on `(x, p)` of the system and `(x_a, p_a)` of the ancilla.
/// Without an explicit envelope the selection uses the flat-top profile.
pub fn four_variable_experiment(sel: &EPRSelection, cfg: &FourVariableConfig) -> Result<FourVariableReport> {
    for g in [&cfg.fit_grid, &cfg.pointer_grid] {
        if g.axes() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: g.axes() });
        }
    }
    let sel = match sel.envelope {
        Some(_) => *sel,
        None => sel.with_envelope(Envelope::default_flat_top(cfg.length)),
    };
    let cg = CanonicalGrid::new(cfg.d, cfg.length)?;
    let ens = regularized_epr_ensemble(&sel, &cg)?;
    let (x, p) = grid_canonical_pair(&cg);
    let obs = [x, p];
    let fit = phase_fit(&kraus_sample_factorized(&ens, &obs, &obs, &cfg.fit_grid)?)?;
    let pointer_sample = kraus_sample_factorized(&ens, &obs, &obs, &cfg.pointer_grid)?;
    let mut rows = Vec::new();
    for spreads in &cfg.sweep {
        let g = cfg.pointer_grid.with_spreads(spreads.clone())?;
        let u = uncertainty_products(&conditional_pointer_distribution(&pointer_sample, &g)?);
        rows.push(SweepRow {
            spreads: spreads.clone(),
            output_spreads: u.output_spreads,
            product: u.total_product,
            meets_floor: u.meets_floor,
        });
    }
    let min_product = rows.iter().map(|r| r.product).fold(f64::INFINITY, f64::min);
    Ok(FourVariableReport {
        selection: sel,
        d: cfg.d,
        length: cfg.length,
        predicted: [sel.x(), sel.p(), sel.x_a(), sel.p_a()],
        crossed: [fit.beta(0, 3), fit.beta(1, 2)],
        direct: [fit.beta(0, 1), fit.beta(2, 3)],
        fit,
        conjecture_check: rows,
        min_product,
    })
}

/// Pointer uncertainties of the naive selection for several instrument spread
/// pairs, from one split-operator Kraus sample on `grid`.
pub fn naive_pointer_sweep(
    sel: &NaiveSelection,
    cgrid: &CanonicalGrid,
    grid: &InstrumentGrid,
    spreads: &[[f64; 2]],
    steps: usize,
) -> Result<Vec<UncertaintyReport>> {
    let ens = naive_ensemble(sel, cgrid)?;
    let sample = kraus_sample_split(&ens, cgrid, grid, steps)?;
    spreads
        .iter()
        .map(|s| {
            let g = grid.with_spreads(s.to_vec())?;
            Ok(uncertainty_products(&conditional_pointer_distribution(&sample, &g)?))
        })
        .collect()
}

/// Largest distance between `exp(i(x q1 + p q2)) (x) I |psi_i>` and
/// `exp(i(x_- q1 + p_+ q2)/2) exp(i(x_+ q1 + p_- q2)) |psi_i>` over the samples,
/// with `x_+ = (x + x_a)/2`, `x_- = x - x_a`, `p_+ = p + p_a`, `p_- = (p - p_a)/2`.
pub fn factorization_residual(sel: &EPRSelection, cgrid: &CanonicalGrid, q_samples: &[[f64; 2]]) -> Result<f64> {
    let ens = regularized_epr_ensemble(sel, cgrid)?;
    let psi = ens.initial_matrix();
    let (x, p) = grid_canonical_pair(cgrid);
    let e = |a: f64, b: f64| -> Result<CMatrix> { Ok(unitary_from_generator(&[(&x, a), (&p, b)])?.into_matrix()) };
    let mut worst: f64 = 0.0;
    for &[q1, q2] in q_samples {
        let lhs = e(q1, q2)? * &psi;
        let (h1, h2) = (0.5 * q1, 0.5 * q2);
        let second = e(h1, h2)? * &psi * e(h1, -h2)?.transpose();
        let rhs = e(h1, h2)? * second * e(-h1, h2)?.transpose();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Expectations of the four commutators between `(x_+, x_-)` and `(p_+, p_-)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderCommutators {
    pub x_plus_p_plus: C64,
    pub x_minus_p_minus: C64,
    pub x_plus_p_minus: C64,
    pub x_minus_p_plus: C64,
}

/// Evaluates the commutators on a state of `grid (x) grid`.
pub fn ladder_commutators(cgrid: &CanonicalGrid, state: &StateVector) -> Result<LadderCommutators> {
    let d = cgrid.d();
    if state.dim() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: state.dim() });
    }
    let psi = state_matrix(state.amplitudes(), d);
    let (x, p) = grid_canonical_pair(cgrid);
    let (x, p) = (x.into_matrix(), p.into_matrix());
    let half = C64::new(0.5, 0.0);
    let xp = |m: &CMatrix| (&x * m + m * x.transpose()) * half;
    let xm = |m: &CMatrix| &x * m - m * x.transpose();
    let pp = |m: &CMatrix| &p * m + m * p.transpose();
    let pm = |m: &CMatrix| (&p * m - m * p.transpose()) * half;
    let comm = |a: &dyn Fn(&CMatrix) -> CMatrix, b: &dyn Fn(&CMatrix) -> CMatrix| {
        psi.dotc(&a(&b(&psi))) - psi.dotc(&b(&a(&psi)))
    };
    Ok(LadderCommutators {
        x_plus_p_plus: comm(&xp, &pp),
        x_minus_p_minus: comm(&xm, &pm),
        x_plus_p_minus: comm(&xp, &pm),
        x_minus_p_plus: comm(&xm, &pp),
    })
}
