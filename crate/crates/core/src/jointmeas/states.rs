use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::qlinalg::CanonicalGrid;
use crate::qlinalg::{CMatrix, StateVector};
use crate::weakcore::{state_from_matrix, PrePostEnsemble};
use crate::{Error, Result};

/// Naive selection: preselect momentum `p`, postselect position `x`.
///
/// Without an envelope the preselection is the grid plane wave nearest `p`. With
/// `envelope = Some(s)` it is a Gaussian of position spread `s` centred on `x`,
/// which keeps the state away from the periodic edge when large couplings are
/// sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NaiveSelection {
    pub x: f64,
    pub p: f64,
    pub envelope: Option<f64>,
}

impl NaiveSelection {
    pub fn plane_wave(x: f64, p: f64) -> Self {
        Self { x, p, envelope: None }
    }

    pub fn enveloped(x: f64, p: f64, spread: f64) -> Self {
        Self { x, p, envelope: Some(spread) }
    }
}

pub fn naive_ensemble(sel: &NaiveSelection, grid: &CanonicalGrid) -> Result<PrePostEnsemble> {
    let psi_i = match sel.envelope {
        None => grid.plane_wave(grid.nearest_momentum_index(sel.p)),
        Some(s) => {
            let reach = sel.x.abs() + 5.0 * s;
            if reach > grid.half_width() {
                return Err(Error::EdgeClipping { reach, half_width: grid.half_width() });
            }
            grid.gaussian(sel.x, s, sel.p)?
        }
    };
    let psi_f = grid.position_state(grid.nearest_position_index(sel.x));
    PrePostEnsemble::no_ancilla(psi_i, psi_f)
}

/// Broad profile of a regularized EPR state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Envelope {
    /// `exp(-v^2 / (2 sigma^2))` on the ancilla position (initial) and on half the
    /// relative coordinate (final).
    Gaussian { sigma: f64 },
    /// `exp(-(v/S)^(2m))` with separate widths for the initial centre-of-mass and
    /// final relative profiles.
    FlatTop { initial: f64, finalw: f64, order: u32 },
}

impl Envelope {
    pub fn default_gaussian(length: f64) -> Self {
        Envelope::Gaussian { sigma: length / 8.0 }
    }

    pub fn default_flat_top(length: f64) -> Self {
        Envelope::FlatTop { initial: 0.3 * length, finalw: 0.4 * length, order: 4 }
    }

    /// Reach of the initial profile beyond its centre.
    fn reach(&self) -> f64 {
        match *self {
            Envelope::Gaussian { sigma } => 5.0 * sigma / std::f64::consts::SQRT_2,
            Envelope::FlatTop { initial, .. } => 1.3 * initial,
        }
    }
}

/// Labels of an EPR selection: the initial state diagonalizes `(x_-, p_+)`, the
/// final one `(x_+, p_-)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EPRSelection {
    pub x_minus: f64,
    pub p_plus: f64,
    pub x_plus: f64,
    pub p_minus: f64,
    /// Defaults to a Gaussian of width `L/8`.
    pub envelope: Option<Envelope>,
    /// Width of the smoothed deltas; defaults to the grid spacing.
    pub smoothing: Option<f64>,
}

impl EPRSelection {
    pub fn new(x_minus: f64, p_plus: f64, x_plus: f64, p_minus: f64) -> Self {
        Self { x_minus, p_plus, x_plus, p_minus, envelope: None, smoothing: None }
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn with_smoothing(mut self, eps: f64) -> Self {
        self.smoothing = Some(eps);
        self
    }

    pub fn x(&self) -> f64 {
        self.x_plus + self.x_minus / 2.0
    }

    pub fn p(&self) -> f64 {
        self.p_minus + self.p_plus / 2.0
    }

    pub fn x_a(&self) -> f64 {
        self.x_plus - self.x_minus / 2.0
    }

    pub fn p_a(&self) -> f64 {
        -(self.p_minus - self.p_plus / 2.0)
    }

    pub fn resolved_envelope(&self, grid: &CanonicalGrid) -> Envelope {
        self.envelope.unwrap_or_else(|| Envelope::default_gaussian(grid.length()))
    }

    pub fn resolved_smoothing(&self, grid: &CanonicalGrid) -> f64 {
        self.smoothing.unwrap_or_else(|| match self.resolved_envelope(grid) {
            Envelope::Gaussian { .. } => grid.dx(),
            Envelope::FlatTop { .. } => 0.6 * grid.dx(),
        })
    }
}

/// Regularized EPR pre/postselection on `grid (x) grid`.
///
/// The initial state is `env(v) e^{i p_+ v} eta(x - x_a - x_-)` and the final one
/// `env'(r) e^{i p_- r} eta((x + x_a)/2 - x_+)`, where `v` is the envelope
/// coordinate of [`Envelope`], `r` the wrapped relative coordinate and `eta` a
/// narrow Gaussian standing in for each delta.
pub fn regularized_epr_ensemble(sel: &EPRSelection, grid: &CanonicalGrid) -> Result<PrePostEnsemble> {
    let env = sel.resolved_envelope(grid);
    let eps = sel.resolved_smoothing(grid);
    let l = grid.length();
    match env {
        Envelope::Gaussian { sigma } if !(sigma > 0.0 && sigma <= l / 6.0) => {
            return Err(Error::InvalidParameter(format!("envelope width {sigma} must lie in (0, L/6]")));
        }
        Envelope::FlatTop { initial, finalw, order } if !(initial > 0.0 && finalw > 0.0 && order >= 1) => {
            return Err(Error::InvalidParameter("flat-top widths must be positive and order >= 1".into()));
        }
        _ => {}
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing width must be positive, got {eps}")));
    }
    let reach = sel.x_minus.abs().max(sel.x_plus.abs()) + env.reach();
    if reach > grid.half_width() {
        return Err(Error::EdgeClipping { reach, half_width: grid.half_width() });
    }
    let eta = |v: f64| {
        let w = grid.wrap(v);
        (-w * w / (2.0 * eps * eps)).exp()
    };
    let d = grid.d();
    let xs = grid.positions();
    let mut psi_i = CMatrix::zeros(d, d);
    let mut psi_f = CMatrix::zeros(d, d);
    for s in 0..d {
        for a in 0..d {
            let (x, xa) = (xs[s], xs[a]);
            let centre = 0.5 * (x + xa);
            let r = grid.wrap(x - xa);
            let (ini, fin) = match env {
                Envelope::Gaussian { sigma } => {
                    let g = |v: f64| (-v * v / (2.0 * sigma * sigma)).exp();
                    (C64::from_polar(g(xa), sel.p_plus * xa), C64::from_polar(g(0.5 * r), sel.p_minus * r))
                }
                Envelope::FlatTop { initial, finalw, order } => {
                    let f = |v: f64, w: f64| (-(v / w).powi(2 * order as i32)).exp();
                    (C64::from_polar(f(centre, initial), sel.p_plus * centre), C64::from_polar(f(r, finalw), sel.p_minus * r))
                }
            };
            psi_i[(s, a)] = ini * eta(x - xa - sel.x_minus);
            psi_f[(s, a)] = fin * eta(centre - sel.x_plus);
        }
    }
    let vi = StateVector::with_factors(state_from_matrix(&psi_i), vec![d, d])?;
    let vf = StateVector::with_factors(state_from_matrix(&psi_f), vec![d, d])?;
    PrePostEnsemble::new(vi, vf, d, d)
}
