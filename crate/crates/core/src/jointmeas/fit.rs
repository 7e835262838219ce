use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{unravel, KrausSample};
use crate::{Error, Result};

pub const MIN_FIT_MODULUS: f64 = 0.1;

/// Phase model `c0 + sum_k alpha_k q_k + sum_{k<l} beta_kl q_k q_l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseFit {
    pub c0: f64,
    pub alpha: Vec<f64>,
    /// Symmetric with zero diagonal.
    pub beta: Vec<Vec<f64>>,
    /// RMS of the wrapped phase residual, radians.
    pub residual_rms: f64,
    /// `max | |F| - 1 |`.
    pub flatness: f64,
}

impl PhaseFit {
    pub fn beta(&self, k: usize, l: usize) -> f64 {
        self.beta[k][l]
    }

    /// Largest cross coefficient in magnitude.
    pub fn max_beta(&self) -> f64 {
        self.beta.iter().flatten().map(|b| b.abs()).fold(0.0, f64::max)
    }

    pub fn model(&self, q: &[f64]) -> f64 {
        let mut phi = self.c0;
        for (k, &qk) in q.iter().enumerate() {
            phi += self.alpha[k] * qk;
            for l in k + 1..q.len() {
                phi += self.beta[k][l] * qk * q[l];
            }
        }
        phi
    }
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Least-squares fit of the unwrapped phase of `F`. The phase is unwrapped by
/// accumulating local increments `arg(F(q) conj F(q - dq e_k))` from the first
/// grid corner, so no global branch choice is needed on fine grids.
pub fn phase_fit(sample: &KrausSample) -> Result<PhaseFit> {
    let min = sample.min_modulus();
    if !(min >= MIN_FIT_MODULUS) {
        return Err(Error::AmplitudeCollapse { min_modulus: min });
    }
    let (n, axes) = (sample.n, sample.axes);
    let len = sample.values.len();
    let stride = |k: usize| n.pow((axes - 1 - k) as u32);
    let mut phase = vec![0.0; len];
    phase[0] = sample.values[0].arg();
    for idx in 1..len {
        let j = unravel(idx, n, axes);
        let k = (0..axes).rev().find(|&k| j[k] > 0).expect("idx > 0");
        let parent = idx - stride(k);
        phase[idx] = phase[parent] + (sample.values[idx] * sample.values[parent].conj()).arg();
    }
    let pairs: Vec<(usize, usize)> = (0..axes).flat_map(|k| (k + 1..axes).map(move |l| (k, l))).collect();
    let ncols = 1 + axes + pairs.len();
    let points: Vec<Vec<f64>> = (0..len).map(|idx| unravel(idx, n, axes).into_iter().map(|j| sample.q(j)).collect()).collect();
    let a = DMatrix::from_fn(len, ncols, |r, c| {
        let q = &points[r];
        match c {
            0 => 1.0,
            c if c <= axes => q[c - 1],
            c => {
                let (k, l) = pairs[c - 1 - axes];
                q[k] * q[l]
            }
        }
    });
    let b = DVector::from_vec(phase.clone());
    let svd = a.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let coef = svd.solve(&b, tol).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let alpha: Vec<f64> = coef.iter().skip(1).take(axes).cloned().collect();
    let mut beta = vec![vec![0.0; axes]; axes];
    for (c, &(k, l)) in pairs.iter().enumerate() {
        beta[k][l] = coef[1 + axes + c];
        beta[l][k] = coef[1 + axes + c];
    }
    let mut fit = PhaseFit { c0: coef[0], alpha, beta, residual_rms: 0.0, flatness: sample.flatness() };
    let ss: f64 = points.iter().zip(&phase).map(|(q, ph)| (ph - fit.model(q)).powi(2)).sum();
    fit.residual_rms = (ss / len as f64).sqrt();
    fit.c0 = wrap_angle(fit.c0);
    Ok(fit)
}
