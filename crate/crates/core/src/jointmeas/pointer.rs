use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{unravel, InstrumentGrid, KrausSample};
use crate::{Error, Result};

/// Joint distribution of the pointer variables on the dual grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerDistribution {
    pub n: usize,
    pub axes: usize,
    /// Pointer values along every axis, ascending.
    pub pi_values: Vec<f64>,
    /// Row-major, axis 0 slowest; sums to one.
    pub probs: Vec<f64>,
    /// Instrument spreads the distribution was prepared with.
    pub spreads: Vec<f64>,
}

impl PointerDistribution {
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (idx, p) in self.probs.iter().enumerate() {
            m[unravel(idx, self.n, self.axes)[k]] += p;
        }
        m
    }

    pub fn mean(&self, k: usize) -> f64 {
        self.marginal(k).iter().zip(&self.pi_values).map(|(p, x)| p * x).sum()
    }

    pub fn std(&self, k: usize) -> f64 {
        let mu = self.mean(k);
        let var: f64 = self.marginal(k).iter().zip(&self.pi_values).map(|(p, x)| p * (x - mu).powi(2)).sum();
        var.max(0.0).sqrt()
    }

    pub fn centroid(&self) -> Vec<f64> {
        (0..self.axes).map(|k| self.mean(k)).collect()
    }
}

/// `P(pi) = |DFT[F(q) prod_k psi_k(q_k)]|^2` with minimal-uncertainty Gaussian
/// instruments `psi_k(q) = exp(-q^2 / (4 dq_k^2))`, `dq_k = 1/(2 dpi_k)`.
pub fn conditional_pointer_distribution(sample: &KrausSample, grid: &InstrumentGrid) -> Result<PointerDistribution> {
    sample.matches(grid)?;
    let (n, axes) = (grid.n(), grid.axes());
    let dq = grid.coupling_spreads();
    let mut buf: Vec<C64> = sample
        .values
        .iter()
        .enumerate()
        .map(|(idx, f)| {
            let amp: f64 = unravel(idx, n, axes)
                .iter()
                .zip(&dq)
                .map(|(&j, s)| {
                    let q = grid.q(j);
                    (-q * q / (4.0 * s * s)).exp()
                })
                .product();
            f * amp
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut line = vec![C64::new(0.0, 0.0); n];
    for k in 0..axes {
        let stride = n.pow((axes - 1 - k) as u32);
        let block = stride * n;
        for start in (0..buf.len()).filter(|i| (i % block) < stride) {
            for (m, slot) in line.iter_mut().enumerate() {
                *slot = buf[start + m * stride];
            }
            fft.process(&mut line);
            for (m, v) in line.iter().enumerate() {
                buf[start + m * stride] = *v;
            }
        }
    }
    let half = n / 2;
    let mut probs = vec![0.0; buf.len()];
    for (idx, p) in probs.iter_mut().enumerate() {
        let src = unravel(idx, n, axes).into_iter().fold(0, |acc, m| acc * n + (m + n - half) % n);
        *p = buf[src].norm_sqr();
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroNorm);
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(PointerDistribution { n, axes, pi_values: grid.pi_values(), probs, spreads: grid.spreads().to_vec() })
}

/// Half the L1 distance between two distributions on the same grid.
pub fn total_variation(a: &PointerDistribution, b: &PointerDistribution) -> Result<f64> {
    if a.probs.len() != b.probs.len() {
        return Err(Error::DimensionMismatch { expected: a.probs.len(), found: b.probs.len() });
    }
    Ok(0.5 * a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairProduct {
    pub k: usize,
    pub l: usize,
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub instrument_spreads: Vec<f64>,
    pub output_spreads: Vec<f64>,
    pub pairwise: Vec<PairProduct>,
    /// Two instruments: `dpi_1 dpi_2 + 1/(16 dpi_1 dpi_2)`.
    pub pair_bound: Option<f64>,
    pub total_product: f64,
    /// `1/2` for two instruments, `1/4` for four.
    pub floor: f64,
    pub meets_floor: bool,
}

pub fn uncertainty_products(p: &PointerDistribution) -> UncertaintyReport {
    let out: Vec<f64> = (0..p.axes).map(|k| p.std(k)).collect();
    let pairwise = (0..p.axes)
        .flat_map(|k| (k + 1..p.axes).map(move |l| (k, l)))
        .map(|(k, l)| PairProduct { k, l, product: out[k] * out[l] })
        .collect();
    let pair_bound = (p.axes == 2).then(|| {
        let s = p.spreads[0] * p.spreads[1];
        s + 1.0 / (16.0 * s)
    });
    let total_product: f64 = out.iter().product();
    let floor = 0.5f64.powi(p.axes as i32 / 2);
    UncertaintyReport {
        instrument_spreads: p.spreads.clone(),
        output_spreads: out,
        pairwise,
        pair_bound,
        total_product,
        floor,
        meets_floor: total_product >= floor,
    }
}
