use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{InstrumentGrid, KrausSample};
use crate::qlinalg::CanonicalGrid;
use crate::qlinalg::{unitary_from_generator, CMatrix, Operator};
use crate::weakcore::{weak_value_operator, PrePostEnsemble};
use crate::{Error, Result};

fn check_observables(observables: &[&Operator], axes: usize) -> Result<usize> {
    if observables.len() != axes {
        return Err(Error::DimensionMismatch { expected: axes, found: observables.len() });
    }
    let d = observables[0].dim();
    for a in observables {
        if a.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
        }
        a.verify_hermitian()?;
    }
    Ok(d)
}

fn sample(grid: &InstrumentGrid, values: Vec<C64>) -> KrausSample {
    KrausSample { n: grid.n(), q_max: grid.q_max(), axes: grid.axes(), values }
}

/// `F(q) = <psi_f|exp(i sum_k q_k A_k)|psi_i> / <psi_f|psi_i>` on every grid point.
///
/// Observables acting on the system alone are contracted with the weak-value
/// operator, `F = Tr(U W)`; observables on the full space use the joint states.
pub fn kraus_sample(ens: &PrePostEnsemble, observables: &[Operator], grid: &InstrumentGrid) -> Result<KrausSample> {
    let obs: Vec<&Operator> = observables.iter().collect();
    let d = check_observables(&obs, grid.axes())?;
    let ov = ens.overlap();
    let eval: Box<dyn Fn(&CMatrix) -> C64 + Sync> = if d == ens.system_dim() {
        let w = weak_value_operator(ens)?.into_matrix();
        Box::new(move |u: &CMatrix| u.transpose().dot(&w))
    } else if d == ens.total_dim() {
        let (vi, vf) = (ens.psi_i().amplitudes().clone(), ens.psi_f().amplitudes().clone());
        Box::new(move |u: &CMatrix| vf.dotc(&(u * &vi)) / ov)
    } else {
        return Err(Error::DimensionMismatch { expected: ens.system_dim(), found: d });
    };
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let q = grid.point(i);
            let terms: Vec<(&Operator, f64)> = obs.iter().cloned().zip(q).collect();
            unitary_from_generator(&terms).map(|u| eval(u.matrix()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sample(grid, values))
}

/// Kraus function for observables split between system and ancilla.
///
/// The two groups commute, so `exp(i G) = U_s (x) U_a` exactly and
/// `F = sum_{ce} M_{ce} (U_a)_{ce}` with `M = Psi_f^dag U_s Psi_i / <psi_f|psi_i>`.
/// System axes come first in the grid ordering.
pub fn kraus_sample_factorized(
    ens: &PrePostEnsemble,
    system_obs: &[Operator],
    ancilla_obs: &[Operator],
    grid: &InstrumentGrid,
) -> Result<KrausSample> {
    let (ns, na) = (system_obs.len(), ancilla_obs.len());
    if ns + na != grid.axes() || ns == 0 || na == 0 {
        return Err(Error::DimensionMismatch { expected: grid.axes(), found: ns + na });
    }
    let sys: Vec<&Operator> = system_obs.iter().collect();
    let anc: Vec<&Operator> = ancilla_obs.iter().collect();
    if check_observables(&sys, ns)? != ens.system_dim() {
        return Err(Error::DimensionMismatch { expected: ens.system_dim(), found: sys[0].dim() });
    }
    if check_observables(&anc, na)? != ens.ancilla_dim() {
        return Err(Error::DimensionMismatch { expected: ens.ancilla_dim(), found: anc[0].dim() });
    }
    let n = grid.n();
    let (psi_i, psi_f) = (ens.initial_matrix(), ens.final_matrix());
    let ov = ens.overlap();
    let qs = grid.q_values();
    let sub_point = |idx: usize, axes: usize| -> Vec<f64> {
        super::unravel(idx, n, axes).into_iter().map(|j| qs[j]).collect()
    };
    let ms: Vec<CMatrix> = (0..n.pow(ns as u32))
        .into_par_iter()
        .map(|i| {
            let terms: Vec<(&Operator, f64)> = sys.iter().cloned().zip(sub_point(i, ns)).collect();
            unitary_from_generator(&terms).map(|u| psi_f.adjoint() * u.matrix() * &psi_i / ov)
        })
        .collect::<Result<_>>()?;
    let uas: Vec<CMatrix> = (0..n.pow(na as u32))
        .into_par_iter()
        .map(|i| {
            let terms: Vec<(&Operator, f64)> = anc.iter().cloned().zip(sub_point(i, na)).collect();
            unitary_from_generator(&terms).map(|u| u.into_matrix())
        })
        .collect::<Result<_>>()?;
    let da = ens.ancilla_dim();
    let flat = |ms: &[CMatrix]| CMatrix::from_fn(ms.len(), da * da, |r, k| ms[r][(k / da, k % da)]);
    let prod = flat(&ms) * flat(&uas).transpose();
    let values = (0..prod.nrows()).flat_map(|r| (0..prod.ncols()).map(move |c| (r, c))).map(|(r, c)| prod[(r, c)]).collect();
    Ok(sample(grid, values))
}

/// Trotterized `exp(i (x q1 + p q2))` on a periodic grid: each of the `steps`
/// slices is `e^{i p q2/2N} e^{i x q1/N} e^{i p q2/2N}`, with `p` applied in the
/// Fourier basis. The symmetric splitting is exact for the continuum pair; on
/// the grid its error is governed by how far the state reaches the cell edge.
pub struct SplitPropagator {
    grid: CanonicalGrid,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    x: Vec<f64>,
    p: Vec<f64>,
}

impl SplitPropagator {
    pub fn new(grid: &CanonicalGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fft: planner.plan_fft_forward(grid.d()),
            ifft: planner.plan_fft_inverse(grid.d()),
            x: grid.positions(),
            p: grid.momenta(),
        }
    }

    pub fn grid(&self) -> &CanonicalGrid {
        &self.grid
    }

    fn kick_p(&self, v: &mut [C64], a: f64) {
        self.fft.process(v);
        let norm = 1.0 / self.grid.d() as f64;
        for (c, &p) in v.iter_mut().zip(&self.p) {
            *c *= C64::from_polar(norm, p * a);
        }
        self.ifft.process(v);
    }

    pub fn apply(&self, v: &mut [C64], q1: f64, q2: f64, steps: usize) {
        let steps = steps.max(1);
        let h = 1.0 / steps as f64;
        let phases: Vec<C64> = self.x.iter().map(|&x| C64::from_polar(1.0, x * q1 * h)).collect();
        for _ in 0..steps {
            self.kick_p(v, 0.5 * q2 * h);
            for (c, ph) in v.iter_mut().zip(&phases) {
                *c *= ph;
            }
            self.kick_p(v, 0.5 * q2 * h);
        }
    }
}

/// Kraus function for the observables `(x (x) I, p (x) I)` using the
/// split-operator propagator on each ancilla column of `Psi_i`.
pub fn kraus_sample_split(
    ens: &PrePostEnsemble,
    cgrid: &CanonicalGrid,
    grid: &InstrumentGrid,
    steps: usize,
) -> Result<KrausSample> {
    if grid.axes() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: grid.axes() });
    }
    if ens.system_dim() != cgrid.d() {
        return Err(Error::DimensionMismatch { expected: cgrid.d(), found: ens.system_dim() });
    }
    let prop = SplitPropagator::new(cgrid);
    let (psi_i, psi_f) = (ens.initial_matrix(), ens.final_matrix());
    let ov = ens.overlap();
    let d = cgrid.d();
    let cols_i: Vec<Vec<C64>> = (0..psi_i.ncols()).map(|c| psi_i.column(c).iter().cloned().collect()).collect();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let q = grid.point(idx);
            let mut acc = C64::new(0.0, 0.0);
            for (c, col) in cols_i.iter().enumerate() {
                let mut v = col.clone();
                prop.apply(&mut v, q[0], q[1], steps);
                acc += (0..d).map(|s| psi_f[(s, c)].conj() * v[s]).sum::<C64>();
            }
            acc / ov
        })
        .collect();
    Ok(sample(grid, values))
}
