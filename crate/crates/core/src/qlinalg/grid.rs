use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{CMatrix, CVector, Operator, StateVector};
use crate::{Error, Result};

/// Periodic position grid `x_j = (j - d/2) L/d` with its FFT-dual momenta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalGrid {
    d: usize,
    length: f64,
}

impl CanonicalGrid {
    pub fn new(d: usize, length: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("grid needs d >= 2, got {d}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { d, length })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.d as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.length
    }

    /// Largest momentum magnitude representable on the grid.
    pub fn p_max(&self) -> f64 {
        PI * self.d as f64 / self.length
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - (self.d / 2) as f64) * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.d).map(|j| self.position(j)).collect()
    }

    /// Signed FFT frequency of index `k`; the Nyquist index maps to `-d/2`.
    pub fn frequency(&self, k: usize) -> i64 {
        if 2 * k < self.d {
            k as i64
        } else {
            k as i64 - self.d as i64
        }
    }

    pub fn momentum(&self, k: usize) -> f64 {
        self.dp() * self.frequency(k) as f64
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.d).map(|k| self.momentum(k)).collect()
    }

    pub fn nearest_position_index(&self, x: f64) -> usize {
        let j = (self.wrap(x) / self.dx()).round() as i64 + (self.d / 2) as i64;
        j.rem_euclid(self.d as i64) as usize
    }

    pub fn nearest_momentum_index(&self, p: f64) -> usize {
        let s = (p / self.dp()).round() as i64;
        s.rem_euclid(self.d as i64) as usize
    }

    /// Maps `x` into the periodic cell `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let h = self.half_width();
        (x + h).rem_euclid(self.length) - h
    }

    /// Unitary DFT `U_{kj} = exp(-2 pi i j k / d) / sqrt(d)`.
    pub fn dft_matrix(&self) -> CMatrix {
        let d = self.d;
        let norm = 1.0 / (d as f64).sqrt();
        CMatrix::from_fn(d, d, |k, j| C64::from_polar(norm, -2.0 * PI * ((j * k) % d) as f64 / d as f64))
    }

    pub fn position_state(&self, j: usize) -> StateVector {
        StateVector::basis(self.d, j)
    }

    /// Normalized grid plane wave `exp(i p_k x_j)`.
    pub fn plane_wave(&self, k: usize) -> StateVector {
        let p = self.momentum(k);
        let n = 1.0 / (self.d as f64).sqrt();
        StateVector::new(CVector::from_fn(self.d, |j, _| C64::from_polar(n, p * self.position(j)))).unwrap()
    }

    /// Normalized Gaussian wavepacket with position spread `sigma` (std of |psi|^2).
    pub fn gaussian(&self, center: f64, sigma: f64, momentum: f64) -> Result<StateVector> {
        let amps = CVector::from_fn(self.d, |j, _| {
            let x = self.wrap(self.position(j) - center);
            C64::from_polar((-x * x / (4.0 * sigma * sigma)).exp(), momentum * (center + x))
        });
        StateVector::new(amps)
    }
}

/// Returns `(x, p)` with `x = diag(x_j)` and `p = U^dag diag(p_k) U`.
pub fn grid_canonical_pair(grid: &CanonicalGrid) -> (Operator, Operator) {
    let x = Operator::from_real_diagonal(&grid.positions());
    let u = grid.dft_matrix();
    let pd = CVector::from_iterator(grid.d(), grid.momenta().into_iter().map(|p| C64::new(p, 0.0)));
    let p = u.adjoint() * CMatrix::from_diagonal(&pd) * &u;
    let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
    (x, Operator::hermitian(p).expect("conjugated real diagonal is Hermitian"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_samples() {
        let g = CanonicalGrid::new(2, 2.0).unwrap();
        assert_eq!(g.positions(), vec![-1.0, 0.0]);
        let (x, p) = grid_canonical_pair(&g);
        assert_eq!(x.matrix()[(0, 0)].re, -1.0);
        assert_eq!(x.matrix()[(1, 1)].re, 0.0);
        assert!(x.is_hermitian() && p.is_hermitian());
        assert_eq!(g.frequency(1), -1);
    }

    #[test]
    fn positions_centered_and_increasing() {
        let g = CanonicalGrid::new(7, 3.5).unwrap();
        let xs = g.positions();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(xs[3], 0.0);
        let f: Vec<i64> = (0..7).map(|k| g.frequency(k)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, -3, -2, -1]);
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(CanonicalGrid::new(1, 1.0).is_err());
        assert!(CanonicalGrid::new(8, 0.0).is_err());
        assert!(CanonicalGrid::new(8, f64::NAN).is_err());
    }

    #[test]
    fn plane_waves_are_momentum_eigenstates() {
        for &(d, l) in &[(8usize, 5.0), (9, 4.0), (64, 20.0)] {
            let g = CanonicalGrid::new(d, l).unwrap();
            let (_, p) = grid_canonical_pair(&g);
            for k in 0..d {
                let pw = g.plane_wave(k);
                let lhs = p.apply(&pw);
                let rhs = pw.amplitudes() * C64::new(g.momentum(k), 0.0);
                assert!(crate::qlinalg::max_abs(&(lhs - rhs)) <= 1e-10, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn wrap_and_nearest_indices() {
        let g = CanonicalGrid::new(16, 8.0).unwrap();
        assert!((g.wrap(4.5) + 3.5).abs() < 1e-15);
        assert_eq!(g.nearest_position_index(0.0), 8);
        assert_eq!(g.nearest_position_index(0.9), 10);
        assert_eq!(g.frequency(g.nearest_momentum_index(-2.0 * g.dp())), -2);
    }

    fn commutator_error(d: usize) -> f64 {
        let l = 20.0;
        let g = CanonicalGrid::new(d, l).unwrap();
        let (x, p) = grid_canonical_pair(&g);
        let psi = g.gaussian(0.0, l / 10.0, 0.0).unwrap();
        let c = x.commutator(&p);
        let v = psi.amplitudes().dotc(&(c.matrix() * psi.amplitudes()));
        (v - C64::new(0.0, 1.0)).norm()
    }

    #[test]
    fn commutator_converges_with_d() {
        let errs: Vec<f64> = [32, 64, 128].iter().map(|&d| commutator_error(d)).collect();
        assert!(errs[2] <= 1e-3, "{errs:?}");
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn gaussian_moments() {
        let g = CanonicalGrid::new(128, 20.0).unwrap();
        let psi = g.gaussian(1.0, 1.2, 0.7).unwrap();
        let xs = g.positions();
        let mean: f64 = psi.amplitudes().iter().zip(&xs).map(|(a, x)| a.norm_sqr() * x).sum();
        let var: f64 = psi.amplitudes().iter().zip(&xs).map(|(a, x)| a.norm_sqr() * (x - mean).powi(2)).sum();
        assert!((mean - 1.0).abs() < 1e-10);
        assert!((var.sqrt() - 1.2).abs() < 1e-10);
    }
}
