//! Dense complex linear algebra and the discretized canonical pair.

mod grid;

pub use grid::{grid_canonical_pair, CanonicalGrid};

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};
use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance for Hermiticity checks: `max|A - A^dag| <= tol * max|A|`.
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// Dense square operator with a declared tensor factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    factors: Vec<usize>,
    hermitian: bool,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        Self::with_factors(matrix, vec![d])
    }

    pub fn with_factors(matrix: CMatrix, factors: Vec<usize>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.ncols() });
        }
        if d == 0 || factors.iter().product::<usize>() != d || factors.contains(&0) {
            return Err(Error::BadFactorization { dim: d, factors });
        }
        Ok(Self { matrix, factors, hermitian: false })
    }

    /// Builds an operator and sets the Hermitian flag after verifying it.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix)?.into_hermitian()
    }

    pub fn into_hermitian(mut self) -> Result<Self> {
        self.verify_hermitian()?;
        self.hermitian = true;
        Ok(self)
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d, d), factors: vec![d], hermitian: true }
    }

    pub fn zeros(d: usize) -> Self {
        Self { matrix: CMatrix::zeros(d, d), factors: vec![d], hermitian: true }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let v = CVector::from_iterator(d, diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { matrix: CMatrix::from_diagonal(&v), factors: vec![d], hermitian: true }
    }

    /// Row-major construction, mostly for literals in tests and spec files.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn refactor(mut self, factors: Vec<usize>) -> Result<Self> {
        if factors.iter().product::<usize>() != self.dim() || factors.contains(&0) {
            return Err(Error::BadFactorization { dim: self.dim(), factors });
        }
        self.factors = factors;
        Ok(self)
    }

    /// `max|A - A^dag|` relative to `max|A|` (zero for the zero matrix).
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = max_abs(&self.matrix);
        if scale == 0.0 {
            return 0.0;
        }
        let d = self.dim();
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev / scale
    }

    pub fn verify_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_RTOL {
            Err(Error::NotHermitian { deviation: dev })
        } else {
            Ok(())
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), factors: self.factors.clone(), hermitian: self.hermitian }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            matrix: &self.matrix * c,
            factors: self.factors.clone(),
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    /// Hilbert-Schmidt inner product `Tr(A^dag B)`.
    pub fn hs_inner(&self, other: &Operator) -> C64 {
        self.matrix.zip_fold(&other.matrix, C64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn apply(&self, psi: &StateVector) -> CVector {
        &self.matrix * psi.amplitudes()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        self * other - other * self
    }
}

fn combine_factors(a: &Operator, b: &Operator) -> Vec<usize> {
    if a.factors == b.factors {
        a.factors.clone()
    } else {
        vec![a.dim()]
    }
}

impl Mul for &Operator {
    type Output = Operator;
    /// Panics on dimension mismatch, like the underlying matrix product.
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { matrix: &self.matrix * &rhs.matrix, factors: combine_factors(self, rhs), hermitian: false }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            factors: combine_factors(self, rhs),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            factors: combine_factors(self, rhs),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        &self - &rhs
    }
}

/// Largest entry modulus of a complex matrix or vector.
pub fn max_abs<R: Dim, C: Dim, S: RawStorage<C64, R, C>>(m: &Matrix<C64, R, C, S>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Pure state with a declared tensor factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    factors: Vec<usize>,
}

impl StateVector {
    /// Normalizes on construction.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let d = amplitudes.len();
        Self::with_factors(amplitudes, vec![d])
    }

    pub fn with_factors(amplitudes: CVector, factors: Vec<usize>) -> Result<Self> {
        let mut s = Self::unnormalized_with_factors(amplitudes, factors)?;
        let n = s.norm();
        s.amplitudes /= C64::new(n, 0.0);
        Ok(s)
    }

    pub fn unnormalized(amplitudes: CVector) -> Result<Self> {
        let d = amplitudes.len();
        Self::unnormalized_with_factors(amplitudes, vec![d])
    }

    pub fn unnormalized_with_factors(amplitudes: CVector, factors: Vec<usize>) -> Result<Self> {
        let d = amplitudes.len();
        if d == 0 || factors.iter().product::<usize>() != d || factors.contains(&0) {
            return Err(Error::BadFactorization { dim: d, factors });
        }
        let n = amplitudes.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amplitudes, factors })
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        Self { amplitudes: v, factors: vec![d] }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn refactor(mut self, factors: Vec<usize>) -> Result<Self> {
        if factors.iter().product::<usize>() != self.dim() {
            return Err(Error::BadFactorization { dim: self.dim(), factors });
        }
        self.factors = factors;
        Ok(self)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        StateVector { amplitudes: self.amplitudes.kronecker(&other.amplitudes), factors }
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &StateVector) -> Operator {
        Operator {
            matrix: &self.amplitudes * other.amplitudes.adjoint(),
            factors: self.factors.clone(),
            hermitian: false,
        }
    }
}

pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    let mut factors = a.factors.clone();
    factors.extend_from_slice(&b.factors);
    Operator {
        matrix: a.matrix.kronecker(&b.matrix),
        factors,
        hermitian: a.hermitian && b.hermitian,
    }
}

/// Traces out every subsystem except `keep`.
pub fn partial_trace(op: &Operator, keep: usize) -> Result<Operator> {
    let f = op.factors();
    if f.len() < 2 {
        return Err(Error::InvalidParameter("partial trace needs at least two subsystems".into()));
    }
    if keep >= f.len() {
        return Err(Error::InvalidSubsystem { index: keep, count: f.len() });
    }
    let dk = f[keep];
    let left: usize = f[..keep].iter().product();
    let right: usize = f[keep + 1..].iter().product();
    let m = op.matrix();
    let out = CMatrix::from_fn(dk, dk, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..left {
            for r in 0..right {
                acc += m[((l * dk + i) * right + r, (l * dk + j) * right + r)];
            }
        }
        acc
    });
    Ok(Operator { matrix: out, factors: vec![dk], hermitian: op.hermitian })
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// The input is symmetrized first so tiny rounding asymmetries do not leak.
    pub fn new(h: &CMatrix) -> Self {
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Self { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `exp(i t H)`.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        let phases = self.values.map(|l| C64::from_polar(1.0, l * t));
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * phases[k]
        });
        scaled * self.vectors.adjoint()
    }
}

/// `exp(i H)` for a Hermitian matrix.
pub fn expm_i_hermitian(h: &CMatrix) -> CMatrix {
    HermitianEigen::new(h).exp_i(1.0)
}

/// `exp(i sum_k q_k A_k)` via the spectral decomposition of the generator.
pub fn unitary_from_generator(terms: &[(&Operator, f64)]) -> Result<Operator> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidParameter("generator needs at least one term".into()))?;
    let d = first.0.dim();
    let mut h = CMatrix::zeros(d, d);
    for (a, q) in terms {
        if a.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
        }
        a.verify_hermitian()?;
        h += a.matrix() * C64::new(*q, 0.0);
    }
    Operator::with_factors(expm_i_hermitian(&h), first.0.factors().to_vec())
}

/// Minimum-norm least-squares solution of `A x = b`, discarding singular values
/// below `rcond * sigma_max`. Returns the solution and the numerical rank.
pub fn lstsq_min_norm(a: &CMatrix, b: &CVector, rcond: f64) -> (CVector, usize) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (CVector::zeros(a.ncols()), 0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return (CVector::zeros(a.ncols()), 0);
    }
    let cut = rcond * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let x = svd.solve(b, cut).expect("both factors were computed");
    (x, rank)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}
