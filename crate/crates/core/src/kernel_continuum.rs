//! Continuum weak transforms for the pair `(p, f(x))` with polynomial `f`.
//!
//! The symmetric average `g(u|z1) = (1/2) int_{-1}^{1} f(u - s z1/2) ds` turns the
//! kernel equation into a root condition `g(u|z1) = phi`; the solution transform is
//! `w(z) = exp(i (u_phi(z1) z2 - kappa z1))` along a real root branch `u_phi`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// Real polynomial stored in ascending powers with a nonzero leading coefficient.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialF {
    coeffs: Vec<f64>,
}

impl PolynomialF {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.last() {
            Some(&c) if c != 0.0 && coeffs.iter().all(|x| x.is_finite()) => Ok(Self { coeffs }),
            _ => Err(Error::InvalidParameter("polynomial needs a finite nonzero leading coefficient".into())),
        }
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        Self { coeffs: c }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `g(.|z1)` as an ascending coefficient list in `u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GPolynomial {
    pub zeta1: f64,
    pub coeffs: Vec<f64>,
}

impl GPolynomial {
    pub fn eval(&self, u: f64) -> f64 {
        horner(&self.coeffs, u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * u + k as f64 * a)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Term `c_m x^m` contributes `c_m sum_{j even} C(m,j) u^{m-j} (z1/2)^j / (j+1)`.
pub fn g_poly(f: &PolynomialF, zeta1: f64) -> GPolynomial {
    let n = f.degree();
    let mut coeffs = vec![0.0; n + 1];
    for (m, &cm) in f.coefficients().iter().enumerate() {
        if cm == 0.0 {
            continue;
        }
        for j in (0..=m).step_by(2) {
            let num = binomial_u128(m, j);
            let den = (1u128 << j) * (j as u128 + 1);
            let rational = num as f64 / den as f64;
            coeffs[m - j] += cm * rational * zeta1.powi(j as i32);
        }
    }
    GPolynomial { zeta1, coeffs }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible,
    RejectedEvenDegree,
}

/// Odd degree guarantees a real root of `g(u|z1) = phi` for every `z1` and `phi`.
pub fn feasibility(f: &PolynomialF) -> Feasibility {
    if f.degree() % 2 == 1 {
        Feasibility::Feasible
    } else {
        Feasibility::RejectedEvenDegree
    }
}

pub const IMAG_TOL: f64 = 1e-9;

fn root_residual_tol(phi: f64) -> f64 {
    1e-10 * (1.0 + phi.abs())
}

/// Real solutions of `g(u) = phi`, ascending.
pub fn real_roots(g: &GPolynomial, phi: f64) -> Vec<f64> {
    let mut c = g.coeffs.clone();
    c[0] -= phi;
    let mut cand = Vec::new();
    let zeros = c.iter().take_while(|&&x| x == 0.0).count();
    if zeros > 0 {
        cand.push(0.0);
        c.drain(..zeros);
    }
    let n = c.len() - 1;
    if n > 0 {
        cand.extend(companion_real_parts(&c).unwrap_or_else(|| scan_sign_changes(&c)));
    }
    let mut roots: Vec<f64> = cand.into_iter().filter_map(|u| polish(g, phi, u)).collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    roots
}

fn companion_real_parts(c: &[f64]) -> Option<Vec<f64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig: Vec<C64> = comp.try_schur(f64::EPSILON, 10_000)?.complex_eigenvalues().iter().cloned().collect();
    let mut cand: Vec<f64> = eig.iter().filter(|z| z.im.abs() <= IMAG_TOL).map(|z| z.re).collect();
    if cand.is_empty() && n % 2 == 1 {
        if let Some(z) = eig.iter().min_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap()) {
            cand.push(z.re);
        }
    }
    Some(cand)
}

fn scan_sign_changes(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let bound = 1.0 + c[..n].iter().map(|x| (x / c[n]).abs()).fold(0.0, f64::max);
    let samples = 20_000;
    let h = 2.0 * bound / samples as f64;
    let mut out = Vec::new();
    let mut prev = horner(c, -bound);
    for k in 1..=samples {
        let u = -bound + k as f64 * h;
        let cur = horner(c, u);
        if prev * cur <= 0.0 {
            out.push(u - 0.5 * h);
        }
        prev = cur;
    }
    out
}

fn polish(g: &GPolynomial, phi: f64, u0: f64) -> Option<f64> {
    let tol = root_residual_tol(phi);
    let r = |u: f64| g.eval(u) - phi;
    let mut u = u0;
    for _ in 0..60 {
        let fu = r(u);
        if fu.abs() <= tol * 1e-2 {
            return Some(u);
        }
        let du = g.derivative(u);
        if du == 0.0 {
            break;
        }
        let next = u - fu / du;
        if !next.is_finite() || (next - u).abs() > 1.0 + u.abs() {
            break;
        }
        u = next;
    }
    if r(u).abs() <= tol {
        return Some(u);
    }
    bisect_near(&r, u0, tol)
}

fn bisect_near(r: &impl Fn(f64) -> f64, u0: f64, tol: f64) -> Option<f64> {
    let mut h = 1e-6 * (1.0 + u0.abs());
    while h < 1e3 * (1.0 + u0.abs()) {
        let (mut a, mut b) = (u0 - h, u0 + h);
        if r(a) * r(b) <= 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if r(a) * r(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
                if r(m).abs() <= tol * 1e-2 || b - a <= f64::EPSILON * (1.0 + m.abs()) {
                    break;
                }
            }
            let m = 0.5 * (a + b);
            return (r(m).abs() <= tol).then_some(m);
        }
        h *= 2.0;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchOptions {
    /// Largest allowed jump between consecutive roots.
    pub continuity_bound: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self { continuity_bound: 1.0 }
    }
}

pub fn root_branch(f: &PolynomialF, phi: f64, zeta1_grid: &[f64]) -> Result<Vec<f64>> {
    root_branch_with(f, phi, zeta1_grid, BranchOptions::default())
}

/// Starts at the root of smallest `|u|` (ties to the smaller `u`) and follows the
/// nearest root along the grid.
pub fn root_branch_with(f: &PolynomialF, phi: f64, zeta1_grid: &[f64], opts: BranchOptions) -> Result<Vec<f64>> {
    if feasibility(f) == Feasibility::RejectedEvenDegree {
        return Err(Error::EvenDegree(f.degree()));
    }
    let mut out: Vec<f64> = Vec::with_capacity(zeta1_grid.len());
    for (idx, &z1) in zeta1_grid.iter().enumerate() {
        let roots = real_roots(&g_poly(f, z1), phi);
        let pick = match out.last() {
            None => roots.iter().cloned().min_by(|a: &f64, b: &f64| {
                a.abs().partial_cmp(&b.abs()).unwrap().then(a.partial_cmp(b).unwrap())
            }),
            Some(&prev) => roots
                .iter()
                .cloned()
                .min_by(|a: &f64, b: &f64| (a - prev).abs().partial_cmp(&(b - prev).abs()).unwrap()),
        };
        let u = pick.ok_or_else(|| Error::InvalidParameter(format!("no real root at zeta1 = {z1}")))?;
        if let Some(&prev) = out.last() {
            let jump: f64 = (u - prev).abs();
            if jump > opts.continuity_bound {
                return Err(Error::RootTrackingBreak { index: idx, jump });
            }
        }
        out.push(u);
    }
    Ok(out)
}

/// `w(z) = exp(i (u_phi(z1) z2 - kappa z1))` on the product grid, `z1`-major.
pub fn weak_transform_solution(
    f: &PolynomialF,
    kappa: f64,
    phi: f64,
    zeta1_grid: &[f64],
    zeta2_grid: &[f64],
) -> Result<Vec<C64>> {
    let u = root_branch(f, phi, zeta1_grid)?;
    Ok(zeta1_grid
        .iter()
        .zip(&u)
        .flat_map(|(&z1, &uz)| zeta2_grid.iter().map(move |&z2| C64::from_polar(1.0, uz * z2 - kappa * z1)))
        .collect())
}

/// Regularization and truncation of the quadrature tier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureOptions {
    pub epsilon: f64,
    pub zeta2_step: f64,
    pub u_step: f64,
    /// Half-width of the `u` window beyond `|u_phi|`.
    pub u_margin: f64,
    /// `e^{-eps z2^2}` is cut where the exponent reaches this value.
    pub cutoff_exponent: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, zeta2_step: 0.05, u_step: 0.005, u_margin: 3.0, cutoff_exponent: 36.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureResidual {
    pub t: [f64; 2],
    pub value: C64,
    pub target: C64,
    pub residual: f64,
    pub zeta2_limit: f64,
    pub u_limits: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionReport {
    pub zeta1: Vec<f64>,
    pub u_root: Vec<f64>,
    pub algebraic: Vec<f64>,
    pub algebraic_max: f64,
    pub quadrature: Vec<QuadratureResidual>,
    pub options: QuadratureOptions,
}

/// Checks the root condition along `zeta1_grid` and evaluates the regularized
/// kernel integral `(1/2pi) int du int dz2 e^{i[g(u|t1) t2 - z2 u]} w(t1, z2) e^{-eps z2^2}`
/// at each `t` sample against `e^{i(phi t2 - kappa t1)}`.
pub fn verify_solution(
    f: &PolynomialF,
    kappa: f64,
    phi: f64,
    t_samples: &[[f64; 2]],
    zeta1_grid: &[f64],
    opts: QuadratureOptions,
) -> Result<SolutionReport> {
    let u_root = root_branch(f, phi, zeta1_grid)?;
    let algebraic: Vec<f64> = zeta1_grid
        .iter()
        .zip(&u_root)
        .map(|(&z1, &u)| (g_poly(f, z1).eval(u) - phi).abs())
        .collect();
    let algebraic_max = algebraic.iter().cloned().fold(0.0, f64::max);
    let quadrature = t_samples
        .iter()
        .map(|&t| quadrature_residual(f, kappa, phi, t, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionReport { zeta1: zeta1_grid.to_vec(), u_root, algebraic, algebraic_max, quadrature, options: opts })
}

fn simpson_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .map(|w| w / 3.0)
        .collect()
}

fn odd_count(span: f64, step: f64) -> usize {
    let n = (span / step).ceil() as usize + 1;
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

fn quadrature_residual(f: &PolynomialF, kappa: f64, phi: f64, t: [f64; 2], o: QuadratureOptions) -> Result<QuadratureResidual> {
    let (t1, t2) = (t[0], t[1]);
    let u_phi = root_branch(f, phi, &[t1])?[0];
    let g = g_poly(f, t1);
    let zmax = (o.cutoff_exponent / o.epsilon).sqrt();
    let nz = odd_count(2.0 * zmax, o.zeta2_step);
    let hz = 2.0 * zmax / (nz - 1) as f64;
    let ulim = [u_phi - o.u_margin, u_phi + o.u_margin];
    let nu = odd_count(ulim[1] - ulim[0], o.u_step);
    let hu = (ulim[1] - ulim[0]) / (nu - 1) as f64;
    let wz = simpson_weights(nz);
    let wu = simpson_weights(nu);
    let base = C64::from_polar(1.0, -kappa * t1);
    let zs: Vec<(f64, f64)> = (0..nz)
        .map(|k| {
            let z = -zmax + k as f64 * hz;
            (z, wz[k] * hz * (-o.epsilon * z * z).exp())
        })
        .collect();
    let sum: C64 = (0..nu)
        .into_par_iter()
        .map(|j| {
            let u = ulim[0] + j as f64 * hu;
            let inner: C64 = zs.iter().map(|&(z, w)| C64::from_polar(w, z * (u_phi - u))).sum();
            inner * C64::from_polar(wu[j] * hu, g.eval(u) * t2)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let value = sum * base / (2.0 * PI);
    let target = C64::from_polar(1.0, phi * t2 - kappa * t1);
    Ok(QuadratureResidual { t, value, target, residual: (value - target).norm(), zeta2_limit: zmax, u_limits: ulim })
}
