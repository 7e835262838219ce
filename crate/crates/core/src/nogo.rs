//! Finite-dimensional obstruction to joint weak-value assignments and the
//! approximate assignments valid below the minimal-polynomial order.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::qlinalg::{singular_values, CMatrix, HermitianEigen, Operator};
use crate::weakcore::{realize_entangled, solve_assignment, AssignmentProblem, OperatorBasis, PrePostEnsemble};
use crate::{Error, Result};

pub const SPECTRAL_RTOL: f64 = 1e-8;
pub const DEFAULT_N_THETA: usize = 181;
pub const INDEPENDENCE_TOL: f64 = 1e-8;

/// Two Hermitian observables of equal dimension.
#[derive(Clone, Debug)]
pub struct ObservablePair {
    a1: Operator,
    a2: Operator,
}

impl ObservablePair {
    pub fn new(a1: Operator, a2: Operator) -> Result<Self> {
        if a1.dim() != a2.dim() {
            return Err(Error::DimensionMismatch { expected: a1.dim(), found: a2.dim() });
        }
        Ok(Self { a1: a1.into_hermitian()?, a2: a2.into_hermitian()? })
    }

    pub fn a1(&self) -> &Operator {
        &self.a1
    }

    pub fn a2(&self) -> &Operator {
        &self.a2
    }

    pub fn dim(&self) -> usize {
        self.a1.dim()
    }

    /// `B_theta = A1 cos(theta) + A2 sin(theta)`.
    pub fn b_theta(&self, theta: f64) -> Operator {
        &self.a1.scale(C64::new(theta.cos(), 0.0)) + &self.a2.scale(C64::new(theta.sin(), 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ObstructionVerdict {
    /// No `theta` window where `beta_theta` leaves the spectrum.
    Consistent,
    /// `beta_theta` misses the spectrum of `B_theta` on the window `[start, end]`.
    Infeasible { start: f64, end: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionProfile {
    pub thetas: Vec<f64>,
    pub beta: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
    pub distance: Vec<f64>,
    pub tolerance: Vec<f64>,
    pub verdict: ObstructionVerdict,
}

fn sorted_spectrum(b: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = HermitianEigen::new(b.matrix()).values.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Sweeps `theta` over `[0, pi]` and measures how far `beta_theta` sits from the
/// spectrum of `B_theta`. A joint assignment needs the distance to vanish everywhere.
pub fn btheta_spectrum_sweep(pair: &ObservablePair, alpha1: f64, alpha2: f64, n_theta: usize) -> Result<ObstructionProfile> {
    if n_theta < 3 {
        return Err(Error::InvalidParameter(format!("n_theta must be at least 3, got {n_theta}")));
    }
    let thetas: Vec<f64> = (0..n_theta).map(|j| j as f64 * PI / (n_theta - 1) as f64).collect();
    let rows: Vec<(f64, Vec<f64>, f64, f64)> = thetas
        .par_iter()
        .map(|&t| {
            let beta = alpha1 * t.cos() + alpha2 * t.sin();
            let spec = sorted_spectrum(&pair.b_theta(t));
            let norm = spec.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            let dist = spec.iter().map(|l| (beta - l).abs()).fold(f64::INFINITY, f64::min);
            (beta, spec, dist, SPECTRAL_RTOL * norm)
        })
        .collect();
    let mut beta = Vec::with_capacity(n_theta);
    let mut spectra = Vec::with_capacity(n_theta);
    let mut distance = Vec::with_capacity(n_theta);
    let mut tolerance = Vec::with_capacity(n_theta);
    for (b, s, d, t) in rows {
        beta.push(b);
        spectra.push(s);
        distance.push(d);
        tolerance.push(t);
    }
    let verdict = widest_window(&thetas, &distance, &tolerance)
        .filter(|&(a, b)| b - a >= PI / n_theta as f64)
        .map(|(start, end)| ObstructionVerdict::Infeasible { start, end })
        .unwrap_or(ObstructionVerdict::Consistent);
    Ok(ObstructionProfile { thetas, beta, spectra, distance, tolerance, verdict })
}

fn widest_window(thetas: &[f64], dist: &[f64], tol: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut start: Option<usize> = None;
    for j in 0..=thetas.len() {
        let positive = j < thetas.len() && dist[j] > tol[j];
        match (positive, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                let w = (thetas[s], thetas[j - 1]);
                if best.is_none_or(|b| w.1 - w.0 > b.1 - b.0) {
                    best = Some(w);
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Monic minimal polynomial of a Hermitian operator, built from its distinct eigenvalues.
#[derive(Clone, Debug, Serialize)]
pub struct MinimalPolynomial {
    /// Coefficients in ascending powers; the last entry is 1.
    pub coefficients: Vec<f64>,
    /// Distinct eigenvalues (cluster means), ascending.
    pub roots: Vec<f64>,
    /// Set when two clusters are separated by less than `1e3` times the merge tolerance.
    pub near_degenerate: bool,
}

impl MinimalPolynomial {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.roots.iter().map(|r| z - r).product()
    }
}

pub fn minimal_polynomial(b: &Operator) -> Result<MinimalPolynomial> {
    b.verify_hermitian()?;
    let spec = sorted_spectrum(b);
    let norm = spec.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = SPECTRAL_RTOL * norm;
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    let mut near_degenerate = false;
    for &l in &spec {
        match clusters.last_mut() {
            Some(c) if l - c.last().unwrap() <= tol => c.push(l),
            _ => {
                if let Some(c) = clusters.last() {
                    if l - c.last().unwrap() <= 1e3 * tol {
                        near_degenerate = true;
                    }
                }
                clusters.push(vec![l]);
            }
        }
    }
    let roots: Vec<f64> = clusters.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let mut coefficients = vec![1.0];
    for r in &roots {
        let mut next = vec![0.0; coefficients.len() + 1];
        for (k, c) in coefficients.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        coefficients = next;
    }
    Ok(MinimalPolynomial { coefficients, roots, near_degenerate })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetrized products `S_{l,k-l}`, indexed by `l`, defined through
/// `(A1 t + A2)^k = sum_l C(k,l) t^l S_{l,k-l}`.
pub fn symmetrized_operators(pair: &ObservablePair, k: usize) -> Vec<Operator> {
    let d = pair.dim();
    if k == 0 {
        return vec![Operator::identity(d)];
    }
    let n = k + 1;
    let nodes: Vec<f64> = (0..n).map(|m| ((2 * m + 1) as f64 * PI / (2 * n) as f64).cos()).collect();
    let vander = DMatrix::from_fn(n, n, |m, l| nodes[m].powi(l as i32));
    let vinv = vander.try_inverse().expect("Chebyshev nodes are distinct");
    let powers: Vec<CMatrix> = nodes
        .iter()
        .map(|&t| {
            let b = pair.a1().matrix() * C64::new(t, 0.0) + pair.a2().matrix();
            (0..k).fold(CMatrix::identity(d, d), |acc, _| acc * &b)
        })
        .collect();
    let mut out: Vec<Operator> = (0..n)
        .map(|l| {
            let mut m = CMatrix::zeros(d, d);
            for (j, p) in powers.iter().enumerate() {
                m += p * C64::new(vinv[(l, j)], 0.0);
            }
            m /= C64::new(binomial(k, l), 0.0);
            Operator::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
        })
        .collect();
    let pow = |a: &Operator| (0..k).fold(Operator::identity(d), |acc, _| &acc * a);
    out[k] = pow(pair.a1());
    out[0] = pow(pair.a2());
    out
}

#[derive(Clone, Debug)]
pub struct ApproxAssignment {
    pub ensemble: PrePostEnsemble,
    pub problem: AssignmentProblem,
    pub s: usize,
    pub min_gram_singular: f64,
}

/// Assigns `(A1 q1 + A2 q2)^k -> (alpha1 q1 + alpha2 q2)^k` for every `k < s`
/// and realizes the result with an entangled ensemble.
pub fn approx_assignment(
    pair: &ObservablePair,
    alpha1: f64,
    alpha2: f64,
    s: usize,
    basis: &Arc<OperatorBasis>,
) -> Result<ApproxAssignment> {
    for theta in [0.0, PI / 4.0] {
        let found = minimal_polynomial(&pair.b_theta(theta))?.degree();
        if found != s {
            return Err(Error::DegreeMismatch { requested: s, found, theta });
        }
    }
    let mut targets = Vec::new();
    for k in 0..s {
        for (l, op) in symmetrized_operators(pair, k).into_iter().enumerate() {
            targets.push((op, C64::new(alpha1.powi(l as i32) * alpha2.powi((k - l) as i32), 0.0)));
        }
    }
    let n = targets.len();
    let gram = CMatrix::from_fn(n, n, |a, b| targets[a].0.hs_inner(&targets[b].0));
    let min_gram_singular = singular_values(&gram).last().cloned().unwrap_or(0.0);
    if min_gram_singular <= INDEPENDENCE_TOL {
        return Err(Error::DependentSymmetrizedSet { min_singular: min_gram_singular });
    }
    let problem = AssignmentProblem::new(targets, basis.clone())?;
    let w = solve_assignment(&problem)?;
    let ensemble = realize_entangled(&w)?;
    Ok(ApproxAssignment { ensemble, problem, s, min_gram_singular })
}

/// Leading deviation `-(i^s) |q|^s m_theta(beta_theta) / s!` of the exponent of
/// the assigned weak value of `exp(i(A1 q1 + A2 q2))`.
pub fn leading_correction(pair: &ObservablePair, alpha1: f64, alpha2: f64, q1: f64, q2: f64) -> Result<C64> {
    let r = q1.hypot(q2);
    if r == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let theta = q2.atan2(q1);
    let m = minimal_polynomial(&pair.b_theta(theta))?;
    let s = m.degree();
    let beta = alpha1 * theta.cos() + alpha2 * theta.sin();
    let fact: f64 = (1..=s).map(|k| k as f64).product();
    Ok(-C64::new(0.0, 1.0).powi(s as i32) * r.powi(s as i32) * m.eval(beta) / fact)
}

/// Spin-`j` operators `(Jx, Jy, Jz)` for `2j = two_j`, basis ordered `m = j, j-1, ..., -j`.
pub fn spin_operators(two_j: usize) -> (Operator, Operator, Operator) {
    let d = two_j + 1;
    let j = two_j as f64 / 2.0;
    let m = |k: usize| j - k as f64;
    let mut jp = CMatrix::zeros(d, d);
    for k in 1..d {
        let mk = m(k);
        jp[(k - 1, k)] = C64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::new(0.5, 0.0);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz: Vec<f64> = (0..d).map(m).collect();
    (
        Operator::hermitian(jx).unwrap(),
        Operator::hermitian(jy).unwrap(),
        Operator::from_real_diagonal(&jz),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::testutil::*;
    use crate::qlinalg::unitary_from_generator;
    use crate::weakcore::{verify_assignment, weak_value};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_pair() -> ObservablePair {
        ObservablePair::new(pauli_x(), pauli_z()).unwrap()
    }

    fn half_spin_pair() -> ObservablePair {
        let h = C64::new(0.5, 0.0);
        ObservablePair::new(pauli_x().scale(h), pauli_z().scale(h)).unwrap()
    }

    fn interp(p: &ObstructionProfile, theta: f64) -> f64 {
        let j = p.thetas.iter().position(|t| (t - theta).abs() < 1e-12).unwrap();
        p.distance[j]
    }

    #[test]
    fn pauli_profile_at_quarter_turn() {
        let p = btheta_spectrum_sweep(&pauli_pair(), 1.0, 1.0, 181).unwrap();
        assert!((interp(&p, PI / 4.0) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        let j = 45;
        assert!((p.beta[j] - 2f64.sqrt()).abs() < 1e-12);
        assert!((p.spectra[j][0] + 1.0).abs() < 1e-12 && (p.spectra[j][1] - 1.0).abs() < 1e-12);
        assert!(matches!(p.verdict, ObstructionVerdict::Infeasible { .. }));
    }

    #[test]
    fn pauli_profile_matches_closed_form() {
        let p = btheta_spectrum_sweep(&pauli_pair(), 1.0, 1.0, 181).unwrap();
        for (t, d) in p.thetas.iter().zip(&p.distance) {
            let b = t.cos() + t.sin();
            assert!((d - (b - 1.0).abs().min((b + 1.0).abs())).abs() <= 1e-12);
        }
        let window_min = p
            .thetas
            .iter()
            .zip(&p.distance)
            .filter(|(t, _)| **t >= PI / 8.0 && **t <= 3.0 * PI / 8.0)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        assert!(window_min >= 0.08);
    }

    #[test]
    fn common_eigenvector_gives_zero_profile() {
        let pair = ObservablePair::new(Operator::from_real_diagonal(&[1., 0.]), Operator::from_real_diagonal(&[2., 0.])).unwrap();
        let p = btheta_spectrum_sweep(&pair, 1.0, 2.0, 91).unwrap();
        assert!(p.distance.iter().all(|&d| d <= 1e-10));
        assert_eq!(p.verdict, ObstructionVerdict::Consistent);
    }

    #[test]
    fn eigenvalue_alpha_endpoints() {
        let p = btheta_spectrum_sweep(&pauli_pair(), 1.0, 0.0, 181).unwrap();
        assert!(p.distance[0] < 1e-14);
        assert!((p.distance[90] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_needs_three_points() {
        assert!(btheta_spectrum_sweep(&pauli_pair(), 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn minimal_polynomials() {
        assert_eq!(minimal_polynomial(&pauli_z()).unwrap().coefficients, vec![-1.0, 0.0, 1.0]);
        let id = minimal_polynomial(&Operator::identity(3)).unwrap();
        assert_eq!(id.coefficients, vec![-1.0, 1.0]);
        let (_, _, jz) = spin_operators(2);
        let m = minimal_polynomial(&jz).unwrap();
        let expected = [0.0, -1.0, 0.0, 1.0];
        assert_eq!(m.degree(), 3);
        for (a, b) in m.coefficients.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(!m.near_degenerate);
    }

    #[test]
    fn near_degenerate_flagged() {
        let b = Operator::from_real_diagonal(&[1.0, 1.0 + 1e-7, -1.0]);
        let m = minimal_polynomial(&b).unwrap();
        assert_eq!(m.degree(), 3);
        assert!(m.near_degenerate);
        let merged = minimal_polynomial(&Operator::from_real_diagonal(&[1.0, 1.0 + 1e-10, -1.0])).unwrap();
        assert_eq!(merged.degree(), 2);
    }

    #[test]
    fn symmetrized_small_orders() {
        let pair = pauli_pair();
        let s0 = symmetrized_operators(&pair, 0);
        assert_eq!(s0.len(), 1);
        assert!(s0[0].max_abs_diff(&Operator::identity(2)) == 0.0);
        let s2 = symmetrized_operators(&pair, 2);
        assert!(s2[1].max_abs_diff(&Operator::zeros(2)) < 1e-13);
        assert!(s2[2].max_abs_diff(&Operator::identity(2)) < 1e-15);
    }

    #[test]
    fn symmetrized_matches_explicit_anticommutator() {
        let (jx, _, jz) = spin_operators(2);
        let pair = ObservablePair::new(jx.clone(), jz.clone()).unwrap();
        let s = symmetrized_operators(&pair, 2);
        let anti = (&(&jx * &jz) + &(&jz * &jx)).scale(C64::new(0.5, 0.0));
        assert!(s[1].max_abs_diff(&anti) < 1e-12);
    }

    #[test]
    fn spin_half_assignment() {
        let basis = Arc::new(OperatorBasis::gell_mann(2));
        let pair = half_spin_pair();
        let (a1, a2) = (0.8, -1.3);
        let r = approx_assignment(&pair, a1, a2, 2, &basis).unwrap();
        let rep = verify_assignment(&r.ensemble, &r.problem).unwrap();
        assert!(rep.max_residual <= 1e-8);
        assert!((weak_value(pair.a1(), &r.ensemble).unwrap() - C64::new(a1, 0.0)).norm() <= 1e-8);
        assert!((weak_value(pair.a2(), &r.ensemble).unwrap() - C64::new(a2, 0.0)).norm() <= 1e-8);
        assert!((weak_value(&Operator::identity(2), &r.ensemble).unwrap() - C64::new(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn eigenvalue_pair_assignment() {
        let basis = Arc::new(OperatorBasis::gell_mann(2));
        let r = approx_assignment(&half_spin_pair(), 0.5, 0.5, 2, &basis).unwrap();
        assert!(verify_assignment(&r.ensemble, &r.problem).unwrap().max_residual <= 1e-8);
    }

    #[test]
    fn spin_one_assignment() {
        let basis = Arc::new(OperatorBasis::gell_mann(3));
        let (jx, _, jz) = spin_operators(2);
        let pair = ObservablePair::new(jx, jz).unwrap();
        let r = approx_assignment(&pair, 0.3, 0.7, 3, &basis).unwrap();
        assert_eq!(r.problem.targets().len(), 6);
        assert!(verify_assignment(&r.ensemble, &r.problem).unwrap().max_residual <= 1e-8);
    }

    #[test]
    fn wrong_order_rejected() {
        let basis = Arc::new(OperatorBasis::gell_mann(2));
        let r = approx_assignment(&half_spin_pair(), 0.1, 0.2, 3, &basis);
        assert!(matches!(r, Err(Error::DegreeMismatch { requested: 3, found: 2, .. })));
    }

    #[test]
    fn commuting_pair_is_dependent() {
        let a = Operator::from_real_diagonal(&[1.0, -1.0, 0.5]);
        let b = Operator::from_real_diagonal(&[2.0, -2.0, 1.0]);
        let basis = Arc::new(OperatorBasis::gell_mann(3));
        let pair = ObservablePair::new(a, b).unwrap();
        let r = approx_assignment(&pair, 0.1, 0.2, 3, &basis);
        assert!(matches!(r, Err(Error::DependentSymmetrizedSet { .. })));
    }

    #[test]
    fn correction_examples() {
        let pair = half_spin_pair();
        assert_eq!(leading_correction(&pair, 0.3, 0.4, 0.0, 0.0).unwrap(), C64::new(0.0, 0.0));
        let (a1, a2, q1, q2) = (0.3, -0.4, 0.02, 0.05);
        let got = leading_correction(&pair, a1, a2, q1, q2).unwrap();
        let aq: f64 = a1 * q1 + a2 * q2;
        let want = (aq * aq - (q1 * q1 + q2 * q2) / 4.0) / 2.0;
        assert!((got - C64::new(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spin_one_correction_closed_form() {
        let (jx, _, jz) = spin_operators(2);
        let pair = ObservablePair::new(jx, jz).unwrap();
        let (a1, a2, q1, q2): (f64, f64, f64, f64) = (0.2, 0.5, 0.03, -0.01);
        let r = q1.hypot(q2);
        let beta = (a1 * q1 + a2 * q2) / r;
        let want = C64::new(0.0, 1.0) * r.powi(3) * (beta.powi(3) - beta) / 6.0;
        let got = leading_correction(&pair, a1, a2, q1, q2).unwrap();
        assert!((got - want).norm() < 1e-15);
    }

    fn exponent_error(pair: &ObservablePair, ens: &PrePostEnsemble, a: (f64, f64), q: (f64, f64)) -> f64 {
        let u = unitary_from_generator(&[(pair.a1(), q.0), (pair.a2(), q.1)]).unwrap();
        let wv = weak_value(&u, ens).unwrap();
        let lin = C64::new(0.0, a.0 * q.0 + a.1 * q.1);
        (wv.ln() - lin - leading_correction(pair, a.0, a.1, q.0, q.1).unwrap()).norm()
    }

    #[test]
    fn exponent_error_scaling() {
        let basis = Arc::new(OperatorBasis::gell_mann(2));
        let pair = half_spin_pair();
        let a = (0.7, 0.4);
        let r = approx_assignment(&pair, a.0, a.1, 2, &basis).unwrap();
        for dir in [0.3f64, 1.1, 2.5] {
            let radii: Vec<f64> = (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
            let pts: Vec<(f64, f64)> = radii
                .iter()
                .map(|&q| (q.ln(), exponent_error(&pair, &r.ensemble, a, (q * dir.cos(), q * dir.sin())).ln()))
                .collect();
            let n = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
            let (mx, my) = (sx / n, sy / n);
            let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            assert!(slope >= 2.7, "dir={dir} slope={slope}");
        }
    }

    #[test]
    fn spin_operators_algebra() {
        for two_j in 1..5 {
            let (jx, jy, jz) = spin_operators(two_j);
            let comm = jx.commutator(&jy);
            assert!(comm.max_abs_diff(&jz.scale(C64::new(0.0, 1.0))) < 1e-12);
            let j = two_j as f64 / 2.0;
            let cas = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
            assert!(cas.max_abs_diff(&Operator::identity(two_j + 1).scale(C64::new(j * (j + 1.0), 0.0))) < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_symmetrized_reconstruction(seed in any::<u64>(), d in 2usize..5, k in 0usize..6) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pair = ObservablePair::new(random_hermitian(&mut rng, d), random_hermitian(&mut rng, d)).unwrap();
            let s = symmetrized_operators(&pair, k);
            for _ in 0..5 {
                let t: f64 = rng.random_range(-1.5..1.5);
                let b = pair.a1().matrix() * C64::new(t, 0.0) + pair.a2().matrix();
                let direct = (0..k).fold(CMatrix::identity(d, d), |acc, _| acc * &b);
                let mut sum = CMatrix::zeros(d, d);
                for (l, op) in s.iter().enumerate() {
                    sum += op.matrix() * C64::new(binomial(k, l) * t.powi(l as i32), 0.0);
                }
                let scale = 1.0 + crate::qlinalg::max_abs(&direct);
                prop_assert!(crate::qlinalg::max_abs(&(sum - direct)) <= 1e-9 * scale);
            }
        }

        #[test]
        fn prop_profile_nonnegative(seed in any::<u64>(), a1 in -3.0f64..3.0, a2 in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pair = ObservablePair::new(random_hermitian(&mut rng, 3), random_hermitian(&mut rng, 3)).unwrap();
            let p = btheta_spectrum_sweep(&pair, a1, a2, 19).unwrap();
            prop_assert!(p.distance.iter().all(|&d| d >= 0.0));
        }
    }
}
