#![allow(dead_code)]

use num_complex::Complex64 as C64;
use num_rational::Rational64;
use rand::Rng;
use weakjoint::jointmeas::InstrumentGrid;
use weakjoint::qlinalg::{CMatrix, CVector, Operator, StateVector};
use weakjoint::weakcore::PrePostEnsemble;

pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> Operator {
    let m = random_matrix(rng, d);
    Operator::hermitian((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_state<R: Rng>(rng: &mut R, d: usize) -> StateVector {
    StateVector::new(random_vector(rng, d)).unwrap()
}

/// Rank one iff every 2x2 minor vanishes relative to the largest entry squared.
pub fn rank_one_by_minors(w: &CMatrix, rtol: f64) -> bool {
    let scale = w.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let (r, c) = w.shape();
    for i in 0..r {
        for k in i + 1..r {
            for j in 0..c {
                for l in j + 1..c {
                    let minor = w[(i, j)] * w[(k, l)] - w[(i, l)] * w[(k, j)];
                    if minor.norm() > rtol * scale {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Coefficients `c[i][j]` of `u^i z1^j` in the average of `x^m` over
/// `[u - z1/2, u + z1/2]`, from the exact antiderivative.
pub fn window_average_coefficients(m: usize) -> Vec<Vec<Rational64>> {
    let zero = Rational64::from_integer(0);
    let mut out = vec![vec![zero; m + 1]; m + 1];
    let binom = |n: usize, k: usize| -> i64 { (0..k).fold(1i64, |acc, t| acc * (n - t) as i64 / (t + 1) as i64) };
    // ((u + z/2)^{m+1} - (u - z/2)^{m+1}) / ((m+1) z): only odd powers k of z/2 survive.
    for k in (1..=m + 1).step_by(2) {
        let c = Rational64::new(2 * binom(m + 1, k), (m as i64 + 1) * (1i64 << k));
        out[m + 1 - k][k - 1] += c;
    }
    out
}

pub fn rational_to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `exp(i H) v` for the block generator `H = sum_k q_k A_k` acting on the full
/// `system (x) ancilla (x) instruments` vector, via a truncated Taylor series on
/// `substeps` equal slices.
fn taylor_exp_action(apply_h: &dyn Fn(&[C64]) -> Vec<C64>, v: &[C64], substeps: usize, terms: usize) -> Vec<C64> {
    let h = 1.0 / substeps as f64;
    let mut cur = v.to_vec();
    for _ in 0..substeps {
        let mut term = cur.clone();
        let mut acc = cur.clone();
        for k in 1..=terms {
            let ht = apply_h(&term);
            let f = C64::new(0.0, h / k as f64);
            term = ht.iter().map(|x| x * f).collect();
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
        }
        cur = acc;
    }
    cur
}

/// Pointer distribution obtained without the scalar-Kraus reduction: the full
/// joint state of system, ancilla and two Gaussian instruments is evolved under
/// `exp(i (q1 A1 + q2 A2))`, projected on the postselection and Fourier
/// transformed to the pointer variables. Rows follow the library's dual grid.
pub fn full_tensor_pointer_distribution(ens: &PrePostEnsemble, a1: &CMatrix, a2: &CMatrix, grid: &InstrumentGrid) -> Vec<f64> {
    let n = grid.n();
    let dim = ens.total_dim();
    let qs = grid.q_values();
    let dq: Vec<f64> = grid.spreads().iter().map(|s| 0.5 / s).collect();
    let phi = |q: f64, s: f64| (-q * q / (4.0 * s * s)).exp();
    let ident = CMatrix::identity(ens.ancilla_dim(), ens.ancilla_dim());
    let lift = |a: &CMatrix| a.kronecker(&ident);
    let (big1, big2) = (lift(a1), lift(a2));
    let psi_i = ens.psi_i().amplitudes();
    let block = n * n;
    // Layout: index = sa * n^2 + j1 * n + j2.
    let mut v = vec![C64::new(0.0, 0.0); dim * block];
    for sa in 0..dim {
        for j1 in 0..n {
            for j2 in 0..n {
                v[sa * block + j1 * n + j2] = psi_i[sa] * phi(qs[j1], dq[0]) * phi(qs[j2], dq[1]);
            }
        }
    }
    let apply_h = |x: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        for r in 0..dim {
            for c in 0..dim {
                let (e1, e2) = (big1[(r, c)], big2[(r, c)]);
                if e1 == C64::new(0.0, 0.0) && e2 == C64::new(0.0, 0.0) {
                    continue;
                }
                for j1 in 0..n {
                    for j2 in 0..n {
                        let k = j1 * n + j2;
                        out[r * block + k] += (e1 * qs[j1] + e2 * qs[j2]) * x[c * block + k];
                    }
                }
            }
        }
        out
    };
    let evolved = taylor_exp_action(&apply_h, &v, 16, 40);
    let psi_f = ens.psi_f().amplitudes();
    let mut chi = vec![C64::new(0.0, 0.0); block];
    for sa in 0..dim {
        let w = psi_f[sa].conj();
        for k in 0..block {
            chi[k] += w * evolved[sa * block + k];
        }
    }
    let pis = grid.pi_values();
    let mut probs = vec![0.0; block];
    for (a, &p1) in pis.iter().enumerate() {
        for (b, &p2) in pis.iter().enumerate() {
            let mut amp = C64::new(0.0, 0.0);
            for j1 in 0..n {
                for j2 in 0..n {
                    amp += chi[j1 * n + j2] * C64::from_polar(1.0, -(p1 * qs[j1] + p2 * qs[j2]));
                }
            }
            probs[a * n + b] = amp.norm_sqr();
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    probs
}
