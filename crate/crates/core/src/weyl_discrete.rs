//! Odd-dimensional Weyl-Heisenberg phase space.
//!
//! With `X|k> = |k+1>`, `Z|k> = w^k |k>` and `h = 2^{-1} mod d`, the displacement
//! operators are `T_z = w^{h z1 z2} X^{z1} Z^{z2}`. This ordering gives
//! `T_z T_z' = w^{h (z' ^ z)} T_{z+z'}`, and the phase-point operators are
//! `D_e = (1/d) sum_z w^{z ^ e} T_z`. Discrete sums with `1/d` stand in for the
//! continuum measure, so orthogonality reads `Tr(D_e D_e') = d delta`.
//!
//! The algebra closes exactly:
//! `T_z D_e = w^{e ^ z} D_{e + h z}`, `D_e T_z = w^{e ^ z} D_{e - h z}` and
//! `D_e D_e' = w^{2 e ^ e'} T_{2(e - e')}`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::qlinalg::{CMatrix, Operator, StateVector};
use crate::weakcore::{state_from_matrix, PrePostEnsemble};
use crate::{Error, Result};

/// Integer phase-space point; arithmetic is reduced modulo `d` by the basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PhasePoint {
    pub z1: i64,
    pub z2: i64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { z1: 0, z2: 0 };

    pub fn new(z1: i64, z2: i64) -> Self {
        Self { z1, z2 }
    }

    /// Symplectic product `z1 e2 - z2 e1`.
    pub fn wedge(self, other: PhasePoint) -> i64 {
        self.z1 * other.z2 - self.z2 * other.z1
    }

    pub fn add(self, other: PhasePoint) -> Self {
        Self::new(self.z1 + other.z1, self.z2 + other.z2)
    }

    pub fn sub(self, other: PhasePoint) -> Self {
        Self::new(self.z1 - other.z1, self.z2 - other.z2)
    }

    pub fn scale(self, k: i64) -> Self {
        Self::new(k * self.z1, k * self.z2)
    }

    pub fn neg(self) -> Self {
        self.scale(-1)
    }

    /// Time inversion `(z1, -z2)`.
    pub fn transpose(self) -> Self {
        Self::new(self.z1, -self.z2)
    }

    pub fn reduced(self, d: usize) -> Self {
        let d = d as i64;
        Self::new(self.z1.rem_euclid(d), self.z2.rem_euclid(d))
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteWeylBasis {
    d: usize,
    half: i64,
    roots: Vec<C64>,
}

impl DiscreteWeylBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d % 2 == 0 {
            return Err(Error::EvenDimension(d));
        }
        if d < 3 {
            return Err(Error::InvalidParameter(format!("Weyl basis needs d >= 3, got {d}")));
        }
        let roots = (0..d)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
            .collect();
        Ok(Self { d, half: (d as i64 + 1) / 2, roots })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Multiplicative inverse of 2 modulo `d`.
    pub fn half(&self) -> i64 {
        self.half
    }

    /// `w^k` with `w = exp(2 pi i / d)`.
    pub fn omega(&self, k: i64) -> C64 {
        self.roots[k.rem_euclid(self.d as i64) as usize]
    }

    pub fn reduce(&self, z: PhasePoint) -> PhasePoint {
        z.reduced(self.d)
    }

    /// All `d^2` points, `z1`-major.
    pub fn points(&self) -> Vec<PhasePoint> {
        let d = self.d as i64;
        (0..d).flat_map(|a| (0..d).map(move |b| PhasePoint::new(a, b))).collect()
    }

    pub fn index(&self, z: PhasePoint) -> usize {
        let r = self.reduce(z);
        r.z1 as usize * self.d + r.z2 as usize
    }

    pub fn translation_op(&self, z: PhasePoint) -> Operator {
        let d = self.d;
        let z = self.reduce(z);
        let (a, b) = (z.z1, z.z2);
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            let row = (k + a as usize) % d;
            m[(row, k)] = self.omega(self.half * a * b + b * k as i64);
        }
        Operator::new(m).unwrap()
    }

    pub fn phase_point_op(&self, eta: PhasePoint) -> Operator {
        let d = self.d;
        let mut m = CMatrix::zeros(d, d);
        for z in self.points() {
            m += self.translation_op(z).matrix() * self.omega(z.wedge(eta));
        }
        m /= C64::new(d as f64, 0.0);
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Operator::hermitian(m).expect("phase-point operators are Hermitian")
    }

    fn check_dim(&self, a: &Operator) -> Result<()> {
        if a.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: a.dim() });
        }
        Ok(())
    }

    /// `a(z) = (1/d) Tr(A T_z^dag)`, indexed by [`Self::index`].
    pub fn weyl_transform(&self, a: &Operator) -> Result<Vec<C64>> {
        self.check_dim(a)?;
        let d = C64::new(self.d as f64, 0.0);
        Ok(self
            .points()
            .par_iter()
            .map(|&z| self.translation_op(z).hs_inner(a) / d)
            .collect())
    }

    /// `A = sum_z a(z) T_z`.
    pub fn from_weyl_transform(&self, coeffs: &[C64]) -> Operator {
        let mut m = CMatrix::zeros(self.d, self.d);
        for (z, c) in self.points().into_iter().zip(coeffs) {
            m += self.translation_op(z).matrix() * *c;
        }
        Operator::new(m).unwrap()
    }

    /// `a~(e) = Tr(A D_e)`, indexed by [`Self::index`].
    pub fn weyl_symbol(&self, a: &Operator) -> Result<Vec<C64>> {
        self.check_dim(a)?;
        Ok(self
            .points()
            .par_iter()
            .map(|&e| (a.matrix() * self.phase_point_op(e).matrix()).trace())
            .collect())
    }

    /// `|Phi_0> = sum_k |k>|k> / sqrt(d)`.
    pub fn maximally_entangled(&self) -> StateVector {
        StateVector::with_factors(state_from_matrix(&CMatrix::identity(self.d, self.d)), vec![self.d, self.d]).unwrap()
    }

    /// Preselection `(T_zi (x) I)|Phi_0>` and postselection `(D_ef (x) I)|Phi_0>`.
    /// The weak-value operator is `D_{ef + h zi}`.
    pub fn epr_ensemble(&self, zeta_i: PhasePoint, eta_f: PhasePoint) -> Result<PrePostEnsemble> {
        let d = self.d;
        let psi_i = StateVector::with_factors(state_from_matrix(self.translation_op(zeta_i).matrix()), vec![d, d])?;
        let psi_f = StateVector::with_factors(state_from_matrix(self.phase_point_op(eta_f).matrix()), vec![d, d])?;
        PrePostEnsemble::new(psi_i, psi_f, d, d)
    }

    /// The point whose phase-point operator the EPR ensemble realizes.
    pub fn realized_point(&self, zeta_i: PhasePoint, eta_f: PhasePoint) -> PhasePoint {
        self.reduce(eta_f.add(zeta_i.scale(self.half)))
    }

    /// `M` with `(I (x) T_z)|Phi_0> = (M (x) I)|Phi_0>`; this is `T_z^T = T_{z^T}^dag`.
    pub fn transfer_to_system(&self, z: PhasePoint) -> Operator {
        Operator::new(self.translation_op(z).matrix().transpose()).unwrap()
    }

    /// Weak transform of the composite ensemble over `(z, z')`,
    /// `w(z, z') = Tr[W_sa (T_z (x) T_z')]` with `W_sa = |Phi_zi><Psi_ef| / <Psi_ef|Phi_zi>`,
    /// together with an exact fit of its phase to a quadratic form modulo `d`.
    pub fn composite_weak_transform(&self, zeta_i: PhasePoint, eta_f: PhasePoint) -> Result<CompositeTransform> {
        let d = self.d;
        let ens = self.epr_ensemble(zeta_i, eta_f)?;
        let a = ens.initial_matrix();
        let b = ens.final_matrix();
        let ov = ens.overlap();
        let pts = self.points();
        let ts: Vec<CMatrix> = pts.iter().map(|&z| self.translation_op(z).into_matrix()).collect();
        let values: Vec<C64> = (0..d * d)
            .into_par_iter()
            .flat_map_iter(|i| {
                let left = &ts[i] * &a;
                let ts = &ts;
                let b = &b;
                (0..d * d).map(move |j| b.dotc(&(&left * ts[j].transpose())) / ov)
            })
            .collect();
        let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
        let modulus_spread = moduli.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - moduli.iter().cloned().fold(f64::INFINITY, f64::min);

        let exponent = |v: [i64; 4]| -> i64 {
            let z = PhasePoint::new(v[0], v[1]);
            let zp = PhasePoint::new(v[2], v[3]);
            let val = values[self.index(z) * d * d + self.index(zp)];
            let k = (val.arg() * d as f64 / (2.0 * std::f64::consts::PI)).round() as i64;
            k.rem_euclid(d as i64)
        };
        let model = QuadraticPhase::fit(d, self.half, exponent);
        let mut model_max_error = 0.0f64;
        let mut predicted_max_error = 0.0f64;
        let eta_s = self.realized_point(zeta_i, eta_f);
        let eta_a = self.reduce(eta_f.sub(zeta_i.scale(self.half)).transpose());
        for (i, &z) in pts.iter().enumerate() {
            for (j, &zp) in pts.iter().enumerate() {
                let v = values[i * d * d + j];
                let n = model.eval([z.z1, z.z2, zp.z1, zp.z2]);
                model_max_error = model_max_error.max((v - self.omega(n)).norm());
                let pred = eta_s.wedge(z) + eta_a.wedge(zp) + self.half * z.wedge(zp.transpose());
                predicted_max_error = predicted_max_error.max((v - self.omega(pred)).norm());
            }
        }
        Ok(CompositeTransform {
            d,
            values,
            modulus_spread,
            model,
            model_max_error,
            eta_s,
            eta_a,
            predicted_max_error,
        })
    }
}

/// Phase exponent `n(v) = L.v + sum_{k<=l} Q_kl v_k v_l (mod d)` over `v = (z1, z2, z1', z2')`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticPhase {
    pub d: usize,
    pub linear: [i64; 4],
    /// Upper-triangular coefficients; `quadratic[k][l]` for `k <= l`.
    pub quadratic: [[i64; 4]; 4],
}

impl QuadraticPhase {
    fn fit(d: usize, half: i64, n: impl Fn([i64; 4]) -> i64) -> Self {
        let dm = d as i64;
        let e = |k: usize, s: i64| {
            let mut v = [0i64; 4];
            v[k] = s;
            v
        };
        let n0 = n([0; 4]);
        let mut linear = [0i64; 4];
        let mut quadratic = [[0i64; 4]; 4];
        for k in 0..4 {
            let n1 = n(e(k, 1)) - n0;
            let n2 = n(e(k, 2)) - n0;
            let q = (half * (n2 - 2 * n1)).rem_euclid(dm);
            quadratic[k][k] = q;
            linear[k] = (n1 - q).rem_euclid(dm);
        }
        for k in 0..4 {
            for l in k + 1..4 {
                let mut v = [0i64; 4];
                v[k] = 1;
                v[l] = 1;
                let q = n(v) - n0 - (n(e(k, 1)) - n0) - (n(e(l, 1)) - n0);
                quadratic[k][l] = q.rem_euclid(dm);
            }
        }
        Self { d, linear, quadratic }
    }

    pub fn eval(&self, v: [i64; 4]) -> i64 {
        let mut s = 0i64;
        for k in 0..4 {
            s += self.linear[k] * v[k];
            for l in k..4 {
                s += self.quadratic[k][l] * v[k] * v[l];
            }
        }
        s.rem_euclid(self.d as i64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeTransform {
    pub d: usize,
    /// `w(z, z')` at `index(z) * d^2 + index(z')`.
    pub values: Vec<C64>,
    pub modulus_spread: f64,
    pub model: QuadraticPhase,
    pub model_max_error: f64,
    pub eta_s: PhasePoint,
    pub eta_a: PhasePoint,
    /// Deviation from `w^{eta_s ^ z + eta_a ^ z' + h z ^ z'^T}`.
    pub predicted_max_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::testutil::*;
    use crate::qlinalg::{max_abs, HermitianEigen};
    use crate::weakcore::{product_realizability, weak_value, weak_value_operator};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(d: usize) -> DiscreteWeylBasis {
        DiscreteWeylBasis::new(d).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    fn random_point<R: Rng>(rng: &mut R, d: usize) -> PhasePoint {
        PhasePoint::new(rng.random_range(0..d as i64), rng.random_range(0..d as i64))
    }

    #[test]
    fn rejects_even_and_tiny() {
        assert_eq!(DiscreteWeylBasis::new(4).unwrap_err(), Error::EvenDimension(4));
        assert!(DiscreteWeylBasis::new(1).is_err());
        assert_eq!(b(7).half(), 4);
    }

    #[test]
    fn zero_translation_is_identity() {
        assert!(close(b(5).translation_op(PhasePoint::ORIGIN).matrix(), &CMatrix::identity(5, 5), 0.0));
    }

    #[test]
    fn translation_orthogonality_exhaustive() {
        let w = b(3);
        for z in w.points() {
            for zp in w.points() {
                let ip = w.translation_op(z).hs_inner(&w.translation_op(zp));
                let want = if z == zp { 3.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_action_on_position_states() {
        let w = b(5);
        let t = w.translation_op(PhasePoint::new(2, 3));
        for k in 0..5 {
            let out = t.apply(&StateVector::basis(5, k));
            let row = (k + 2) % 5;
            assert!((out[row].norm() - 1.0).abs() < 1e-15);
        }
        let z = w.translation_op(PhasePoint::new(0, 1));
        for k in 0..5 {
            assert!((z.matrix()[(k, k)] - w.omega(k as i64)).norm() < 1e-15);
        }
    }

    #[test]
    fn composition_law_single_case() {
        let w = b(3);
        let lhs = w.translation_op(PhasePoint::new(1, 0)).matrix() * w.translation_op(PhasePoint::new(0, 1)).matrix();
        let rhs = w.translation_op(PhasePoint::new(1, 1)).matrix() * w.omega(w.half() * (0 * 0 - 1 * 1));
        assert!(close(&lhs, &rhs, 1e-14));
    }

    fn algebra_holds(w: &DiscreteWeylBasis, z: PhasePoint, zp: PhasePoint) {
        let h = w.half();
        let t = |p: PhasePoint| w.translation_op(p).into_matrix();
        let dl = |p: PhasePoint| w.phase_point_op(p).into_matrix();
        assert!(close(&(t(z) * t(zp)), &(t(z.add(zp)) * w.omega(h * zp.wedge(z))), 1e-11));
        assert!(close(&(t(z) * dl(zp)), &(dl(zp.add(z.scale(h))) * w.omega(zp.wedge(z))), 1e-11));
        assert!(close(&(dl(zp) * t(z)), &(dl(zp.sub(z.scale(h))) * w.omega(zp.wedge(z))), 1e-11));
        assert!(close(&(dl(z) * dl(zp)), &(t(z.sub(zp).scale(2)) * w.omega(2 * z.wedge(zp))), 1e-11));
    }

    #[test]
    fn algebra_exhaustive_d3() {
        let w = b(3);
        for z in w.points() {
            for zp in w.points() {
                algebra_holds(&w, z, zp);
            }
        }
    }

    #[test]
    fn algebra_random_d5_d7() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for d in [5, 7] {
            let w = b(d);
            for _ in 0..40 {
                algebra_holds(&w, random_point(&mut rng, d), random_point(&mut rng, d));
            }
        }
    }

    #[test]
    fn parity_operator_spectrum() {
        let w = b(3);
        let d0 = w.phase_point_op(PhasePoint::ORIGIN);
        let mut ev: Vec<f64> = HermitianEigen::new(d0.matrix()).values.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
        for j in 0..3 {
            let k = (3 - j) % 3;
            assert!((d0.matrix()[(k, j)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_point_properties() {
        let w = b(5);
        let pts = w.points();
        let ops: Vec<Operator> = pts.iter().map(|&e| w.phase_point_op(e)).collect();
        for (i, di) in ops.iter().enumerate() {
            assert!((di.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(di.hermitian_deviation() < 1e-12);
            for (j, dj) in ops.iter().enumerate() {
                let want = if i == j { 5.0 } else { 0.0 };
                assert!(((di.matrix() * dj.matrix()).trace() - C64::new(want, 0.0)).norm() < 1e-11);
            }
        }
        for &z in pts.iter().take(7) {
            let mut m = CMatrix::zeros(5, 5);
            for (e, de) in pts.iter().zip(&ops) {
                m += de.matrix() * w.omega(e.wedge(z));
            }
            m /= C64::new(5.0, 0.0);
            assert!(close(&m, w.translation_op(z).matrix(), 1e-12));
        }
    }

    #[test]
    fn transform_examples() {
        let w = b(3);
        let a = w.weyl_transform(&Operator::identity(3)).unwrap();
        for (k, v) in a.iter().enumerate() {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-15);
        }
        let xi = PhasePoint::new(2, 1);
        let a = w.weyl_transform(&w.translation_op(xi)).unwrap();
        for (k, v) in a.iter().enumerate() {
            let want = if k == w.index(xi) { 1.0 } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-14);
        }
        let sym = w.weyl_symbol(&Operator::identity(3)).unwrap();
        assert!(sym.iter().all(|s| (s - C64::new(1.0, 0.0)).norm() < 1e-12));
        let mu = PhasePoint::new(1, 2);
        let sym = w.weyl_symbol(&w.phase_point_op(mu)).unwrap();
        for (k, s) in sym.iter().enumerate() {
            let want = if k == w.index(mu) { 3.0 } else { 0.0 };
            assert!((s - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dimension_checked() {
        assert!(b(3).weyl_transform(&Operator::identity(5)).is_err());
        assert!(b(3).weyl_symbol(&Operator::identity(2)).is_err());
    }

    #[test]
    fn epr_null_case_is_parity() {
        let w = b(3);
        let ens = w.epr_ensemble(PhasePoint::ORIGIN, PhasePoint::ORIGIN).unwrap();
        let wop = weak_value_operator(&ens).unwrap();
        assert!(close(wop.matrix(), w.phase_point_op(PhasePoint::ORIGIN).matrix(), 1e-12));
        assert!(!product_realizability(&wop).unwrap().is_product());
    }

    #[test]
    fn phase_point_ops_are_full_rank() {
        let w = b(3);
        for e in w.points() {
            let r = product_realizability(&w.phase_point_op(e)).unwrap();
            assert!(!r.is_product());
            assert_eq!(crate::weakcore::numerical_rank(w.phase_point_op(e).matrix()), 3);
        }
    }

    #[test]
    fn epr_overlap_table_constant_modulus() {
        let w = b(3);
        for z in w.points() {
            for e in w.points() {
                let ens = w.epr_ensemble(z, e).unwrap();
                let ov = ens.overlap();
                assert!((ov - w.omega(e.wedge(z)) / C64::new(3.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn epr_weak_operator_is_shifted_phase_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in [3, 5, 7] {
            let w = b(d);
            for _ in 0..6 {
                let (zi, ef) = (random_point(&mut rng, d), random_point(&mut rng, d));
                let ens = w.epr_ensemble(zi, ef).unwrap();
                let wop = weak_value_operator(&ens).unwrap();
                let target = w.phase_point_op(w.realized_point(zi, ef));
                assert!(close(wop.matrix(), target.matrix(), 1e-10));
            }
        }
    }

    #[test]
    fn epr_weak_value_is_weyl_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for d in [3, 5, 7] {
            let w = b(d);
            let (zi, ef) = (random_point(&mut rng, d), random_point(&mut rng, d));
            let ens = w.epr_ensemble(zi, ef).unwrap();
            let es = w.realized_point(zi, ef);
            for _ in 0..100 {
                let a = random_hermitian(&mut rng, d);
                let sym = (a.matrix() * w.phase_point_op(es).matrix()).trace();
                assert!((weak_value(&a, &ens).unwrap() - sym).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn time_inversion_transfer() {
        let w = b(3);
        let phi = w.maximally_entangled();
        let phi_m = CMatrix::identity(3, 3) / C64::new(3f64.sqrt(), 0.0);
        for z in w.points() {
            let t = w.translation_op(z);
            let lhs = &phi_m * t.matrix().transpose();
            let via = w.translation_op(z.transpose()).adjoint();
            let rhs = via.matrix() * &phi_m;
            assert!(close(&lhs, &rhs, 1e-14));
            assert!(close(w.transfer_to_system(z).matrix(), via.matrix(), 1e-14));
            let lifted = crate::qlinalg::tensor_product(&Operator::identity(3), &t).apply(&phi);
            assert!(max_abs(&(lifted - state_from_matrix(&rhs))) < 1e-14);
        }
    }

    #[test]
    fn composite_transform_null_case() {
        let w = b(3);
        let ct = w.composite_weak_transform(PhasePoint::ORIGIN, PhasePoint::ORIGIN).unwrap();
        assert!(ct.modulus_spread < 1e-12);
        assert!(ct.model_max_error < 1e-10);
        assert_eq!(ct.model.linear, [0, 0, 0, 0]);
        let mut q = [[0i64; 4]; 4];
        q[0][3] = (-w.half()).rem_euclid(3);
        q[1][2] = (-w.half()).rem_euclid(3);
        assert_eq!(ct.model.quadratic, q);
        assert!(ct.predicted_max_error < 1e-10);
    }

    #[test]
    fn composite_transform_general_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for d in [3, 5] {
            let w = b(d);
            for _ in 0..4 {
                let (zi, ef) = (random_point(&mut rng, d), random_point(&mut rng, d));
                let ct = w.composite_weak_transform(zi, ef).unwrap();
                assert!(ct.modulus_spread < 1e-10);
                assert!(ct.model_max_error < 1e-10);
                assert!(ct.predicted_max_error < 1e-10, "zi={zi:?} ef={ef:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_transform_round_trip_and_parseval(seed in any::<u64>(), k in 0usize..3) {
            let d = [3, 5, 7][k];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = b(d);
            let a = Operator::new(random_matrix(&mut rng, d)).unwrap();
            let coeffs = w.weyl_transform(&a).unwrap();
            prop_assert!(w.from_weyl_transform(&coeffs).max_abs_diff(&a) <= 1e-11);
            let parseval: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * d as f64;
            prop_assert!((parseval - a.matrix().norm_squared()).abs() <= 1e-10 * (1.0 + parseval));
        }

        #[test]
        fn prop_symbol_is_fourier_of_transform(seed in any::<u64>(), k in 0usize..3) {
            let d = [3, 5, 7][k];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = b(d);
            let a = random_hermitian(&mut rng, d);
            let coeffs = w.weyl_transform(&a).unwrap();
            let sym = w.weyl_symbol(&a).unwrap();
            for e in w.points() {
                let mut s = C64::new(0.0, 0.0);
                for z in w.points() {
                    s += w.omega(z.wedge(e)) * coeffs[w.index(z.neg())];
                }
                prop_assert!((s - sym[w.index(e)]).norm() <= 1e-11);
                prop_assert!(sym[w.index(e)].im.abs() <= 1e-11);
            }
        }
    }
}
