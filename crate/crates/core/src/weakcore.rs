//! Weak values, the weak-value operator, weak vectors over an operator basis,
//! the assignment solver and entangled realizations.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::qlinalg::{lstsq_min_norm, max_abs, singular_values, CMatrix, CVector, Operator, StateVector};
use crate::{Error, Result};

pub const OVERLAP_FLOOR: f64 = 1e-10;
pub const RANK_RATIO: f64 = 1e-8;
pub const PINV_RCOND: f64 = 1e-10;
pub const ASSIGNMENT_TOL: f64 = 1e-8;

/// Pure pre- and postselection on `system (x) ancilla`.
#[derive(Clone, Debug)]
pub struct PrePostEnsemble {
    psi_i: StateVector,
    psi_f: StateVector,
    system_dim: usize,
    ancilla_dim: usize,
}

impl PrePostEnsemble {
    /// `ancilla_dim = 0` means no ancilla.
    pub fn new(psi_i: StateVector, psi_f: StateVector, system_dim: usize, ancilla_dim: usize) -> Result<Self> {
        Self::with_overlap_floor(psi_i, psi_f, system_dim, ancilla_dim, OVERLAP_FLOOR)
    }

    pub fn with_overlap_floor(
        psi_i: StateVector,
        psi_f: StateVector,
        system_dim: usize,
        ancilla_dim: usize,
        floor: f64,
    ) -> Result<Self> {
        let total = system_dim * ancilla_dim.max(1);
        for s in [&psi_i, &psi_f] {
            if s.dim() != total {
                return Err(Error::DimensionMismatch { expected: total, found: s.dim() });
            }
        }
        let factors = if ancilla_dim > 0 { vec![system_dim, ancilla_dim] } else { vec![system_dim] };
        let ens = Self {
            psi_i: psi_i.refactor(factors.clone())?,
            psi_f: psi_f.refactor(factors)?,
            system_dim,
            ancilla_dim,
        };
        let ov = ens.overlap().norm();
        if ov <= floor {
            return Err(Error::OrthogonalSelection { overlap: ov });
        }
        Ok(ens)
    }

    pub fn no_ancilla(psi_i: StateVector, psi_f: StateVector) -> Result<Self> {
        let d = psi_i.dim();
        Self::new(psi_i, psi_f, d, 0)
    }

    pub fn psi_i(&self) -> &StateVector {
        &self.psi_i
    }

    pub fn psi_f(&self) -> &StateVector {
        &self.psi_f
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim * self.ancilla_dim.max(1)
    }

    /// `<psi_f|psi_i>`.
    pub fn overlap(&self) -> C64 {
        self.psi_f.inner(&self.psi_i)
    }

    /// State reshaped to a `system x ancilla` matrix, so `(A (x) B)|psi>` is `A Psi B^T`.
    pub fn initial_matrix(&self) -> CMatrix {
        state_matrix(self.psi_i.amplitudes(), self.system_dim)
    }

    pub fn final_matrix(&self) -> CMatrix {
        state_matrix(self.psi_f.amplitudes(), self.system_dim)
    }
}

pub fn state_matrix(v: &CVector, system_dim: usize) -> CMatrix {
    let da = v.len() / system_dim;
    CMatrix::from_fn(system_dim, da, |i, a| v[i * da + a])
}

pub fn state_from_matrix(m: &CMatrix) -> CVector {
    let (ds, da) = m.shape();
    CVector::from_fn(ds * da, |k, _| m[(k / da, k % da)])
}

/// `<psi_f|(A (x) I)|psi_i> / <psi_f|psi_i>`.
pub fn weak_value(a: &Operator, ens: &PrePostEnsemble) -> Result<C64> {
    if a.dim() != ens.system_dim() {
        return Err(Error::DimensionMismatch { expected: ens.system_dim(), found: a.dim() });
    }
    let num = ens.final_matrix().dotc(&(a.matrix() * ens.initial_matrix()));
    Ok(num / ens.overlap())
}

/// Weak value of an operator acting on the whole `system (x) ancilla` space.
pub fn joint_weak_value(a: &Operator, ens: &PrePostEnsemble) -> Result<C64> {
    if a.dim() != ens.total_dim() {
        return Err(Error::DimensionMismatch { expected: ens.total_dim(), found: a.dim() });
    }
    Ok(ens.psi_f().inner(&StateVector::unnormalized(a.apply(ens.psi_i()))?) / ens.overlap())
}

/// `W = Tr_a(|psi_i><psi_f|) / <psi_f|psi_i>`.
pub fn weak_value_operator(ens: &PrePostEnsemble) -> Result<Operator> {
    let w = ens.initial_matrix() * ens.final_matrix().adjoint() / ens.overlap();
    Operator::new(w)
}

/// Orthonormal operator basis with `Tr(E_i^dag E_j) = delta_ij`.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    d: usize,
    elements: Vec<Operator>,
    gram: CMatrix,
    identity_vector: CVector,
}

impl OperatorBasis {
    /// Generalized Gell-Mann basis scaled to unit norm, starting with `I/sqrt(d)`:
    /// then for each pair `j < k` the symmetric and antisymmetric elements,
    /// then the diagonal elements. For `d = 2` this is `{I, X, Y, Z}/sqrt(2)`.
    pub fn gell_mann(d: usize) -> Self {
        assert!(d >= 1, "basis dimension must be positive");
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut els = Vec::with_capacity(d * d);
        els.push(CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0));
        for j in 0..d {
            for k in j + 1..d {
                let mut s = CMatrix::zeros(d, d);
                s[(j, k)] = C64::new(r2, 0.0);
                s[(k, j)] = C64::new(r2, 0.0);
                els.push(s);
                let mut a = CMatrix::zeros(d, d);
                a[(j, k)] = C64::new(0.0, -r2);
                a[(k, j)] = C64::new(0.0, r2);
                els.push(a);
            }
        }
        for l in 1..d {
            let lf = l as f64;
            let c = (1.0 / (lf * (lf + 1.0))).sqrt();
            let mut m = CMatrix::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = C64::new(c, 0.0);
            }
            m[(l, l)] = C64::new(-lf * c, 0.0);
            els.push(m);
        }
        let ops = els.into_iter().map(|m| Operator::hermitian(m).unwrap()).collect();
        Self::from_elements(ops).expect("Gell-Mann basis is orthonormal")
    }

    pub fn from_elements(elements: Vec<Operator>) -> Result<Self> {
        let n = elements.len();
        let d = elements.first().map(|e| e.dim()).unwrap_or(0);
        if d == 0 || n != d * d {
            return Err(Error::InvalidParameter(format!("basis needs d^2 elements, got {n}")));
        }
        for e in &elements {
            if e.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: e.dim() });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ip = elements[i].hs_inner(&elements[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (ip - C64::new(target, 0.0)).norm() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("basis not orthonormal at ({i}, {j})")));
                }
            }
        }
        let gram = CMatrix::from_fn(n, n, |i, j| (elements[i].matrix() * elements[j].matrix()).trace());
        let identity_vector = CVector::from_fn(n, |i, _| elements[i].trace().conj());
        Ok(Self { d, elements, gram, identity_vector })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// `gamma_ij = Tr(E_i E_j)`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `I_i = Tr(E_i)^*`.
    pub fn identity_vector(&self) -> &CVector {
        &self.identity_vector
    }

    /// Expansion coefficients `a_i = Tr(E_i^dag A)`, so `A = sum_i a_i E_i`.
    pub fn coefficients(&self, a: &Operator) -> CVector {
        CVector::from_fn(self.len(), |i, _| self.elements[i].hs_inner(a))
    }

    pub fn reconstruct(&self, coeffs: &CVector) -> Operator {
        let mut m = CMatrix::zeros(self.d, self.d);
        for (e, c) in self.elements.iter().zip(coeffs.iter()) {
            m += e.matrix() * *c;
        }
        Operator::new(m).unwrap()
    }
}

/// Components `w_i = Tr(E_i W)` of a weak-value operator `W = sum_i w_i E_i^dag`.
#[derive(Clone, Debug)]
pub struct WeakVector {
    components: CVector,
    basis: Arc<OperatorBasis>,
}

impl WeakVector {
    pub fn new(components: CVector, basis: Arc<OperatorBasis>) -> Result<Self> {
        if components.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: components.len() });
        }
        Ok(Self { components, basis })
    }

    pub fn components(&self) -> &CVector {
        &self.components
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    /// `I . w`, the trace of the represented operator.
    pub fn identity_dot(&self) -> C64 {
        self.basis.identity_vector().dot(&self.components)
    }

    /// `sum_i w_i E_i^dag`.
    pub fn operator(&self) -> Operator {
        let d = self.basis.d();
        let mut m = CMatrix::zeros(d, d);
        for (e, w) in self.basis.elements().iter().zip(self.components.iter()) {
            m += e.matrix().adjoint() * *w;
        }
        Operator::new(m).unwrap()
    }

    /// Weak value `a . w` of `A` with `a_i = Tr(E_i^dag A)`.
    pub fn weak_value(&self, a: &Operator) -> C64 {
        self.basis.coefficients(a).dot(&self.components)
    }

    /// `gamma*_ij w_i w_j`, which equals `Tr(W^2)`.
    pub fn gamma_form(&self) -> C64 {
        let g = self.basis.gram().map(|z| z.conj());
        (g * &self.components).dot(&self.components)
    }

    /// `w . w*`, which equals the squared Frobenius norm of `W`.
    pub fn norm_sqr(&self) -> f64 {
        self.components.norm_squared()
    }
}

pub fn weak_vector(w: &Operator, basis: &Arc<OperatorBasis>) -> Result<WeakVector> {
    if w.dim() != basis.d() {
        return Err(Error::DimensionMismatch { expected: basis.d(), found: w.dim() });
    }
    let comps = CVector::from_fn(basis.len(), |i, _| (basis.elements()[i].matrix() * w.matrix()).trace());
    WeakVector::new(comps, basis.clone())
}

/// Necessary conditions for a product-state realization: `Tr(W^2) = 1` and
/// `|W|_F^2 = |<chi_f|chi_i>|^-2 >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductConstraints {
    pub trace_of_square: C64,
    pub frobenius_sqr: f64,
}

impl ProductConstraints {
    pub fn of(w: &Operator) -> Self {
        Self {
            trace_of_square: (w.matrix() * w.matrix()).trace(),
            frobenius_sqr: w.matrix().norm_squared(),
        }
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        (self.trace_of_square - C64::new(1.0, 0.0)).norm() <= tol && self.frobenius_sqr >= 1.0 - tol
    }
}

#[derive(Clone, Debug)]
pub enum Realizability {
    /// `W = |chi_i><chi_f| / <chi_f|chi_i>`.
    ProductRealizable {
        chi_i: StateVector,
        chi_f: StateVector,
        constraints: ProductConstraints,
    },
    EntanglementRequired {
        singular_ratio: f64,
        constraints: ProductConstraints,
    },
}

impl Realizability {
    pub fn is_product(&self) -> bool {
        matches!(self, Realizability::ProductRealizable { .. })
    }

    pub fn constraints(&self) -> &ProductConstraints {
        match self {
            Realizability::ProductRealizable { constraints, .. } => constraints,
            Realizability::EntanglementRequired { constraints, .. } => constraints,
        }
    }
}

/// Classifies `W` by numerical rank: rank one means a product pre/postselection exists.
pub fn product_realizability(w: &Operator) -> Result<Realizability> {
    let tr = w.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::TraceNotOne { trace: tr });
    }
    let constraints = ProductConstraints::of(w);
    let svd = w.matrix().clone().svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let s1 = svd.singular_values[order[0]];
    let s2 = order.get(1).map(|&k| svd.singular_values[k]).unwrap_or(0.0);
    let ratio = s2 / s1;
    if ratio > RANK_RATIO {
        return Ok(Realizability::EntanglementRequired { singular_ratio: ratio, constraints });
    }
    let u = svd.u.as_ref().unwrap().column(order[0]).into_owned();
    let v = svd.v_t.as_ref().unwrap().row(order[0]).adjoint();
    Ok(Realizability::ProductRealizable {
        chi_i: StateVector::new(u)?,
        chi_f: StateVector::new(v)?,
        constraints,
    })
}

/// Target weak values `alpha_i` for operators `A_i`.
#[derive(Clone, Debug)]
pub struct AssignmentProblem {
    targets: Vec<(Operator, C64)>,
    basis: Arc<OperatorBasis>,
}

impl AssignmentProblem {
    pub fn new(targets: Vec<(Operator, C64)>, basis: Arc<OperatorBasis>) -> Result<Self> {
        for (a, _) in &targets {
            if a.dim() != basis.d() {
                return Err(Error::DimensionMismatch { expected: basis.d(), found: a.dim() });
            }
        }
        Ok(Self { targets, basis })
    }

    pub fn targets(&self) -> &[(Operator, C64)] {
        &self.targets
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }
}

/// Minimum-norm weak vector meeting every target and `I . w = 1`.
pub fn solve_assignment(prob: &AssignmentProblem) -> Result<WeakVector> {
    let basis = prob.basis();
    let n = basis.len();
    let rows = prob.targets().len() + 1;
    let mut a = CMatrix::zeros(rows, n);
    let mut b = CVector::zeros(rows);
    for (r, (op, alpha)) in prob.targets().iter().enumerate() {
        a.row_mut(r).copy_from(&basis.coefficients(op).transpose());
        b[r] = *alpha;
    }
    a.row_mut(rows - 1).copy_from(&basis.identity_vector().transpose());
    b[rows - 1] = C64::new(1.0, 0.0);
    let (w, _) = lstsq_min_norm(&a, &b, PINV_RCOND);
    let residual = max_abs(&(&a * &w - &b));
    if residual > ASSIGNMENT_TOL {
        return Err(Error::Infeasible { residual });
    }
    WeakVector::new(w, basis.clone())
}

/// Entangled realization with `psi_f = sum_k |k>|k>` and
/// `psi_i = sum_i z_i (E_i^dag (x) I)|Phi>`, both normalized.
pub fn realize_entangled(w: &WeakVector) -> Result<PrePostEnsemble> {
    let d = w.basis().d();
    let zi = w.identity_dot();
    let scale = w.components().norm() * w.basis().identity_vector().norm();
    if zi.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateRealization { value: zi.norm() });
    }
    let psi_i = StateVector::with_factors(state_from_matrix(w.operator().matrix()), vec![d, d])?;
    let psi_f = StateVector::with_factors(state_from_matrix(&CMatrix::identity(d, d)), vec![d, d])?;
    PrePostEnsemble::new(psi_i, psi_f, d, d)
}

#[derive(Clone, Debug)]
pub struct AssignmentReport {
    pub weak_values: Vec<C64>,
    pub errors: Vec<C64>,
    pub max_residual: f64,
}

pub fn verify_assignment(ens: &PrePostEnsemble, prob: &AssignmentProblem) -> Result<AssignmentReport> {
    let mut weak_values = Vec::with_capacity(prob.targets().len());
    let mut errors = Vec::with_capacity(prob.targets().len());
    for (a, alpha) in prob.targets() {
        let wv = weak_value(a, ens)?;
        weak_values.push(wv);
        errors.push(wv - alpha);
    }
    let max_residual = errors.iter().map(|e| e.norm()).fold(0.0, f64::max);
    Ok(AssignmentReport { weak_values, errors, max_residual })
}

/// Rank of a matrix by the same singular-value ratio used for realizability.
pub fn numerical_rank(m: &CMatrix) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&x| x / s1 > RANK_RATIO).count(),
        _ => 0,
    }
}
