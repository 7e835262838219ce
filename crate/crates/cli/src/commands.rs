//! Subcommand arguments and their runners.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};
use weakjoint::jointmeas::{
    canonical_inference_experiment, factorization_residual, four_variable_experiment, kraus_sample, naive_ensemble,
    phase_fit, EPRSelection, Envelope, FourVariableConfig, InferenceConfig, InstrumentGrid, NaiveSelection,
};
use weakjoint::kernel_continuum::{feasibility, g_poly, verify_solution, Feasibility, PolynomialF, QuadratureOptions};
use weakjoint::nogo::{
    approx_assignment, btheta_spectrum_sweep, leading_correction, minimal_polynomial, spin_operators, ObservablePair,
    ObstructionVerdict,
};
use weakjoint::qlinalg::{grid_canonical_pair, unitary_from_generator, CanonicalGrid, Operator};
use weakjoint::weakcore::{
    product_realizability, realize_entangled, solve_assignment, verify_assignment, weak_value, AssignmentProblem,
    OperatorBasis, Realizability,
};
use weakjoint::weyl_discrete::{DiscreteWeylBasis, PhasePoint};
use weakjoint::{Error, C64};

use crate::report::{Table, Verdict};
use crate::spec::{NamedOperator, OperatorSpec};

/// Everything a runner produces before metadata is attached.
pub struct Run {
    pub config: Value,
    pub verdict: Verdict,
    pub summary: String,
    pub results: Vec<Value>,
    pub tables: Vec<Table>,
    /// Extra files as `(name, contents)`.
    pub files: Vec<(String, String)>,
}

fn pair<T: Copy>(v: &[T], what: &str) -> Result<[T; 2]> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => bail!("{what}: expected two comma-separated values, got {}", v.len()),
    }
}

fn c64_json(z: C64) -> Value {
    json!([z.re, z.im])
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct InferXpArgs {
    /// Grid points per factor.
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    /// Periodic box length.
    #[arg(long = "L", visible_alias = "length", default_value_t = 20.0)]
    pub length: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_minus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_minus: f64,
    /// Gaussian envelope width; defaults to L/8.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Width of the smoothed deltas; defaults to the grid spacing.
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Coupling points per axis for the phase fit.
    #[arg(long, default_value_t = 9)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q_max: f64,
    #[arg(long, default_value_t = 32)]
    pub pointer_n: usize,
    #[arg(long, default_value_t = 1.75)]
    pub pointer_q_max: f64,
    /// Instrument spreads `dpi1,dpi2`.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 2.0])]
    pub spreads: Vec<f64>,
    /// Skip the pointer distribution.
    #[arg(long)]
    pub no_pointer: bool,
    /// Grid sizes for the convergence table.
    #[arg(long, value_delimiter = ',', default_values_t = vec![32, 64, 128])]
    pub convergence: Vec<usize>,
}

fn selection(x_minus: f64, p_plus: f64, x_plus: f64, p_minus: f64, sigma: Option<f64>, smoothing: Option<f64>) -> EPRSelection {
    let mut sel = EPRSelection::new(x_minus, p_plus, x_plus, p_minus);
    if let Some(s) = sigma {
        sel = sel.with_envelope(Envelope::Gaussian { sigma: s });
    }
    if let Some(e) = smoothing {
        sel = sel.with_smoothing(e);
    }
    sel
}

pub fn infer_xp(a: &InferXpArgs) -> Result<Run> {
    let sel = selection(a.x_minus, a.p_plus, a.x_plus, a.p_minus, a.sigma, a.smoothing);
    let mut cfg = InferenceConfig::new(a.d, a.length);
    cfg.fit_grid = InstrumentGrid::new(a.n, a.q_max, vec![1.0, 1.0])?;
    cfg.pointer_grid = if a.no_pointer {
        None
    } else {
        Some(InstrumentGrid::new(a.pointer_n, a.pointer_q_max, pair(&a.spreads, "--spreads")?.to_vec())?)
    };
    cfg.convergence_dims = a.convergence.clone();
    for &d in std::iter::once(&a.d).chain(&a.convergence) {
        CanonicalGrid::new(d, a.length)?;
    }
    let r = canonical_inference_experiment(&sel, &cfg)?;
    let mut conv = Table::new("convergence.csv", &["d", "alpha_x", "alpha_p", "beta", "residual_rms"]);
    for row in &r.convergence {
        conv.push_numbers(&[row.d as f64, row.alpha[0], row.alpha[1], row.beta, row.residual_rms]);
    }
    let mut tables = vec![conv];
    if let Some(pt) = &r.pointer {
        let dist = &pt.distribution;
        let mut t = Table::new("pointer.csv", &["pi1", "pi2", "probability"]);
        for (idx, p) in dist.probs.iter().enumerate() {
            t.push_numbers(&[dist.pi_values[idx / dist.n], dist.pi_values[idx % dist.n], *p]);
        }
        tables.push(t);
    }
    let summary = format!(
        "alpha = ({:.4}, {:.4}) for predicted ({:.4}, {:.4}); beta12 = {:.3e} against naive {:.4}",
        r.fit.alpha[0],
        r.fit.alpha[1],
        r.predicted[0],
        r.predicted[1],
        r.fit.beta(0, 1),
        r.naive_fit.beta(0, 1)
    );
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary,
        results: vec![serde_json::to_value(&r)?],
        tables,
        files: vec![],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct InferXp4Args {
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "L", visible_alias = "length", default_value_t = 16.0)]
    pub length: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_minus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_minus: f64,
    #[arg(long, default_value_t = 9)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q_max: f64,
    #[arg(long, default_value_t = 16)]
    pub pointer_n: usize,
    #[arg(long, default_value_t = 3.0)]
    pub pointer_q_max: f64,
}

pub fn infer_xp4(a: &InferXp4Args) -> Result<Run> {
    let sel = EPRSelection::new(a.x_minus, a.p_plus, a.x_plus, a.p_minus);
    let mut cfg = FourVariableConfig::new(a.d, a.length);
    cfg.fit_grid = InstrumentGrid::new(a.n, a.q_max, vec![1.0; 4])?;
    cfg.pointer_grid = InstrumentGrid::new(a.pointer_n, a.pointer_q_max, vec![1.0; 4])?;
    CanonicalGrid::new(a.d, a.length)?;
    let r = four_variable_experiment(&sel, &cfg)?;
    let mut t = Table::new("sweep.csv", &["dpi1", "dpi2", "dpi3", "dpi4", "out1", "out2", "out3", "out4", "product"]);
    for row in &r.conjecture_check {
        let mut v = row.spreads.clone();
        v.extend(&row.output_spreads);
        v.push(row.product);
        t.push_numbers(&v);
    }
    let verdict = if r.min_product >= 0.25 { Verdict::Positive } else { Verdict::Negative };
    let summary = format!(
        "beta14 = {:.4}, beta23 = {:.4}, beta12 = {:.4}, beta34 = {:.4}; smallest 4-product {:.4} (floor 1/4)",
        r.crossed[0], r.crossed[1], r.direct[0], r.direct[1], r.min_product
    );
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict,
        summary,
        results: vec![serde_json::to_value(&r)?],
        tables: vec![t],
        files: vec![],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct NogoArgs {
    /// Operator-spec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Two operator names; defaults to the first two in the file.
    #[arg(long, value_delimiter = ',')]
    pub ops: Vec<String>,
    /// Candidate joint values `alpha1,alpha2`.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.0])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = weakjoint::nogo::DEFAULT_N_THETA)]
    pub n_theta: usize,
}

fn echo_spec(spec: &OperatorSpec) -> (String, String) {
    ("operators.json".into(), spec.to_json() + "\n")
}

pub fn nogo(a: &NogoArgs) -> Result<Run> {
    let spec = OperatorSpec::load(&a.spec)?;
    let ops = spec.select(&a.ops, 2)?;
    let [a1, a2] = pair(&a.alpha, "--alpha")?;
    let p = ObservablePair::new(ops[0].1.clone(), ops[1].1.clone())?;
    let prof = btheta_spectrum_sweep(&p, a1, a2, a.n_theta)?;
    let mut t = Table::new("profile.csv", &["theta", "beta", "distance"]);
    for j in 0..prof.thetas.len() {
        t.push_numbers(&[prof.thetas[j], prof.beta[j], prof.distance[j]]);
    }
    let (verdict, summary) = match prof.verdict {
        ObstructionVerdict::Consistent => (Verdict::Positive, "no obstruction window found".to_string()),
        ObstructionVerdict::Infeasible { start, end } => (
            Verdict::Negative,
            format!("joint value ({a1}, {a2}) for ({}, {}) is infeasible on theta in [{start:.4}, {end:.4}]", ops[0].0, ops[1].0),
        ),
    };
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict,
        summary,
        results: vec![json!({ "operators": [ops[0].0, ops[1].0], "profile": prof })],
        tables: vec![t],
        files: vec![echo_spec(&spec)],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ApproxArgs {
    /// Twice the spin; the pair is `(Jx, Jz)`. Ignored with `--spec`.
    #[arg(long, default_value_t = 1)]
    pub two_j: usize,
    /// Operator-spec file supplying the pair instead of spin operators.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub ops: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.7, 0.4])]
    pub alpha: Vec<f64>,
    /// Direction of the coupling vector, radians.
    #[arg(long, default_value_t = 0.6)]
    pub direction: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub q_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub q_max: f64,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

pub fn approx(a: &ApproxArgs) -> Result<Run> {
    if !(a.q_min > 0.0 && a.q_max > a.q_min && a.points >= 2) {
        bail!("need 0 < --q-min < --q-max and --points >= 2");
    }
    let (names, p) = match &a.spec {
        Some(path) => {
            let spec = OperatorSpec::load(path)?;
            let ops = spec.select(&a.ops, 2)?;
            ([ops[0].0.clone(), ops[1].0.clone()], ObservablePair::new(ops[0].1.clone(), ops[1].1.clone())?)
        }
        None => {
            if a.two_j == 0 {
                bail!("--two-j must be positive");
            }
            let (jx, _, jz) = spin_operators(a.two_j);
            (["Jx".to_string(), "Jz".to_string()], ObservablePair::new(jx, jz)?)
        }
    };
    let [a1, a2] = pair(&a.alpha, "--alpha")?;
    let s = minimal_polynomial(&p.b_theta(0.0))?.degree();
    let basis = Arc::new(OperatorBasis::gell_mann(p.dim()));
    let r = match approx_assignment(&p, a1, a2, s, &basis) {
        Ok(r) => r,
        Err(e @ (Error::DependentSymmetrizedSet { .. } | Error::DegreeMismatch { .. } | Error::Infeasible { .. })) => {
            return Ok(Run {
                config: serde_json::to_value(a)?,
                verdict: Verdict::Negative,
                summary: format!("no approximate assignment: {e}"),
                results: vec![json!({ "operators": names, "error": e.to_string() })],
                tables: vec![],
                files: vec![],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let rep = verify_assignment(&r.ensemble, &r.problem)?;
    let mut t = Table::new("approx.csv", &["q", "exponent_error", "corrected_error"]);
    let mut pts = Vec::with_capacity(a.points);
    let ratio = (a.q_max / a.q_min).ln() / (a.points - 1) as f64;
    for k in 0..a.points {
        let q = a.q_min * (ratio * k as f64).exp();
        let (q1, q2) = (q * a.direction.cos(), q * a.direction.sin());
        let u = unitary_from_generator(&[(p.a1(), q1), (p.a2(), q2)])?;
        let expo = weak_value(&u, &r.ensemble)?.ln() - C64::new(0.0, a1 * q1 + a2 * q2);
        let corrected = (expo - leading_correction(&p, a1, a2, q1, q2)?).norm();
        t.push_numbers(&[q, expo.norm(), corrected]);
        pts.push((q.ln(), corrected.ln()));
    }
    let slope = log_slope(&pts);
    let summary = format!("order s = {s}; assignment residual {:.2e}; corrected exponent error slope {slope:.3}", rep.max_residual);
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary,
        results: vec![json!({
            "operators": names,
            "s": s,
            "targets": r.problem.targets().len(),
            "min_gram_singular": r.min_gram_singular,
            "assignment_residual": rep.max_residual,
            "corrected_error_slope": slope,
        })],
        tables: vec![t],
        files: vec![],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct AssignArgs {
    /// Operator-spec JSON file with a `targets` list.
    #[arg(long)]
    pub spec: PathBuf,
}

pub fn assign(a: &AssignArgs) -> Result<Run> {
    let spec = OperatorSpec::load(&a.spec)?;
    if spec.targets.is_empty() {
        bail!("{}: targets: at least one target weak value is required", a.spec.display());
    }
    let targets: Vec<(Operator, C64)> =
        spec.targets.iter().map(|(n, v)| Ok((spec.get(n)?.clone(), *v))).collect::<Result<_>>()?;
    let basis = Arc::new(OperatorBasis::gell_mann(spec.dimension));
    let prob = AssignmentProblem::new(targets, basis)?;
    let w = match solve_assignment(&prob) {
        Ok(w) => w,
        Err(Error::Infeasible { residual }) => {
            return Ok(Run {
                config: serde_json::to_value(a)?,
                verdict: Verdict::Negative,
                summary: format!("targets are inconsistent: least-squares residual {residual:.3e}"),
                results: vec![json!({ "feasible": false, "residual": residual })],
                tables: vec![],
                files: vec![echo_spec(&spec)],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let ens = realize_entangled(&w)?;
    let rep = verify_assignment(&ens, &prob)?;
    let realizability = match product_realizability(&w.operator())? {
        Realizability::ProductRealizable { .. } => json!({ "kind": "product" }),
        Realizability::EntanglementRequired { singular_ratio, .. } => {
            json!({ "kind": "entanglement_required", "singular_ratio": singular_ratio })
        }
    };
    let mut t = Table::new("assign.csv", &["operator", "target_re", "target_im", "weak_re", "weak_im", "error"]);
    for (((name, target), wv), err) in spec.targets.iter().zip(&rep.weak_values).zip(&rep.errors) {
        t.push(vec![
            name.clone(),
            format!("{:?}", target.re),
            format!("{:?}", target.im),
            format!("{:?}", wv.re),
            format!("{:?}", wv.im),
            format!("{:?}", err.norm()),
        ]);
    }
    let m = w.operator();
    let d = spec.dimension;
    let wmat: Vec<Vec<Value>> = (0..d).map(|r| (0..d).map(|c| c64_json(m.matrix()[(r, c)])).collect()).collect();
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary: format!("realized with an entangled ancilla; max residual {:.2e}", rep.max_residual),
        results: vec![json!({
            "feasible": true,
            "max_residual": rep.max_residual,
            "weak_value_operator": wmat,
            "realizability": realizability,
            "overlap": c64_json(ens.overlap()),
        })],
        tables: vec![t],
        files: vec![echo_spec(&spec)],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct WeylArgs {
    /// Odd dimension.
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2])]
    pub zeta_i: Vec<i64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1])]
    pub eta_f: Vec<i64>,
    /// Also tabulate the Weyl symbols of the operators in this spec.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

pub fn weyl(a: &WeylArgs) -> Result<Run> {
    let w = DiscreteWeylBasis::new(a.d)?;
    let [z1, z2] = pair(&a.zeta_i, "--zeta-i")?;
    let [e1, e2] = pair(&a.eta_f, "--eta-f")?;
    let (zi, ef) = (PhasePoint::new(z1, z2), PhasePoint::new(e1, e2));
    let ens = w.epr_ensemble(zi, ef)?;
    let wop = weakjoint::weakcore::weak_value_operator(&ens)?;
    let eta_s = w.realized_point(zi, ef);
    let dev = wop.max_abs_diff(&w.phase_point_op(eta_s));
    let mut operators: Vec<NamedOperator> = vec![NamedOperator { name: "W".into(), operator: wop }];
    let mut files = vec![];
    if let Some(path) = &a.spec {
        let spec = OperatorSpec::load(path)?;
        if spec.dimension != a.d {
            bail!("{}: dimension {} does not match --d {}", path.display(), spec.dimension, a.d);
        }
        operators.extend(spec.operators.iter().cloned());
        files.push(echo_spec(&spec));
    }
    let mut t = Table::new("weyl.csv", &["operator", "eta1", "eta2", "symbol_re", "symbol_im"]);
    for o in &operators {
        let sym = w.weyl_symbol(&o.operator)?;
        for pt in w.points() {
            let v = sym[w.index(pt)];
            t.push(vec![o.name.clone(), pt.z1.to_string(), pt.z2.to_string(), format!("{:?}", v.re), format!("{:?}", v.im)]);
        }
    }
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary: format!("weak-value operator is the phase-point operator at ({}, {}), deviation {dev:.2e}", eta_s.z1, eta_s.z2),
        results: vec![json!({ "realized_point": [eta_s.z1, eta_s.z2], "max_deviation": dev })],
        tables: vec![t],
        files,
    })
}

#[derive(Args, Clone, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct KernelArgs {
    /// Ascending coefficients of `f`.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.0, 0.0, 1.0])]
    pub coeffs: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 2.0)]
    pub phi: f64,
    #[arg(long, default_value_t = -5.0)]
    pub zeta1_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub zeta1_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub zeta1_step: f64,
    /// Quadrature samples `t1,t2[,t1,t2...]`; empty skips the quadrature tier.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.5])]
    pub t: Vec<f64>,
}

pub fn kernel(a: &KernelArgs) -> Result<Run> {
    let f = PolynomialF::new(a.coeffs.clone())?;
    if !(a.zeta1_step > 0.0 && a.zeta1_max >= a.zeta1_min) {
        bail!("need --zeta1-step > 0 and --zeta1-max >= --zeta1-min");
    }
    if a.t.len() % 2 != 0 {
        bail!("--t: expected pairs t1,t2, got {} values", a.t.len());
    }
    if let Feasibility::RejectedEvenDegree = feasibility(&f) {
        return Ok(Run {
            config: serde_json::to_value(a)?,
            verdict: Verdict::Negative,
            summary: format!("even degree {} has no real root for some phi", f.degree()),
            results: vec![json!({ "feasible": false, "degree": f.degree() })],
            tables: vec![],
            files: vec![],
        });
    }
    let steps = ((a.zeta1_max - a.zeta1_min) / a.zeta1_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| a.zeta1_min + k as f64 * a.zeta1_step).collect();
    let ts: Vec<[f64; 2]> = a.t.chunks(2).map(|c| [c[0], c[1]]).collect();
    let rep = verify_solution(&f, a.kappa, a.phi, &ts, &grid, QuadratureOptions::default())?;
    let mut t = Table::new("kernel.csv", &["zeta1", "u_root", "residual"]);
    for j in 0..rep.zeta1.len() {
        t.push_numbers(&[rep.zeta1[j], rep.u_root[j], rep.algebraic[j]]);
    }
    let g0 = g_poly(&f, 0.0);
    let quad_max = rep.quadrature.iter().map(|q| q.residual).fold(0.0, f64::max);
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary: format!("algebraic residual {:.2e}; quadrature residual {quad_max:.3e}", rep.algebraic_max),
        results: vec![json!({ "g_at_zero": g0, "report": rep })],
        tables: vec![t],
        files: vec![],
    })
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SelftestArgs {}

struct Check {
    name: &'static str,
    run: fn() -> Result<(bool, String)>,
}

fn st_weyl() -> Result<(bool, String)> {
    let w = DiscreteWeylBasis::new(3)?;
    let mut worst: f64 = 0.0;
    for zi in w.points() {
        for ef in w.points() {
            let wop = weakjoint::weakcore::weak_value_operator(&w.epr_ensemble(zi, ef)?)?;
            worst = worst.max(wop.max_abs_diff(&w.phase_point_op(w.realized_point(zi, ef))));
        }
    }
    Ok((worst <= 1e-10, format!("d = 3, max deviation {worst:.2e}")))
}

fn st_nogo() -> Result<(bool, String)> {
    let (x, _, z) = spin_operators(1);
    let two = C64::new(2.0, 0.0);
    let p = ObservablePair::new(x.scale(two), z.scale(two))?;
    let prof = btheta_spectrum_sweep(&p, 1.0, 1.0, 181)?;
    let dev = prof
        .thetas
        .iter()
        .zip(&prof.distance)
        .map(|(t, d)| {
            let b = t.cos() + t.sin();
            (d - (b - 1.0).abs().min((b + 1.0).abs())).abs()
        })
        .fold(0.0, f64::max);
    let infeasible = matches!(prof.verdict, ObstructionVerdict::Infeasible { .. });
    Ok((dev <= 1e-12 && infeasible, format!("Pauli profile deviation {dev:.2e}")))
}

fn st_kernel() -> Result<(bool, String)> {
    let grid: Vec<f64> = (0..=100).map(|k| -5.0 + 0.1 * k as f64).collect();
    let rep = verify_solution(&PolynomialF::monomial(3), 0.0, 2.0, &[], &grid, QuadratureOptions::default())?;
    Ok((rep.algebraic_max <= 1e-10, format!("x^3 algebraic residual {:.2e}", rep.algebraic_max)))
}

fn st_assign() -> Result<(bool, String)> {
    let (jx, jy, jz) = spin_operators(2);
    let targets = vec![(jx, C64::new(0.3, 0.0)), (jy, C64::new(-0.2, 0.1)), (jz, C64::new(1.7, 0.0))];
    let prob = AssignmentProblem::new(targets, Arc::new(OperatorBasis::gell_mann(3)))?;
    let ens = realize_entangled(&solve_assignment(&prob)?)?;
    let r = verify_assignment(&ens, &prob)?.max_residual;
    Ok((r <= 1e-8, format!("spin-1 round-trip residual {r:.2e}")))
}

fn st_back_action() -> Result<(bool, String)> {
    let g = CanonicalGrid::new(32, 20.0)?;
    let (x, p) = grid_canonical_pair(&g);
    let ens = naive_ensemble(&NaiveSelection::plane_wave(0.0, 0.0), &g)?;
    let fit = phase_fit(&kraus_sample(&ens, &[x, p], &InstrumentGrid::new(9, 0.5, vec![1.0, 1.0])?)?)?;
    let b = fit.beta(0, 1);
    Ok(((b - 0.5).abs() <= 0.05, format!("naive beta12 at d = 32: {b:.4}")))
}

fn st_factorization() -> Result<(bool, String)> {
    let g = CanonicalGrid::new(16, 12.0)?;
    let r = factorization_residual(&EPRSelection::new(0.5, 0.3, 0.2, -0.1), &g, &[[0.5, 0.5], [-0.3, 0.4]])?;
    Ok((r <= 1e-10, format!("EPR factorization residual {r:.2e}")))
}

fn st_spectrum_quarter_turn() -> Result<(bool, String)> {
    let (x, _, z) = spin_operators(1);
    let two = C64::new(2.0, 0.0);
    let p = ObservablePair::new(x.scale(two), z.scale(two))?;
    let prof = btheta_spectrum_sweep(&p, 1.0, 1.0, 5)?;
    let d = prof.distance[1];
    let want = 2f64.sqrt() - 1.0;
    Ok(((d - want).abs() <= 1e-12, format!("distance at pi/4 {d:.12}")))
}

pub fn selftest(a: &SelftestArgs) -> Result<Run> {
    let checks = [
        Check { name: "phase-point realization", run: st_weyl },
        Check { name: "obstruction profile", run: st_nogo },
        Check { name: "quarter-turn distance", run: st_spectrum_quarter_turn },
        Check { name: "kernel root condition", run: st_kernel },
        Check { name: "assignment round-trip", run: st_assign },
        Check { name: "naive back-action", run: st_back_action },
        Check { name: "EPR factorization", run: st_factorization },
    ];
    let mut results = Vec::new();
    let mut failed = Vec::new();
    for c in &checks {
        let (ok, detail) = (c.run)().with_context(|| format!("selftest {}", c.name))?;
        println!("{} {}: {detail}", if ok { "PASS" } else { "FAIL" }, c.name);
        if !ok {
            failed.push(c.name);
        }
        results.push(json!({ "name": c.name, "passed": ok, "detail": detail }));
    }
    if !failed.is_empty() {
        bail!("selftest failed: {}", failed.join(", "));
    }
    Ok(Run {
        config: serde_json::to_value(a)?,
        verdict: Verdict::Positive,
        summary: format!("{} checks passed", checks.len()),
        results,
        tables: vec![],
        files: vec![],
    })
}
