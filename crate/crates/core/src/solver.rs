//! Material laws and the Picard iteration u <- A_N^{-1} F_N(u).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::assembly::{self, AssembledSystem, IncidentField, QUAD6};
use crate::boundary::{self, FourierTrace};
use crate::error::{Error, Result};
use crate::mesh::{Mesh2D, Region};
use crate::specfun;
use crate::WaveContext;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub type PointFn = Arc<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>;
pub type LawFn = Arc<dyn Fn([f64; 2], Complex64) -> Complex64 + Send + Sync>;
pub type LipschitzFn = Arc<dyn Fn([f64; 2], Complex64, Complex64) -> f64 + Send + Sync>;

/// Coefficient field on the obstacle.
#[derive(Clone)]
pub enum Field {
    Constant(Complex64),
    Function(PointFn),
}

impl Field {
    pub fn real(v: f64) -> Self {
        Field::Constant(Complex64::new(v, 0.0))
    }

    pub fn at(&self, x: [f64; 2]) -> Complex64 {
        match self {
            Field::Constant(c) => *c,
            Field::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// User-supplied material law with its Lipschitz data.
#[derive(Clone)]
pub struct CustomLaw {
    pub c: LawFn,
    pub f: LawFn,
    pub lipschitz_c: LipschitzFn,
    pub lipschitz_f: LipschitzFn,
    pub p_c: f64,
    pub p_f: f64,
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("p_c", &self.p_c)
            .field("p_f", &self.p_f)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum NonlinearityKind {
    Linear { eps: Field },
    Kerr { eps: Field, alpha: Field },
    SaturatedKerr { eps: Field, alpha: Field, gamma: f64 },
    Custom(CustomLaw),
}

/// Material law c(x, xi) and source f(x, xi) on the obstacle. Outside the
/// obstacle c = 1 and f = 0.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    /// Additional xi-independent source f(x) for the non-custom laws.
    pub source: Option<Field>,
}

/// Where the linear coefficient eps^L of the material law is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearPart {
    /// eps^L enters the operator; the iteration only sees c(u) - eps^L.
    Operator,
    /// The operator uses c = 1; the iteration sees c(u) - 1.
    Rhs,
}

impl Nonlinearity {
    /// c = 1, f = 0.
    pub fn vacuum() -> Self {
        Self::linear(Field::real(1.0))
    }

    pub fn linear(eps: Field) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Linear { eps },
            source: None,
        }
    }

    pub fn kerr(eps: Field, alpha: Field) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Kerr { eps, alpha },
            source: None,
        }
    }

    pub fn saturated_kerr(eps: Field, alpha: Field, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "saturation parameter gamma must be positive, got {gamma}"
            )));
        }
        Ok(Nonlinearity {
            kind: NonlinearityKind::SaturatedKerr { eps, alpha, gamma },
            source: None,
        })
    }

    pub fn custom(law: CustomLaw) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Custom(law),
            source: None,
        }
    }

    pub fn with_source(mut self, source: Field) -> Self {
        self.source = Some(source);
        self
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            NonlinearityKind::Linear { .. } => "linear",
            NonlinearityKind::Kerr { .. } => "kerr",
            NonlinearityKind::SaturatedKerr { .. } => "saturated-kerr",
            NonlinearityKind::Custom(_) => "custom",
        }
    }

    /// Linear coefficient eps^L(x) = c(x, 0).
    pub fn eps(&self, x: [f64; 2]) -> Complex64 {
        match &self.kind {
            NonlinearityKind::Linear { eps }
            | NonlinearityKind::Kerr { eps, .. }
            | NonlinearityKind::SaturatedKerr { eps, .. } => eps.at(x),
            NonlinearityKind::Custom(law) => (law.c)(x, ZERO),
        }
    }

    pub fn alpha(&self, x: [f64; 2]) -> Complex64 {
        match &self.kind {
            NonlinearityKind::Kerr { alpha, .. } | NonlinearityKind::SaturatedKerr { alpha, .. } => {
                alpha.at(x)
            }
            _ => ZERO,
        }
    }

    /// c(x, xi) for x in the obstacle.
    pub fn c(&self, x: [f64; 2], xi: Complex64) -> Complex64 {
        let s = xi.norm_sqr();
        match &self.kind {
            NonlinearityKind::Linear { eps } => eps.at(x),
            NonlinearityKind::Kerr { eps, alpha } => eps.at(x) + alpha.at(x) * s,
            NonlinearityKind::SaturatedKerr { eps, alpha, gamma } => {
                eps.at(x) + alpha.at(x) * (s / (1.0 + gamma * s))
            }
            NonlinearityKind::Custom(law) => (law.c)(x, xi),
        }
    }

    /// f(x, xi) for x in the obstacle.
    pub fn f(&self, x: [f64; 2], xi: Complex64) -> Complex64 {
        match &self.kind {
            NonlinearityKind::Custom(law) => (law.f)(x, xi),
            _ => self.source.as_ref().map_or(ZERO, |s| s.at(x)),
        }
    }

    /// L_c(x, xi, eta) with |c(x, xi) - c(x, eta)| <= L_c |xi - eta|.
    pub fn lipschitz_c(&self, x: [f64; 2], xi: Complex64, eta: Complex64) -> f64 {
        match &self.kind {
            NonlinearityKind::Linear { .. } => 0.0,
            NonlinearityKind::Kerr { alpha, .. } | NonlinearityKind::SaturatedKerr { alpha, .. } => {
                alpha.at(x).norm() * (xi.norm() + eta.norm())
            }
            NonlinearityKind::Custom(law) => (law.lipschitz_c)(x, xi, eta),
        }
    }

    /// L_f(x, xi, eta).
    pub fn lipschitz_f(&self, x: [f64; 2], xi: Complex64, eta: Complex64) -> f64 {
        match &self.kind {
            NonlinearityKind::Custom(law) => (law.lipschitz_f)(x, xi, eta),
            _ => 0.0,
        }
    }

    /// Growth exponent p_c of the Lipschitz function, if the law is nonlinear.
    pub fn p_c(&self) -> Option<f64> {
        match &self.kind {
            NonlinearityKind::Linear { .. } => None,
            NonlinearityKind::Kerr { .. } | NonlinearityKind::SaturatedKerr { .. } => Some(4.0),
            NonlinearityKind::Custom(law) => Some(law.p_c),
        }
    }

    /// True when c does not depend on xi and f does not depend on xi.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, NonlinearityKind::Linear { .. })
    }
}

/// Norms of the material data over the obstacle of a mesh, by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialNorms {
    /// ||eps^L - 1||_{0,2,Omega}.
    pub eps_minus_one_l2: f64,
    /// ||alpha||_{0,inf,Omega}, sampled at quadrature points and vertices.
    pub alpha_sup: f64,
}

pub fn material_norms(nl: &Nonlinearity, mesh: &Mesh2D) -> MaterialNorms {
    let mut l2 = 0.0;
    let mut sup: f64 = 0.0;
    for t in 0..mesh.triangles.len() {
        if mesh.tags[t] != Region::Obstacle {
            continue;
        }
        let area = mesh.area(t);
        for (lam, w) in QUAD6 {
            let x = assembly::map_point(mesh, t, lam);
            l2 += w * area * (nl.eps(x) - 1.0).norm_sqr();
            sup = sup.max(nl.alpha(x).norm());
        }
        for &k in &mesh.triangles[t] {
            sup = sup.max(nl.alpha(mesh.nodes[k]).norm());
        }
    }
    MaterialNorms {
        eps_minus_one_l2: l2.sqrt(),
        alpha_sup: sup,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Tolerance on the relative algebraic residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Damping theta in (0, 1].
    pub damping: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
            seed: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= 1e-14) || !self.tol.is_finite() {
            return Err(Error::Config {
                key: "solver.tol".into(),
                message: format!("must be a finite number >= 1e-14, got {}", self.tol),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::Config {
                key: "solver.max_iter".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config {
                key: "solver.damping".into(),
                message: format!("must lie in (0, 1], got {}", self.damping),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Vec<Complex64>,
    /// Relative residual ||S u^k - F(u^k)|| / ||F(u^k)|| after each iteration.
    pub residual_history: Vec<f64>,
    /// ||u^{k+1} - u^k|| / ||u^k - u^{k-1}|| in the wavenumber energy norm.
    pub contraction_estimates: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Damping in effect when the iteration stopped.
    pub damping: f64,
}

impl Solution {
    /// Largest contraction estimate, ignoring steps at round-off level.
    pub fn max_contraction(&self) -> Option<f64> {
        self.contraction_estimates
            .iter()
            .copied()
            .filter(|c| c.is_finite())
            .reduce(f64::max)
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// F_N(u) = l^inc + l^contr(u) + l^src(u).
pub fn fixed_point_rhs(
    sys: &AssembledSystem,
    mesh: &Mesh2D,
    nl: &Nonlinearity,
    l_inc: &[Complex64],
    u: &[Complex64],
) -> Result<Vec<Complex64>> {
    let mut f = assembly::nonlinear_rhs(u, nl, &sys.ctx, mesh, sys.linear_part)?;
    for (a, b) in f.iter_mut().zip(l_inc) {
        *a += b;
    }
    Ok(f)
}

/// Relative algebraic residual ||S u - F(u)|| / ||F(u)||.
pub fn relative_residual(sys: &AssembledSystem, u: &[Complex64], f: &[Complex64]) -> f64 {
    let su = sys.apply(u);
    let r: Vec<Complex64> = su.iter().zip(f).map(|(a, b)| a - b).collect();
    let nf = norm2(f);
    if nf == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nf
    }
}

const GROWTH_STEPS: usize = 5;
const MIN_DAMPING: f64 = 0.125;

/// Picard iteration u^{k+1} = (1 - theta) u^k + theta S^{-1} F(u^k) from
/// u^0 = S^{-1} l^inc.
///
/// `sys` must have been assembled with the same material law when its
/// linear part sits in the operator. If the residual grows for five
/// consecutive steps the damping is halved (down to 1/8) and the iteration
/// restarts from u^0; beyond that a divergence error is returned.
pub fn solve_fixed_point(
    sys: &AssembledSystem,
    mesh: &Mesh2D,
    nl: &Nonlinearity,
    inc: &IncidentField,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let l_inc = assembly::incident_functionals(inc, &sys.ctx, mesh)?;
    let u0 = sys.solve(&l_inc);
    let mut theta = cfg.damping;
    let mut history = Vec::new();
    let mut contraction = Vec::new();

    'restart: loop {
        let mut u = u0.clone();
        let mut f = fixed_point_rhs(sys, mesh, nl, &l_inc, &u)?;
        let mut prev_step: Option<f64> = None;
        let mut growth = 0;
        let mut last_res = f64::INFINITY;
        for k in 1..=cfg.max_iter {
            let v = sys.solve(&f);
            let next: Vec<Complex64> = u
                .iter()
                .zip(&v)
                .map(|(a, b)| a * (1.0 - theta) + b * theta)
                .collect();
            if next.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
                return Err(Error::Diverged {
                    iterations: history.len(),
                    last_contraction: contraction.last().copied().unwrap_or(f64::NAN),
                    damping: theta,
                });
            }
            let diff: Vec<Complex64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            let step = sys.energy_norm_sq(&diff).max(0.0).sqrt();
            let scale = sys.energy_norm_sq(&next).max(0.0).sqrt();
            if let Some(p) = prev_step {
                if p > 1e-14 * scale {
                    contraction.push(step / p);
                }
            }
            prev_step = Some(step);
            u = next;
            // An overflowing iterate makes the law non-finite; that is a
            // divergence of the iteration, not a defect of the law.
            f = match fixed_point_rhs(sys, mesh, nl, &l_inc, &u) {
                Ok(f) => f,
                Err(Error::NonFinite { .. }) if theta / 2.0 >= MIN_DAMPING => {
                    theta /= 2.0;
                    continue 'restart;
                }
                Err(Error::NonFinite { .. }) => {
                    return Err(Error::Diverged {
                        iterations: history.len(),
                        last_contraction: contraction.last().copied().unwrap_or(f64::NAN),
                        damping: theta,
                    })
                }
                Err(e) => return Err(e),
            };
            let res = relative_residual(sys, &u, &f);
            history.push(res);
            if res <= cfg.tol {
                return Ok(Solution {
                    u,
                    residual_history: history,
                    contraction_estimates: contraction,
                    converged: true,
                    iterations: k,
                    damping: theta,
                });
            }
            growth = if res > last_res { growth + 1 } else { 0 };
            last_res = res;
            if growth >= GROWTH_STEPS {
                if theta / 2.0 >= MIN_DAMPING {
                    theta /= 2.0;
                    continue 'restart;
                }
                return Err(Error::Diverged {
                    iterations: history.len(),
                    last_contraction: contraction.last().copied().unwrap_or(f64::NAN),
                    damping: theta,
                });
            }
            if k == cfg.max_iter {
                return Ok(Solution {
                    u,
                    residual_history: history,
                    contraction_estimates: contraction,
                    converged: false,
                    iterations: k,
                    damping: theta,
                });
            }
        }
        unreachable!("loop returns at max_iter");
    }
}

/// Optional analytic constants for the sufficient-condition check.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConditionConstants {
    /// Embedding constant of V into L_4(Omega).
    pub c_emb: Option<f64>,
    /// Trace constant.
    pub c_tr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// First condition: lhs <= rho * beta.
    pub first: Verdict,
    pub first_lhs: Option<f64>,
    /// rho * beta - lhs.
    pub first_margin: Option<f64>,
    /// Second condition: L_F < beta.
    pub second: Verdict,
    pub lipschitz_bound: Option<f64>,
    /// beta - L_F.
    pub second_margin: Option<f64>,
    /// Largest ||alpha||_inf for which both conditions hold with the other data fixed.
    pub critical_alpha: Option<f64>,
    /// ||r . grad u^inc - T_N u^inc||_{-1/2, S_R}.
    pub incident_defect: f64,
    pub note: String,
}

/// Dual norm of the incident boundary defect r . grad u^inc - T_{kappa,N} u^inc.
pub fn incident_defect_norm(inc: &IncidentField, ctx: &WaveContext) -> Result<f64> {
    let m = inc.modes_needed(ctx);
    let (dir, rad) = inc.boundary_coefficients(ctx, m)?;
    let z = specfun::Limits::default().dtn_symbols(2, ctx.order, ctx.xi())?;
    let mut g = rad;
    for n in -(ctx.order as i64)..=ctx.order as i64 {
        let k = g.index(n, 0).expect("in range");
        g.coeffs[k] -= z[n.unsigned_abs() as usize].value * dir.coeffs[k] / ctx.radius;
    }
    Ok(boundary::dual_half_norm(&g))
}

/// Evaluates the Kerr-type sufficient conditions for existence and
/// uniqueness of a fixed point in the ball of radius rho:
///
/// kappa^2 [||eps^L - 1|| + C_emb ||alpha|| rho^2] rho + C_tr ||g||_{-1/2} <= rho beta,
/// kappa^2 [||eps^L - 1|| + 3 C_emb ||alpha|| rho^2] = L_F < beta.
///
/// Purely advisory. A missing constant makes the verdict indeterminate
/// unless the term it multiplies vanishes.
pub fn check_sufficient_conditions(
    norms: &MaterialNorms,
    incident_defect: f64,
    kappa: f64,
    rho: f64,
    beta: f64,
    constants: &ConditionConstants,
) -> Result<ConditionReport> {
    if !(rho > 0.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "rho and beta must be positive, got rho = {rho}, beta = {beta}"
        )));
    }
    let k2 = kappa * kappa;
    let e = norms.eps_minus_one_l2;
    let a = norms.alpha_sup;
    let emb_term = match (a == 0.0, constants.c_emb) {
        (true, _) => Some(0.0),
        (false, Some(c)) => Some(c * a),
        (false, None) => None,
    };
    let tr_term = match (incident_defect == 0.0, constants.c_tr) {
        (true, _) => Some(0.0),
        (false, Some(c)) => Some(c * incident_defect),
        (false, None) => None,
    };
    let first_lhs = match (emb_term, tr_term) {
        (Some(em), Some(tr)) => Some(k2 * (e + em * rho * rho) * rho + tr),
        _ => None,
    };
    let lipschitz_bound = emb_term.map(|em| k2 * (e + 3.0 * em * rho * rho));
    let first_margin = first_lhs.map(|l| rho * beta - l);
    let second_margin = lipschitz_bound.map(|l| beta - l);
    let verdict = |m: Option<f64>, strict: bool| match m {
        None => Verdict::Indeterminate,
        Some(m) if m > 0.0 || (!strict && m == 0.0) => Verdict::Satisfied,
        Some(_) => Verdict::Violated,
    };
    let critical_alpha = match (constants.c_emb, tr_term) {
        (Some(c), Some(tr)) if c > 0.0 => {
            let a1 = (rho * beta - k2 * e * rho - tr) / (k2 * c * rho.powi(3));
            let a2 = (beta - k2 * e) / (3.0 * k2 * c * rho * rho);
            Some(a1.min(a2))
        }
        _ => None,
    };
    let mut note = String::from("sufficient conditions only; the iteration may converge when they fail");
    if first_lhs.is_none() || lipschitz_bound.is_none() {
        note.push_str("; indeterminate: a required constant (C_emb or C_tr) was not supplied");
    }
    Ok(ConditionReport {
        first: verdict(first_margin, false),
        first_lhs,
        first_margin,
        second: verdict(second_margin, true),
        lipschitz_bound,
        second_margin,
        critical_alpha,
        incident_defect,
        note,
    })
}

/// beta_{N*} = min(1, kappa) beta / (4 max(1, kappa)), the reporting formula
/// linking the inf-sup constants of the full and truncated problems.
pub fn truncated_infsup_formula(beta: f64, kappa: f64) -> f64 {
    kappa.min(1.0) * beta / (4.0 * kappa.max(1.0))
}

pub const INFSUP_MAX_DOFS: usize = 20_000;

/// Discrete inf-sup constant of a_N in the wavenumber energy norm:
/// min over w of sup over v of |v^H S w| / (||w||_{V,kappa} ||v||_{V,kappa}).
///
/// Computed as 1/sqrt(mu) with mu the largest eigenvalue of S^{-1} G S^{-H} G,
/// G = K + kappa^2 M, by power iteration in the G inner product.
pub fn estimate_infsup(sys: &AssembledSystem, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    if sys.ndofs > INFSUP_MAX_DOFS {
        return Err(Error::Capability(format!(
            "inf-sup estimation is limited to {INFSUP_MAX_DOFS} unknowns, system has {}",
            sys.ndofs
        )));
    }
    let k2 = sys.ctx.kappa.powi(2);
    let gram = |v: &[Complex64]| -> Vec<Complex64> {
        let a = sys.stiffness.matvec(v);
        let b = sys.mass.matvec(v);
        a.iter().zip(&b).map(|(x, y)| x + y * k2).collect()
    };
    let gdot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        gram(b).iter().zip(a).map(|(gb, a)| a.conj() * gb).sum()
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<Complex64> = (0..sys.ndofs)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut mu = 0.0;
    for _ in 0..500 {
        let nw = gdot(&w, &w).re.sqrt();
        for x in w.iter_mut() {
            *x /= nw;
        }
        let y = sys.solve(&gram(&sys.solve_adjoint(&gram(&w))));
        let new_mu = gdot(&w, &y).re;
        w = y;
        if (new_mu - mu).abs() <= 1e-10 * new_mu {
            mu = new_mu;
            break;
        }
        mu = new_mu;
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Singular {
            condition_estimate: f64::INFINITY,
        });
    }
    Ok(1.0 / mu.sqrt())
}

/// Im sum_n Z_n(kappa R) |t_n|^2: outgoing flux of the radiating field with
/// Dirichlet data t through S_R.
pub fn trace_flux(t: &FourierTrace, ctx: &WaveContext) -> Result<f64> {
    let z = boundary::symbols_for(t, ctx.kappa)?;
    let scale = if t.dim == 2 { 1.0 } else { t.radius };
    Ok(scale
        * t.coeffs
            .iter()
            .zip(&z)
            .map(|(c, z)| z.im * c.norm_sqr())
            .sum::<f64>())
}

/// Flux Im sum_n Z_n |u_n - u^inc_n|^2 of the scattered part of a discrete
/// solution through S_R, over |n| <= N.
pub fn boundary_flux(u: &[Complex64], sys: &AssembledSystem, inc: Option<&IncidentField>) -> Result<f64> {
    let mut t = sys.trace(u);
    if let Some(inc) = inc {
        let (dir, _) = inc.boundary_coefficients(&sys.ctx, sys.ctx.order)?;
        for (a, b) in t.coeffs.iter_mut().zip(&dir.coeffs) {
            *a -= b;
        }
    }
    trace_flux(&t, &sys.ctx)
}
