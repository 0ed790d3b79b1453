//! Analytic oracle for a penetrable disk and convergence studies in the
//! truncation order and the mesh size.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assembly::{self, IncidentField, QUAD6};
use crate::boundary::{self, FourierTrace};
use crate::error::{Error, Result};
use crate::mesh::Mesh2D;
use crate::solver::{self, Field, LinearPart, Nonlinearity, SolverConfig};
use crate::specfun;
use crate::WaveContext;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// J_0(z), ..., J_nmax(z) for complex z by Miller's backward recurrence,
/// normalized with J_0 + 2 sum_k J_2k = 1.
pub fn bessel_j_complex(z: Complex64, nmax: usize) -> Vec<Complex64> {
    let az = z.norm();
    if az < 1e-12 {
        let mut out = vec![ZERO; nmax + 1];
        out[0] = Complex64::new(1.0, 0.0);
        if nmax >= 1 {
            out[1] = z / 2.0;
        }
        return out;
    }
    let top = nmax.max(az.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let mut out = vec![ZERO; nmax + 1];
    let mut jp1 = ZERO;
    let mut j = Complex64::new(1e-30, 0.0);
    let mut norm = ZERO;
    for k in (1..=m).rev() {
        let jm1 = j * (2.0 * k as f64) / z - jp1;
        jp1 = j;
        j = jm1;
        let order = k - 1;
        if order <= nmax {
            out[order] = j;
        }
        if order % 2 == 0 && order > 0 {
            norm += j * 2.0;
        }
        if j.norm() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += j;
    // Divide in two steps so that tiny or huge normalizers do not under- or overflow.
    let scale = norm.norm();
    let unit = norm / scale;
    for v in out.iter_mut() {
        *v = (*v / scale) / unit;
    }
    out
}

/// Modes whose interior Bessel value is this small are outside the double
/// range for quotients and contribute nothing at the working precision.
fn below_range(j: Complex64) -> bool {
    !(j.norm() > 1e-250)
}

/// a / b with both scaled by |b| first, so tiny or huge denominators do not
/// under- or overflow in the intermediate |b|^2.
fn ratio(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.norm();
    (a / s) / (b / s)
}

/// Derivatives J_n'(z) from values J_0..J_nmax (needs nmax + 1 values for J_nmax').
fn bessel_j_derivatives(z: Complex64, j: &[Complex64], nmax: usize) -> Vec<Complex64> {
    (0..=nmax)
        .map(|n| {
            if n == 0 {
                -j[1]
            } else if z.norm() < 1e-12 {
                if n == 1 {
                    Complex64::new(0.5, 0.0)
                } else {
                    ZERO
                }
            } else {
                j[n - 1] - j[n] * (n as f64) / z
            }
        })
        .collect()
}

/// Exact scattering of a plane wave by a homogeneous disk of radius `a` and
/// refractive-index square `eps`, by separation of variables.
///
/// Exterior (r >= a): sum_n e^{in phi} [i_n J_|n|(kappa r) + beta_n H_|n|(kappa r)/H_|n|(kappa a)];
/// interior (r <= a): sum_n e^{in phi} A_n J_|n|(k1 r)/J_|n|(k1 a), with k1 = kappa sqrt(eps).
#[derive(Debug, Clone, PartialEq)]
pub struct DiskOracle {
    pub a: f64,
    pub eps: Complex64,
    pub amplitude: Complex64,
    pub angle: f64,
    pub kappa: f64,
    pub order: usize,
    /// Incident coefficients i_n, n = -order..=order.
    pub incident: Vec<Complex64>,
    /// Interior boundary values A_n.
    pub interior: Vec<Complex64>,
    /// Scattered boundary values beta_n.
    pub scattered: Vec<Complex64>,
    k1: Complex64,
    jk1a: Vec<Complex64>,
}

impl DiskOracle {
    /// Builds the oracle with N_oracle = ceil(kappa r_max) + 40 modes and
    /// checks that the last mode is below 1e-12 on |x| <= r_max.
    pub fn new(a: f64, eps: Complex64, amplitude: Complex64, angle: f64, kappa: f64, r_max: f64) -> Result<Self> {
        if !(a > 0.0) || !(kappa > 0.0) || !(r_max >= a) {
            return Err(Error::Domain(format!(
                "need a > 0, kappa > 0, r_max >= a (a = {a}, kappa = {kappa}, r_max = {r_max})"
            )));
        }
        if eps.im < 0.0 {
            return Err(Error::Domain(format!("Im eps must be nonnegative, got {eps}")));
        }
        let order = (kappa * r_max).ceil() as usize + 40;
        let k1 = kappa * eps.sqrt();
        let ka = kappa * a;
        let jk1a = bessel_j_complex(k1 * a, order + 1);
        let djk1a = bessel_j_derivatives(k1 * a, &jk1a, order);
        let z = specfun::Limits::default().dtn_symbols(2, order, ka)?;
        let mut incident = Vec::new();
        let mut interior = Vec::new();
        let mut scattered = Vec::new();
        for n in -(order as i64)..=order as i64 {
            let na = n.unsigned_abs() as usize;
            let sign = if n > 0 && na % 2 == 1 { -1.0 } else { 1.0 };
            let i_n = amplitude * Complex64::from_polar(sign, -(n as f64) * angle);
            let (j, _, jp, _) = specfun::bessel_jy(ka, na as f64)?;
            if below_range(jk1a[na]) {
                // Mode is below the floating-point range at this radius.
                incident.push(i_n);
                interior.push(ZERO);
                scattered.push(ZERO);
                continue;
            }
            let q = k1 * a * ratio(djk1a[na], jk1a[na]);
            let den = q - z[na].value;
            if den.norm() == 0.0 || !den.re.is_finite() {
                return Err(Error::Domain(format!("mode {n} has a singular matching system")));
            }
            let beta = -i_n * (q * j - ka * jp) / den;
            incident.push(i_n);
            interior.push(i_n * j + beta);
            scattered.push(beta);
        }
        let oracle = DiskOracle {
            a,
            eps,
            amplitude,
            angle,
            kappa,
            order,
            incident,
            interior,
            scattered,
            k1,
            jk1a,
        };
        // Tail check on the largest circle of interest.
        let tail = oracle.mode_magnitude(order, r_max)?;
        let scale = amplitude.norm().max(f64::MIN_POSITIVE);
        if !(tail < 1e-12 * scale) {
            return Err(Error::Domain(format!(
                "oracle series tail {tail:e} at order {order} does not fall below 1e-12"
            )));
        }
        Ok(oracle)
    }

    fn idx(&self, n: i64) -> usize {
        (n + self.order as i64) as usize
    }

    /// Largest of |incident|, |scattered|, |interior| radial parts of mode +-n at radius r.
    fn mode_magnitude(&self, n: usize, r: f64) -> Result<f64> {
        let (radial, _) = self.radial(r)?;
        let p = radial[self.idx(n as i64)].norm();
        let m = radial[self.idx(-(n as i64))].norm();
        Ok(p.max(m))
    }

    /// Radial functions R_n(r) and R_n'(r) for all modes.
    pub fn radial(&self, r: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let nm = self.order;
        let mut val = Vec::with_capacity(2 * nm + 1);
        let mut der = Vec::with_capacity(2 * nm + 1);
        if r <= self.a {
            let z = self.k1 * r;
            let j = bessel_j_complex(z, nm + 1);
            let dj = bessel_j_derivatives(z, &j, nm);
            for n in -(nm as i64)..=nm as i64 {
                let na = n.unsigned_abs() as usize;
                let k = self.idx(n);
                if below_range(self.jk1a[na]) {
                    val.push(ZERO);
                    der.push(ZERO);
                    continue;
                }
                let c = self.interior[k];
                val.push(c * ratio(j[na], self.jk1a[na]));
                der.push(c * self.k1 * ratio(dj[na], self.jk1a[na]));
            }
        } else {
            let kr = self.kappa * r;
            let j = bessel_j_complex(Complex64::new(kr, 0.0), nm + 1);
            let dj = bessel_j_derivatives(Complex64::new(kr, 0.0), &j, nm);
            let ratio = specfun::hankel_ratios(2, nm, kr, self.kappa * self.a)?;
            let z = specfun::Limits::default().dtn_symbols(2, nm, kr)?;
            for n in -(nm as i64)..=nm as i64 {
                let na = n.unsigned_abs() as usize;
                let k = self.idx(n);
                let h = ratio[na];
                let dh = h * z[na].value / r;
                val.push(self.incident[k] * j[na] + self.scattered[k] * h);
                der.push(self.incident[k] * self.kappa * dj[na] + self.scattered[k] * dh);
            }
        }
        Ok((val, der))
    }

    /// Total field at a point.
    pub fn disk_exact(&self, x: [f64; 2]) -> Result<Complex64> {
        Ok(self.value_and_gradient(x)?.0)
    }

    /// Total field and its Cartesian gradient at a point.
    pub fn value_and_gradient(&self, x: [f64; 2]) -> Result<(Complex64, [Complex64; 2])> {
        let r = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        let (val, der) = self.radial(r.max(1e-14))?;
        let mut u = ZERO;
        let mut ur = ZERO;
        let mut uphi_over_r = ZERO;
        for (k, n) in (-(self.order as i64)..=self.order as i64).enumerate() {
            let e = Complex64::from_polar(1.0, n as f64 * phi);
            u += val[k] * e;
            ur += der[k] * e;
            uphi_over_r += val[k] * e * Complex64::new(0.0, n as f64) / r.max(1e-14);
        }
        let (c, s) = (phi.cos(), phi.sin());
        Ok((u, [ur * c - uphi_over_r * s, ur * s + uphi_over_r * c]))
    }

    /// Scattered field only (valid for r >= a).
    pub fn scattered_field(&self, x: [f64; 2]) -> Result<Complex64> {
        let r = x[0].hypot(x[1]);
        if r < self.a {
            return Err(Error::Domain("scattered field is evaluated outside the disk only".into()));
        }
        let phi = x[1].atan2(x[0]);
        let ratio = specfun::hankel_ratios(2, self.order, self.kappa * r, self.kappa * self.a)?;
        Ok((-(self.order as i64)..=self.order as i64)
            .enumerate()
            .map(|(k, n)| self.scattered[k] * ratio[n.unsigned_abs() as usize] * Complex64::from_polar(1.0, n as f64 * phi))
            .sum())
    }

    /// Harmonic coefficients (in the Y_n basis) of the scattered and incident
    /// parts on the circle of radius r >= a, and of their radial derivatives.
    pub fn traces(&self, r: f64) -> Result<[FourierTrace; 4]> {
        if r < self.a {
            return Err(Error::Domain("traces are taken outside the disk only".into()));
        }
        let nm = self.order;
        let kr = self.kappa * r;
        let j = bessel_j_complex(Complex64::new(kr, 0.0), nm + 1);
        let dj = bessel_j_derivatives(Complex64::new(kr, 0.0), &j, nm);
        let ratio = specfun::hankel_ratios(2, nm, kr, self.kappa * self.a)?;
        let z = specfun::Limits::default().dtn_symbols(2, nm, kr)?;
        let s = (2.0 * PI).sqrt();
        let mut out: [Vec<Complex64>; 4] = Default::default();
        for n in -(nm as i64)..=nm as i64 {
            let na = n.unsigned_abs() as usize;
            let k = self.idx(n);
            out[0].push(self.scattered[k] * ratio[na] * s);
            out[1].push(self.scattered[k] * ratio[na] * z[na].value / r * s);
            out[2].push(self.incident[k] * j[na] * s);
            out[3].push(self.incident[k] * self.kappa * dj[na] * s);
        }
        let mk = |c: Vec<Complex64>| FourierTrace::from_coeffs(2, r, nm, c);
        let [a, b, c, d] = out;
        Ok([mk(a)?, mk(b)?, mk(c)?, mk(d)?])
    }

    /// Largest mismatch of value and radial derivative across r = a over all modes,
    /// relative to the incident amplitude.
    pub fn interface_mismatch(&self) -> Result<f64> {
        let inner = {
            let z = self.k1 * self.a;
            let j = bessel_j_complex(z, self.order + 1);
            let dj = bessel_j_derivatives(z, &j, self.order);
            (j, dj)
        };
        let (outer_val, outer_der) = self.radial(self.a * (1.0 + 1e-15) + f64::MIN_POSITIVE)?;
        let mut worst: f64 = 0.0;
        for n in -(self.order as i64)..=self.order as i64 {
            let na = n.unsigned_abs() as usize;
            let k = self.idx(n);
            if below_range(self.jk1a[na]) {
                continue;
            }
            let c = self.interior[k];
            let v_in = c * ratio(inner.0[na], self.jk1a[na]);
            let d_in = c * self.k1 * ratio(inner.1[na], self.jk1a[na]);
            let scale = self.amplitude.norm().max(1e-300);
            worst = worst
                .max((v_in - outer_val[k]).norm() / scale)
                .max((d_in - outer_der[k]).norm() / (scale * self.kappa));
        }
        Ok(worst)
    }
}

/// Energy balance on S_R for the oracle: returns (flux of the scattered
/// field, minus the incident-scattered cross flux). For lossless media the
/// two agree.
pub fn flux_balance(oracle: &DiskOracle, radius: f64) -> Result<(f64, f64)> {
    let [s, ds, i, di] = oracle.traces(radius)?;
    let pair = |u: &FourierTrace, v: &FourierTrace| -> Complex64 {
        u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a.conj() * b).sum::<Complex64>() * radius
    };
    let scattered = pair(&s, &ds).im;
    let cross = (pair(&i, &ds) + pair(&s, &di)).im;
    Ok((scattered, -cross))
}

/// Configuration of a single solve used by the sweeps.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh2D,
    pub kappa: f64,
    pub nl: Nonlinearity,
    pub inc: IncidentField,
    pub solver: SolverConfig,
    pub linear_part: LinearPart,
}

impl Problem {
    pub fn context(&self, order: usize) -> Result<WaveContext> {
        WaveContext::new(2, self.kappa, self.mesh.radius, order)
    }

    /// Assembles and solves at truncation order N.
    pub fn solve(&self, order: usize) -> Result<(assembly::AssembledSystem, solver::Solution)> {
        let ctx = self.context(order)?;
        let sys = assembly::assemble(&self.mesh, &ctx, &self.nl, self.linear_part)?;
        let sol = solver::solve_fixed_point(&sys, &self.mesh, &self.nl, &self.inc, &self.solver)?;
        Ok((sys, sol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NRow {
    pub order: usize,
    /// ||u_N - u_ref||_{V,kappa}.
    pub error: f64,
    /// error / ||u_ref||_{V,kappa}.
    pub relative: f64,
}

/// Error of the discrete solution in the truncation order against the
/// solution at N_ref = 2 max(N_list), in the discrete energy norm.
pub fn convergence_in_n(problem: &Problem, n_list: &[usize]) -> Result<(usize, Vec<NRow>)> {
    let n_max = *n_list
        .iter()
        .max()
        .ok_or_else(|| Error::Domain("empty list of truncation orders".into()))?;
    let n_ref = 2 * n_max;
    let wrap = |order: usize| move |e: Error| Error::Sweep {
        order,
        source: Box::new(e),
    };
    let (sys_ref, sol_ref) = problem.solve(n_ref).map_err(wrap(n_ref))?;
    let ref_norm = sys_ref.energy_norm_sq(&sol_ref.u).sqrt();
    let mut rows = Vec::new();
    for &order in n_list {
        let (_, sol) = problem.solve(order).map_err(wrap(order))?;
        let d: Vec<Complex64> = sol.u.iter().zip(&sol_ref.u).map(|(a, b)| a - b).collect();
        let error = sys_ref.energy_norm_sq(&d).max(0.0).sqrt();
        rows.push(NRow {
            order,
            error,
            relative: if ref_norm > 0.0 { error / ref_norm } else { error },
        });
    }
    Ok((n_ref, rows))
}

/// ||(T_{kappa,N_ref} - T_{kappa,N}) w||_{-1/2,S_R} for each N, where N_ref is
/// the order of `w`. Vanishes exactly once N reaches the bandwidth of w.
pub fn truncation_sweep_trace(w: &FourierTrace, ctx: &WaveContext, n_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    let full = boundary::apply_truncated_dtn(w, &ctx.with_order(w.order))?;
    n_list
        .iter()
        .map(|&order| {
            let cut = boundary::project_pn(&full, order.min(w.order))?;
            let mut diff = full.clone();
            for (d, c) in diff.coeffs.iter_mut().zip(&cut.coeffs) {
                *d -= c;
            }
            Ok((order, boundary::dual_half_norm(&diff)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HRow {
    pub h: f64,
    pub h_max: f64,
    pub dofs: usize,
    pub rel_l2: f64,
    pub rel_energy: f64,
}

/// Relative L2 and H1-seminorm errors of u_h - u on a mesh, by the degree-4
/// quadrature against the oracle and its gradient.
pub fn oracle_errors(mesh: &Mesh2D, u: &[Complex64], oracle: &DiskOracle) -> Result<(f64, f64)> {
    let (mut e0, mut n0, mut e1, mut n1) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let (g, area) = assembly::p1_gradients(mesh, t);
        let tri = mesh.triangles[t];
        let grad_h = [
            u[tri[0]] * g[0][0] + u[tri[1]] * g[1][0] + u[tri[2]] * g[2][0],
            u[tri[0]] * g[0][1] + u[tri[1]] * g[1][1] + u[tri[2]] * g[2][1],
        ];
        let vals = assembly::values_at_quadrature(mesh, u, t);
        for (q, (lam, w)) in QUAD6.iter().enumerate() {
            let x = assembly::map_point(mesh, t, *lam);
            let (ue, ge) = oracle.value_and_gradient(x)?;
            let wa = w * area;
            e0 += wa * (vals[q] - ue).norm_sqr();
            n0 += wa * ue.norm_sqr();
            e1 += wa * ((grad_h[0] - ge[0]).norm_sqr() + (grad_h[1] - ge[1]).norm_sqr());
            n1 += wa * (ge[0].norm_sqr() + ge[1].norm_sqr());
        }
    }
    Ok(((e0 / n0).sqrt(), (e1 / n1).sqrt()))
}

/// FEM + truncated DtN against the disk oracle on a sequence of meshes.
pub fn fem_vs_oracle(meshes: &[(f64, Mesh2D)], oracle: &DiskOracle, ctx: &WaveContext) -> Result<Vec<HRow>> {
    let nl = Nonlinearity::linear(Field::Constant(oracle.eps));
    let inc = IncidentField::plane_wave(oracle.amplitude, oracle.angle)?;
    let cfg = SolverConfig::default();
    meshes
        .iter()
        .map(|(h, mesh)| {
            let sys = assembly::assemble(mesh, ctx, &nl, LinearPart::Operator)?;
            let sol = solver::solve_fixed_point(&sys, mesh, &nl, &inc, &cfg)?;
            let (rel_l2, rel_energy) = oracle_errors(mesh, &sol.u, oracle)?;
            Ok(HRow {
                h: *h,
                h_max: mesh.h_max(),
                dofs: sys.ndofs,
                rel_l2,
                rel_energy,
            })
        })
        .collect()
}

/// log(e1/e2)/log(h1/h2) for the last two rows.
pub fn last_slope(rows: &[HRow], energy: bool) -> Option<f64> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let (a, b) = (rows[n - 2], rows[n - 1]);
    let (ea, eb) = if energy {
        (a.rel_energy, b.rel_energy)
    } else {
        (a.rel_l2, b.rel_l2)
    };
    Some((ea / eb).ln() / (a.h / b.h).ln())
}

/// One line of a verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl CheckRow {
    fn at_most(suite: &'static str, name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckRow {
            suite,
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn within(suite: &'static str, name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        CheckRow {
            suite,
            name: name.into(),
            value,
            limit: hi,
            passed: value >= lo && value <= hi,
        }
    }
}

/// Writes rows as `suite,check,value,limit,result` lines.
pub fn write_check_csv(rows: &[CheckRow], header: &[String], out: &mut impl std::io::Write) -> Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    writeln!(out, "suite,check,value,limit,result")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6e},{:.6e},{}",
            r.suite,
            r.name,
            r.value,
            r.limit,
            if r.passed { "pass" } else { "fail" }
        )?;
    }
    Ok(())
}

/// Band and bound checks of the DtN symbols for d = 2, 3 on a 50-point
/// logarithmic grid of xi in [0.1, 50] and orders up to 200. One row per
/// (dim, xi) with the number of violations as the value.
pub fn symbol_band_suite() -> Result<Vec<CheckRow>> {
    let lim = specfun::Limits::default();
    let mut rows = Vec::new();
    for dim in [2u8, 3] {
        for k in 0..50 {
            let xi = 0.1 * (500.0f64).powf(k as f64 / 49.0);
            let syms = lim.dtn_symbols(dim, 200, xi)?;
            let bad: Vec<String> = syms.iter().filter_map(|s| s.band_violation(1e-12)).collect();
            let mut row = CheckRow::at_most("specfun", format!("bands d={dim} xi={xi:.6}"), bad.len() as f64, 0.0);
            if let Some(first) = bad.first() {
                row.name = format!("{} ({first})", row.name).replace(',', ";");
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Meshes used by the Garding suite.
pub fn garding_meshes() -> Result<Vec<Mesh2D>> {
    let square = crate::mesh::Obstacle::Polygon {
        vertices: vec![[0.4, -0.4], [0.4, 0.4], [-0.4, 0.4], [-0.4, -0.4]],
    };
    Ok(vec![
        crate::mesh::mesh_disk(1.0, &crate::mesh::Obstacle::Disk { radius: 0.5 }, 0.1)?,
        crate::mesh::mesh_disk(1.0, &square, 0.1)?,
        crate::mesh::mesh_disk(1.0, &crate::mesh::Obstacle::Disk { radius: 0.3 }, 0.07)?,
    ])
}

/// Re a_N(v, v) >= ||v||_{V,kappa}^2 - 2 kappa^2 ||v||_0^2 for random discrete
/// v, on 3 meshes, kappa in {1, 2, 5} and N in {kappa R + 2, 2 kappa R}.
/// Each row carries the worst normalized defect of `per_case` vectors.
pub fn garding_suite(seed: u64, per_case: usize) -> Result<Vec<CheckRow>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for (mi, mesh) in garding_meshes()?.iter().enumerate() {
        for kappa in [1.0, 2.0, 5.0] {
            let xi = kappa * mesh.radius;
            for order in [xi.ceil() as usize + 2, (2.0 * xi).ceil() as usize] {
                let ctx = WaveContext::new(2, kappa, mesh.radius, order)?;
                let sys = assembly::assemble_linear(mesh, &ctx)?;
                let mut worst = f64::NEG_INFINITY;
                for _ in 0..per_case {
                    let v: Vec<Complex64> = (0..sys.ndofs)
                        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .collect();
                    let energy = sys.energy_norm_sq(&v);
                    let lower = energy - 2.0 * kappa * kappa * sys.l2_norm_sq(&v);
                    let defect = (lower - sys.form(&v).re) / energy;
                    worst = worst.max(defect);
                }
                rows.push(CheckRow::at_most(
                    "garding",
                    format!("mesh={mi} kappa={kappa} N={order}"),
                    worst,
                    1e-10,
                ));
            }
        }
    }
    Ok(rows)
}

/// Linear oracle checks on the penetrable disk eps = 2.25, a = 0.5,
/// kappa = 2, R = 1, N = kappa R + 10.
pub fn oracle_suite() -> Result<Vec<CheckRow>> {
    let eps = Complex64::new(2.25, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let oracle = DiskOracle::new(0.5, eps, one, 0.0, 2.0, 1.5)?;
    let ctx = WaveContext::new(2, 2.0, 1.0, 12)?;
    let mut rows = vec![CheckRow::at_most(
        "oracle",
        "interface mismatch",
        oracle.interface_mismatch()?,
        1e-11,
    )];

    let scattered = oracle.traces(1.0)?[0].clone();
    let far_ctx = ctx.with_order(scattered.order);
    let mut worst: f64 = 0.0;
    for k in 0..16 {
        let phi = 2.0 * PI * k as f64 / 16.0;
        let x = [1.5 * phi.cos(), 1.5 * phi.sin()];
        let a = boundary::exterior_field(&scattered, &far_ctx, &x)?;
        let b = oracle.scattered_field(x)?;
        worst = worst.max((a - b).norm() / b.norm().max(1e-300));
    }
    rows.push(CheckRow::at_most("oracle", "exterior round trip at 1.5R", worst, 1e-9));

    let (flux, cross) = flux_balance(&oracle, 1.0)?;
    rows.push(CheckRow::at_most(
        "oracle",
        "flux balance",
        (flux - cross).abs() / flux.abs(),
        1e-6,
    ));

    let meshes = [0.1, 0.05]
        .iter()
        .map(|&h| Ok((h, crate::mesh::mesh_disk(1.0, &crate::mesh::Obstacle::Disk { radius: 0.5 }, h)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = fem_vs_oracle(&meshes, &oracle, &ctx)?;
    rows.push(CheckRow::at_most("oracle", "rel L2 error h=0.05", table[1].rel_l2, 0.02));
    rows.push(CheckRow::within(
        "oracle",
        "L2 slope",
        last_slope(&table, false).unwrap(),
        1.7,
        2.3,
    ));
    rows.push(CheckRow::within(
        "oracle",
        "V slope",
        last_slope(&table, true).unwrap(),
        0.8,
        1.2,
    ));
    Ok(rows)
}
