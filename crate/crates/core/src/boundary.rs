//! Spectral algebra of boundary traces on the circle or sphere S_R.
//!
//! Traces are stored as harmonic coefficients. Point values are a derived
//! view produced by [`synthesize_trace`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{self, circular_harmonic, HarmonicIndex};
use crate::WaveContext;

/// Boundary data on S_R given by its harmonic coefficients.
///
/// For dim 2 the coefficient of Y_n sits at index `n + N`; for dim 3 the
/// coefficient of Y_n^m sits at index `n^2 + n + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTrace {
    pub dim: u8,
    pub radius: f64,
    pub order: usize,
    pub coeffs: Vec<Complex64>,
}

pub fn trace_len(dim: u8, order: usize) -> usize {
    if dim == 2 {
        2 * order + 1
    } else {
        (order + 1) * (order + 1)
    }
}

impl FourierTrace {
    pub fn zeros(dim: u8, radius: f64, order: usize) -> Result<Self> {
        Self::from_coeffs(dim, radius, order, vec![Complex64::new(0.0, 0.0); trace_len(dim, order)])
    }

    pub fn from_coeffs(dim: u8, radius: f64, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if coeffs.len() != trace_len(dim, order) {
            return Err(Error::Domain(format!(
                "expected {} coefficients for order {order}, got {}",
                trace_len(dim, order),
                coeffs.len()
            )));
        }
        Ok(FourierTrace {
            dim,
            radius,
            order,
            coeffs,
        })
    }

    /// Storage position of harmonic (n, m), or None if outside the trace.
    pub fn index(&self, n: i64, m: i64) -> Option<usize> {
        let big_n = self.order as i64;
        if self.dim == 2 {
            (n.abs() <= big_n).then(|| (n + big_n) as usize)
        } else {
            (n >= 0 && n <= big_n && m.abs() <= n).then(|| (n * n + n + m) as usize)
        }
    }

    pub fn get(&self, n: i64, m: i64) -> Complex64 {
        self.index(n, m)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set(&mut self, n: i64, m: i64, value: Complex64) -> Result<()> {
        let i = self.index(n, m).ok_or_else(|| {
            Error::Domain(format!("harmonic ({n}, {m}) is outside a trace of order {}", self.order))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Harmonic indices in storage order.
    pub fn indices(&self) -> Vec<HarmonicIndex> {
        let big_n = self.order as i64;
        if self.dim == 2 {
            (-big_n..=big_n).map(HarmonicIndex::circular).collect()
        } else {
            let mut out = Vec::with_capacity(self.coeffs.len());
            for n in 0..=big_n {
                for m in -n..=n {
                    out.push(HarmonicIndex { dim: 3, n, m });
                }
            }
            out
        }
    }

    /// Degree |n| of each stored coefficient, in storage order.
    pub fn degrees(&self) -> Vec<usize> {
        self.indices().iter().map(|i| i.n.unsigned_abs() as usize).collect()
    }

    /// Same data embedded in (or cut down to) a trace of another order.
    pub fn resized(&self, order: usize) -> FourierTrace {
        let mut out = FourierTrace {
            dim: self.dim,
            radius: self.radius,
            order,
            coeffs: vec![Complex64::default(); trace_len(self.dim, order)],
        };
        for idx in self.indices() {
            if let Some(j) = out.index(idx.n, idx.m) {
                out.coeffs[j] = self.get(idx.n, idx.m);
            }
        }
        out
    }

    /// Measure of S_R relative to S_1 folded into the coefficient norm.
    fn surface_factor(&self) -> f64 {
        if self.dim == 2 {
            self.radius
        } else {
            self.radius * self.radius
        }
    }

    fn same_sphere(&self, other: &FourierTrace) -> Result<()> {
        if self.dim != other.dim || !same_radius(self.radius, other.radius) {
            return Err(Error::Mismatch(format!(
                "traces live on different spheres (dim {} R {} vs dim {} R {})",
                self.dim, self.radius, other.dim, other.radius
            )));
        }
        Ok(())
    }
}

fn same_radius(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Tensor grid for quadrature on S_1: Gauss-Legendre in cos(theta) and
/// equispaced in phi.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub cos_theta: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (cos_theta, weights) = specfun::gauss_legendre(n_theta);
        SphereGrid {
            cos_theta,
            weights,
            n_phi,
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// Unit direction of grid node (i, j).
    pub fn direction(&self, i: usize, j: usize) -> [f64; 3] {
        let ct = self.cos_theta[i];
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let phi = self.phi(j);
        [st * phi.cos(), st * phi.sin(), ct]
    }
}

/// Point samples of a function on S_R.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySamples {
    /// Values at phi_j = 2 pi j / M, j = 0..M.
    Circle { radius: f64, values: Vec<Complex64> },
    /// Values on a [`SphereGrid`], row-major in (theta, phi).
    Sphere {
        radius: f64,
        grid: SphereGrid,
        values: Vec<Complex64>,
    },
}

impl BoundarySamples {
    /// Samples `f` at `m` equispaced points of the circle of radius `radius`.
    pub fn circle(radius: f64, m: usize, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..m)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / m as f64;
                f([radius * phi.cos(), radius * phi.sin()])
            })
            .collect();
        BoundarySamples::Circle { radius, values }
    }

    /// Samples `f` on the tensor grid scaled to the sphere of radius `radius`.
    pub fn sphere(radius: f64, grid: SphereGrid, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.cos_theta.len() * grid.n_phi);
        for i in 0..grid.cos_theta.len() {
            for j in 0..grid.n_phi {
                let d = grid.direction(i, j);
                values.push(f([radius * d[0], radius * d[1], radius * d[2]]));
            }
        }
        BoundarySamples::Sphere {
            radius,
            grid,
            values,
        }
    }
}

/// Harmonic coefficients up to degree `order` from point samples.
///
/// Refuses sample sets that cannot resolve the requested degree: at least
/// 4N+4 angles on the circle; at least N+1 Gauss nodes and 2N+2 azimuths on
/// the sphere.
pub fn analyze_trace(samples: &BoundarySamples, order: usize) -> Result<FourierTrace> {
    match samples {
        BoundarySamples::Circle { radius, values } => {
            let m = values.len();
            let required = 4 * order + 4;
            if m < required {
                return Err(Error::Aliasing {
                    samples: m,
                    order,
                    required,
                });
            }
            let mut t = FourierTrace::zeros(2, *radius, order)?;
            let w = 2.0 * PI / m as f64;
            for (k, n) in (-(order as i64)..=order as i64).enumerate() {
                let mut acc = Complex64::default();
                for (j, v) in values.iter().enumerate() {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    acc += v * circular_harmonic(n, phi).conj();
                }
                t.coeffs[k] = acc * w;
            }
            Ok(t)
        }
        BoundarySamples::Sphere {
            radius,
            grid,
            values,
        } => {
            let nt = grid.cos_theta.len();
            if nt < order + 1 {
                return Err(Error::Aliasing {
                    samples: nt,
                    order,
                    required: order + 1,
                });
            }
            if grid.n_phi < 2 * order + 2 {
                return Err(Error::Aliasing {
                    samples: grid.n_phi,
                    order,
                    required: 2 * order + 2,
                });
            }
            if values.len() != nt * grid.n_phi {
                return Err(Error::Domain(format!(
                    "expected {} sphere samples, got {}",
                    nt * grid.n_phi,
                    values.len()
                )));
            }
            let mut t = FourierTrace::zeros(3, *radius, order)?;
            let wphi = 2.0 * PI / grid.n_phi as f64;
            for i in 0..nt {
                let p = specfun::legendre_normalized(order, grid.cos_theta[i]);
                // Azimuthal transform of this latitude ring.
                for m in -(order as i64)..=order as i64 {
                    let mut ring = Complex64::default();
                    for j in 0..grid.n_phi {
                        let phi = grid.phi(j);
                        ring += values[i * grid.n_phi + j] * Complex64::from_polar(1.0, -(m as f64) * phi);
                    }
                    ring *= wphi * grid.weights[i];
                    let ma = m.unsigned_abs() as usize;
                    for n in ma..=order {
                        let k = t.index(n as i64, m).expect("index in range");
                        t.coeffs[k] += ring * p[n * (n + 1) / 2 + ma];
                    }
                }
            }
            Ok(t)
        }
    }
}

/// Point value of the trace in the given unit direction.
pub fn synthesize_trace(t: &FourierTrace, direction: &[f64]) -> Result<Complex64> {
    let mut acc = Complex64::default();
    if t.dim == 2 {
        // Validates the direction.
        specfun::harmonic_eval(HarmonicIndex::circular(0), direction)?;
        let phi = direction[1].atan2(direction[0]);
        for (k, n) in (-(t.order as i64)..=t.order as i64).enumerate() {
            acc += t.coeffs[k] * circular_harmonic(n, phi);
        }
    } else {
        specfun::harmonic_eval(HarmonicIndex { dim: 3, n: 0, m: 0 }, direction)?;
        let ct = direction[2].clamp(-1.0, 1.0);
        let phi = direction[1].atan2(direction[0]);
        let p = specfun::legendre_normalized(t.order, ct);
        for n in 0..=t.order as i64 {
            for m in -n..=n {
                let ma = m.unsigned_abs() as usize;
                let y = Complex64::from_polar(p[(n * (n + 1) / 2) as usize + ma], m as f64 * phi);
                acc += t.get(n, m) * y;
            }
        }
    }
    Ok(acc)
}

/// The L2(S_R) inner product (w, v) = int_{S_R} w conj(v) ds.
pub fn l2_pairing(w: &FourierTrace, v: &FourierTrace) -> Result<Complex64> {
    w.same_sphere(v)?;
    let mut acc = Complex64::default();
    for idx in w.indices() {
        acc += w.get(idx.n, idx.m) * v.get(idx.n, idx.m).conj();
    }
    Ok(acc * w.surface_factor())
}

/// sum over stored coefficients of (1+n^2)^s |t_n|^2 restricted to |n| > from.
fn weighted_tail(t: &FourierTrace, s: f64, from: Option<usize>) -> f64 {
    t.degrees()
        .iter()
        .zip(&t.coeffs)
        .filter(|(n, _)| from.is_none_or(|f| **n > f))
        .map(|(n, c)| (1.0 + (*n as f64).powi(2)).powf(s) * c.norm_sqr())
        .sum()
}

/// Spectral Sobolev norm of index `s` in [0, 2].
pub fn sobolev_norm(t: &FourierTrace, s: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::Capability(format!(
            "Sobolev index {s} outside the supported range [0, 2]"
        )));
    }
    Ok((t.surface_factor() * weighted_tail(t, s, None)).sqrt())
}

/// Norm of g as a functional on H^{1/2}(S_R) with respect to the L2 pairing.
pub(crate) fn dual_half_norm(g: &FourierTrace) -> f64 {
    (g.surface_factor() * weighted_tail(g, -0.5, None)).sqrt()
}

fn check_context(t: &FourierTrace, ctx: &WaveContext) -> Result<()> {
    if t.dim != ctx.dim || !same_radius(t.radius, ctx.radius) {
        return Err(Error::Mismatch(format!(
            "trace (dim {}, R {}) does not match context (dim {}, R {})",
            t.dim, t.radius, ctx.dim, ctx.radius
        )));
    }
    Ok(())
}

/// Symbol value for each stored coefficient, in storage order.
pub fn symbols_for(t: &FourierTrace, kappa: f64) -> Result<Vec<Complex64>> {
    let z = specfun::Limits::default().dtn_symbols(t.dim, t.order, kappa * t.radius)?;
    Ok(t.degrees().iter().map(|&n| z[n].value).collect())
}

/// Truncated DtN operator T_{kappa,N}: multiplies coefficient n by Z_n(kappa R)/R.
pub fn apply_truncated_dtn(t: &FourierTrace, ctx: &WaveContext) -> Result<FourierTrace> {
    check_context(t, ctx)?;
    if t.order > ctx.order {
        return Err(Error::Mismatch(format!(
            "trace order {} exceeds the truncation order {}",
            t.order, ctx.order
        )));
    }
    let z = symbols_for(t, ctx.kappa)?;
    let coeffs = t
        .coeffs
        .iter()
        .zip(&z)
        .map(|(c, z)| c * z / t.radius)
        .collect();
    FourierTrace::from_coeffs(t.dim, t.radius, t.order, coeffs)
}

/// Orthogonal projector onto harmonics of degree at most `order`.
pub fn project_pn(t: &FourierTrace, order: usize) -> Result<FourierTrace> {
    if order > t.order {
        return Err(Error::Domain(format!(
            "projection order {order} exceeds trace order {}",
            t.order
        )));
    }
    let mut out = t.clone();
    for (c, n) in out.coeffs.iter_mut().zip(t.degrees()) {
        if n > order {
            *c = Complex64::default();
        }
    }
    Ok(out)
}

/// Radiating exterior field with Dirichlet data `t` on S_R, at |point| > R.
pub fn exterior_field(t: &FourierTrace, ctx: &WaveContext, point: &[f64]) -> Result<Complex64> {
    check_context(t, ctx)?;
    if point.len() != t.dim as usize {
        return Err(Error::Domain(format!(
            "point has {} components, expected {}",
            point.len(),
            t.dim
        )));
    }
    let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(r > t.radius) {
        return Err(Error::Domain(format!(
            "exterior point must satisfy r > R = {}, got r = {r}",
            t.radius
        )));
    }
    let ratios = specfun::hankel_ratios(t.dim, t.order, ctx.kappa * r, ctx.kappa * t.radius)?;
    let mut scaled = t.clone();
    for (c, n) in scaled.coeffs.iter_mut().zip(t.degrees()) {
        *c *= ratios[n];
    }
    let dir: Vec<f64> = point.iter().map(|x| x / r).collect();
    synthesize_trace(&scaled, &dir)
}

/// ((T_kappa - T_{kappa,N}) w, v)_{S_R}, with the exact operator represented
/// by all harmonics stored in `w` (its order plays the role of N_ref).
pub fn dtn_truncation_pairing(
    w: &FourierTrace,
    v: &FourierTrace,
    order: usize,
    ctx: &WaveContext,
) -> Result<Complex64> {
    check_context(w, ctx)?;
    w.same_sphere(v)?;
    if order >= w.order {
        return Err(Error::Domain(format!(
            "truncation order {order} must be below the reference order {}",
            w.order
        )));
    }
    let z = symbols_for(w, ctx.kappa)?;
    let mut acc = Complex64::default();
    for ((idx, c), z) in w.indices().iter().zip(&w.coeffs).zip(&z) {
        if idx.n.unsigned_abs() as usize > order {
            acc += z * c * v.get(idx.n, idx.m).conj();
        }
    }
    let scale = if w.dim == 2 { 1.0 } else { w.radius };
    Ok(acc * scale)
}

/// Bound constant c(N, w, v) of the truncation-error estimate
/// |((T - T_N) w, v)| <= c ||w||_{1/2} ||v||_{1/2}.
///
/// Built from the tail ratios of the H^{1/2} weights and the N-independent
/// symbol bound.
pub fn truncation_constant(
    w: &FourierTrace,
    v: &FourierTrace,
    order: usize,
    ctx: &WaveContext,
) -> Result<f64> {
    w.same_sphere(v)?;
    let ratio = |t: &FourierTrace| {
        let full = weighted_tail(t, 0.5, None);
        if full == 0.0 {
            0.0
        } else {
            weighted_tail(t, 0.5, Some(order)) / full
        }
    };
    let c_tilde = (ratio(w) * ratio(v)).sqrt();
    Ok(c_tilde * uniform_symbol_bound(ctx)? / ctx.radius)
}

/// max over n of |symbol_n| / (1+n^2)^{1/2} as bounded by the symbol estimates:
/// max(|Z_0|, (1+xi^2)^{1/2}) in dim 2 and (2+xi^2)^{1/2} in dim 3.
pub fn uniform_symbol_bound(ctx: &WaveContext) -> Result<f64> {
    let xi = ctx.kappa * ctx.radius;
    if ctx.dim == 2 {
        let z0 = specfun::dtn_symbol(2, 0, xi)?.value.norm();
        Ok(z0.max((1.0 + xi * xi).sqrt()))
    } else {
        Ok((2.0 + xi * xi).sqrt())
    }
}

/// Writes a trace as CSV: a `# dim=.. R=.. N=.. kappa=..` header, optional
/// extra comment lines, then `n,re,im` (dim 2) or `n,m,re,im` (dim 3) rows.
pub fn write_trace_csv(
    t: &FourierTrace,
    kappa: f64,
    extra_header: &[String],
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# dim={} R={:e} N={} kappa={:e}",
        t.dim, t.radius, t.order, kappa
    )?;
    for line in extra_header {
        writeln!(out, "# {line}")?;
    }
    if t.dim == 2 {
        writeln!(out, "n,re,im")?;
        for (idx, c) in t.indices().iter().zip(&t.coeffs) {
            writeln!(out, "{},{:.17e},{:.17e}", idx.n, c.re, c.im)?;
        }
    } else {
        writeln!(out, "n,m,re,im")?;
        for (idx, c) in t.indices().iter().zip(&t.coeffs) {
            writeln!(out, "{},{},{:.17e},{:.17e}", idx.n, idx.m, c.re, c.im)?;
        }
    }
    Ok(())
}

/// Parses the format written by [`write_trace_csv`]; returns the trace and kappa.
pub fn parse_trace_csv(text: &str) -> Result<(FourierTrace, f64)> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut header: Option<(u8, f64, usize, f64)> = None;
    let mut trace: Option<FourierTrace> = None;
    let mut seen_columns = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_none() {
                header = Some(parse_trace_header(comment).map_err(|m| perr(line_no, m))?);
                let (dim, r, n, _) = header.unwrap();
                if n > specfun::Limits::default().max_order {
                    return Err(perr(line_no, format!("order {n} exceeds the supported maximum")));
                }
                trace = Some(FourierTrace::zeros(dim, r, n).map_err(|e| perr(line_no, e.to_string()))?);
            }
            continue;
        }
        let (dim, ..) = header.ok_or_else(|| perr(line_no, "missing `# dim R N kappa` header".into()))?;
        if !seen_columns {
            let expected = if dim == 2 { "n,re,im" } else { "n,m,re,im" };
            if line.replace(' ', "") != expected {
                return Err(perr(line_no, format!("expected column line `{expected}`")));
            }
            seen_columns = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let t = trace.as_mut().expect("trace allocated with header");
        let want = if dim == 2 { 3 } else { 4 };
        if fields.len() != want {
            return Err(perr(line_no, format!("expected {want} fields, got {}", fields.len())));
        }
        let int = |s: &str| s.parse::<i64>().map_err(|e| perr(line_no, format!("bad index `{s}`: {e}")));
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| perr(line_no, format!("bad number `{s}`: {e}")))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(perr(line_no, format!("non-finite value `{s}`")))
                    }
                })
        };
        let n = int(fields[0])?;
        let m = if dim == 3 { int(fields[1])? } else { 0 };
        let re = real(fields[want - 2])?;
        let im = real(fields[want - 1])?;
        t.set(n, m, Complex64::new(re, im))
            .map_err(|e| perr(line_no, e.to_string()))?;
    }
    let (_, _, _, kappa) = header.ok_or_else(|| perr(0, "empty trace file".into()))?;
    Ok((trace.expect("trace allocated with header"), kappa))
}

fn parse_trace_header(comment: &str) -> std::result::Result<(u8, f64, usize, f64), String> {
    let mut dim = None;
    let mut r = None;
    let mut n = None;
    let mut kappa = None;
    for tok in comment.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("header token `{tok}` is not key=value"))?;
        let bad = |e: &dyn std::fmt::Display| format!("bad header value for `{k}`: {e}");
        match k {
            "dim" => dim = Some(v.parse::<u8>().map_err(|e| bad(&e))?),
            "R" => r = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
            "N" => n = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
            "kappa" => kappa = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
            _ => {}
        }
    }
    let dim = dim.ok_or("header is missing `dim`")?;
    let r = r.ok_or("header is missing `R`")?;
    let n = n.ok_or("header is missing `N`")?;
    let kappa = kappa.ok_or("header is missing `kappa`")?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(format!("kappa must be positive, got {kappa}"));
    }
    Ok((dim, r, n, kappa))
}
