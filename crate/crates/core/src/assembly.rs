//! P1 finite element assembly of the truncated sesquilinear form
//! a_N(w, v) = (grad w, grad v) - kappa^2 (c w, v) - (T_{kappa,N} w, v)_{S_R}
//! and of the right-hand-side functionals.
//!
//! The DtN term is kept as a low-rank update B D B^H with
//! b_{i,n} = (phi_i, Y_n(./R))_{S_R} and D = diag(Z_n(kappa R)/R^2). Solves use a
//! sparse LU of the bordered matrix [[A, -B], [-B^H, D^{-1}]].

use std::f64::consts::PI;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use num_complex::Complex64;

use crate::boundary::FourierTrace;
use crate::error::{Error, Result};
use crate::mesh::{Mesh2D, Region};
use crate::solver::{LinearPart, Nonlinearity};
use crate::specfun;
use crate::WaveContext;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Degree-4 six-point rule on the reference triangle: barycentric points and
/// weights summing to one.
pub const QUAD6: [([f64; 3], f64); 6] = [
    ([0.108_103_018_168_070, 0.445_948_490_915_965, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.108_103_018_168_070, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.445_948_490_915_965, 0.108_103_018_168_070], 0.223_381_589_678_011),
    ([0.816_847_572_980_459, 0.091_576_213_509_771, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.816_847_572_980_459, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.091_576_213_509_771, 0.816_847_572_980_459], 0.109_951_743_655_322),
];

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Csr {
    /// Builds from (row, col, value) triplets; duplicates are summed in
    /// input order so the result is deterministic.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, Complex64)>) -> Self {
        trip.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<Complex64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.data[k] * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    /// x^H M x.
    pub fn quad(&self, x: &[Complex64]) -> Complex64 {
        self.matvec(x)
            .iter()
            .zip(x)
            .map(|(y, x)| x.conj() * y)
            .sum()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        (self.indptr[r]..self.indptr[r + 1])
            .find(|&k| self.indices[k] == c)
            .map(|k| self.data[k])
            .unwrap_or(ZERO)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.data[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Coordinate text dump (`row col re im`), for debugging.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.n, self.data.len());
        for (r, c, v) in self.entries() {
            s.push_str(&format!("{r} {c} {:.17e} {:.17e}\n", v.re, v.im));
        }
        s
    }
}

/// Gradients of the three P1 basis functions on triangle `t` and its area.
pub fn p1_gradients(mesh: &Mesh2D, t: usize) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = mesh.triangles[t];
    let (p, q, r) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    let area = mesh.area(t);
    let inv = 1.0 / (2.0 * area);
    let g = [
        [(q[1] - r[1]) * inv, (r[0] - q[0]) * inv],
        [(r[1] - p[1]) * inv, (p[0] - r[0]) * inv],
        [(p[1] - q[1]) * inv, (q[0] - p[0]) * inv],
    ];
    (g, area)
}

/// Physical coordinates of a barycentric point on triangle `t`.
pub fn map_point(mesh: &Mesh2D, t: usize, lam: [f64; 3]) -> [f64; 2] {
    let [a, b, c] = mesh.triangles[t];
    let (p, q, r) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
    [
        lam[0] * p[0] + lam[1] * q[0] + lam[2] * r[0],
        lam[0] * p[1] + lam[1] * q[1] + lam[2] * r[1],
    ]
}

/// (int_0^1 (1-s) e^{i theta s} ds, int_0^1 s e^{i theta s} ds).
fn arc_weights(theta: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let (j, s1) = if theta.abs() < 0.5 {
        // Power series: sum (i theta)^k / (k+1)! and sum (i theta)^k / ((k+2) k!).
        let z = i * theta;
        let mut term = Complex64::new(1.0, 0.0); // z^k / k!
        let mut j = ZERO;
        let mut s1 = ZERO;
        for k in 0..24 {
            j += term / (k + 1) as f64;
            s1 += term / (k + 2) as f64;
            term *= z / (k + 1) as f64;
        }
        (j, s1)
    } else {
        let e = Complex64::from_polar(1.0, theta);
        let j = (e - 1.0) / (i * theta);
        let s1 = e / (i * theta) + (e - 1.0) / (theta * theta);
        (j, s1)
    };
    (j - s1, s1)
}

/// Moments beta[p][k] = int_{S_R} phi_{ring[p]} conj(Y_n) ds for n = -order..=order
/// (k = n + order), with the trace taken as linear in angle between
/// consecutive ring nodes.
pub fn ring_moments(radius: f64, angles: &[f64], order: usize) -> Vec<Vec<Complex64>> {
    let l = angles.len();
    let nmodes = 2 * order + 1;
    let mut out = vec![vec![ZERO; nmodes]; l];
    let c = radius / (2.0 * PI).sqrt();
    for p in 0..l {
        let q = (p + 1) % l;
        let ta = angles[p];
        let tb = if q == 0 { angles[0] + 2.0 * PI } else { angles[q] };
        let delta = tb - ta;
        for (k, n) in (-(order as i64)..=order as i64).enumerate() {
            let nf = n as f64;
            let (wa, wb) = arc_weights(-nf * delta);
            let phase = Complex64::from_polar(c * delta, -nf * ta);
            out[p][k] += phase * wa;
            out[q][k] += phase * wb;
        }
    }
    out
}

/// Harmonic coefficients (order `order`) of a P1 function restricted to S_R.
pub fn p1_trace(mesh: &Mesh2D, u: &[Complex64], order: usize) -> FourierTrace {
    let beta = ring_moments(mesh.radius, &mesh.ring_angles, order);
    let mut coeffs = vec![ZERO; 2 * order + 1];
    for (p, &node) in mesh.ring.iter().enumerate() {
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += u[node] * beta[p][k];
        }
    }
    for c in coeffs.iter_mut() {
        *c /= mesh.radius;
    }
    FourierTrace {
        dim: 2,
        radius: mesh.radius,
        order,
        coeffs,
    }
}

/// Incident field u^inc.
#[derive(Debug, Clone, PartialEq)]
pub enum IncidentField {
    /// alpha exp(i kappa r sin(phi_inc - phi)) = alpha exp(i (Phi x1 - Gamma x2)).
    PlaneWave { amplitude: Complex64, angle: f64 },
    /// Radiating exterior field with the given Dirichlet data on S_R.
    RadiatingSeries(FourierTrace),
}

impl IncidentField {
    pub fn plane_wave(amplitude: Complex64, angle: f64) -> Result<Self> {
        if !(angle.abs() < PI) {
            return Err(Error::Domain(format!(
                "angle of incidence must satisfy |phi| < pi, got {angle}"
            )));
        }
        Ok(IncidentField::PlaneWave { amplitude, angle })
    }

    /// (Phi, Gamma) = (kappa sin phi_inc, kappa cos phi_inc).
    pub fn wavenumbers(kappa: f64, angle: f64) -> (f64, f64) {
        (kappa * angle.sin(), kappa * angle.cos())
    }

    /// Point value and gradient of a plane wave (None for radiating series,
    /// which is only defined outside B_R).
    pub fn plane_value(&self, kappa: f64, x: [f64; 2]) -> Option<(Complex64, [Complex64; 2])> {
        match self {
            IncidentField::PlaneWave { amplitude, angle } => {
                let (phi_w, gamma_w) = Self::wavenumbers(kappa, *angle);
                let v = amplitude * Complex64::from_polar(1.0, phi_w * x[0] - gamma_w * x[1]);
                let i = Complex64::i();
                Some((v, [i * phi_w * v, -i * gamma_w * v]))
            }
            IncidentField::RadiatingSeries(_) => None,
        }
    }

    /// Dirichlet and radial-derivative coefficients on S_R up to `order`.
    pub fn boundary_coefficients(
        &self,
        ctx: &WaveContext,
        order: usize,
    ) -> Result<(FourierTrace, FourierTrace)> {
        let xi = ctx.xi();
        let mut dir = FourierTrace::zeros(2, ctx.radius, order)?;
        let mut rad = FourierTrace::zeros(2, ctx.radius, order)?;
        match self {
            IncidentField::PlaneWave { amplitude, angle } => {
                let s = (2.0 * PI).sqrt();
                for n in -(order as i64)..=order as i64 {
                    let na = n.unsigned_abs() as usize;
                    let (j, _, jp, _) = specfun::bessel_jy(xi, na as f64)?;
                    // J_{-n} = (-1)^n J_n, so (-1)^n J_n(-) becomes J_|n| for n < 0.
                    let sign = if n > 0 && na % 2 == 1 { -1.0 } else { 1.0 };
                    let ph = amplitude * Complex64::from_polar(s * sign, -(n as f64) * angle);
                    dir.set(n, 0, ph * j)?;
                    rad.set(n, 0, ph * ctx.kappa * jp)?;
                }
            }
            IncidentField::RadiatingSeries(t) => {
                if t.dim != 2 || (t.radius - ctx.radius).abs() > 1e-12 * ctx.radius {
                    return Err(Error::Mismatch(
                        "radiating incident data must live on S_R of the context".into(),
                    ));
                }
                for n in -(order as i64)..=order as i64 {
                    let c = t.get(n, 0);
                    if c == ZERO {
                        continue;
                    }
                    // Radial derivative of H_n(kappa r)/H_n(kappa R) at r = R.
                    let h = specfun::hankel_cyl(n, xi)?;
                    dir.set(n, 0, c)?;
                    rad.set(n, 0, c * ctx.kappa * h.derivative / h.value)?;
                }
            }
        }
        Ok((dir, rad))
    }

    /// Highest harmonic needed to represent the field on S_R to round-off.
    pub fn modes_needed(&self, ctx: &WaveContext) -> usize {
        match self {
            IncidentField::PlaneWave { .. } => ctx.order.max(ctx.xi().ceil() as usize + 40),
            IncidentField::RadiatingSeries(t) => ctx.order.max(t.order),
        }
    }
}

/// Discrete form a_N and its factorization.
pub struct AssembledSystem {
    pub ctx: WaveContext,
    pub ndofs: usize,
    /// K - kappa^2 M_c, with c the background coefficient.
    pub a: Csr,
    /// Stiffness matrix (grad w, grad v) on B_R.
    pub stiffness: Csr,
    /// Mass matrix (w, v) on B_R.
    pub mass: Csr,
    /// Mass matrix restricted to the obstacle.
    pub mass_obstacle: Csr,
    pub ring: Vec<usize>,
    /// beta[p][k], see [`ring_moments`].
    pub moments: Vec<Vec<Complex64>>,
    /// Z_n(kappa R) for n = -N..=N.
    pub symbols: Vec<Complex64>,
    /// How the linear part of the material law enters the operator.
    pub linear_part: LinearPart,
    lu: Lu<usize, Complex64>,
    condition_estimate: f64,
}

impl std::fmt::Debug for AssembledSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssembledSystem")
            .field("ctx", &self.ctx)
            .field("ndofs", &self.ndofs)
            .field("nnz", &self.a.data.len())
            .field("linear_part", &self.linear_part)
            .field("condition_estimate", &self.condition_estimate)
            .finish()
    }
}

/// Assembles a_N with c = 1 on all of B_R.
pub fn assemble_linear(mesh: &Mesh2D, ctx: &WaveContext) -> Result<AssembledSystem> {
    assemble(mesh, ctx, &Nonlinearity::vacuum(), LinearPart::Rhs)
}

/// Assembles a_N. With [`LinearPart::Operator`] the linear coefficient eps^L of
/// `nl` replaces c = 1 inside the obstacle, so only c(u) - eps^L is iterated.
pub fn assemble(
    mesh: &Mesh2D,
    ctx: &WaveContext,
    nl: &Nonlinearity,
    linear_part: LinearPart,
) -> Result<AssembledSystem> {
    if ctx.dim != 2 {
        return Err(Error::Capability("volume assembly is two-dimensional only".into()));
    }
    if (mesh.radius - ctx.radius).abs() > 1e-12 * ctx.radius {
        return Err(Error::Mismatch(format!(
            "mesh radius {} differs from context radius {}",
            mesh.radius, ctx.radius
        )));
    }
    let n = mesh.nodes.len();
    let k2 = ctx.kappa * ctx.kappa;
    let mut tk = Vec::with_capacity(9 * mesh.triangles.len());
    let mut tm = Vec::with_capacity(9 * mesh.triangles.len());
    let mut tmo = Vec::new();
    let mut ta = Vec::with_capacity(9 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = p1_gradients(mesh, t);
        let obstacle = mesh.tags[t] == Region::Obstacle;
        // Background-weighted mass by quadrature.
        let mut mc = [[ZERO; 3]; 3];
        if obstacle && linear_part == LinearPart::Operator {
            for (lam, w) in QUAD6 {
                let eps = nl.eps(map_point(mesh, t, lam));
                for i in 0..3 {
                    for j in 0..3 {
                        mc[i][j] += eps * (w * area * lam[i] * lam[j]);
                    }
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let kij = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                let mij = area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
                let (r, c) = (tri[i], tri[j]);
                tk.push((r, c, Complex64::new(kij, 0.0)));
                tm.push((r, c, Complex64::new(mij, 0.0)));
                if obstacle {
                    tmo.push((r, c, Complex64::new(mij, 0.0)));
                }
                let m_bg = if obstacle && linear_part == LinearPart::Operator {
                    mc[i][j]
                } else {
                    Complex64::new(mij, 0.0)
                };
                ta.push((r, c, Complex64::new(kij, 0.0) - m_bg * k2));
            }
        }
    }
    let a = Csr::from_triplets(n, ta);
    let moments = ring_moments(ctx.radius, &mesh.ring_angles, ctx.order);
    let z = specfun::Limits::default().dtn_symbols(2, ctx.order, ctx.xi())?;
    let symbols: Vec<Complex64> = (-(ctx.order as i64)..=ctx.order as i64)
        .map(|k| z[k.unsigned_abs() as usize].value)
        .collect();

    let nmodes = symbols.len();
    let r2 = ctx.radius * ctx.radius;
    let mut trip: Vec<Triplet<usize, usize, Complex64>> = a
        .entries()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    for (p, &node) in mesh.ring.iter().enumerate() {
        for (k, &b) in moments[p].iter().enumerate().take(nmodes) {
            trip.push(Triplet::new(node, n + k, -b));
            trip.push(Triplet::new(n + k, node, -b.conj()));
        }
    }
    for (k, zk) in symbols.iter().enumerate() {
        trip.push(Triplet::new(n + k, n + k, r2 / zk));
    }
    let bordered = SparseColMat::<usize, Complex64>::try_new_from_triplets(n + nmodes, n + nmodes, &trip)
        .map_err(|e| Error::Capability(format!("sparse matrix construction failed: {e:?}")))?;
    let lu = bordered.sp_lu().map_err(|_| Error::Singular {
        condition_estimate: f64::INFINITY,
    })?;
    let mut sys = AssembledSystem {
        ctx: *ctx,
        ndofs: n,
        a,
        stiffness: Csr::from_triplets(n, tk),
        mass: Csr::from_triplets(n, tm),
        mass_obstacle: Csr::from_triplets(n, tmo),
        ring: mesh.ring.clone(),
        moments,
        symbols,
        linear_part,
        lu,
        condition_estimate: 0.0,
    };
    let cond = sys.estimate_condition();
    sys.condition_estimate = cond;
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular {
            condition_estimate: cond,
        });
    }
    Ok(sys)
}

impl AssembledSystem {
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// (B^H v)_k = sum_p conj(beta[p][k]) v[ring[p]].
    fn bh(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.symbols.len()];
        for (p, &node) in self.ring.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.moments[p][k].conj() * v[node];
            }
        }
        out
    }

    /// (B D B^H) v.
    pub fn apply_dtn_block(&self, v: &[Complex64]) -> Vec<Complex64> {
        let r2 = self.ctx.radius * self.ctx.radius;
        let w: Vec<Complex64> = self
            .bh(v)
            .iter()
            .zip(&self.symbols)
            .map(|(b, z)| b * z / r2)
            .collect();
        let mut out = vec![ZERO; self.ndofs];
        for (p, &node) in self.ring.iter().enumerate() {
            for (k, wk) in w.iter().enumerate() {
                out[node] += self.moments[p][k] * wk;
            }
        }
        out
    }

    /// S v = (A - B D B^H) v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.a.matvec(v);
        for (o, d) in out.iter_mut().zip(self.apply_dtn_block(v)) {
            *o -= d;
        }
        out
    }

    /// v^H S v = a_N(v, v).
    pub fn form(&self, v: &[Complex64]) -> Complex64 {
        self.apply(v).iter().zip(v).map(|(s, v)| v.conj() * s).sum()
    }

    /// Solves S u = f.
    pub fn solve(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.ndofs;
        let mut b = Mat::<Complex64>::from_fn(n + self.symbols.len(), 1, |i, _| {
            if i < n {
                f[i]
            } else {
                ZERO
            }
        });
        self.lu.solve_in_place_with_conj(Conj::No, b.as_mut());
        (0..n).map(|i| b[(i, 0)]).collect()
    }

    /// Solves S^H u = f using the complex symmetry of S.
    pub fn solve_adjoint(&self, f: &[Complex64]) -> Vec<Complex64> {
        let fc: Vec<Complex64> = f.iter().map(|v| v.conj()).collect();
        self.solve(&fc).iter().map(|v| v.conj()).collect()
    }

    /// Infinity-norm condition estimate from a few inverse power steps.
    fn estimate_condition(&self) -> f64 {
        let n = self.ndofs;
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + ((i * 7919) % 13) as f64 / 13.0, ((i * 104_729) % 7) as f64 / 7.0))
            .collect();
        let mut inv_norm = 0.0;
        for _ in 0..4 {
            let nx = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let y = self.solve(&x);
            let ny = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            inv_norm = f64::max(inv_norm, ny / nx);
            x = y;
        }
        let dtn_norm = {
            let r2 = self.ctx.radius * self.ctx.radius;
            let zmax = self.symbols.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let bmax: f64 = self
                .moments
                .iter()
                .map(|row| row.iter().map(|b| b.norm()).sum::<f64>())
                .fold(0.0, f64::max);
            zmax / r2 * bmax * bmax * 3.0
        };
        (self.a.norm_inf() + dtn_norm) * inv_norm
    }

    /// Trace coefficients v_n, |n| <= N, of a discrete function.
    pub fn trace(&self, v: &[Complex64]) -> FourierTrace {
        let r = self.ctx.radius;
        let b = self.bh(v);
        // sum_j v_j beta_{j,n} = conj(sum_j conj(beta_{j,n}) conj(v_j)); use b_{-n}.
        let nmodes = b.len();
        let coeffs = (0..nmodes).map(|k| b[nmodes - 1 - k] / r).collect();
        FourierTrace {
            dim: 2,
            radius: r,
            order: self.ctx.order,
            coeffs,
        }
    }

    /// ||v||_{V,kappa}^2 = |v|_1^2 + kappa^2 ||v||_0^2 on B_R.
    pub fn energy_norm_sq(&self, v: &[Complex64]) -> f64 {
        self.stiffness.quad(v).re + self.ctx.kappa.powi(2) * self.mass.quad(v).re
    }

    pub fn l2_norm_sq(&self, v: &[Complex64]) -> f64 {
        self.mass.quad(v).re
    }
}

/// Right-hand side (r . grad u^inc - T_{kappa,N} u^inc, phi_i)_{S_R}.
pub fn incident_functionals(
    inc: &IncidentField,
    ctx: &WaveContext,
    mesh: &Mesh2D,
) -> Result<Vec<Complex64>> {
    let m = inc.modes_needed(ctx);
    let (dir, rad) = inc.boundary_coefficients(ctx, m)?;
    let z = specfun::Limits::default().dtn_symbols(2, ctx.order, ctx.xi())?;
    // g_n = (du/dr)_n - [|n| <= N] Z_n u_n / R.
    let mut g = rad.clone();
    for n in -(ctx.order as i64)..=ctx.order as i64 {
        let k = g.index(n, 0).unwrap();
        g.coeffs[k] -= z[n.unsigned_abs() as usize].value * dir.coeffs[k] / ctx.radius;
    }
    Ok(boundary_functional(&g, mesh))
}

/// Vector of int_{S_R} g phi_i ds for a trace g given by coefficients.
pub fn boundary_functional(g: &FourierTrace, mesh: &Mesh2D) -> Vec<Complex64> {
    let beta = ring_moments(mesh.radius, &mesh.ring_angles, g.order);
    let mut out = vec![ZERO; mesh.nodes.len()];
    let last = 2 * g.order;
    for (p, &node) in mesh.ring.iter().enumerate() {
        // int Y_n phi_i = conj(beta_{i,n}) = beta_{i,-n}.
        for (k, gk) in g.coeffs.iter().enumerate() {
            out[node] += gk * beta[p][last - k];
        }
    }
    out
}

/// Evaluates the P1 function at the quadrature points of triangle `t`.
pub fn values_at_quadrature(mesh: &Mesh2D, u: &[Complex64], t: usize) -> [Complex64; 6] {
    let tri = mesh.triangles[t];
    let mut out = [ZERO; 6];
    for (q, (lam, _)) in QUAD6.iter().enumerate() {
        out[q] = u[tri[0]] * lam[0] + u[tri[1]] * lam[1] + u[tri[2]] * lam[2];
    }
    out
}

/// l^contr(u) + l^src(u): kappa^2 ((c(., u) - c_0) u, phi_i)_Omega + (f(., u), phi_i)_Omega,
/// with c_0 = eps^L when the linear part sits in the operator and c_0 = 1 otherwise.
pub fn nonlinear_rhs(
    u: &[Complex64],
    nl: &Nonlinearity,
    ctx: &WaveContext,
    mesh: &Mesh2D,
    linear_part: LinearPart,
) -> Result<Vec<Complex64>> {
    let k2 = ctx.kappa * ctx.kappa;
    let mut out = vec![ZERO; mesh.nodes.len()];
    for t in 0..mesh.triangles.len() {
        if mesh.tags[t] != Region::Obstacle {
            continue;
        }
        let tri = mesh.triangles[t];
        let area = mesh.area(t);
        let vals = values_at_quadrature(mesh, u, t);
        for (q, (lam, w)) in QUAD6.iter().enumerate() {
            let x = map_point(mesh, t, *lam);
            let ut = vals[q];
            let c0 = match linear_part {
                LinearPart::Operator => nl.eps(x),
                LinearPart::Rhs => Complex64::new(1.0, 0.0),
            };
            let integrand = (nl.c(x, ut) - c0) * ut * k2 + nl.f(x, ut);
            if !(integrand.re.is_finite() && integrand.im.is_finite()) {
                return Err(Error::NonFinite { element: t });
            }
            for i in 0..3 {
                out[tri[i]] += integrand * (w * area * lam[i]);
            }
        }
    }
    Ok(out)
}
