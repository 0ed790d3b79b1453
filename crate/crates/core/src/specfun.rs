//! Cylindrical and spherical Hankel functions of the first kind, the DtN
//! symbols Z_n and z_n, associated Legendre functions and the circular and
//! spherical harmonics on the unit sphere.
//!
//! The Bessel pair (J_nu, Y_nu) for integer and half-integer nu is computed
//! with the Steed/Temme scheme: a continued fraction for J'/J, a downward
//! recurrence for the J-type solution, Temme's series (x < 2) or the complex
//! continued fraction of Steed (x >= 2) at the reduced order, and an upward
//! recurrence for the Y-type solution. DtN symbols are formed from the
//! ratio recurrence of H_n, which never leaves the floating-point range.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
const MAXIT: usize = 100_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_AT: f64 = 1e250;

/// Capability envelope for the special functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_order: usize,
    pub xi_min: f64,
    pub xi_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_order: 512,
            xi_min: 1e-3,
            xi_max: 1e4,
        }
    }
}

impl Limits {
    fn check(&self, order: usize, x: f64) -> Result<()> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "argument must be a positive finite real, got {x}"
            )));
        }
        if order > self.max_order {
            return Err(Error::Capability(format!(
                "order {order} exceeds the configured maximum {}",
                self.max_order
            )));
        }
        if x < self.xi_min || x > self.xi_max {
            return Err(Error::Capability(format!(
                "argument {x} outside the supported range [{}, {}]",
                self.xi_min, self.xi_max
            )));
        }
        Ok(())
    }
}

/// A Hankel function value together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelValue {
    pub order: i64,
    pub argument: f64,
    pub value: Complex64,
    pub derivative: Complex64,
}

/// J_nu(x), Y_nu(x) and their derivatives for real nu >= 0 with 2*nu an integer.
///
/// Returns (J, Y, J', Y'). Components that underflow are returned as zero;
/// components that overflow come back infinite and are rejected by callers.
pub fn bessel_jy(x: f64, nu: f64) -> Result<(f64, f64, f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel argument must be positive, got {x}"
        )));
    }
    if nu < 0.0 || (2.0 * nu).fract() != 0.0 {
        return Err(Error::Capability(format!(
            "only integer and half-integer orders >= 0 are supported, got {nu}"
        )));
    }
    const XMIN: f64 = 2.0;
    let nl: usize = if x < XMIN {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_nu / J_nu by modified Lentz.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() <= EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Capability(format!(
            "continued fraction for J'/J did not converge at x = {x}"
        )));
    }

    // Downward recurrence from nu to xmu, rescaling to stay in range.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let mut rjl1 = rjl;
    let mut rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE_AT || rjpl.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            rjl *= s;
            rjpl *= s;
            rjl1 *= s;
            rjp1 *= s;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        // Temme's series at the reduced order xmu in {0, -1/2}.
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Capability(format!(
                "Temme series did not converge at x = {x}"
            )));
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // Steed's complex continued fraction for (p + iq).
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 1..MAXIT {
            a += 2.0 * i as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() <= EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Capability(format!(
                "Steed continued fraction did not converge at x = {x}"
            )));
        }
        let gam = (p - f) / q;
        let mut r = (w / ((p - f) * gam + q)).sqrt();
        if rjl < 0.0 {
            r = -r;
        }
        rjmu = r;
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    let fact = rjmu / rjl;
    let j = rjl1 * fact;
    let jp = rjp1 * fact;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;
    Ok((j, y, jp, yp))
}

/// (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for the two reduced orders
/// reachable from integer and half-integer nu.
fn temme_gammas(xmu: f64) -> (f64, f64, f64, f64) {
    if xmu == 0.0 {
        (-EULER_GAMMA, 1.0, 1.0, 1.0)
    } else {
        debug_assert!(xmu == -0.5);
        let rsp = 1.0 / PI.sqrt();
        (-rsp, 1.5 * rsp, rsp, 2.0 * rsp)
    }
}

/// H_n^(1)(x) and its derivative for integer n, using the default limits.
pub fn hankel_cyl(order: i64, x: f64) -> Result<HankelValue> {
    Limits::default().hankel_cyl(order, x)
}

/// h_n^(1)(x) and its derivative, using the default limits.
pub fn hankel_sph(order: i64, x: f64) -> Result<HankelValue> {
    Limits::default().hankel_sph(order, x)
}

/// DtN symbol Z_n (dim 2) or z_n (dim 3), using the default limits.
pub fn dtn_symbol(dim: u8, n: i64, xi: f64) -> Result<DtnSymbol> {
    Limits::default().dtn_symbol(dim, n, xi)
}

fn overflow(what: &str, order: i64, x: f64) -> Error {
    Error::Capability(format!(
        "{what} of order {order} at x = {x} is outside the double-precision range"
    ))
}

impl Limits {
    pub fn hankel_cyl(&self, order: i64, x: f64) -> Result<HankelValue> {
        let n = order.unsigned_abs() as usize;
        self.check(n, x)?;
        let (j, y, jp, yp) = bessel_jy(x, n as f64)?;
        let sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
        let value = Complex64::new(j, y) * sign;
        let derivative = Complex64::new(jp, yp) * sign;
        if !(value.re.is_finite()
            && value.im.is_finite()
            && derivative.re.is_finite()
            && derivative.im.is_finite())
        {
            return Err(overflow("H", order, x));
        }
        Ok(HankelValue {
            order,
            argument: x,
            value,
            derivative,
        })
    }

    pub fn hankel_sph(&self, order: i64, x: f64) -> Result<HankelValue> {
        if order < 0 {
            return Err(Error::Domain(format!(
                "spherical Hankel order must be nonnegative, got {order}"
            )));
        }
        let n = order as usize;
        self.check(n, x)?;
        let e = Complex64::from_polar(1.0, x);
        let i = Complex64::i();
        let h0 = -i * e / x;
        let h1 = -e * Complex64::new(x, 1.0) / (x * x);
        let (mut prev, mut cur) = (h0, h1);
        if n == 0 {
            return Ok(HankelValue {
                order,
                argument: x,
                value: h0,
                derivative: -h1,
            });
        }
        for k in 1..n {
            let next = cur * ((2 * k + 1) as f64 / x) - prev;
            prev = cur;
            cur = next;
            if !(cur.re.is_finite() && cur.im.is_finite()) {
                return Err(overflow("h", order, x));
            }
        }
        let derivative = prev - cur * ((n + 1) as f64 / x);
        if !(derivative.re.is_finite() && derivative.im.is_finite()) {
            return Err(overflow("h", order, x));
        }
        Ok(HankelValue {
            order,
            argument: x,
            value: cur,
            derivative,
        })
    }
}

/// Value of the DtN symbol Z_n(xi) (dim 2) or z_n(xi) (dim 3).
///
/// `ln_im` is the natural logarithm of the imaginary part. For large orders
/// at small arguments Im Z_n drops below the smallest positive double while
/// staying strictly positive; `ln_im` keeps it representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnSymbol {
    pub dim: u8,
    pub order: i64,
    pub xi: f64,
    pub value: Complex64,
    pub ln_im: f64,
}

impl DtnSymbol {
    /// Checks the sign and band inequalities for this symbol.
    ///
    /// Non-strict bounds are relaxed by `slack`; strict bounds are checked
    /// strictly (positivity of the imaginary part through `ln_im`).
    pub fn band_violation(&self, slack: f64) -> Option<String> {
        let (re, im, xi) = (self.value.re, self.value.im, self.xi);
        let n = self.order.unsigned_abs() as f64;
        let im_positive = self.ln_im.is_finite() && im >= 0.0;
        let fail = |what: &str| Some(format!("{what}: n={} xi={xi} Z={}", self.order, self.value));
        match (self.dim, self.order) {
            (2, 0) => {
                if re < -0.5 - slack {
                    return fail("Re Z_0 < -1/2");
                }
                if !(re < 0.0) {
                    return fail("Re Z_0 >= 0");
                }
                if !(im > xi) {
                    return fail("Im Z_0 <= xi");
                }
            }
            (2, _) => {
                if re < -n - slack || re > -0.5 + slack {
                    return fail("Re Z_n outside [-|n|, -1/2]");
                }
                if !im_positive {
                    return fail("Im Z_n not positive");
                }
                if !(im < xi) {
                    return fail("Im Z_n >= xi");
                }
            }
            (3, 0) => {
                if (re + 1.0).abs() > slack || (im - xi).abs() > slack * xi.max(1.0) {
                    return fail("z_0 differs from -1 + i xi");
                }
            }
            _ => {
                if re < -(n + 1.0) - slack || re > -1.0 + slack {
                    return fail("Re z_n outside [-(n+1), -1]");
                }
                if !im_positive {
                    return fail("Im z_n not positive");
                }
                if im > xi + slack {
                    return fail("Im z_n > xi");
                }
            }
        }
        let bound = (1.0 + n * n) * if self.dim == 2 { 1.0 + xi * xi } else { 2.0 + xi * xi };
        if self.value.norm_sqr() > bound * (1.0 + slack) {
            return fail("|symbol|^2 exceeds (1+n^2)(c+xi^2)");
        }
        None
    }
}

impl Limits {
    pub fn dtn_symbol(&self, dim: u8, n: i64, xi: f64) -> Result<DtnSymbol> {
        if dim == 3 && n < 0 {
            return Err(Error::Domain(format!(
                "spherical DtN symbol needs n >= 0, got {n}"
            )));
        }
        let na = n.unsigned_abs() as usize;
        let all = self.dtn_symbols(dim, na, xi)?;
        let mut s = all[na];
        s.order = n;
        Ok(s)
    }

    /// Symbols for orders 0..=nmax in one pass of the ratio recurrence.
    pub fn dtn_symbols(&self, dim: u8, nmax: usize, xi: f64) -> Result<Vec<DtnSymbol>> {
        self.check(nmax, xi)?;
        let mk = |order: usize, value: Complex64, ln_im: f64| DtnSymbol {
            dim,
            order: order as i64,
            xi,
            value,
            ln_im,
        };
        let mut out = Vec::with_capacity(nmax + 1);
        // rho = H_{k+1}/H_k (or h_{k+1}/h_k), Im rho = -exp(s).
        let (mut rho_re, mut s);
        match dim {
            2 => {
                let (j0, y0, j1, y1) = {
                    let (j0, y0, _, _) = bessel_jy(xi, 0.0)?;
                    let (j1, y1, _, _) = bessel_jy(xi, 1.0)?;
                    (j0, y0, j1, y1)
                };
                let h0 = Complex64::new(j0, y0);
                let h1 = Complex64::new(j1, y1);
                let h0n = h0.norm_sqr();
                // Im(H_1/H_0) follows from the Wronskian J_1 Y_0 - J_0 Y_1 = 2/(pi xi).
                rho_re = (h1 * h0.conj()).re / h0n;
                s = (2.0 / (PI * xi)).ln() - h0n.ln();
                let z0 = Complex64::new(-xi * rho_re, xi * s.exp());
                out.push(mk(0, z0, xi.ln() + s));
                for k in 1..=nmax {
                    let m2 = rho_re * rho_re + (2.0 * s).exp();
                    let zre = xi * rho_re / m2 - k as f64;
                    let ln_im = xi.ln() + s - m2.ln();
                    out.push(mk(k, Complex64::new(zre, ln_im.exp()), ln_im));
                    rho_re = 2.0 * k as f64 / xi - rho_re / m2;
                    s -= m2.ln();
                }
            }
            3 => {
                out.push(mk(0, Complex64::new(-1.0, xi), xi.ln()));
                rho_re = 1.0 / xi;
                s = 0.0;
                for k in 1..=nmax {
                    let m2 = rho_re * rho_re + (2.0 * s).exp();
                    let zre = xi * rho_re / m2 - (k + 1) as f64;
                    let ln_im = xi.ln() + s - m2.ln();
                    out.push(mk(k, Complex64::new(zre, ln_im.exp()), ln_im));
                    rho_re = (2 * k + 1) as f64 / xi - rho_re / m2;
                    s -= m2.ln();
                }
            }
            _ => {
                return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
            }
        }
        Ok(out)
    }
}

/// Ratios H_n(x)/H_n(y) (dim 2) or h_n(x)/h_n(y) (dim 3) for n = 0..=nmax.
///
/// Built from forward ratio chains, so the result stays finite where the
/// individual Hankel values would overflow.
pub fn hankel_ratios(dim: u8, nmax: usize, x: f64, y: f64) -> Result<Vec<Complex64>> {
    let lim = Limits::default();
    lim.check(nmax, x)?;
    lim.check(nmax, y)?;
    let (mut ratio, mut rx, mut ry) = match dim {
        2 => {
            let hx0 = lim.hankel_cyl(0, x)?.value;
            let hy0 = lim.hankel_cyl(0, y)?.value;
            let hx1 = lim.hankel_cyl(1, x)?.value;
            let hy1 = lim.hankel_cyl(1, y)?.value;
            (hx0 / hy0, hx1 / hx0, hy1 / hy0)
        }
        3 => (
            Complex64::from_polar(y / x, x - y),
            Complex64::new(1.0 / x, -1.0),
            Complex64::new(1.0 / y, -1.0),
        ),
        d => return Err(Error::Domain(format!("dimension must be 2 or 3, got {d}"))),
    };
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(ratio);
    for k in 1..=nmax {
        ratio *= rx / ry;
        out.push(ratio);
        let c = if dim == 2 { 2 * k } else { 2 * k + 1 } as f64;
        rx = c / x - 1.0 / rx;
        ry = c / y - 1.0 / ry;
    }
    Ok(out)
}

/// Index of a circular (dim 2) or spherical (dim 3) harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub dim: u8,
    pub n: i64,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn circular(n: i64) -> Self {
        HarmonicIndex { dim: 2, n, m: 0 }
    }

    pub fn spherical(n: i64, m: i64) -> Result<Self> {
        if n < 0 || m.abs() > n {
            return Err(Error::Domain(format!(
                "spherical harmonic needs n >= 0 and |m| <= n, got ({n}, {m})"
            )));
        }
        Ok(HarmonicIndex { dim: 3, n, m })
    }
}

/// Fully normalized associated Legendre values for all 0 <= m <= n <= nmax.
///
/// Entry `[n * (n + 1) / 2 + m]` holds
/// sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m(x), without the Condon-Shortley
/// factor (-1)^m.
pub fn legendre_normalized(nmax: usize, x: f64) -> Vec<f64> {
    let idx = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let mut p = vec![0.0; idx(nmax, nmax) + 1];
    let sx = (1.0 - x * x).max(0.0).sqrt();
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=nmax {
        if m > 0 {
            let f = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            p[idx(m, m)] = f * sx * p[idx(m - 1, m - 1)];
        }
        if m < nmax {
            p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[idx(m, m)];
        }
        for n in (m + 2)..=nmax {
            let (nf, mf) = (n as f64, m as f64);
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
            p[idx(n, m)] = a * (x * p[idx(n - 1, m)] - b * p[idx(n - 2, m)]);
        }
    }
    p
}

fn unit_check(direction: &[f64], dim: u8) -> Result<()> {
    if direction.len() != dim as usize {
        return Err(Error::Domain(format!(
            "direction has {} components, expected {dim}",
            direction.len()
        )));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "direction is not a unit vector (norm {norm})"
        )));
    }
    Ok(())
}

/// Y_n(phi) = e^{in phi}/sqrt(2 pi) for dim 2, Y_n^m(theta, phi) for dim 3.
pub fn harmonic_eval(idx: HarmonicIndex, direction: &[f64]) -> Result<Complex64> {
    unit_check(direction, idx.dim)?;
    match idx.dim {
        2 => {
            let phi = direction[1].atan2(direction[0]);
            Ok(circular_harmonic(idx.n, phi))
        }
        3 => {
            if idx.n < 0 || idx.m.abs() > idx.n {
                return Err(Error::Domain(format!(
                    "invalid spherical index ({}, {})",
                    idx.n, idx.m
                )));
            }
            let ct = direction[2].clamp(-1.0, 1.0);
            let phi = direction[1].atan2(direction[0]);
            Ok(spherical_harmonic(idx.n as usize, idx.m, ct, phi))
        }
        d => Err(Error::Domain(format!("dimension must be 2 or 3, got {d}"))),
    }
}

pub fn circular_harmonic(n: i64, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), n as f64 * phi)
}

pub fn spherical_harmonic(n: usize, m: i64, cos_theta: f64, phi: f64) -> Complex64 {
    let ma = m.unsigned_abs() as usize;
    let p = legendre_normalized(n, cos_theta);
    let v = p[n * (n + 1) / 2 + ma];
    Complex64::from_polar(v, m as f64 * phi)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
