//! Run configuration: a flat `key = value` format with dotted section names.
//!
//! ```text
//! # comment
//! schema = 1
//! kappa = 2.0
//! radius = 1.0
//! truncation = 12
//! mesh.obstacle = disk
//! mesh.obstacle_radius = 0.5
//! mesh.h = 0.05
//! nonlinearity.kind = kerr
//! nonlinearity.eps = 4.0
//! nonlinearity.alpha = 1e-4
//! incident.amplitude = 1.0
//! solver.tol = 1e-10
//! output.dir = out
//! ```
//!
//! Parsing is total: every failure is an [`Error::Config`] naming the key,
//! or an [`Error::Parse`] with the line number for lines that are not
//! `key = value` at all.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::assembly::IncidentField;
use crate::boundary;
use crate::error::{Error, Result};
use crate::mesh::{self, Mesh2D, Obstacle};
use crate::solver::{Field, LinearPart, Nonlinearity, SolverConfig};
use crate::WaveContext;

pub const SCHEMA: u32 = 1;

const KNOWN_KEYS: &[&str] = &[
    "schema",
    "dim",
    "kappa",
    "radius",
    "truncation",
    "mesh.file",
    "mesh.obstacle",
    "mesh.obstacle_radius",
    "mesh.polygon",
    "mesh.h",
    "nonlinearity.kind",
    "nonlinearity.eps",
    "nonlinearity.eps_im",
    "nonlinearity.alpha",
    "nonlinearity.gamma",
    "incident.kind",
    "incident.amplitude",
    "incident.amplitude_im",
    "incident.angle",
    "incident.trace",
    "solver.tol",
    "solver.max_iter",
    "solver.damping",
    "solver.seed",
    "solver.linear_part",
    "output.dir",
    "output.solution",
    "output.history",
    "output.trace",
];

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Generate { obstacle: Obstacle, h: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearitySpec {
    Linear { eps: Complex64 },
    Kerr { eps: Complex64, alpha: f64 },
    SaturatedKerr { eps: Complex64, alpha: f64, gamma: f64 },
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        Ok(match *self {
            NonlinearitySpec::Linear { eps } => Nonlinearity::linear(Field::Constant(eps)),
            NonlinearitySpec::Kerr { eps, alpha } => Nonlinearity::kerr(Field::Constant(eps), Field::real(alpha)),
            NonlinearitySpec::SaturatedKerr { eps, alpha, gamma } => {
                Nonlinearity::saturated_kerr(Field::Constant(eps), Field::real(alpha), gamma)?
            }
        })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            NonlinearitySpec::Linear { .. } => "linear",
            NonlinearitySpec::Kerr { .. } => "kerr",
            NonlinearitySpec::SaturatedKerr { .. } => "saturated-kerr",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IncidentSpec {
    PlaneWave { amplitude: Complex64, angle: f64 },
    /// Radiating field given by its trace coefficients on S_R (trace CSV).
    Radiating { trace: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub dir: PathBuf,
    pub solution: bool,
    pub history: bool,
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ctx: WaveContext,
    pub mesh: MeshSource,
    pub nonlinearity: NonlinearitySpec,
    pub incident: IncidentSpec,
    pub solver: SolverConfig,
    pub linear_part: LinearPart,
    pub outputs: Outputs,
    /// SHA-256 of the configuration text, hex encoded.
    pub hash: String,
}

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Splits the text into a key map, rejecting malformed lines, unknown keys
/// and duplicates.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = k.trim();
        let value = v.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(cfg_err(key, "unknown key"));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(cfg_err(key, "duplicate key"));
        }
    }
    Ok(out)
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.raw(key).ok_or_else(|| cfg_err(key, "missing required key"))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let x: f64 = v.parse().map_err(|_| cfg_err(key, format!("`{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(cfg_err(key, format!("`{v}` is not finite")));
                }
                Ok(Some(x))
            }
        }
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.required(key)?;
        Ok(self.f64_opt(key)?.unwrap())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| cfg_err(key, format!("`{v}` is not a nonnegative integer"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(cfg_err(key, format!("`{v}` is not a boolean"))),
        }
    }
}

/// Parses "x1 y1; x2 y2; ..." into polygon vertices.
fn parse_polygon(key: &str, v: &str) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for part in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let nums: Vec<&str> = part.split_whitespace().collect();
        if nums.len() != 2 {
            return Err(cfg_err(key, format!("vertex `{part}` must have two coordinates")));
        }
        let mut p = [0.0; 2];
        for (slot, s) in p.iter_mut().zip(&nums) {
            *slot = s
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| cfg_err(key, format!("`{s}` is not a number")))?;
        }
        out.push(p);
    }
    if out.len() < 3 {
        return Err(cfg_err(key, "a polygon needs at least three vertices"));
    }
    Ok(out)
}

/// SHA-256 of the text, hex encoded.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a configuration. Relative paths are resolved against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let r = Reader { map: parse_pairs(text)? };

    if let Some(s) = r.usize_opt("schema")? {
        if s != SCHEMA as usize {
            return Err(cfg_err("schema", format!("unsupported schema {s}, expected {SCHEMA}")));
        }
    }
    let dim = r.usize_opt("dim")?.unwrap_or(2);
    if dim == 3 {
        return Err(cfg_err("dim", "three-dimensional solves are not supported by the batch front end"));
    }
    if dim != 2 {
        return Err(cfg_err("dim", format!("dimension must be 2, got {dim}")));
    }
    let kappa = r.f64_req("kappa")?;
    if kappa <= 0.0 {
        return Err(cfg_err("kappa", format!("must be positive, got {kappa}")));
    }
    let radius = r.f64_req("radius")?;
    if radius <= 0.0 {
        return Err(cfg_err("radius", format!("must be positive, got {radius}")));
    }
    let order = match r.raw("truncation") {
        None => return Err(cfg_err("truncation", "missing required key")),
        Some("auto") => (kappa * radius).ceil() as usize + 10,
        Some(_) => r.usize_opt("truncation")?.unwrap(),
    };
    let ctx = WaveContext::new(2, kappa, radius, order)?;

    let mesh = if let Some(file) = r.raw("mesh.file") {
        for k in ["mesh.obstacle", "mesh.obstacle_radius", "mesh.polygon", "mesh.h"] {
            if r.raw(k).is_some() {
                return Err(cfg_err(k, "cannot be combined with mesh.file"));
            }
        }
        MeshSource::File(base.join(file))
    } else {
        let h = r.f64_req("mesh.h")?;
        if h <= 0.0 {
            return Err(cfg_err("mesh.h", format!("must be positive, got {h}")));
        }
        let obstacle = match r.required("mesh.obstacle")? {
            "disk" => {
                let a = r.f64_req("mesh.obstacle_radius")?;
                if a <= 0.0 {
                    return Err(cfg_err("mesh.obstacle_radius", format!("must be positive, got {a}")));
                }
                if a >= radius {
                    return Err(cfg_err(
                        "mesh.obstacle_radius",
                        format!("obstacle radius {a} must be smaller than radius {radius}"),
                    ));
                }
                Obstacle::Disk { radius: a }
            }
            "polygon" => {
                let vertices = parse_polygon("mesh.polygon", r.required("mesh.polygon")?)?;
                let rho = vertices.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
                if rho >= radius {
                    return Err(cfg_err(
                        "mesh.polygon",
                        format!("polygon reaches |x| = {rho}, not inside radius {radius}"),
                    ));
                }
                Obstacle::Polygon { vertices }
            }
            other => return Err(cfg_err("mesh.obstacle", format!("unknown obstacle `{other}` (disk, polygon)"))),
        };
        MeshSource::Generate { obstacle, h }
    };

    let eps = Complex64::new(r.f64_or("nonlinearity.eps", 1.0)?, r.f64_or("nonlinearity.eps_im", 0.0)?);
    if eps.im < 0.0 {
        return Err(cfg_err("nonlinearity.eps_im", "imaginary part must be nonnegative"));
    }
    let kind = r.raw("nonlinearity.kind").unwrap_or("linear");
    let nonlinearity = match kind {
        "linear" => {
            for k in ["nonlinearity.alpha", "nonlinearity.gamma"] {
                if r.raw(k).is_some() {
                    return Err(cfg_err(k, "not used by a linear medium"));
                }
            }
            NonlinearitySpec::Linear { eps }
        }
        "kerr" => {
            if r.raw("nonlinearity.gamma").is_some() {
                return Err(cfg_err("nonlinearity.gamma", "only used by saturated-kerr"));
            }
            NonlinearitySpec::Kerr {
                eps,
                alpha: r.f64_req("nonlinearity.alpha")?,
            }
        }
        "saturated-kerr" => {
            let gamma = r.f64_req("nonlinearity.gamma")?;
            if gamma <= 0.0 {
                return Err(cfg_err("nonlinearity.gamma", format!("must be positive, got {gamma}")));
            }
            NonlinearitySpec::SaturatedKerr {
                eps,
                alpha: r.f64_req("nonlinearity.alpha")?,
                gamma,
            }
        }
        other => {
            return Err(cfg_err(
                "nonlinearity.kind",
                format!("unknown kind `{other}` (linear, kerr, saturated-kerr)"),
            ))
        }
    };

    let incident = match r.raw("incident.kind").unwrap_or("plane-wave") {
        "plane-wave" => {
            if r.raw("incident.trace").is_some() {
                return Err(cfg_err("incident.trace", "only used by a radiating incident field"));
            }
            let amplitude = Complex64::new(
                r.f64_or("incident.amplitude", 1.0)?,
                r.f64_or("incident.amplitude_im", 0.0)?,
            );
            let angle = r.f64_or("incident.angle", 0.0)?;
            if angle.abs() >= std::f64::consts::PI {
                return Err(cfg_err("incident.angle", format!("must lie in (-pi, pi), got {angle}")));
            }
            IncidentSpec::PlaneWave { amplitude, angle }
        }
        "radiating" => {
            for k in ["incident.amplitude", "incident.amplitude_im", "incident.angle"] {
                if r.raw(k).is_some() {
                    return Err(cfg_err(k, "only used by a plane wave"));
                }
            }
            IncidentSpec::Radiating {
                trace: base.join(r.required("incident.trace")?),
            }
        }
        other => {
            return Err(cfg_err(
                "incident.kind",
                format!("unknown kind `{other}` (plane-wave, radiating)"),
            ))
        }
    };

    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        tol: r.f64_or("solver.tol", defaults.tol)?,
        max_iter: r.usize_opt("solver.max_iter")?.unwrap_or(defaults.max_iter),
        damping: r.f64_or("solver.damping", defaults.damping)?,
        seed: r.usize_opt("solver.seed")?.map(|s| s as u64).unwrap_or(defaults.seed),
    };
    solver.validate()?;
    let linear_part = match r.raw("solver.linear_part").unwrap_or("operator") {
        "operator" => LinearPart::Operator,
        "rhs" => LinearPart::Rhs,
        other => {
            return Err(cfg_err(
                "solver.linear_part",
                format!("unknown value `{other}` (operator, rhs)"),
            ))
        }
    };

    let outputs = Outputs {
        dir: base.join(r.raw("output.dir").unwrap_or("out")),
        solution: r.bool_or("output.solution", true)?,
        history: r.bool_or("output.history", true)?,
        trace: r.bool_or("output.trace", true)?,
    };

    Ok(RunConfig {
        ctx,
        mesh,
        nonlinearity,
        incident,
        solver,
        linear_part,
        outputs,
        hash: config_hash(text),
    })
}

/// Reads and parses a configuration file; relative paths in it are
/// resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err("config", format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

impl RunConfig {
    /// Loads or generates the mesh and checks it against the context.
    pub fn build_mesh(&self) -> Result<Mesh2D> {
        let m = match &self.mesh {
            MeshSource::File(p) => mesh::import_mesh(p)?,
            MeshSource::Generate { obstacle, h } => mesh::mesh_disk(self.ctx.radius, obstacle, *h)?,
        };
        if (m.radius - self.ctx.radius).abs() > 1e-9 * self.ctx.radius {
            return Err(cfg_err(
                "radius",
                format!("mesh boundary radius {} differs from radius {}", m.radius, self.ctx.radius),
            ));
        }
        Ok(m)
    }

    pub fn build_incident(&self) -> Result<IncidentField> {
        match &self.incident {
            IncidentSpec::PlaneWave { amplitude, angle } => IncidentField::plane_wave(*amplitude, *angle),
            IncidentSpec::Radiating { trace } => {
                let text = std::fs::read_to_string(trace)
                    .map_err(|e| cfg_err("incident.trace", format!("{}: {e}", trace.display())))?;
                let (t, kappa) = boundary::parse_trace_csv(&text)?;
                if t.dim != 2 || (t.radius - self.ctx.radius).abs() > 1e-12 * self.ctx.radius {
                    return Err(cfg_err("incident.trace", "trace must be two-dimensional on the circle of radius R"));
                }
                if (kappa - self.ctx.kappa).abs() > 1e-12 * self.ctx.kappa {
                    return Err(cfg_err("incident.trace", format!("trace kappa {kappa} differs from kappa")));
                }
                Ok(IncidentField::RadiatingSeries(t))
            }
        }
    }
}

/// Parses a list of truncation orders: comma separated integers and
/// inclusive ranges `a..b`, e.g. `2,4,6..10`. Duplicates are removed and the
/// result is sorted.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let err = |m: String| cfg_err("n-list", m);
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(err("empty entry".into()));
        }
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| err(format!("bad range start in `{part}`")))?;
            let b: usize = b.trim().parse().map_err(|_| err(format!("bad range end in `{part}`")))?;
            if a > b {
                return Err(err(format!("empty range `{part}`")));
            }
            if b - a > 10_000 {
                return Err(err(format!("range `{part}` is too long")));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| err(format!("`{part}` is not a nonnegative integer")))?);
        }
        if out.len() > 10_000 {
            return Err(err("too many entries".into()));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
