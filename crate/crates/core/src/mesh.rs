//! Triangulations of the disk B_R with a tagged obstacle region and an
//! ordered ring of boundary nodes on S_R.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const MESH_MAGIC: &str = "helmholtz-dtn-mesh v1";

/// Region a triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Obstacle,
    Annulus,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Obstacle => "obstacle",
            Region::Annulus => "annulus",
        }
    }
}

/// Shape of the obstacle Omega.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// Polygon with counterclockwise vertices, star-shaped with respect to
    /// the origin (vertex angles strictly increasing around the origin).
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub radius: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<Region>,
    /// Boundary nodes on S_R sorted by angle.
    pub ring: Vec<usize>,
    /// Angles of the ring nodes in [0, 2 pi), strictly increasing.
    pub ring_angles: Vec<f64>,
}

fn angle_of(p: [f64; 2]) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl Mesh2D {
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.tags[t] == region)
            .map(|t| self.area(t))
            .sum()
    }

    /// Longest edge in the mesh.
    pub fn h_max(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| dist(self.nodes[i], self.nodes[j]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = 180.0f64;
        for &[a, b, c] in &self.triangles {
            let p = [self.nodes[a], self.nodes[b], self.nodes[c]];
            for k in 0..3 {
                let o = p[k];
                let u = [p[(k + 1) % 3][0] - o[0], p[(k + 1) % 3][1] - o[1]];
                let v = [p[(k + 2) % 3][0] - o[0], p[(k + 2) % 3][1] - o[1]];
                let cos = (u[0] * v[0] + u[1] * v[1])
                    / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
                min = min.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        min
    }

    /// Checks every structural invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        let r = self.radius;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Mesh(format!("radius must be positive, got {r}")));
        }
        if self.tags.len() != self.triangles.len() {
            return Err(Error::Mesh("one region tag per triangle required".into()));
        }
        for (k, p) in self.nodes.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::Mesh(format!("node {k} has non-finite coordinates")));
            }
        }
        let nn = self.nodes.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nn) {
                return Err(Error::Mesh(format!(
                    "triangle {t} references node {bad} but only {nn} nodes exist"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a node")));
            }
            let a = self.area(t);
            if a <= 0.0 {
                return Err(Error::Mesh(format!(
                    "orientation: triangle {t} is not counterclockwise (signed area {a:e})"
                )));
            }
            if a <= 1e-14 * r * r {
                return Err(Error::Mesh(format!(
                    "degenerate triangle {t} (area {a:e})"
                )));
            }
        }
        if self.ring.len() < 3 {
            return Err(Error::Mesh("boundary ring needs at least 3 nodes".into()));
        }
        for &k in &self.ring {
            if k >= nn {
                return Err(Error::Mesh(format!("ring references missing node {k}")));
            }
            let p = self.nodes[k];
            let dev = (p[0].hypot(p[1]) - r).abs();
            if dev > 1e-12 * r {
                return Err(Error::Mesh(format!(
                    "boundary node {k} is off the circle |x| = {r} by {dev:e}"
                )));
            }
        }
        if self.ring_angles.len() != self.ring.len() {
            return Err(Error::Mesh("one angle per ring node required".into()));
        }
        for w in self.ring_angles.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Mesh("ring angles are not strictly increasing".into()));
            }
        }
        let l = self.ring_angles.len();
        let mean_gap = 2.0 * PI / l as f64;
        let mut max_gap: f64 = self.ring_angles[0] + 2.0 * PI - self.ring_angles[l - 1];
        for w in self.ring_angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        if max_gap > 3.0 * mean_gap {
            return Err(Error::Mesh(format!(
                "ring coverage: angular gap {max_gap:.3e} exceeds three times the mean gap {mean_gap:.3e}"
            )));
        }

        // Conformity: interior edges used twice, boundary edges once and only on S_R.
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                *edges.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        let mut on_ring = vec![false; nn];
        for &k in &self.ring {
            on_ring[k] = true;
        }
        let mut boundary_nodes = vec![false; nn];
        let mut sorted: Vec<_> = edges.into_iter().collect();
        sorted.sort_unstable();
        for ((i, j), count) in sorted {
            match count {
                2 => {}
                1 => {
                    if !(on_ring[i] && on_ring[j]) {
                        return Err(Error::Mesh(format!(
                            "conformity: boundary edge ({i}, {j}) does not lie on S_R"
                        )));
                    }
                    boundary_nodes[i] = true;
                    boundary_nodes[j] = true;
                }
                _ => {
                    return Err(Error::Mesh(format!(
                        "conformity: edge ({i}, {j}) is shared by {count} triangles"
                    )));
                }
            }
        }
        if let Some(&k) = self.ring.iter().find(|&&k| !boundary_nodes[k]) {
            return Err(Error::Mesh(format!(
                "ring node {k} is not on a boundary edge"
            )));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.tags[t] == Region::Obstacle {
                if let Some(&k) = tri.iter().find(|&&k| on_ring[k]) {
                    return Err(Error::Mesh(format!(
                        "obstacle triangle {t} touches boundary node {k}; the obstacle must lie strictly inside B_R"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serializes to the plain-text mesh format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MESH_MAGIC}").unwrap();
        writeln!(s, "nodes {}", self.nodes.len()).unwrap();
        for p in &self.nodes {
            writeln!(s, "{:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for (t, tri) in self.triangles.iter().enumerate() {
            writeln!(s, "{} {} {} {}", tri[0], tri[1], tri[2], self.tags[t].name()).unwrap();
        }
        writeln!(s, "ring {}", self.ring.len()).unwrap();
        for k in &self.ring {
            writeln!(s, "{k}").unwrap();
        }
        s
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Reads and validates a mesh file.
pub fn import_mesh(path: &Path) -> Result<Mesh2D> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Parses the plain-text mesh format, snaps boundary nodes onto S_R and
/// validates all invariants.
///
/// The radius is the median distance of the ring nodes from the origin.
/// Ring nodes within 1e-9 R of the circle are projected onto it; larger
/// deviations are rejected.
pub fn parse_mesh(text: &str) -> Result<Mesh2D> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| perr(0, format!("unexpected end of file, expected {what}")))
    };

    let (ln, first) = next("header")?;
    if first != MESH_MAGIC {
        return Err(perr(ln, format!("expected `{MESH_MAGIC}`")));
    }
    let section = |ln: usize, line: &str, key: &str| -> Result<usize> {
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(perr(ln, format!("expected `{key} <count>`")));
        }
        let count = parts
            .next()
            .ok_or_else(|| perr(ln, format!("missing count after `{key}`")))?
            .parse::<usize>()
            .map_err(|e| perr(ln, format!("bad count: {e}")))?;
        if parts.next().is_some() {
            return Err(perr(ln, "trailing tokens".into()));
        }
        Ok(count)
    };
    let idx = |ln: usize, s: &str| s.parse::<usize>().map_err(|e| perr(ln, format!("bad index `{s}`: {e}")));

    let (ln, l) = next("nodes section")?;
    let k = section(ln, l, "nodes")?;
    let mut nodes = Vec::new();
    for _ in 0..k {
        let (ln, l) = next("node coordinates")?;
        let v: Vec<&str> = l.split_whitespace().collect();
        if v.len() != 2 {
            return Err(perr(ln, "node line needs `x y`".into()));
        }
        let mut p = [0.0; 2];
        for (c, s) in p.iter_mut().zip(&v) {
            *c = s.parse::<f64>().map_err(|e| perr(ln, format!("bad coordinate `{s}`: {e}")))?;
            if !c.is_finite() {
                return Err(perr(ln, format!("non-finite coordinate `{s}`")));
            }
        }
        nodes.push(p);
    }

    let (ln, l) = next("triangles section")?;
    let m = section(ln, l, "triangles")?;
    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    for _ in 0..m {
        let (ln, l) = next("triangle")?;
        let v: Vec<&str> = l.split_whitespace().collect();
        if v.len() != 4 {
            return Err(perr(ln, "triangle line needs `i j k tag`".into()));
        }
        triangles.push([idx(ln, v[0])?, idx(ln, v[1])?, idx(ln, v[2])?]);
        tags.push(match v[3] {
            "obstacle" | "1" => Region::Obstacle,
            "annulus" | "0" => Region::Annulus,
            other => return Err(perr(ln, format!("unknown region tag `{other}`"))),
        });
    }

    let (ln, l) = next("ring section")?;
    let count = section(ln, l, "ring")?;
    let mut ring = Vec::new();
    for _ in 0..count {
        let (ln, l) = next("ring index")?;
        let i = idx(ln, l)?;
        if i >= nodes.len() {
            return Err(Error::Mesh(format!("ring references missing node {i}")));
        }
        ring.push(i);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "unexpected content after ring section".into()));
    }
    if ring.is_empty() {
        return Err(Error::Mesh("boundary ring is empty".into()));
    }

    let mut radii: Vec<f64> = ring.iter().map(|&i| nodes[i][0].hypot(nodes[i][1])).collect();
    radii.sort_by(f64::total_cmp);
    let radius = radii[radii.len() / 2];
    for &i in &ring {
        let p = nodes[i];
        let r = p[0].hypot(p[1]);
        let dev = (r - radius).abs();
        if dev > 1e-9 * radius {
            return Err(Error::Mesh(format!(
                "boundary node {i} at ({}, {}) is off the circle |x| = {radius} by {dev:e}",
                p[0], p[1]
            )));
        }
        if dev > 1e-12 * radius {
            nodes[i] = [p[0] * radius / r, p[1] * radius / r];
        }
    }
    let mesh = finish_ring(radius, nodes, triangles, tags, ring);
    mesh.validate()?;
    Ok(mesh)
}

fn finish_ring(
    radius: f64,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<Region>,
    ring: Vec<usize>,
) -> Mesh2D {
    let mut pairs: Vec<(f64, usize)> = ring.iter().map(|&i| (angle_of(nodes[i]), i)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Mesh2D {
        radius,
        ring: pairs.iter().map(|p| p.1).collect(),
        ring_angles: pairs.iter().map(|p| p.0).collect(),
        nodes,
        triangles,
        tags,
    }
}

/// Radial distance of the obstacle boundary in direction phi.
fn boundary_radius(obstacle: &Obstacle, phi: f64) -> f64 {
    match obstacle {
        Obstacle::Disk { radius } => *radius,
        Obstacle::Polygon { vertices } => {
            let d = [phi.cos(), phi.sin()];
            let mut best = f64::INFINITY;
            let n = vertices.len();
            for k in 0..n {
                let a = vertices[k];
                let b = vertices[(k + 1) % n];
                let e = [b[0] - a[0], b[1] - a[1]];
                let den = d[0] * e[1] - d[1] * e[0];
                if den.abs() < 1e-300 {
                    continue;
                }
                let t = (a[0] * e[1] - a[1] * e[0]) / den;
                let s = (a[0] * d[1] - a[1] * d[0]) / den;
                if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                    best = best.min(t);
                }
            }
            best
        }
    }
}

fn check_polygon(vertices: &[[f64; 2]]) -> Result<()> {
    if vertices.len() < 3 {
        return Err(Error::Domain("polygon obstacle needs at least 3 vertices".into()));
    }
    let n = vertices.len();
    let mut turn = 0.0;
    for k in 0..n {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        if !(a[0].is_finite() && a[1].is_finite()) {
            return Err(Error::Domain(format!("polygon vertex {k} is not finite")));
        }
        let cross = a[0] * b[1] - a[1] * b[0];
        if cross <= 0.0 {
            return Err(Error::Domain(format!(
                "polygon must be counterclockwise and star-shaped about the origin (edge {k} fails)"
            )));
        }
        let mut step = angle_of(b) - angle_of(a);
        if step <= 0.0 {
            step += 2.0 * PI;
        }
        turn += step;
    }
    if (turn - 2.0 * PI).abs() > 1e-9 {
        return Err(Error::Domain(
            "polygon must wind exactly once around the origin".into(),
        ));
    }
    Ok(())
}

struct Builder {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<Region>,
}

impl Builder {
    fn push_tri(&mut self, mut tri: [usize; 3], tag: Region) {
        let a = signed_area(self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]);
        if a < 0.0 {
            tri.swap(1, 2);
        }
        self.triangles.push(tri);
        self.tags.push(tag);
    }

    /// Adds a ring of nodes (angles ascending in [0, 2 pi)) and returns
    /// (node index, angle) pairs.
    fn add_ring(&mut self, pts: &[[f64; 2]]) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = pts
            .iter()
            .map(|&p| {
                self.nodes.push(p);
                (self.nodes.len() - 1, angle_of(p))
            })
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        out
    }

    /// Triangulates the band between two closed rings, choosing the shorter
    /// diagonal at each step.
    fn stitch(&mut self, inner: &[(usize, f64)], outer: &[(usize, f64)], tag: Region) {
        let p = inner.len();
        let q = outer.len();
        let a0 = inner[0].1;
        // Start the outer ring at the node angularly closest to inner[0].
        let wrap = |x: f64| {
            let mut d = x - a0;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d <= -PI {
                d += 2.0 * PI;
            }
            d
        };
        let j0 = (0..q)
            .min_by(|&x, &y| wrap(outer[x].1).abs().total_cmp(&wrap(outer[y].1).abs()))
            .unwrap();
        let a = |i: usize| inner[i % p].0;
        let b = |j: usize| outer[(j0 + j) % q].0;
        let (mut i, mut j) = (0, 0);
        while i < p || j < q {
            let advance_outer = if i == p {
                true
            } else if j == q {
                false
            } else {
                let d_outer = dist(self.nodes[a(i)], self.nodes[b(j + 1)]);
                let d_inner = dist(self.nodes[a(i + 1)], self.nodes[b(j)]);
                // Exact ties (congruent quads) always split the same way so
                // that rotationally symmetric rings give symmetric bands.
                d_outer < d_inner - 1e-10 * (d_outer + d_inner)
            };
            if advance_outer {
                self.push_tri([a(i), b(j), b(j + 1)], tag);
                j += 1;
            } else {
                self.push_tri([a(i), b(j), a(i + 1)], tag);
                i += 1;
            }
        }
    }
}

const CURVE_SAMPLES: usize = 4096;

/// Length of the closed polar curve r(phi).
fn curve_length(r: &impl Fn(f64) -> f64) -> f64 {
    let pt = |k: usize| {
        let phi = 2.0 * PI * k as f64 / CURVE_SAMPLES as f64;
        let rr = r(phi);
        [rr * phi.cos(), rr * phi.sin()]
    };
    (0..CURVE_SAMPLES).map(|k| dist(pt(k), pt(k + 1))).sum()
}

/// Angles of n points equally spaced in arc length along r(phi), starting
/// at phi = 0. Disks use exactly uniform angles.
fn ring_angles(r: &impl Fn(f64) -> f64, n: usize, uniform: bool) -> Vec<f64> {
    if uniform {
        return (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    }
    let pt = |phi: f64| {
        let rr = r(phi);
        [rr * phi.cos(), rr * phi.sin()]
    };
    let dphi = 2.0 * PI / CURVE_SAMPLES as f64;
    let mut cum = vec![0.0; CURVE_SAMPLES + 1];
    for k in 0..CURVE_SAMPLES {
        cum[k + 1] = cum[k] + dist(pt(k as f64 * dphi), pt((k + 1) as f64 * dphi));
    }
    let total = cum[CURVE_SAMPLES];
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let target = total * j as f64 / n as f64;
        while cum[k + 1] < target {
            k += 1;
        }
        let frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
        out.push((k as f64 + frac) * dphi);
    }
    out
}

fn ring_count(length: f64, h: f64) -> usize {
    ((length / h).ceil() as usize).max(6)
}

/// Node count for a circular ring on the halving ladder top, top/2, top/4, ...
/// Rings whose counts divide each other and share the node at angle 0 keep
/// the mesh invariant under rotations by 2 pi / count, which keeps spurious
/// high harmonics out of the discrete boundary trace. Rings too small for the
/// ladder fall back to the plain count.
fn ladder_count(length: f64, h: f64, top: usize) -> usize {
    let n = ring_count(length, h);
    let mut c = top;
    while c.is_multiple_of(2) && c / 2 >= n {
        c /= 2;
    }
    if c >= n && c <= 2 * n {
        c
    } else {
        n
    }
}

/// Generates a ring-structured triangulation of B_R around the obstacle.
///
/// The obstacle boundary is an exact ring of the mesh, so region tags only
/// change across edges on that ring. Generated meshes must pass a minimum
/// angle of 20 degrees and have no edge longer than 1.5 h.
pub fn mesh_disk(radius: f64, obstacle: &Obstacle, h: f64) -> Result<Mesh2D> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("mesh size must be positive, got {h}")));
    }
    let top = ring_count(2.0 * PI * radius, h).div_ceil(8) * 8;
    let is_disk = matches!(obstacle, Obstacle::Disk { .. });
    // Obstacle boundary points, ordered by angle.
    let boundary: Vec<[f64; 2]> = match obstacle {
        Obstacle::Disk { radius: a } => {
            if !(*a > 0.0) || !a.is_finite() {
                return Err(Error::Domain(format!("obstacle radius must be positive, got {a}")));
            }
            let n = ladder_count(2.0 * PI * a, h, top);
            (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    [a * t.cos(), a * t.sin()]
                })
                .collect()
        }
        Obstacle::Polygon { vertices } => {
            check_polygon(vertices)?;
            let n = vertices.len();
            let mut pts = Vec::new();
            for k in 0..n {
                let a = vertices[k];
                let b = vertices[(k + 1) % n];
                let segs = ((dist(a, b) / h).ceil() as usize).max(1);
                for s in 0..segs {
                    let t = s as f64 / segs as f64;
                    pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            pts
        }
    };
    let rho_max = boundary.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let rho_min = (0..720)
        .map(|k| boundary_radius(obstacle, 2.0 * PI * k as f64 / 720.0))
        .fold(f64::INFINITY, f64::min);
    if rho_max >= radius {
        return Err(Error::Domain(format!(
            "obstacle reaches |x| = {rho_max}, which is not inside B_R with R = {radius}"
        )));
    }
    if radius - rho_max < h {
        return Err(Error::Domain(format!(
            "clearance R - max|x| = {} is smaller than h = {h}",
            radius - rho_max
        )));
    }
    if h > rho_min {
        return Err(Error::Domain(format!(
            "h = {h} is too large to resolve an obstacle of inner radius {rho_min}"
        )));
    }
    let mut b = Builder {
        nodes: vec![[0.0, 0.0]],
        triangles: Vec::new(),
        tags: Vec::new(),
    };
    let k_in = (rho_max / h - 1e-9).ceil().max(1.0) as usize;
    let k_out = ((radius - rho_min) / h - 1e-9).ceil().max(1.0) as usize;

    let mut prev: Option<Vec<(usize, f64)>> = None;
    for k in 1..=k_in {
        let pts: Vec<[f64; 2]> = if k == k_in {
            boundary.clone()
        } else {
            let s = k as f64 / k_in as f64;
            let curve = |t: f64| s * boundary_radius(obstacle, t);
            let n = if is_disk {
                ladder_count(curve_length(&curve), h, top)
            } else {
                ring_count(curve_length(&curve), h)
            };
            ring_angles(&curve, n, is_disk)
                .into_iter()
                .map(|t| {
                    let r = curve(t);
                    [r * t.cos(), r * t.sin()]
                })
                .collect()
        };
        let ring = b.add_ring(&pts);
        match &prev {
            None => {
                for j in 0..ring.len() {
                    let next = ring[(j + 1) % ring.len()].0;
                    b.push_tri([0, ring[j].0, next], Region::Obstacle);
                }
            }
            Some(inner) => b.stitch(inner, &ring, Region::Obstacle),
        }
        prev = Some(ring);
    }
    for k in 1..=k_out {
        let t = k as f64 / k_out as f64;
        let curve = |phi: f64| (1.0 - t) * boundary_radius(obstacle, phi) + t * radius;
        let n = if is_disk || k == k_out {
            ladder_count(curve_length(&curve), h, top)
        } else {
            ring_count(curve_length(&curve), h)
        };
        let pts: Vec<[f64; 2]> = if k == k_out {
            (0..n)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / n as f64;
                    [radius * phi.cos(), radius * phi.sin()]
                })
                .collect()
        } else {
            ring_angles(&curve, n, is_disk)
                .into_iter()
                .map(|phi| {
                    let r = curve(phi);
                    [r * phi.cos(), r * phi.sin()]
                })
                .collect()
        };
        let ring = b.add_ring(&pts);
        b.stitch(prev.as_ref().unwrap(), &ring, Region::Annulus);
        prev = Some(ring);
    }
    let outer = prev.unwrap();
    let ring: Vec<usize> = outer.iter().map(|p| p.0).collect();
    let mesh = finish_ring(radius, b.nodes, b.triangles, b.tags, ring);
    mesh.validate()?;
    let min_angle = mesh.min_angle_deg();
    if min_angle < 20.0 {
        return Err(Error::Mesh(format!(
            "quality gate: minimum angle {min_angle:.2} degrees is below 20"
        )));
    }
    let hm = mesh.h_max();
    if hm > 1.5 * h {
        return Err(Error::Mesh(format!(
            "quality gate: longest edge {hm:.4} exceeds 1.5 h = {:.4}",
            1.5 * h
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_mesh_structure() {
        let m = mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.1).unwrap();
        assert!(m.tags.contains(&Region::Obstacle));
        assert!(m.tags.contains(&Region::Annulus));
        assert!(m.ring_angles.windows(2).all(|w| w[1] > w[0]));
        assert!(m.min_angle_deg() >= 20.0);
    }

    #[test]
    fn obstacle_area_converges() {
        let m = mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05).unwrap();
        let exact = PI * 0.25;
        assert!((m.region_area(Region::Obstacle) - exact).abs() < 0.02 * exact);
        let total = m.region_area(Region::Obstacle) + m.region_area(Region::Annulus);
        assert!((total - PI).abs() < 0.02 * PI);
    }

    #[test]
    fn degenerate_requests_fail() {
        assert!(mesh_disk(1.0, &Obstacle::Disk { radius: 1.0 }, 0.1).is_err());
        assert!(mesh_disk(1.0, &Obstacle::Disk { radius: 0.95 }, 0.1).is_err());
        assert!(mesh_disk(1.0, &Obstacle::Disk { radius: 0.05 }, 0.1).is_err());
    }

    #[test]
    fn polygon_obstacle() {
        let sq = Obstacle::Polygon {
            vertices: vec![[0.4, -0.4], [0.4, 0.4], [-0.4, 0.4], [-0.4, -0.4]],
        };
        let m = mesh_disk(1.0, &sq, 0.08).unwrap();
        let a = m.region_area(Region::Obstacle);
        assert!((a - 0.64).abs() < 1e-12, "area {a}");
        let cw = Obstacle::Polygon {
            vertices: vec![[0.4, -0.4], [-0.4, -0.4], [-0.4, 0.4], [0.4, 0.4]],
        };
        assert!(mesh_disk(1.0, &cw, 0.08).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let m = mesh_disk(1.3, &Obstacle::Disk { radius: 0.6 }, 0.15).unwrap();
        let back = parse_mesh(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn off_circle_node_is_named() {
        let m = mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.2).unwrap();
        let mut bad = m.clone();
        let k = bad.ring[3];
        bad.nodes[k][0] *= 1.001;
        let err = parse_mesh(&bad.to_text()).unwrap_err().to_string();
        assert!(err.contains(&format!("boundary node {k}")), "{err}");
    }
}
