//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use helmholtz_dtn::assembly::{self, IncidentField};
use helmholtz_dtn::boundary::{self, FourierTrace};
use helmholtz_dtn::cli;
use helmholtz_dtn::mesh::{self, Obstacle};
use helmholtz_dtn::solver::{self, Field, LinearPart, Nonlinearity, SolverConfig};
use helmholtz_dtn::verify::{self, DiskOracle, Problem};
use helmholtz_dtn::{specfun, Result, WaveContext};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn all_pass(rows: &[verify::CheckRow]) -> (bool, usize, String) {
    let failed: Vec<&verify::CheckRow> = rows.iter().filter(|r| !r.passed).collect();
    let first = failed.first().map(|r| format!(" first failure: {} = {:e}", r.name, r.value)).unwrap_or_default();
    (failed.is_empty(), rows.len(), first)
}

fn c1_symbol_bands() -> Result<Outcome> {
    let start = Instant::now();
    let rows = verify::symbol_band_suite()?;
    let secs = start.elapsed().as_secs_f64();
    let (ok, n, first) = all_pass(&rows);
    outcome(ok && secs < 10.0, format!("{n} (d, xi) rows, slack 1e-12, {secs:.2} s (limit 10 s){first}"))
}

fn c2_diagonality() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut max_re = f64::NEG_INFINITY;
    for case in 0..100 {
        let dim = if case % 2 == 0 { 2 } else { 3 };
        let radius = 0.5 + rng.random_range(0.0..2.0);
        let kappa = rng.random_range(0.1..20.0);
        let order = rng.random_range(0..16usize);
        let ctx = WaveContext::new(dim, kappa, radius, order)?;
        let len = boundary::trace_len(dim, order);
        let coeffs = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let v = FourierTrace::from_coeffs(dim, radius, order, coeffs)?;
        let pairing = boundary::l2_pairing(&boundary::apply_truncated_dtn(&v, &ctx)?, &v)?;
        let mut expected = Complex64::new(0.0, 0.0);
        for (idx, c) in v.indices().iter().zip(&v.coeffs) {
            expected += specfun::dtn_symbol(dim, idx.n, kappa * radius)?.value * c.norm_sqr();
        }
        if dim == 3 {
            expected *= radius;
        }
        worst = worst.max((pairing - expected).norm() / expected.norm());
        max_re = max_re.max(pairing.re);
    }
    outcome(
        worst < 1e-10 && max_re <= 0.0,
        format!("max rel error {worst:.3e} (limit 1e-10), max Re pairing {max_re:.3e} (must be <= 0)"),
    )
}

fn c3_garding() -> Result<Outcome> {
    let start = Instant::now();
    let rows = verify::garding_suite(3, 12)?;
    let secs = start.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let (ok, n, first) = all_pass(&rows);
    outcome(
        ok && secs < 60.0,
        format!(
            "{} vectors over {n} cases, worst normalized defect {worst:.3e} (limit 1e-10), {secs:.2} s (limit 60 s){first}",
            12 * n
        ),
    )
}

fn c4_oracle() -> Result<Outcome> {
    let start = Instant::now();
    let o = DiskOracle::new(0.5, Complex64::new(2.25, 0.0), one(), 0.0, 2.0, 1.0)?;
    let ctx = WaveContext::new(2, 2.0, 1.0, 12)?;
    let meshes = [0.1, 0.05]
        .iter()
        .map(|&h| Ok((h, mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, h)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows = verify::fem_vs_oracle(&meshes, &o, &ctx)?;
    let slope = verify::last_slope(&rows, false).unwrap_or(f64::NAN);
    let secs = start.elapsed().as_secs_f64();
    let err = rows[1].rel_l2;
    outcome(
        err <= 0.02 && (1.7..=2.3).contains(&slope) && secs < 120.0,
        format!("rel L2 at h=0.05 {err:.4e} (limit 2e-2), L2 slope {slope:.3} (range [1.7, 2.3]), {secs:.2} s (limit 120 s)"),
    )
}

fn linear_problem() -> Result<Problem> {
    Ok(Problem {
        mesh: mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05)?,
        kappa: 2.0,
        nl: Nonlinearity::linear(Field::real(2.25)),
        inc: IncidentField::plane_wave(one(), 0.0)?,
        solver: SolverConfig::default(),
        linear_part: LinearPart::Operator,
    })
}

fn c5_truncation() -> Result<Outcome> {
    let p = linear_problem()?;
    let orders: Vec<usize> = (7..=17).collect();
    let (n_ref, rows) = verify::convergence_in_n(&p, &orders)?;
    let monotone = rows.windows(2).all(|w| w[1].relative <= w[0].relative + 1e-12);
    let last = rows.last().map(|r| r.relative).unwrap_or(f64::NAN);

    let n0 = 9usize;
    let ctx = WaveContext::new(2, 2.0, 1.0, 30)?;
    let mut w = FourierTrace::zeros(2, 1.0, 30)?;
    for n in -(n0 as i64)..=n0 as i64 {
        w.set(n, 0, Complex64::new(1.0, -0.5 * n as f64))?;
    }
    let floor = verify::truncation_sweep_trace(&w, &ctx, &(0..=20).collect::<Vec<_>>())?;
    let floor_ok = floor.iter().all(|&(n, e)| if n >= n0 { e == 0.0 } else { e > 1e-3 });
    outcome(
        monotone && last < 1e-8 && floor_ok,
        format!(
            "N=7..17 vs N_ref={n_ref}: monotone={monotone}, relative error at N=17 {last:.3e} (limit 1e-8); \
             band-limited data (bandwidth {n0}) exact from N={n0}: {floor_ok}"
        ),
    )
}

struct KerrFixture {
    mesh: mesh::Mesh2D,
    ctx: WaveContext,
}

impl KerrFixture {
    fn new() -> Result<Self> {
        Ok(Self {
            mesh: mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05)?,
            ctx: WaveContext::new(2, 6.0, 1.0, 16)?,
        })
    }

    fn solve(&self, nl: &Nonlinearity, amp: f64, cfg: &SolverConfig) -> Result<solver::Solution> {
        let sys = assembly::assemble(&self.mesh, &self.ctx, nl, LinearPart::Operator)?;
        let inc = IncidentField::plane_wave(Complex64::new(amp, 0.0), 0.0)?;
        solver::solve_fixed_point(&sys, &self.mesh, nl, &inc, cfg)
    }
}

fn c6_fixed_point() -> Result<Outcome> {
    let lin_mesh = mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05)?;
    let lin_ctx = WaveContext::new(2, 2.0, 1.0, 12)?;
    let lin_nl = Nonlinearity::linear(Field::real(2.25));
    let sys = assembly::assemble(&lin_mesh, &lin_ctx, &lin_nl, LinearPart::Operator)?;
    let lin = solver::solve_fixed_point(
        &sys,
        &lin_mesh,
        &lin_nl,
        &IncidentField::plane_wave(one(), 0.0)?,
        &SolverConfig::default(),
    )?;

    let fx = KerrFixture::new()?;
    let nl = Nonlinearity::kerr(Field::real(4.0), Field::real(1e-4));
    let cfg = SolverConfig {
        max_iter: 25,
        tol: 1e-12,
        ..SolverConfig::default()
    };
    let u1 = fx.solve(&nl, 1.0, &cfg)?;
    let u2 = fx.solve(&nl, 2.0, &cfg)?;
    let contraction = u1.max_contraction().unwrap_or(f64::NAN);
    let residual = u1.residual_history.last().copied().unwrap_or(f64::NAN);
    let norms = assembly::assemble_linear(&fx.mesh, &fx.ctx)?;
    let diff: Vec<Complex64> = u2.u.iter().zip(&u1.u).map(|(b, a)| b - 2.0 * a).collect();
    let doubled: Vec<Complex64> = u1.u.iter().map(|a| 2.0 * a).collect();
    let margin = (norms.energy_norm_sq(&diff) / norms.energy_norm_sq(&doubled)).sqrt();
    outcome(
        lin.converged
            && lin.iterations == 1
            && u1.converged
            && u1.iterations <= 25
            && contraction < 0.1
            && residual < 1e-8
            && margin > 1e-3,
        format!(
            "linear iterations {} (must be 1); Kerr iterations {} (limit 25), contraction {contraction:.3e} (limit 0.1), \
             residual {residual:.3e} (limit 1e-8), scaling margin {margin:.3e} (must exceed 1e-3)",
            lin.iterations, u1.iterations
        ),
    )
}

fn c7_radiating() -> Result<Outcome> {
    let m = mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05)?;
    let ctx = WaveContext::new(2, 2.0, 1.0, 12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ratio = |order: usize| -> Result<f64> {
        let coeffs = (0..boundary::trace_len(2, order))
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let t = FourierTrace::from_coeffs(2, 1.0, order, coeffs)?;
        let data = boundary::sobolev_norm(&t, 0.5)?;
        let l = assembly::incident_functionals(&IncidentField::RadiatingSeries(t), &ctx, &m)?;
        Ok(l.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() / data)
    };
    let mut worst: f64 = 0.0;
    for order in [0usize, 1, 4, 8, 12] {
        worst = worst.max(ratio(order)?);
    }
    // Modes above N are outside the truncated operator and are reported only.
    let beyond = ratio(20)?;
    outcome(
        worst < 1e-10,
        format!("max |l_inc| / |data| for series up to N=12: {worst:.3e} (limit 1e-10); series of order 20 (beyond N): {beyond:.3e}"),
    )
}

fn c8_saturation() -> Result<Outcome> {
    let fx = KerrFixture::new()?;
    let cfg = SolverConfig {
        tol: 1e-13,
        ..SolverConfig::default()
    };
    let lin = fx.solve(&Nonlinearity::linear(Field::real(4.0)), 1.0, &cfg)?;
    let norms = assembly::assemble_linear(&fx.mesh, &fx.ctx)?;
    let mut dists = Vec::new();
    for gamma in [1.0, 10.0, 100.0] {
        let nl = Nonlinearity::saturated_kerr(Field::real(4.0), Field::real(1e-4), gamma)?;
        let sol = fx.solve(&nl, 1.0, &cfg)?;
        let d: Vec<Complex64> = sol.u.iter().zip(&lin.u).map(|(a, b)| a - b).collect();
        dists.push(norms.energy_norm_sq(&d).sqrt());
    }
    let ok = dists.windows(2).all(|w| w[1] < w[0]);
    outcome(
        ok,
        format!(
            "distance to linear for gamma 1, 10, 100: {:.3e}, {:.3e}, {:.3e} (strictly decreasing)",
            dists[0], dists[1], dists[2]
        ),
    )
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        files.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p)?));
    }
    files.sort();
    Ok(files)
}

fn c9_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/kerr_disk.cfg");
    let cfg = dir.path().join("kerr_disk.cfg");
    fs::copy(&src, &cfg)?;
    let out = dir.path().join("out/kerr_disk");
    cli::cmd_solve(&cfg)?;
    let first = snapshot(&out)?;
    fs::remove_dir_all(&out)?;
    cli::cmd_solve(&cfg)?;
    let second = snapshot(&out)?;
    let identical = first == second;
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        identical && first.len() == 4,
        format!("artifacts {} bit-identical: {identical}", names.join(", ")),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    // `cargo test -- --list` and friends: nothing to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, Check); 9] = [
        ("1 symbol bands", c1_symbol_bands),
        ("2 DtN diagonality", c2_diagonality),
        ("3 Garding", c3_garding),
        ("4 linear oracle", c4_oracle),
        ("5 truncation decay", c5_truncation),
        ("6 fixed point", c6_fixed_point),
        ("7 radiating incident", c7_radiating),
        ("8 saturation limit", c8_saturation),
        ("9 determinism", c9_determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (passed, detail) = match check() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2} s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
