//! Penetrable-disk oracle and convergence studies.

use helmholtz_dtn::assembly::IncidentField;
use helmholtz_dtn::boundary::{self, FourierTrace};
use helmholtz_dtn::mesh::{self, Obstacle};
use helmholtz_dtn::solver::{Field, LinearPart, Nonlinearity, SolverConfig};
use helmholtz_dtn::verify::{self, DiskOracle, Problem};
use helmholtz_dtn::{specfun, WaveContext};
use num_complex::Complex64;
use std::f64::consts::PI;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn mode_matching_agrees_with_direct_elimination() {
    for eps in [Complex64::new(2.25, 0.0), Complex64::new(4.0, 0.3)] {
        let (a, kappa, angle) = (0.5, 2.0, 0.4);
        let o = DiskOracle::new(a, eps, Complex64::new(0.7, 0.2), angle, kappa, 1.0).unwrap();
        let k1 = kappa * eps.sqrt();
        let jz = verify::bessel_j_complex(k1 * a, o.order + 1);
        for (k, n) in (-(o.order as i64)..=o.order as i64).enumerate() {
            let na = n.unsigned_abs() as usize;
            if na > 30 {
                continue;
            }
            let djz = if na == 0 { -jz[1] } else { jz[na - 1] - jz[na] * na as f64 / (k1 * a) };
            let (j, _, jp, _) = specfun::bessel_jy(kappa * a, na as f64).unwrap();
            let h = specfun::hankel_cyl(na as i64, kappa * a).unwrap();
            let inc = o.incident[k];
            // [J(k1 a), -H; k1 J'(k1 a), -kappa H'] [c; d] = inc [J; kappa J'] by Cramer's rule.
            let m = [[jz[na], -h.value], [k1 * djz, -h.derivative * kappa]];
            let rhs = [inc * j, inc * kappa * jp];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let c = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
            let d = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det;
            let interior = c * jz[na];
            let scattered = d * h.value;
            let scale = o.amplitude.norm();
            assert!((interior - o.interior[k]).norm() < 1e-12 * scale, "n={n} eps={eps}");
            assert!((scattered - o.scattered[k]).norm() < 1e-12 * scale, "n={n} eps={eps}");
        }
    }
}

#[test]
fn vanishing_obstacle_scatters_nothing() {
    let mut last = f64::INFINITY;
    for a in [0.1, 0.01, 0.001] {
        let o = DiskOracle::new(a, Complex64::new(4.0, 0.0), one(), 0.0, 2.0, 1.0).unwrap();
        let us = o.scattered_field([0.8, 0.6]).unwrap().norm();
        assert!(us < 0.1 * last, "a = {a}: {us}");
        last = us;
    }
    assert!(last < 1e-5);
}

#[test]
fn oracle_interface_and_exterior_consistency() {
    let o = DiskOracle::new(0.5, Complex64::new(2.25, 0.0), one(), 0.0, 2.0, 1.5).unwrap();
    assert!(o.interface_mismatch().unwrap() < 1e-11);
    // Continuity of the total field across r = a from both formulas.
    for k in 0..8 {
        let phi = k as f64 * PI / 4.0;
        let inside = o.disk_exact([(0.5 - 1e-12) * phi.cos(), (0.5 - 1e-12) * phi.sin()]).unwrap();
        let outside = o.disk_exact([(0.5 + 1e-12) * phi.cos(), (0.5 + 1e-12) * phi.sin()]).unwrap();
        assert!((inside - outside).norm() < 1e-9);
    }
    let ctx = WaveContext::new(2, 2.0, 1.0, o.order).unwrap();
    let s = o.traces(1.0).unwrap()[0].clone();
    for k in 0..12 {
        let phi = 2.0 * PI * k as f64 / 12.0 + 0.1;
        let x = [1.5 * phi.cos(), 1.5 * phi.sin()];
        let a = boundary::exterior_field(&s, &ctx, &x).unwrap();
        let b = o.scattered_field(x).unwrap();
        assert!((a - b).norm() < 1e-9 * b.norm());
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let o = DiskOracle::new(0.5, Complex64::new(2.25, 0.1), one(), 0.3, 2.0, 1.0).unwrap();
    for x in [[0.2, 0.1], [-0.3, 0.6], [0.7, -0.5]] {
        let (_, g) = o.value_and_gradient(x).unwrap();
        let d = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += d;
            xm[c] -= d;
            let fd = (o.disk_exact(xp).unwrap() - o.disk_exact(xm).unwrap()) / (2.0 * d);
            assert!((fd - g[c]).norm() < 1e-6 * (1.0 + g[c].norm()));
        }
    }
}

#[test]
fn lossless_flux_balances() {
    let o = DiskOracle::new(0.6, Complex64::new(3.0, 0.0), one(), 1.0, 3.0, 1.0).unwrap();
    let (scattered, cross) = verify::flux_balance(&o, 1.0).unwrap();
    assert!(scattered > 0.0);
    assert!((scattered - cross).abs() <= 1e-6 * scattered.abs());
    // Absorption breaks the balance in the expected direction.
    let lossy = DiskOracle::new(0.6, Complex64::new(3.0, 0.5), one(), 1.0, 3.0, 1.0).unwrap();
    let (s, c) = verify::flux_balance(&lossy, 1.0).unwrap();
    assert!(c > s);
}

#[test]
fn invalid_oracle_requests() {
    assert!(DiskOracle::new(0.5, Complex64::new(2.0, -0.1), one(), 0.0, 2.0, 1.0).is_err());
    assert!(DiskOracle::new(1.5, Complex64::new(2.0, 0.0), one(), 0.0, 2.0, 1.0).is_err());
    assert!(DiskOracle::new(0.5, Complex64::new(2.0, 0.0), one(), 0.0, -2.0, 1.0).is_err());
}

fn linear_problem(h: f64) -> Problem {
    Problem {
        mesh: mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, h).unwrap(),
        kappa: 2.0,
        nl: Nonlinearity::linear(Field::real(2.25)),
        inc: IncidentField::plane_wave(one(), 0.0).unwrap(),
        solver: SolverConfig::default(),
        linear_part: LinearPart::Operator,
    }
}

#[test]
fn truncation_sweep_decays() {
    let p = linear_problem(0.05);
    let orders: Vec<usize> = (7..=17).collect();
    let (n_ref, rows) = verify::convergence_in_n(&p, &orders).unwrap();
    assert_eq!(n_ref, 34);
    for w in rows.windows(2) {
        assert!(w[1].relative <= w[0].relative + 1e-12, "{:?}", w);
    }
    assert!(rows.last().unwrap().relative < 1e-8);
    let (n_ref, rows) = verify::convergence_in_n(&p, &[0]).unwrap();
    assert_eq!(n_ref, 0);
    assert_eq!(rows[0].error, 0.0);
    assert!(verify::convergence_in_n(&p, &[]).is_err());
}

#[test]
fn sweep_failures_name_the_order() {
    let mut p = linear_problem(0.1);
    p.solver.max_iter = 0;
    match verify::convergence_in_n(&p, &[3, 4]) {
        Err(helmholtz_dtn::Error::Sweep { order, .. }) => assert_eq!(order, 8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn kerr_sweep_decays_like_the_linear_one() {
    let p = Problem {
        mesh: mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, 0.05).unwrap(),
        kappa: 6.0,
        nl: Nonlinearity::kerr(Field::real(4.0), Field::real(1e-4)),
        inc: IncidentField::plane_wave(one(), 0.0).unwrap(),
        solver: SolverConfig::default(),
        linear_part: LinearPart::Operator,
    };
    let orders: Vec<usize> = (11..=21).collect();
    let (_, rows) = verify::convergence_in_n(&p, &orders).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].relative <= w[0].relative + 1e-12, "{:?}", w);
    }
    assert!(rows.last().unwrap().relative < 1e-8, "{:?}", rows.last());
}

#[test]
fn band_limited_trace_hits_the_floor_at_its_bandwidth() {
    let ctx = WaveContext::new(2, 2.0, 1.0, 30).unwrap();
    let n0 = 9usize;
    let mut w = FourierTrace::zeros(2, 1.0, 30).unwrap();
    for n in -(n0 as i64)..=n0 as i64 {
        w.set(n, 0, Complex64::new(1.0, -0.5 * n as f64)).unwrap();
    }
    let rows = verify::truncation_sweep_trace(&w, &ctx, &(0..=20).collect::<Vec<_>>()).unwrap();
    for (order, err) in rows {
        if order >= n0 {
            assert_eq!(err, 0.0, "N = {order}");
        } else {
            assert!(err > 1e-3, "N = {order}");
        }
    }
}

#[test]
fn fem_matches_the_oracle() {
    let o = DiskOracle::new(0.5, Complex64::new(2.25, 0.0), one(), 0.0, 2.0, 1.0).unwrap();
    let ctx = WaveContext::new(2, 2.0, 1.0, 12).unwrap();
    let meshes: Vec<_> = [0.1, 0.05]
        .iter()
        .map(|&h| (h, mesh::mesh_disk(1.0, &Obstacle::Disk { radius: 0.5 }, h).unwrap()))
        .collect();
    let rows = verify::fem_vs_oracle(&meshes, &o, &ctx).unwrap();
    assert!(rows[1].rel_l2 <= 0.02);
    let l2 = verify::last_slope(&rows, false).unwrap();
    let en = verify::last_slope(&rows, true).unwrap();
    assert!((1.7..=2.3).contains(&l2), "{l2}");
    assert!((0.8..=1.2).contains(&en), "{en}");
}

#[test]
fn suites_pass() {
    for row in verify::symbol_band_suite().unwrap() {
        assert!(row.passed, "{row:?}");
    }
    for row in verify::oracle_suite().unwrap() {
        assert!(row.passed, "{row:?}");
    }
    let mut buf = Vec::new();
    verify::write_check_csv(&verify::oracle_suite().unwrap(), &["schema=1".into()], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# schema=1\nsuite,check,value,limit,result\n"));
}
