use cqhj::integrate::{propagate_complex, propagate_real};
use cqhj::isochrone::{build_isochrone, real_from_crossings, CROSS_EPS};
use cqhj::{Complex64, GaussianPacket, IntegratorConfig, PathStatus, WaveModel};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn crossing_at_time_zero_is_the_real_start() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig::default();
    let targets = [-9.0, -6.5, -3.0, 2.0, 7.0];
    let fam = build_isochrone(&w, 0.0, &targets, 8.0, &cfg).unwrap();
    for (m, &x) in fam.members.iter().zip(&targets) {
        assert_eq!(m.z0, Some(c(x, 0.0)));
        assert_eq!(m.residual, Some(0.0));
        assert_eq!(m.path.samples[0], (0.0, c(x, 0.0)));
        assert!(m.path.is_completed() && (m.path.last().0 - 8.0).abs() < 1e-12);
    }
}

#[test]
fn single_packet_backward_map() {
    let p = GaussianPacket::unit(-8.0, 2.0, 1.0).unwrap();
    let w = WaveModel::single(p).unwrap();
    let cfg = IntegratorConfig::default();
    let fam = build_isochrone(&w, 4.0, &[0.0, 2.0, -3.0], 8.0, &cfg).unwrap();
    for m in &fam.members {
        // z0 = a + (x - a - v0 t_c) sigma0 / sigma~_{t_c}
        let expected = p.a + (m.x_cross - p.a - p.v0 * 4.0) * p.sigma0 / p.complex_spreading(4.0);
        assert!((m.z0.unwrap() - expected).norm() < 1e-8, "{:?} vs {expected}", m.z0);
        assert!((m.path.at(4.0).unwrap() - c(m.x_cross, 0.0)).norm() < CROSS_EPS);
        assert!(m.crosses());
    }
    // x = 0 is reached at t_c = 4 by the packet center itself.
    assert!((fam.members[0].z0.unwrap() - c(-8.0, 0.0)).norm() < 1e-8);
    assert!((fam.members[1].z0.unwrap() - c(-7.6, -0.8)).norm() < 1e-8);
}

#[test]
fn collision_families_cross_the_real_axis() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig::default();
    let launches: Vec<f64> = (-10..=10).filter(|k| *k != 0).map(|k| k as f64).collect();
    for t_c in [2.0, 4.0] {
        let targets: Vec<f64> = launches
            .iter()
            .map(|&x0| propagate_real(&w, x0, 0.0, t_c, &cfg).unwrap().last().1.re)
            .collect();
        let fam = build_isochrone(&w, t_c, &targets, 8.0, &cfg).unwrap();
        assert_eq!(fam.members.len(), targets.len());
        assert!(fam.max_residual().unwrap() < CROSS_EPS);
        for (m, &x) in fam.members.iter().zip(&targets) {
            let zc = m.path.at(t_c).unwrap();
            assert!((zc.re - x).abs() < CROSS_EPS && zc.im.abs() < CROSS_EPS);
            assert_eq!(m.path.samples[0].0, 0.0);
        }
        assert_eq!(fam.completed_paths().len(), fam.members.len());
    }
}

#[test]
fn round_trip_without_polish() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig::default();
    for (x, t_c) in [(-5.0, 2.0), (-3.3, 4.0), (6.0, 8.0)] {
        let back = propagate_complex(&w, c(x, 0.0), t_c, 0.0, &cfg).unwrap();
        let fwd = propagate_complex(&w, back.last().1, 0.0, t_c, &cfg).unwrap();
        assert!((fwd.last().1 - c(x, 0.0)).norm() < 1e-6);
    }
}

#[test]
fn target_on_a_node_is_kept_as_aborted() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig::default();
    let fam = build_isochrone(&w, 4.0, &[std::f64::consts::FRAC_PI_4, -6.0], 8.0, &cfg).unwrap();
    assert_eq!(fam.members.len(), 2);
    assert_eq!(fam.members[0].status(), PathStatus::AbortedPole);
    assert!(fam.members[0].z0.is_none() && fam.members[0].residual.is_none());
    assert!(fam.members[1].crosses());
    assert_eq!(fam.completed_paths().len(), 1);
}

#[test]
fn invalid_crossing_times() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig::default();
    assert!(build_isochrone(&w, 9.0, &[0.0], 8.0, &cfg).is_err());
    assert!(build_isochrone(&w, -1.0, &[0.0], 8.0, &cfg).is_err());
    assert!(build_isochrone(&w, 1.0, &[f64::NAN], 8.0, &cfg).is_err());
}

#[test]
fn single_packet_real_trajectory_crossings_collapse() {
    let p = GaussianPacket::unit(-8.0, 2.0, 1.0).unwrap();
    let w = WaveModel::single(p).unwrap();
    let cfg = IntegratorConfig { dense_dt: 0.5, ..Default::default() };
    let real = propagate_real(&w, -8.0, 0.0, 4.0, &cfg).unwrap();
    let report = real_from_crossings(&w, &real, &cfg).unwrap();
    assert_eq!(report.samples.len(), real.samples.len());
    for s in &report.samples {
        assert!((s.z0.unwrap() - c(-8.0, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn collision_real_trajectory_crossings_are_distinct() {
    let w = WaveModel::head_on_collision();
    let cfg = IntegratorConfig { dense_dt: 1.0, ..Default::default() };
    let real = propagate_real(&w, -4.0, 0.0, 3.0, &cfg).unwrap();
    let report = real_from_crossings(&w, &real, &cfg).unwrap();
    let later: Vec<_> = report.samples.iter().filter(|s| s.t >= 1.0).collect();
    assert_eq!(later.len(), 3);
    for (i, a) in later.iter().enumerate() {
        assert!(a.residual.unwrap() < CROSS_EPS);
        for b in &later[i + 1..] {
            assert!((a.z0.unwrap() - b.z0.unwrap()).norm() > 1e-3);
        }
    }
    assert!(report.max_residual().unwrap() < CROSS_EPS);
}
