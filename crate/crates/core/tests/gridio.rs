use cqhj::gridio::*;
use cqhj::integrate::propagate_complex;
use cqhj::singular::{find_nodes, Rect};
use cqhj::{Complex64, GaussianPacket, IntegratorConfig, NodeRecord, WaveModel};
use std::f64::consts::PI;
use std::fs;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn axis_validation() {
    assert!(Axis::new(0.0, 1.0, 1).is_err());
    assert!(Axis::new(1.0, 0.0, 5).is_err());
    assert!(Axis::new(0.0, f64::INFINITY, 5).is_err());
    let a = Axis::new(-1.0, 1.0, 5).unwrap();
    assert_eq!(a.step(), 0.5);
    assert_eq!(a.coords().collect::<Vec<_>>(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
}

#[test]
fn field_kind_routing() {
    let w = WaveModel::head_on_collision();
    let ax = Axis::new(-1.0, 1.0, 3).unwrap();
    assert!(sample_real_spacetime(&w, ax, ax, FieldKind::VbarMod).is_err());
    assert!(sample_argand(&w, ax, ax, 0.0, FieldKind::Rho).is_err());
    assert_eq!("psibar_phase".parse::<FieldKind>().unwrap(), FieldKind::PsibarPhase);
    assert!("density".parse::<FieldKind>().is_err());
}

#[test]
fn density_columns_integrate_to_window_mass() {
    let w = WaveModel::head_on_collision();
    let (x, t) = (Axis::new(-15.0, 15.0, 301).unwrap(), Axis::new(0.0, 8.0, 161).unwrap());
    let g = sample_real_spacetime(&w, x, t, FieldKind::Rho).unwrap();
    assert_eq!(g.masked_count(), 0);
    for j in 0..t.n {
        let trap: f64 = (0..x.n)
            .map(|i| g.get(i, j).unwrap() * if i == 0 || i + 1 == x.n { 0.5 } else { 1.0 })
            .sum::<f64>()
            * x.step();
        let tj = t.coord(j);
        let inside = real_axis_norm(&w, -15.0, 15.0, tj).unwrap();
        assert!((trap - inside).abs() < 1e-3, "t={tj}: {trap} vs {inside}");
        if tj <= 4.0 {
            assert!((trap - 1.0).abs() < 1e-3, "t={tj}: {trap}");
        }
    }
}

#[test]
fn velocity_vanishes_at_the_origin_and_phase_stays_on_branch() {
    let w = WaveModel::head_on_collision();
    let (x, t) = (Axis::new(-10.0, 10.0, 201).unwrap(), Axis::new(0.0, 8.0, 81).unwrap());
    let v = sample_real_spacetime(&w, x, t, FieldKind::V).unwrap();
    let i0 = 100;
    assert_eq!(x.coord(i0), 0.0);
    for j in 0..t.n {
        if let Some(val) = v.get(i0, j) {
            assert!(val.abs() < 1e-12);
        }
    }
    let s = sample_real_spacetime(&w, x, t, FieldKind::S).unwrap();
    let hbar = w.hbar();
    for k in 0..s.values.len() {
        if !s.mask[k] {
            assert!(s.values[k] > -PI * hbar && s.values[k] <= PI * hbar);
        }
    }
}

#[test]
fn real_and_argand_grids_agree_on_the_axis() {
    let w = WaveModel::head_on_collision();
    let x = Axis::new(-6.0, 6.0, 49).unwrap();
    let im = Axis::new(-1.0, 1.0, 5).unwrap();
    let t = 2.5;
    let tax = Axis::new(0.0, 5.0, 3).unwrap();
    assert_eq!(tax.coord(1), t);
    let rho = sample_real_spacetime(&w, x, tax, FieldKind::Rho).unwrap();
    let s = sample_real_spacetime(&w, x, tax, FieldKind::S).unwrap();
    let modulus = sample_argand(&w, x, im, t, FieldKind::PsibarMod).unwrap();
    let phase = sample_argand(&w, x, im, t, FieldKind::PsibarPhase).unwrap();
    assert_eq!(im.coord(2), 0.0);
    for i in 0..x.n {
        let (r, m) = (rho.get(i, 1).unwrap(), modulus.get(i, 2).unwrap());
        assert!((r - m * m).abs() < 1e-12);
        let (a, b) = (s.get(i, 1).unwrap(), phase.get(i, 2).unwrap());
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn psibar_minima_sit_on_nodes() {
    let w = WaveModel::head_on_collision();
    let (re, im) = (Axis::new(-3.0, 3.0, 121).unwrap(), Axis::new(-1.0, 1.0, 41).unwrap());
    let g = sample_argand(&w, re, im, 4.0, FieldKind::PsibarMod).unwrap();
    let nodes = find_nodes(&w, 4.0, Rect::new(-3.0, 3.0, -1.0, 1.0), 64).unwrap();
    assert_eq!(nodes.len(), 4);
    // Interior local minima of the grid.
    let mut minima = Vec::new();
    for i in 1..re.n - 1 {
        for j in 1..im.n - 1 {
            let v = g.get(i, j).unwrap();
            let lowest = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (i, j))
                .all(|(a, b)| g.get(a, b).unwrap() > v);
            if lowest {
                minima.push(c(re.coord(i), im.coord(j)));
            }
        }
    }
    assert_eq!(minima.len(), nodes.len());
    for n in &nodes {
        let near = minima.iter().any(|m| {
            (m.re - n.z_node.re).abs() <= re.step() && (m.im - n.z_node.im).abs() <= im.step()
        });
        assert!(near, "no grid minimum near {}", n.z_node);
    }
}

#[test]
fn vbar_modulus_diverges_next_to_nodes() {
    let w = WaveModel::head_on_collision();
    let (re, im) = (Axis::new(-3.0, 3.0, 121).unwrap(), Axis::new(-1.0, 1.0, 41).unwrap());
    let g = sample_argand(&w, re, im, 4.0, FieldKind::VbarMod).unwrap();
    let mut all: Vec<f64> = (0..g.values.len()).filter(|k| !g.mask[*k]).map(|k| g.values[k]).collect();
    all.sort_by(f64::total_cmp);
    let median = all[all.len() / 2];
    for n in find_nodes(&w, 4.0, Rect::new(-3.0, 3.0, -1.0, 1.0), 64).unwrap() {
        let i = ((n.z_node.re - re.min) / re.step()).round() as usize;
        let j = ((n.z_node.im - im.min) / im.step()).round() as usize;
        let peak = (i - 1..=i + 1)
            .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
            .filter(|&(a, b)| (a, b) != (i, j))
            .filter_map(|(a, b)| g.get(a, b))
            .fold(0.0, f64::max);
        assert!(peak > 10.0 * median, "{}: {peak} vs median {median}", n.z_node);
    }
}

#[test]
fn single_packet_velocity_phase_is_unmasked() {
    let w = WaveModel::single(GaussianPacket::unit(-2.0, 1.0, 1.0).unwrap()).unwrap();
    let (re, im) = (Axis::new(-8.0, 8.0, 33).unwrap(), Axis::new(-3.0, 3.0, 13).unwrap());
    for t in [0.0, 3.0] {
        let g = sample_argand(&w, re, im, t, FieldKind::VbarPhase).unwrap();
        assert_eq!(g.masked_count(), 0);
    }
}

#[test]
fn far_field_cells_are_masked_not_infinite() {
    let w = WaveModel::head_on_collision();
    let (re, im) = (Axis::new(-1.0, 1.0, 3).unwrap(), Axis::new(0.0, 80.0, 3).unwrap());
    let g = sample_argand(&w, re, im, 0.0, FieldKind::PsibarMod).unwrap();
    assert!(g.masked_count() > 0);
    assert!(g.values.iter().all(|v| v.is_finite()));
}

#[test]
fn continuity_residual_converges() {
    let w = WaveModel::head_on_collision();
    assert!(continuity_residual(&w, Axis::new(-1.0, 1.0, 4).unwrap(), Axis::new(0.0, 1.0, 9).unwrap()).is_err());
    let coarse = continuity_residual(&w, Axis::new(-10.0, 10.0, 401).unwrap(), Axis::new(0.0, 8.0, 321).unwrap()).unwrap();
    let fine = continuity_residual(&w, Axis::new(-10.0, 10.0, 801).unwrap(), Axis::new(0.0, 8.0, 641).unwrap()).unwrap();
    assert!(coarse.max_abs() < 1e-4);
    assert!(coarse.max_abs() >= 3.0 * fine.max_abs());

    let single = WaveModel::single(GaussianPacket::unit(-2.0, 1.0, 1.0).unwrap()).unwrap();
    let g = continuity_residual(&single, Axis::new(-10.0, 10.0, 401).unwrap(), Axis::new(0.0, 8.0, 321).unwrap()).unwrap();
    assert!(g.max_abs() < 1e-4);
}

#[test]
fn grid_file_format() {
    let dir = tempfile::tempdir().unwrap();
    let w = WaveModel::head_on_collision();
    let ax = Axis::new(-1.0, 1.0, 2).unwrap();
    let g = sample_real_spacetime(&w, ax, ax, FieldKind::Rho).unwrap();
    let path = dir.path().join("g.csv");
    write_grid(&g, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "c1,c2,value,mask");
    assert!(lines[1].starts_with("-1.0000000000000000e0,-1.0000000000000000e0,"));
    assert!(lines[2].starts_with("-1.0000000000000000e0,1.0000000000000000e0,"));
    let value: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(value, g.values[0]);

    let again = dir.path().join("g2.csv");
    write_grid(&g, &again).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn masked_cells_are_written_without_a_value() {
    let dir = tempfile::tempdir().unwrap();
    let w = WaveModel::head_on_collision();
    let x = Axis::new(0.0, std::f64::consts::FRAC_PI_4, 2).unwrap();
    let t = Axis::new(4.0, 5.0, 2).unwrap();
    let g = sample_real_spacetime(&w, x, t, FieldKind::V).unwrap();
    assert!(g.mask[2]);
    let path = dir.path().join("v.csv");
    write_grid(&g, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let row = text.lines().nth(3).unwrap();
    assert!(row.ends_with(",,1"), "{row}");
    assert!(!text.contains("NaN") && !text.contains("inf"));
}

#[test]
fn report_and_path_formats() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("nodes.csv");
    write_report::<NodeRecord>(&[], &empty).unwrap();
    assert_eq!(fs::read_to_string(&empty).unwrap(), "t,re,im,residual,winding\n");

    let w = WaveModel::head_on_collision();
    let nodes = find_nodes(&w, 4.0, Rect::new(-3.0, 3.0, -1.0, 1.0), 64).unwrap();
    let path = dir.path().join("nodes4.csv");
    write_report(&nodes, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + nodes.len());
    assert!(text.lines().nth(1).unwrap().ends_with(",1") || text.lines().nth(1).unwrap().ends_with(",-1"));

    let cfg = IntegratorConfig { dense_dt: 0.5, ..Default::default() };
    let a = propagate_complex(&w, c(-8.0, 0.0), 0.0, 1.0, &cfg).unwrap();
    let b = propagate_complex(&w, c(-6.0, 0.5), 0.0, 1.0, &cfg).unwrap();
    let out = dir.path().join("paths.csv");
    write_paths(&[(1, &b), (0, &a)], &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "member,t,re,im,status");
    assert_eq!(lines.len(), 1 + a.samples.len() + b.samples.len());
    assert!(lines[1].starts_with("0,0.0000000000000000e0,") && lines[1].ends_with(",completed"));
    assert!(lines.last().unwrap().starts_with("1,1.0000000000000000e0,"));
}

#[test]
fn io_errors_name_the_path() {
    let w = WaveModel::head_on_collision();
    let ax = Axis::new(-1.0, 1.0, 2).unwrap();
    let g = sample_real_spacetime(&w, ax, ax, FieldKind::Rho).unwrap();
    let bad = std::path::Path::new("/nonexistent-dir/grid.csv");
    let err = write_grid(&g, bad).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/grid.csv"));
}
