//! Scenario configuration and the pipelines behind the `cqhj` commands.
//!
//! Every command validates the configuration, runs its pipeline and writes
//! CSV artifacts into the output directory, returning a JSON summary.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cqhj::gridio::{self, FieldKind, LoopRow};
use cqhj::integrate::{propagate_complex, propagate_real};
use cqhj::isochrone::build_isochrone;
use cqhj::singular::{self, avoids_node_band, detect_caustics, detect_loops, find_nodes, node_line_angle};
use cqhj::{IsochroneFamily, TrajectoryPath, WaveModel};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use config::{ScenarioConfig, Scope, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fields,
    Trajectories,
    Isochrones,
    Singular,
}

impl Command {
    pub const ALL: [Command; 4] =
        [Command::Fields, Command::Trajectories, Command::Isochrones, Command::Singular];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Fields => "fields",
            Command::Trajectories => "trajectories",
            Command::Isochrones => "isochrones",
            Command::Singular => "singular",
        }
    }

    fn scope(&self) -> Scope {
        match self {
            Command::Fields => Scope::Fields,
            Command::Trajectories => Scope::Trajectories,
            Command::Isochrones => Scope::Isochrones,
            Command::Singular => Scope::Singular,
        }
    }
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration (exit code 2).
    Validation(ValidationError),
    /// Failure while running a pipeline (exit code 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(e) => write!(f, "{e}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn log(msg: impl std::fmt::Display) {
    eprintln!("cqhj: {msg}");
}

/// Time formatted for file names, e.g. `t4`, `t2.5`.
pub fn time_tag(t: f64) -> String {
    format!("{t}")
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: String) -> PathBuf {
        let p = self.dir.join(&name);
        self.files.push(name);
        p
    }
}

/// Validates `cfg` for `cmd` and runs it.
pub fn run(cmd: Command, cfg: &ScenarioConfig) -> Result<Value, CliError> {
    cfg.validate(cmd.scope()).map_err(CliError::Validation)?;
    let w = cfg.model()?;
    let mut out = Output::new(&cfg.out)?;
    log(format_args!("{} -> {}", cmd.name(), cfg.out.display()));
    let details = match cmd {
        Command::Fields => fields(cfg, &w, &mut out)?,
        Command::Trajectories => trajectories(cfg, &w, &mut out)?,
        Command::Isochrones => isochrones(cfg, &w, &mut out)?,
        Command::Singular => singular_reports(cfg, &w, &mut out)?,
    };
    Ok(json!({ "command": cmd.name(), "files": out.files, "summary": details }))
}

/// Runs all four commands in order, validating everything first.
pub fn run_all(cfg: &ScenarioConfig) -> Result<Value, CliError> {
    for cmd in Command::ALL {
        cfg.validate(cmd.scope()).map_err(CliError::Validation)?;
    }
    let runs = Command::ALL.iter().map(|&c| run(c, cfg)).collect::<Result<Vec<_>, _>>()?;
    Ok(Value::Array(runs))
}

fn fields(cfg: &ScenarioConfig, w: &WaveModel, out: &mut Output) -> anyhow::Result<Value> {
    let f = &cfg.fields;
    let x = config::axis(&f.real.x)?;
    let t = cqhj::gridio::Axis::new(0.0, cfg.horizon, f.real.nt)?;
    for name in &f.real.fields {
        let kind: FieldKind = name.parse()?;
        let grid = gridio::sample_real_spacetime(w, x, t, kind)?;
        gridio::write_grid(&grid, &out.path(format!("real_{name}.csv")))?;
    }
    let (re, im) = (config::axis(&f.argand.re)?, config::axis(&f.argand.im)?);
    let mut masked = Vec::new();
    for &tk in &f.argand.times {
        for name in &f.argand.fields {
            let kind: FieldKind = name.parse()?;
            let grid = gridio::sample_argand(w, re, im, tk, kind)?;
            masked.push(json!({ "field": name, "t": tk, "masked": grid.masked_count() }));
            gridio::write_grid(&grid, &out.path(format!("argand_{name}_t{}.csv", time_tag(tk))))?;
        }
    }
    let cx = config::axis(&f.continuity.x)?;
    let ct = cqhj::gridio::Axis::new(0.0, cfg.horizon, f.continuity.nt)?;
    let residual = gridio::continuity_residual(w, cx, ct)?;
    gridio::write_grid(&residual, &out.path("continuity_residual.csv".into()))?;
    let [lo, hi] = f.norm_window;
    let mut norms = Vec::new();
    for &tk in &f.argand.times {
        norms.push(json!({ "t": tk, "norm": gridio::real_axis_norm(w, lo, hi, tk)? }));
    }
    log(format_args!("fields: continuity residual max {:.3e}", residual.max_abs()));
    Ok(json!({
        "continuity_max_residual": residual.max_abs(),
        "continuity_masked": residual.masked_count(),
        "normalization": norms,
        "argand_masked": masked,
    }))
}

fn status_counts(paths: &[&TrajectoryPath]) -> Value {
    let aborted = paths.iter().filter(|p| !p.is_completed()).count();
    json!({ "members": paths.len(), "aborted": aborted })
}

/// Checks that real trajectories keep the order of their launch points at
/// every shared sample time.
pub fn check_non_crossing(launches: &[f64], paths: &[TrajectoryPath]) -> anyhow::Result<()> {
    let mut order: Vec<usize> = (0..launches.len()).collect();
    order.sort_by(|&a, &b| launches[a].total_cmp(&launches[b]));
    let common = paths.iter().map(|p| p.samples.len()).min().unwrap_or(0);
    for k in 0..common {
        for pair in order.windows(2) {
            let (lo, hi) = (&paths[pair[0]].samples[k], &paths[pair[1]].samples[k]);
            if launches[pair[0]] == launches[pair[1]] {
                continue;
            }
            if lo.1.re >= hi.1.re {
                bail!(
                    "real trajectories from x0 = {} and x0 = {} cross at t = {}",
                    launches[pair[0]],
                    launches[pair[1]],
                    lo.0
                );
            }
        }
    }
    Ok(())
}

fn trajectories(cfg: &ScenarioConfig, w: &WaveModel, out: &mut Output) -> anyhow::Result<Value> {
    let ic = cfg.tolerances.integrator();
    let launches = &cfg.trajectories.real_launches;
    let real = launches
        .par_iter()
        .map(|&x0| propagate_real(w, x0, 0.0, cfg.horizon, &ic))
        .collect::<cqhj::Result<Vec<_>>>()?;
    check_non_crossing(launches, &real)?;
    let ids: Vec<(usize, &TrajectoryPath)> = real.iter().enumerate().collect();
    gridio::write_paths(&ids, &out.path("trajectories_real.csv".into()))?;

    let complex = cfg
        .complex_launches()
        .par_iter()
        .map(|&z0| propagate_complex(w, z0, 0.0, cfg.horizon, &ic))
        .collect::<cqhj::Result<Vec<_>>>()?;
    let ids: Vec<(usize, &TrajectoryPath)> = complex.iter().enumerate().collect();
    gridio::write_paths(&ids, &out.path("trajectories_complex.csv".into()))?;
    log(format_args!("trajectories: {} real, {} complex", real.len(), complex.len()));
    Ok(json!({
        "real": status_counts(&real.iter().collect::<Vec<_>>()),
        "complex": status_counts(&complex.iter().collect::<Vec<_>>()),
        "non_crossing": true,
    }))
}

/// Crossing points of the family at `t_c`: explicit targets, or the
/// positions at `t_c` of the real trajectories from the launch grid.
pub fn family_targets(cfg: &ScenarioConfig, w: &WaveModel, t_c: f64) -> anyhow::Result<Vec<f64>> {
    if let Some(xs) = &cfg.isochrones.x_targets {
        return Ok(xs.clone());
    }
    let ic = cfg.tolerances.integrator();
    let paths = cfg
        .isochrones
        .launches
        .par_iter()
        .map(|&x0| propagate_real(w, x0, 0.0, t_c, &ic))
        .collect::<cqhj::Result<Vec<_>>>()?;
    let mut targets = Vec::with_capacity(paths.len());
    for (p, x0) in paths.iter().zip(&cfg.isochrones.launches) {
        if p.is_completed() {
            targets.push(p.last().1.re);
        } else {
            log(format_args!("real launch {x0} aborted ({}) before t_c = {t_c}; skipped", p.status));
        }
    }
    Ok(targets)
}

pub fn family(cfg: &ScenarioConfig, w: &WaveModel, t_c: f64) -> anyhow::Result<IsochroneFamily> {
    let targets = family_targets(cfg, w, t_c)?;
    Ok(build_isochrone(w, t_c, &targets, cfg.horizon, &cfg.tolerances.integrator())?)
}

fn isochrones(cfg: &ScenarioConfig, w: &WaveModel, out: &mut Output) -> anyhow::Result<Value> {
    let mut families = Vec::new();
    for &t_c in &cfg.isochrones.t_c {
        let fam = family(cfg, w, t_c)?;
        let ids: Vec<(usize, &TrajectoryPath)> = fam.members.iter().map(|m| &m.path).enumerate().collect();
        gridio::write_paths(&ids, &out.path(format!("isochrone_tc{}.csv", time_tag(t_c))))?;
        let polished = fam.members.iter().filter(|m| m.polish_iterations > 0).count();
        let paths: Vec<&TrajectoryPath> = fam.members.iter().map(|m| &m.path).collect();
        log(format_args!("isochrone t_c = {t_c}: {} members", fam.members.len()));
        families.push(json!({
            "t_c": t_c,
            "status": status_counts(&paths),
            "max_residual": fam.max_residual(),
            "polished": polished,
        }));
    }
    Ok(json!({ "families": families }))
}

fn singular_reports(cfg: &ScenarioConfig, w: &WaveModel, out: &mut Output) -> anyhow::Result<Value> {
    let s = &cfg.singular;
    let mut all_nodes = Vec::new();
    let mut per_time = Vec::new();
    for &t in &s.times {
        let nodes = find_nodes(w, t, s.region.into(), s.grid_n)?;
        let max_im = nodes.iter().map(|n| n.z_node.im.abs()).fold(0.0, f64::max);
        let min_im = nodes.iter().map(|n| n.z_node.im.abs()).reduce(f64::min);
        per_time.push(json!({
            "t": t,
            "nodes": nodes.len(),
            "min_abs_im": min_im,
            "max_abs_im": max_im,
            "line_angle": node_line_angle(&nodes, s.line_nodes),
        }));
        all_nodes.extend(nodes);
    }
    gridio::write_report(&all_nodes, &out.path("nodes.csv".into()))?;

    let mut families = Vec::new();
    for &t_c in &cfg.isochrones.t_c {
        let fam = family(cfg, w, t_c)?;
        let completed: Vec<(usize, &TrajectoryPath)> = fam
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.path.is_completed() && m.path.t0 == 0.0)
            .map(|(i, m)| (i, &m.path))
            .collect();
        let mut caustics = if completed.len() >= 3 {
            let refs: Vec<&TrajectoryPath> = completed.iter().map(|c| c.1).collect();
            detect_caustics(&refs)?
        } else {
            Vec::new()
        };
        for c in &mut caustics {
            c.member_index = completed[c.member_index].0;
        }
        gridio::write_report(&caustics, &out.path(format!("caustics_tc{}.csv", time_tag(t_c))))?;

        let mut rows = Vec::new();
        let mut looping = 0;
        let mut band_free = 0;
        let mut band_free_loops = 0;
        for (i, m) in fam.members.iter().enumerate() {
            let report = detect_loops(&m.path, w);
            looping += usize::from(report.count() > 0);
            if avoids_node_band(&m.path, w) {
                band_free += 1;
                band_free_loops += report.count();
            }
            rows.extend(report.loops.into_iter().map(|lp| LoopRow { member: i, lp }));
        }
        gridio::write_report(&rows, &out.path(format!("loops_tc{}.csv", time_tag(t_c))))?;
        log(format_args!("singular t_c = {t_c}: {} caustic points, {} loops", caustics.len(), rows.len()));
        families.push(json!({
            "t_c": t_c,
            "caustics": caustics.len(),
            "loops": rows.len(),
            "looping_members": looping,
            "band_free_members": band_free,
            "band_free_loops": band_free_loops,
        }));
    }
    Ok(json!({
        "node_band_fraction": singular::NODE_BAND_FRACTION,
        "nodes": per_time,
        "families": families,
    }))
}
