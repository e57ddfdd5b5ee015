//! JSON scenario configuration and its validation.

use std::path::{Path, PathBuf};

use cqhj::gridio::{Axis, FieldKind};
use cqhj::singular::Rect;
use cqhj::{Complex64, GaussianPacket, IntegratorConfig, WaveModel};
use serde::{Deserialize, Serialize};

/// Field-level validation failures, reported together.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError(pub Vec<String>);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0.join("; "))
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub a: f64,
    pub v0: f64,
    pub sigma0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Range {
    pub const fn new(min: f64, max: f64, n: usize) -> Self {
        Self { min, max, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub dense_dt: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_step: c.max_step,
            min_step: c.min_step,
            dense_dt: c.dense_dt,
            max_steps: c.max_steps,
        }
    }
}

impl Tolerances {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            min_step: self.min_step,
            dense_dt: self.dense_dt,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RealGridConfig {
    pub x: Range,
    /// Time samples over `[0, T]`.
    pub nt: usize,
    pub fields: Vec<String>,
}

impl Default for RealGridConfig {
    fn default() -> Self {
        Self {
            x: Range::new(-15.0, 15.0, 301),
            nt: 161,
            fields: FieldKind::REAL.iter().map(|f| f.name().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArgandGridConfig {
    pub re: Range,
    pub im: Range,
    pub times: Vec<f64>,
    pub fields: Vec<String>,
}

impl Default for ArgandGridConfig {
    fn default() -> Self {
        Self {
            re: Range::new(-15.0, 15.0, 301),
            im: Range::new(-3.0, 3.0, 121),
            times: vec![0.0, 2.0, 4.0, 8.0],
            fields: FieldKind::ARGAND.iter().map(|f| f.name().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuityConfig {
    pub x: Range,
    pub nt: usize,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        Self { x: Range::new(-10.0, 10.0, 401), nt: 321 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsConfig {
    pub real: RealGridConfig,
    pub argand: ArgandGridConfig,
    pub continuity: ContinuityConfig,
    /// Real-axis window for the normalization check.
    pub norm_window: [f64; 2],
}

impl Default for FieldsConfig {
    fn default() -> Self {
        Self {
            real: RealGridConfig::default(),
            argand: ArgandGridConfig::default(),
            continuity: ContinuityConfig::default(),
            norm_window: [-60.0, 60.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoriesConfig {
    pub real_launches: Vec<f64>,
    /// `[re, im]` launch points.
    pub complex_launches: Vec<[f64; 2]>,
}

impl Default for TrajectoriesConfig {
    fn default() -> Self {
        let real_launches = (-10..=10).filter(|k: &i32| k.abs() >= 2).map(f64::from).collect();
        let complex_launches = (-5..=5)
            .filter(|k| *k != 0)
            .flat_map(|k| [-1.0, -0.5, 0.5, 1.0].map(|y| [2.0 * k as f64, y]))
            .collect();
        Self { real_launches, complex_launches }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsochronesConfig {
    pub t_c: Vec<f64>,
    /// Real-trajectory launch points; each family is seeded from their
    /// positions at `t_c`.
    pub launches: Vec<f64>,
    /// Explicit crossing points, used instead of `launches` when given.
    pub x_targets: Option<Vec<f64>>,
}

impl Default for IsochronesConfig {
    fn default() -> Self {
        Self {
            t_c: vec![0.0, 2.0, 4.0, 8.0],
            launches: (-20..=20).filter(|k| *k != 0).map(|k| 0.5 * k as f64).collect(),
            x_targets: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl From<RegionSpec> for Rect {
    fn from(r: RegionSpec) -> Self {
        Rect::new(r.re_min, r.re_max, r.im_min, r.im_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingularConfig {
    pub times: Vec<f64>,
    pub region: RegionSpec,
    pub grid_n: usize,
    /// Nodes nearest the centroid used for the node-line fit.
    pub line_nodes: usize,
}

impl Default for SingularConfig {
    fn default() -> Self {
        Self {
            times: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            region: RegionSpec { re_min: -3.0, re_max: 3.0, im_min: -1.0, im_max: 1.0 },
            grid_n: 64,
            line_nodes: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub packets: Vec<PacketSpec>,
    pub m: f64,
    pub hbar: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub fields: FieldsConfig,
    pub trajectories: TrajectoriesConfig,
    pub isochrones: IsochronesConfig,
    pub singular: SingularConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            packets: vec![
                PacketSpec { a: -8.0, v0: 2.0, sigma0: 1.0 },
                PacketSpec { a: 8.0, v0: -2.0, sigma0: 1.0 },
            ],
            m: 1.0,
            hbar: 1.0,
            horizon: 8.0,
            out: PathBuf::from("out"),
            tolerances: Tolerances::default(),
            fields: FieldsConfig::default(),
            trajectories: TrajectoriesConfig::default(),
            isochrones: IsochronesConfig::default(),
            singular: SingularConfig::default(),
        }
    }
}

/// Which command a validation pass is for; each checks only what it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Fields,
    Trajectories,
    Isochrones,
    Singular,
}

#[derive(Default)]
struct Issues(Vec<String>);

impl Issues {
    fn check(&mut self, ok: bool, field: &str, msg: impl std::fmt::Display) {
        if !ok {
            self.0.push(format!("{field}: {msg}"));
        }
    }

    fn finite(&mut self, v: f64, field: &str) {
        self.check(v.is_finite(), field, format_args!("must be finite, got {v}"));
    }

    fn range(&mut self, r: &Range, field: &str) {
        self.finite(r.min, &format!("{field}.min"));
        self.finite(r.max, &format!("{field}.max"));
        self.check(r.min < r.max, field, format_args!("min {} must be below max {}", r.min, r.max));
        self.check(r.n >= 2, &format!("{field}.n"), format_args!("must be >= 2, got {}", r.n));
    }

    fn times(&mut self, ts: &[f64], horizon: f64, field: &str) {
        for (i, &t) in ts.iter().enumerate() {
            self.check(
                t.is_finite() && (0.0..=horizon).contains(&t),
                &format!("{field}[{i}]"),
                format_args!("must lie in [0, {horizon}], got {t}"),
            );
        }
    }

    fn points(&mut self, xs: &[f64], field: &str) {
        for (i, &x) in xs.iter().enumerate() {
            self.finite(x, &format!("{field}[{i}]"));
        }
    }

    fn fields(&mut self, names: &[String], allowed: &[FieldKind], field: &str) {
        for (i, name) in names.iter().enumerate() {
            let ok = name.parse::<FieldKind>().is_ok_and(|k| allowed.contains(&k));
            let choices: Vec<_> = allowed.iter().map(|k| k.name()).collect();
            self.check(ok, &format!("{field}[{i}]"), format_args!("'{name}' is not one of {choices:?}"));
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| anyhow::Error::new(e))
    }

    /// Parses a JSON scenario; unknown keys and type mismatches are
    /// validation errors.
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        serde_json::from_str(text).map_err(|e| ValidationError(vec![format!("config: {e}")]))
    }

    /// Validates the shared model plus the parameters of one command.
    pub fn validate(&self, scope: Scope) -> Result<(), ValidationError> {
        let mut is = Issues::default();
        is.check(!self.packets.is_empty(), "packets", "at least one packet is required");
        for (i, p) in self.packets.iter().enumerate() {
            is.finite(p.a, &format!("packets[{i}].a"));
            is.finite(p.v0, &format!("packets[{i}].v0"));
            is.check(p.sigma0 > 0.0 && p.sigma0.is_finite(), &format!("packets[{i}].sigma0"), format_args!("must be > 0, got {}", p.sigma0));
        }
        is.check(self.m > 0.0 && self.m.is_finite(), "m", format_args!("must be > 0, got {}", self.m));
        is.check(self.hbar > 0.0 && self.hbar.is_finite(), "hbar", format_args!("must be > 0, got {}", self.hbar));
        is.check(self.horizon >= 0.0 && self.horizon.is_finite(), "horizon", format_args!("must be >= 0, got {}", self.horizon));
        if let Err(e) = self.tolerances.integrator().validate() {
            is.0.push(format!("tolerances: {e}"));
        }
        let t_max = self.horizon;
        match scope {
            Scope::Fields => {
                let f = &self.fields;
                is.check(self.horizon > 0.0, "horizon", "space-time grids need a positive horizon");
                is.range(&f.real.x, "fields.real.x");
                is.check(f.real.nt >= 2, "fields.real.nt", format_args!("must be >= 2, got {}", f.real.nt));
                is.fields(&f.real.fields, &FieldKind::REAL, "fields.real.fields");
                is.range(&f.argand.re, "fields.argand.re");
                is.range(&f.argand.im, "fields.argand.im");
                is.times(&f.argand.times, t_max, "fields.argand.times");
                is.fields(&f.argand.fields, &FieldKind::ARGAND, "fields.argand.fields");
                is.range(&f.continuity.x, "fields.continuity.x");
                is.check(f.continuity.x.n >= 5, "fields.continuity.x.n", "must be >= 5");
                is.check(f.continuity.nt >= 5, "fields.continuity.nt", format_args!("must be >= 5, got {}", f.continuity.nt));
                let [lo, hi] = f.norm_window;
                is.check(lo.is_finite() && hi.is_finite() && lo < hi, "fields.norm_window", format_args!("must be an increasing pair, got [{lo}, {hi}]"));
            }
            Scope::Trajectories => {
                is.points(&self.trajectories.real_launches, "trajectories.real_launches");
                for (i, p) in self.trajectories.complex_launches.iter().enumerate() {
                    is.check(p.iter().all(|v| v.is_finite()), &format!("trajectories.complex_launches[{i}]"), "must be finite");
                }
            }
            Scope::Isochrones | Scope::Singular => {
                let iso = &self.isochrones;
                is.times(&iso.t_c, t_max, "isochrones.t_c");
                is.points(&iso.launches, "isochrones.launches");
                if let Some(xs) = &iso.x_targets {
                    is.points(xs, "isochrones.x_targets");
                }
                if scope == Scope::Singular {
                    let s = &self.singular;
                    is.times(&s.times, t_max, "singular.times");
                    is.check(Rect::from(s.region).is_valid(), "singular.region", "bounds must be finite and ordered");
                    is.check(s.grid_n >= 16, "singular.grid_n", format_args!("must be >= 16, got {}", s.grid_n));
                    is.check(s.line_nodes >= 2, "singular.line_nodes", format_args!("must be >= 2, got {}", s.line_nodes));
                }
            }
        }
        if is.0.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(is.0))
        }
    }

    pub fn model(&self) -> anyhow::Result<WaveModel> {
        let packets = self
            .packets
            .iter()
            .map(|p| GaussianPacket::new(p.a, p.v0, p.sigma0, self.m, self.hbar))
            .collect::<cqhj::Result<Vec<_>>>()?;
        Ok(WaveModel::new(packets)?)
    }

    pub fn complex_launches(&self) -> Vec<Complex64> {
        self.trajectories.complex_launches.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }
}

pub(crate) fn axis(r: &Range) -> anyhow::Result<Axis> {
    Ok(Axis::new(r.min, r.max, r.n)?)
}
