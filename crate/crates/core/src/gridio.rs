//! Field sampling on real space-time and Argand grids, conservation
//! diagnostics, and CSV serialization.
//!
//! All files are CSV with a single header line. Numbers are written with 17
//! significant digits so that doubles round-trip exactly. Cells whose value
//! is undefined (at or next to a node, or overflowing) carry `mask = 1` and
//! an empty value; no NaN or infinity is ever written.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::TrajectoryPath;
use crate::singular::{CausticPoint, NodeRecord, TrajectoryLoop};
use crate::wavemodel::{polar_decompose, WaveModel, POLE_EPS};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rho,
    S,
    V,
    Q,
    PsibarMod,
    PsibarPhase,
    VbarMod,
    VbarPhase,
    ContinuityResidual,
}

impl FieldKind {
    pub const REAL: [FieldKind; 4] = [FieldKind::Rho, FieldKind::S, FieldKind::V, FieldKind::Q];
    pub const ARGAND: [FieldKind; 4] =
        [FieldKind::PsibarMod, FieldKind::PsibarPhase, FieldKind::VbarMod, FieldKind::VbarPhase];

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Rho => "rho",
            FieldKind::S => "S",
            FieldKind::V => "v",
            FieldKind::Q => "Q",
            FieldKind::PsibarMod => "psibar_mod",
            FieldKind::PsibarPhase => "psibar_phase",
            FieldKind::VbarMod => "vbar_mod",
            FieldKind::VbarPhase => "vbar_phase",
            FieldKind::ContinuityResidual => "continuity_residual",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [FieldKind::REAL.as_slice(), FieldKind::ARGAND.as_slice(), &[FieldKind::ContinuityResidual]]
            .concat()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown field '{s}'")))
    }
}

/// Evenly spaced coordinates `min..=max` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!("axis bounds [{min}, {max}] must be ordered")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("axis needs at least 2 points, got {n}")));
        }
        Ok(Self { min, max, n })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.coord(i))
    }
}

/// Dense 2D field in long form: `values[i * c2.n + j]` sits at
/// `(c1.coord(i), c2.coord(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub field: FieldKind,
    pub c1: Axis,
    pub c2: Axis,
    /// Time slice for Argand grids; `None` for space-time grids.
    pub t: Option<f64>,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl FieldGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = i * self.c2.n + j;
        (!self.mask[k]).then_some(self.values[k])
    }

    /// Largest `|value|` over unmasked cells.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    fn from_rows(field: FieldKind, c1: Axis, c2: Axis, t: Option<f64>, rows: Vec<Vec<Option<f64>>>) -> Self {
        let mut values = Vec::with_capacity(c1.n * c2.n);
        let mut mask = Vec::with_capacity(c1.n * c2.n);
        for cell in rows.into_iter().flatten() {
            match cell.filter(|v| v.is_finite()) {
                Some(v) => {
                    values.push(v);
                    mask.push(false);
                }
                None => {
                    values.push(0.0);
                    mask.push(true);
                }
            }
        }
        Self { field, c1, c2, t, values, mask }
    }
}

fn real_value(w: &WaveModel, field: FieldKind, x: f64, t: f64) -> Option<f64> {
    match field {
        FieldKind::Rho => w.density(x, t).ok(),
        FieldKind::S => w.real_fields(x, t).ok().map(|f| f.s),
        FieldKind::V => w.real_fields(x, t).ok().map(|f| f.v),
        FieldKind::Q => w.quantum_potential(x, t).ok(),
        _ => None,
    }
}

fn argand_value(w: &WaveModel, field: FieldKind, z: Complex64, t: f64) -> Option<f64> {
    match field {
        FieldKind::PsibarMod => w.psi_bar(z, t).ok().map(|v| v.norm()),
        FieldKind::PsibarPhase => {
            if w.node_ratio(z, t) < POLE_EPS {
                return None;
            }
            w.psi_bar(z, t).ok().map(|v| polar_decompose(v).1)
        }
        FieldKind::VbarMod => w.v_bar(z, t).ok().map(|v| v.norm()),
        FieldKind::VbarPhase => w.v_bar(z, t).ok().map(|v| polar_decompose(v).1),
        _ => None,
    }
}

/// Samples one of `rho, S, v, Q` on `x` (first coordinate) by `t`.
pub fn sample_real_spacetime(w: &WaveModel, x: Axis, t: Axis, field: FieldKind) -> Result<FieldGrid> {
    if !FieldKind::REAL.contains(&field) {
        return Err(Error::InvalidParameter(format!("{field} is not a real-axis field")));
    }
    let rows = (0..x.n)
        .into_par_iter()
        .map(|i| t.coords().map(|tj| real_value(w, field, x.coord(i), tj)).collect())
        .collect();
    Ok(FieldGrid::from_rows(field, x, t, None, rows))
}

/// Samples one of the polar parts of `psi_bar` or `v_bar` on the rectangle
/// `re x im` at time `t`.
pub fn sample_argand(w: &WaveModel, re: Axis, im: Axis, t: f64, field: FieldKind) -> Result<FieldGrid> {
    if !FieldKind::ARGAND.contains(&field) {
        return Err(Error::InvalidParameter(format!("{field} is not an Argand-plane field")));
    }
    let rows = (0..re.n)
        .into_par_iter()
        .map(|i| {
            im.coords()
                .map(|y| argand_value(w, field, Complex64::new(re.coord(i), y), t))
                .collect()
        })
        .collect();
    Ok(FieldGrid::from_rows(field, re, im, Some(t), rows))
}

/// Central-difference residual of `d rho/dt + d(rho v)/dx` on interior
/// cells of the `x` by `t` grid, using the fourth-order five-point stencil
/// on both axes. The flux `rho v` is evaluated as the probability current,
/// which stays smooth through nodes. Cells within two points of the
/// boundary, or whose stencil touches a node, are masked.
pub fn continuity_residual(w: &WaveModel, x: Axis, t: Axis) -> Result<FieldGrid> {
    if x.n < 5 || t.n < 5 {
        return Err(Error::InvalidParameter("continuity grid needs at least 5 points per axis".into()));
    }
    let point = |xi: f64, tj: f64| -> Option<(f64, f64)> {
        w.real_fields(xi, tj).ok()?;
        Some((w.density(xi, tj).ok()?, w.current(xi, tj).ok()?))
    };
    let fields: Vec<Vec<Option<(f64, f64)>>> = (0..x.n)
        .into_par_iter()
        .map(|i| t.coords().map(|tj| point(x.coord(i), tj)).collect())
        .collect();
    let (hx, ht) = (x.step(), t.step());
    let d5 = |m2: f64, m1: f64, p1: f64, p2: f64, h: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let rows = (0..x.n)
        .map(|i| {
            (0..t.n)
                .map(|j| {
                    if i < 2 || j < 2 || i + 2 >= x.n || j + 2 >= t.n {
                        return None;
                    }
                    fields[i][j]?;
                    let rho = |dj: isize| fields[i][(j as isize + dj) as usize].map(|f| f.0);
                    let cur = |di: isize| fields[(i as isize + di) as usize][j].map(|f| f.1);
                    let drho = d5(rho(-2)?, rho(-1)?, rho(1)?, rho(2)?, ht);
                    let dcur = d5(cur(-2)?, cur(-1)?, cur(1)?, cur(2)?, hx);
                    Some(drho + dcur)
                })
                .collect()
        })
        .collect();
    Ok(FieldGrid::from_rows(FieldKind::ContinuityResidual, x, t, None, rows))
}

/// Real-axis normalization `integral |psi(x, t)|^2 dx` over `[lo, hi]` by
/// composite Gauss-Legendre quadrature on panels of width at most 0.1.
pub fn real_axis_norm(w: &WaveModel, lo: f64, hi: f64, t: f64) -> Result<f64> {
    let panels = ((hi - lo) / 0.1).ceil().max(1.0) as usize;
    let mut failure = None;
    let v = crate::quad::gl20().integrate_composite(lo, hi, panels, |x| match w.density(x, t) {
        Ok(r) => r,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Writes `c1,c2,value,mask` rows, `c2` varying fastest.
pub fn write_grid(grid: &FieldGrid, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let mut body = String::from("c1,c2,value,mask\n");
    for i in 0..grid.c1.n {
        let c1 = fmt_f64(grid.c1.coord(i));
        for j in 0..grid.c2.n {
            let k = i * grid.c2.n + j;
            let c2 = fmt_f64(grid.c2.coord(j));
            if grid.mask[k] {
                body.push_str(&format!("{c1},{c2},,1\n"));
            } else {
                body.push_str(&format!("{c1},{c2},{},0\n", fmt_f64(grid.values[k])));
            }
        }
    }
    out.write_all(body.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Writes `member,t,re,im,status` rows sorted by member, then time.
pub fn write_paths(paths: &[(usize, &TrajectoryPath)], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let mut order: Vec<_> = paths.to_vec();
    order.sort_by_key(|(id, _)| *id);
    let mut body = String::from("member,t,re,im,status\n");
    for (id, p) in order {
        let mut samples = p.samples.clone();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, z) in samples {
            body.push_str(&format!(
                "{id},{},{},{},{}\n",
                fmt_f64(t),
                fmt_f64(z.re),
                fmt_f64(z.im),
                p.status
            ));
        }
    }
    out.write_all(body.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// A row type of a CSV report.
pub trait CsvRecord {
    const HEADER: &'static str;
    fn row(&self) -> String;
}

impl CsvRecord for NodeRecord {
    const HEADER: &'static str = "t,re,im,residual,winding";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_f64(self.t),
            fmt_f64(self.z_node.re),
            fmt_f64(self.z_node.im),
            fmt_f64(self.residual),
            self.winding
        )
    }
}

impl CsvRecord for CausticPoint {
    const HEADER: &'static str = "t,re,im,member,residual";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_f64(self.t),
            fmt_f64(self.z.re),
            fmt_f64(self.z.im),
            self.member_index,
            fmt_f64(self.tangency_residual)
        )
    }
}

/// A detected loop tagged with the member it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopRow {
    pub member: usize,
    pub lp: TrajectoryLoop,
}

impl CsvRecord for LoopRow {
    const HEADER: &'static str = "member,t_start,t_end,re,im,orientation,winding";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.member,
            fmt_f64(self.lp.t_start),
            fmt_f64(self.lp.t_end),
            fmt_f64(self.lp.point.re),
            fmt_f64(self.lp.point.im),
            self.lp.orientation,
            self.lp.winding.map(|w| w.to_string()).unwrap_or_default()
        )
    }
}

/// Writes a header line followed by one line per record.
pub fn write_report<R: CsvRecord>(records: &[R], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let mut body = format!("{}\n", R::HEADER);
    for r in records {
        body.push_str(&r.row());
        body.push('\n');
    }
    out.write_all(body.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}
