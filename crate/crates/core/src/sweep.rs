//! Parameter grids and safety maps.
//!
//! A sweep runs one simulation per grid cell (porosity or dry density,
//! cover, bar diameter) and classifies each cell against a corrosion
//! threshold: if the critical penetration exceeds the threshold, corrosion
//! can reach it before any surface crack gives warning.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::params::{porosity_from_density, Geometry, ModelParams, SolverSettings};
use crate::simulator::{run_simulation, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Porosity,
    DryDensity,
    Cover,
    Diameter,
}

impl AxisName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "porosity" => Some(AxisName::Porosity),
            "dry_density" => Some(AxisName::DryDensity),
            "cover" => Some(AxisName::Cover),
            "diameter" => Some(AxisName::Diameter),
            _ => None,
        }
    }

    /// CSV column heading.
    pub fn column(self) -> &'static str {
        match self {
            AxisName::Porosity => "phi",
            AxisName::DryDensity => "density_kg_m3",
            AxisName::Cover => "cover_mm",
            AxisName::Diameter => "diameter_mm",
        }
    }

    /// Factor from SI to the unit of [`AxisName::column`].
    fn display_factor(self) -> f64 {
        match self {
            AxisName::Porosity | AxisName::DryDensity => 1.0,
            AxisName::Cover | AxisName::Diameter => 1e3,
        }
    }

    fn sets_porosity(self) -> bool {
        matches!(self, AxisName::Porosity | AxisName::DryDensity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// One grid axis, values in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.max;
                }
                let s = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.min + s * (self.max - self.min),
                    Scale::Log => (self.min.ln() + s * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let field = format!("sweep.axes.{}", self.column_key());
        if self.count == 0 {
            return Err(ConfigError::invalid(field, "count must be at least 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(ConfigError::invalid(field, "bounds must be finite"));
        }
        if self.count == 1 && self.min != self.max {
            return Err(ConfigError::invalid(
                field,
                "a single-point axis needs min = max",
            ));
        }
        if self.count > 1 && !(self.min < self.max) {
            return Err(ConfigError::invalid(field, "min must be below max"));
        }
        if !(self.min > 0.0) {
            return Err(ConfigError::invalid(field, "values must be positive"));
        }
        if self.name == AxisName::Porosity && self.max >= 1.0 {
            return Err(ConfigError::invalid(field, "porosity must stay below 1"));
        }
        Ok(())
    }

    fn column_key(&self) -> &'static str {
        match self.name {
            AxisName::Porosity => "porosity",
            AxisName::DryDensity => "dry_density",
            AxisName::Cover => "cover",
            AxisName::Diameter => "diameter",
        }
    }
}

/// Up to three axes swept as a full tensor grid, row-major (last axis
/// fastest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    /// Corrosion penetration threshold, m.
    pub threshold: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.axes.is_empty() || self.axes.len() > 3 {
            return Err(ConfigError::invalid(
                "sweep.axes",
                "between one and three axes required",
            ));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            for b in &self.axes[i + 1..] {
                if a.name == b.name || (a.name.sets_porosity() && b.name.sets_porosity()) {
                    return Err(ConfigError::invalid(
                        "sweep.axes",
                        format!("{:?} and {:?} set the same quantity", a.name, b.name),
                    ));
                }
            }
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(ConfigError::invalid("sweep.threshold", "must be positive"));
        }
        Ok(())
    }

    /// Cell coordinates in row-major order.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total: usize = values.iter().map(Vec::len).product();
        (0..total)
            .map(|mut k| {
                let mut c = vec![0.0; values.len()];
                for (a, vals) in values.iter().enumerate().rev() {
                    c[a] = vals[k % vals.len()];
                    k /= vals.len();
                }
                c
            })
            .collect()
    }
}

/// Parameters of one cell: the base set with the axis values substituted.
pub fn cell_params(
    base: &ModelParams,
    axes: &[Axis],
    coords: &[f64],
) -> Result<ModelParams, ConfigError> {
    let mut p = base.clone();
    let mut cover = p.geometry.cover;
    let mut diameter = p.geometry.diameter();
    for (axis, &v) in axes.iter().zip(coords) {
        match axis.name {
            AxisName::Porosity => p.concrete.porosity = v,
            AxisName::DryDensity => {
                p.concrete.porosity = porosity_from_density(v, p.concrete.solid_density)?
            }
            AxisName::Cover => cover = v,
            AxisName::Diameter => diameter = v,
        }
    }
    let mut geometry = Geometry::from_cover_and_diameter(cover, diameter);
    geometry.rebar_length = base.geometry.rebar_length;
    p.geometry = geometry;
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    /// Critical penetration at or above the threshold.
    AtRiskConcealed,
    /// Surface cracks appear before the threshold is reached.
    CracksFirst,
    /// Horizon exhausted without surface cracking.
    Undetermined,
    Error,
}

impl CellClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CellClass::AtRiskConcealed => "at_risk_concealed",
            CellClass::CracksFirst => "cracks_first",
            CellClass::Undetermined => "undetermined",
            CellClass::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SafetyCell {
    /// Axis values in SI units, in axis order.
    pub coords: Vec<f64>,
    pub porosity: f64,
    pub t_crit: Option<f64>,
    /// Concealment time, s.
    pub t_crit_time: Option<f64>,
    pub class: CellClass,
    pub error: Option<String>,
}

pub fn classify(t_crit: Option<f64>, threshold: f64) -> CellClass {
    match t_crit {
        Some(t) if t >= threshold => CellClass::AtRiskConcealed,
        Some(_) => CellClass::CracksFirst,
        None => CellClass::Undetermined,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub cells: Vec<SafetyCell>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.class == CellClass::Error)
            .count()
    }

    /// Safety map CSV: axis columns, `t_crit_um,T_crit_years,class`.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.grid.axes.iter().map(|a| a.name.column()).collect();
        header.extend(["t_crit_um", "T_crit_years", "class"]);
        out.write_record(&header)?;
        for cell in &self.cells {
            let mut row: Vec<String> = self
                .grid
                .axes
                .iter()
                .zip(&cell.coords)
                .map(|(a, v)| (v * a.name.display_factor()).to_string())
                .collect();
            row.push(
                cell.t_crit
                    .map(|t| (t * 1e6).to_string())
                    .unwrap_or_default(),
            );
            row.push(
                cell.t_crit_time
                    .map(|t| (t / crate::units::SECONDS_PER_YEAR).to_string())
                    .unwrap_or_default(),
            );
            row.push(cell.class.as_str().to_string());
            out.write_record(&row)?;
        }
        out.flush()
    }

    /// Exponential fits of `t_crit` against porosity, one per line of the
    /// grid along the porosity (or density) axis.
    pub fn porosity_lines(&self) -> Vec<PorosityLine> {
        let Some(k) = self.grid.axes.iter().position(|a| a.name.sets_porosity()) else {
            return Vec::new();
        };
        let mut lines: Vec<PorosityLine> = Vec::new();
        for cell in &self.cells {
            let fixed: Vec<(AxisName, f64)> = self
                .grid
                .axes
                .iter()
                .zip(&cell.coords)
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, (a, &v))| (a.name, v))
                .collect();
            let idx = match lines.iter().position(|l| l.fixed == fixed) {
                Some(i) => i,
                None => {
                    lines.push(PorosityLine {
                        fixed,
                        points: Vec::new(),
                        fit: None,
                        fit_error: None,
                    });
                    lines.len() - 1
                }
            };
            if let Some(t) = cell.t_crit {
                lines[idx].points.push((cell.porosity, t));
            }
        }
        for line in &mut lines {
            line.points.sort_by(|a, b| a.0.total_cmp(&b.0));
            match exponential_fit(&line.points) {
                Ok(f) => line.fit = Some(f),
                Err(e) => line.fit_error = Some(e.to_string()),
            }
        }
        lines
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PorosityLine {
    /// Values of the other axes along this line, SI.
    pub fixed: Vec<(AxisName, f64)>,
    /// `(φ, t_crit)` pairs with a critical penetration.
    pub points: Vec<(f64, f64)>,
    pub fit: Option<ExponentialFit>,
    pub fit_error: Option<String>,
}

/// Run every cell of the grid on `workers` threads. Cell failures are
/// recorded, never propagated.
pub fn run_sweep(
    grid: &SweepGrid,
    params: &ModelParams,
    settings: &SolverSettings,
    workers: usize,
) -> Result<SweepResult, ConfigError> {
    grid.validate()?;
    let coords = grid.cells();
    // resolve every cell first so a bad grid fails before any work is done
    let cells: Vec<ModelParams> = coords
        .iter()
        .map(|c| cell_params(params, &grid.axes, c))
        .collect::<Result<_, _>>()?;
    for p in &cells {
        settings.validate(&p.geometry)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError::invalid("workers", e.to_string()))?;
    let results: Vec<SafetyCell> = pool.install(|| {
        coords
            .par_iter()
            .zip(cells.par_iter())
            .map(|(c, p)| run_cell(c, p, settings, grid.threshold))
            .collect()
    });
    Ok(SweepResult {
        grid: grid.clone(),
        cells: results,
    })
}

fn run_cell(
    coords: &[f64],
    p: &ModelParams,
    settings: &SolverSettings,
    threshold: f64,
) -> SafetyCell {
    let mut cell = SafetyCell {
        coords: coords.to_vec(),
        porosity: p.concrete.porosity,
        t_crit: None,
        t_crit_time: None,
        class: CellClass::Error,
        error: None,
    };
    match run_simulation(p, settings) {
        Ok(out) => {
            debug_assert!(out.termination != Termination::Error);
            cell.t_crit = out.t_crit;
            cell.t_crit_time = out.t_crit_time;
            cell.class = classify(out.t_crit, threshold);
        }
        Err(e) => {
            log::warn!("cell {coords:?} failed: {e}");
            cell.error = Some(e.to_string());
        }
    }
    cell
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialFit {
    /// `a` in `t = a exp(b φ)`.
    pub prefactor: f64,
    /// `b` in `t = a exp(b φ)`.
    pub growth_rate: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("at least 3 points required, got {0}")]
    TooFewPoints(usize),
    #[error("t_crit must be positive, got {0}")]
    NonPositive(f64),
    #[error("porosity values are not distinct")]
    DegenerateAbscissa,
}

/// Least-squares line through `(φ, ln t)`.
pub fn exponential_fit(curve: &[(f64, f64)]) -> Result<ExponentialFit, FitError> {
    if curve.len() < 3 {
        return Err(FitError::TooFewPoints(curve.len()));
    }
    if let Some(&(_, t)) = curve.iter().find(|(_, t)| !(*t > 0.0)) {
        return Err(FitError::NonPositive(t));
    }
    for (i, a) in curve.iter().enumerate() {
        if curve[i + 1..].iter().any(|b| b.0 == a.0) {
            return Err(FitError::DegenerateAbscissa);
        }
    }
    let n = curve.len() as f64;
    let mx = curve.iter().map(|p| p.0).sum::<f64>() / n;
    let my = curve.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, t) in curve {
        let (dx, dy) = (x - mx, t.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = curve
        .iter()
        .map(|&(x, t)| (t.ln() - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ExponentialFit {
        prefactor: intercept.exp(),
        growth_rate: slope,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{default_params, default_solver};
    use crate::simulator::run_simulation;

    fn axis(name: AxisName, min: f64, max: f64, count: usize) -> Axis {
        Axis {
            name,
            min,
            max,
            count,
            scale: Scale::Linear,
        }
    }

    #[test]
    fn axis_values() {
        let a = axis(AxisName::Cover, 0.02, 0.05, 4);
        assert_eq!(a.values(), vec![0.02, 0.03, 0.04, 0.05]);
        let l = Axis {
            scale: Scale::Log,
            ..axis(AxisName::Porosity, 0.01, 0.64, 4)
        };
        let v = l.values();
        assert!((v[1] - 0.04).abs() < 1e-15 && (v[2] - 0.16).abs() < 1e-15);
        assert_eq!(v[3], 0.64);
    }

    #[test]
    fn row_major_cells() {
        let g = SweepGrid {
            axes: vec![
                axis(AxisName::Porosity, 0.1, 0.2, 2),
                axis(AxisName::Cover, 0.02, 0.03, 2),
            ],
            threshold: 1e-4,
        };
        assert_eq!(
            g.cells(),
            vec![
                vec![0.1, 0.02],
                vec![0.1, 0.03],
                vec![0.2, 0.02],
                vec![0.2, 0.03]
            ]
        );
    }

    #[test]
    fn grid_validation() {
        let mut g = SweepGrid {
            axes: vec![
                axis(AxisName::Porosity, 0.1, 0.2, 2),
                axis(AxisName::DryDensity, 400.0, 600.0, 2),
            ],
            threshold: 1e-4,
        };
        assert!(g.validate().is_err());
        g.axes.pop();
        g.validate().unwrap();
        g.axes[0].max = 0.1;
        assert!(g.validate().is_err());
        g.axes[0].count = 1;
        g.validate().unwrap();
        g.threshold = 0.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn density_axis_maps_to_porosity() {
        let base = default_params();
        let ax = [axis(AxisName::DryDensity, 500.0, 600.0, 2)];
        let p = cell_params(&base, &ax, &[500.0]).unwrap();
        assert!((p.concrete.porosity - 0.8).abs() < 1e-15);
        assert!(cell_params(&base, &ax, &[3000.0]).is_err());
    }

    #[test]
    fn classification_boundary() {
        assert_eq!(classify(Some(1e-4), 1e-4), CellClass::AtRiskConcealed);
        assert_eq!(classify(Some(0.99e-4), 1e-4), CellClass::CracksFirst);
        assert_eq!(classify(None, 1e-4), CellClass::Undetermined);
    }

    #[test]
    fn two_by_two_grid() {
        let g = SweepGrid {
            axes: vec![
                axis(AxisName::Porosity, 0.15, 0.6, 2),
                axis(AxisName::Cover, 0.03, 0.05, 2),
            ],
            threshold: 1.0e-3,
        };
        let r = run_sweep(&g, &default_params(), &default_solver(), 2).unwrap();
        let t: Vec<f64> = r.cells.iter().map(|c| c.t_crit.unwrap()).collect();
        assert!(
            t[0] < t[1] && t[2] < t[3] && t[0] < t[2] && t[1] < t[3],
            "{t:?}"
        );
        assert!(r.cells.iter().all(|c| c.class == CellClass::CracksFirst));
    }

    #[test]
    fn single_cell_matches_simulation() {
        let p = default_params();
        let s = default_solver();
        let g = SweepGrid {
            axes: vec![axis(AxisName::Porosity, 0.3, 0.3, 1)],
            threshold: 1e-4,
        };
        let r = run_sweep(&g, &p, &s, 1).unwrap();
        let mut q = p.clone();
        q.concrete.porosity = 0.3;
        let out = run_simulation(&q, &s).unwrap();
        assert_eq!(r.cells[0].t_crit, out.t_crit);
        assert_eq!(r.cells[0].t_crit_time, out.t_crit_time);
    }

    #[test]
    fn failed_cell_is_recorded() {
        let mut p = default_params();
        p.rust.youngs_modulus = f64::MAX;
        let g = SweepGrid {
            axes: vec![axis(AxisName::Porosity, 0.2, 0.3, 2)],
            threshold: 1e-4,
        };
        let r = run_sweep(&g, &p, &default_solver(), 1).unwrap();
        assert_eq!(r.failures(), 2);
        assert!(r.cells[0].error.is_some());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "phi,t_crit_um,T_crit_years,class"
        );
        assert!(text.lines().nth(1).unwrap().ends_with(",,,error"));
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let x = 0.1 + 0.1 * i as f64;
                (x, 3e-6 * (5.0 * x).exp())
            })
            .collect();
        let f = exponential_fit(&pts).unwrap();
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!((f.growth_rate - 5.0).abs() < 1e-12);
        assert!((f.prefactor - 3e-6).abs() < 1e-18);
    }

    #[test]
    fn perturbed_point() {
        let xs: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
        let mut pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, (4.0 * x).exp())).collect();
        pts[4].1 *= 1.01;
        let f = exponential_fit(&pts).unwrap();
        // slope shift = ln(1.01) (x_4 - mean) / Sxx
        let expected = 4.0 + 1.01f64.ln() * 0.2 / 0.1;
        assert!(
            (f.growth_rate - expected).abs() < 1e-12,
            "{}",
            f.growth_rate
        );
        assert!(f.r_squared < 1.0);
    }

    #[test]
    fn degenerate_fits() {
        assert_eq!(
            exponential_fit(&[(0.1, 1.0), (0.1, 2.0), (0.3, 3.0)]),
            Err(FitError::DegenerateAbscissa)
        );
        assert!(matches!(
            exponential_fit(&[(0.1, 1.0), (0.2, 2.0)]),
            Err(FitError::TooFewPoints(2))
        ));
        assert!(matches!(
            exponential_fit(&[(0.1, 1.0), (0.2, 0.0), (0.3, 2.0)]),
            Err(FitError::NonPositive(_))
        ));
    }
}
