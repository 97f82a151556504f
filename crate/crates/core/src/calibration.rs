//! Least-squares calibration of the diffusivity exponent `m`.
//!
//! The objective is the weighted sum of squared log residuals between
//! simulated and observed critical penetrations. Records whose simulation
//! exhausts the horizon are censored: the simulated value is only known to
//! exceed the horizon, so they contribute only when the observation lies
//! below it.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::DatasetError;
use crate::params::{Geometry, ModelParams, SolverSettings};
use crate::roots::{golden_section, Probe};
use crate::simulator::{run_simulation, SimulationError};

/// One experimental observation, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRecord {
    pub porosity: f64,
    pub cover: f64,
    pub diameter: f64,
    pub current_density: f64,
    /// Observed critical penetration, m.
    pub t_crit: f64,
    pub weight: f64,
}

impl CalibrationRecord {
    fn apply(&self, base: &ModelParams, m: f64, multiplier: f64) -> ModelParams {
        let mut p = base.clone();
        p.concrete.porosity = self.porosity;
        p.concrete.diffusivity_exponent = m;
        p.rust.rate_precipitation *= multiplier;
        p.rust.rate_oxidation *= multiplier;
        p.steel.corrosion_current_density = self.current_density;
        p.steel.current_schedule.clear();
        let mut g = Geometry::from_cover_and_diameter(self.cover, self.diameter);
        g.rebar_length = base.geometry.rebar_length;
        p.geometry = g;
        p
    }
}

struct Column {
    names: &'static [(&'static str, f64)],
    required: bool,
}

const COLUMNS: [Column; 6] = [
    Column {
        names: &[("phi", 1.0)],
        required: true,
    },
    Column {
        names: &[("cover_mm", 1e-3), ("cover_m", 1.0)],
        required: true,
    },
    Column {
        names: &[("diameter_mm", 1e-3), ("diameter_m", 1.0)],
        required: true,
    },
    Column {
        names: &[("ia_uA_cm2", 1e-2), ("ia_A_m2", 1.0)],
        required: true,
    },
    Column {
        names: &[("tcrit_um", 1e-6), ("tcrit_m", 1.0)],
        required: true,
    },
    Column {
        names: &[("weight", 1.0)],
        required: false,
    },
];

/// Parse a dataset with header
/// `phi,cover_mm,diameter_mm,ia_uA_cm2,tcrit_um[,weight]`. Columns may
/// appear in any order; `cover_m`, `diameter_m`, `ia_A_m2` and `tcrit_m`
/// are accepted in place of their scaled counterparts.
pub fn parse_dataset<R: std::io::Read>(reader: R) -> Result<Vec<CalibrationRecord>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let schema = |line: usize, reason: String| DatasetError::Schema { line, reason };
    let header = rdr.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    let header_line = 1;
    let mut slots: [Option<(usize, f64)>; 6] = [None; 6];
    for (i, h) in header.iter().enumerate() {
        let found = COLUMNS
            .iter()
            .enumerate()
            .find_map(|(k, c)| c.names.iter().find(|(n, _)| *n == h).map(|&(_, f)| (k, f)));
        match found {
            Some((k, _)) if slots[k].is_some() => {
                return Err(schema(header_line, format!("duplicate column for `{h}`")))
            }
            Some((k, f)) => slots[k] = Some((i, f)),
            None => return Err(schema(header_line, format!("unknown column `{h}`"))),
        }
    }
    for (k, c) in COLUMNS.iter().enumerate() {
        if c.required && slots[k].is_none() {
            let names: Vec<&str> = c.names.iter().map(|n| n.0).collect();
            return Err(schema(
                header_line,
                format!("missing column {}", names.join(" or ")),
            ));
        }
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            schema(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let mut v = [1.0; 6];
        for (k, slot) in slots.iter().enumerate() {
            let Some((i, factor)) = *slot else { continue };
            let text = row.get(i).unwrap_or("");
            let x: f64 = text.parse().map_err(|_| {
                schema(
                    line,
                    format!("`{text}` in column `{}` is not a number", &header[i]),
                )
            })?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(schema(
                    line,
                    format!("column `{}` must be positive, got {x}", &header[i]),
                ));
            }
            v[k] = x * factor;
        }
        if v[0] >= 1.0 {
            return Err(schema(line, format!("porosity {} must be below 1", v[0])));
        }
        records.push(CalibrationRecord {
            porosity: v[0],
            cover: v[1],
            diameter: v[2],
            current_density: v[3],
            t_crit: v[4],
            weight: v[5],
        });
    }
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(records)
}

pub fn load_dataset(path: &Path) -> Result<Vec<CalibrationRecord>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationOptions {
    pub m_min: f64,
    pub m_max: f64,
    /// Bracket width at which the search on `m` stops.
    pub tolerance: f64,
    /// Also fit a common factor on both reaction rates.
    pub fit_rate_multiplier: bool,
    pub multiplier_min: f64,
    pub multiplier_max: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            m_min: 0.0,
            m_max: 8.0,
            tolerance: 1e-6,
            fit_rate_multiplier: false,
            multiplier_min: 0.1,
            multiplier_max: 10.0,
        }
    }
}

impl CalibrationOptions {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |reason: &str| Err(CalibrationError::Options(reason.to_string()));
        if !(self.m_min >= 0.0 && self.m_min < self.m_max && self.m_max.is_finite()) {
            return bad("m bounds must satisfy 0 <= m_min < m_max");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.fit_rate_multiplier
            && !(self.multiplier_min > 0.0 && self.multiplier_min < self.multiplier_max)
        {
            return bad("multiplier bounds must satisfy 0 < min < max");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("invalid calibration options: {0}")]
    Options(String),
    #[error("no calibration records")]
    NoRecords,
    #[error("simulation of record {index} failed: {source}")]
    Simulation {
        index: usize,
        #[source]
        source: Box<SimulationError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecordResidual {
    pub index: usize,
    pub observed: f64,
    /// Simulated critical penetration, absent when the horizon ran out.
    pub simulated: Option<f64>,
    /// `ln(simulated / observed)`, or its censored lower bound.
    pub residual: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub m: f64,
    pub rate_multiplier: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub m: f64,
    pub rate_multiplier: Option<f64>,
    pub objective: f64,
    pub residuals: Vec<RecordResidual>,
    pub trace: Vec<TracePoint>,
}

/// Number of equal sub-intervals searched independently for `m`.
const SEEDS: usize = 3;

struct Objective<'a> {
    records: &'a [CalibrationRecord],
    base: &'a ModelParams,
    settings: &'a SolverSettings,
}

impl Objective<'_> {
    fn residuals(&self, m: f64, multiplier: f64) -> Result<Vec<RecordResidual>, CalibrationError> {
        self.records
            .par_iter()
            .enumerate()
            .map(|(index, r)| {
                let p = r.apply(self.base, m, multiplier);
                let out = run_simulation(&p, self.settings).map_err(|e| {
                    CalibrationError::Simulation {
                        index,
                        source: Box::new(e),
                    }
                })?;
                Ok(match out.t_crit {
                    Some(t) => RecordResidual {
                        index,
                        observed: r.t_crit,
                        simulated: Some(t),
                        residual: (t / r.t_crit).ln(),
                        censored: false,
                    },
                    None => RecordResidual {
                        index,
                        observed: r.t_crit,
                        simulated: None,
                        residual: (self.settings.t_cor_max / r.t_crit).ln().max(0.0),
                        censored: true,
                    },
                })
            })
            .collect()
    }

    fn value(&self, res: &[RecordResidual]) -> f64 {
        res.iter()
            .zip(self.records)
            .map(|(r, rec)| rec.weight * r.residual * r.residual)
            .sum()
    }

    fn eval(
        &self,
        m: f64,
        multiplier: f64,
        trace: &mut Vec<TracePoint>,
    ) -> Result<f64, CalibrationError> {
        let objective = self.value(&self.residuals(m, multiplier)?);
        trace.push(TracePoint {
            m,
            rate_multiplier: multiplier,
            objective,
        });
        Ok(objective)
    }

    /// Best `m` at fixed multiplier, searching each seed interval.
    fn best_m(
        &self,
        opts: &CalibrationOptions,
        multiplier: f64,
        trace: &mut Vec<TracePoint>,
    ) -> Result<Probe, CalibrationError> {
        let width = (opts.m_max - opts.m_min) / SEEDS as f64;
        let mut best: Option<Probe> = None;
        for s in 0..SEEDS {
            let lo = opts.m_min + s as f64 * width;
            let hi = if s + 1 == SEEDS {
                opts.m_max
            } else {
                lo + width
            };
            let mut probes = Vec::new();
            let p = golden_section(
                |m| self.eval(m, multiplier, trace),
                lo,
                hi,
                opts.tolerance,
                500,
                &mut probes,
            )?;
            if best.is_none_or(|b| p.value < b.value) {
                best = Some(p);
            }
        }
        Ok(best.expect("at least one seed"))
    }
}

/// Fit `m` (and optionally a rate multiplier) to the records.
pub fn fit_exponent(
    records: &[CalibrationRecord],
    base: &ModelParams,
    settings: &SolverSettings,
    opts: &CalibrationOptions,
) -> Result<CalibrationResult, CalibrationError> {
    opts.validate()?;
    if records.is_empty() {
        return Err(CalibrationError::NoRecords);
    }
    let objective = Objective {
        records,
        base,
        settings,
    };
    let mut trace = Vec::new();
    let (m, multiplier) = if opts.fit_rate_multiplier {
        // search the multiplier on a log scale, `m` nested inside
        let mut outer = Vec::new();
        let mut inner_trace = Vec::new();
        let best = golden_section(
            |x: f64| -> Result<f64, CalibrationError> {
                Ok(objective.best_m(opts, x.exp(), &mut inner_trace)?.value)
            },
            opts.multiplier_min.ln(),
            opts.multiplier_max.ln(),
            opts.tolerance,
            500,
            &mut outer,
        )?;
        trace = inner_trace;
        let multiplier = best.x.exp();
        let m = objective.best_m(opts, multiplier, &mut trace)?.x;
        (m, Some(multiplier))
    } else {
        (objective.best_m(opts, 1.0, &mut trace)?.x, None)
    };
    let residuals = objective.residuals(m, multiplier.unwrap_or(1.0))?;
    for r in residuals.iter().filter(|r| r.censored) {
        log::warn!(
            "record {} did not crack within the horizon; treated as censored",
            r.index
        );
    }
    Ok(CalibrationResult {
        m,
        rate_multiplier: multiplier,
        objective: objective.value(&residuals),
        residuals,
        trace,
    })
}
