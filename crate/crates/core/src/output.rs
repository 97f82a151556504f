//! Report writers. Every file carries the tool version and the resolved
//! parameter set; CSV files do so in `#` comment lines ahead of the header.
//! Numbers use shortest round-trip decimal formatting.

use std::io::{self, Write};

use serde_json::{json, Value};

use crate::calibration::CalibrationResult;
use crate::config::RunConfig;
use crate::simulator::SimulationOutcome;
use crate::sweep::SweepResult;
use crate::units::SECONDS_PER_YEAR;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SAFETY_MAP_FILE: &str = "safety_map.csv";
pub const SAFETY_SUMMARY_FILE: &str = "safety_map.json";
pub const CALIBRATION_FILE: &str = "calibration.json";

pub const SERIES_HEADER: &str = "T_s,t_cor_m,t_unc_m,u_c_m,p_Pa,p_n,k_f,r_c_m";

fn preamble<W: Write>(w: &mut W, config: &RunConfig) -> io::Result<()> {
    writeln!(w, "# raacsim {VERSION}")?;
    writeln!(w, "# params: {}", config.echo())
}

pub fn write_series<W: Write>(
    mut w: W,
    outcome: &SimulationOutcome,
    config: &RunConfig,
) -> io::Result<()> {
    preamble(&mut w, config)?;
    writeln!(w, "{SERIES_HEADER}")?;
    for s in &outcome.series {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.time, s.t_cor, s.t_unc, s.u_c, s.p, s.p_n, s.k_f, s.r_c
        )?;
    }
    w.flush()
}

pub fn summary(outcome: &SimulationOutcome, config: &RunConfig) -> Value {
    json!({
        "version": VERSION,
        "t_crit": outcome.t_crit,
        "t_crit_um": outcome.t_crit.map(|t| t * 1e6),
        "T_crit": outcome.t_crit_time,
        "T_crit_years": outcome.t_crit_time.map(|t| t / SECONDS_PER_YEAR),
        "termination": outcome.termination.as_str(),
        "stress_free_end": outcome.stress_free_end,
        "steps": outcome.series.len(),
        "error": outcome.error,
        "fd_checks": outcome.fd_checks,
        "params": config.echo(),
    })
}

pub fn sweep_summary(result: &SweepResult, config: &RunConfig) -> Value {
    json!({
        "version": VERSION,
        "grid": result.grid,
        "cells": result.cells.len(),
        "failures": result.failures(),
        "solid_density": config.params.concrete.solid_density,
        "porosity_lines": result.porosity_lines(),
        "params": config.echo(),
    })
}

pub fn write_safety_map<W: Write>(
    mut w: W,
    result: &SweepResult,
    config: &RunConfig,
) -> io::Result<()> {
    preamble(&mut w, config)?;
    result.write_csv(&mut w)?;
    w.flush()
}

pub fn calibration_summary(
    result: &CalibrationResult,
    config: &RunConfig,
    records: usize,
) -> Value {
    json!({
        "version": VERSION,
        "m": result.m,
        "rate_multiplier": result.rate_multiplier,
        "objective": result.objective,
        "records": records,
        "residuals": result.residuals,
        "trace": result.trace,
        "options": {
            "m_min": config.calibration.options.m_min,
            "m_max": config.calibration.options.m_max,
            "tolerance": config.calibration.options.tolerance,
            "fit_rate_multiplier": config.calibration.options.fit_rate_multiplier,
            "multiplier_min": config.calibration.options.multiplier_min,
            "multiplier_max": config.calibration.options.multiplier_max,
        },
        "params": config.echo(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write>(mut w: W, value: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
