//! Unit tokens accepted in configuration values.
//!
//! Values are either bare numbers (already SI) or strings of the form
//! `"<number> <unit>"`. Everything is converted to SI on load.

use crate::error::ConfigError;

/// Physical dimension expected by a configuration field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Length,
    Time,
    Pressure,
    CurrentDensity,
    Diffusivity,
    Density,
    MolarMass,
    FirstOrderRate,
    SecondOrderRate,
    Concentration,
    Charge,
}

pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

const TABLE: &[(&str, Dimension, f64)] = {
    use Dimension::*;
    &[
        ("", Dimensionless, 1.0),
        ("-", Dimensionless, 1.0),
        ("%", Dimensionless, 1e-2),
        ("m", Length, 1.0),
        ("cm", Length, 1e-2),
        ("mm", Length, 1e-3),
        ("um", Length, 1e-6),
        ("µm", Length, 1e-6),
        ("μm", Length, 1e-6),
        ("nm", Length, 1e-9),
        ("s", Time, 1.0),
        ("min", Time, 60.0),
        ("h", Time, 3600.0),
        ("day", Time, 86_400.0),
        ("days", Time, 86_400.0),
        ("yr", Time, SECONDS_PER_YEAR),
        ("year", Time, SECONDS_PER_YEAR),
        ("years", Time, SECONDS_PER_YEAR),
        ("Pa", Pressure, 1.0),
        ("kPa", Pressure, 1e3),
        ("MPa", Pressure, 1e6),
        ("GPa", Pressure, 1e9),
        ("A/m2", CurrentDensity, 1.0),
        ("mA/cm2", CurrentDensity, 10.0),
        ("uA/cm2", CurrentDensity, 1e-2),
        ("µA/cm2", CurrentDensity, 1e-2),
        ("μA/cm2", CurrentDensity, 1e-2),
        ("m2/s", Diffusivity, 1.0),
        ("cm2/s", Diffusivity, 1e-4),
        ("mm2/s", Diffusivity, 1e-6),
        ("kg/m3", Density, 1.0),
        ("g/cm3", Density, 1e3),
        ("kg/mol", MolarMass, 1.0),
        ("g/mol", MolarMass, 1e-3),
        ("1/s", FirstOrderRate, 1.0),
        ("1/h", FirstOrderRate, 1.0 / 3600.0),
        ("1/day", FirstOrderRate, 1.0 / 86_400.0),
        ("m3/(mol*s)", SecondOrderRate, 1.0),
        ("L/(mol*s)", SecondOrderRate, 1e-3),
        ("mol/m3", Concentration, 1.0),
        ("mol/L", Concentration, 1e3),
        ("mmol/L", Concentration, 1.0),
        ("C/mol", Charge, 1.0),
    ]
};

/// Look up a unit token, returning its dimension and SI factor.
pub fn lookup(token: &str) -> Option<(Dimension, f64)> {
    TABLE
        .iter()
        .find(|(t, _, _)| *t == token)
        .map(|&(_, d, f)| (d, f))
}

/// Canonical SI token for a dimension, used when echoing values.
pub fn si_token(dim: Dimension) -> &'static str {
    use Dimension::*;
    match dim {
        Dimensionless => "",
        Length => "m",
        Time => "s",
        Pressure => "Pa",
        CurrentDensity => "A/m2",
        Diffusivity => "m2/s",
        Density => "kg/m3",
        MolarMass => "kg/mol",
        FirstOrderRate => "1/s",
        SecondOrderRate => "m3/(mol*s)",
        Concentration => "mol/m3",
        Charge => "C/mol",
    }
}

/// Parse `"<number> <unit>"` and convert it to SI, checking the dimension.
pub fn parse_quantity(field: &str, text: &str, expected: Dimension) -> Result<f64, ConfigError> {
    let text = text.trim();
    let split = text.find(|c: char| c.is_whitespace()).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num.parse().map_err(|_| ConfigError::Unit {
        field: field.to_string(),
        reason: format!("cannot parse number in `{text}`"),
    })?;
    let unit = unit.trim();
    let (dim, factor) = lookup(unit).ok_or_else(|| ConfigError::Unit {
        field: field.to_string(),
        reason: format!("unknown unit `{unit}`"),
    })?;
    if dim != expected {
        return Err(ConfigError::Unit {
            field: field.to_string(),
            reason: format!("`{unit}` is {dim:?}, expected {expected:?}"),
        });
    }
    Ok(value * factor)
}
