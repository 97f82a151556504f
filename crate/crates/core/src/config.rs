//! Run configuration: JSON file plus `section.key=value` overrides.
//!
//! The document has sections `concrete`, `rust`, `steel`, `geometry`,
//! `solver` and optionally `sweep` and `calibration`. Values are bare
//! numbers in SI units or strings `"<number> <unit>"`. Anything not given
//! comes from the default ledger, and every resolved value carries a
//! provenance tag.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::calibration::CalibrationOptions;
use crate::error::ConfigError;
use crate::ledger::{self, Provenance, LEDGER};
use crate::params::{
    porosity_from_density, ConcreteParams, CurrentStep, Geometry, ModelParams, RustParams,
    SolverSettings, SteelParams, VolumeConvention,
};
use crate::sweep::{Axis, AxisName, Scale, SweepGrid};
use crate::units::{parse_quantity, Dimension};

const SECTIONS: &[&str] = &[
    "concrete",
    "rust",
    "steel",
    "geometry",
    "solver",
    "sweep",
    "calibration",
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Quantity(Dimension),
    Integer,
    Bool,
    Text,
    Schedule,
    Axes,
}

/// Keys beyond the numeric ledger entries.
const EXTRA_KEYS: &[(&str, Kind)] = &[
    ("concrete.dry_density", Kind::Quantity(Dimension::Density)),
    ("geometry.rebar_radius", Kind::Quantity(Dimension::Length)),
    ("geometry.outer_radius", Kind::Quantity(Dimension::Length)),
    ("steel.current_schedule", Kind::Schedule),
    ("solver.volume_convention", Kind::Text),
    ("sweep.threshold", Kind::Quantity(Dimension::Length)),
    ("sweep.axes", Kind::Axes),
    ("calibration.dataset", Kind::Text),
    (
        "calibration.m_min",
        Kind::Quantity(Dimension::Dimensionless),
    ),
    (
        "calibration.m_max",
        Kind::Quantity(Dimension::Dimensionless),
    ),
    (
        "calibration.tolerance",
        Kind::Quantity(Dimension::Dimensionless),
    ),
    ("calibration.fit_rate_multiplier", Kind::Bool),
    (
        "calibration.multiplier_min",
        Kind::Quantity(Dimension::Dimensionless),
    ),
    (
        "calibration.multiplier_max",
        Kind::Quantity(Dimension::Dimensionless),
    ),
];

/// Pairs of keys that describe the same quantity; setting one by override
/// drops the other.
const ALTERNATIVES: &[(&str, &str)] = &[
    ("concrete.porosity", "concrete.dry_density"),
    ("geometry.rebar_diameter", "geometry.rebar_radius"),
    ("geometry.cover", "geometry.outer_radius"),
];

/// Default corrosion threshold of the safety map, m.
pub const DEFAULT_THRESHOLD: f64 = 100e-6;

fn kind(key: &str) -> Option<Kind> {
    if let Some(e) = ledger::entry(key) {
        return Some(if ledger::INTEGER_KEYS.contains(&key) {
            Kind::Integer
        } else {
            Kind::Quantity(e.dim)
        });
    }
    EXTRA_KEYS.iter().find(|(k, _)| *k == key).map(|&(_, k)| k)
}

/// True if `key` (dotted) is a recognised configuration key.
pub fn is_known_key(key: &str) -> bool {
    kind(key).is_some()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    /// Dataset path, resolved against the configuration file's directory.
    pub dataset: Option<PathBuf>,
    pub options: CalibrationOptions,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub solver: SolverSettings,
    pub sweep: Option<SweepGrid>,
    pub calibration: CalibrationSettings,
    pub provenance: BTreeMap<String, Provenance>,
}

/// Unresolved key/value pairs from a document and overrides.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, Value>,
    base_dir: Option<PathBuf>,
}

impl RawConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let Value::Object(top) = doc else {
            return Err(ConfigError::Parse("top level must be an object".into()));
        };
        let mut values = BTreeMap::new();
        for (section, body) in top {
            if !SECTIONS.contains(&section.as_str()) {
                return Err(ConfigError::UnknownKey(section));
            }
            let Value::Object(fields) = body else {
                return Err(ConfigError::Parse(format!(
                    "section `{section}` must be an object"
                )));
            };
            for (k, v) in fields {
                let key = format!("{section}.{k}");
                if !is_known_key(&key) {
                    return Err(ConfigError::UnknownKey(key));
                }
                values.insert(key, v);
            }
        }
        Ok(RawConfig {
            values,
            base_dir: None,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut raw = Self::from_json_str(&text)?;
        raw.base_dir = path.parent().map(Path::to_path_buf);
        Ok(raw)
    }

    /// Apply `section.key=value`. The value is read as JSON when possible
    /// and as a plain string otherwise.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, text) = assignment.split_once('=').ok_or_else(|| {
            ConfigError::Parse(format!("override `{assignment}` is not key=value"))
        })?;
        let key = key.trim();
        if !is_known_key(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        let text = text.trim();
        let value = serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()));
        for &(a, b) in ALTERNATIVES {
            if key == a {
                self.values.remove(b);
            } else if key == b {
                self.values.remove(a);
            }
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    fn quantity(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(v) = self.values.get(key) else {
            return Ok(None);
        };
        let x = match kind(key) {
            Some(Kind::Quantity(dim)) => number(key, v, dim)?,
            Some(Kind::Integer) => {
                let x = number(key, v, Dimension::Dimensionless)?;
                if !(x >= 0.0 && x.fract() == 0.0 && x < 1e15) {
                    return Err(ConfigError::invalid(
                        key,
                        format!("must be a non-negative integer, got {x}"),
                    ));
                }
                x
            }
            _ => return Err(ConfigError::invalid(key, "not a numeric key")),
        };
        Ok(Some(x))
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut prov = BTreeMap::new();
        let mut get = |key: &str| -> Result<f64, ConfigError> {
            Ok(match self.quantity(key)? {
                Some(v) => {
                    prov.insert(key.to_string(), Provenance::User);
                    v
                }
                None => {
                    let e = ledger::entry(key).expect("ledger key");
                    prov.insert(key.to_string(), e.provenance);
                    e.value
                }
            })
        };

        let solid_density = get("concrete.solid_density")?;
        let dry = self.quantity("concrete.dry_density")?;
        let porosity = match dry {
            Some(rho) => {
                if self.values.contains_key("concrete.porosity") {
                    return Err(ConfigError::invalid(
                        "concrete.dry_density",
                        "give either porosity or dry_density, not both",
                    ));
                }
                porosity_from_density(rho, solid_density)?
            }
            None => get("concrete.porosity")?,
        };
        let concrete = ConcreteParams {
            porosity,
            youngs_modulus: get("concrete.youngs_modulus")?,
            poisson_ratio: get("concrete.poisson_ratio")?,
            tensile_strength: get("concrete.tensile_strength")?,
            water_diffusivity: get("concrete.water_diffusivity")?,
            diffusivity_exponent: get("concrete.diffusivity_exponent")?,
            transport_depth: get("concrete.transport_depth")?,
            solid_density,
        };
        let rust = RustParams {
            expansion_ratio: get("rust.expansion_ratio")?,
            youngs_modulus: get("rust.youngs_modulus")?,
            poisson_ratio: get("rust.poisson_ratio")?,
            diffusivity: get("rust.diffusivity")?,
            rate_precipitation: get("rust.rate_precipitation")?,
            rate_oxidation: get("rust.rate_oxidation")?,
            oxygen_concentration: get("rust.oxygen_concentration")?,
        };
        let steel = SteelParams {
            molar_mass: get("steel.molar_mass")?,
            density: get("steel.density")?,
            electrons: get("steel.electrons")?,
            faraday_constant: get("steel.faraday_constant")?,
            corrosion_current_density: get("steel.corrosion_current_density")?,
            current_schedule: self.schedule()?,
        };

        let r_i = match self.quantity("geometry.rebar_radius")? {
            Some(r) => {
                if let Some(d) = self.quantity("geometry.rebar_diameter")? {
                    consistent("geometry.rebar_radius", r, 0.5 * d)?;
                }
                r
            }
            None => 0.5 * get("geometry.rebar_diameter")?,
        };
        let mut geometry = match self.quantity("geometry.outer_radius")? {
            Some(r) => {
                if let Some(c) = self.quantity("geometry.cover")? {
                    consistent("geometry.outer_radius", r, r_i + c)?;
                }
                Geometry::from_radii(r_i, r)
            }
            None => Geometry::from_cover_and_diameter(get("geometry.cover")?, 2.0 * r_i),
        };
        geometry.rebar_length = get("geometry.rebar_length")?;

        let solver = SolverSettings {
            dt_cor_max: get("solver.dt_cor_max")?,
            pressure_match_tol: get("solver.pressure_match_tol")?,
            t_cor_max: get("solver.t_cor_max")?,
            fd_verify_every: get("solver.fd_verify_every")? as usize,
            grid_n: get("solver.grid_n")? as usize,
            kf_step_tol: get("solver.kf_step_tol")?,
            max_iterations: get("solver.max_iterations")? as usize,
            volume_convention: self.convention()?,
        };

        // derived and alternative keys
        let user_or = |key: &str, fallback: Provenance| {
            if self.values.contains_key(key) {
                Provenance::User
            } else {
                fallback
            }
        };
        if dry.is_some() {
            prov.insert("concrete.dry_density".into(), Provenance::User);
            prov.insert("concrete.porosity".into(), Provenance::Derived);
        }
        prov.insert(
            "geometry.rebar_radius".into(),
            user_or("geometry.rebar_radius", Provenance::Derived),
        );
        prov.insert(
            "geometry.outer_radius".into(),
            user_or("geometry.outer_radius", Provenance::Derived),
        );
        if self.values.contains_key("geometry.rebar_radius")
            && !self.values.contains_key("geometry.rebar_diameter")
        {
            prov.insert("geometry.rebar_diameter".into(), Provenance::Derived);
        }
        if self.values.contains_key("geometry.outer_radius")
            && !self.values.contains_key("geometry.cover")
        {
            prov.insert("geometry.cover".into(), Provenance::Derived);
        }
        prov.insert(
            "solver.volume_convention".into(),
            user_or("solver.volume_convention", Provenance::Solver),
        );
        if !steel.current_schedule.is_empty() {
            prov.insert("steel.current_schedule".into(), Provenance::User);
        }

        let params = ModelParams {
            concrete,
            rust,
            steel,
            geometry,
        };
        params.validate()?;
        solver.validate(&params.geometry)?;

        let sweep = self.sweep()?;
        if let Some(g) = &sweep {
            g.validate()?;
        }
        let calibration = self.calibration()?;
        Ok(RunConfig {
            params,
            solver,
            sweep,
            calibration,
            provenance: prov,
        })
    }

    fn convention(&self) -> Result<VolumeConvention, ConfigError> {
        match self.values.get("solver.volume_convention") {
            None => Ok(VolumeConvention::default()),
            Some(Value::String(s)) if s == "anchored" => Ok(VolumeConvention::Anchored),
            Some(Value::String(s)) if s == "printed" => Ok(VolumeConvention::Printed),
            Some(v) => Err(ConfigError::invalid(
                "solver.volume_convention",
                format!("expected \"anchored\" or \"printed\", got {v}"),
            )),
        }
    }

    fn schedule(&self) -> Result<Vec<CurrentStep>, ConfigError> {
        const KEY: &str = "steel.current_schedule";
        let Some(v) = self.values.get(KEY) else {
            return Ok(Vec::new());
        };
        let Value::Array(items) = v else {
            return Err(ConfigError::invalid(KEY, "must be an array"));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let obj = object(&format!("{KEY}[{i}]"), item)?;
                let field = |name: &str, dim| -> Result<f64, ConfigError> {
                    let key = format!("{KEY}[{i}].{name}");
                    let v = obj
                        .get(name)
                        .ok_or_else(|| ConfigError::invalid(&key, "missing"))?;
                    number(&key, v, dim)
                };
                only_keys(KEY, i, obj, &["from", "current_density"])?;
                Ok(CurrentStep {
                    from: field("from", Dimension::Time)?,
                    current_density: field("current_density", Dimension::CurrentDensity)?,
                })
            })
            .collect()
    }

    fn sweep(&self) -> Result<Option<SweepGrid>, ConfigError> {
        const KEY: &str = "sweep.axes";
        let threshold = self
            .quantity("sweep.threshold")?
            .unwrap_or(DEFAULT_THRESHOLD);
        let Some(v) = self.values.get(KEY) else {
            return Ok(None);
        };
        let Value::Array(items) = v else {
            return Err(ConfigError::invalid(KEY, "must be an array"));
        };
        let axes = items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let obj = object(&format!("{KEY}[{i}]"), item)?;
                only_keys(KEY, i, obj, &["name", "min", "max", "count", "scale"])?;
                let key = |f: &str| format!("{KEY}[{i}].{f}");
                let name = obj
                    .get("name")
                    .and_then(Value::as_str)
                    .and_then(AxisName::parse)
                    .ok_or_else(|| {
                        ConfigError::invalid(
                            key("name"),
                            "expected porosity, dry_density, cover or diameter",
                        )
                    })?;
                let dim = match name {
                    AxisName::Porosity => Dimension::Dimensionless,
                    AxisName::DryDensity => Dimension::Density,
                    AxisName::Cover | AxisName::Diameter => Dimension::Length,
                };
                let bound = |f: &str| -> Result<f64, ConfigError> {
                    let v = obj
                        .get(f)
                        .ok_or_else(|| ConfigError::invalid(key(f), "missing"))?;
                    number(&key(f), v, dim)
                };
                let count = obj.get("count").and_then(Value::as_u64).ok_or_else(|| {
                    ConfigError::invalid(key("count"), "must be a positive integer")
                })?;
                let scale = match obj.get("scale").map(|s| s.as_str()) {
                    None | Some(Some("linear")) => Scale::Linear,
                    Some(Some("log")) => Scale::Log,
                    _ => return Err(ConfigError::invalid(key("scale"), "expected linear or log")),
                };
                Ok(Axis {
                    name,
                    min: bound("min")?,
                    max: bound("max")?,
                    count: count as usize,
                    scale,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(Some(SweepGrid { axes, threshold }))
    }

    fn calibration(&self) -> Result<CalibrationSettings, ConfigError> {
        let mut options = CalibrationOptions::default();
        let dataset = match self.values.get("calibration.dataset") {
            None => None,
            Some(Value::String(s)) => {
                let p = PathBuf::from(s);
                Some(match (&self.base_dir, p.is_relative()) {
                    (Some(dir), true) => dir.join(p),
                    _ => p,
                })
            }
            Some(_) => {
                return Err(ConfigError::invalid(
                    "calibration.dataset",
                    "must be a path string",
                ))
            }
        };
        for (key, slot) in [
            ("calibration.m_min", &mut options.m_min),
            ("calibration.m_max", &mut options.m_max),
            ("calibration.tolerance", &mut options.tolerance),
            ("calibration.multiplier_min", &mut options.multiplier_min),
            ("calibration.multiplier_max", &mut options.multiplier_max),
        ] {
            if let Some(v) = self.quantity(key)? {
                *slot = v;
            }
        }
        match self.values.get("calibration.fit_rate_multiplier") {
            None => {}
            Some(Value::Bool(b)) => options.fit_rate_multiplier = *b,
            Some(_) => {
                return Err(ConfigError::invalid(
                    "calibration.fit_rate_multiplier",
                    "must be true or false",
                ))
            }
        }
        options
            .validate()
            .map_err(|e| ConfigError::invalid("calibration", e.to_string()))?;
        Ok(CalibrationSettings { dataset, options })
    }
}

fn number(key: &str, v: &Value, dim: Dimension) -> Result<f64, ConfigError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| ConfigError::invalid(key, "number out of range")),
        Value::String(s) => parse_quantity(key, s, dim),
        other => Err(ConfigError::invalid(
            key,
            format!("expected a number or \"value unit\", got {other}"),
        )),
    }
}

fn object<'v>(key: &str, v: &'v Value) -> Result<&'v Map<String, Value>, ConfigError> {
    v.as_object()
        .ok_or_else(|| ConfigError::invalid(key, "must be an object"))
}

fn only_keys(
    base: &str,
    i: usize,
    obj: &Map<String, Value>,
    allowed: &[&str],
) -> Result<(), ConfigError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::UnknownKey(format!("{base}[{i}].{k}"))),
        None => Ok(()),
    }
}

fn consistent(field: &str, given: f64, implied: f64) -> Result<(), ConfigError> {
    if (given - implied).abs() > 1e-9 * given.abs().max(implied.abs()) {
        return Err(ConfigError::invalid(
            field,
            format!(
                "{given} m contradicts the value {implied} m implied by the other geometry keys"
            ),
        ));
    }
    Ok(())
}

/// Load and resolve a configuration file, applying overrides in order.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut raw = RawConfig::from_file(path)?;
    for o in overrides {
        raw.set(o)?;
    }
    raw.resolve()
}

impl RunConfig {
    /// Configuration made of ledger defaults only.
    pub fn defaults() -> Self {
        RawConfig::default()
            .resolve()
            .expect("ledger defaults are valid")
    }

    /// Echo of the resolved parameters for run reports.
    pub fn echo(&self) -> Value {
        let mut v = json!({
            "concrete": self.params.concrete,
            "rust": self.params.rust,
            "steel": self.params.steel,
            "geometry": self.params.geometry,
            "solver": self.solver,
            "provenance": self.provenance.iter().map(|(k, p)| (k.clone(), Value::String(p.to_string()))).collect::<Map<_, _>>(),
        });
        if let Some(g) = &self.sweep {
            v["sweep"] = json!(g);
        }
        v
    }

    /// Human-readable ledger of every resolved value with its provenance.
    pub fn ledger_lines(&self) -> Vec<String> {
        let p = &self.params;
        let mut rows: Vec<(String, f64, &str, &str)> = Vec::new();
        for e in LEDGER {
            let value = match e.key {
                "concrete.porosity" => p.concrete.porosity,
                "concrete.youngs_modulus" => p.concrete.youngs_modulus,
                "concrete.poisson_ratio" => p.concrete.poisson_ratio,
                "concrete.tensile_strength" => p.concrete.tensile_strength,
                "concrete.water_diffusivity" => p.concrete.water_diffusivity,
                "concrete.diffusivity_exponent" => p.concrete.diffusivity_exponent,
                "concrete.transport_depth" => p.concrete.transport_depth,
                "concrete.solid_density" => p.concrete.solid_density,
                "rust.expansion_ratio" => p.rust.expansion_ratio,
                "rust.youngs_modulus" => p.rust.youngs_modulus,
                "rust.poisson_ratio" => p.rust.poisson_ratio,
                "rust.diffusivity" => p.rust.diffusivity,
                "rust.rate_precipitation" => p.rust.rate_precipitation,
                "rust.rate_oxidation" => p.rust.rate_oxidation,
                "rust.oxygen_concentration" => p.rust.oxygen_concentration,
                "steel.molar_mass" => p.steel.molar_mass,
                "steel.density" => p.steel.density,
                "steel.electrons" => p.steel.electrons,
                "steel.faraday_constant" => p.steel.faraday_constant,
                "steel.corrosion_current_density" => p.steel.corrosion_current_density,
                "geometry.cover" => p.geometry.cover,
                "geometry.rebar_diameter" => p.geometry.diameter(),
                "geometry.rebar_length" => p.geometry.rebar_length,
                "solver.dt_cor_max" => self.solver.dt_cor_max,
                "solver.pressure_match_tol" => self.solver.pressure_match_tol,
                "solver.t_cor_max" => self.solver.t_cor_max,
                "solver.fd_verify_every" => self.solver.fd_verify_every as f64,
                "solver.grid_n" => self.solver.grid_n as f64,
                "solver.kf_step_tol" => self.solver.kf_step_tol,
                "solver.max_iterations" => self.solver.max_iterations as f64,
                other => unreachable!("ledger key {other} has no resolved value"),
            };
            rows.push((
                e.key.to_string(),
                value,
                crate::units::si_token(e.dim),
                e.note,
            ));
        }
        rows.push((
            "geometry.rebar_radius".into(),
            p.geometry.rebar_radius,
            "m",
            "r_i",
        ));
        rows.push((
            "geometry.outer_radius".into(),
            p.geometry.outer_radius,
            "m",
            "r_o",
        ));
        rows.iter()
            .map(|(key, value, unit, note)| {
                let tag = self
                    .provenance
                    .get(key)
                    .map_or("?".to_string(), |p| p.to_string());
                let unit = if unit.is_empty() {
                    String::new()
                } else {
                    format!(" {unit}")
                };
                let value = if *value == 0.0 || (1e-3..1e7).contains(&value.abs()) {
                    value.to_string()
                } else {
                    format!("{value:e}")
                };
                format!("{key:<36} {value}{unit}  [{tag}]  {note}")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::SECONDS_PER_YEAR;

    fn resolve(text: &str) -> Result<RunConfig, ConfigError> {
        RawConfig::from_json_str(text)?.resolve()
    }

    #[test]
    fn reference_geometry_from_cover_and_diameter() {
        let c = resolve(
            r#"{"concrete": {"porosity": 0.15},
                "geometry": {"cover": "30 mm", "rebar_diameter": "10 mm"}}"#,
        )
        .unwrap();
        assert!((c.params.geometry.rebar_radius - 5e-3).abs() < 1e-15);
        assert!((c.params.geometry.outer_radius - 35e-3).abs() < 1e-15);
        assert_eq!(c.provenance["concrete.porosity"], Provenance::User);
        assert_eq!(c.provenance["rust.diffusivity"], Provenance::Placeholder);
        assert_eq!(c.provenance["geometry.outer_radius"], Provenance::Derived);
    }

    #[test]
    fn poisson_half_names_field() {
        for (text, field) in [
            (
                r#"{"concrete": {"poisson_ratio": 0.5}}"#,
                "concrete.poisson_ratio",
            ),
            (r#"{"rust": {"poisson_ratio": 0.5}}"#, "rust.poisson_ratio"),
        ] {
            match resolve(text) {
                Err(ConfigError::Validation { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn current_density_units() {
        let c = resolve(r#"{"steel": {"corrosion_current_density": "1 uA/cm2"}}"#).unwrap();
        assert!((c.params.steel.corrosion_current_density - 0.01).abs() < 1e-17);
        assert!(matches!(
            resolve(r#"{"steel": {"corrosion_current_density": "1 furlong"}}"#),
            Err(ConfigError::Unit { .. })
        ));
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(
            matches!(resolve(r#"{"concrete": {"colour": 1}}"#), Err(ConfigError::UnknownKey(k)) if k == "concrete.colour")
        );
        assert!(matches!(
            resolve(r#"{"extras": {}}"#),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(resolve("{not json"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn overrides() {
        let mut raw = RawConfig::from_json_str(r#"{"concrete": {"dry_density": 500}}"#).unwrap();
        assert!(matches!(
            raw.set("concrete.nope=1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(raw.set("no_equals").is_err());
        raw.set("concrete.porosity=0.6").unwrap();
        raw.set("geometry.cover=50 mm").unwrap();
        let c = raw.resolve().unwrap();
        assert_eq!(c.params.concrete.porosity, 0.6);
        assert!((c.params.geometry.cover - 0.05).abs() < 1e-15);
    }

    #[test]
    fn dry_density_sets_porosity() {
        let c = resolve(r#"{"concrete": {"dry_density": "500 kg/m3", "solid_density": 2500}}"#)
            .unwrap();
        assert!((c.params.concrete.porosity - 0.8).abs() < 1e-15);
        assert_eq!(c.provenance["concrete.porosity"], Provenance::Derived);
        assert!(resolve(r#"{"concrete": {"dry_density": 500, "porosity": 0.8}}"#).is_err());
        assert!(resolve(r#"{"concrete": {"dry_density": 2600}}"#).is_err());
    }

    #[test]
    fn radii_alternatives() {
        let c =
            resolve(r#"{"geometry": {"rebar_radius": "6 mm", "outer_radius": "40 mm"}}"#).unwrap();
        assert!((c.params.geometry.cover - 0.034).abs() < 1e-15);
        assert!(
            resolve(r#"{"geometry": {"rebar_radius": "6 mm", "rebar_diameter": "10 mm"}}"#)
                .is_err()
        );
    }

    #[test]
    fn integer_keys() {
        let c = resolve(r#"{"solver": {"grid_n": 400, "fd_verify_every": 10}}"#).unwrap();
        assert_eq!((c.solver.grid_n, c.solver.fd_verify_every), (400, 10));
        assert!(resolve(r#"{"solver": {"grid_n": 400.5}}"#).is_err());
        assert!(resolve(r#"{"solver": {"grid_n": 50}}"#).is_err());
    }

    #[test]
    fn schedule_and_convention() {
        let c = resolve(
            r#"{"steel": {"current_schedule": [{"from": "2 years", "current_density": "2 uA/cm2"}]},
                "solver": {"volume_convention": "printed"}}"#,
        )
        .unwrap();
        assert_eq!(
            c.params.steel.current_schedule[0].from,
            2.0 * SECONDS_PER_YEAR
        );
        assert_eq!(c.solver.volume_convention, VolumeConvention::Printed);
        assert!(resolve(r#"{"solver": {"volume_convention": "sideways"}}"#).is_err());
        assert!(resolve(r#"{"steel": {"current_schedule": [{"at": 1}]}}"#).is_err());
    }

    #[test]
    fn sweep_section() {
        let c = resolve(
            r#"{"sweep": {"threshold": "80 um", "axes": [
                {"name": "porosity", "min": 0.1, "max": 0.8, "count": 8},
                {"name": "cover", "min": "20 mm", "max": "50 mm", "count": 4, "scale": "log"}]}}"#,
        )
        .unwrap();
        let g = c.sweep.unwrap();
        assert_eq!(g.axes.len(), 2);
        assert!((g.threshold - 80e-6).abs() < 1e-18);
        assert_eq!(g.axes[1].scale, Scale::Log);
        assert!((g.axes[1].max - 0.05).abs() < 1e-15);
        assert!(resolve(
            r#"{"sweep": {"axes": [{"name": "height", "min": 1, "max": 2, "count": 2}]}}"#
        )
        .is_err());
        assert!(resolve(
            r#"{"sweep": {"axes": [{"name": "cover", "min": 1, "max": 2, "count": 2, "x": 1}]}}"#
        )
        .is_err());
        assert!(RunConfig::defaults().sweep.is_none());
    }

    #[test]
    fn calibration_section_resolves_paths() {
        let mut raw = RawConfig::from_json_str(
            r#"{"calibration": {"dataset": "data.csv", "m_min": 1, "m_max": 5, "fit_rate_multiplier": true}}"#,
        )
        .unwrap();
        raw.base_dir = Some(PathBuf::from("/tmp/study"));
        let c = raw.resolve().unwrap();
        assert_eq!(
            c.calibration.dataset.unwrap(),
            PathBuf::from("/tmp/study/data.csv")
        );
        assert!(c.calibration.options.fit_rate_multiplier);
        assert!(resolve(r#"{"calibration": {"m_min": 5, "m_max": 1}}"#).is_err());
    }

    #[test]
    fn echo_and_ledger() {
        let c = RunConfig::defaults();
        let e = c.echo();
        assert_eq!(e["concrete"]["porosity"], json!(0.15));
        assert_eq!(e["provenance"]["rust.rate_oxidation"], json!("placeholder"));
        let lines = c.ledger_lines();
        assert!(lines
            .iter()
            .any(|l| l.starts_with("concrete.porosity") && l.contains("[placeholder]")));
        assert_eq!(lines.len(), LEDGER.len() + 2);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/config.json"), &[]),
            Err(ConfigError::Io { .. })
        ));
    }
}
