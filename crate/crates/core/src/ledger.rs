//! Default parameter ledger.
//!
//! Every configurable quantity has exactly one default here, together with
//! its provenance. Values tagged [`Provenance::Placeholder`] are working
//! numbers chosen to give physically sensible behaviour; they are not
//! measured data and must be overridden for quantitative studies. Run
//! reports echo the full resolved set with these tags.

use std::fmt;

use serde::Serialize;

use crate::params::{
    ConcreteParams, Geometry, ModelParams, RustParams, SolverSettings, SteelParams, FARADAY,
};
use crate::units::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Physical constant or standard property of iron.
    Constant,
    /// Commonly tabulated value.
    Literature,
    /// Reference geometry and current density (c = 30 mm, d = 10 mm, 1 uA/cm2).
    ReferenceCase,
    /// Placeholder; not measured, override for quantitative work.
    Placeholder,
    /// Numerical solver setting.
    Solver,
    /// Supplied by the user (config file or override).
    User,
    /// Derived from other resolved values.
    Derived,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Constant => "constant",
            Provenance::Literature => "literature",
            Provenance::ReferenceCase => "reference-case",
            Provenance::Placeholder => "placeholder",
            Provenance::Solver => "solver",
            Provenance::User => "user",
            Provenance::Derived => "derived",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LedgerEntry {
    /// Dotted configuration key, `section.field`.
    pub key: &'static str,
    /// Default in SI units.
    pub value: f64,
    pub dim: Dimension,
    pub provenance: Provenance,
    pub note: &'static str,
}

const fn e(
    key: &'static str,
    value: f64,
    dim: Dimension,
    provenance: Provenance,
    note: &'static str,
) -> LedgerEntry {
    LedgerEntry {
        key,
        value,
        dim,
        provenance,
        note,
    }
}

use Dimension as D;
use Provenance as P;

pub const LEDGER: &[LedgerEntry] = &[
    e(
        "concrete.porosity",
        0.15,
        D::Dimensionless,
        P::Placeholder,
        "total porosity",
    ),
    e(
        "concrete.youngs_modulus",
        20e9,
        D::Pressure,
        P::Placeholder,
        "E",
    ),
    e(
        "concrete.poisson_ratio",
        0.2,
        D::Dimensionless,
        P::Placeholder,
        "nu",
    ),
    e(
        "concrete.tensile_strength",
        2.5e6,
        D::Pressure,
        P::Placeholder,
        "f_t",
    ),
    e(
        "concrete.water_diffusivity",
        7.19e-10,
        D::Diffusivity,
        P::Literature,
        "Fe2+ in water, 25 C",
    ),
    e(
        "concrete.diffusivity_exponent",
        5.0,
        D::Dimensionless,
        P::Placeholder,
        "m in D_c = D_w phi^m; calibrate",
    ),
    e(
        "concrete.transport_depth",
        1e-3,
        D::Length,
        P::Placeholder,
        "t_c",
    ),
    e(
        "concrete.solid_density",
        2500.0,
        D::Density,
        P::Placeholder,
        "skeletal density for density/porosity map",
    ),
    e(
        "rust.expansion_ratio",
        2.0,
        D::Dimensionless,
        P::Placeholder,
        "kappa",
    ),
    e(
        "rust.youngs_modulus",
        1e8,
        D::Pressure,
        P::Placeholder,
        "E_r",
    ),
    e(
        "rust.poisson_ratio",
        0.49,
        D::Dimensionless,
        P::Placeholder,
        "nu_r",
    ),
    e(
        "rust.diffusivity",
        5e-10,
        D::Diffusivity,
        P::Placeholder,
        "D_r",
    ),
    e(
        "rust.rate_precipitation",
        0.025,
        D::FirstOrderRate,
        P::Placeholder,
        "k_r II->o",
    ),
    e(
        "rust.rate_oxidation",
        0.1,
        D::SecondOrderRate,
        P::Placeholder,
        "k_r II->III",
    ),
    e(
        "rust.oxygen_concentration",
        0.25,
        D::Concentration,
        P::Placeholder,
        "c_ox",
    ),
    e(
        "steel.molar_mass",
        0.05585,
        D::MolarMass,
        P::Constant,
        "M_Fe",
    ),
    e("steel.density", 7870.0, D::Density, P::Constant, "rho_Fe"),
    e("steel.electrons", 2.0, D::Dimensionless, P::Constant, "z_a"),
    e(
        "steel.faraday_constant",
        FARADAY,
        D::Charge,
        P::Constant,
        "F",
    ),
    e(
        "steel.corrosion_current_density",
        0.01,
        D::CurrentDensity,
        P::ReferenceCase,
        "i_a = 1 uA/cm2",
    ),
    e("geometry.cover", 0.030, D::Length, P::ReferenceCase, "c"),
    e(
        "geometry.rebar_diameter",
        0.010,
        D::Length,
        P::ReferenceCase,
        "d",
    ),
    e(
        "geometry.rebar_length",
        1.0,
        D::Length,
        P::Constant,
        "L, cancels",
    ),
    e(
        "solver.dt_cor_max",
        0.1e-6,
        D::Length,
        P::Solver,
        "marching step cap",
    ),
    e(
        "solver.pressure_match_tol",
        1e-9,
        D::Dimensionless,
        P::Solver,
        "relative",
    ),
    e("solver.t_cor_max", 2e-3, D::Length, P::Solver, "horizon"),
    e(
        "solver.fd_verify_every",
        0.0,
        D::Dimensionless,
        P::Solver,
        "steps, 0 = off",
    ),
    e(
        "solver.grid_n",
        1000.0,
        D::Dimensionless,
        P::Solver,
        "verifier intervals",
    ),
    e(
        "solver.kf_step_tol",
        0.01,
        D::Dimensionless,
        P::Solver,
        "max k_f change per step",
    ),
    e(
        "solver.max_iterations",
        200.0,
        D::Dimensionless,
        P::Solver,
        "root finder cap",
    ),
];

/// Solver keys that must be integers.
pub const INTEGER_KEYS: &[&str] = &[
    "solver.fd_verify_every",
    "solver.grid_n",
    "solver.max_iterations",
];

pub fn entry(key: &str) -> Option<&'static LedgerEntry> {
    LEDGER.iter().find(|e| e.key == key)
}

pub fn default_value(key: &str) -> f64 {
    entry(key)
        .unwrap_or_else(|| panic!("no ledger entry for {key}"))
        .value
}

/// Parameter set made entirely of ledger defaults.
pub fn default_params() -> ModelParams {
    let d = default_value;
    ModelParams {
        concrete: ConcreteParams {
            porosity: d("concrete.porosity"),
            youngs_modulus: d("concrete.youngs_modulus"),
            poisson_ratio: d("concrete.poisson_ratio"),
            tensile_strength: d("concrete.tensile_strength"),
            water_diffusivity: d("concrete.water_diffusivity"),
            diffusivity_exponent: d("concrete.diffusivity_exponent"),
            transport_depth: d("concrete.transport_depth"),
            solid_density: d("concrete.solid_density"),
        },
        rust: RustParams {
            expansion_ratio: d("rust.expansion_ratio"),
            youngs_modulus: d("rust.youngs_modulus"),
            poisson_ratio: d("rust.poisson_ratio"),
            diffusivity: d("rust.diffusivity"),
            rate_precipitation: d("rust.rate_precipitation"),
            rate_oxidation: d("rust.rate_oxidation"),
            oxygen_concentration: d("rust.oxygen_concentration"),
        },
        steel: SteelParams {
            molar_mass: d("steel.molar_mass"),
            density: d("steel.density"),
            electrons: d("steel.electrons"),
            faraday_constant: d("steel.faraday_constant"),
            corrosion_current_density: d("steel.corrosion_current_density"),
            current_schedule: Vec::new(),
        },
        geometry: Geometry::from_cover_and_diameter(
            d("geometry.cover"),
            d("geometry.rebar_diameter"),
        ),
    }
}

pub fn default_solver() -> SolverSettings {
    let d = default_value;
    SolverSettings {
        dt_cor_max: d("solver.dt_cor_max"),
        pressure_match_tol: d("solver.pressure_match_tol"),
        t_cor_max: d("solver.t_cor_max"),
        fd_verify_every: d("solver.fd_verify_every") as usize,
        grid_n: d("solver.grid_n") as usize,
        kf_step_tol: d("solver.kf_step_tol"),
        max_iterations: d("solver.max_iterations") as usize,
        ..SolverSettings::default()
    }
}
