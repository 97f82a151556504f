//! Material, geometry and solver parameters.
//!
//! All quantities are stored in SI units (m, s, Pa, mol, A, kg). Objects are
//! plain values; once [`ModelParams::validate`] has succeeded they are never
//! mutated by the solvers and can be shared freely between threads.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const FARADAY: f64 = 96_485.332_12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcreteParams {
    /// Total porosity, dimensionless in (0, 1).
    pub porosity: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub tensile_strength: f64,
    /// Diffusivity of Fe2+ in free pore water.
    pub water_diffusivity: f64,
    /// Exponent of the porosity power law for the concrete diffusivity.
    pub diffusivity_exponent: f64,
    /// Depth of the concrete domain reached by Fe2+ transport.
    pub transport_depth: f64,
    /// Skeletal density used only by the density/porosity map.
    pub solid_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RustParams {
    /// Molar volume ratio of rust to steel.
    pub expansion_ratio: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Diffusivity of Fe2+ in the dense rust layer.
    pub diffusivity: f64,
    /// First-order precipitation constant, 1/s.
    pub rate_precipitation: f64,
    /// Second-order oxidation constant, m3/(mol s).
    pub rate_oxidation: f64,
    pub oxygen_concentration: f64,
}

impl RustParams {
    /// Effective first-order consumption rate of Fe2+.
    pub fn rate_sum(&self) -> f64 {
        self.rate_precipitation + self.oxygen_concentration * self.rate_oxidation
    }
}

/// A change of corrosion current density at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentStep {
    /// Time from which the new current density applies, s.
    pub from: f64,
    /// Corrosion current density, A/m2.
    pub current_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteelParams {
    pub molar_mass: f64,
    pub density: f64,
    pub electrons: f64,
    pub faraday_constant: f64,
    /// Corrosion current density at T = 0, A/m2.
    pub corrosion_current_density: f64,
    /// Optional later changes of the current density (piecewise constant).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub current_schedule: Vec<CurrentStep>,
}

impl SteelParams {
    /// Current density in force at time `t`.
    pub fn current_at(&self, t: f64) -> f64 {
        self.current_schedule
            .iter()
            .rev()
            .find(|s| s.from <= t)
            .map_or(self.corrosion_current_density, |s| s.current_density)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub rebar_radius: f64,
    pub outer_radius: f64,
    pub cover: f64,
    /// Unit length; cancels in all pressure ratios.
    pub rebar_length: f64,
}

impl Geometry {
    pub fn from_cover_and_diameter(cover: f64, diameter: f64) -> Self {
        let r_i = 0.5 * diameter;
        Geometry {
            rebar_radius: r_i,
            outer_radius: r_i + cover,
            cover,
            rebar_length: 1.0,
        }
    }

    pub fn from_radii(r_i: f64, r_o: f64) -> Self {
        Geometry {
            rebar_radius: r_i,
            outer_radius: r_o,
            cover: r_o - r_i,
            rebar_length: 1.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.rebar_radius
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.rebar_radius > 0.0 && self.rebar_radius.is_finite()) {
            return Err(ConfigError::invalid(
                "geometry.rebar_radius",
                "must be positive",
            ));
        }
        if !(self.outer_radius > self.rebar_radius && self.outer_radius.is_finite()) {
            return Err(ConfigError::invalid(
                "geometry.outer_radius",
                "must exceed the rebar radius",
            ));
        }
        let c = self.outer_radius - self.rebar_radius;
        if (c - self.cover).abs() > 1e-12 * self.outer_radius {
            return Err(ConfigError::invalid(
                "geometry.cover",
                "inconsistent with outer_radius - rebar_radius",
            ));
        }
        if self.rebar_length <= 0.0 {
            return Err(ConfigError::invalid(
                "geometry.rebar_length",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// Which unconstrained rust volume to use in the compressibility law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VolumeConvention {
    /// Free rust layer rests on the corroded steel surface (radius r_i - t_cor).
    #[default]
    Anchored,
    /// Free rust layer measured from the original bar surface, (r_i + t_unc).
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Largest marching increment of corrosion penetration, m.
    pub dt_cor_max: f64,
    /// Relative tolerance on the thermodynamic/mechanical pressure balance.
    pub pressure_match_tol: f64,
    /// Marching horizon, m of corrosion penetration.
    pub t_cor_max: f64,
    /// Run the finite-difference cross-check every N steps (0 disables).
    pub fd_verify_every: usize,
    /// Number of intervals of the finite-difference verifier.
    pub grid_n: usize,
    /// Largest accepted change of k_f over one marching step.
    pub kf_step_tol: f64,
    pub max_iterations: usize,
    pub volume_convention: VolumeConvention,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dt_cor_max: 0.1e-6,
            pressure_match_tol: 1e-9,
            t_cor_max: 2e-3,
            fd_verify_every: 0,
            grid_n: 1000,
            kf_step_tol: 0.01,
            max_iterations: 200,
            volume_convention: VolumeConvention::Anchored,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self, geom: &Geometry) -> Result<(), ConfigError> {
        if !(self.dt_cor_max > 0.0) {
            return Err(ConfigError::invalid(
                "solver.dt_cor_max",
                "must be positive",
            ));
        }
        if !(self.pressure_match_tol > 0.0 && self.pressure_match_tol <= 1e-3) {
            return Err(ConfigError::invalid(
                "solver.pressure_match_tol",
                "must lie in (0, 1e-3]",
            ));
        }
        if !(self.t_cor_max > 0.0) {
            return Err(ConfigError::invalid("solver.t_cor_max", "must be positive"));
        }
        if self.t_cor_max >= geom.rebar_radius {
            return Err(ConfigError::invalid(
                "solver.t_cor_max",
                "must be smaller than the rebar radius",
            ));
        }
        if self.grid_n < 100 {
            return Err(ConfigError::invalid(
                "solver.grid_n",
                "must be at least 100",
            ));
        }
        if !(self.kf_step_tol > 0.0 && self.kf_step_tol < 1.0) {
            return Err(ConfigError::invalid(
                "solver.kf_step_tol",
                "must lie in (0, 1)",
            ));
        }
        if self.max_iterations < 10 {
            return Err(ConfigError::invalid(
                "solver.max_iterations",
                "must be at least 10",
            ));
        }
        Ok(())
    }
}

/// Complete physical description of one reinforced concrete cross-section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub concrete: ConcreteParams,
    pub rust: RustParams,
    pub steel: SteelParams,
    pub geometry: Geometry,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

fn poisson(field: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..0.5).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("must lie in [0, 0.5), got {v}"),
        ))
    }
}

impl ConcreteParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return Err(ConfigError::invalid(
                "concrete.porosity",
                format!("must lie in (0, 1), got {}", self.porosity),
            ));
        }
        positive("concrete.youngs_modulus", self.youngs_modulus)?;
        poisson("concrete.poisson_ratio", self.poisson_ratio)?;
        positive("concrete.tensile_strength", self.tensile_strength)?;
        positive("concrete.water_diffusivity", self.water_diffusivity)?;
        if !(self.diffusivity_exponent >= 0.0 && self.diffusivity_exponent.is_finite()) {
            return Err(ConfigError::invalid(
                "concrete.diffusivity_exponent",
                "must be non-negative",
            ));
        }
        positive("concrete.transport_depth", self.transport_depth)?;
        positive("concrete.solid_density", self.solid_density)
    }
}

impl RustParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.expansion_ratio > 1.0 && self.expansion_ratio.is_finite()) {
            return Err(ConfigError::invalid(
                "rust.expansion_ratio",
                format!("must exceed 1, got {}", self.expansion_ratio),
            ));
        }
        positive("rust.youngs_modulus", self.youngs_modulus)?;
        poisson("rust.poisson_ratio", self.poisson_ratio)?;
        positive("rust.diffusivity", self.diffusivity)?;
        for (f, v) in [
            ("rust.rate_precipitation", self.rate_precipitation),
            ("rust.rate_oxidation", self.rate_oxidation),
            ("rust.oxygen_concentration", self.oxygen_concentration),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(f, "must be non-negative"));
            }
        }
        if !(self.rate_sum() > 0.0) {
            return Err(ConfigError::invalid(
                "rust.rate_precipitation",
                "precipitation and oxidation rates cannot both vanish",
            ));
        }
        Ok(())
    }
}

impl SteelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("steel.molar_mass", self.molar_mass)?;
        positive("steel.density", self.density)?;
        if self.electrons != 2.0 {
            return Err(ConfigError::invalid("steel.electrons", "must be 2"));
        }
        positive("steel.faraday_constant", self.faraday_constant)?;
        positive(
            "steel.corrosion_current_density",
            self.corrosion_current_density,
        )?;
        let mut last = 0.0;
        for s in &self.current_schedule {
            if !(s.from > last) {
                return Err(ConfigError::invalid(
                    "steel.current_schedule",
                    "start times must be positive and strictly increasing",
                ));
            }
            if !(s.current_density >= 0.0 && s.current_density.is_finite()) {
                return Err(ConfigError::invalid(
                    "steel.current_schedule",
                    "current densities must be non-negative",
                ));
            }
            last = s.from;
        }
        if let Some(s) = self.current_schedule.last() {
            if s.current_density <= 0.0 {
                return Err(ConfigError::invalid(
                    "steel.current_schedule",
                    "the final current density must be positive",
                ));
            }
        }
        Ok(())
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.concrete.validate()?;
        self.rust.validate()?;
        self.steel.validate()?;
        self.geometry.validate()
    }
}

/// Porosity of a material with dry density `rho_dry` and skeletal density
/// `rho_s`, assuming a linear volume-fraction map.
pub fn porosity_from_density(rho_dry: f64, rho_s: f64) -> Result<f64, ConfigError> {
    if !(rho_s > 0.0) {
        return Err(ConfigError::invalid(
            "concrete.solid_density",
            "must be positive",
        ));
    }
    if !(rho_dry > 0.0) {
        return Err(ConfigError::invalid(
            "concrete.dry_density",
            "must be positive",
        ));
    }
    if rho_dry >= rho_s {
        return Err(ConfigError::invalid(
            "concrete.dry_density",
            format!("{rho_dry} kg/m3 is not below the skeletal density {rho_s} kg/m3"),
        ));
    }
    let phi = 1.0 - rho_dry / rho_s;
    Ok(phi.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

/// Inverse of [`porosity_from_density`].
pub fn density_from_porosity(phi: f64, rho_s: f64) -> f64 {
    rho_s * (1.0 - phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger;
    use proptest::prelude::*;

    #[test]
    fn half_density_is_half_porosity() {
        assert_eq!(porosity_from_density(1250.0, 2500.0).unwrap(), 0.5);
    }

    #[test]
    fn dense_limit() {
        let phi = porosity_from_density(2500.0 * (1.0 - 1e-12), 2500.0).unwrap();
        assert!(phi > 0.0 && phi < 1e-11);
        assert!(porosity_from_density(2500.0, 2500.0).is_err());
        assert!(porosity_from_density(2600.0, 2500.0).is_err());
    }

    proptest! {
        #[test]
        fn density_round_trip(rho_s in 1000.0f64..4000.0, frac in 0.01f64..0.99) {
            let rho = rho_s * frac;
            let phi = porosity_from_density(rho, rho_s).unwrap();
            let back = density_from_porosity(phi, rho_s);
            prop_assert!((back - rho).abs() <= 4.0 * f64::EPSILON * rho_s);
        }
    }

    #[test]
    fn poisson_half_is_rejected() {
        let mut p = ledger::default_params();
        p.concrete.poisson_ratio = 0.5;
        match p.validate() {
            Err(ConfigError::Validation { field, .. }) => {
                assert_eq!(field, "concrete.poisson_ratio")
            }
            other => panic!("{other:?}"),
        }
        let mut p = ledger::default_params();
        p.rust.poisson_ratio = 0.5;
        match p.validate() {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "rust.poisson_ratio"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_rates_rejected() {
        let mut p = ledger::default_params();
        p.rust.rate_precipitation = 0.0;
        p.rust.rate_oxidation = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn schedule_lookup() {
        let mut s = ledger::default_params().steel;
        s.current_schedule = vec![
            CurrentStep {
                from: 10.0,
                current_density: 0.02,
            },
            CurrentStep {
                from: 20.0,
                current_density: 0.03,
            },
        ];
        assert_eq!(s.current_at(0.0), s.corrosion_current_density);
        assert_eq!(s.current_at(10.0), 0.02);
        assert_eq!(s.current_at(25.0), 0.03);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn geometry_from_cover() {
        let g = Geometry::from_cover_and_diameter(0.030, 0.010);
        assert_eq!(g.rebar_radius, 0.005);
        assert!((g.outer_radius - 0.035).abs() < 1e-15);
        assert!(g.validate().is_ok());
    }
}
