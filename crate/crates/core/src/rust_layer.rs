//! Pressure of the confined dense rust layer.
//!
//! The rust layer has constant bulk modulus `K_r`, so its pressure follows
//! from the ratio of the free (unconstrained) volume to the volume it is
//! confined to: `p = K_r ln(V_0 / V_rd)`. Volumes are per unit bar length.

use std::f64::consts::PI;

use crate::error::ModelError;
use crate::params::{Geometry, RustParams, VolumeConvention};

/// `K_r = E_r / (3 (1 - 2 ν_r))`.
pub fn bulk_modulus(rust: &RustParams) -> Result<f64, ModelError> {
    if !(rust.poisson_ratio < 0.5) {
        return Err(ModelError::OutOfDomain {
            what: "rust.poisson_ratio",
            detail: format!("{} gives an incompressible rust layer", rust.poisson_ratio),
        });
    }
    let k = rust.youngs_modulus / (3.0 * (1.0 - 2.0 * rust.poisson_ratio));
    if !k.is_finite() {
        return Err(ModelError::OutOfDomain {
            what: "rust bulk modulus",
            detail: format!("{k} Pa is not finite"),
        });
    }
    Ok(k)
}

/// Area of the annulus `[inner, inner + thickness]` times `length`.
fn annulus(inner: f64, thickness: f64, length: f64) -> f64 {
    // (a + t)^2 - a^2 written without cancellation
    PI * thickness * (2.0 * inner + thickness) * length
}

fn check_t_cor(t_cor: f64, geom: &Geometry) -> Result<(), ModelError> {
    if !(t_cor >= 0.0 && t_cor < geom.rebar_radius) {
        return Err(ModelError::OutOfDomain {
            what: "t_cor",
            detail: format!(
                "{t_cor:e} m outside [0, rebar radius {:e} m)",
                geom.rebar_radius
            ),
        });
    }
    Ok(())
}

/// Volume occupied by the confined rust layer between the corroded steel
/// surface and the displaced concrete boundary.
pub fn confined_volume(u_c: f64, t_cor: f64, geom: &Geometry) -> Result<f64, ModelError> {
    check_t_cor(t_cor, geom)?;
    Ok(annulus(
        geom.rebar_radius - t_cor,
        t_cor + u_c,
        geom.rebar_length,
    ))
}

/// Volume the dense rust would occupy at zero pressure.
pub fn unconstrained_volume(
    t_unc: f64,
    t_cor: f64,
    geom: &Geometry,
    convention: VolumeConvention,
) -> Result<f64, ModelError> {
    check_t_cor(t_cor, geom)?;
    let r_i = geom.rebar_radius;
    Ok(match convention {
        VolumeConvention::Anchored => annulus(r_i - t_cor, t_unc, geom.rebar_length),
        VolumeConvention::Printed => annulus(r_i - t_cor, t_unc + t_cor, geom.rebar_length),
    })
}

/// Displacement of the steel/concrete boundary at which the confined
/// volume equals the free volume (zero rust pressure).
pub fn stress_free_displacement(t_cor: f64, t_unc: f64, convention: VolumeConvention) -> f64 {
    match convention {
        VolumeConvention::Anchored => t_unc - t_cor,
        VolumeConvention::Printed => t_unc,
    }
}

/// Rust pressure for a state of the layer, bound to one geometry.
#[derive(Debug, Clone, Copy)]
pub struct RustLayer<'a> {
    pub bulk_modulus: f64,
    pub geometry: &'a Geometry,
    pub convention: VolumeConvention,
}

impl<'a> RustLayer<'a> {
    pub fn new(
        rust: &RustParams,
        geometry: &'a Geometry,
        convention: VolumeConvention,
    ) -> Result<Self, ModelError> {
        Ok(RustLayer {
            bulk_modulus: bulk_modulus(rust)?,
            geometry,
            convention,
        })
    }

    /// `max(0, K_r ln(V_0 / V_rd))`.
    pub fn pressure(&self, u_c: f64, t_cor: f64, t_unc: f64) -> Result<f64, ModelError> {
        let v_rd = confined_volume(u_c, t_cor, self.geometry)?;
        let v_0 = unconstrained_volume(t_unc, t_cor, self.geometry, self.convention)?;
        if !(v_rd > 0.0) {
            return Err(ModelError::OutOfDomain {
                what: "confined rust volume",
                detail: "must be positive".into(),
            });
        }
        if v_0 <= v_rd {
            return Ok(0.0);
        }
        Ok(self.bulk_modulus * (v_0 / v_rd).ln())
    }
}

/// Free function form of [`RustLayer::pressure`].
pub fn thermo_pressure(
    u_c: f64,
    t_cor: f64,
    t_unc: f64,
    rust: &RustParams,
    geom: &Geometry,
    convention: VolumeConvention,
) -> Result<f64, ModelError> {
    RustLayer::new(rust, geom, convention)?.pressure(u_c, t_cor, t_unc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::default_params;
    use proptest::prelude::*;

    const A: VolumeConvention = VolumeConvention::Anchored;

    #[test]
    fn bulk_modulus_values() {
        let mut r = default_params().rust;
        r.poisson_ratio = 1.0 / 3.0;
        assert!((bulk_modulus(&r).unwrap() - r.youngs_modulus).abs() < 1e-6 * r.youngs_modulus);
        r.poisson_ratio = 0.0;
        assert_eq!(bulk_modulus(&r).unwrap(), r.youngs_modulus / 3.0);
        r.poisson_ratio = 0.4;
        let k = bulk_modulus(&r).unwrap();
        assert!((k / r.youngs_modulus - 1.0 / 0.6).abs() < 1e-12);
        r.poisson_ratio = 0.5;
        assert!(bulk_modulus(&r).is_err());
    }

    #[test]
    fn confined_volume_values() {
        let g = Geometry::from_radii(5e-3, 35e-3);
        assert_eq!(confined_volume(0.0, 0.0, &g).unwrap(), 0.0);
        let v = confined_volume(0.0, 50e-6, &g).unwrap();
        let expected = PI * (25e-6 - 4.95e-3f64.powi(2));
        assert!((v - expected).abs() < 1e-12 * expected);
        assert!((v - 1.5630e-6).abs() < 1e-10);
        assert!(confined_volume(0.0, 5e-3, &g).is_err());
        assert!(confined_volume(1e-6, 50e-6, &g).unwrap() > v);
    }

    #[test]
    fn unconstrained_volume_values() {
        let g = Geometry::from_radii(5e-3, 35e-3);
        assert_eq!(unconstrained_volume(0.0, 1e-5, &g, A).unwrap(), 0.0);
        let t = 20e-6;
        assert_eq!(
            unconstrained_volume(t, t, &g, A).unwrap(),
            confined_volume(0.0, t, &g).unwrap()
        );
        // thin annulus: doubling the thickness doubles the volume to O(t/r_i)
        let ratio =
            unconstrained_volume(2.0 * t, t, &g, A).unwrap() / confined_volume(0.0, t, &g).unwrap();
        assert!((ratio - 2.0).abs() < 2.0 * t / g.rebar_radius);
    }

    #[test]
    fn pressure_values() {
        let p = default_params();
        let g = &p.geometry;
        let layer = RustLayer::new(&p.rust, g, A).unwrap();
        let t = 30e-6;
        assert_eq!(layer.pressure(0.0, t, t).unwrap(), 0.0);
        assert_eq!(layer.pressure(0.0, t, 0.5 * t).unwrap(), 0.0);
        // V_0 = e V_rd gives p = K_r
        let v_rd = confined_volume(0.0, t, g).unwrap();
        let r0 = g.rebar_radius - t;
        let target = std::f64::consts::E * v_rd / PI;
        let t_unc = -r0 + (r0 * r0 + target).sqrt();
        let pr = layer.pressure(0.0, t, t_unc).unwrap();
        assert!((pr / layer.bulk_modulus - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stress_free_displacement_zeroes_pressure() {
        let p = default_params();
        let layer = RustLayer::new(&p.rust, &p.geometry, A).unwrap();
        for &(t, tu) in &[(10e-6, 12e-6), (100e-6, 180e-6), (1e-3, 1.9e-3)] {
            let u = stress_free_displacement(t, tu, A);
            let pr = layer.pressure(u, t, tu).unwrap();
            assert!(pr.abs() <= 1e-12 * layer.bulk_modulus, "{pr}");
        }
    }

    proptest! {
        #[test]
        fn pressure_monotone(t in 1e-6f64..1e-3, excess in 1e-8f64..1e-4, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, extra in 1e-9f64..1e-5) {
            let p = default_params();
            let layer = RustLayer::new(&p.rust, &p.geometry, A).unwrap();
            let tu = t + excess;
            let (lo, hi) = if u1 < u2 { (u1, u2) } else { (u2, u1) };
            let (ua, ub) = (lo * excess, hi * excess);
            let pa = layer.pressure(ua, t, tu).unwrap();
            let pb = layer.pressure(ub, t, tu).unwrap();
            prop_assert!(pa >= pb);
            if ub > ua && pb > 0.0 { prop_assert!(pa > pb); }
            let pc = layer.pressure(ua, t, tu + extra).unwrap();
            prop_assert!(pc >= pa);
        }
    }
}
