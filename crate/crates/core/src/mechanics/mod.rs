//! Thick-walled concrete cylinder around the bar, plane stress.
//!
//! The concrete is linear elastic until the hoop stress reaches the tensile
//! strength, then ideally plastic in hoop tension (smeared radial
//! cracking). Under monotonic loading the cracked zone is `[r_i, r_c]` with
//! `σ_θ ≡ f_t` there, and the remainder `[r_c, r_o]` is an elastic Lamé
//! annulus whose hoop stress reaches `f_t` exactly at `r_c`. This module
//! solves that problem in closed form; [`fd`] solves the same boundary value
//! problem by finite differences as an independent check.

pub mod fd;

use std::io::{self, Write};

use serde::Serialize;

use crate::error::ModelError;
use crate::params::{ConcreteParams, Geometry};
use crate::roots::{find_root, RootOptions};

pub use fd::{fd_bvp_verify, FdOptions};

/// Absolute tolerance on the crack-front radius, m.
pub const CRACK_FRONT_TOL: f64 = 1e-12;

/// One point of the pressure/displacement response at the inner boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureDisplacementPoint {
    pub u_c: f64,
    pub p: f64,
    /// `p r_i / (f_t (r_o - r_i))`.
    pub p_n: f64,
    pub r_c: f64,
    /// The whole wall is cracked; `p` is capped at the limit pressure.
    pub saturated: bool,
}

/// Radial profiles over the cylinder wall.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MechanicalField {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub sigma_r: Vec<f64>,
    pub sigma_theta: Vec<f64>,
    pub eps_cr: Vec<f64>,
    pub crack_front: f64,
}

impl MechanicalField {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Columnar dump `r,u,sigma_r,sigma_theta,eps_cr` in SI units.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "r,u,sigma_r,sigma_theta,eps_cr")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.r[i], self.u[i], self.sigma_r[i], self.sigma_theta[i], self.eps_cr[i]
            )?;
        }
        Ok(())
    }
}

/// Concrete cylinder: geometry plus the elastic/strength constants it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub r_i: f64,
    pub r_o: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub tensile_strength: f64,
}

impl Cylinder {
    pub fn new(geom: &Geometry, concrete: &ConcreteParams) -> Self {
        Cylinder {
            r_i: geom.rebar_radius,
            r_o: geom.outer_radius,
            youngs_modulus: concrete.youngs_modulus,
            poisson_ratio: concrete.poisson_ratio,
            tensile_strength: concrete.tensile_strength,
        }
    }

    /// Pressure at which the hoop stress first reaches `f_t` at `r_i`.
    pub fn crack_initiation_pressure(&self) -> f64 {
        let (a2, b2) = (self.r_i * self.r_i, self.r_o * self.r_o);
        self.tensile_strength * (b2 - a2) / (b2 + a2)
    }

    /// Pressure of the fully cracked wall, `f_t (r_o - r_i) / r_i`.
    pub fn limit_pressure(&self) -> f64 {
        self.tensile_strength * (self.r_o - self.r_i) / self.r_i
    }

    pub fn normalized_pressure(&self, p: f64) -> f64 {
        p * self.r_i / (self.tensile_strength * (self.r_o - self.r_i))
    }

    fn point(&self, u_c: f64, p: f64, r_c: f64, saturated: bool) -> PressureDisplacementPoint {
        PressureDisplacementPoint {
            u_c,
            p,
            p_n: self.normalized_pressure(p).min(1.0),
            r_c,
            saturated,
        }
    }

    /// Lamé annulus `[inner, r_o]` with stress amplitude `a`, where
    /// `σ_r = a (1 - r_o²/r²)` and `σ_θ = a (1 + r_o²/r²)`.
    fn lame(&self, a: f64, r: f64) -> (f64, f64, f64) {
        let q = self.r_o * self.r_o / (r * r);
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        let u = a / e * ((1.0 - nu) * r + (1.0 + nu) * self.r_o * self.r_o / r);
        (u, a * (1.0 - q), a * (1.0 + q))
    }

    fn elastic_amplitude(&self, p: f64) -> f64 {
        p * self.r_i * self.r_i / (self.r_o * self.r_o - self.r_i * self.r_i)
    }

    /// Amplitude of the elastic annulus outside a crack front at `r_c`.
    fn front_amplitude(&self, r_c: f64) -> f64 {
        self.tensile_strength * r_c * r_c / (self.r_o * self.r_o + r_c * r_c)
    }

    /// Radial pressure transmitted across the crack front.
    pub fn interface_pressure(&self, r_c: f64) -> f64 {
        let (c2, b2) = (r_c * r_c, self.r_o * self.r_o);
        self.tensile_strength * (b2 - c2) / (b2 + c2)
    }

    /// Inner-boundary pressure for a crack front at `r_c`.
    pub fn cracked_pressure(&self, r_c: f64) -> f64 {
        let f_t = self.tensile_strength;
        r_c * (self.interface_pressure(r_c) + f_t) / self.r_i - f_t
    }

    /// `(u, σ_r, σ_θ, ε_θ^cr)` at radius `r` for a crack front at `r_c`.
    fn cracked_state(&self, r_c: f64, r: f64) -> (f64, f64, f64, f64) {
        let a = self.front_amplitude(r_c);
        if r >= r_c {
            let (u, sr, st) = self.lame(a, r);
            return (u, sr, st, 0.0);
        }
        let (e, nu, f_t) = (
            self.youngs_modulus,
            self.poisson_ratio,
            self.tensile_strength,
        );
        let load = r_c * (self.interface_pressure(r_c) + f_t);
        let sigma_r = f_t - load / r;
        let (u_front, _, _) = self.lame(a, r_c);
        // integrate du/dr = (σ_r - ν f_t) / E inward from the front
        let u = u_front - (1.0 - nu) * f_t * (r_c - r) / e + load * (r_c / r).ln() / e;
        let eps_cr = (u / r + nu * sigma_r / e - f_t / e).max(0.0);
        (u, sigma_r, f_t, eps_cr)
    }

    /// Inner-boundary displacement for a crack front at `r_c`.
    pub fn cracked_displacement(&self, r_c: f64) -> f64 {
        self.cracked_state(r_c, self.r_i).0
    }

    /// Inner displacement at crack initiation.
    pub fn initiation_displacement(&self) -> f64 {
        self.cracked_displacement(self.r_i)
    }

    /// Inner displacement at which the crack front reaches the surface.
    pub fn saturation_displacement(&self) -> f64 {
        self.cracked_displacement(self.r_o)
    }

    fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(1);
        let h = (self.r_o - self.r_i) / n as f64;
        (0..=n)
            .map(|j| {
                if j == n {
                    self.r_o
                } else {
                    self.r_i + j as f64 * h
                }
            })
            .collect()
    }

    /// Closed-form elastic field under inner pressure `p`, sampled on `n`
    /// equal intervals.
    pub fn elastic_field(&self, p: f64, n: usize) -> Result<MechanicalField, ModelError> {
        let p0 = self.crack_initiation_pressure();
        if !(p >= 0.0) || p > p0 * (1.0 + 1e-12) {
            return Err(ModelError::OutOfDomain {
                what: "elastic pressure",
                detail: format!("{p:e} Pa outside [0, {p0:e}] Pa; use the cracked solution"),
            });
        }
        let a = self.elastic_amplitude(p);
        let mut field = MechanicalField {
            crack_front: self.r_i,
            ..Default::default()
        };
        for r in self.grid(n) {
            let (u, sr, st) = self.lame(a, r);
            field.r.push(r);
            field.u.push(u);
            field.sigma_r.push(sr);
            field.sigma_theta.push(st);
            field.eps_cr.push(0.0);
        }
        Ok(field)
    }

    /// Semi-analytic solution with the crack front at `r_c`.
    pub fn cracked_solution(
        &self,
        r_c: f64,
        n: usize,
    ) -> Result<(PressureDisplacementPoint, MechanicalField), ModelError> {
        if !(r_c >= self.r_i && r_c <= self.r_o) {
            return Err(ModelError::OutOfDomain {
                what: "crack front",
                detail: format!("{r_c:e} m outside [{:e}, {:e}] m", self.r_i, self.r_o),
            });
        }
        let mut field = MechanicalField {
            crack_front: r_c,
            ..Default::default()
        };
        for r in self.grid(n) {
            let (u, sr, st, ec) = self.cracked_state(r_c, r);
            field.r.push(r);
            field.u.push(u);
            field.sigma_r.push(sr);
            field.sigma_theta.push(st);
            field.eps_cr.push(ec);
        }
        let p = self.cracked_pressure(r_c);
        let point = self.point(field.u[0], p, r_c, r_c >= self.r_o);
        Ok((point, field))
    }

    /// Inner pressure needed to impose the displacement `u_c`.
    pub fn pressure_from_displacement(
        &self,
        u_c: f64,
    ) -> Result<PressureDisplacementPoint, ModelError> {
        if !(u_c >= 0.0) {
            return Err(ModelError::OutOfDomain {
                what: "u_c",
                detail: format!("{u_c:e} m is negative"),
            });
        }
        let u0 = self.initiation_displacement();
        if u_c <= u0 {
            let p = self.crack_initiation_pressure() * (u_c / u0);
            return Ok(self.point(u_c, p, self.r_i, false));
        }
        let u_sat = self.saturation_displacement();
        if u_c >= u_sat {
            return Ok(self.point(u_c, self.limit_pressure(), self.r_o, true));
        }
        let root = find_root(
            "crack front",
            |r_c| Ok(self.cracked_displacement(r_c) - u_c),
            self.r_i,
            self.r_o,
            u0 - u_c,
            u_sat - u_c,
            RootOptions {
                x_tol: CRACK_FRONT_TOL,
                f_tol: 0.0,
                max_iter: 200,
            },
        )?;
        Ok(self.point(u_c, self.cracked_pressure(root.x), root.x, false))
    }
}

pub fn elastic_lame(
    p: f64,
    geom: &Geometry,
    concrete: &ConcreteParams,
    n: usize,
) -> Result<MechanicalField, ModelError> {
    Cylinder::new(geom, concrete).elastic_field(p, n)
}

pub fn crack_initiation_pressure(geom: &Geometry, concrete: &ConcreteParams) -> f64 {
    Cylinder::new(geom, concrete).crack_initiation_pressure()
}

pub fn limit_pressure(geom: &Geometry, concrete: &ConcreteParams) -> f64 {
    Cylinder::new(geom, concrete).limit_pressure()
}

pub fn cracked_solution(
    r_c: f64,
    geom: &Geometry,
    concrete: &ConcreteParams,
    n: usize,
) -> Result<(PressureDisplacementPoint, MechanicalField), ModelError> {
    Cylinder::new(geom, concrete).cracked_solution(r_c, n)
}

pub fn pressure_from_displacement(
    u_c: f64,
    geom: &Geometry,
    concrete: &ConcreteParams,
) -> Result<PressureDisplacementPoint, ModelError> {
    Cylinder::new(geom, concrete).pressure_from_displacement(u_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::default_params;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference() -> Cylinder {
        let p = default_params();
        Cylinder::new(&Geometry::from_radii(5e-3, 35e-3), &p.concrete)
    }

    #[test]
    fn reference_geometry_pressures() {
        let c = reference();
        let f_t = c.tensile_strength;
        assert!((c.crack_initiation_pressure() / f_t - 0.96).abs() < 1e-15);
        assert!((c.limit_pressure() / f_t - 6.0).abs() < 1e-14);
    }

    #[test]
    fn elastic_field_values() {
        let c = reference();
        let p = 0.5 * c.crack_initiation_pressure();
        let f = c.elastic_field(p, 300).unwrap();
        assert!((f.sigma_theta[0] / p - 1250.0 / 1200.0).abs() < 1e-12);
        assert!(f.sigma_r.last().unwrap().abs() < 1e-9 * p);
        assert!((f.sigma_r[0] + p).abs() < 1e-9 * p);
        let zero = c.elastic_field(0.0, 10).unwrap();
        assert!(zero
            .u
            .iter()
            .chain(&zero.sigma_r)
            .chain(&zero.sigma_theta)
            .all(|&v| v == 0.0));
        assert!(c
            .elastic_field(1.01 * c.crack_initiation_pressure(), 10)
            .is_err());
    }

    #[test]
    fn initiation_pressure_limits() {
        let mut c = reference();
        c.r_o = 1e3;
        assert!((c.crack_initiation_pressure() / c.tensile_strength - 1.0).abs() < 1e-9);
        c.r_o = c.r_i * (1.0 + 1e-9);
        assert!(c.crack_initiation_pressure() < 1e-8 * c.tensile_strength);
        c.r_o = 2.0 * c.r_i;
        assert!((c.limit_pressure() - c.tensile_strength).abs() < 1e-9);
    }

    #[test]
    fn cracked_solution_limits() {
        let c = reference();
        let f_t = c.tensile_strength;
        let (at_ri, _) = c.cracked_solution(c.r_i, 10).unwrap();
        assert!((at_ri.p - c.crack_initiation_pressure()).abs() < 1e-12 * f_t);
        let (at_ro, _) = c.cracked_solution(c.r_o, 10).unwrap();
        assert!((at_ro.p - c.limit_pressure()).abs() < 1e-12 * f_t);
        assert!((at_ro.p_n - 1.0).abs() < 1e-12);
        let (mid, field) = c.cracked_solution(20e-3, 600).unwrap();
        assert!((c.interface_pressure(20e-3) / f_t - 825.0 / 1625.0).abs() < 1e-14);
        assert!(
            (mid.p / f_t - 5.030769230769231).abs() < 1e-12,
            "{}",
            mid.p / f_t
        );
        assert!(c.cracked_solution(40e-3, 10).is_err());
        assert!(c.cracked_solution(4e-3, 10).is_err());
        // field invariants
        assert!(field.sigma_r.last().unwrap().abs() < 1e-9 * f_t);
        for i in 0..field.len() {
            assert!(field.sigma_r[i] <= 1e-9 * f_t);
            assert!(field.sigma_theta[i] <= f_t * (1.0 + 1e-12) && field.sigma_theta[i] >= 0.0);
            assert!(field.eps_cr[i] >= 0.0 && field.u[i] >= 0.0);
            if field.r[i] > 20e-3 {
                assert_eq!(field.eps_cr[i], 0.0);
            } else {
                assert_eq!(field.sigma_theta[i], f_t);
            }
        }
    }

    #[test]
    fn equilibrium_residual_of_closed_form() {
        let c = reference();
        for r_c in [c.r_i, 12e-3, 20e-3, 30e-3, c.r_o] {
            let (_, f) = c.cracked_solution(r_c, 2000).unwrap();
            for j in 1..f.len() - 1 {
                let h = f.r[j + 1] - f.r[j - 1];
                let d = (f.sigma_r[j + 1] - f.sigma_r[j - 1]) / h;
                let res = d * f.r[j] + f.sigma_r[j] - f.sigma_theta[j];
                assert!(
                    res.abs() < 1e-3 * c.tensile_strength,
                    "r_c {r_c} j {j} res {res}"
                );
            }
        }
    }

    #[test]
    fn continuity_seam() {
        let c = reference();
        let u0 = c.initiation_displacement();
        let pt = c.pressure_from_displacement(u0).unwrap();
        assert!((pt.p - c.crack_initiation_pressure()).abs() < 1e-12 * c.tensile_strength);
        assert_eq!(pt.r_c, c.r_i);
        assert_eq!(c.pressure_from_displacement(0.0).unwrap().p, 0.0);
        let sat = c
            .pressure_from_displacement(2.0 * c.saturation_displacement())
            .unwrap();
        assert!(sat.saturated && sat.p_n == 1.0 && sat.p == c.limit_pressure());
        assert!(c.pressure_from_displacement(-1e-9).is_err());
    }

    #[test]
    fn crack_front_round_trip() {
        let c = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r_c = rng.gen_range(c.r_i..c.r_o);
            let (pt, _) = c.cracked_solution(r_c, 2).unwrap();
            let back = c.pressure_from_displacement(pt.u_c).unwrap();
            assert!((back.r_c - r_c).abs() < 1e-9, "{r_c} {}", back.r_c);
            assert!((back.p - pt.p).abs() < 1e-9 * c.tensile_strength);
        }
    }

    #[test]
    fn field_csv_header() {
        let c = reference();
        let f = c.elastic_field(1.0, 4).unwrap();
        let mut out = Vec::new();
        f.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("r,u,sigma_r,sigma_theta,eps_cr\n"));
        assert_eq!(s.lines().count(), 6);
    }

    proptest! {
        #[test]
        fn limit_exceeds_initiation(r_i in 1e-3f64..2e-2, ratio in 1.001f64..20.0) {
            let mut c = reference();
            c.r_i = r_i;
            c.r_o = r_i * ratio;
            let q = c.limit_pressure() / c.crack_initiation_pressure();
            let closed = (c.r_o - c.r_i) * (c.r_o.powi(2) + c.r_i.powi(2))
                / (c.r_i * (c.r_o.powi(2) - c.r_i.powi(2)));
            prop_assert!(q > 1.0);
            prop_assert!((q - closed).abs() < 1e-10 * closed);
        }

        #[test]
        fn response_monotone(a in 0.0f64..1.2, b in 0.0f64..1.2) {
            let c = reference();
            let u_sat = c.saturation_displacement();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let pa = c.pressure_from_displacement(lo * u_sat).unwrap();
            let pb = c.pressure_from_displacement(hi * u_sat).unwrap();
            prop_assert!(pb.p >= pa.p - 1e-9 * c.tensile_strength);
            prop_assert!(pb.r_c >= pa.r_c - 1e-9);
            prop_assert!(pa.p_n >= 0.0 && pa.p_n <= 1.0);
        }

        #[test]
        fn strength_scaling(lambda in 0.1f64..10.0) {
            let c = reference();
            let mut s = c;
            s.tensile_strength *= lambda;
            prop_assert!((s.crack_initiation_pressure() / s.tensile_strength - c.crack_initiation_pressure() / c.tensile_strength).abs() < 1e-14);
            prop_assert!((s.limit_pressure() / s.tensile_strength - c.limit_pressure() / c.tensile_strength).abs() < 1e-13);
        }
    }
}
