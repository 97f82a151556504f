//! Fast consistency battery run by `raacsim check`.

use crate::mechanics::{fd_bvp_verify, Cylinder, FdOptions};
use crate::params::ModelParams;
use crate::transport::{concrete_diffusivity, FluxReduction};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn verdict(name: &'static str, error: f64, limit: f64) -> CheckResult {
    CheckResult {
        name,
        passed: error <= limit,
        detail: format!("error {error:.3e}, limit {limit:.1e}"),
    }
}

/// Run every check on `params`. With `tamper` set, one reference value is
/// deliberately corrupted so the battery must fail.
pub fn run_selftest(params: &ModelParams, tamper: bool) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let bias = if tamper { 1.01 } else { 1.0 };

    match FluxReduction::new(&params.concrete, &params.rust) {
        Ok(f) => {
            out.push(verdict("k_f(0) = 1", (f.at(0.0) - bias).abs(), 1e-12));
            let ts = [0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3];
            let worst = ts
                .windows(2)
                .map(|w| f.at(w[1]) - f.at(w[0]))
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(CheckResult {
                name: "k_f strictly decreasing",
                passed: worst < 0.0,
                detail: format!("largest increment {worst:.3e}"),
            });
        }
        Err(e) => out.push(CheckResult {
            name: "k_f(0) = 1",
            passed: false,
            detail: e.to_string(),
        }),
    }

    let mut limit = params.clone();
    limit.rust.diffusivity = concrete_diffusivity(&limit.concrete);
    limit.concrete.transport_depth = 1.0;
    let err = match FluxReduction::new(&limit.concrete, &limit.rust) {
        Ok(f) => [1e-6, 1e-5, 1e-4]
            .iter()
            .map(|&t| (f.at(t) - (-f.a_r(t)).exp()).abs())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    out.push(verdict("k_f = exp(-A_r) limit", err, 1e-9));

    let cyl = Cylinder::new(&params.geometry, &params.concrete);
    let (r_i, r_o, f_t) = (cyl.r_i, cyl.r_o, cyl.tensile_strength);
    let (e, nu) = (cyl.youngs_modulus, cyl.poisson_ratio);
    let p0 = f_t * (r_o * r_o - r_i * r_i) / (r_o * r_o + r_i * r_i);
    let p_lim = f_t * (r_o - r_i) / r_i * bias;

    let p = 0.5 * p0;
    let err = match cyl.elastic_field(p, 64) {
        Ok(field) => {
            let a = p * r_i * r_i / (r_o * r_o - r_i * r_i);
            let b = a * r_o * r_o;
            (0..field.len())
                .map(|j| {
                    let r = field.r[j];
                    let u = ((1.0 - nu) * a * r + (1.0 + nu) * b / r) / e;
                    let sr = a - b / (r * r);
                    let st = a + b / (r * r);
                    rel(field.u[j], u)
                        .max((field.sigma_r[j] - sr).abs() / p)
                        .max((field.sigma_theta[j] - st).abs() / p)
                })
                .fold(0.0, f64::max)
        }
        Err(_) => f64::INFINITY,
    };
    out.push(verdict("Lame elastic field", err, 1e-12));

    out.push(verdict(
        "crack initiation pressure",
        rel(cyl.crack_initiation_pressure(), p0).max(rel(cyl.cracked_pressure(r_i), p0)),
        1e-12,
    ));
    let sat = cyl
        .pressure_from_displacement(cyl.saturation_displacement() * 1.5)
        .map_or(f64::INFINITY, |pt| rel(pt.p, p_lim));
    out.push(verdict(
        "limit pressure",
        rel(cyl.limit_pressure(), p_lim)
            .max(rel(cyl.cracked_pressure(r_o), p_lim))
            .max(sat),
        1e-12,
    ));

    let (u0, u_sat) = (cyl.initiation_displacement(), cyl.saturation_displacement());
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        let u_c = u0 + (u_sat - u0) * k as f64 / 5.0;
        let pair = cyl.pressure_from_displacement(u_c).and_then(|semi| {
            fd_bvp_verify(&cyl, u_c, FdOptions::with_intervals(200)).map(|(fd, _)| (semi, fd))
        });
        worst = worst.max(match pair {
            Ok((semi, fd)) => (semi.p - fd.p).abs() / cyl.limit_pressure(),
            Err(_) => f64::INFINITY,
        });
    }
    out.push(verdict("finite-difference vs semi-analytic", worst, 5e-3));
    out
}
