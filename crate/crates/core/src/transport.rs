//! Iron release, escape of Fe2+ into the pore space and growth of the
//! unconstrained dense rust layer.
//!
//! The fraction of the Faraday flux leaving through the rust layer into the
//! concrete pores is the steady-state solution of a two-domain
//! diffusion-reaction problem (rust layer of thickness `t_cor`, concrete
//! layer of thickness `t_c`):
//!
//! ```text
//! k_f = sech(A_r) · √D_c coth(A_c) / (√D_c coth(A_c) + √D_r tanh(A_r))
//! A_r = t_cor √(k / D_r),  A_c = t_c √(k / D_c),  k = k_o + c_ox k_III
//! ```
//!
//! which is the overflow-safe rewrite of `2e^{A_r}/(1 + e^{2A_r}) · …`.

use serde::Serialize;

use crate::error::ModelError;
use crate::params::{ConcreteParams, ModelParams, RustParams, SteelParams};

/// Faraday molar flux of Fe2+ at the initial current density, mol/(m2 s).
pub fn faraday_flux(steel: &SteelParams) -> f64 {
    flux_for_current(steel, steel.corrosion_current_density)
}

fn flux_for_current(steel: &SteelParams, i_a: f64) -> f64 {
    i_a / (steel.electrons * steel.faraday_constant)
}

/// Steel loss rate at the initial current density, m/s.
pub fn penetration_rate(steel: &SteelParams) -> f64 {
    faraday_flux(steel) * steel.molar_mass / steel.density
}

/// Fe2+ diffusivity of the concrete pore network, `D_w φ^m`.
pub fn concrete_diffusivity(concrete: &ConcreteParams) -> f64 {
    concrete.water_diffusivity * concrete.porosity.powf(concrete.diffusivity_exponent)
}

/// Hyperbolic cotangent with a series branch near zero.
pub fn coth(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// Hyperbolic secant that underflows gracefully instead of overflowing.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Precomputed constants of the flux reduction coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxReduction {
    /// √(k / D_r), 1/m.
    inv_length_rust: f64,
    sqrt_dr: f64,
    /// √D_c coth(A_c).
    concrete_term: f64,
}

impl FluxReduction {
    pub fn new(concrete: &ConcreteParams, rust: &RustParams) -> Result<Self, ModelError> {
        let k = rust.rate_sum();
        if !(k > 0.0) {
            return Err(ModelError::DegenerateRates);
        }
        let d_c = concrete_diffusivity(concrete);
        let a_c = concrete.transport_depth * (k / d_c).sqrt();
        Ok(FluxReduction {
            inv_length_rust: (k / rust.diffusivity).sqrt(),
            sqrt_dr: rust.diffusivity.sqrt(),
            concrete_term: d_c.sqrt() * coth(a_c),
        })
    }

    /// Rust-related constant `A_r` for a given corroded thickness.
    pub fn a_r(&self, t_cor: f64) -> f64 {
        t_cor * self.inv_length_rust
    }

    pub fn at(&self, t_cor: f64) -> f64 {
        let a_r = self.a_r(t_cor);
        sech(a_r) * self.concrete_term / (self.concrete_term + self.sqrt_dr * a_r.tanh())
    }
}

/// Flux reduction coefficient `k_f` (normalised escaping flux `j_n`).
pub fn flux_reduction_coefficient(
    t_cor: f64,
    concrete: &ConcreteParams,
    rust: &RustParams,
) -> Result<f64, ModelError> {
    if !(t_cor >= 0.0) {
        return Err(ModelError::OutOfDomain {
            what: "t_cor",
            detail: format!("{t_cor:e} m is negative"),
        });
    }
    Ok(FluxReduction::new(concrete, rust)?.at(t_cor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportState {
    /// Time since corrosion initiation, s.
    pub time: f64,
    pub t_cor: f64,
    /// Fe released by the anode so far, mol/m2.
    pub faraday_moles: f64,
    /// Fe escaped into the pore space so far, mol/m2.
    pub escaped_moles: f64,
    pub t_unc: f64,
    pub k_f: f64,
}

impl TransportState {
    pub fn initial() -> Self {
        TransportState {
            time: 0.0,
            t_cor: 0.0,
            faraday_moles: 0.0,
            escaped_moles: 0.0,
            t_unc: 0.0,
            k_f: 1.0,
        }
    }
}

/// Time needed, starting at `start`, for the anode to release `moles` of Fe
/// per unit area under the (piecewise constant) current schedule.
pub fn time_to_release(steel: &SteelParams, start: f64, moles: f64) -> f64 {
    let mut t = start;
    let mut remaining = moles;
    loop {
        let flux = flux_for_current(steel, steel.current_at(t));
        let next = steel
            .current_schedule
            .iter()
            .map(|s| s.from)
            .find(|&from| from > t);
        match next {
            Some(next) => {
                let available = flux * (next - t);
                if flux > 0.0 && available >= remaining {
                    return t + remaining / flux;
                }
                remaining -= available;
                t = next;
            }
            None => return t + remaining / flux,
        }
    }
}

/// Transport model bound to one parameter set.
#[derive(Debug, Clone)]
pub struct Transport<'a> {
    params: &'a ModelParams,
    kf: FluxReduction,
}

impl<'a> Transport<'a> {
    pub fn new(params: &'a ModelParams) -> Result<Self, ModelError> {
        Ok(Transport {
            params,
            kf: FluxReduction::new(&params.concrete, &params.rust)?,
        })
    }

    pub fn flux_reduction(&self) -> &FluxReduction {
        &self.kf
    }

    /// Advance corrosion by `dt_cor` with trapezoidal quadrature of the
    /// escaping flux. The step is rejected when `k_f` changes by more than
    /// `kf_tol`; callers subdivide.
    pub fn advance(
        &self,
        state: &TransportState,
        dt_cor: f64,
        kf_tol: f64,
    ) -> Result<TransportState, ModelError> {
        if !(dt_cor > 0.0) {
            return Err(ModelError::OutOfDomain {
                what: "dt_cor",
                detail: format!("step {dt_cor:e} m must be positive"),
            });
        }
        let steel = &self.params.steel;
        let t_cor = state.t_cor + dt_cor;
        let k_f = self.kf.at(t_cor);
        let change = (state.k_f - k_f).abs();
        if change > kf_tol {
            return Err(ModelError::StepTooCoarse {
                step: dt_cor,
                change,
                limit: kf_tol,
            });
        }
        let released = dt_cor * steel.density / steel.molar_mass;
        let time = time_to_release(steel, state.time, released);
        let faraday_moles = state.faraday_moles + released;
        let escaped_moles = state.escaped_moles + 0.5 * (state.k_f + k_f) * released;
        let t_unc = self.params.rust.expansion_ratio
            * (t_cor - steel.molar_mass / steel.density * escaped_moles);
        Ok(TransportState {
            time,
            t_cor,
            faraday_moles,
            escaped_moles,
            t_unc,
            k_f,
        })
    }
}

/// Free function form of [`Transport::advance`].
pub fn advance_transport(
    state: &TransportState,
    dt_cor: f64,
    params: &ModelParams,
    kf_tol: f64,
) -> Result<TransportState, ModelError> {
    Transport::new(params)?.advance(state, dt_cor, kf_tol)
}
