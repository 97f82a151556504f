//! Time marching of the coupled corrosion/cracking problem.
//!
//! Corrosion penetration `t_cor` is the marching variable. Each step
//! advances the transport model, then finds the inner-boundary displacement
//! at which the rust pressure balances the resistance of the concrete
//! cylinder. The run stops when the pressure reaches the limit pressure of
//! the fully cracked wall (surface cracking) or when the horizon is used up.

use serde::Serialize;
use thiserror::Error;

use crate::error::ModelError;
use crate::mechanics::{fd_bvp_verify, Cylinder, FdOptions, PressureDisplacementPoint};
use crate::params::{ModelParams, SolverSettings, SteelParams};
use crate::roots::{find_root, RootOptions};
use crate::rust_layer::{stress_free_displacement, RustLayer};
use crate::transport::{time_to_release, Transport, TransportState};

/// Smallest marching step before the run is abandoned, m.
const MIN_STEP: f64 = 1e-15;

/// Step cap factor once `p_n` exceeds [`NEAR_CRITERION`].
const FINE_FACTOR: f64 = 0.125;
const NEAR_CRITERION: f64 = 0.9;

/// One accepted point of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrosionState {
    /// Time since corrosion initiation, s.
    pub time: f64,
    pub t_cor: f64,
    pub t_unc: f64,
    pub u_c: f64,
    pub p: f64,
    pub p_n: f64,
    pub k_f: f64,
    pub r_c: f64,
    pub faraday_moles: f64,
    pub escaped_moles: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedCriterion,
    HorizonExhausted,
    Error,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedCriterion => "reached_criterion",
            Termination::HorizonExhausted => "horizon_exhausted",
            Termination::Error => "error",
        }
    }
}

/// Finite-difference cross-check of the mechanical response at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdCheck {
    pub t_cor: f64,
    pub u_c: f64,
    pub p_semi_analytic: f64,
    pub p_finite_difference: f64,
    /// `|p_semi - p_fd| / p_lim`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutcome {
    pub series: Vec<CorrosionState>,
    /// Critical corrosion penetration, m.
    pub t_crit: Option<f64>,
    /// Concealment time, s.
    pub t_crit_time: Option<f64>,
    /// Corrosion penetration at the end of the stress-free period, m.
    pub stress_free_end: Option<f64>,
    pub termination: Termination,
    pub fd_checks: Vec<FdCheck>,
    /// Failure message when `termination` is `Error`.
    pub error: Option<String>,
}

impl SimulationOutcome {
    pub fn last(&self) -> Option<&CorrosionState> {
        self.series.last()
    }
}

/// Failure of a run, with the state it failed from.
#[derive(Debug, Clone, Error)]
#[error("simulation failed at t_cor = {:e} m (attempted step {step:e} m): {source}", state.t_cor)]
pub struct SimulationError {
    #[source]
    pub source: ModelError,
    /// Last accepted state.
    pub state: CorrosionState,
    pub step: f64,
    /// Everything accepted before the failure.
    pub partial: SimulationOutcome,
}

impl SimulationError {
    /// The partial outcome, marked as terminated by an error.
    pub fn into_outcome(self) -> SimulationOutcome {
        let mut out = self.partial;
        out.termination = Termination::Error;
        out.error = Some(format!(
            "{} (t_cor = {:e} m, step {:e} m)",
            self.source, self.state.t_cor, self.step
        ));
        out
    }
}

/// Equilibrium of the rust layer and the concrete at one transport state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub u_c: f64,
    pub p: f64,
    pub p_n: f64,
    pub r_c: f64,
    pub saturated: bool,
}

/// Balance the rust pressure against an arbitrary mechanical response.
///
/// `mech` maps the inner displacement to the concrete pressure and must be
/// non-decreasing. The returned displacement lies in `[0, u*]` where `u*`
/// is the stress-free displacement of the rust.
pub fn equilibrium_with<F>(
    t_cor: f64,
    t_unc: f64,
    layer: &RustLayer,
    mut mech: F,
    tol: f64,
    max_iter: usize,
) -> Result<Equilibrium, ModelError>
where
    F: FnMut(f64) -> Result<PressureDisplacementPoint, ModelError>,
{
    let u_star = stress_free_displacement(t_cor, t_unc, layer.convention);
    if u_star <= 0.0 {
        let free = mech(0.0)?;
        return Ok(Equilibrium {
            u_c: 0.0,
            p: 0.0,
            p_n: 0.0,
            r_c: free.r_c,
            saturated: false,
        });
    }
    let at_free = mech(u_star)?;
    if at_free.p <= 0.0 {
        return Ok(Equilibrium {
            u_c: u_star,
            p: 0.0,
            p_n: 0.0,
            r_c: at_free.r_c,
            saturated: false,
        });
    }
    let mut g =
        |u: f64| -> Result<f64, ModelError> { Ok(layer.pressure(u, t_cor, t_unc)? - mech(u)?.p) };
    let g0 = g(0.0)?;
    let g1 = -at_free.p;
    let x_tol = 4.0 * f64::EPSILON * u_star;
    let root = find_root(
        "pressure balance",
        &mut g,
        0.0,
        u_star,
        g0,
        g1,
        RootOptions {
            x_tol,
            f_tol: 0.0,
            max_iter,
        },
    )?;
    // a sign change within x_tol means the root is resolved as far as u can be
    let resolved = |g: &mut dyn FnMut(f64) -> Result<f64, ModelError>| -> Result<bool, ModelError> {
        let lo = g((root.x - x_tol).max(0.0))?;
        let hi = g((root.x + x_tol).min(u_star))?;
        Ok(lo.is_finite() && hi.is_finite() && lo * hi <= 0.0)
    };
    let p_thermo = layer.pressure(root.x, t_cor, t_unc)?;
    let mismatch = root.fx.abs();
    if mismatch > tol * p_thermo && mismatch > 1e-9 && !resolved(&mut g)? {
        return Err(ModelError::NoConvergence {
            what: "pressure balance",
            iterations: root.iterations,
            lo: root.x,
            hi: root.x,
        });
    }
    let point = mech(root.x)?;
    Ok(Equilibrium {
        u_c: root.x,
        p: point.p,
        p_n: point.p_n,
        r_c: point.r_c,
        saturated: point.saturated,
    })
}

/// Simulation of one parameter set.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    settings: &'a SolverSettings,
    transport: Transport<'a>,
    layer: RustLayer<'a>,
    cylinder: Cylinder,
}

impl<'a> Simulator<'a> {
    pub fn new(params: &'a ModelParams, settings: &'a SolverSettings) -> Result<Self, ModelError> {
        Ok(Simulator {
            settings,
            transport: Transport::new(params)?,
            layer: RustLayer::new(&params.rust, &params.geometry, settings.volume_convention)?,
            cylinder: Cylinder::new(&params.geometry, &params.concrete),
        })
    }

    pub fn cylinder(&self) -> &Cylinder {
        &self.cylinder
    }

    /// Pressure balance for a given corroded and free rust thickness.
    pub fn equilibrium(&self, t_cor: f64, t_unc: f64) -> Result<Equilibrium, ModelError> {
        equilibrium_with(
            t_cor,
            t_unc,
            &self.layer,
            |u| self.cylinder.pressure_from_displacement(u),
            self.settings.pressure_match_tol,
            self.settings.max_iterations,
        )
    }

    /// Rust pressure at the saturation displacement minus the limit
    /// pressure; non-negative exactly when surface cracking has occurred.
    fn criterion(&self, s: &TransportState) -> Result<f64, ModelError> {
        let u_sat = self.cylinder.saturation_displacement();
        Ok(self.layer.pressure(u_sat, s.t_cor, s.t_unc)? - self.cylinder.limit_pressure())
    }

    fn state(&self, s: &TransportState) -> Result<CorrosionState, ModelError> {
        let eq = self.equilibrium(s.t_cor, s.t_unc)?;
        Ok(CorrosionState {
            time: s.time,
            t_cor: s.t_cor,
            t_unc: s.t_unc,
            u_c: eq.u_c,
            p: eq.p,
            p_n: eq.p_n,
            k_f: s.k_f,
            r_c: eq.r_c,
            faraday_moles: s.faraday_moles,
            escaped_moles: s.escaped_moles,
        })
    }

    /// Transport state a distance `dt` past `from`, as one quadrature step.
    fn partial_step(&self, from: &TransportState, dt: f64) -> Result<TransportState, ModelError> {
        if dt <= 0.0 {
            return Ok(*from);
        }
        self.transport.advance(from, dt, f64::INFINITY)
    }

    /// Locate the zero of `f` along the step `[from, from + dt]`.
    #[allow(clippy::too_many_arguments)]
    fn refine<F>(
        &self,
        what: &'static str,
        from: &TransportState,
        dt: f64,
        f_from: f64,
        f_to: f64,
        f_tol: f64,
        f: F,
    ) -> Result<TransportState, ModelError>
    where
        F: Fn(&TransportState) -> Result<f64, ModelError>,
    {
        let root = find_root(
            what,
            |x| f(&self.partial_step(from, x)?),
            0.0,
            dt,
            f_from,
            f_to,
            RootOptions {
                x_tol: 1e-6 * self.settings.pressure_match_tol * dt,
                f_tol,
                max_iter: self.settings.max_iterations,
            },
        )?;
        self.partial_step(from, root.x)
    }

    fn fd_check(&self, st: &CorrosionState) -> Result<FdCheck, ModelError> {
        let opts = FdOptions::with_intervals(self.settings.grid_n);
        let (fd, _) = fd_bvp_verify(&self.cylinder, st.u_c, opts)?;
        let semi = self.cylinder.pressure_from_displacement(st.u_c)?;
        Ok(FdCheck {
            t_cor: st.t_cor,
            u_c: st.u_c,
            p_semi_analytic: semi.p,
            p_finite_difference: fd.p,
            deviation: (semi.p - fd.p).abs() / self.cylinder.limit_pressure(),
        })
    }

    pub fn run(&self) -> Result<SimulationOutcome, SimulationError> {
        let st = self.settings;
        let mut out = SimulationOutcome {
            series: Vec::new(),
            t_crit: None,
            t_crit_time: None,
            stress_free_end: None,
            termination: Termination::HorizonExhausted,
            fd_checks: Vec::new(),
            error: None,
        };
        let mut ts = TransportState::initial();
        let first = self.state(&ts).map_err(|e| fail(e, None, 0.0, &out))?;
        out.series.push(first);
        let mut psi = self
            .criterion(&ts)
            .map_err(|e| fail(e, Some(first), 0.0, &out))?;
        let mut dt = st.dt_cor_max;
        let mut steps = 0usize;

        while ts.t_cor < st.t_cor_max {
            let last = *out
                .series
                .last()
                .expect("series starts with the initial state");
            let cap = if last.p_n >= NEAR_CRITERION {
                FINE_FACTOR * st.dt_cor_max
            } else {
                st.dt_cor_max
            };
            let h = dt.min(cap).min(st.t_cor_max - ts.t_cor);
            let next = match self.transport.advance(&ts, h, st.kf_step_tol) {
                Ok(n) => n,
                Err(ModelError::StepTooCoarse { .. }) if h * 0.5 >= MIN_STEP => {
                    dt = 0.5 * h;
                    continue;
                }
                Err(e) => return Err(fail(e, Some(last), h, &out)),
            };
            if (next.k_f - ts.k_f).abs() < 0.25 * st.kf_step_tol {
                dt = (2.0 * h).min(st.dt_cor_max);
            }

            let mark_stress_free = |out: &mut SimulationOutcome| -> Result<(), ModelError> {
                let (g0, g1) = (ts.t_unc - ts.t_cor, next.t_unc - next.t_cor);
                if out.stress_free_end.is_none() && g0 <= 0.0 && g1 > 0.0 {
                    let s = self.refine("end of stress-free period", &ts, h, g0, g1, 0.0, |s| {
                        Ok(s.t_unc - s.t_cor)
                    })?;
                    out.stress_free_end = Some(s.t_cor);
                }
                Ok(())
            };
            mark_stress_free(&mut out).map_err(|e| fail(e, Some(last), h, &out))?;

            let psi_next = self
                .criterion(&next)
                .map_err(|e| fail(e, Some(last), h, &out))?;
            if psi < 0.0 && psi_next >= 0.0 {
                let f_tol = 0.5 * st.pressure_match_tol * self.cylinder.limit_pressure();
                let crit = self
                    .refine("critical penetration", &ts, h, psi, psi_next, f_tol, |s| {
                        self.criterion(s)
                    })
                    .and_then(|s| self.state(&s).map(|c| (s, c)));
                let (cs, mut state) = crit.map_err(|e| fail(e, Some(last), h, &out))?;
                // the criterion is a statement about the saturated wall
                state.p_n = state.p_n.max(last.p_n);
                out.series.push(state);
                out.t_crit = Some(cs.t_cor);
                out.t_crit_time = Some(cs.time);
                out.termination = Termination::ReachedCriterion;
                return Ok(out);
            }

            let state = self
                .state(&next)
                .map_err(|e| fail(e, Some(last), h, &out))?;
            steps += 1;
            if st.fd_verify_every > 0 && steps.is_multiple_of(st.fd_verify_every) {
                let check = self
                    .fd_check(&state)
                    .map_err(|e| fail(e, Some(last), h, &out))?;
                out.fd_checks.push(check);
            }
            out.series.push(state);
            ts = next;
            psi = psi_next;
        }
        log::debug!(
            "horizon of {:e} m exhausted after {steps} steps",
            st.t_cor_max
        );
        Ok(out)
    }
}

fn fail(
    source: ModelError,
    state: Option<CorrosionState>,
    step: f64,
    partial: &SimulationOutcome,
) -> SimulationError {
    let state = state.unwrap_or(CorrosionState {
        time: 0.0,
        t_cor: 0.0,
        t_unc: 0.0,
        u_c: 0.0,
        p: 0.0,
        p_n: 0.0,
        k_f: 1.0,
        r_c: 0.0,
        faraday_moles: 0.0,
        escaped_moles: 0.0,
    });
    SimulationError {
        source,
        state,
        step,
        partial: partial.clone(),
    }
}

/// Balance the rust pressure and the concrete resistance.
pub fn equilibrium_solve(
    t_cor: f64,
    t_unc: f64,
    params: &ModelParams,
    settings: &SolverSettings,
) -> Result<Equilibrium, ModelError> {
    Simulator::new(params, settings)?.equilibrium(t_cor, t_unc)
}

/// Run one simulation.
pub fn run_simulation(
    params: &ModelParams,
    settings: &SolverSettings,
) -> Result<SimulationOutcome, SimulationError> {
    let sim = Simulator::new(params, settings).map_err(|e| {
        fail(
            e,
            None,
            0.0,
            &SimulationOutcome {
                series: Vec::new(),
                t_crit: None,
                t_crit_time: None,
                stress_free_end: None,
                termination: Termination::Error,
                fd_checks: Vec::new(),
                error: None,
            },
        )
    })?;
    sim.run()
}

/// Time to corrode through `t_crit` of steel under the current schedule.
pub fn concealment_time(
    outcome: &SimulationOutcome,
    steel: &SteelParams,
) -> Result<f64, ModelError> {
    let t_crit = outcome.t_crit.ok_or(ModelError::OutOfDomain {
        what: "concealment time",
        detail: format!("no critical penetration ({})", outcome.termination.as_str()),
    })?;
    Ok(concealment_time_for(t_crit, steel))
}

/// Time to corrode through `t_cor` of steel under the current schedule.
pub fn concealment_time_for(t_cor: f64, steel: &SteelParams) -> f64 {
    time_to_release(steel, 0.0, t_cor * steel.density / steel.molar_mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{default_params, default_solver};
    use crate::params::CurrentStep;
    use crate::transport::penetration_rate;
    use crate::units::SECONDS_PER_YEAR;

    fn run(p: &ModelParams) -> SimulationOutcome {
        run_simulation(p, &default_solver()).unwrap()
    }

    #[test]
    fn stress_free_state_has_no_pressure() {
        let p = default_params();
        let s = default_solver();
        let eq = equilibrium_solve(50e-6, 50e-6, &p, &s).unwrap();
        assert_eq!((eq.u_c, eq.p, eq.r_c), (0.0, 0.0, p.geometry.rebar_radius));
        let eq = equilibrium_solve(50e-6, 30e-6, &p, &s).unwrap();
        assert_eq!(eq.p, 0.0);
    }

    #[test]
    fn free_expansion_without_concrete() {
        let p = default_params();
        let layer = RustLayer::new(&p.rust, &p.geometry, Default::default()).unwrap();
        let free = |u: f64| {
            Ok(PressureDisplacementPoint {
                u_c: u,
                p: 0.0,
                p_n: 0.0,
                r_c: 0.0,
                saturated: false,
            })
        };
        let eq = equilibrium_with(40e-6, 55e-6, &layer, free, 1e-9, 200).unwrap();
        assert_eq!(eq.u_c, 55e-6 - 40e-6);
        assert_eq!(eq.p, 0.0);
    }

    #[test]
    fn balance_is_tight() {
        let p = default_params();
        let s = default_solver();
        let sim = Simulator::new(&p, &s).unwrap();
        for t_unc in [50.5e-6, 52e-6, 60e-6] {
            let eq = sim.equilibrium(50e-6, t_unc).unwrap();
            let p_th = sim.layer.pressure(eq.u_c, 50e-6, t_unc).unwrap();
            assert!((p_th - eq.p).abs() <= 1e-9 * eq.p, "{p_th} {}", eq.p);
            assert!(eq.u_c > 0.0 && eq.u_c < t_unc - 50e-6);
        }
    }

    #[test]
    fn incompressible_limit() {
        // K_r x10^k drives u_c to the stress-free displacement
        let mut p = default_params();
        let s = default_solver();
        let (t_cor, t_unc) = (50e-6, 52e-6);
        let u_star = t_unc - t_cor;
        let mut gaps = Vec::new();
        for _ in 0..4 {
            let eq = equilibrium_solve(t_cor, t_unc, &p, &s).unwrap();
            gaps.push(u_star - eq.u_c);
            p.rust.youngs_modulus *= 10.0;
        }
        for w in gaps.windows(2) {
            assert!(w[1] < 0.2 * w[0], "{gaps:?}");
        }
        let cyl = Cylinder::new(&p.geometry, &p.concrete);
        let eq = equilibrium_solve(t_cor, t_unc, &p, &s).unwrap();
        let target = cyl.pressure_from_displacement(u_star).unwrap().p;
        assert!((eq.p - target).abs() < 1e-3 * target);
    }

    #[test]
    fn reference_run_reaches_criterion() {
        let p = default_params();
        let out = run(&p);
        assert_eq!(out.termination, Termination::ReachedCriterion);
        let t_crit = out.t_crit.unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.t_cor, t_crit);
        assert!((last.p_n - 1.0).abs() < 1e-6);
        let sf = out.stress_free_end.unwrap();
        assert!(sf > 0.0 && sf < t_crit);
        assert_eq!(out.series[0].time, 0.0);
        for w in out.series.windows(2) {
            assert!(w[1].time > w[0].time && w[1].t_cor > w[0].t_cor);
            assert!(w[1].p_n >= w[0].p_n && w[1].u_c >= w[0].u_c);
            assert!(w[1].k_f <= w[0].k_f && w[1].r_c >= w[0].r_c);
        }
        for s in &out.series {
            assert_eq!(s.p > 0.0, s.t_unc > s.t_cor, "{s:?}");
        }
        let t = concealment_time(&out, &p.steel).unwrap();
        assert!((t - t_crit / penetration_rate(&p.steel)).abs() < 1e-9 * t);
        assert!((t - out.t_crit_time.unwrap()).abs() < 1e-9 * t);
    }

    #[test]
    fn porosity_and_cover_increase_t_crit() {
        let mut p = default_params();
        let base = run(&p).t_crit.unwrap();
        p.concrete.porosity = 0.6;
        let porous = run(&p).t_crit.unwrap();
        assert!(porous > base);
        let mut p = default_params();
        p.geometry = crate::params::Geometry::from_cover_and_diameter(0.05, 0.01);
        assert!(run(&p).t_crit.unwrap() > base);
    }

    #[test]
    fn stress_free_forever() {
        let mut p = default_params();
        p.rust.expansion_ratio = 1.01;
        p.concrete.porosity = 0.5;
        let mut s = default_solver();
        s.t_cor_max = 0.5e-3;
        let out = run_simulation(&p, &s).unwrap();
        assert_eq!(out.termination, Termination::HorizonExhausted);
        assert!(out.t_crit.is_none() && out.stress_free_end.is_none());
        assert!(out.series.iter().all(|s| s.p == 0.0));
        assert!(concealment_time(&out, &p.steel).is_err());
    }

    #[test]
    fn deterministic() {
        let p = default_params();
        let a = run(&p);
        let b = run(&p);
        assert_eq!(a, b);
    }

    #[test]
    fn schedule_changes_time_only() {
        let p = default_params();
        let base = run(&p);
        let mut q = p.clone();
        q.steel.current_schedule = vec![CurrentStep {
            from: 0.5 * SECONDS_PER_YEAR,
            current_density: 0.02,
        }];
        let sched = run(&q);
        assert_eq!(base.t_crit, sched.t_crit);
        assert!(sched.t_crit_time.unwrap() < base.t_crit_time.unwrap());
        let t = concealment_time(&sched, &q.steel).unwrap();
        assert!((t - sched.t_crit_time.unwrap()).abs() < 1e-9 * t);
    }

    #[test]
    fn concealment_time_scaling() {
        let p = default_params();
        let mut out = run(&p);
        let t1 = concealment_time(&out, &p.steel).unwrap();
        let mut q = p.clone();
        q.steel.corrosion_current_density *= 2.0;
        assert!((concealment_time(&out, &q.steel).unwrap() - 0.5 * t1).abs() < 1e-12 * t1);
        out.t_crit = Some(0.0);
        assert_eq!(concealment_time(&out, &p.steel).unwrap(), 0.0);
        out.t_crit = Some(100e-6);
        let years = concealment_time(&out, &p.steel).unwrap() / SECONDS_PER_YEAR;
        assert!((years - 8.6).abs() < 0.1, "{years}");
    }

    #[test]
    fn fd_checks_recorded() {
        let p = default_params();
        let mut s = default_solver();
        s.fd_verify_every = 100;
        s.grid_n = 400;
        let out = run_simulation(&p, &s).unwrap();
        assert!(!out.fd_checks.is_empty());
        assert!(out.fd_checks.iter().all(|c| c.deviation < 5e-3));
    }
}
