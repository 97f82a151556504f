//! Corrosion-induced cracking of reinforced, aerated concrete.
//!
//! A rust layer grows on a rebar embedded in a thick-walled concrete
//! cylinder. Part of the dissolved iron escapes into the pores; the rest
//! precipitates at the interface. Once the precipitate fills the corrosion
//! gap it pressurises the concrete, which cracks radially until the crack
//! front reaches the surface. The model reports the corrosion penetration
//! `t_crit` at which that happens and the corresponding concealment time.
//!
//! ```
//! use raacsim_core::{default_params, default_solver, run_simulation};
//!
//! let params = default_params();
//! let outcome = run_simulation(&params, &default_solver()).unwrap();
//! assert!(outcome.t_crit.unwrap() > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

pub mod calibration;
pub mod config;
pub mod error;
pub mod ledger;
pub mod mechanics;
pub mod output;
pub mod params;
pub mod roots;
pub mod rust_layer;
pub mod selftest;
pub mod simulator;
pub mod sweep;
pub mod transport;
pub mod units;

pub use calibration::{
    fit_exponent, load_dataset, parse_dataset, CalibrationError, CalibrationOptions,
    CalibrationRecord, CalibrationResult,
};
pub use config::{load_config, RawConfig, RunConfig};
pub use error::{ConfigError, DatasetError, ModelError};
pub use ledger::{default_params, default_solver, Provenance};
pub use mechanics::{
    crack_initiation_pressure, cracked_solution, elastic_lame, fd_bvp_verify, limit_pressure,
    pressure_from_displacement, Cylinder, FdOptions, MechanicalField, PressureDisplacementPoint,
};
pub use params::{
    ConcreteParams, CurrentStep, Geometry, ModelParams, RustParams, SolverSettings, SteelParams,
    VolumeConvention,
};
pub use rust_layer::{thermo_pressure, RustLayer};
pub use selftest::{run_selftest, CheckResult};
pub use simulator::{
    concealment_time, equilibrium_solve, run_simulation, CorrosionState, SimulationError,
    SimulationOutcome, Termination,
};
pub use sweep::{
    exponential_fit, run_sweep, Axis, AxisName, CellClass, Scale, SweepGrid, SweepResult,
};
pub use transport::{
    advance_transport, flux_reduction_coefficient, penetration_rate, TransportState,
};
