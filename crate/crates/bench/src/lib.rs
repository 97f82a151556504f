//! Fixtures shared by the benchmarks.

use raacsim_core::{
    default_params, default_solver, Cylinder, Geometry, ModelParams, SolverSettings,
};

/// Reference case: 30 mm cover over a 10 mm bar at the ledger defaults.
pub fn reference() -> (ModelParams, SolverSettings) {
    let mut p = default_params();
    p.geometry = Geometry::from_cover_and_diameter(0.030, 0.010);
    (p, default_solver())
}

pub fn cylinder() -> Cylinder {
    let (p, _) = reference();
    Cylinder::new(&p.geometry, &p.concrete)
}

/// Displacement halfway between crack initiation and saturation.
pub fn mid_crack_displacement(cyl: &Cylinder) -> f64 {
    0.5 * (cyl.initiation_displacement() + cyl.saturation_displacement())
}
