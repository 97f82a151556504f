use proptest::prelude::*;

use raacsim_core::sweep::classify;
use raacsim_core::{
    default_params, default_solver, fit_exponent, flux_reduction_coefficient, run_simulation,
    run_sweep, Axis, AxisName, CalibrationOptions, CalibrationRecord, CellClass, Cylinder,
    Geometry, ModelParams, Scale, SweepGrid, Termination,
};

fn params(phi: f64, cover: f64, diameter: f64, current: f64) -> ModelParams {
    let mut p = default_params();
    p.concrete.porosity = phi;
    p.geometry = Geometry::from_cover_and_diameter(cover, diameter);
    p.steel.corrosion_current_density = current;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_invariants(
        phi in 0.1f64..0.8,
        cover in 0.015f64..0.06,
        diameter in 0.008f64..0.025,
        current in 0.002f64..0.05,
    ) {
        let p = params(phi, cover, diameter, current);
        let out = run_simulation(&p, &default_solver()).unwrap();
        prop_assert_eq!(out.t_crit.is_some(), out.termination == Termination::ReachedCriterion);
        let kappa = p.rust.expansion_ratio;
        for w in out.series.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            prop_assert!(b.time > a.time && b.t_cor > a.t_cor);
            prop_assert!(b.p_n >= a.p_n);
            prop_assert!(b.u_c >= a.u_c);
            prop_assert!(b.k_f <= a.k_f);
            prop_assert!(b.r_c >= a.r_c);
        }
        for st in &out.series {
            prop_assert!(st.t_unc >= 0.0 && st.t_unc <= kappa * st.t_cor * (1.0 + 1e-12));
            prop_assert!(st.k_f > 0.0 && st.k_f <= 1.0);
            prop_assert!((0.0..=1.0).contains(&st.p_n));
            prop_assert!(st.escaped_moles >= 0.0 && st.escaped_moles <= st.faraday_moles);
            if st.t_unc <= st.t_cor {
                prop_assert_eq!(st.p, 0.0);
            } else {
                prop_assert!(st.p > 0.0);
            }
        }
        if let (Some(t), Some(end)) = (out.t_crit, out.stress_free_end) {
            prop_assert!(end > 0.0 && t > end);
        }
    }

    #[test]
    fn cracked_fields_are_admissible(
        r_i in 3e-3f64..15e-3,
        cover in 8e-3f64..60e-3,
        front in 0.0f64..=1.0,
    ) {
        let c = Cylinder::new(&Geometry::from_cover_and_diameter(cover, 2.0 * r_i), &default_params().concrete);
        let r_c = c.r_i + front * (c.r_o - c.r_i);
        let (_, field) = c.cracked_solution(r_c, 64).unwrap();
        let f_t = c.tensile_strength;
        let tol = 1e-9 * f_t;
        prop_assert!(field.sigma_r.last().unwrap().abs() <= tol);
        for i in 0..field.len() {
            prop_assert!(field.u[i] >= 0.0);
            prop_assert!(field.sigma_r[i] <= tol);
            prop_assert!(field.sigma_theta[i] >= -tol && field.sigma_theta[i] <= f_t + tol);
            prop_assert!(field.eps_cr[i] >= 0.0);
            if field.r[i] < r_c {
                prop_assert!((field.sigma_theta[i] - f_t).abs() <= tol);
            } else if field.r[i] > r_c {
                prop_assert_eq!(field.eps_cr[i], 0.0);
            }
        }
    }

    #[test]
    fn pressure_ratios_depend_on_geometry_only(
        r_i in 3e-3f64..15e-3,
        cover in 8e-3f64..60e-3,
        scale in 0.1f64..10.0,
        stiffness in 0.2f64..5.0,
    ) {
        let geom = Geometry::from_cover_and_diameter(cover, 2.0 * r_i);
        let base = default_params().concrete;
        let mut other = base.clone();
        other.tensile_strength *= scale;
        other.youngs_modulus *= stiffness;
        let (a, b) = (Cylinder::new(&geom, &base), Cylinder::new(&geom, &other));
        let ratio = |c: &Cylinder| (c.crack_initiation_pressure() / c.tensile_strength, c.limit_pressure() / c.tensile_strength);
        let ((a0, al), (b0, bl)) = (ratio(&a), ratio(&b));
        prop_assert!((a0 - b0).abs() <= 1e-14 * a0);
        prop_assert!((al - bl).abs() <= 1e-14 * al);
    }

    #[test]
    fn pressure_non_decreasing_in_displacement(
        r_i in 3e-3f64..15e-3,
        cover in 8e-3f64..60e-3,
        x in 0.0f64..1.2,
        y in 0.0f64..1.2,
    ) {
        let c = Cylinder::new(&Geometry::from_cover_and_diameter(cover, 2.0 * r_i), &default_params().concrete);
        let u_sat = c.saturation_displacement();
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let p_lo = c.pressure_from_displacement(lo * u_sat).unwrap();
        let p_hi = c.pressure_from_displacement(hi * u_sat).unwrap();
        prop_assert!(p_hi.p >= p_lo.p * (1.0 - 1e-12));
        prop_assert!((0.0..=1.0).contains(&p_hi.p_n));
    }

    #[test]
    fn flux_reduction_non_decreasing_in_porosity(
        a in 0.05f64..0.9,
        b in 0.05f64..0.9,
        t_cor in 1e-7f64..1e-3,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p = default_params();
        let k = |phi: f64| {
            let mut concrete = p.concrete.clone();
            concrete.porosity = phi;
            flux_reduction_coefficient(t_cor, &concrete, &p.rust).unwrap()
        };
        prop_assert!(k(hi) >= k(lo));
    }

    #[test]
    fn classification_matches_threshold(t in proptest::option::of(1e-6f64..1e-3), threshold in 1e-6f64..1e-3) {
        let class = classify(t, threshold);
        match t {
            None => prop_assert_eq!(class, CellClass::Undetermined),
            Some(t) if t >= threshold => prop_assert_eq!(class, CellClass::AtRiskConcealed),
            Some(_) => prop_assert_eq!(class, CellClass::CracksFirst),
        }
    }
}

#[test]
fn sweep_is_monotone_along_grid_lines() {
    let grid = SweepGrid {
        axes: vec![
            Axis {
                name: AxisName::Porosity,
                min: 0.1,
                max: 0.8,
                count: 5,
                scale: Scale::Linear,
            },
            Axis {
                name: AxisName::Cover,
                min: 0.020,
                max: 0.050,
                count: 4,
                scale: Scale::Linear,
            },
            Axis {
                name: AxisName::Diameter,
                min: 0.010,
                max: 0.020,
                count: 2,
                scale: Scale::Linear,
            },
        ],
        threshold: 100e-6,
    };
    let result = run_sweep(&grid, &default_params(), &default_solver(), 4).unwrap();
    assert_eq!(result.cells.len(), 40);
    assert_eq!(result.failures(), 0);
    let t = |i: usize, j: usize, k: usize| result.cells[(i * 4 + j) * 2 + k].t_crit.unwrap();
    for k in 0..2 {
        for j in 0..4 {
            for i in 1..5 {
                assert!(t(i, j, k) >= t(i - 1, j, k), "porosity line j={j} k={k}");
            }
        }
        for i in 0..5 {
            for j in 1..4 {
                assert!(t(i, j, k) >= t(i, j - 1, k), "cover line i={i} k={k}");
            }
        }
    }
    for cell in &result.cells {
        assert_eq!(cell.class, classify(cell.t_crit, grid.threshold));
    }
}

#[test]
fn calibration_is_reproducible() {
    let solver = default_solver();
    let records: Vec<CalibrationRecord> = [(0.2, 0.025), (0.45, 0.035), (0.7, 0.045)]
        .iter()
        .map(|&(phi, cover)| {
            let mut p = params(phi, cover, 0.012, 0.01);
            p.concrete.diffusivity_exponent = 2.0;
            CalibrationRecord {
                porosity: phi,
                cover,
                diameter: 0.012,
                current_density: 0.01,
                t_crit: run_simulation(&p, &solver).unwrap().t_crit.unwrap(),
                weight: 1.0,
            }
        })
        .collect();
    let options = CalibrationOptions::default();
    let first = fit_exponent(&records, &default_params(), &solver, &options).unwrap();
    let second = fit_exponent(&records, &default_params(), &solver, &options).unwrap();
    assert_eq!(first.m.to_bits(), second.m.to_bits());
    assert!((first.m - 2.0).abs() < 1e-3);
}
