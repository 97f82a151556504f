//! Finite-difference solution of the cracked cylinder boundary value
//! problem, used to cross-check the closed-form solver.
//!
//! The annulus is split into cells between grid nodes and each node
//! balances the radial traction `r σ_r` of its two cells. Inside an elastic
//! cell the displacement is the plane-stress Lamé field `a r + b / r`
//! through the two end values. Cracked material carries `σ_θ = f_t` and
//! `σ_r = E u' + ν f_t` (the cracking strain absorbs the rest of the hoop
//! strain); there `r σ_r` is taken at the cell midpoint from a central
//! difference and carried to the ends by integrating `d(r σ_r)/dr = f_t`.
//! Boundary conditions are `u(r_i) = u_c` and `σ_r(r_o) = 0`; the inner
//! pressure is the traction of the first cell at `r_i`. The elastic cells
//! reaching the free surface hold one traction-free Lamé field, so they are
//! condensed into the exact stiffness at their inner node before the solve.
//!
//! The solve runs in two stages. First the set of cracked nodes is iterated
//! to a fixed point on a uniform grid: an elastic node cracks when its trial
//! hoop stress exceeds `f_t`, a cracked node closes when its cracking strain
//! turns negative. The crack front then lies between two nodes; in the
//! second stage the nearest node is moved onto the front and the front
//! radius is solved for so that the elastic hoop stress just outside it
//! equals `f_t`. Fitting the front keeps the scheme second order.

use crate::error::ModelError;
use crate::roots::{find_root, RootOptions};

use super::{Cylinder, MechanicalField, PressureDisplacementPoint};

#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    /// Number of grid intervals.
    pub n: usize,
    /// Cap on cracked-set sweeps.
    pub max_sweeps: usize,
}

impl FdOptions {
    pub fn with_intervals(n: usize) -> Self {
        FdOptions {
            n,
            max_sweeps: n + 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Elastic,
    Cracked,
    /// Front node: cracked to the left, elastic to the right.
    Front,
}

impl Zone {
    fn cracked(self) -> bool {
        self != Zone::Elastic
    }
}

/// `r σ_r` at one end of a cell: `left u[j] + right u[j+1] + constant`.
#[derive(Debug, Clone, Copy, Default)]
struct Traction {
    left: f64,
    right: f64,
    constant: f64,
}

impl Traction {
    fn eval(&self, u: &[f64], j: usize) -> f64 {
        self.left * u[j] + self.right * u[j + 1] + self.constant
    }
}

struct Discretisation<'a> {
    cyl: &'a Cylinder,
    r: Vec<f64>,
    zone: Vec<Zone>,
}

impl<'a> Discretisation<'a> {
    fn e_plane(&self) -> f64 {
        let nu = self.cyl.poisson_ratio;
        self.cyl.youngs_modulus / (1.0 - nu * nu)
    }

    fn cell_cracked(&self, j: usize) -> bool {
        self.zone[j].cracked() && self.zone[j + 1].cracked()
    }

    /// Lamé coefficients `(a, b)` of `u = a r + b / r` through the end
    /// values of elastic cell `j`, as weights on `(u[j], u[j+1])`.
    fn lame_weights(&self, j: usize) -> ([f64; 2], [f64; 2]) {
        let (r0, r1) = (self.r[j], self.r[j + 1]);
        let d = (r1 - r0) * (r1 + r0);
        ([-r0 / d, r1 / d], [r0 * r1 * r1 / d, -r0 * r0 * r1 / d])
    }

    /// `r σ_r` at the left (`at_right = false`) or right end of cell `j`.
    fn traction(&self, j: usize, at_right: bool) -> Traction {
        let (r0, r1) = (self.r[j], self.r[j + 1]);
        let nu = self.cyl.poisson_ratio;
        if self.cell_cracked(j) {
            let (e, f_t) = (self.cyl.youngs_modulus, self.cyl.tensile_strength);
            let h = r1 - r0;
            let rm = 0.5 * (r0 + r1);
            let half = if at_right {
                0.5 * h * f_t
            } else {
                -0.5 * h * f_t
            };
            return Traction {
                left: -rm * e / h,
                right: rm * e / h,
                constant: rm * nu * f_t + half,
            };
        }
        let r = if at_right { r1 } else { r0 };
        let ep = self.e_plane();
        let (a, b) = self.lame_weights(j);
        let w = |k: usize| r * ep * ((1.0 + nu) * a[k] - (1.0 - nu) * b[k] / (r * r));
        Traction {
            left: w(0),
            right: w(1),
            constant: 0.0,
        }
    }

    /// Inner pressure. Summing the node balances across the cracked cells,
    /// where `d(r σ_r)/dr = f_t`, gives `r_i p = f_t (r_m - r_i) - r_m σ_r(r_m)`
    /// with `r_m` the inner end of the first elastic cell.
    fn inner_pressure(&self, u: &[f64]) -> f64 {
        let n = self.r.len() - 1;
        let m = (0..n).find(|&j| !self.cell_cracked(j)).unwrap_or(n);
        let outer = if m == n {
            0.0
        } else if m == self.elastic_tail() {
            self.tail_stiffness(m) * u[m]
        } else {
            self.traction(m, false).eval(u, m)
        };
        (self.cyl.tensile_strength * (self.r[m] - self.r[0]) - outer) / self.r[0]
    }

    /// Hoop stress at node `j` of elastic cell `cell`.
    fn elastic_hoop(&self, u: &[f64], cell: usize, j: usize) -> f64 {
        let nu = self.cyl.poisson_ratio;
        let (a, b) = self.lame_weights(cell);
        let (ua, ub) = (u[cell], u[cell + 1]);
        let (a, b) = (a[0] * ua + a[1] * ub, b[0] * ua + b[1] * ub);
        let r = self.r[j];
        self.e_plane() * ((1.0 + nu) * a + (1.0 - nu) * b / (r * r))
    }

    /// First node of the elastic region that reaches the free surface.
    fn elastic_tail(&self) -> usize {
        let n = self.r.len() - 1;
        (0..n)
            .rev()
            .take_while(|&j| !self.cell_cracked(j))
            .last()
            .unwrap_or(n)
    }

    /// Shape `r + (1 + ν) / (1 - ν) r_o² / r` of the traction-free Lamé field.
    fn free_shape(&self, r: f64) -> f64 {
        let nu = self.cyl.poisson_ratio;
        let r_o = self.cyl.r_o;
        r + (1.0 + nu) / (1.0 - nu) * r_o * r_o / r
    }

    /// `r σ_r = κ u` at node `m` for the traction-free elastic field outside it.
    fn tail_stiffness(&self, m: usize) -> f64 {
        let nu = self.cyl.poisson_ratio;
        let (r, r_o) = (self.r[m], self.cyl.r_o);
        -self.e_plane() * (1.0 + nu) * (r_o - r) * (r_o + r) / (r * self.free_shape(r))
    }

    /// Solve for nodal displacements with u[0] = u_c. Each node balances
    /// the tractions of its two cells; the elastic tail is condensed into
    /// its exact stiffness and filled in from the Lamé shape.
    fn solve(&self, u_c: f64) -> Vec<f64> {
        let n = self.r.len() - 1;
        let m = self.elastic_tail();
        let mut lower = vec![0.0; m + 1];
        let mut diag = vec![0.0; m + 1];
        let mut upper = vec![0.0; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for j in 1..=m {
            let from_left = self.traction(j - 1, true);
            lower[j] = -from_left.left;
            diag[j] = -from_left.right;
            rhs[j] = from_left.constant;
            if j < m {
                let from_right = self.traction(j, false);
                diag[j] += from_right.left;
                upper[j] = from_right.right;
                rhs[j] -= from_right.constant;
            } else if m < n {
                diag[j] += self.tail_stiffness(m);
            }
        }
        // eliminate from the outside inward: u[j] = alpha[j] u[j-1] + beta[j]
        let mut alpha = vec![0.0; m + 1];
        let mut beta = vec![0.0; m + 1];
        let mut u = vec![0.0; n + 1];
        u[0] = u_c;
        if m > 0 {
            alpha[m] = -lower[m] / diag[m];
            beta[m] = rhs[m] / diag[m];
            for j in (1..m).rev() {
                let d = diag[j] + upper[j] * alpha[j + 1];
                alpha[j] = -lower[j] / d;
                beta[j] = (rhs[j] - upper[j] * beta[j + 1]) / d;
            }
            for j in 1..=m {
                u[j] = alpha[j] * u[j - 1] + beta[j];
            }
        }
        let scale = u[m] / self.free_shape(self.r[m]);
        for (uj, &rj) in u.iter_mut().zip(&self.r).skip(m + 1) {
            *uj = scale * self.free_shape(rj);
        }
        u
    }

    /// Radial stress at node `j`, from the elastic neighbour cell when
    /// there is one.
    fn radial_stress(&self, u: &[f64], j: usize) -> f64 {
        let n = self.r.len() - 1;
        let right = (j < n).then(|| (self.traction(j, false).eval(u, j), self.cell_cracked(j)));
        let left = (j > 0).then(|| {
            (
                self.traction(j - 1, true).eval(u, j - 1),
                self.cell_cracked(j - 1),
            )
        });
        let t = match (left, right) {
            (_, Some((t, false))) | (Some((t, false)), _) => t,
            (Some((a, _)), Some((b, _))) => 0.5 * (a + b),
            (Some((t, _)), None) | (None, Some((t, _))) => t,
            (None, None) => 0.0,
        };
        t / self.r[j]
    }

    /// Hoop stress at node `j` if the material there were elastic.
    fn trial_hoop(&self, u: &[f64], j: usize) -> f64 {
        let n = self.r.len() - 1;
        let cells: Vec<usize> = [j.checked_sub(1), (j < n).then_some(j)]
            .into_iter()
            .flatten()
            .filter(|&c| !self.cell_cracked(c))
            .collect();
        if cells.is_empty() {
            let nu = self.cyl.poisson_ratio;
            return self.e_plane() * (1.0 - nu * nu) * u[j] / self.r[j]
                + nu * self.radial_stress(u, j);
        }
        cells
            .iter()
            .map(|&c| self.elastic_hoop(u, c, j))
            .sum::<f64>()
            / cells.len() as f64
    }

    fn cracking_strain(&self, u: &[f64], j: usize) -> f64 {
        let (e, nu, f_t) = (
            self.cyl.youngs_modulus,
            self.cyl.poisson_ratio,
            self.cyl.tensile_strength,
        );
        u[j] / self.r[j] - (f_t - nu * self.radial_stress(u, j)) / e
    }

    fn field(&self, u: Vec<f64>, front: f64) -> MechanicalField {
        let n = self.r.len();
        let mut f = MechanicalField {
            r: self.r.clone(),
            crack_front: front,
            ..Default::default()
        };
        for j in 0..n {
            f.sigma_r.push(self.radial_stress(&u, j));
            if self.zone[j].cracked() {
                f.sigma_theta.push(self.cyl.tensile_strength);
                f.eps_cr.push(self.cracking_strain(&u, j).max(0.0));
            } else {
                f.sigma_theta.push(self.trial_hoop(&u, j));
                f.eps_cr.push(0.0);
            }
        }
        f.u = u;
        f
    }
}

fn uniform_grid(cyl: &Cylinder, n: usize) -> Vec<f64> {
    let h = (cyl.r_o - cyl.r_i) / n as f64;
    (0..=n)
        .map(|j| {
            if j == n {
                cyl.r_o
            } else {
                cyl.r_i + j as f64 * h
            }
        })
        .collect()
}

/// Stage one: iterate the cracked node set to a fixed point.
fn cracked_set(
    cyl: &Cylinder,
    u_c: f64,
    opts: &FdOptions,
) -> Result<(Vec<Zone>, Vec<f64>), ModelError> {
    let n = opts.n;
    let mut disc = Discretisation {
        cyl,
        r: uniform_grid(cyl, n),
        zone: vec![Zone::Elastic; n + 1],
    };
    let mut history: Vec<Vec<Zone>> = Vec::new();
    let tol = 1e-12 * cyl.tensile_strength;
    for _ in 0..opts.max_sweeps {
        let u = disc.solve(u_c);
        let next: Vec<Zone> = (0..=n)
            .map(|j| {
                let cracked = if disc.zone[j].cracked() {
                    disc.cracking_strain(&u, j) >= -tol / cyl.youngs_modulus
                } else {
                    disc.trial_hoop(&u, j) > cyl.tensile_strength + tol
                };
                if cracked {
                    Zone::Cracked
                } else {
                    Zone::Elastic
                }
            })
            .collect();
        if next == disc.zone {
            return Ok((disc.zone, u));
        }
        if let Some(pos) = history.iter().position(|z| *z == next) {
            // a two-state flicker of a single boundary node still brackets
            // the front; anything else is a genuine cycle
            let flips = next.iter().zip(&disc.zone).filter(|(a, b)| a != b).count();
            if pos + 1 == history.len() && flips == 1 {
                let zone: Vec<Zone> = next
                    .iter()
                    .zip(&disc.zone)
                    .map(|(a, b)| {
                        if a.cracked() || b.cracked() {
                            Zone::Cracked
                        } else {
                            Zone::Elastic
                        }
                    })
                    .collect();
                disc.zone = zone;
                let u = disc.solve(u_c);
                return Ok((disc.zone, u));
            }
            return Err(ModelError::CrackedSetCycle {
                sweeps: history.len() + 1,
            });
        }
        history.push(disc.zone.clone());
        disc.zone = next;
    }
    Err(ModelError::CrackedSetCycle {
        sweeps: opts.max_sweeps,
    })
}

/// Stage two: discretisation with node `m` moved onto the front `r_f`.
fn fitted<'a>(cyl: &'a Cylinder, n: usize, m: usize, r_f: f64) -> Discretisation<'a> {
    let mut r = uniform_grid(cyl, n);
    r[m] = r_f;
    let zone = (0..=n)
        .map(|j| match j.cmp(&m) {
            std::cmp::Ordering::Less => Zone::Cracked,
            std::cmp::Ordering::Equal => Zone::Front,
            std::cmp::Ordering::Greater => Zone::Elastic,
        })
        .collect();
    Discretisation { cyl, r, zone }
}

/// Mismatch between the elastic hoop stress just outside the front and
/// the tensile strength.
fn front_mismatch(cyl: &Cylinder, n: usize, m: usize, r_f: f64, u_c: f64) -> f64 {
    let disc = fitted(cyl, n, m, r_f);
    let u = disc.solve(u_c);
    disc.elastic_hoop(&u, m, m) - cyl.tensile_strength
}

fn finish(
    cyl: &Cylinder,
    disc: &Discretisation,
    u: Vec<f64>,
    front: f64,
    saturated: bool,
) -> (PressureDisplacementPoint, MechanicalField) {
    let p = disc.inner_pressure(&u);
    let field = disc.field(u, front);
    let point = PressureDisplacementPoint {
        u_c: field.u[0],
        p,
        p_n: cyl.normalized_pressure(p).min(1.0),
        r_c: front,
        saturated,
    };
    (point, field)
}

/// Finite-difference counterpart of
/// [`Cylinder::pressure_from_displacement`], returning the full field.
pub fn fd_bvp_verify(
    cyl: &Cylinder,
    u_c: f64,
    opts: FdOptions,
) -> Result<(PressureDisplacementPoint, MechanicalField), ModelError> {
    if !(u_c >= 0.0) {
        return Err(ModelError::OutOfDomain {
            what: "u_c",
            detail: format!("{u_c:e} m is negative"),
        });
    }
    if opts.n < 100 {
        return Err(ModelError::OutOfDomain {
            what: "grid size",
            detail: format!("{} intervals; at least 100 required", opts.n),
        });
    }
    let n = opts.n;
    let (zone, u) = cracked_set(cyl, u_c, &opts)?;
    let stage_one = Discretisation {
        cyl,
        r: uniform_grid(cyl, n),
        zone: zone.clone(),
    };
    let cracked = zone.iter().filter(|z| z.cracked()).count();
    if cracked == 0 {
        return Ok(finish(cyl, &stage_one, u, cyl.r_i, false));
    }
    if cracked == n + 1 {
        return Ok(finish(cyl, &stage_one, u, cyl.r_o, true));
    }
    let last = zone.iter().rposition(|z| z.cracked()).unwrap_or(0);
    let h = (cyl.r_o - cyl.r_i) / n as f64;
    let base = uniform_grid(cyl, n);
    // search the cells around the stage-one front, nearest candidates first
    let mut candidates: Vec<usize> = (last.saturating_sub(2)..=(last + 3).min(n)).collect();
    candidates.sort_by_key(|&m| (m as i64 - last as i64).abs());
    let mut best: Option<(f64, usize, f64)> = None;
    for m in candidates {
        if m + 2 > n {
            continue;
        }
        let lo = if m == 0 { cyl.r_i } else { base[m] - 0.5 * h };
        let hi = base[m] + 0.5 * h;
        let f_lo = front_mismatch(cyl, n, m, lo, u_c);
        let f_hi = front_mismatch(cyl, n, m, hi, u_c);
        for (x, fx) in [(lo, f_lo), (hi, f_hi)] {
            if best.is_none_or(|b| fx.abs() < b.0) {
                best = Some((fx.abs(), m, x));
            }
        }
        if f_lo.signum() != f_hi.signum() {
            let root = find_root(
                "finite-difference crack front",
                |r_f| Ok(front_mismatch(cyl, n, m, r_f, u_c)),
                lo,
                hi,
                f_lo,
                f_hi,
                RootOptions {
                    x_tol: 1e-14,
                    f_tol: 0.0,
                    max_iter: 200,
                },
            )?;
            let disc = fitted(cyl, n, m, root.x);
            let u = disc.solve(u_c);
            return Ok(finish(cyl, &disc, u, root.x, false));
        }
    }
    match best {
        // front within the last two cells: the wall is effectively through-cracked
        Some((_, m, _)) if m + 3 > n => Ok(finish(cyl, &stage_one, u, cyl.r_o, true)),
        Some((_, m, r_f)) if m > 0 => {
            let disc = fitted(cyl, n, m, r_f);
            let u = disc.solve(u_c);
            Ok(finish(cyl, &disc, u, r_f, false))
        }
        _ => Ok(finish(cyl, &stage_one, u, base[last], false)),
    }
}
