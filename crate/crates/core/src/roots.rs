//! Bracketed root finding and one-dimensional minimisation.

use crate::error::ModelError;

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute tolerance on the bracket width.
    pub x_tol: f64,
    /// Absolute tolerance on |f|.
    pub f_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Find a sign change of `f` on `[lo, hi]`.
///
/// Regula falsi with the Illinois modification, falling back to bisection
/// whenever a step fails to halve the bracket. `f_lo`/`f_hi` are the
/// already known end values. Errors from `f` are propagated unchanged.
pub fn find_root<F>(
    what: &'static str,
    mut f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    opts: RootOptions,
) -> Result<Root, ModelError>
where
    F: FnMut(f64) -> Result<f64, ModelError>,
{
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
        });
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(ModelError::NotBracketed {
            what,
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }
    let (mut a, mut fa, mut b, mut fb) = (lo, f_lo, hi, f_hi);
    let mut side = 0i8;
    let mut bisect = false;
    let mut best = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for it in 1..=opts.max_iter {
        let width = (b - a).abs();
        let mut x = if bisect {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        let (left, right) = (a.min(b), a.max(b));
        if !(x > left && x < right) {
            x = 0.5 * (a + b);
            if !(x > left && x < right) {
                // bracket below floating-point resolution
                return Ok(Root {
                    x: best.0,
                    fx: best.1,
                    iterations: it,
                });
            }
        }
        let fx = f(x)?;
        if fx.is_nan() {
            return Err(ModelError::OutOfDomain {
                what,
                detail: format!("function returned NaN at {x:e}"),
            });
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok(Root {
                x,
                fx,
                iterations: it,
            });
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        let new_width = (b - a).abs();
        if new_width <= opts.x_tol {
            return Ok(Root {
                x: best.0,
                fx: best.1,
                iterations: it,
            });
        }
        bisect = !bisect && new_width > 0.5 * width;
    }
    Err(ModelError::NoConvergence {
        what,
        iterations: opts.max_iter,
        lo: a.min(b),
        hi: a.max(b),
    })
}

/// One evaluated point of a minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `x_tol`. Every evaluation is
/// appended to `trace`.
pub fn golden_section<F, E>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
    max_iter: usize,
    trace: &mut Vec<Probe>,
) -> Result<Probe, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    trace.push(Probe { x: c, value: fc });
    let mut fd = f(d)?;
    trace.push(Probe { x: d, value: fd });
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
            trace.push(Probe { x: c, value: fc });
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
            trace.push(Probe { x: d, value: fd });
        }
    }
    Ok(if fc <= fd {
        Probe { x: c, value: fc }
    } else {
        Probe { x: d, value: fd }
    })
}
