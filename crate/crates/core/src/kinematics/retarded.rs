use crate::error::{Error, Result};
use crate::numeric::uniform_grid;

use super::{Event, SpatialPoint, Worldline};

/// Required residual `| |r(t*)| + c t* |` of the retarded root, light-seconds.
pub const DEFAULT_TOL_ROOT: f64 = 1e-12;

/// Grid used to localize the sign change of the light-cone function.
const LOCALIZE_SAMPLES: usize = 65;

/// Finds the emission event on `w` whose light reaches the pinhole at `t = 0`.
///
/// The light-cone function `f(t) = |r(t)| + c t` is strictly increasing for
/// subluminal motion, so the root is unique. The sign change is localized on
/// a uniform grid and then bisected to full double precision.
pub fn retarded_emission(w: &Worldline, c: f64, tol_root: f64) -> Result<Event> {
    let f = |t: f64| w.eval(t).norm() + c * t;
    let t_min = w.t_min();
    let f_min = f(t_min);
    if !f_min.is_finite() {
        return Err(Error::NonFinite {
            context: format!("light-cone function of {}", w.particle()),
        });
    }
    if f_min > 0.0 {
        return Err(Error::NoEmissionInWindow {
            particle: w.particle(),
            t_min,
        });
    }

    // Last grid cell whose left end is non-positive brackets the root.
    let grid = uniform_grid(t_min, 0.0, LOCALIZE_SAMPLES);
    let mut lo = t_min;
    let mut hi = 0.0;
    for pair in grid.windows(2) {
        let value = f(pair[1]);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: format!("light-cone function of {}", w.particle()),
            });
        }
        if value > 0.0 {
            lo = pair[0];
            hi = pair[1];
            break;
        }
        lo = pair[1];
    }
    if lo == 0.0 {
        return Ok(Event::new(0.0, w.eval(0.0)));
    }

    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    let residual = f(t).abs();
    if residual > tol_root {
        return Err(Error::NoConvergence(format!(
            "retarded root of {} has residual {residual:e}",
            w.particle()
        )));
    }
    Ok(Event::new(t, w.eval(t)))
}

/// Closed-form retarded emission for `r(t) = r0 + v t`.
///
/// Solves `|r0 + v t|² = c² t²` and returns the non-positive root, using the
/// cancellation-free form of the quadratic formula.
pub fn retarded_emission_uniform_closed_form(
    r0: SpatialPoint,
    v: SpatialPoint,
    c: f64,
) -> Result<Event> {
    let a = v.norm_squared() - c * c;
    let b = 2.0 * r0.dot(v);
    let k = r0.norm_squared();
    if k == 0.0 {
        return Ok(Event::new(0.0, r0));
    }
    if a == 0.0 {
        // Luminal limit: linear equation b t + k = 0.
        if b == 0.0 {
            return Err(Error::NoRealRoot);
        }
        let t = -k / b;
        return if t <= 0.0 {
            Ok(Event::new(t, r0 + v * t))
        } else {
            Err(Error::NoRealRoot)
        };
    }
    let disc = b * b - 4.0 * a * k;
    if disc < 0.0 {
        return Err(Error::NoRealRoot);
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = [q / a, if q != 0.0 { k / q } else { q / a }];
    roots.sort_by(f64::total_cmp);
    let t = roots
        .iter()
        .rev()
        .copied()
        .find(|t| *t <= 0.0)
        .ok_or(Error::NoRealRoot)?;
    Ok(Event::new(t, r0 + v * t))
}
