//! Detection of contacts between single points of the two objects.

use rayon::prelude::*;
use crate::kinematics::{ParticleRef, SpatialPoint, Worldline};
use crate::numeric::{golden_section_min, uniform_grid};
use crate::scenes::Scene;

use super::{retarded_emissions, PhotographicInterval};

/// Two single points, one from each object, within `eps_contact` of each
/// other at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent {
    pub t: f64,
    /// Midpoint of the two positions.
    pub locus: SpatialPoint,
    /// The object-1 member.
    pub first: ParticleRef,
    /// The object-2 member.
    pub second: ParticleRef,
    pub distance: f64,
}

impl ContactEvent {
    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.first.cmp(&other.first))
            .then(self.second.cmp(&other.second))
    }
}

/// The sample times of the contact scan: a uniform grid over the whole
/// window, a uniform grid over the photographic interval and every given
/// emission time, merged and sorted.
pub fn contact_grid(scene: &Scene, interval: Option<PhotographicInterval>, emission_times: &[f64]) -> Vec<f64> {
    let n = scene.time_grid_n();
    let mut grid = uniform_grid(scene.t_min(), 0.0, n);
    if let Some(i) = interval {
        grid.extend(uniform_grid(i.t_l, i.t_u, n));
    }
    grid.extend(emission_times.iter().copied().filter(|t| *t >= scene.t_min() && *t <= 0.0));
    grid.sort_by(f64::total_cmp);
    let merge = 0.25 * scene.tolerances().eps_time;
    let mut out: Vec<f64> = Vec::with_capacity(grid.len());
    for t in grid {
        match out.last() {
            Some(&last) if t - last <= merge => {}
            _ => out.push(t),
        }
    }
    out
}

/// All contact events of `scene`, sorted by time then by pair.
///
/// The scan grid is built from the retarded emissions that exist; particles
/// without one contribute no grid time but are still scanned.
pub fn find_contacts(scene: &Scene) -> Vec<ContactEvent> {
    let emissions = retarded_emissions(scene);
    let ok: Vec<_> = emissions.iter().filter_map(|(_, e)| e.as_ref().ok()).collect();
    let times: Vec<f64> = ok.iter().map(|e| e.t).collect();
    let interval = PhotographicInterval::from_times(&times);
    contacts_on_grid(scene, &contact_grid(scene, interval, &times))
}

/// Upper bound on `|d/dt (r1 − r2)|`.
fn relative_speed_bound(a: &Worldline, b: &Worldline) -> f64 {
    match (a.uniform_velocity(), b.uniform_velocity()) {
        (Some(va), Some(vb)) => (va - vb).norm(),
        _ => a.max_speed() + b.max_speed(),
    }
}

pub(crate) fn contacts_on_grid(scene: &Scene, grid: &[f64]) -> Vec<ContactEvent> {
    let [o1, o2] = scene.objects();
    let tol = *scene.tolerances();
    let max_step = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let track = |w: &Worldline| grid.iter().map(|&t| w.eval(t)).collect::<Vec<_>>();

    // Cache positions of the smaller object; stream the larger one.
    let swap = o1.particles().len() < o2.particles().len();
    let (outer, inner) = if swap { (o2, o1) } else { (o1, o2) };
    let inner = inner.particles();
    let cached: Vec<Vec<SpatialPoint>> = inner.par_iter().map(track).collect();

    let per_outer: Vec<Vec<ContactEvent>> = outer
        .particles()
        .par_iter()
        .map(|wo| {
            let path = track(wo);
            let mut found = Vec::new();
            for (wi, ipath) in inner.iter().zip(&cached) {
                let (w1, w2, p1, p2) = if swap { (wi, wo, ipath, &path) } else { (wo, wi, &path, ipath) };
                scan_pair(w1, w2, p1, p2, grid, max_step, &tol, &mut found);
            }
            found
        })
        .collect();

    let mut all: Vec<ContactEvent> = per_outer.into_iter().flatten().collect();
    all.sort_by(|a, b| a.canonical_cmp(b));
    all
}

#[allow(clippy::too_many_arguments)]
fn scan_pair(
    w1: &Worldline,
    w2: &Worldline,
    p1: &[SpatialPoint],
    p2: &[SpatialPoint],
    grid: &[f64],
    max_step: f64,
    tol: &crate::scenes::Tolerances,
    out: &mut Vec<ContactEvent>,
) {
    let n = grid.len();
    let d: Vec<f64> = p1.iter().zip(p2).map(|(a, b)| a.distance(*b)).collect();
    let v_rel = relative_speed_bound(w1, w2);
    let (first, second) = (w1.particle(), w2.particle());
    let mut events = Vec::new();

    for i in 0..n {
        if d[i] <= tol.eps_contact {
            events.push(ContactEvent {
                t: grid[i],
                locus: p1[i].midpoint(p2[i]),
                first,
                second,
                distance: d[i],
            });
        }
        if d[i] - v_rel * max_step > tol.eps_contact {
            continue;
        }
        let left = if i > 0 { d[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { d[i + 1] } else { f64::INFINITY };
        let strict = d[i] <= left && d[i] <= right && (d[i] < left || d[i] < right);
        if !strict {
            continue;
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(n - 1)];
        let dist = |t: f64| w1.eval(t).distance(w2.eval(t));
        let (t, dmin) = golden_section_min(dist, a, b, 0.25 * tol.eps_time);
        if dmin <= tol.eps_contact {
            events.push(ContactEvent {
                t,
                locus: w1.eval(t).midpoint(w2.eval(t)),
                first,
                second,
                distance: dmin,
            });
        }
    }

    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut kept: Vec<ContactEvent> = Vec::with_capacity(events.len());
    for e in events {
        let duplicate = kept.iter().rev().take_while(|k| e.t - k.t <= tol.eps_time).any(|k| {
            k.locus.distance(e.locus) <= tol.eps_set
        });
        if !duplicate {
            kept.push(e);
        }
    }
    out.extend(kept);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::demo_scene;

    #[test]
    fn needle_touches_once_at_minus_one() {
        let scene = demo_scene("needle").unwrap();
        let contacts = find_contacts(&scene);
        assert!(!contacts.is_empty());
        for c in &contacts {
            assert!((c.t + 1.0).abs() < 2e-6, "{}", c.t);
            assert!(c.locus.distance(SpatialPoint::new(0.0, 2.5, 0.0)) < 1e-6);
        }
        assert!(contacts.iter().any(|c| (c.t + 1.0).abs() <= 1e-9));
    }

    #[test]
    fn permanent_contact_spans_the_window() {
        let scene = demo_scene("permanent").unwrap();
        let contacts = find_contacts(&scene);
        let lo = contacts.iter().map(|c| c.t).fold(f64::INFINITY, f64::min);
        let hi = contacts.iter().map(|c| c.t).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((lo, hi), (-10.0, 0.0));
        assert!(contacts.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn grid_contains_both_uniform_grids() {
        let scene = demo_scene("needle").unwrap();
        let i = PhotographicInterval { t_l: -3.0, t_u: -0.5 };
        let grid = contact_grid(&scene, Some(i), &[-2.5]);
        for t in uniform_grid(-3.0, -0.5, scene.time_grid_n()) {
            assert!(grid.iter().any(|g| (g - t).abs() <= 1e-9));
        }
        assert!(grid.contains(&-2.5));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
