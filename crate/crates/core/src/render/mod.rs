//! Images on the film and the measurements taken from them.

mod outline;
mod raster;

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{retarded_emission, Event, Motion, ParticleRef, SpatialPoint, Worldline};
use crate::optics::{project, rail_image_residual, unproject, FilmPoint};
use crate::regions::RegionAnalysis;
use crate::scenes::Scene;

pub use outline::{convex_hull, fit_circle, Circle};
pub use raster::{rasterize, Raster, Window, COUPLE_INTENSITY, SINGLE_INTENSITY};

/// One photographed particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePoint {
    pub particle: ParticleRef,
    pub emission: Event,
    pub film: FilmPoint,
}

/// The printed image: every particle imaged from its retarded emission.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryImage {
    pub points: Vec<ImagePoint>,
    /// Particles whose emission point was not in front of the pinhole.
    pub behind_pinhole: usize,
}

/// The part of a history image emitted within `half_width` of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetardedImage {
    pub t: f64,
    pub half_width: f64,
    pub points: Vec<ImagePoint>,
}

pub fn history_image(scene: &Scene) -> Result<HistoryImage> {
    history_image_with(scene, &RegionAnalysis::compute(scene)?)
}

/// Like [`history_image`] with provenance taken from an existing analysis.
pub fn history_image_with(scene: &Scene, analysis: &RegionAnalysis) -> Result<HistoryImage> {
    let film = scene.film();
    let mut points = Vec::with_capacity(analysis.emissions.len());
    let mut behind_pinhole = 0;
    for e in &analysis.emissions {
        match project(e.event.pos, film) {
            Ok(mut fp) => {
                fp.t_emit = Some(e.event.t);
                fp.provenance = e.provenance;
                fp.sources = vec![e.particle];
                points.push(ImagePoint {
                    particle: e.particle,
                    emission: e.event,
                    film: fp,
                });
            }
            Err(Error::BehindPinhole { .. }) => behind_pinhole += 1,
            Err(other) => return Err(other),
        }
    }
    if behind_pinhole > 0 {
        log::warn!("{behind_pinhole} particles emit from behind the pinhole and are not imaged");
    }
    Ok(HistoryImage {
        points,
        behind_pinhole,
    })
}

impl HistoryImage {
    /// The retarded image at `t`; `t` must lie in `I_F`.
    pub fn retarded(&self, analysis: &RegionAnalysis, t: f64, half_width: f64) -> Result<RetardedImage> {
        let i = analysis.interval;
        if !i.contains(t, analysis.tolerances.eps_time) {
            return Err(Error::TimeOutsideInterval {
                t,
                t_l: i.t_l,
                t_u: i.t_u,
            });
        }
        if !(half_width > 0.0) {
            return Err(Error::BadTolerance(format!("half-width must be positive, got {half_width}")));
        }
        let points = self
            .points
            .iter()
            .filter(|p| (p.emission.t - t).abs() <= half_width)
            .cloned()
            .collect();
        Ok(RetardedImage {
            t,
            half_width,
            points,
        })
    }

    pub fn film_points(&self) -> Vec<FilmPoint> {
        self.points.iter().map(|p| p.film.clone()).collect()
    }

    /// The point dump, one row per imaged particle.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "object_id,particle_id,t_emit,x,y,z,U,V,provenance")?;
        for p in &self.points {
            let e = &p.emission;
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                p.particle.object_id,
                p.particle.particle_id,
                e.t,
                e.pos.x,
                e.pos.y,
                e.pos.z,
                p.film.u,
                p.film.v,
                p.film.provenance.as_str()
            )?;
        }
        Ok(())
    }
}

pub fn retarded_image(scene: &Scene, t: f64, half_width: f64) -> Result<RetardedImage> {
    let analysis = RegionAnalysis::compute(scene)?;
    history_image_with(scene, &analysis)?.retarded(&analysis, t, half_width)
}

/// `(particle, t_emit, emission point, |residual|)` for every particle of a
/// rail-bound object; empty when the scene has none. The residual is
/// infinite when the image cannot be mapped back onto the rail domain.
pub fn rail_residuals(scene: &Scene) -> Result<Vec<(ParticleRef, f64, SpatialPoint, f64)>> {
    let bound: Vec<&Worldline> = scene
        .objects()
        .iter()
        .filter(|o| o.is_rail_bound())
        .flat_map(|o| o.particles())
        .collect();
    if bound.is_empty() {
        return Ok(Vec::new());
    }
    let track = scene.rail().ok_or(Error::NoRail)?;
    let film = scene.film();
    let tol = scene.tolerances().tol_root;
    bound
        .par_iter()
        .map(|w| {
            let e = retarded_emission(w, film.c, tol)?;
            let residual = project(e.pos, film)
                .and_then(|fp| rail_image_residual(&fp, track.curve(), film))
                .map(f64::abs)
                .unwrap_or(f64::INFINITY);
            Ok((w.particle(), e.t, e.pos, residual))
        })
        .collect()
}

/// Largest rail-image residual over the rail-bound particles.
pub fn train_on_rails_residual(scene: &Scene) -> Result<f64> {
    let r = rail_residuals(scene)?;
    if r.is_empty() {
        return Err(Error::NoRail);
    }
    Ok(r.iter().map(|x| x.3).fold(0.0, f64::max))
}

fn uniform_parts(w: &Worldline) -> Option<(SpatialPoint, SpatialPoint)> {
    Some((w.uniform_origin()?, w.uniform_velocity()?))
}

/// The common velocity of an object's particles when all move uniformly
/// along x.
fn common_x_velocity(particles: &[Worldline], what: &str) -> Result<f64> {
    let mut v = None;
    for w in particles {
        let (_, vel) = uniform_parts(w)
            .ok_or_else(|| Error::NotABoxScene(format!("{what}: {} is not uniform", w.particle())))?;
        if vel.y != 0.0 || vel.z != 0.0 {
            return Err(Error::NotABoxScene(format!("{what}: motion is not along x")));
        }
        match v {
            None => v = Some(vel.x),
            Some(x) if x != vel.x => {
                return Err(Error::NotABoxScene(format!("{what}: particles move at different speeds")))
            }
            _ => {}
        }
    }
    v.ok_or_else(|| Error::NotABoxScene(format!("{what}: no particles")))
}

/// Rod midpoints `(depth y, midpoint at t = 0)` of object 1, nearest first.
fn rods(scene: &Scene) -> Result<(f64, Vec<(f64, SpatialPoint)>)> {
    let particles = scene.objects()[0].particles();
    let vx = common_x_velocity(particles, "rods")?;
    let mut groups: Vec<(f64, f64, Vec<SpatialPoint>)> = Vec::new();
    for w in particles {
        let (r0, _) = uniform_parts(w).expect("checked uniform");
        match groups.iter_mut().find(|g| g.0 == r0.y && g.1 == r0.z) {
            Some(g) => g.2.push(r0),
            None => groups.push((r0.y, r0.z, vec![r0])),
        }
    }
    if groups.len() < 2 || groups.iter().any(|g| g.2.len() < 2) {
        return Err(Error::NotABoxScene(
            "object 1 must consist of at least two longitudinal rods".into(),
        ));
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mids = groups
        .into_iter()
        .map(|(y, _, pts)| {
            let n = pts.len() as f64;
            let sum = pts.into_iter().fold(SpatialPoint::ORIGIN, |acc, p| acc + p);
            (y, sum * (1.0 / n))
        })
        .collect();
    Ok((vx, mids))
}

/// For each longitudinal rod of object 1, the film displacement of its
/// midpoint's retarded image from the geometric image of the midpoint at
/// `t = 0`, positive in the direction of motion. Sorted by depth.
pub fn measure_section_displacements(scene: &Scene) -> Result<Vec<(f64, f64)>> {
    let (vx, mids) = rods(scene)?;
    let film = scene.film();
    let sign = if vx < 0.0 { -1.0 } else { 1.0 };
    let velocity = SpatialPoint::new(vx, 0.0, 0.0);
    mids.into_iter()
        .map(|(y, mid)| {
            let w = Worldline::new(
                ParticleRef::new(1, u32::MAX),
                scene.t_min(),
                Motion::Uniform { r0: mid, velocity },
                film.c,
            )?;
            let seen = crate::optics::retarded_film_point(&w, film, scene.tolerances().tol_root)?;
            let still = project(mid, film)?;
            Ok((y, sign * (seen.u - still.u)))
        })
        .collect()
}

/// Signed angle, counterclockwise positive viewed from +z, between the
/// apparent (unprojected) transverse section of object 2 and its rest
/// orientation.
pub fn apparent_rotation_angle(scene: &Scene) -> Result<f64> {
    let section = scene.objects()[1].particles();
    common_x_velocity(section, "section")?;
    if section.len() < 2 {
        return Err(Error::DegenerateSection("the section needs two particles".into()));
    }
    let film = scene.film();
    let by_depth = |w: &&Worldline| uniform_parts(w).expect("checked uniform").0;
    let near = section
        .iter()
        .min_by(|a, b| by_depth(a).y.total_cmp(&by_depth(b).y))
        .expect("non-empty");
    let far = section
        .iter()
        .max_by(|a, b| by_depth(a).y.total_cmp(&by_depth(b).y))
        .expect("non-empty");
    let (p0, p1) = (by_depth(&near), by_depth(&far));
    let plane = film.rail_plane_height;
    if p0.z != plane || p1.z != plane {
        return Err(Error::NotABoxScene("the section must lie in the rail plane".into()));
    }
    let rest = (p1.x - p0.x, p1.y - p0.y);
    if rest.0.hypot(rest.1) == 0.0 {
        return Err(Error::DegenerateSection("section endpoints coincide".into()));
    }
    let tol = scene.tolerances().tol_root;
    let apparent = |w: &Worldline| -> Result<(f64, f64)> {
        unproject(&crate::optics::retarded_film_point(w, film, tol)?, film)
    };
    let (a0, a1) = (apparent(near)?, apparent(far)?);
    let seen = (a1.0 - a0.0, a1.1 - a0.1);
    if seen.0.hypot(seen.1) == 0.0 {
        return Err(Error::DegenerateSection("apparent endpoints coincide".into()));
    }
    let cross = rest.0 * seen.1 - rest.1 * seen.0;
    let dot = rest.0 * seen.0 + rest.1 * seen.1;
    Ok(cross.atan2(dot))
}

/// Ratio of the largest radial deviation of the image outline (its convex
/// hull) from the best-fit circle to that circle's radius.
pub fn outline_circularity(image: &HistoryImage) -> Result<(Circle, f64)> {
    let pts: Vec<(f64, f64)> = image.points.iter().map(|p| (p.film.u, p.film.v)).collect();
    let hull = convex_hull(&pts);
    let circle = fit_circle(&hull)?;
    let worst = hull
        .iter()
        .map(|&(u, v)| ((u - circle.cu).hypot(v - circle.cv) - circle.r).abs())
        .fold(0.0, f64::max);
    Ok((circle, worst / circle.r))
}
