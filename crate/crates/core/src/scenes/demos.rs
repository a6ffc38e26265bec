//! Built-in scenes.

use crate::error::{Error, Result};
use crate::kinematics::{Event, Motion, ParticleRef, SpatialPoint, Worldline};
use crate::numeric::uniform_grid;
use crate::optics::FilmConfig;

use super::{build_rail_train, rail_track, Expr, ObjectSpec, Scene, Tolerances, DEFAULT_TIME_GRID_N};

pub const DEMO_NAMES: [&str; 6] = ["train", "sphere", "needle", "permanent", "semi_permanent", "box"];

pub fn demo_scene(name: &str) -> Result<Scene> {
    match name {
        "train" => train(),
        "sphere" => sphere(),
        "needle" => needle(),
        "permanent" => permanent(),
        "semi_permanent" => semi_permanent(),
        "box" => box_scene(0.9),
        other => Err(Error::UnknownDemo(other.to_string())),
    }
}

fn film() -> FilmConfig {
    FilmConfig::new(1.0, -1.0, 1.0).expect("valid film")
}

fn point(object_id: u8, particle_id: u32, t_min: f64, p: SpatialPoint) -> Result<Worldline> {
    Worldline::new(
        ParticleRef::new(object_id, particle_id),
        t_min,
        Motion::Static { position: p },
        1.0,
    )
}

fn uniform(
    object_id: u8,
    particle_id: u32,
    t_min: f64,
    r0: SpatialPoint,
    velocity: SpatialPoint,
) -> Result<Worldline> {
    Worldline::new(
        ParticleRef::new(object_id, particle_id),
        t_min,
        Motion::Uniform { r0, velocity },
        1.0,
    )
}

fn assemble(first: ObjectSpec, second: ObjectSpec, rail: Option<std::sync::Arc<crate::kinematics::RailTrack>>, t_min: f64) -> Result<Scene> {
    Scene::new(
        [first, second],
        film(),
        rail,
        t_min,
        Tolerances::default(),
        DEFAULT_TIME_GRID_N,
        0,
    )
}

/// A 200-particle train edge on the rail `y = 2 + 0.3 sin x` driven by
/// `β(t) = 0.5 + 0.4 sin(0.1 t)`.
fn train() -> Result<Scene> {
    let t_min = -40.0;
    let film = film();
    let track = rail_track(Expr::parse("2 + 0.3*sin(x)", "x")?, (-25.0, 10.0), &film)?;
    let beta = Expr::parse("0.5 + 0.4*sin(0.1*t)", "t")?;
    let train = build_rail_train(1, &track, beta, 200, 0.02, 11.5, t_min, film.c)?;
    let anchor = ObjectSpec::new(2, vec![point(2, 0, t_min, SpatialPoint::new(0.0, 10.0, 5.0))?])?;
    assemble(train, anchor, Some(track), t_min)
}

/// Unit vectors of a Fibonacci lattice on the sphere.
fn fibonacci_sphere(n: usize) -> Vec<SpatialPoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            SpatialPoint::new(r * c, r * s, z)
        })
        .collect()
}

/// A sphere of rest radius 0.1 moving at 0.8c along x whose center passes
/// (0, 20, 0) at the instant its light leaves for the camera. In the lab
/// frame it is contracted along x by 1/γ.
fn sphere() -> Result<Scene> {
    let t_min = -40.0;
    let radius = 0.1;
    let velocity = SpatialPoint::new(0.8, 0.0, 0.0);
    let center = SpatialPoint::new(0.0, 20.0, 0.0);
    // Center position at t = 0, given that it sits at `center` at t = -|center|/c.
    let center_now = center + velocity * center.norm();
    let inv_gamma = (1.0 - velocity.norm_squared()).sqrt();
    let particles = fibonacci_sphere(2000)
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let offset = SpatialPoint::new(n.x * inv_gamma, n.y, n.z) * radius;
            uniform(1, i as u32, t_min, center_now + offset, velocity)
        })
        .collect::<Result<Vec<_>>>()?;
    let anchor = ObjectSpec::new(2, vec![point(2, 0, t_min, SpatialPoint::new(0.0, 30.0, 0.0))?])?;
    assemble(ObjectSpec::new(1, particles)?, anchor, None, t_min)
}

/// A static point P at distance 2.5 photographed at t = -2.5, touched by a
/// moving particle at t = -1.
fn needle() -> Result<Scene> {
    let t_min = -10.0;
    let p = SpatialPoint::new(0.0, 2.5, 0.0);
    let sheet = ObjectSpec::new(
        1,
        vec![
            point(1, 0, t_min, p)?,
            point(1, 1, t_min, SpatialPoint::new(0.3, 0.4, 0.0))?,
            point(1, 2, t_min, SpatialPoint::new(1.8, 2.4, 0.0))?,
        ],
    )?;
    let velocity = SpatialPoint::new(0.5, 0.0, 0.0);
    let needle = ObjectSpec::new(2, vec![uniform(2, 0, t_min, p + velocity, velocity)?])?;
    assemble(sheet, needle, None, t_min)
}

fn permanent_anchors(t_min: f64) -> Result<[Worldline; 2]> {
    Ok([
        point(1, 1, t_min, SpatialPoint::new(0.9, 1.2, 0.0))?,
        point(1, 2, t_min, SpatialPoint::new(1.8, 2.4, 0.0))?,
    ])
}

/// Two coincident static points at P = (0, 2, 0).
fn permanent() -> Result<Scene> {
    let t_min = -10.0;
    let p = SpatialPoint::new(0.0, 2.0, 0.0);
    let [a, b] = permanent_anchors(t_min)?;
    let first = ObjectSpec::new(1, vec![point(1, 0, t_min, p)?, a, b])?;
    let second = ObjectSpec::new(2, vec![point(2, 0, t_min, p)?])?;
    assemble(first, second, None, t_min)
}

/// Center and half-width of the separating bump, seconds. Its support is a
/// little wider than the contact-free window (-2.2, -1.8).
const BUMP_CENTER: f64 = -2.0;
const BUMP_HALF_WIDTH: f64 = 0.25;
const BUMP_SAMPLES: usize = 1001;

/// Smooth compactly supported bump with peak 1 at the center.
fn bump(t: f64) -> f64 {
    let u = (t - BUMP_CENTER) / BUMP_HALF_WIDTH;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

fn bumping_point(object_id: u8, t_min: f64, p: SpatialPoint, offset: SpatialPoint) -> Result<Worldline> {
    let mut samples = vec![Event::new(t_min, p)];
    for t in uniform_grid(BUMP_CENTER - BUMP_HALF_WIDTH, BUMP_CENTER + BUMP_HALF_WIDTH, BUMP_SAMPLES) {
        samples.push(Event::new(t, p + offset * bump(t)));
    }
    samples.push(Event::new(0.0, p));
    Worldline::new(ParticleRef::new(object_id, 0), t_min, Motion::Sampled(samples), 1.0)
}

/// Like `permanent`, but the two P-particles swerve apart in opposite
/// directions (amplitude 10·eps_contact) around t = -2, exactly when light
/// from P would have to leave to be photographed.
fn semi_permanent() -> Result<Scene> {
    let t_min = -10.0;
    let amplitude = 10.0 * Tolerances::default().eps_contact;
    let p = SpatialPoint::new(0.0, 2.0, 0.0);
    let offset = SpatialPoint::new(amplitude, 0.0, 0.0);
    let [a, b] = permanent_anchors(t_min)?;
    let first = ObjectSpec::new(1, vec![bumping_point(1, t_min, p, offset)?, a, b])?;
    let second = ObjectSpec::new(2, vec![bumping_point(2, t_min, p, -offset)?])?;
    assemble(first, second, None, t_min)
}

/// Two longitudinal rods (object 1) at depths y = 4 and y = 6 joined by a
/// transverse connector (object 2) along y at x = 0, all in the rail plane
/// z = -1 and moving at `vx` along x. Positions are given at t = 0.
pub fn box_scene(vx: f64) -> Result<Scene> {
    let t_min = -40.0;
    let c_plane = film().rail_plane_height;
    let velocity = SpatialPoint::new(vx, 0.0, 0.0);
    let mut rods = Vec::with_capacity(100);
    for (r, depth) in [4.0, 6.0].into_iter().enumerate() {
        for (k, x) in uniform_grid(-1.0, 1.0, 50).into_iter().enumerate() {
            let id = (r * 50 + k) as u32;
            rods.push(uniform(1, id, t_min, SpatialPoint::new(x, depth, c_plane), velocity)?);
        }
    }
    let connector = uniform_grid(4.0, 6.0, 50)
        .into_iter()
        .enumerate()
        .map(|(k, y)| uniform(2, k as u32, t_min, SpatialPoint::new(0.0, y, c_plane), velocity))
        .collect::<Result<Vec<_>>>()?;
    assemble(ObjectSpec::new(1, rods)?, ObjectSpec::new(2, connector)?, None, t_min)
}
