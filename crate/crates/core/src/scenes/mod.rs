//! Scene model: two particle-sampled objects, a pinhole camera and the
//! numerical tolerances of the region computations.

mod demos;
mod expr;
mod file;
mod random;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kinematics::{
    Motion, ParticleRef, RailMotion, RailTrack, SpeedProfile, Worldline, DEFAULT_TOL_ROOT,
    DEFAULT_V_MAX_FRACTION,
};
use crate::optics::{FilmConfig, RailCurve};

pub use demos::{box_scene, demo_scene, DEMO_NAMES};
pub use expr::{BinaryOp, Expr, Func, Node};
pub use file::{parse_scene, scene_to_json, SCENE_VERSION};
pub use random::random_scene;

pub const DEFAULT_TIME_GRID_N: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual of the retarded root, light-seconds.
    pub tol_root: f64,
    /// Pairwise distance below which two single points are in contact.
    pub eps_contact: f64,
    /// Spatial tolerance of set membership.
    pub eps_set: f64,
    /// Time tolerance of contact refinement and slice matching.
    pub eps_time: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_root: DEFAULT_TOL_ROOT,
            eps_contact: 1e-6,
            eps_set: 1e-6,
            eps_time: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_root", self.tol_root),
            ("eps_contact", self.eps_contact),
            ("eps_set", self.eps_set),
            ("eps_time", self.eps_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::BadTolerance(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One extended object as a list of single points.
#[derive(Debug, Clone)]
pub struct ObjectSpec {
    id: u8,
    rail_bound: bool,
    particles: Vec<Worldline>,
}

impl ObjectSpec {
    pub fn new(id: u8, particles: Vec<Worldline>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Schema(format!("object {id} has no particles")));
        }
        if let Some(w) = particles.iter().find(|w| w.particle().object_id != id) {
            return Err(Error::Schema(format!("{} listed under object {id}", w.particle())));
        }
        Ok(Self {
            id,
            rail_bound: false,
            particles,
        })
    }

    /// Marks every particle of this object as claimed to stay on the rail.
    pub fn rail_bound(mut self, yes: bool) -> Self {
        self.rail_bound = yes;
        self
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn is_rail_bound(&self) -> bool {
        self.rail_bound
    }

    pub fn particles(&self) -> &[Worldline] {
        &self.particles
    }
}

/// Two objects photographed together by a pinhole at rest at the origin,
/// with the film exposed at `t = 0`.
#[derive(Debug, Clone)]
pub struct Scene {
    objects: [ObjectSpec; 2],
    film: FilmConfig,
    rail: Option<Arc<RailTrack>>,
    t_min: f64,
    tolerances: Tolerances,
    time_grid_n: usize,
    seed: u64,
}

impl Scene {
    pub fn new(
        objects: [ObjectSpec; 2],
        film: FilmConfig,
        rail: Option<Arc<RailTrack>>,
        t_min: f64,
        tolerances: Tolerances,
        time_grid_n: usize,
        seed: u64,
    ) -> Result<Self> {
        if objects[0].id != 1 || objects[1].id != 2 {
            return Err(Error::Schema("objects must have ids 1 and 2, in order".into()));
        }
        if !(t_min < 0.0 && t_min.is_finite()) {
            return Err(Error::Schema(format!("t_min must be negative, got {t_min}")));
        }
        tolerances.validate()?;
        if time_grid_n < 2 {
            return Err(Error::BadTolerance(format!(
                "time_grid_n must be at least 2, got {time_grid_n}"
            )));
        }
        let v_max = DEFAULT_V_MAX_FRACTION * film.c;
        for w in objects.iter().flat_map(|o| o.particles.iter()) {
            if w.t_min() != t_min {
                return Err(Error::Schema(format!(
                    "{} has window start {} but the scene starts at {t_min}",
                    w.particle(),
                    w.t_min()
                )));
            }
            if w.max_speed() > v_max {
                return Err(Error::SuperluminalWorldline {
                    particle: w.particle(),
                    speed: w.max_speed(),
                    limit: v_max,
                });
            }
            if let Motion::Rail(r) = w.motion() {
                let same_rail = rail.as_ref().is_some_and(|t| Arc::ptr_eq(t, &r.track));
                if !same_rail {
                    return Err(Error::Schema(format!(
                        "{} follows a rail that is not the scene rail",
                        w.particle()
                    )));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for w in objects.iter().flat_map(|o| o.particles.iter()) {
            if !seen.insert(w.particle()) {
                return Err(Error::Schema(format!("duplicate {}", w.particle())));
            }
        }
        if let Some(track) = &rail {
            if track.curve().plane_height() != film.rail_plane_height {
                return Err(Error::Schema("rail plane differs from the film's C".into()));
            }
        }
        Ok(Self {
            objects,
            film,
            rail,
            t_min,
            tolerances,
            time_grid_n,
            seed,
        })
    }

    pub fn objects(&self) -> &[ObjectSpec; 2] {
        &self.objects
    }

    pub fn object(&self, id: u8) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn film(&self) -> &FilmConfig {
        &self.film
    }

    pub fn rail(&self) -> Option<&Arc<RailTrack>> {
        self.rail.as_ref()
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn c(&self) -> f64 {
        self.film.c
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn time_grid_n(&self) -> usize {
        self.time_grid_n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// All single points, object 1 first, each in particle order.
    pub fn particles(&self) -> impl Iterator<Item = &Worldline> + '_ {
        self.objects.iter().flat_map(|o| o.particles.iter())
    }

    pub fn particle_count(&self) -> usize {
        self.objects.iter().map(|o| o.particles.len()).sum()
    }

    pub fn worldline(&self, p: ParticleRef) -> Option<&Worldline> {
        self.object(p.object_id)?
            .particles
            .iter()
            .find(|w| w.particle() == p)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Result<Self> {
        tolerances.validate()?;
        self.tolerances = tolerances;
        Ok(self)
    }

    pub fn with_time_grid(mut self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadTolerance(format!("time_grid_n must be at least 2, got {n}")));
        }
        self.time_grid_n = n;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Lays `n` single points along the rail, `spacing` apart in arclength,
/// particle `k` starting at arclength `s0 + k·spacing` at `t_min`, all driven
/// by the speed profile `ds/dt = c β(t)`.
#[allow(clippy::too_many_arguments)]
pub fn build_rail_train(
    object_id: u8,
    track: &Arc<RailTrack>,
    beta: Expr,
    n: usize,
    spacing: f64,
    s0: f64,
    t_min: f64,
    c: f64,
) -> Result<ObjectSpec> {
    let profile = Arc::new(SpeedProfile::new(beta, c, t_min)?);
    if profile.max_abs_beta() > DEFAULT_V_MAX_FRACTION {
        return Err(Error::BetaOutOfRange {
            beta: profile.max_abs_beta(),
            limit: DEFAULT_V_MAX_FRACTION,
        });
    }
    let (lo, hi) = profile.distance_range();
    let last_start = s0 + (n.saturating_sub(1)) as f64 * spacing;
    if s0 + lo < 0.0 || last_start + hi > track.length() {
        return Err(Error::RailTooShort {
            needed: last_start + hi,
            available: track.length(),
        });
    }
    let particles = (0..n)
        .map(|k| {
            let motion = Motion::Rail(RailMotion {
                track: Arc::clone(track),
                profile: Arc::clone(&profile),
                s_start: s0 + k as f64 * spacing,
            });
            Worldline::new(ParticleRef::new(object_id, k as u32), t_min, motion, c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectSpec::new(object_id, particles)?.rail_bound(true))
}

/// Builds the rail track for `g(x)` over `x_domain` in the film's rail plane.
pub fn rail_track(g: Expr, x_domain: (f64, f64), film: &FilmConfig) -> Result<Arc<RailTrack>> {
    let curve = RailCurve::new(g, x_domain, film.rail_plane_height)?;
    Ok(Arc::new(RailTrack::new(Arc::new(curve))?))
}
