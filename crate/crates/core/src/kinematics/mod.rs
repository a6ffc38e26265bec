//! Worldlines of material points, the retarded-emission solver and Lorentz
//! boosts.
//!
//! Frame S has the pinhole O at the origin and the film exposed at `t = 0`.
//! Distances are in light-seconds and times in seconds by default (`c = 1`),
//! but every operation takes `c` explicitly.

mod boost;
mod retarded;
mod worldline;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use boost::{boost_event, Boost};
pub use retarded::{retarded_emission, retarded_emission_uniform_closed_form, DEFAULT_TOL_ROOT};
pub use worldline::{Motion, RailMotion, RailTrack, SpeedProfile, Worldline, DEFAULT_V_MAX_FRACTION};

/// A point of frame S.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpatialPoint {
    pub const ORIGIN: SpatialPoint = SpatialPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Distance from the pinhole, `|OP|`.
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(
            0.5 * (self.x + other.x),
            0.5 * (self.y + other.y),
            0.5 * (self.z + other.z),
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Lexicographic total order used for canonical point-set ordering.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }
}

impl Add for SpatialPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for SpatialPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for SpatialPoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for SpatialPoint {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<SpatialPoint> for f64 {
    type Output = SpatialPoint;
    fn mul(self, p: SpatialPoint) -> SpatialPoint {
        p * self
    }
}

/// A spacetime event of frame S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub pos: SpatialPoint,
}

impl Event {
    pub const fn new(t: f64, pos: SpatialPoint) -> Self {
        Self { t, pos }
    }

    /// Minkowski interval `c²t² − |x|²`.
    pub fn interval(&self, c: f64) -> f64 {
        c * c * self.t * self.t - self.pos.norm_squared()
    }
}

/// Identity of a single material point: which object, which particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParticleRef {
    pub object_id: u8,
    pub particle_id: u32,
}

impl ParticleRef {
    pub const fn new(object_id: u8, particle_id: u32) -> Self {
        Self {
            object_id,
            particle_id,
        }
    }
}

impl fmt::Display for ParticleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "particle {}/{}", self.object_id, self.particle_id)
    }
}
