use crate::error::{Error, Result};

use super::{Event, SpatialPoint};

/// A pure Lorentz boost of frame S by a velocity `v`, `|v| < c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    velocity: SpatialPoint,
    gamma: f64,
    c: f64,
}

impl Boost {
    pub fn new(velocity: SpatialPoint, c: f64) -> Result<Self> {
        let speed = velocity.norm();
        if !(speed < c) || !velocity.is_finite() {
            return Err(Error::SuperluminalBoost { speed, c });
        }
        let beta2 = velocity.norm_squared() / (c * c);
        Ok(Self {
            velocity,
            gamma: 1.0 / (1.0 - beta2).sqrt(),
            c,
        })
    }

    pub fn velocity(&self) -> SpatialPoint {
        self.velocity
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The boost back to the original frame.
    pub fn inverse(&self) -> Self {
        Self {
            velocity: -self.velocity,
            ..*self
        }
    }

    /// Coordinates of `e` in the frame moving with `velocity` relative to S.
    ///
    /// `t' = γ (t − v·x / c²)`,
    /// `x' = x + ((γ − 1) (v·x) / |v|² − γ t) v`.
    pub fn apply(&self, e: Event) -> Event {
        let v2 = self.velocity.norm_squared();
        if v2 == 0.0 {
            return e;
        }
        let vx = self.velocity.dot(e.pos);
        let t = self.gamma * (e.t - vx / (self.c * self.c));
        let k = (self.gamma - 1.0) * vx / v2 - self.gamma * e.t;
        Event::new(t, e.pos + self.velocity * k)
    }
}

/// Boosts `e` by `b`; see [`Boost::apply`].
pub fn boost_event(b: &Boost, e: Event) -> Event {
    b.apply(e)
}
