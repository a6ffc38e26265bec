use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::uniform_grid;
use crate::optics::RailCurve;
use crate::scenes::Expr;

use super::{Event, ParticleRef, SpatialPoint};

/// Default speed guard as a fraction of `c`.
pub const DEFAULT_V_MAX_FRACTION: f64 = 0.999;

/// Positions produced by the rail integrators move by less than this when
/// the step is halved.
const STEP_HALVING_TOL: f64 = 1e-10;

/// Samples used to bound the speed of non-analytic motions.
const SPEED_PROBE_SAMPLES: usize = 4097;

/// How a single point moves through S.
#[derive(Debug, Clone)]
pub enum Motion {
    Static {
        position: SpatialPoint,
    },
    /// `r(t) = r0 + v t`.
    Uniform {
        r0: SpatialPoint,
        velocity: SpatialPoint,
    },
    /// `r(t) = center + radius (cos(ωt + φ) u + sin(ωt + φ) w)` with `u`, `w`
    /// orthonormal.
    Circular {
        center: SpatialPoint,
        radius: f64,
        angular_rate: f64,
        phase: f64,
        axis_u: SpatialPoint,
        axis_w: SpatialPoint,
    },
    Rail(RailMotion),
    /// Piecewise-linear interpolation between strictly time-ordered samples.
    Sampled(Vec<Event>),
}

/// Arclength-parameterized motion along a rail.
#[derive(Debug, Clone)]
pub struct RailMotion {
    pub track: Arc<RailTrack>,
    pub profile: Arc<SpeedProfile>,
    /// Arclength from the start of the rail domain at `t_min`.
    pub s_start: f64,
}

impl RailMotion {
    pub fn arclength_at(&self, t: f64) -> f64 {
        self.s_start + self.profile.distance_at(t)
    }
}

/// Tabulated inverse arclength `x(s)` of a rail, from RK4 integration of
/// `dx/ds = 1 / sqrt(1 + g'(x)²)` starting at the left end of the domain.
#[derive(Debug)]
pub struct RailTrack {
    curve: Arc<RailCurve>,
    step: f64,
    x_nodes: Vec<f64>,
    length: f64,
}

impl RailTrack {
    pub fn new(curve: Arc<RailCurve>) -> Result<Self> {
        let mut step = 1.0 / 32.0;
        let mut coarse = Self::tabulate(&curve, step)?;
        for _ in 0..12 {
            let fine = Self::tabulate(&curve, step / 2.0)?;
            let change = coarse
                .iter()
                .zip(fine.iter().step_by(2))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            step /= 2.0;
            if change < STEP_HALVING_TOL {
                let mut track = Self {
                    curve,
                    step,
                    x_nodes: fine,
                    length: 0.0,
                };
                track.length = track.locate_end();
                return Ok(track);
            }
            coarse = fine;
        }
        Err(Error::NoConvergence("rail arclength table".into()))
    }

    fn slope_rate(curve: &RailCurve, x: f64) -> f64 {
        let d = curve.slope(x);
        1.0 / (1.0 + d * d).sqrt()
    }

    fn rk4(curve: &RailCurve, x: f64, h: f64) -> f64 {
        let k1 = Self::slope_rate(curve, x);
        let k2 = Self::slope_rate(curve, x + 0.5 * h * k1);
        let k3 = Self::slope_rate(curve, x + 0.5 * h * k2);
        let k4 = Self::slope_rate(curve, x + h * k3);
        x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    fn tabulate(curve: &RailCurve, step: f64) -> Result<Vec<f64>> {
        let (a, b) = curve.x_domain();
        let mut nodes = vec![a];
        let mut x = a;
        while x < b {
            x = Self::rk4(curve, x, step);
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    context: "rail arclength integration".into(),
                });
            }
            nodes.push(x);
        }
        Ok(nodes)
    }

    /// Arclength at which the track reaches the right end of the domain.
    fn locate_end(&self) -> f64 {
        let (_, b) = self.curve.x_domain();
        let last = self.x_nodes.len() - 1;
        let s_lo = (last - 1) as f64 * self.step;
        let x_lo = self.x_nodes[last - 1];
        let (mut lo, mut hi) = (0.0, self.step);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if Self::rk4(&self.curve, x_lo, mid) < b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        s_lo + lo
    }

    pub fn curve(&self) -> &Arc<RailCurve> {
        &self.curve
    }

    /// Total arclength of the rail over its domain.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Abscissa of the rail point at arclength `s` from the left end.
    pub fn x_at(&self, s: f64) -> f64 {
        let last = self.x_nodes.len() - 1;
        let j = ((s / self.step).floor().max(0.0) as usize).min(last);
        let tau = s - j as f64 * self.step;
        if tau == 0.0 {
            return self.x_nodes[j];
        }
        Self::rk4(&self.curve, self.x_nodes[j], tau)
    }

    pub fn point_at(&self, s: f64) -> SpatialPoint {
        self.curve.point(self.x_at(s))
    }
}

/// A speed profile `β(t)` together with the tabulated travelled arclength
/// `S(t) = c ∫_{t_min}^t β(τ) dτ` (RK4 on `dS/dt = c β(t)`).
#[derive(Debug)]
pub struct SpeedProfile {
    beta: Expr,
    c: f64,
    t_min: f64,
    step: f64,
    nodes: Vec<f64>,
    max_abs_beta: f64,
    range: (f64, f64),
}

impl SpeedProfile {
    pub fn new(beta: Expr, c: f64, t_min: f64) -> Result<Self> {
        let span = -t_min;
        let mut n = (span / 0.05).ceil().max(8.0) as usize;
        let mut coarse = Self::tabulate(&beta, c, t_min, n)?;
        for _ in 0..14 {
            let fine = Self::tabulate(&beta, c, t_min, 2 * n)?;
            let change = coarse
                .iter()
                .zip(fine.iter().step_by(2))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            n *= 2;
            if change < STEP_HALVING_TOL {
                let step = span / n as f64;
                let mut max_abs_beta: f64 = 0.0;
                for k in 0..=2 * n {
                    let t = (t_min + 0.5 * step * k as f64).min(0.0);
                    max_abs_beta = max_abs_beta.max(beta.eval(t).abs());
                }
                let lo = fine.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = fine.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                return Ok(Self {
                    beta,
                    c,
                    t_min,
                    step,
                    nodes: fine,
                    max_abs_beta,
                    range: (lo, hi),
                });
            }
            coarse = fine;
        }
        Err(Error::NoConvergence("speed profile integration".into()))
    }

    fn rk4(beta: &Expr, c: f64, s: f64, t: f64, h: f64) -> f64 {
        // The right-hand side does not depend on S, so RK4 reduces to Simpson.
        let k1 = c * beta.eval(t);
        let k2 = c * beta.eval(t + 0.5 * h);
        let k4 = c * beta.eval(t + h);
        s + h / 6.0 * (k1 + 4.0 * k2 + k4)
    }

    fn tabulate(beta: &Expr, c: f64, t_min: f64, n: usize) -> Result<Vec<f64>> {
        let h = -t_min / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        nodes.push(s);
        for k in 0..n {
            s = Self::rk4(beta, c, s, t_min + k as f64 * h, h);
            if !s.is_finite() {
                return Err(Error::NonFinite {
                    context: "speed profile integration".into(),
                });
            }
            nodes.push(s);
        }
        Ok(nodes)
    }

    pub fn beta(&self) -> &Expr {
        &self.beta
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn max_abs_beta(&self) -> f64 {
        self.max_abs_beta
    }

    /// Smallest and largest tabulated travelled distance.
    pub fn distance_range(&self) -> (f64, f64) {
        self.range
    }

    /// Travelled arclength since `t_min`.
    pub fn distance_at(&self, t: f64) -> f64 {
        let last = self.nodes.len() - 1;
        let j = (((t - self.t_min) / self.step).floor().max(0.0) as usize).min(last);
        let t_j = self.t_min + j as f64 * self.step;
        let tau = t - t_j;
        if tau == 0.0 {
            return self.nodes[j];
        }
        Self::rk4(&self.beta, self.c, self.nodes[j], t_j, tau)
    }
}

/// The trajectory of one material point over `[t_min, 0]`.
#[derive(Debug, Clone)]
pub struct Worldline {
    particle: ParticleRef,
    t_min: f64,
    motion: Motion,
    max_speed: f64,
}

impl Worldline {
    /// Builds a worldline with the default speed guard `0.999 c`.
    pub fn new(particle: ParticleRef, t_min: f64, motion: Motion, c: f64) -> Result<Self> {
        Self::with_speed_limit(particle, t_min, motion, DEFAULT_V_MAX_FRACTION * c)
    }

    pub fn with_speed_limit(
        particle: ParticleRef,
        t_min: f64,
        motion: Motion,
        v_max: f64,
    ) -> Result<Self> {
        if !(t_min < 0.0 && t_min.is_finite()) {
            return Err(Error::Schema(format!(
                "{particle}: t_min must be finite and negative, got {t_min}"
            )));
        }
        let max_speed = Self::validate(particle, t_min, &motion)?;
        if max_speed > v_max {
            return Err(Error::SuperluminalWorldline {
                particle,
                speed: max_speed,
                limit: v_max,
            });
        }
        Ok(Self {
            particle,
            t_min,
            motion,
            max_speed,
        })
    }

    /// Checks the motion's own invariants and returns its peak speed.
    fn validate(particle: ParticleRef, t_min: f64, motion: &Motion) -> Result<f64> {
        let bad = |msg: String| Error::Schema(format!("{particle}: {msg}"));
        match motion {
            Motion::Static { position } => {
                if !position.is_finite() {
                    return Err(bad("non-finite position".into()));
                }
                Ok(0.0)
            }
            Motion::Uniform { r0, velocity } => {
                if !(r0.is_finite() && velocity.is_finite()) {
                    return Err(bad("non-finite uniform motion".into()));
                }
                Ok(velocity.norm())
            }
            Motion::Circular {
                center,
                radius,
                angular_rate,
                phase,
                axis_u,
                axis_w,
            } => {
                let finite = center.is_finite()
                    && radius.is_finite()
                    && angular_rate.is_finite()
                    && phase.is_finite();
                if !finite || *radius < 0.0 {
                    return Err(bad("bad circular motion parameters".into()));
                }
                let orthonormal = (axis_u.norm() - 1.0).abs() < 1e-9
                    && (axis_w.norm() - 1.0).abs() < 1e-9
                    && axis_u.dot(*axis_w).abs() < 1e-9;
                if !orthonormal {
                    return Err(bad("circular plane axes must be orthonormal".into()));
                }
                Ok(radius * angular_rate.abs())
            }
            Motion::Rail(rail) => {
                let (lo, hi) = rail.profile.distance_range();
                let needed_hi = rail.s_start + hi;
                if rail.s_start + lo < 0.0 || needed_hi > rail.track.length() {
                    return Err(Error::RailTooShort {
                        needed: needed_hi.max(-(rail.s_start + lo)),
                        available: rail.track.length(),
                    });
                }
                if (rail.profile.t_min() - t_min).abs() > 1e-12 {
                    return Err(bad("speed profile window differs from the scene".into()));
                }
                let mut peak = rail.profile.max_abs_beta() * rail.profile.c;
                // The profile is checked on its own nodes; probe the composed
                // motion as well.
                let grid = uniform_grid(t_min, 0.0, SPEED_PROBE_SAMPLES);
                for w in grid.windows(2) {
                    let a = rail.track.point_at(rail.arclength_at(w[0]));
                    let b = rail.track.point_at(rail.arclength_at(w[1]));
                    peak = peak.max(a.distance(b) / (w[1] - w[0]));
                }
                Ok(peak)
            }
            Motion::Sampled(samples) => {
                if samples.len() < 2 {
                    return Err(bad("sampled motion needs at least two samples".into()));
                }
                if samples.iter().any(|e| !(e.t.is_finite() && e.pos.is_finite())) {
                    return Err(bad("non-finite sample".into()));
                }
                if samples.windows(2).any(|w| w[1].t <= w[0].t) {
                    return Err(bad("sample times must be strictly increasing".into()));
                }
                let first = samples[0].t;
                let last = samples[samples.len() - 1].t;
                if first > t_min || last < 0.0 {
                    return Err(bad(format!(
                        "samples cover [{first}, {last}], need [{t_min}, 0]"
                    )));
                }
                Ok(samples
                    .windows(2)
                    .map(|w| w[0].pos.distance(w[1].pos) / (w[1].t - w[0].t))
                    .fold(0.0, f64::max))
            }
        }
    }

    pub fn particle(&self) -> ParticleRef {
        self.particle
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn motion(&self) -> &Motion {
        &self.motion
    }

    /// Peak speed found during validation.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.motion, Motion::Static { .. } | Motion::Uniform { .. })
    }

    pub fn position_at(&self, t: f64) -> Result<SpatialPoint> {
        if !(t >= self.t_min && t <= 0.0) {
            return Err(Error::TimeOutOfDomain {
                t,
                t_min: self.t_min,
            });
        }
        Ok(self.eval(t))
    }

    /// Position without the domain check; callers keep `t` in `[t_min, 0]`.
    pub(crate) fn eval(&self, t: f64) -> SpatialPoint {
        match &self.motion {
            Motion::Static { position } => *position,
            Motion::Uniform { r0, velocity } => *r0 + *velocity * t,
            Motion::Circular {
                center,
                radius,
                angular_rate,
                phase,
                axis_u,
                axis_w,
            } => {
                let (s, c) = (angular_rate * t + phase).sin_cos();
                *center + (*axis_u * c + *axis_w * s) * *radius
            }
            Motion::Rail(rail) => rail.track.point_at(rail.arclength_at(t)),
            Motion::Sampled(samples) => interpolate(samples, t),
        }
    }

    /// Velocity of a static or uniform worldline.
    pub fn uniform_velocity(&self) -> Option<SpatialPoint> {
        match self.motion {
            Motion::Static { .. } => Some(SpatialPoint::ORIGIN),
            Motion::Uniform { velocity, .. } => Some(velocity),
            _ => None,
        }
    }

    /// Position at `t = 0` extrapolated for static and uniform worldlines.
    pub fn uniform_origin(&self) -> Option<SpatialPoint> {
        match self.motion {
            Motion::Static { position } => Some(position),
            Motion::Uniform { r0, .. } => Some(r0),
            _ => None,
        }
    }
}

fn interpolate(samples: &[Event], t: f64) -> SpatialPoint {
    let upper = samples.partition_point(|e| e.t <= t);
    if upper == 0 {
        return samples[0].pos;
    }
    let lo = &samples[upper - 1];
    if lo.t == t || upper == samples.len() {
        return lo.pos;
    }
    let hi = &samples[upper];
    let w = (t - lo.t) / (hi.t - lo.t);
    lo.pos + (hi.pos - lo.pos) * w
}
