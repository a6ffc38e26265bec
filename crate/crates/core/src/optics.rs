//! Pinhole projection onto the film plane `y = D`.
//!
//! Film coordinates are `U ∥ x` and `V ∥ z`, with the origin of the film on
//! the optical (y) axis: `(U, V) = (D x / y, D z / y)`. For points of the rail
//! plane `z = C` this inverts to `(x, y) = (C U / V, D C / V)`, and the rail
//! `y = g(x)` images onto the curve `V g(C U / V) = D C`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{retarded_emission, Boost, Event, ParticleRef, SpatialPoint, Worldline};
use crate::numeric::uniform_grid;
use crate::scenes::Expr;

/// Points with `y` at or below this are treated as behind the pinhole.
pub const Y_MIN: f64 = 1e-9;

/// `|V|` below this images to infinity in the rail plane.
pub const V_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilmConfig {
    /// Film plane `y = D`, `D > 0`.
    pub film_distance: f64,
    /// Rail plane `z = C`, `C < 0`.
    pub rail_plane_height: f64,
    pub c: f64,
}

impl FilmConfig {
    pub fn new(film_distance: f64, rail_plane_height: f64, c: f64) -> Result<Self> {
        if !(film_distance > 0.0 && film_distance.is_finite()) {
            return Err(Error::Schema(format!("film distance D must be > 0, got {film_distance}")));
        }
        if !(rail_plane_height < 0.0 && rail_plane_height.is_finite()) {
            return Err(Error::Schema(format!(
                "rail plane height C must be < 0, got {rail_plane_height}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Schema(format!("speed of light must be > 0, got {c}")));
        }
        Ok(Self {
            film_distance,
            rail_plane_height,
            c,
        })
    }
}

/// How an impression on the film came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Common image of the two single points of a photographed couple.
    CoupleImage,
    /// Image of a single point passing through its emission locus alone.
    SingleImage,
    /// Plain geometric projection, no emission bookkeeping.
    Geometric,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::CoupleImage => "couple_image",
            Provenance::SingleImage => "single_image",
            Provenance::Geometric => "geometric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilmPoint {
    pub u: f64,
    pub v: f64,
    pub t_emit: Option<f64>,
    pub provenance: Provenance,
    pub sources: Vec<ParticleRef>,
}

impl FilmPoint {
    pub fn geometric(u: f64, v: f64) -> Self {
        Self {
            u,
            v,
            t_emit: None,
            provenance: Provenance::Geometric,
            sources: Vec::new(),
        }
    }

    pub fn distance(&self, other: &FilmPoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// A rail `y = g(x)` at rest in the plane `z = C`.
#[derive(Debug, Clone)]
pub struct RailCurve {
    g: Expr,
    slope: Expr,
    x_domain: (f64, f64),
    plane_height: f64,
}

impl RailCurve {
    pub fn new(g: Expr, x_domain: (f64, f64), plane_height: f64) -> Result<Self> {
        let (a, b) = x_domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Schema(format!("rail x_domain [{a}, {b}] is empty")));
        }
        for x in uniform_grid(a, b, 1025) {
            g.try_eval(x)?;
        }
        let slope = g.derivative();
        Ok(Self {
            g,
            slope,
            x_domain,
            plane_height,
        })
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn x_domain(&self) -> (f64, f64) {
        self.x_domain
    }

    pub fn plane_height(&self) -> f64 {
        self.plane_height
    }

    pub fn height(&self, x: f64) -> f64 {
        self.g.eval(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.slope.eval(x)
    }

    pub fn point(&self, x: f64) -> SpatialPoint {
        SpatialPoint::new(x, self.g.eval(x), self.plane_height)
    }

    fn contains_x(&self, x: f64) -> bool {
        let (a, b) = self.x_domain;
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        x >= a - slack && x <= b + slack
    }
}

/// Central projection of `p` through the pinhole onto the film.
pub fn project(p: SpatialPoint, film: &FilmConfig) -> Result<FilmPoint> {
    if !(p.y > Y_MIN) {
        return Err(Error::BehindPinhole { y: p.y });
    }
    let d = film.film_distance;
    Ok(FilmPoint::geometric(d * p.x / p.y, d * p.z / p.y))
}

/// Rail-plane point `(x, y)` imaged at `fp`.
pub fn unproject(fp: &FilmPoint, film: &FilmConfig) -> Result<(f64, f64)> {
    if fp.v.abs() < V_MIN {
        return Err(Error::DegenerateV { v: fp.v });
    }
    let c = film.rail_plane_height;
    Ok((c * fp.u / fp.v, film.film_distance * c / fp.v))
}

/// `V g(C U / V) − D C`; zero exactly on the rail image.
pub fn rail_image_residual(fp: &FilmPoint, rail: &RailCurve, film: &FilmConfig) -> Result<f64> {
    if fp.v.abs() < V_MIN {
        return Err(Error::DegenerateV { v: fp.v });
    }
    let c = film.rail_plane_height;
    let x = c * fp.u / fp.v;
    if !rail.contains_x(x) {
        let (a, b) = rail.x_domain();
        return Err(Error::XOutOfDomain { x, a, b });
    }
    Ok(fp.v * rail.height(x) - film.film_distance * c)
}

/// `n` images of rail points, uniformly spaced in `x` over the rail domain.
pub fn sample_rail_image(rail: &RailCurve, film: &FilmConfig, n: usize) -> Result<Vec<FilmPoint>> {
    if n < 2 {
        return Err(Error::Schema("rail image needs at least two samples".into()));
    }
    let (a, b) = rail.x_domain();
    for x in uniform_grid(a, b, n.max(1025)) {
        if !(rail.height(x) > Y_MIN) {
            return Err(Error::RailBehindPinhole { x });
        }
    }
    uniform_grid(a, b, n)
        .into_iter()
        .map(|x| {
            let p = rail.point(x);
            if !(p.y > Y_MIN) {
                return Err(Error::RailBehindPinhole { x });
            }
            project(p, film)
        })
        .collect()
}

/// Film point of a uniformly moving particle computed through its rest frame.
///
/// The particle is at rest in the frame moving with it, so its emission there
/// is fixed by the light cone of the (invariant) reception event at the
/// origin. That event is boosted back to S and projected.
pub fn comoving_film_point(w: &Worldline, film: &FilmConfig) -> Result<FilmPoint> {
    let (r0, velocity) = match (w.uniform_origin(), w.uniform_velocity()) {
        (Some(r0), Some(v)) => (r0, v),
        _ => return Err(Error::NotUniform),
    };
    let c = film.c;
    let to_rest = Boost::new(velocity, c)?;
    let rest_position = to_rest.apply(Event::new(0.0, r0)).pos;
    let rest_emission = Event::new(-rest_position.norm() / c, rest_position);
    let emission = to_rest.inverse().apply(rest_emission);
    let mut fp = project(emission.pos, film)?;
    fp.t_emit = Some(emission.t);
    fp.sources = vec![w.particle()];
    Ok(fp)
}

/// Film point of `w` through the direct retarded-time route.
pub fn retarded_film_point(w: &Worldline, film: &FilmConfig, tol_root: f64) -> Result<FilmPoint> {
    let emission = retarded_emission(w, film.c, tol_root)?;
    let mut fp = project(emission.pos, film)?;
    fp.t_emit = Some(emission.t);
    fp.sources = vec![w.particle()];
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{Motion, DEFAULT_TOL_ROOT};
    use proptest::prelude::*;

    fn film() -> FilmConfig {
        FilmConfig::new(1.0, -1.0, 1.0).unwrap()
    }

    fn flat_rail(text: &str, a: f64, b: f64) -> RailCurve {
        RailCurve::new(Expr::parse(text, "x").unwrap(), (a, b), -1.0).unwrap()
    }

    #[test]
    fn projection_examples() {
        let fp = project(SpatialPoint::new(2.0, 4.0, -1.0), &film()).unwrap();
        assert_eq!((fp.u, fp.v), (0.5, -0.25));
        let fp = project(SpatialPoint::new(0.0, 2.0, -0.5), &film()).unwrap();
        assert_eq!((fp.u, fp.v), (0.0, -0.25));
        assert!(matches!(
            project(SpatialPoint::new(1.0, 0.0, 1.0), &film()),
            Err(Error::BehindPinhole { .. })
        ));
    }

    #[test]
    fn perspective_limit_is_monotone() {
        let mut last = f64::INFINITY;
        for y in [1.0, 10.0, 100.0, 1e4, 1e8] {
            let fp = project(SpatialPoint::new(3.0, y, -2.0), &film()).unwrap();
            let r = fp.u.hypot(fp.v);
            assert!(r < last);
            last = r;
        }
        assert!(last < 1e-7);
    }

    #[test]
    fn unprojection_examples() {
        let (x, y) = unproject(&FilmPoint::geometric(0.5, -0.25), &film()).unwrap();
        assert_eq!((x, y), (2.0, 4.0));
        let (x, _) = unproject(&FilmPoint::geometric(0.0, -0.7), &film()).unwrap();
        assert_eq!(x, 0.0);
        assert!(matches!(
            unproject(&FilmPoint::geometric(0.5, 0.0), &film()),
            Err(Error::DegenerateV { .. })
        ));
    }

    #[test]
    fn constant_rail_residuals() {
        let rail = flat_rail("2", -10.0, 10.0);
        let r = rail_image_residual(&FilmPoint::geometric(0.3, -0.5), &rail, &film()).unwrap();
        assert_eq!(r, 0.0);
        let r = rail_image_residual(&FilmPoint::geometric(0.3, -0.4), &rail, &film()).unwrap();
        assert!((r - 0.2).abs() < 1e-15);
        let err = rail_image_residual(&FilmPoint::geometric(30.0, -0.5), &rail, &film());
        assert!(matches!(err, Err(Error::XOutOfDomain { .. })));
    }

    #[test]
    fn rail_image_samples() {
        let pts = sample_rail_image(&flat_rail("2", -1.0, 1.0), &film(), 3).unwrap();
        let uv: Vec<(f64, f64)> = pts.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(uv, vec![(-0.5, -0.5), (0.0, -0.5), (0.5, -0.5)]);

        let pts = sample_rail_image(&flat_rail("x^2 + 2", -1.0, 1.0), &film(), 11).unwrap();
        let (first, last) = (&pts[0], &pts[10]);
        assert!((first.u + 1.0 / 3.0).abs() < 1e-15 && (first.v + 1.0 / 3.0).abs() < 1e-15);
        assert!((last.u - 1.0 / 3.0).abs() < 1e-15 && (last.v + 1.0 / 3.0).abs() < 1e-15);

        let rail = flat_rail("2 + 0.3*sin(x)", -5.0, 5.0);
        for p in sample_rail_image(&rail, &film(), 500).unwrap() {
            assert!(rail_image_residual(&p, &rail, &film()).unwrap().abs() <= 1e-12);
        }

        let behind = flat_rail("x", -1.0, 1.0);
        assert!(matches!(
            sample_rail_image(&behind, &film(), 5),
            Err(Error::RailBehindPinhole { .. })
        ));
    }

    /// Independent tracer for the implicit curve `V g(C U / V) = D C`: for a
    /// given `U`, scan `V` for a sign change and bisect.
    fn trace_v(rail: &RailCurve, film: &FilmConfig, u: f64) -> f64 {
        let (d, c) = (film.film_distance, film.rail_plane_height);
        let f = |v: f64| v * rail.height(c * u / v) - d * c;
        let grid = uniform_grid(-2.0, -1e-3, 20001);
        let pair = grid
            .windows(2)
            .find(|w| f(w[0]).signum() != f(w[1]).signum())
            .expect("bracket");
        let (mut lo, mut hi) = (pair[0], pair[1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rail_image_matches_implicit_tracer() {
        let rail = flat_rail("2 + 0.3*sin(x)", -3.0, 3.0);
        for p in sample_rail_image(&rail, &film(), 41).unwrap() {
            let v = trace_v(&rail, &film(), p.u);
            assert!((v - p.v).abs() < 1e-12, "U={} V={} traced {}", p.u, p.v, v);
        }
    }

    #[test]
    fn comoving_route_examples() {
        let particle = ParticleRef::new(1, 0);
        let at_rest = Worldline::new(
            particle,
            -50.0,
            Motion::Static {
                position: SpatialPoint::new(0.5, 4.0, -1.0),
            },
            1.0,
        )
        .unwrap();
        let fp = comoving_film_point(&at_rest, &film()).unwrap();
        let direct = project(SpatialPoint::new(0.5, 4.0, -1.0), &film()).unwrap();
        assert_eq!((fp.u, fp.v), (direct.u, direct.v));

        let moving = Worldline::new(
            particle,
            -50.0,
            Motion::Uniform {
                r0: SpatialPoint::new(0.0, 4.0, -1.0),
                velocity: SpatialPoint::new(0.6, 0.0, 0.0),
            },
            1.0,
        )
        .unwrap();
        let a = comoving_film_point(&moving, &film()).unwrap();
        let b = retarded_film_point(&moving, &film(), DEFAULT_TOL_ROOT).unwrap();
        assert!(a.distance(&b) <= 1e-9);

        let circ = Worldline::new(
            particle,
            -50.0,
            Motion::Circular {
                center: SpatialPoint::new(0.0, 4.0, -1.0),
                radius: 1.0,
                angular_rate: 0.1,
                phase: 0.0,
                axis_u: SpatialPoint::new(1.0, 0.0, 0.0),
                axis_w: SpatialPoint::new(0.0, 1.0, 0.0),
            },
            1.0,
        )
        .unwrap();
        assert_eq!(comoving_film_point(&circ, &film()), Err(Error::NotUniform));
    }

    proptest! {
        #[test]
        fn round_trip_in_rail_plane(x in -100.0f64..100.0, y in 1.0f64..100.0) {
            let p = SpatialPoint::new(x, y, -1.0);
            let (ux, uy) = unproject(&project(p, &film()).unwrap(), &film()).unwrap();
            prop_assert!((ux - x).abs() <= 1e-12 * x.abs().max(1.0));
            prop_assert!((uy - y).abs() <= 1e-12 * y);
        }

        #[test]
        fn scale_covariance(x in -10.0f64..10.0, y in 0.5f64..50.0, z in -10.0f64..10.0, k in 0.1f64..10.0) {
            let p = SpatialPoint::new(x, y, z);
            let base = project(p, &film()).unwrap();
            let scaled = project(p, &FilmConfig::new(k, -1.0, 1.0).unwrap()).unwrap();
            prop_assert!((scaled.u - k * base.u).abs() <= 1e-12 * scaled.u.abs().max(1.0));
            prop_assert!((scaled.v - k * base.v).abs() <= 1e-12 * scaled.v.abs().max(1.0));
        }

        #[test]
        fn comoving_route_matches_direct(
            x in -5.0f64..5.0, y in 1.0f64..10.0, z in -3.0f64..3.0,
            vx in -0.9f64..0.9, vz in -0.3f64..0.3,
        ) {
            let w = Worldline::new(
                ParticleRef::new(1, 0),
                -1000.0,
                Motion::Uniform { r0: SpatialPoint::new(x, y, z), velocity: SpatialPoint::new(vx, 0.0, vz) },
                1.0,
            ).unwrap();
            match (comoving_film_point(&w, &film()), retarded_film_point(&w, &film(), DEFAULT_TOL_ROOT)) {
                (Ok(a), Ok(b)) => prop_assert!(a.distance(&b) <= 1e-9),
                (Err(Error::BehindPinhole { .. }), Err(Error::BehindPinhole { .. })) => {}
                (a, b) => prop_assert!(false, "routes disagree: {:?} vs {:?}", a, b),
            }
        }
    }
}
