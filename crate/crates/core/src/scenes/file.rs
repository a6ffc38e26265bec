//! JSON scene files, schema `retrocam-scene/1`.
//!
//! ```json
//! {
//!   "version": "retrocam-scene/1",
//!   "film": { "D": 1.0, "C": -1.0, "c": 1.0 },
//!   "t_min": -10.0,
//!   "tolerances": { "tol_root": 1e-12, "eps_contact": 1e-6, "eps_set": 1e-6, "eps_time": 1e-9 },
//!   "time_grid_n": 2001,
//!   "seed": 0,
//!   "rail": { "g": "2 + 0.3 * sin(x)", "x_domain": [-25.0, 10.0] },
//!   "objects": [
//!     { "id": 1, "particles": [ { "kind": "static", "position": [0.0, 2.0, 0.0] } ] },
//!     { "id": 2, "particles": [ { "kind": "uniform", "r0": [0.0, 4.0, 0.0], "velocity": [0.5, 0.0, 0.0] } ] }
//!   ]
//! }
//! ```
//!
//! Particle kinds: `static {position}`, `uniform {r0, velocity}`,
//! `circular {center, radius, angular_rate, phase, axis_u, axis_w}`,
//! `rail {beta, s0}` (speed profile in `t`, start arclength at `t_min`) and
//! `sampled {samples: [[t, x, y, z], ...]}`. Particle ids are list indices.
//! An object may carry `"rail_bound": true` to claim that all of its particles
//! ride the rail. Unknown fields are rejected.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Event, Motion, ParticleRef, RailMotion, SpatialPoint, SpeedProfile, Worldline};
use crate::optics::FilmConfig;

use super::{rail_track, Expr, ObjectSpec, Scene, Tolerances};

pub const SCENE_VERSION: &str = "retrocam-scene/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    version: String,
    film: FilmDoc,
    t_min: f64,
    tolerances: TolerancesDoc,
    time_grid_n: usize,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rail: Option<RailDoc>,
    objects: Vec<ObjectDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilmDoc {
    #[serde(rename = "D")]
    film_distance: f64,
    #[serde(rename = "C")]
    rail_plane_height: f64,
    c: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesDoc {
    tol_root: f64,
    eps_contact: f64,
    eps_set: f64,
    eps_time: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RailDoc {
    g: String,
    x_domain: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: u8,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    rail_bound: bool,
    particles: Vec<ParticleDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ParticleDoc {
    Static {
        position: [f64; 3],
    },
    Uniform {
        r0: [f64; 3],
        velocity: [f64; 3],
    },
    Circular {
        center: [f64; 3],
        radius: f64,
        angular_rate: f64,
        phase: f64,
        axis_u: [f64; 3],
        axis_w: [f64; 3],
    },
    Rail {
        beta: String,
        s0: f64,
    },
    Sampled {
        samples: Vec<[f64; 4]>,
    },
}

/// Parses and fully validates a scene document.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.version != SCENE_VERSION {
        return Err(Error::Schema(format!(
            "unsupported version `{}`, expected `{SCENE_VERSION}`",
            doc.version
        )));
    }
    let film = FilmConfig::new(doc.film.film_distance, doc.film.rail_plane_height, doc.film.c)?;
    let tolerances = Tolerances {
        tol_root: doc.tolerances.tol_root,
        eps_contact: doc.tolerances.eps_contact,
        eps_set: doc.tolerances.eps_set,
        eps_time: doc.tolerances.eps_time,
    };
    tolerances.validate()?;
    if !(doc.t_min < 0.0 && doc.t_min.is_finite()) {
        return Err(Error::Schema(format!("t_min must be negative, got {}", doc.t_min)));
    }
    let rail = match &doc.rail {
        Some(r) => Some(rail_track(
            Expr::parse(&r.g, "x")?,
            (r.x_domain[0], r.x_domain[1]),
            &film,
        )?),
        None => None,
    };
    if doc.objects.len() != 2 {
        return Err(Error::Schema(format!(
            "a scene has exactly two objects, found {}",
            doc.objects.len()
        )));
    }

    let mut profiles: HashMap<String, Arc<SpeedProfile>> = HashMap::new();
    let mut objects = Vec::with_capacity(2);
    for (slot, obj) in doc.objects.iter().enumerate() {
        if obj.id as usize != slot + 1 {
            return Err(Error::Schema(format!(
                "object {} found where object {} was expected",
                obj.id,
                slot + 1
            )));
        }
        if obj.rail_bound && rail.is_none() {
            return Err(Error::Schema(format!("object {} is rail-bound but there is no rail", obj.id)));
        }
        let mut particles = Vec::with_capacity(obj.particles.len());
        for (k, p) in obj.particles.iter().enumerate() {
            let particle = ParticleRef::new(obj.id, k as u32);
            let motion = match p {
                ParticleDoc::Static { position } => Motion::Static {
                    position: SpatialPoint::from_array(*position),
                },
                ParticleDoc::Uniform { r0, velocity } => Motion::Uniform {
                    r0: SpatialPoint::from_array(*r0),
                    velocity: SpatialPoint::from_array(*velocity),
                },
                ParticleDoc::Circular {
                    center,
                    radius,
                    angular_rate,
                    phase,
                    axis_u,
                    axis_w,
                } => Motion::Circular {
                    center: SpatialPoint::from_array(*center),
                    radius: *radius,
                    angular_rate: *angular_rate,
                    phase: *phase,
                    axis_u: SpatialPoint::from_array(*axis_u),
                    axis_w: SpatialPoint::from_array(*axis_w),
                },
                ParticleDoc::Rail { beta, s0 } => {
                    let track = rail.as_ref().ok_or_else(|| {
                        Error::Schema(format!("{particle} rides a rail but the scene has none"))
                    })?;
                    let expr = Expr::parse(beta, "t")?;
                    let key = expr.to_string();
                    let profile = match profiles.get(&key) {
                        Some(p) => Arc::clone(p),
                        None => {
                            let p = Arc::new(SpeedProfile::new(expr, film.c, doc.t_min)?);
                            profiles.insert(key, Arc::clone(&p));
                            p
                        }
                    };
                    Motion::Rail(RailMotion {
                        track: Arc::clone(track),
                        profile,
                        s_start: *s0,
                    })
                }
                ParticleDoc::Sampled { samples } => Motion::Sampled(
                    samples
                        .iter()
                        .map(|s| Event::new(s[0], SpatialPoint::new(s[1], s[2], s[3])))
                        .collect(),
                ),
            };
            particles.push(Worldline::new(particle, doc.t_min, motion, film.c)?);
        }
        objects.push(ObjectSpec::new(obj.id, particles)?.rail_bound(obj.rail_bound));
    }
    let second = objects.pop().unwrap();
    let first = objects.pop().unwrap();
    Scene::new(
        [first, second],
        film,
        rail,
        doc.t_min,
        tolerances,
        doc.time_grid_n,
        doc.seed,
    )
}

fn particle_doc(w: &Worldline) -> ParticleDoc {
    match w.motion() {
        Motion::Static { position } => ParticleDoc::Static {
            position: position.to_array(),
        },
        Motion::Uniform { r0, velocity } => ParticleDoc::Uniform {
            r0: r0.to_array(),
            velocity: velocity.to_array(),
        },
        Motion::Circular {
            center,
            radius,
            angular_rate,
            phase,
            axis_u,
            axis_w,
        } => ParticleDoc::Circular {
            center: center.to_array(),
            radius: *radius,
            angular_rate: *angular_rate,
            phase: *phase,
            axis_u: axis_u.to_array(),
            axis_w: axis_w.to_array(),
        },
        Motion::Rail(r) => ParticleDoc::Rail {
            beta: r.profile.beta().to_string(),
            s0: r.s_start,
        },
        Motion::Sampled(samples) => ParticleDoc::Sampled {
            samples: samples
                .iter()
                .map(|e| [e.t, e.pos.x, e.pos.y, e.pos.z])
                .collect(),
        },
    }
}

/// Serializes a scene into its file form; `parse_scene` reads it back into
/// an identical scene.
pub fn scene_to_json(scene: &Scene) -> String {
    let film = scene.film();
    let tol = scene.tolerances();
    let doc = SceneDoc {
        version: SCENE_VERSION.to_string(),
        film: FilmDoc {
            film_distance: film.film_distance,
            rail_plane_height: film.rail_plane_height,
            c: film.c,
        },
        t_min: scene.t_min(),
        tolerances: TolerancesDoc {
            tol_root: tol.tol_root,
            eps_contact: tol.eps_contact,
            eps_set: tol.eps_set,
            eps_time: tol.eps_time,
        },
        time_grid_n: scene.time_grid_n(),
        seed: scene.seed(),
        rail: scene.rail().map(|track| {
            let curve = track.curve();
            let (a, b) = curve.x_domain();
            RailDoc {
                g: curve.g().to_string(),
                x_domain: [a, b],
            }
        }),
        objects: scene
            .objects()
            .iter()
            .map(|o| ObjectDoc {
                id: o.id(),
                rail_bound: o.is_rail_bound(),
                particles: o.particles().iter().map(particle_doc).collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("scene documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": "retrocam-scene/1",
        "film": {"D": 1.0, "C": -1.0, "c": 1.0},
        "t_min": -10.0,
        "tolerances": {"tol_root": 1e-12, "eps_contact": 1e-6, "eps_set": 1e-6, "eps_time": 1e-9},
        "time_grid_n": 101,
        "seed": 3,
        "objects": [
            {"id": 1, "particles": [{"kind": "static", "position": [3.0, 4.0, 0.0]}]},
            {"id": 2, "particles": [{"kind": "static", "position": [0.0, 2.0, 0.0]}]}
        ]
    }"#;

    #[test]
    fn minimal_scene() {
        let scene = parse_scene(MINIMAL).unwrap();
        assert_eq!(scene.objects().len(), 2);
        assert_eq!(scene.particle_count(), 2);
        assert_eq!(scene.seed(), 3);
        let again = parse_scene(&scene_to_json(&scene)).unwrap();
        assert_eq!(scene_to_json(&again), scene_to_json(&scene));
    }

    #[test]
    fn superluminal_particle_rejected() {
        let text = MINIMAL.replace(
            r#"{"kind": "static", "position": [0.0, 2.0, 0.0]}"#,
            r#"{"kind": "uniform", "r0": [0.0, 2.0, 0.0], "velocity": [1.5, 0.0, 0.0]}"#,
        );
        match parse_scene(&text) {
            Err(Error::SuperluminalWorldline { particle, .. }) => {
                assert_eq!(particle, ParticleRef::new(2, 0))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let top = MINIMAL.replace(r#""seed": 3,"#, r#""seed": 3, "colour": "red","#);
        assert!(matches!(parse_scene(&top), Err(Error::Schema(_))));
        let particle = MINIMAL.replace(
            r#""position": [3.0, 4.0, 0.0]}"#,
            r#""position": [3.0, 4.0, 0.0], "mass": 2}"#,
        );
        assert!(matches!(parse_scene(&particle), Err(Error::Schema(_))));
    }

    #[test]
    fn schema_violations() {
        let version = MINIMAL.replace("retrocam-scene/1", "retrocam-scene/9");
        assert!(matches!(parse_scene(&version), Err(Error::Schema(_))));
        let tol = MINIMAL.replace(r#""eps_set": 1e-6"#, r#""eps_set": -1.0"#);
        assert!(matches!(parse_scene(&tol), Err(Error::BadTolerance(_))));
        let rail = MINIMAL.replace(
            r#"{"kind": "static", "position": [0.0, 2.0, 0.0]}"#,
            r#"{"kind": "rail", "beta": "0.5", "s0": 0.0}"#,
        );
        assert!(matches!(parse_scene(&rail), Err(Error::Schema(_))));
        let bad_expr = MINIMAL.replace(
            r#""seed": 3,"#,
            r#""seed": 3, "rail": {"g": "2 + * x", "x_domain": [-1.0, 1.0]},"#,
        );
        assert!(matches!(parse_scene(&bad_expr), Err(Error::Syntax { .. })));
    }
}
