use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kinematics::{Motion, ParticleRef, SpatialPoint, Worldline};
use crate::optics::FilmConfig;

use super::{ObjectSpec, Scene, Tolerances, DEFAULT_TIME_GRID_N};

const T_MIN: f64 = -30.0;

fn random_point(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> SpatialPoint {
    loop {
        let p = SpatialPoint::new(
            rng.gen_range(-r_hi..r_hi),
            rng.gen_range(0.5..r_hi),
            rng.gen_range(-r_hi..r_hi),
        );
        let r = p.norm();
        if r >= r_lo && r <= r_hi {
            return p;
        }
    }
}

fn random_velocity(rng: &mut ChaCha8Rng, max_speed: f64) -> SpatialPoint {
    let speed = rng.gen_range(0.0..max_speed);
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    SpatialPoint::new(s * phi.cos(), s * phi.sin(), z) * speed
}

struct Builder {
    motions: [Vec<Motion>; 2],
}

impl Builder {
    fn push(&mut self, object: usize, m: Motion) {
        self.motions[object].push(m);
    }
}

/// A seeded two-object scene mixing free particles with constructed contacts:
/// coincident static couples (permanent loci), couples crossing at the instant
/// their light leaves for the camera, and crossings at unphotographed times.
pub fn random_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder {
        motions: [Vec::new(), Vec::new()],
    };

    for object in 0..2 {
        b.push(object, Motion::Static { position: random_point(&mut rng, 1.0, 8.0) });
        for _ in 0..rng.gen_range(1..4) {
            let m = if rng.gen_bool(0.5) {
                Motion::Uniform {
                    r0: random_point(&mut rng, 1.0, 8.0),
                    velocity: random_velocity(&mut rng, 0.5),
                }
            } else {
                let radius = rng.gen_range(0.2..2.0);
                Motion::Circular {
                    center: random_point(&mut rng, 3.0, 8.0),
                    radius,
                    angular_rate: rng.gen_range(-0.4..0.4) / radius,
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                    axis_u: SpatialPoint::new(1.0, 0.0, 0.0),
                    axis_w: SpatialPoint::new(0.0, 0.0, 1.0),
                }
            };
            b.push(object, m);
        }
    }

    for _ in 0..rng.gen_range(0..3) {
        let p = random_point(&mut rng, 1.0, 8.0);
        b.push(0, Motion::Static { position: p });
        b.push(1, Motion::Static { position: p });
    }

    for _ in 0..rng.gen_range(1..4) {
        let q = random_point(&mut rng, 1.0, 8.0);
        let photographed = -q.norm();
        let t_cross = if rng.gen_bool(0.5) {
            photographed
        } else {
            loop {
                let t = rng.gen_range(-8.0..-0.5);
                if (t - photographed).abs() > 0.05 {
                    break t;
                }
            }
        };
        for object in 0..2 {
            let v = random_velocity(&mut rng, 0.6);
            b.push(object, Motion::Uniform { r0: q - v * t_cross, velocity: v });
        }
    }

    let objects: Vec<ObjectSpec> = b
        .motions
        .into_iter()
        .enumerate()
        .map(|(slot, motions)| {
            let id = slot as u8 + 1;
            let particles = motions
                .into_iter()
                .enumerate()
                .map(|(k, m)| {
                    Worldline::new(ParticleRef::new(id, k as u32), T_MIN, m, 1.0)
                        .expect("random motions are subluminal")
                })
                .collect();
            ObjectSpec::new(id, particles).expect("non-empty object")
        })
        .collect();
    let [first, second]: [ObjectSpec; 2] = objects.try_into().expect("two objects");
    Scene::new(
        [first, second],
        FilmConfig::new(1.0, -1.0, 1.0).expect("valid film"),
        None,
        T_MIN,
        Tolerances::default(),
        DEFAULT_TIME_GRID_N,
        seed,
    )
    .expect("random scene is valid")
}
