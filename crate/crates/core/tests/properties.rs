use proptest::prelude::*;

use retrocam::kinematics::{retarded_emission, Event, Motion, ParticleRef, SpatialPoint, Worldline};
use retrocam::numeric::uniform_grid;
use retrocam::optics::{project, rail_image_residual, FilmConfig, Provenance, RailCurve};
use retrocam::regions::{region_report_json, verify_analysis, AssertionId, RegionAnalysis, Status};
use retrocam::render::{history_image_with, train_on_rails_residual};
use retrocam::scenes::{build_rail_train, demo_scene, random_scene, rail_track, Expr, ObjectSpec, Scene, Tolerances};

fn film() -> FilmConfig {
    FilmConfig::new(1.0, -1.0, 1.0).unwrap()
}

fn vec3() -> impl Strategy<Value = SpatialPoint> {
    (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| SpatialPoint::new(x, y, z))
}

fn velocity(max: f64) -> impl Strategy<Value = SpatialPoint> {
    (vec3(), 0.0..max).prop_map(|(d, s)| if d.norm() < 1e-6 { SpatialPoint::ORIGIN } else { d * (s / d.norm()) })
}

fn worldline() -> impl Strategy<Value = Worldline> {
    prop_oneof![
        (vec3(), velocity(0.95)).prop_map(|(r0, v)| Motion::Uniform { r0, velocity: v }),
        (vec3(), 0.1f64..3.0, -0.9f64..0.9, 0.0f64..6.0).prop_map(|(center, radius, speed, phase)| {
            Motion::Circular {
                center,
                radius,
                angular_rate: speed / radius,
                phase,
                axis_u: SpatialPoint::new(1.0, 0.0, 0.0),
                axis_w: SpatialPoint::new(0.0, 1.0, 0.0),
            }
        }),
    ]
    .prop_map(|m| Worldline::new(ParticleRef::new(1, 0), -400.0, m, 1.0).unwrap())
}

fn statics(points: &[SpatialPoint], id: u8, t_min: f64) -> ObjectSpec {
    let ws = points
        .iter()
        .enumerate()
        .map(|(k, &p)| Worldline::new(ParticleRef::new(id, k as u32), t_min, Motion::Static { position: p }, 1.0).unwrap())
        .collect();
    ObjectSpec::new(id, ws).unwrap()
}

fn static_scene(a: &[SpatialPoint], b: &[SpatialPoint]) -> Scene {
    Scene::new(
        [statics(a, 1, -40.0), statics(b, 2, -40.0)],
        film(),
        None,
        -40.0,
        Tolerances::default(),
        201,
        0,
    )
    .unwrap()
}

fn in_front() -> impl Strategy<Value = SpatialPoint> {
    (-5.0f64..5.0, 0.5f64..15.0, -5.0f64..5.0).prop_map(|(x, y, z)| SpatialPoint::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn light_cone_function_is_strictly_increasing(w in worldline()) {
        let f = |t: f64| w.position_at(t).unwrap().norm() + t;
        let grid = uniform_grid(-400.0, 0.0, 4001);
        for pair in grid.windows(2) {
            prop_assert!(f(pair[1]) > f(pair[0]));
        }
        let e = retarded_emission(&w, 1.0, 1e-12).unwrap();
        prop_assert!(f(e.t).abs() <= 1e-12 * (1.0 + e.t.abs()));
    }

    #[test]
    fn sampled_worldline_reproduces_samples(steps in prop::collection::vec((0.05f64..1.0, vec3()), 1..20)) {
        let span: f64 = steps.iter().map(|s| s.0).sum();
        let mut t = -span;
        let mut pos = SpatialPoint::new(0.0, 1.0, 0.0);
        let mut samples = vec![Event::new(t, pos)];
        for (dt, dir) in &steps {
            t += dt;
            let step = if dir.norm() > 0.0 { *dir * (0.5 * dt / dir.norm()) } else { SpatialPoint::ORIGIN };
            pos = pos + step;
            samples.push(Event::new(t.min(0.0), pos));
        }
        let last = samples.len() - 1;
        samples[last].t = 0.0;
        prop_assume!(samples.windows(2).all(|w| w[0].t < w[1].t));
        let w = Worldline::with_speed_limit(ParticleRef::new(1, 0), -span, Motion::Sampled(samples.clone()), 1.0).unwrap();
        for s in &samples {
            prop_assert_eq!(w.position_at(s.t).unwrap(), s.pos);
        }
    }

    #[test]
    fn rail_points_image_onto_the_rail_curve(a in 1.0f64..4.0, b in 0.0f64..0.5, k in 0.1f64..2.0, x in -10.0f64..10.0) {
        let g = Expr::parse(&format!("{a} + {b}*sin({k}*x)"), "x").unwrap();
        let rail = RailCurve::new(g, (-10.0, 10.0), -1.0).unwrap();
        let fp = project(rail.point(x), &film()).unwrap();
        prop_assert!(rail_image_residual(&fp, &rail, &film()).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn static_points_image_at_their_positions(pts in prop::collection::vec(in_front(), 1..6)) {
        let scene = static_scene(&pts, &[SpatialPoint::new(0.0, 30.0, 0.0)]);
        let a = RegionAnalysis::compute(&scene).unwrap();
        let image = history_image_with(&scene, &a).unwrap();
        for (p, img) in pts.iter().zip(&image.points) {
            let plain = project(*p, scene.film()).unwrap();
            prop_assert_eq!((img.film.u, img.film.v), (plain.u, plain.v));
            prop_assert_eq!(img.emission.pos, *p);
            prop_assert!((img.emission.t + p.norm()).abs() <= 1e-12 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn a_fixed_point_is_photographed_only_at_minus_its_distance(p in in_front(), v in velocity(0.9), t0 in -20.0f64..-0.1) {
        let still = Worldline::new(ParticleRef::new(1, 0), -40.0, Motion::Static { position: p }, 1.0).unwrap();
        let e = retarded_emission(&still, 1.0, 1e-12).unwrap();
        prop_assert!((e.t + p.norm()).abs() <= 1e-12 * (1.0 + p.norm()));
        // A particle passing through P at t0 emits its photographed light from P only if t0 = -|P|.
        prop_assume!(v.norm() > 0.05 && (t0 + p.norm()).abs() > 1e-3);
        let moving = Worldline::new(ParticleRef::new(2, 0), -200.0, Motion::Uniform { r0: p - v * t0, velocity: v }, 1.0).unwrap();
        let e = retarded_emission(&moving, 1.0, 1e-12).unwrap();
        prop_assert!(e.pos.distance(p) > 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trains_stay_on_curved_rails(amp in 0.0f64..0.5, k in 0.2f64..1.5, beta0 in -0.6f64..0.6, swing in 0.0f64..0.3, n in 1usize..6) {
        let g = Expr::parse(&format!("3 + {amp}*sin({k}*x)"), "x").unwrap();
        let track = rail_track(g, (-30.0, 30.0), &film()).unwrap();
        let beta = Expr::parse(&format!("{beta0} + {swing}*cos(0.2*t)"), "t").unwrap();
        let train = build_rail_train(1, &track, beta, n, 0.1, 30.0, -20.0, 1.0).unwrap();
        for w in train.particles() {
            for t in uniform_grid(-20.0, 0.0, 9) {
                let p = w.position_at(t).unwrap();
                prop_assert!((p.y - track.curve().height(p.x)).abs() <= 1e-10);
                prop_assert_eq!(p.z, -1.0);
            }
        }
        let scene = Scene::new(
            [train, statics(&[SpatialPoint::new(0.0, 5.0, 0.0)], 2, -20.0)],
            film(),
            Some(track),
            -20.0,
            Tolerances::default(),
            101,
            0,
        )
        .unwrap();
        prop_assert!(train_on_rails_residual(&scene).unwrap() <= 1e-9);
    }

    #[test]
    fn random_scenes_satisfy_the_region_relations(seed in 1000u64..100_000) {
        let scene = random_scene(seed);
        let a = RegionAnalysis::compute(&scene).unwrap();
        let r = verify_analysis(&scene, &a).unwrap();
        prop_assert!(r.all_hold(), "{:?}", r.failures().collect::<Vec<_>>());
        prop_assert!(a.zero_union.is_subset_of(&a.d_g) && a.zero_union.is_subset_of(&a.d_i));
        for m in a.permanent.d_p.iter() {
            prop_assert!(a.shell.contains(m.point, scene.tolerances().eps_set));
        }
        let film_of = |p: ParticleRef| {
            let img = history_image_with(&scene, &a).unwrap();
            img.points.iter().find(|x| x.particle == p).map(|x| x.film.clone())
        };
        for m in a.d_g.iter().filter(|m| m.provenance == Some(Provenance::CoupleImage)) {
            let films: Vec<_> = m.sources.iter().filter_map(|s| film_of(*s)).collect();
            for w in films.windows(2) {
                prop_assert!(w[0].distance(&w[1]) <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn region_reports_ignore_the_schedule(seed in 0u64..1000) {
        let scene = random_scene(seed);
        let run = |n: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| region_report_json(&scene).unwrap())
        };
        let one = run(1);
        prop_assert_eq!(&one, &run(3));
        prop_assert_eq!(&one, &run(8));
    }
}

#[test]
fn doubling_the_time_grid_keeps_every_verdict() {
    let probes = [
        ("permanent", SpatialPoint::new(0.0, 2.0, 0.0)),
        ("semi_permanent", SpatialPoint::new(0.0, 2.0, 0.0)),
        ("needle", SpatialPoint::new(0.0, 2.5, 0.0)),
    ];
    for (name, p) in probes {
        let base = demo_scene(name).unwrap();
        let fine = base.clone().with_time_grid(2 * base.time_grid_n()).unwrap();
        let verdicts = |scene: &Scene| {
            let a = RegionAnalysis::compute(scene).unwrap();
            let r = verify_analysis(scene, &a).unwrap();
            let membership = [
                a.d_i.contains(p),
                a.multi_meeting.contains(p),
                a.permanent.d_p.contains(p),
                a.permanent.d_sp.contains(p),
                a.zero_union.contains(p),
                a.d_g.contains(p),
            ];
            let statuses: Vec<Status> = AssertionId::ALL.iter().filter_map(|id| r.get(*id)).map(|x| x.status).collect();
            (membership, statuses)
        };
        assert_eq!(verdicts(&base), verdicts(&fine), "{name}");
    }
}
