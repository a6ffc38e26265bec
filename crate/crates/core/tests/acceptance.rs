//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use retrocam::kinematics::{
    retarded_emission, retarded_emission_uniform_closed_form, Boost, Event, Motion, ParticleRef,
    SpatialPoint, Worldline,
};
use retrocam::optics::{comoving_film_point, project, retarded_film_point, unproject, FilmConfig};
use retrocam::regions::{
    region_report_json, verify_analysis, AssertionId, AssertionReport, RegionAnalysis, Status,
};
use retrocam::render::{
    apparent_rotation_angle, history_image_with, measure_section_displacements, outline_circularity,
    rasterize, train_on_rails_residual, Raster, Window,
};
use retrocam::scenes::{box_scene, build_rail_train, demo_scene, random_scene, rail_track, Expr, Scene};

const TOL_ROOT: f64 = 1e-12;
const RAIL_RESIDUAL: f64 = 1e-9;
const ROUTE_AGREEMENT: f64 = 1e-9;
const TRAIN_SECONDS: f64 = 5.0;
const DISK_DEVIATION: f64 = 0.01;
const SOLVER_DT: f64 = 1e-12;
const INTERVAL_DRIFT: f64 = 1e-12;
const ROUND_TRIP: f64 = 1e-12;
const RANDOM_SCENES: u64 = 100;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn train_paradox() -> Outcome {
    single_thread(|| {
        let start = Instant::now();
        let scene = demo_scene("train").expect("train demo");
        assert_eq!(scene.tolerances().tol_root, TOL_ROOT);
        let residual = train_on_rails_residual(&scene).expect("residual");
        let secs = start.elapsed().as_secs_f64();
        outcome(
            residual <= RAIL_RESIDUAL && secs < TRAIN_SECONDS,
            format!("residual {residual:.3e} (limit {RAIL_RESIDUAL:e}), {secs:.2} s single-threaded"),
        )
    })
}

fn route_equivalence() -> Outcome {
    let film = FilmConfig::new(1.0, -1.0, 1.0).unwrap();
    let track = rail_track(Expr::constant(2.0, "x"), (-40.0, 10.0), &film).unwrap();
    let train = build_rail_train(1, &track, Expr::constant(0.6, "t"), 200, 0.02, 12.0, -40.0, 1.0).unwrap();
    let velocity = SpatialPoint::new(0.6, 0.0, 0.0);
    let mut worst = 0.0f64;
    for w in train.particles() {
        let direct = retarded_film_point(w, &film, TOL_ROOT).unwrap();
        let twin = Worldline::new(
            w.particle(),
            w.t_min(),
            Motion::Uniform {
                r0: w.position_at(0.0).unwrap(),
                velocity,
            },
            1.0,
        )
        .unwrap();
        let comoving = comoving_film_point(&twin, &film).unwrap();
        worst = worst.max(direct.distance(&comoving));
    }
    outcome(
        worst <= ROUTE_AGREEMENT,
        format!("200 particles, max film distance {worst:.3e} (limit {ROUTE_AGREEMENT:e})"),
    )
}

fn sphere_disk() -> Outcome {
    let scene = demo_scene("sphere").unwrap();
    let analysis = RegionAnalysis::compute(&scene).unwrap();
    let image = history_image_with(&scene, &analysis).unwrap();
    let (circle, deviation) = outline_circularity(&image).unwrap();
    outcome(
        image.points.len() == 2001 && deviation <= DISK_DEVIATION,
        format!(
            "fitted radius {:.6e}, max radial deviation {:.3}% (limit {}%)",
            circle.r,
            100.0 * deviation,
            100.0 * DISK_DEVIATION
        ),
    )
}

const CORE_ASSERTIONS: [AssertionId; 5] = [
    AssertionId::ZeroSpheres,
    AssertionId::MultiMeeting,
    AssertionId::PermanentCouple,
    AssertionId::ZeroInPhotographed,
    AssertionId::PermanentInPhotographed,
];

fn check(label: &str, scene: &Scene, problems: &mut Vec<String>) -> (RegionAnalysis, AssertionReport) {
    let a = RegionAnalysis::compute(scene).unwrap();
    let r = verify_analysis(scene, &a).unwrap();
    let eps = scene.tolerances().eps_set;
    for id in CORE_ASSERTIONS {
        let x = r.get(id).unwrap();
        if x.status == Status::Fail || x.max_violation > eps {
            problems.push(format!("{label}: assertion {id} {:?} ({:e})", x.status, x.max_violation));
        }
    }
    (a, r)
}

fn theorem_suite() -> Outcome {
    let mut problems = Vec::new();
    let (_, perm) = check("permanent", &demo_scene("permanent").unwrap(), &mut problems);
    for id in CORE_ASSERTIONS {
        if perm.get(id).unwrap().status != Status::Pass {
            problems.push(format!("permanent: assertion {id} not witnessed"));
        }
    }
    let (_, semi) = check("semi_permanent", &demo_scene("semi_permanent").unwrap(), &mut problems);
    if semi.get(AssertionId::SemiPermanentMissed).unwrap().status != Status::Pass {
        problems.push("semi_permanent: 4c not witnessed".into());
    }
    let (needle, _) = check("needle", &demo_scene("needle").unwrap(), &mut problems);
    let p = SpatialPoint::new(0.0, 2.5, 0.0);
    let exhibited = needle.unphotographed_contacts().iter().any(|m| m.point.distance(p) <= 1e-6);
    if !exhibited {
        problems.push("needle: P not in (D_G ∩ D_I) \\ U 0D_R".into());
    }
    let mut photographed_meetings = 0;
    for seed in 0..RANDOM_SCENES {
        let (a, _) = check(&format!("random seed {seed}"), &random_scene(seed), &mut problems);
        photographed_meetings += usize::from(!a.zero_union.is_empty());
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "3 demos + {RANDOM_SCENES} random scenes ({photographed_meetings} with photographed meetings); 4c witnessed; needle P exhibited"
            )
        } else {
            problems.join("; ")
        },
    )
}

fn footnote_exercise() -> Outcome {
    let scene = demo_scene("semi_permanent").unwrap();
    let a = RegionAnalysis::compute(&scene).unwrap();
    let p = SpatialPoint::new(0.0, 2.0, 0.0);
    let in_sp = a.permanent.d_sp.contains(p);
    let in_dg = a.d_g.contains(p);
    outcome(
        in_sp && !in_dg && a.permanent.d_p.is_empty(),
        format!("P in D_SP: {in_sp}, P in D_G: {in_dg}, D_P empty: {}", a.permanent.d_p.is_empty()),
    )
}

fn solver_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_dt = 0.0f64;
    for k in 0..1000u32 {
        let r0 = SpatialPoint::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let speed = rng.gen_range(0.0..0.9);
        let dir = SpatialPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = dir * (speed / dir.norm());
        let w = Worldline::new(ParticleRef::new(1, k), -1000.0, Motion::Uniform { r0, velocity: v }, 1.0).unwrap();
        let numeric = retarded_emission(&w, 1.0, TOL_ROOT).unwrap().t;
        let exact = retarded_emission_uniform_closed_form(r0, v, 1.0).unwrap().t;
        worst_dt = worst_dt.max((numeric - exact).abs());
    }
    let mut worst_interval = 0.0f64;
    for _ in 0..1000 {
        let dir = SpatialPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = dir * (rng.gen_range(0.0..0.9) / dir.norm());
        let b = Boost::new(v, 1.0).unwrap();
        let e = Event::new(
            rng.gen_range(-1.0..1.0),
            SpatialPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        worst_interval = worst_interval.max((b.apply(e).interval(1.0) - e.interval(1.0)).abs());
    }
    outcome(
        worst_dt <= SOLVER_DT && worst_interval <= INTERVAL_DRIFT,
        format!("max |dt*| {worst_dt:.3e}, max interval drift {worst_interval:.3e} (limits {SOLVER_DT:e}, {INTERVAL_DRIFT:e})"),
    )
}

fn displacement_rotation() -> Outcome {
    let forward = box_scene(0.9).unwrap();
    let d = measure_section_displacements(&forward).unwrap();
    let depths: Vec<f64> = d.iter().map(|x| x.0).collect();
    let decreasing = depths == [4.0, 6.0] && d[0].1.abs() > d[1].1.abs();
    let a_plus = apparent_rotation_angle(&forward).unwrap();
    let a_minus = apparent_rotation_angle(&box_scene(-0.9).unwrap()).unwrap();
    let flips = a_plus > 0.0 && a_minus < 0.0 && (a_plus + a_minus).abs() <= 1e-12;
    outcome(
        decreasing && flips,
        format!(
            "|dU| {:.6} at y=4, {:.6} at y=6; angle {a_plus:.6} rad at +0.9c, {a_minus:.6} rad at -0.9c",
            d[0].1.abs(),
            d[1].1.abs()
        ),
    )
}

fn projection_round_trip() -> Outcome {
    let film = FilmConfig::new(1.0, -1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(0.5..20.0));
        let fp = project(SpatialPoint::new(x, y, film.rail_plane_height), &film).unwrap();
        let (bx, by) = unproject(&fp, &film).unwrap();
        worst = worst.max((bx - x).abs()).max((by - y).abs());
    }
    outcome(worst <= ROUND_TRIP, format!("10^4 points, max error {worst:.3e} (limit {ROUND_TRIP:e})"))
}

fn outputs(scene: &Scene) -> (String, Vec<u8>, Vec<u8>) {
    let report = region_report_json(scene).unwrap();
    let a = RegionAnalysis::compute(scene).unwrap();
    let image = history_image_with(scene, &a).unwrap();
    let mut csv = Vec::new();
    image.write_csv(&mut csv).unwrap();
    let points = image.film_points();
    let mut raster = Raster::new(64, 48, Window::fit(&points).unwrap()).unwrap();
    rasterize(&points, &mut raster);
    let mut ppm = Vec::new();
    raster.write_ppm(&mut ppm).unwrap();
    (report, csv, ppm)
}

fn determinism() -> Outcome {
    let scenes: Vec<(&str, Scene)> = ["train", "permanent", "needle"]
        .into_iter()
        .map(|n| (n, demo_scene(n).unwrap()))
        .chain(std::iter::once(("random seed 3", random_scene(3))))
        .collect();
    let mut mismatches = Vec::new();
    for (name, scene) in &scenes {
        let runs: Vec<_> = [1, 2, 8]
            .into_iter()
            .map(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .unwrap()
                    .install(|| outputs(scene))
            })
            .collect();
        if runs.iter().any(|r| r != &runs[0]) {
            mismatches.push(*name);
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} scenes byte-identical for 1, 2 and 8 threads", scenes.len())
        } else {
            format!("outputs differ: {}", mismatches.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 train paradox", train_paradox),
        ("2 route equivalence", route_equivalence),
        ("3 sphere disk", sphere_disk),
        ("4 theorem suite", theorem_suite),
        ("5 semi-permanent point unphotographed", footnote_exercise),
        ("6 solver oracle", solver_oracle),
        ("7 displacement and rotation", displacement_rotation),
        ("8 projection round trip", projection_round_trip),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!o.ok);
        println!(
            "criterion {name}: {} [{:.1} s] {}",
            if o.ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
