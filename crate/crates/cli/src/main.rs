use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use retrocam::optics::sample_rail_image;
use retrocam::regions::{report_json, verify_analysis, AssertionReport, RegionAnalysis, Status};
use retrocam::render::{history_image_with, rasterize, Raster, Window};
use retrocam::scenes::{demo_scene, parse_scene, random_scene, scene_to_json, Scene, Tolerances, DEMO_NAMES};
use retrocam::Error;

const EXIT_ASSERTION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "retrocam", version, about = "Retarded-time photography of two moving objects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Image a scene: PPM raster plus an optional CSV point dump.
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "PATH")]
        points: Option<PathBuf>,
        #[arg(long, value_name = "WxH", default_value = "512x512", value_parser = parse_raster)]
        raster: (usize, usize),
        /// Film window `Umin,Umax,Vmin,Vmax`; fitted to the image by default.
        #[arg(long, value_name = "U0,U1,V0,V1", value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<Window>,
        #[command(flatten)]
        common: Common,
    },
    /// Write the JSON region report.
    Regions {
        #[command(flatten)]
        source: Source,
        /// Defaults to standard output.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the region assertions; exits 1 if any fails.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write CSV samples of the rail's image on the film.
    RailImage {
        #[command(flatten)]
        source: Source,
        /// Defaults to standard output.
        #[arg(long, value_name = "PATH")]
        points: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a built-in scene to a file and verify it.
    Demo {
        /// One of the built-in scenes, or `random` (uses --seed).
        name: String,
        /// Scene file to write; defaults to `<name>.json`.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long, value_name = "PATH")]
    scene: Option<PathBuf>,
    /// Use a built-in scene instead of a file.
    #[arg(long, value_name = "NAME")]
    demo: Option<String>,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, value_name = "X")]
    eps_contact: Option<f64>,
    #[arg(long, value_name = "X")]
    eps_set: Option<f64>,
    #[arg(long, value_name = "X")]
    eps_time: Option<f64>,
    /// Time-grid size of the region computations (rail-image: sample count).
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn parse_raster(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w: usize = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    if w == 0 || h == 0 {
        return Err("raster dimensions must be positive".into());
    }
    Ok((w, h))
}

fn parse_window(s: &str) -> Result<Window, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [u0, u1, v0, v1] = v[..] else {
        return Err("expected Umin,Umax,Vmin,Vmax".into());
    };
    Window::new(u0, u1, v0, v1).map_err(|e| e.to_string())
}

enum Failure {
    Assertions,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn load(source: &Source, common: &Common) -> Result<Scene, Error> {
    let scene = match (&source.scene, &source.demo) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            parse_scene(&text)?
        }
        (None, Some(name)) => named_scene(name, common.seed)?,
        (None, None) => unreachable!("clap requires a scene source"),
    };
    apply_overrides(scene, common)
}

fn named_scene(name: &str, seed: Option<u64>) -> Result<Scene, Error> {
    if name == "random" {
        return Ok(random_scene(seed.unwrap_or(0)));
    }
    demo_scene(name)
}

fn apply_overrides(mut scene: Scene, common: &Common) -> Result<Scene, Error> {
    let t = scene.tolerances();
    let tolerances = Tolerances {
        eps_contact: common.eps_contact.unwrap_or(t.eps_contact),
        eps_set: common.eps_set.unwrap_or(t.eps_set),
        eps_time: common.eps_time.unwrap_or(t.eps_time),
        ..*t
    };
    scene = scene.with_tolerances(tolerances)?;
    if let Some(n) = common.grid {
        scene = scene.with_time_grid(n)?;
    }
    if let Some(seed) = common.seed {
        scene = scene.with_seed(seed);
    }
    Ok(scene)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_or_stdout(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => write_file(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn summarize(report: &AssertionReport) {
    for r in &report.results {
        let mut line = format!(
            "assertion {:<4} {:<7} max_violation {:.3e}",
            r.id.as_str(),
            r.status.as_str(),
            r.max_violation
        );
        if r.status == Status::Fail {
            if let Some(w) = r.witnesses.first() {
                line.push_str(&format!("  witness: {}", w.note));
                if let Some(p) = w.point {
                    line.push_str(&format!(" at ({}, {}, {})", p.x, p.y, p.z));
                }
            }
        }
        println!("{line}");
    }
}

fn verify(scene: &Scene, report_path: Option<&Path>) -> Outcome {
    let analysis = RegionAnalysis::compute(scene)?;
    let report = verify_analysis(scene, &analysis)?;
    summarize(&report);
    if let Some(path) = report_path {
        write_file(path, report_json(&analysis, &report).as_bytes())?;
    }
    if report.all_hold() {
        println!("all assertions hold");
        Ok(())
    } else {
        match report_path {
            Some(p) => eprintln!("assertion failure; report written to {}", p.display()),
            None => eprintln!("assertion failure; rerun with --report PATH for the full report"),
        }
        Err(Failure::Assertions)
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Render {
            source,
            out,
            points,
            raster,
            window,
            common,
        } => {
            let scene = load(&source, &common)?;
            let analysis = RegionAnalysis::compute(&scene)?;
            let image = history_image_with(&scene, &analysis)?;
            let film = image.film_points();
            let window = match window {
                Some(w) => w,
                None => Window::fit(&film)?,
            };
            let mut r = Raster::new(raster.0, raster.1, window)?;
            rasterize(&film, &mut r);
            if r.clipped() > 0 {
                log::warn!("{} points fall outside the window", r.clipped());
            }
            let mut ppm = Vec::new();
            r.write_ppm(&mut ppm)?;
            write_file(&out, &ppm)?;
            info!("wrote {}", out.display());
            if let Some(path) = points {
                let mut csv = Vec::new();
                image.write_csv(&mut csv)?;
                write_file(&path, &csv)?;
                info!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Regions { source, report, common } => {
            let scene = load(&source, &common)?;
            let analysis = RegionAnalysis::compute(&scene)?;
            let assertions = verify_analysis(&scene, &analysis)?;
            write_or_stdout(report.as_deref(), report_json(&analysis, &assertions).as_bytes())?;
            Ok(())
        }
        Command::Verify { source, report, common } => {
            let scene = load(&source, &common)?;
            verify(&scene, report.as_deref())
        }
        Command::RailImage { source, points, common } => {
            let scene = load(&source, &common)?;
            let track = scene.rail().ok_or(Error::NoRail)?;
            let samples = sample_rail_image(track.curve(), scene.film(), common.grid.unwrap_or(1001))?;
            let mut csv = String::from("U,V\n");
            for p in samples {
                csv.push_str(&format!("{:.16e},{:.16e}\n", p.u, p.v));
            }
            write_or_stdout(points.as_deref(), csv.as_bytes())?;
            Ok(())
        }
        Command::Demo {
            name,
            out,
            report,
            common,
        } => {
            if name != "random" && !DEMO_NAMES.contains(&name.as_str()) {
                return Err(Error::UnknownDemo(name).into());
            }
            let scene = apply_overrides(named_scene(&name, common.seed)?, &common)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.json")));
            let text = scene_to_json(&scene);
            write_file(&path, text.as_bytes())?;
            println!("wrote {}", path.display());
            verify(&parse_scene(&text)?, report.as_deref())
        }
    }
}

fn threads(command: &Command) -> Option<usize> {
    match command {
        Command::Render { common, .. }
        | Command::Regions { common, .. }
        | Command::Verify { common, .. }
        | Command::RailImage { common, .. }
        | Command::Demo { common, .. } => common.threads,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RETROCAM_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = threads(&cli.command) {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertions) => ExitCode::from(EXIT_ASSERTION),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT })
        }
    }
}
