use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand};

use navproj::ingest::{self, DirectorySink};
use navproj::projector::{self, ProjectorView};
use navproj::render::{self, ImageFormat};
use navproj::{Error, Pipeline, ProjectorConfig, ResampleParams, RigidTransform, StyleConfig, TransformTree};

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Project a robot's navigation path onto the floor as arrows and a
/// destination disk.
#[derive(Debug, Parser)]
#[command(name = "navproj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the evenly spaced anchors (kind, x, y, heading) for a path file.
    Resample {
        /// Path record (JSON).
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        spacing: SpacingArgs,
    },
    /// Render one projector frame for a path file.
    Render {
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        style: Option<PathBuf>,
        #[command(flatten)]
        spacing: SpacingArgs,
        /// Output image file.
        #[arg(long)]
        out: PathBuf,
        /// png or ppm; defaults to the output file extension, else png.
        #[arg(long)]
        format: Option<ImageFormat>,
    },
    /// Print the projector's illuminated ground area.
    Footprint {
        #[command(flatten)]
        configs: ConfigArgs,
        /// World frame to report in (needs --transforms); defaults to the robot base frame.
        #[arg(long)]
        frame: Option<String>,
    },
    /// Check the lens-to-ground throw distance against the rated range.
    Validate {
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        frame: Option<String>,
    },
    /// Accept newline-delimited path records over TCP and write a frame per update.
    Serve {
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        style: Option<PathBuf>,
        #[command(flatten)]
        spacing: SpacingArgs,
        /// Output directory for frame_NNNNNN files (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "png")]
        format: ImageFormat,
        #[arg(long, default_value = "127.0.0.1:7654")]
        listen: String,
    },
}

#[derive(Debug, Args)]
struct SpacingArgs {
    /// Distance between arrows, meters.
    #[arg(short = 'D', long = "spacing", default_value_t = 0.5)]
    spacing: f64,
    /// Destination circle diameter, meters.
    #[arg(long = "circle-diameter", default_value_t = 0.3)]
    circle_diameter: f64,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Projector calibration file (TOML).
    #[arg(long)]
    projector: PathBuf,
    /// Static transform file (TOML).
    #[arg(long)]
    transforms: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_CONFIG, message: e.to_string() }
    }
    fn runtime(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_RUNTIME, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::config(e)
        } else {
            Failure::runtime(e)
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: navproj::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn load_params(s: &SpacingArgs) -> Result<ResampleParams, Failure> {
    ResampleParams::new(s.spacing, s.circle_diameter).map_err(Failure::config)
}

fn load_style(path: Option<&Path>) -> Result<StyleConfig, Failure> {
    match path {
        Some(p) => with_file(p, StyleConfig::from_config_str(&read(p)?)),
        None => Ok(StyleConfig::default()),
    }
}

fn load_projector(c: &ConfigArgs) -> Result<(ProjectorConfig, Option<TransformTree>), Failure> {
    let mut cfg = with_file(&c.projector, projector::load_projector_config(&read(&c.projector)?))?;
    let tree = match &c.transforms {
        Some(p) => {
            let tree = with_file(p, TransformTree::from_config_str(&read(p)?))?;
            if tree.contains_frame(cfg.base_frame()) && tree.contains_frame(cfg.lens_frame()) {
                cfg = with_file(p, cfg.with_mount_from(&tree))?;
            }
            Some(tree)
        }
        None => None,
    };
    Ok((cfg, tree))
}

fn pipeline(c: &ConfigArgs, style: Option<&Path>, s: &SpacingArgs) -> Result<Pipeline, Failure> {
    let (cfg, tree) = load_projector(c)?;
    let p = Pipeline::new(cfg, load_style(style)?, load_params(s)?)?;
    Ok(match tree {
        Some(t) => p.with_transforms(t)?,
        None => p,
    })
}

fn robot_pose(
    cfg: &ProjectorConfig,
    tree: Option<&TransformTree>,
    frame: Option<&str>,
) -> Result<RigidTransform, Failure> {
    let base = cfg.base_frame();
    match (frame, tree) {
        (Some(f), Some(t)) => Ok(t.lookup(f, base)?),
        (Some(f), None) => Ok(RigidTransform::identity(f, base)),
        (None, _) => Ok(RigidTransform::identity(base, base)),
    }
}

fn cmd_resample(path: &Path, spacing: &SpacingArgs) -> CmdResult {
    let params = load_params(spacing)?;
    let nav = with_file(path, ingest::load_path_file(path))?;
    let pipeline_anchors = navproj::resample::derive_headings(&navproj::resample::resample(&nav, &params)?);
    let mut out = std::io::stdout().lock();
    for a in pipeline_anchors.iter() {
        writeln!(out, "{} {:.6} {:.6} {:.6}", a.kind.as_str(), a.position.x, a.position.y, a.heading)
            .map_err(Failure::runtime)?;
    }
    Ok(())
}

fn cmd_render(
    path: &Path,
    configs: &ConfigArgs,
    style: Option<&Path>,
    spacing: &SpacingArgs,
    out: &Path,
    format: Option<ImageFormat>,
) -> CmdResult {
    let pipeline = pipeline(configs, style, spacing)?;
    let nav = with_file(path, ingest::load_path_file(path))?;
    let format = format.unwrap_or_else(|| {
        out.extension().and_then(|e| e.to_str()).and_then(|e| e.parse().ok()).unwrap_or_default()
    });
    let pose = pipeline.robot_pose(&nav.frame)?;
    let view = ProjectorView::new(&pipeline.projector, &pose)?;
    let throw = view.validate_throw();
    let fb = pipeline.render_path(&nav)?;
    render::write_image(out, &fb, format)?;

    println!("wrote {} ({}x{} {})", out.display(), fb.width(), fb.height(), format.extension());
    match view.ground_footprint() {
        Ok(fp) => println!("{fp}"),
        Err(e) => println!("footprint: {e}"),
    }
    println!("throw: {throw}");
    if !throw.is_ok() {
        eprintln!("{throw}");
    }
    Ok(())
}

fn cmd_footprint(configs: &ConfigArgs, frame: Option<&str>) -> CmdResult {
    let (cfg, tree) = load_projector(configs)?;
    let pose = robot_pose(&cfg, tree.as_ref(), frame)?;
    let fp = projector::ground_footprint(&cfg, &pose)?;
    println!("{fp}");
    Ok(())
}

fn cmd_validate(configs: &ConfigArgs, frame: Option<&str>) -> CmdResult {
    let (cfg, tree) = load_projector(configs)?;
    let pose = robot_pose(&cfg, tree.as_ref(), frame)?;
    let report = projector::validate_throw(&cfg, &pose)?;
    println!("{report}");
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::runtime("throw distance outside the rated range"))
    }
}

fn cmd_serve(
    configs: &ConfigArgs,
    style: Option<&Path>,
    spacing: &SpacingArgs,
    out: &Path,
    format: ImageFormat,
    listen: &str,
) -> CmdResult {
    let pipeline = pipeline(configs, style, spacing)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::runtime(format!("{}: {e}", out.display())))?;
    let sink = DirectorySink { dir: out.to_path_buf(), format };
    let handle = ingest::serve(listen, pipeline, sink).map_err(Failure::runtime)?;
    println!("listening on {}", handle.local_addr());

    let (tx, rx) = mpsc::channel();
    ctrlc::set_handler(move || {
        let _ = tx.send(());
    })
    .map_err(Failure::runtime)?;
    let _ = rx.recv();
    log::info!("shutdown: interrupt received");
    handle.shutdown();
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            writeln!(buf, "{} {} {}", buf.timestamp_millis(), record.level(), record.args())
        })
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };

    let result = match &cli.command {
        Command::Resample { path, spacing } => cmd_resample(path, spacing),
        Command::Render { path, configs, style, spacing, out, format } => {
            cmd_render(path, configs, style.as_deref(), spacing, out, *format)
        }
        Command::Footprint { configs, frame } => cmd_footprint(configs, frame.as_deref()),
        Command::Validate { configs, frame } => cmd_validate(configs, frame.as_deref()),
        Command::Serve { configs, style, spacing, out, format, listen } => {
            cmd_serve(configs, style.as_deref(), spacing, out, *format, listen)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
