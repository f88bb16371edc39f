//! `ssmguard` command-line entry point.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tracing_subscriber::EnvFilter;

use ssmguard::harness::{
    export, join_on_time, read_column, render_frame, rmse, simulate, CapsulePhantom, HarnessError, HitLabel,
    Scenario, SyntheticScene,
};
use ssmguard::kinematics::RigidTransform;
use ssmguard::lidar_frames::{
    channel_path, preprocess_frame, restagger, write_channel, write_recording, write_stacked, BeamIntrinsics,
    ChannelKind, LidarError, PreprocessOptions, Recording, SensorModel, DEFAULT_RESIZE_HEIGHT, NATIVE_HEIGHT,
    NATIVE_WIDTH,
};
use ssmguard::perception::{
    build_background, extract_human, load_annotations, Extraction, PerceptionConfig, PerceptionError,
    SyntheticOracle,
};
use ssmguard::Vec3;

#[derive(Parser)]
#[command(name = "ssmguard", version, about = "Lidar-based speed and separation monitoring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lidar frame recordings.
    #[command(subcommand)]
    Frames(FramesCommand),
    /// Human extraction from recorded frames.
    #[command(subcommand)]
    Perceive(PerceiveCommand),
    /// Run a scenario and write ticks.csv, truth.csv, summary.json and plot.svg.
    Simulate(SimulateArgs),
    /// Metrics over exported logs.
    #[command(subcommand)]
    Metrics(MetricsCommand),
}

#[derive(Subcommand)]
enum FramesCommand {
    /// Destagger, reduce to 8 bits, resize, expose and equalise every frame.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESIZE_HEIGHT)]
        resize_height: usize,
        #[arg(long)]
        no_equalize: bool,
    },
    /// Render a synthetic recording of a person walking past the sensor, with
    /// ground-truth boxes in COCO format.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Frames showing the person.
        #[arg(long, default_value_t = 20)]
        frames: usize,
        /// Empty frames recorded first, for background estimation.
        #[arg(long, default_value_t = 50)]
        background_frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum PerceiveCommand {
    /// Write the human points of every annotated frame as `<frame>.csv`.
    Extract {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recording used for the background model (default: `--frames`).
        #[arg(long)]
        background: Option<PathBuf>,
        /// Seed for plane segmentation.
        #[arg(long)]
        seed: Option<u64>,
        /// Perception setting override, e.g. `dbscan_eps_m=0.15`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario override with a dotted key, e.g. `ssm.W_max=2.5`. Bare SSM
    /// keys such as `W_max=2.5` are accepted too.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// RMSE between two CSV columns joined on `t_ns`.
    Rmse {
        #[arg(long)]
        measured: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value = "min_distance_m")]
        measured_column: String,
        #[arg(long, default_value = "truth_distance_m")]
        truth_column: String,
    },
}

enum CliError {
    Usage(String),
    Domain(&'static str, String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::Io { .. } => "io",
            HarnessError::Scenario(_) => "scenario",
            HarnessError::Parse(_) | HarnessError::EmptySeries | HarnessError::LengthMismatch { .. } => "data",
            _ => "simulation",
        };
        CliError::Domain(code, e.to_string())
    }
}

impl From<LidarError> for CliError {
    fn from(e: LidarError) -> Self {
        let code = if matches!(e, LidarError::Io { .. }) { "io" } else { "frames" };
        CliError::Domain(code, e.to_string())
    }
}

impl From<PerceptionError> for CliError {
    fn from(e: PerceptionError) -> Self {
        match e {
            PerceptionError::Lidar(e) => e.into(),
            e => CliError::Domain("perception", e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Domain("io", format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let filter = EnvFilter::try_from_env("SSMGUARD_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error[usage]: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(code, msg)) => {
            eprintln!("error[{code}]: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Frames(FramesCommand::Preprocess {
            input,
            output,
            resize_height,
            no_equalize,
        }) => preprocess(&input, &output, resize_height, !no_equalize),
        Command::Frames(FramesCommand::Synth {
            out,
            frames,
            background_frames,
            seed,
        }) => synth(&out, frames, background_frames, seed),
        Command::Perceive(PerceiveCommand::Extract {
            frames,
            annotations,
            out,
            background,
            seed,
            overrides,
        }) => extract(&frames, &annotations, &out, background.as_deref(), seed, &overrides),
        Command::Simulate(args) => run_simulation(&args),
        Command::Metrics(MetricsCommand::Rmse {
            measured,
            truth,
            measured_column,
            truth_column,
        }) => {
            let m = read_column(&measured, &measured_column)?;
            let t = read_column(&truth, &truth_column)?;
            let (a, b) = join_on_time(&m, &t);
            let e = rmse(&a, &b)?;
            println!("rmse_m={e} samples={}", a.len());
            Ok(())
        }
    }
}

fn preprocess(input: &Path, output: &Path, resize_height: usize, equalize: bool) -> Result<(), CliError> {
    if resize_height == 0 {
        return Err(CliError::Usage("--resize-height must be positive".into()));
    }
    let recording = Recording::open(input)?;
    std::fs::create_dir_all(output).map_err(|e| io_error(output, e))?;
    let opts = PreprocessOptions {
        resize_height,
        equalize,
        ..PreprocessOptions::default()
    };
    for i in 0..recording.len() {
        let frame = preprocess_frame(&recording.frame(i)?, &opts)?;
        for (kind, img) in ChannelKind::ALL.into_iter().zip(frame.channels()) {
            write_channel(&channel_path(output, i, kind), img)?;
        }
        write_stacked(&output.join(format!("{i}_stacked.png")), &frame.stacked)?;
        tracing::debug!(frame = i, "preprocessed");
    }
    println!("preprocessed {} frames into {}", recording.len(), output.display());
    Ok(())
}

fn synth(out: &Path, frames: usize, background_frames: usize, seed: u64) -> Result<(), CliError> {
    if frames == 0 {
        return Err(CliError::Usage("--frames must be positive".into()));
    }
    let sensor = SensorModel::new(
        BeamIntrinsics::uniform(NATIVE_HEIGHT, 90.0),
        0.001,
        RigidTransform::from_translation(Vec3::new(0.0, 0.0, 1.0)),
    );
    let period = 50_000_000;
    let factor = DEFAULT_RESIZE_HEIGHT / NATIVE_HEIGHT;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rendered = Vec::with_capacity(background_frames + frames);
    let mut images = Vec::new();
    let mut boxes = Vec::new();
    for i in 0..background_frames + frames {
        let t = i as i64 * period;
        let humans = if i < background_frames {
            vec![]
        } else {
            let s = (i - background_frames) as f64 / frames.max(2).saturating_sub(1) as f64;
            let base = Vec3::new(1.6, -1.0 + 2.0 * s, 0.0);
            vec![CapsulePhantom {
                p0: base + Vec3::new(0.0, 0.0, 0.25),
                p1: base + Vec3::new(0.0, 0.0, 1.45),
                radius: 0.25,
            }]
        };
        let scene = SyntheticScene { floor: true, humans };
        let r = render_frame(&sensor, NATIVE_WIDTH, &scene, t, period, 0.005, &mut rng);
        if let Some(b) = SyntheticOracle::tight_box(&r.pixels_of(HitLabel::Human(0)), factor) {
            images.push(json!({ "id": i, "file_name": format!("{i}_reflectivity.png"),
                                "width": NATIVE_WIDTH, "height": NATIVE_HEIGHT * factor }));
            boxes.push(json!({ "id": boxes.len() + 1, "image_id": i, "category_id": 1,
                               "bbox": [b.x, b.y, b.w, b.h], "area": b.w * b.h, "iscrowd": 0 }));
        }
        rendered.push(restagger(&r.frame)?);
    }
    write_recording(out, &rendered, &sensor)?;
    let coco = json!({
        "images": images,
        "annotations": boxes,
        "categories": [{ "id": 1, "name": "person" }],
    });
    let path = out.join("annotations.json");
    std::fs::write(&path, serde_json::to_string_pretty(&coco).expect("json")).map_err(|e| io_error(&path, e))?;
    println!("wrote {} frames ({} annotated) to {}", rendered.len(), boxes.len(), out.display());
    Ok(())
}

fn split_override(s: &str) -> Result<(&str, Value), CliError> {
    let (key, raw) = s
        .split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| CliError::Usage(format!("override {s:?} is not KEY=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key, value))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("cannot set {key}: {part} is not an object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    node.as_object_mut()
        .ok_or_else(|| CliError::Usage(format!("cannot set {key}")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

const SCENARIO_KEYS: [&str; 14] = [
    "name",
    "duration_s",
    "rates",
    "human_waypoints",
    "robot_waypoints",
    "noise_sigma_m",
    "seed",
    "ssm",
    "perception_mode",
    "perception",
    "phantom",
    "lidar",
    "link_radius_m",
    "sync_tolerance_s",
];

fn run_simulation(args: &SimulateArgs) -> Result<(), CliError> {
    let mut overrides = Vec::with_capacity(args.overrides.len());
    for s in &args.overrides {
        overrides.push(split_override(s)?);
    }
    let path = &args.scenario;
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Domain("scenario", format!("{}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Domain("scenario", format!("{}: not a JSON object", path.display())));
    }
    if let Some(seed) = args.seed {
        value["seed"] = json!(seed);
    }
    for (key, v) in overrides {
        let key = if key.contains('.') || SCENARIO_KEYS.contains(&key) { key.to_string() } else { format!("ssm.{key}") };
        set_path(&mut value, &key, v)?;
    }
    let scn = Scenario::from_value(value)
        .map_err(|e| CliError::Domain("scenario", format!("{}: {e}", path.display())))?;
    let log = simulate(&scn, &scn.ssm)?;
    let summary = export(&log, &args.out)?;
    tracing::info!(ticks = summary.ticks, out = %args.out.display(), "simulation written");
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    Ok(())
}

fn extract(
    frames: &Path,
    annotations: &Path,
    out: &Path,
    background: Option<&Path>,
    seed: Option<u64>,
    overrides: &[String],
) -> Result<(), CliError> {
    let mut cfg_value = serde_json::to_value(PerceptionConfig::default()).expect("json");
    for s in overrides {
        let (key, v) = split_override(s)?;
        if cfg_value.get(key).is_none() {
            return Err(CliError::Usage(format!("unknown perception setting {key:?}")));
        }
        cfg_value[key] = v;
    }
    let mut cfg: PerceptionConfig =
        serde_json::from_value(cfg_value).map_err(|e| CliError::Usage(format!("perception override: {e}")))?;
    if let Some(seed) = seed {
        cfg.plane_seed = seed;
    }
    let recording = Recording::open(frames)?;
    let sensor = recording.meta().sensor_model();
    let boxes = load_annotations(annotations)?;

    let bg_recording = match background {
        Some(dir) => Recording::open(dir)?,
        None => recording.clone(),
    };
    let n = cfg.background_frames.min(bg_recording.len());
    let bg_frames = (0..n).map(|i| bg_recording.frame(i)).collect::<Result<Vec<_>, _>>()?;
    let bg = build_background(&bg_frames, n, sensor.range_unit_m)?;

    std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let (mut written, mut missing) = (0, 0);
    for (&i, frame_boxes) in &boxes.by_frame {
        if i >= recording.len() {
            tracing::warn!(frame = i, "annotation refers to a frame beyond the recording");
            continue;
        }
        let frame = recording.frame(i)?;
        let mut rows = String::from("x,y,z,row,col\n");
        let mut found = false;
        for bbox in frame_boxes {
            match extract_human(&frame, &sensor, bbox, &bg, &cfg)? {
                Extraction::Human(h) => {
                    found = true;
                    for p in &h.points.points {
                        let q = p.position;
                        rows.push_str(&format!("{},{},{},{},{}\n", q.x, q.y, q.z, p.row, p.col));
                    }
                }
                Extraction::NotFound(stage) => tracing::info!(frame = i, ?stage, "no human in box"),
            }
        }
        if !found {
            missing += 1;
            continue;
        }
        let path = out.join(format!("{i}.csv"));
        std::fs::write(&path, rows).map_err(|e| io_error(&path, e))?;
        written += 1;
    }
    println!("extracted humans in {written} frames ({missing} without a human) into {}", out.display());
    Ok(())
}
