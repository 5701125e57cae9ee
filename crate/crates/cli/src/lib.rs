//! `segtrack` command-line front-end.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! process exit code: 0 on success, 1 when the data or a computation is at
//! fault, 2 when the invocation itself is wrong.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, BufReader, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use segtrack_core::analytics::{
    emit_report, interaction_events, plot_trajectories, trajectory_stats_all, zone_occupancy, InteractionCriterion,
    MotRow, ReportFormat, ReportRows, ZoneDefinition, DEFAULT_HUDDLE_IOU,
};
use segtrack_core::formats::{
    coco_to_detections, labelme_to_coco, parse_labelme, parse_predictions, read_coco, sample_frames, split_dataset,
    write_coco, write_predictions, SamplingStrategy, DEFAULT_KEYPOINT_RADIUS, DEFAULT_SPLIT_RATIO,
};
use segtrack_core::metrics::{evaluate_coco_ap, evaluate_mot, event_rates, Denominator, MotConfig, DEFAULT_MAX_DETS};
use segtrack_core::synth::{generate_scenario, perturb, PerturbationConfig, ScenarioConfig};
use segtrack_core::tracking::{
    assemble_tracks, assemble_tracks_in, filter_by_score, interpolate_gaps, read_tracks_csv, resolve_all_duplicates,
    write_tracks_csv, DEFAULT_SCORE_THRESHOLD,
};
use segtrack_core::{CocoDataset, DetectionRecord, Point2D, Polygon, Track};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "segtrack",
    version,
    about = "Multi-animal instance segmentation tracking toolkit"
)]
struct Cli {
    /// Overwrite output files that already exist.
    #[arg(long, global = true)]
    force: bool,
    /// Maximum number of worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a directory of labelme JSON files into one COCO dataset.
    Convert(ConvertArgs),
    /// Split a COCO dataset into train and validation parts.
    Split(SplitArgs),
    /// Choose frame indices to annotate.
    Sample(SampleArgs),
    /// Build per-identity tracks from prediction JSON-Lines.
    Track(TrackArgs),
    /// CLEAR-MOT evaluation of predictions against COCO ground truth.
    EvalMot(EvalMotArgs),
    /// COCO-style mask AP per category.
    EvalCoco(EvalCocoArgs),
    /// Per-track movement statistics, zone occupancy and interactions.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic scene with injected detection errors.
    Synth(SynthArgs),
    /// Draw tracks as an SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    labelme_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Radius in pixels of the region drawn around point annotations.
    #[arg(long, default_value_t = DEFAULT_KEYPOINT_RADIUS, value_parser = positive)]
    keypoint_radius: f64,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: PathBuf,
    /// Share of images assigned to the training part.
    #[arg(long, default_value_t = DEFAULT_SPLIT_RATIO, value_parser = open_unit)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    Uniform,
    Random,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Number of frames in the video.
    #[arg(long)]
    n_total: u64,
    /// Number of frames to pick.
    #[arg(long)]
    k: u64,
    #[arg(long, value_enum, default_value_t = Strategy::Uniform)]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrackArgs {
    #[arg(long)]
    pred: PathBuf,
    /// Tracks CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD, value_parser = closed_unit)]
    score_threshold: f64,
    /// Fill interior gaps of up to this many frames by interpolation.
    #[arg(long, default_value_t = 0)]
    max_gap: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DenominatorArg {
    GtObjects,
    Frames,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
struct EvalMotArgs {
    /// Ground truth as a COCO dataset; category names are identities.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = half_open_unit)]
    iou: f64,
    #[arg(long, value_enum, default_value_t = DenominatorArg::GtObjects)]
    denominator: DenominatorArg,
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD, value_parser = closed_unit)]
    score_threshold: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Name for the report row; defaults to the ground-truth file stem.
    #[arg(long)]
    name: Option<String>,
    /// Also write the per-frame match log as JSON.
    #[arg(long)]
    frame_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalCocoArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_DETS, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    max_dets: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CriterionArg {
    MaskIou,
    CentroidDistance,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Tracks CSV as written by `track`.
    #[arg(long, required_unless_present = "pred", conflicts_with = "pred")]
    tracks: Option<PathBuf>,
    /// Prediction JSON-Lines; keeps masks, which mask-IoU interactions need.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD, value_parser = closed_unit)]
    score_threshold: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    px_per_unit: f64,
    /// JSON list of `{"name": ..., "points": [[x, y], ...]}` zones.
    #[arg(long, requires = "events_out")]
    zones: Option<PathBuf>,
    /// Detect pairwise interactions with this criterion.
    #[arg(long, value_enum, requires = "events_out")]
    interactions: Option<CriterionArg>,
    /// IoU (mask-iou, default 0.1) or pixel distance (centroid-distance).
    #[arg(long, value_parser = positive)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    min_duration: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Statistics table; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file for zone occupancy and interaction events.
    #[arg(long)]
    events_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 3)]
    animals: usize,
    #[arg(long, default_value_t = 500)]
    frames: u64,
    #[arg(long, default_value_t = 320)]
    width: u32,
    #[arg(long, default_value_t = 240)]
    height: u32,
    #[arg(long, default_value_t = 10.0, value_parser = positive)]
    radius: f64,
    #[arg(long, default_value_t = 4.0, value_parser = positive)]
    speed: f64,
    #[arg(long, default_value_t = 0.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    p_fn: f64,
    #[arg(long, default_value_t = 0.0)]
    p_fp: f64,
    #[arg(long, default_value_t = 0)]
    n_ids: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed for the error injection; defaults to `--seed`.
    #[arg(long)]
    perturb_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    tracks: PathBuf,
    #[arg(long, default_value_t = 640, value_parser = clap::value_parser!(u32).range(1..))]
    width: u32,
    #[arg(long, default_value_t = 480, value_parser = clap::value_parser!(u32).range(1..))]
    height: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be greater than 0"))
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{s} must lie strictly between 0 and 1"))
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be in (0, 1]"))
    }
}

fn closed_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{s} must be in [0, 1]"))
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn at(path: &Path) -> impl Fn(segtrack_core::Error) -> CliError + '_ {
    move |e| CliError::Domain(format!("{}: {e}", path.display()))
}

fn plain(e: segtrack_core::Error) -> CliError {
    CliError::Domain(e.to_string())
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn load_coco(path: &Path) -> CliResult<CocoDataset> {
    read_coco(&read_file(path)?).map_err(at(path))
}

fn load_predictions(path: &Path) -> CliResult<Vec<DetectionRecord>> {
    let f = fs::File::open(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    parse_predictions(BufReader::new(f)).map_err(at(path))
}

/// Refuses to touch existing files unless `--force` was given. Checked for
/// every output before any work starts.
fn ensure_writable<'a>(paths: impl IntoIterator<Item = &'a Path>, force: bool) -> CliResult<()> {
    for p in paths {
        if !force && p.exists() {
            return Err(CliError::Usage(format!(
                "{} exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Domain(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Domain(format!("standard output: {e}")))
        }
    }
}

fn colors_enabled() -> bool {
    io::stderr().is_terminal() && std::env::var("SEGTRACK_COLORS").map_or(true, |v| v != "off")
}

fn note(msg: &str) {
    eprintln!("{msg}");
}

fn report_error(e: &CliError) {
    let tag = if colors_enabled() {
        "\x1b[1;31merror\x1b[0m"
    } else {
        "error"
    };
    eprintln!("{tag}: {e}");
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.jobs {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global();
    }
    match dispatch(cli.command, cli.force) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(&e);
            match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Domain(_) => EXIT_DOMAIN,
            }
        }
    }
}

fn dispatch(cmd: Command, force: bool) -> CliResult<()> {
    match cmd {
        Command::Convert(a) => convert(a, force),
        Command::Split(a) => split(a, force),
        Command::Sample(a) => sample(a, force),
        Command::Track(a) => track(a, force),
        Command::EvalMot(a) => eval_mot(a, force),
        Command::EvalCoco(a) => eval_coco(a, force),
        Command::Analyze(a) => analyze(a, force),
        Command::Synth(a) => synth(a, force),
        Command::Plot(a) => plot(a, force),
    }
}

fn convert(a: ConvertArgs, force: bool) -> CliResult<()> {
    ensure_writable([a.out.as_path()], force)?;
    let entries =
        fs::read_dir(&a.labelme_dir).map_err(|e| CliError::Domain(format!("{}: {e}", a.labelme_dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("json")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Domain(format!("{}: no .json files", a.labelme_dir.display())));
    }
    let docs = files
        .iter()
        .map(|p| parse_labelme(&read_file(p)?).map_err(at(p)))
        .collect::<CliResult<Vec<_>>>()?;
    let ds = labelme_to_coco(&docs, a.keypoint_radius).map_err(at(&a.labelme_dir))?;
    write_file(&a.out, &write_coco(&ds).map_err(plain)?)?;
    note(&format!(
        "{}: {} images, {} annotations, {} categories",
        a.out.display(),
        ds.images.len(),
        ds.annotations.len(),
        ds.categories.len()
    ));
    Ok(())
}

fn split(a: SplitArgs, force: bool) -> CliResult<()> {
    ensure_writable([a.train.as_path(), a.val.as_path()], force)?;
    let ds = load_coco(&a.input)?;
    let parts = split_dataset(&ds, a.ratio, a.seed).map_err(at(&a.input))?;
    write_file(&a.train, &write_coco(&parts.train).map_err(plain)?)?;
    write_file(&a.val, &write_coco(&parts.val).map_err(plain)?)?;
    note(&format!(
        "train {} images, val {} images",
        parts.train.images.len(),
        parts.val.images.len()
    ));
    Ok(())
}

fn sample(a: SampleArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref(), force)?;
    let strategy = match a.strategy {
        Strategy::Uniform => SamplingStrategy::Uniform,
        Strategy::Random => SamplingStrategy::Random { seed: a.seed },
    };
    let frames = sample_frames(a.n_total, a.k, strategy).map_err(plain)?;
    let text: String = frames.iter().map(|f| format!("{f}\n")).collect();
    emit(a.out.as_deref(), text.as_bytes())
}

fn prediction_tracks(path: &Path, score_threshold: f64) -> CliResult<Vec<Track>> {
    let dets = load_predictions(path)?;
    let kept = resolve_all_duplicates(&filter_by_score(&dets, score_threshold));
    assemble_tracks(&kept).map_err(at(path))
}

fn track(a: TrackArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref(), force)?;
    let tracks: Vec<Track> = prediction_tracks(&a.pred, a.score_threshold)?
        .iter()
        .map(|t| interpolate_gaps(t, a.max_gap))
        .collect();
    emit(a.out.as_deref(), &write_tracks_csv(&tracks).map_err(plain)?)
}

fn gt_tracks(path: &Path, ds: &CocoDataset) -> CliResult<Vec<Track>> {
    let frames = ds.frame_indices();
    let (Some(lo), Some(hi)) = (frames.values().min(), frames.values().max()) else {
        return Err(CliError::Domain(format!("{}: dataset has no images", path.display())));
    };
    let dets = coco_to_detections(ds).map_err(at(path))?;
    assemble_tracks_in(&dets, *lo..=*hi).map_err(at(path))
}

fn eval_mot(a: EvalMotArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref().into_iter().chain(a.frame_log.as_deref()), force)?;
    let ds = load_coco(&a.gt)?;
    let gt = gt_tracks(&a.gt, &ds)?;
    let pred = prediction_tracks(&a.pred, a.score_threshold)?;
    let cfg = MotConfig {
        iou_threshold: a.iou,
        denominator: match a.denominator {
            DenominatorArg::GtObjects => Denominator::GtObjects,
            DenominatorArg::Frames => Denominator::Frames,
        },
    };
    let report = evaluate_mot(&gt, &pred, &cfg).map_err(plain)?;
    let name = a.name.unwrap_or_else(|| {
        a.gt.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let row = MotRow::from_report(name, &report);
    if let Some(p) = &a.frame_log {
        let bytes = serde_json::to_vec_pretty(&report.per_frame_log).map_err(|e| CliError::Domain(e.to_string()))?;
        write_file(p, &bytes)?;
    }
    let rate = |n: u64| {
        event_rates(n, report.n_frames)
            .map(|r| format!("{r:.4}%"))
            .unwrap_or_else(|_| "-".into())
    };
    note(&format!(
        "per frame: ids {}, fn {}, fp {}",
        rate(report.id_switches),
        rate(report.false_negatives),
        rate(report.false_positives)
    ));
    emit(a.out.as_deref(), &emit_report(ReportRows::Mot(&[row]), a.format.into()))
}

fn eval_coco(a: EvalCocoArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref(), force)?;
    let ds = load_coco(&a.gt)?;
    let preds = load_predictions(&a.pred)?;
    let report = evaluate_coco_ap(&ds, &preds, a.max_dets).map_err(at(&a.pred))?;
    emit(a.out.as_deref(), &emit_report(ReportRows::Ap(&report), a.format.into()))
}

#[derive(Deserialize)]
struct ZoneFile {
    name: String,
    points: Vec<[f64; 2]>,
}

fn load_zones(path: &Path) -> CliResult<Vec<ZoneDefinition>> {
    let raw: Vec<ZoneFile> =
        serde_json::from_slice(&read_file(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    raw.into_iter()
        .map(|z| {
            let region = Polygon::new(z.points.iter().map(|p| Point2D::new(p[0], p[1])).collect())
                .map_err(|e| CliError::Domain(format!("{}: zone {:?}: {e}", path.display(), z.name)))?;
            Ok(ZoneDefinition { name: z.name, region })
        })
        .collect()
}

fn analyze(a: AnalyzeArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref().into_iter().chain(a.events_out.as_deref()), force)?;
    let criterion = a.interactions.map(|c| match c {
        CriterionArg::MaskIou => InteractionCriterion::MaskIou,
        CriterionArg::CentroidDistance => InteractionCriterion::CentroidDistance,
    });
    let threshold = match (criterion, a.threshold) {
        (Some(InteractionCriterion::MaskIou), t) => {
            let t = t.unwrap_or(DEFAULT_HUDDLE_IOU);
            if t > 1.0 {
                return Err(CliError::Usage(format!(
                    "--threshold {t} must be at most 1 for mask-iou"
                )));
            }
            t
        }
        (Some(InteractionCriterion::CentroidDistance), Some(t)) => t,
        (Some(InteractionCriterion::CentroidDistance), None) => {
            return Err(CliError::Usage(
                "--interactions centroid-distance needs --threshold".into(),
            ))
        }
        (None, _) => 0.0,
    };
    let zones = a.zones.as_deref().map(load_zones).transpose()?;

    let tracks = match (&a.tracks, &a.pred) {
        (Some(p), _) => read_tracks_csv(&read_file(p)?).map_err(at(p))?,
        (None, Some(p)) => prediction_tracks(p, a.score_threshold)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let stats = trajectory_stats_all(&tracks, a.px_per_unit).map_err(plain)?;

    if let Some(events_path) = &a.events_out {
        let mut doc = serde_json::Map::new();
        if let Some(zones) = &zones {
            let occ: BTreeMap<&str, _> = tracks
                .iter()
                .map(|t| (t.label.as_str(), zone_occupancy(t, zones)))
                .collect();
            doc.insert(
                "occupancy".into(),
                serde_json::to_value(occ).map_err(|e| CliError::Domain(e.to_string()))?,
            );
        }
        if let Some(c) = criterion {
            let mut events = Vec::new();
            for (i, ta) in tracks.iter().enumerate() {
                for tb in &tracks[i + 1..] {
                    events.extend(interaction_events(ta, tb, c, threshold, a.min_duration).map_err(plain)?);
                }
            }
            doc.insert(
                "interactions".into(),
                serde_json::to_value(events).map_err(|e| CliError::Domain(e.to_string()))?,
            );
        }
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Domain(e.to_string()))?;
        bytes.push(b'\n');
        write_file(events_path, &bytes)?;
    }
    emit(
        a.out.as_deref(),
        &emit_report(ReportRows::Stats(&stats), a.format.into()),
    )
}

fn synth(a: SynthArgs, force: bool) -> CliResult<()> {
    let gt_path = a.out_dir.join("gt.json");
    let pred_path = a.out_dir.join("preds.jsonl");
    let log_path = a.out_dir.join("injections.json");
    ensure_writable([gt_path.as_path(), pred_path.as_path(), log_path.as_path()], force)?;
    let scenario = generate_scenario(&ScenarioConfig {
        n_animals: a.animals,
        n_frames: a.frames,
        arena: (a.width, a.height),
        body_radius: a.radius,
        speed_max: a.speed,
        min_separation: a.separation,
        seed: a.seed,
    })
    .map_err(plain)?;
    let (preds, log) = perturb(
        &scenario,
        &PerturbationConfig {
            p_fn: a.p_fn,
            p_fp: a.p_fp,
            n_ids: a.n_ids,
            centroid_noise: a.noise,
            seed: a.perturb_seed.unwrap_or(a.seed),
        },
    )
    .map_err(plain)?;
    write_file(&gt_path, &write_coco(&scenario.dataset).map_err(plain)?)?;
    write_file(&pred_path, &write_predictions(&preds))?;
    let mut log_bytes = serde_json::to_vec_pretty(&log).map_err(|e| CliError::Domain(e.to_string()))?;
    log_bytes.push(b'\n');
    write_file(&log_path, &log_bytes)?;
    note(&format!(
        "{}: {} frames, {} detections; injected fn {}, fp {}, swaps {}",
        a.out_dir.display(),
        a.frames,
        preds.len(),
        log.fn_events.len(),
        log.fp_events.len(),
        log.ids_events.len()
    ));
    Ok(())
}

fn plot(a: PlotArgs, force: bool) -> CliResult<()> {
    ensure_writable(a.out.as_deref(), force)?;
    let tracks = read_tracks_csv(&read_file(&a.tracks)?).map_err(at(&a.tracks))?;
    emit(
        a.out.as_deref(),
        &plot_trajectories(&tracks, a.width, a.height).map_err(plain)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn float_parsers() {
        assert!(open_unit("0.8").is_ok() && open_unit("1").is_err() && open_unit("0").is_err());
        assert!(half_open_unit("1").is_ok() && half_open_unit("0").is_err());
        assert!(positive("nan").is_err() && positive("-1").is_err() && positive("x").is_err());
        assert!(closed_unit("0").is_ok() && closed_unit("1.01").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["segtrack", "--version"]), EXIT_OK);
        assert_eq!(run(["segtrack", "eval-mot", "--bogus"]), EXIT_USAGE);
        assert_eq!(
            run(["segtrack", "split", "--input", "a", "--train", "b", "--val", "c", "--ratio", "2"]),
            EXIT_USAGE
        );
    }
}
