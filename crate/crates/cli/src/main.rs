//! `vtspot`: evaluation, association and annotation tooling for video text
//! tracking and spotting.

mod error;
mod loss;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vtspot_core::annotations::{
    annotation_to_string, interpolate, load_annotation, load_detections, sample, save_annotation,
    save_detections, VideoAnnotation,
};
use vtspot_core::exec::with_jobs;
use vtspot_core::linker::{link, LinkerConfig};
use vtspot_core::matching::CostWeights;
use vtspot_core::metrics::{evaluate, evaluate_corpus, CorpusReport, EvalOptions, Task, VideoReport};
use vtspot_core::synth::{generate, Motion, SynthConfig};
use vtspot_core::tracker::{run, TrackerConfig};
use vtspot_core::Execution;

use error::CliError;

#[derive(Parser)]
#[command(name = "vtspot", version, about = "Video text tracking and spotting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Associate per-frame detections into trajectories.
    Track(TrackArgs),
    /// Fill the frames between sampled keyframes.
    Interpolate(InterpolateArgs),
    /// Keep every k-th frame of a dense annotation.
    Sample(SampleArgs),
    /// Set-prediction loss between ground truth and scored detections.
    Loss(LossArgs),
    /// Generate a synthetic video with ground truth and noisy detections.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Detection,
    Tracking,
    Spotting,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Detection => Task::Detection,
            TaskArg::Tracking => Task::Tracking,
            TaskArg::Spotting => Task::Spotting,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground-truth annotation file.
    #[arg(required_unless_present = "gt_dir", conflicts_with_all = ["gt_dir", "pred_dir"])]
    gt: Option<PathBuf>,
    /// Prediction annotation file.
    #[arg(required_unless_present = "gt_dir")]
    pred: Option<PathBuf>,
    /// Directory of ground-truth files; predictions are paired by file name.
    #[arg(long, requires = "pred_dir")]
    gt_dir: Option<PathBuf>,
    #[arg(long, requires = "gt_dir")]
    pred_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tracking")]
    task: TaskArg,
    /// IoU needed for a detection or CLEAR match.
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// IoU below which a frame does not count towards identity overlap.
    #[arg(long)]
    id_iou_floor: Option<f64>,
    #[arg(long)]
    case_insensitive: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for per-video evaluation.
    #[arg(long, env = "VTSPOT_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    TransformerAssoc,
    Linker,
}

#[derive(Args)]
struct TrackArgs {
    /// Detections file.
    detections: PathBuf,
    #[arg(long, value_enum, default_value = "transformer-assoc")]
    method: Method,
    /// Association IoU threshold [default: 0.5, or 0.3 for the linker].
    #[arg(long)]
    iou: Option<f64>,
    /// Frames a track survives without a match.
    #[arg(long, default_value_t = 0)]
    max_age: u32,
    /// Detections scoring below this are ignored.
    #[arg(long, default_value_t = 0.0)]
    min_score: f64,
    /// Linker: how many past frames a track may reach back.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Linker: largest normalized edit distance between linked transcriptions.
    #[arg(long, default_value_t = 0.3)]
    max_edit: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterpolateArgs {
    /// Sampled annotation file.
    input: PathBuf,
    /// Frame count of the dense output [default: last sampled frame + 1].
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Dense annotation file.
    input: PathBuf,
    #[arg(long, short, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LossArgs {
    /// Ground-truth annotation file.
    gt: PathBuf,
    /// Detections file; each score is read as the text probability.
    pred: PathBuf,
    /// Comma-separated w_cls,w_l1,w_giou,w_angle.
    #[arg(long, default_value = "1,5,2,2")]
    weights: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    n_objects: usize,
    #[arg(long, default_value_t = 30)]
    n_frames: usize,
    /// static, constant_velocity or rotate.
    #[arg(long, default_value = "constant_velocity")]
    motion: String,
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synth")]
    video_id: String,
    /// Where to write the ground-truth annotation.
    #[arg(long)]
    gt_out: PathBuf,
    /// Where to write the detections.
    #[arg(long)]
    dets_out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Track(a) => cmd_track(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Loss(a) => cmd_loss(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vtspot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Schema(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn emit_annotation(ann: &VideoAnnotation, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => save_annotation(ann, p).map_err(|e| CliError::from(e).context(p.display())),
        None => emit(&annotation_to_string(ann), None),
    }
}

fn load(path: &Path) -> Result<VideoAnnotation, CliError> {
    load_annotation(path).map_err(|e| CliError::from(e).context(path.display()))
}

fn annotation_files(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::Schema(format!("{}: {e}", dir.display())))? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type()?.is_file() && (name.ends_with(".json") || name.ends_with(".json.gz")) {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let mut opts = EvalOptions { iou_threshold: a.iou, case_insensitive: a.case_insensitive, ..Default::default() };
    if let Some(floor) = a.id_iou_floor {
        opts.id_iou_floor = floor;
    }
    let task = Task::from(a.task);
    let text = match (&a.gt_dir, &a.pred_dir, &a.gt, &a.pred) {
        (Some(gd), Some(pd), _, _) => {
            let names = annotation_files(gd)?;
            if names.is_empty() {
                return Err(CliError::Usage(format!("no annotation files in {}", gd.display())));
            }
            let mut pairs = Vec::with_capacity(names.len());
            for n in &names {
                let pred_path = pd.join(n);
                if !pred_path.is_file() {
                    return Err(CliError::Semantic(format!("no prediction file {}", pred_path.display())));
                }
                pairs.push((load(&gd.join(n))?, load(&pred_path)?));
            }
            let report = match a.jobs {
                Some(j) => with_jobs(j as usize, || evaluate_corpus(&pairs, task, &opts, Execution::for_jobs(j as usize))),
                None => evaluate_corpus(&pairs, task, &opts, Execution::Parallel),
            }?;
            match a.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv()?,
            }
        }
        (_, _, Some(g), Some(p)) => {
            let (gt, pred) = (load(g)?, load(p)?);
            let report = evaluate(&gt, &pred, task, &opts)?;
            match a.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("reports serialize") + "\n",
                Format::Csv => CorpusReport {
                    videos: vec![VideoReport {
                        video_id: gt.meta.video_id.clone(),
                        scenario: gt.meta.scenario.clone(),
                        report: report.clone(),
                    }],
                    aggregate: report,
                }
                .to_csv()?,
            }
        }
        _ => return Err(CliError::Usage("give GT and PRED files, or --gt-dir and --pred-dir".into())),
    };
    emit(&text, a.out.as_deref())
}

fn cmd_track(a: TrackArgs) -> Result<(), CliError> {
    let set = load_detections(&a.detections).map_err(|e| CliError::from(e).context(a.detections.display()))?;
    let trajectories = match a.method {
        Method::TransformerAssoc => {
            let cfg = TrackerConfig { iou_threshold: a.iou.unwrap_or(0.5), max_age: a.max_age, min_score: a.min_score };
            run(&set.frames, cfg)?
        }
        Method::Linker => {
            let cfg = LinkerConfig {
                window: a.window,
                iou_threshold: a.iou.unwrap_or(LinkerConfig::default().iou_threshold),
                max_norm_edit: a.max_edit,
            };
            link(&set.frames, cfg)?
        }
    };
    let ann = VideoAnnotation::from_trajectories(set.meta.clone(), &trajectories)?;
    emit_annotation(&ann, a.out.as_deref())
}

fn cmd_sample(a: SampleArgs) -> Result<(), CliError> {
    let dense = load(&a.input)?;
    let sampled = sample(&dense, a.k as usize)?;
    emit_annotation(sampled.annotation(), a.out.as_deref())
}

fn cmd_interpolate(a: InterpolateArgs) -> Result<(), CliError> {
    let sparse = load(&a.input)?;
    let frame_count = match a.frames {
        Some(0) => return Err(CliError::Usage("--frames must be at least 1".into())),
        Some(n) => n,
        None => {
            let n = sparse.frames().keys().next_back().map_or(sparse.meta.frame_count, |&f| f + 1);
            eprintln!("vtspot: warning: --frames not given, using {n} (last sampled frame + 1)");
            n
        }
    };
    let dense = interpolate(&sparse, frame_count)?;
    emit_annotation(&dense, a.out.as_deref())
}

fn parse_weights(s: &str) -> Result<CostWeights, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--weights {s:?}: {e}")))?;
    match parts[..] {
        [cls, l1, giou, angle] => Ok(CostWeights::new(cls, l1, giou, angle)?),
        _ => Err(CliError::Usage(format!("--weights needs four values, got {}", parts.len()))),
    }
}

fn cmd_loss(a: LossArgs) -> Result<(), CliError> {
    let w = parse_weights(&a.weights)?;
    let gt = load(&a.gt)?;
    let dets = load_detections(&a.pred).map_err(|e| CliError::from(e).context(a.pred.display()))?;
    let report = loss::set_loss_report(&gt, &dets, &w)?;
    emit(&(serde_json::to_string_pretty(&report).expect("json values serialize") + "\n"), a.out.as_deref())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let cfg = SynthConfig {
        n_objects: a.n_objects,
        n_frames: a.n_frames,
        motion: a.motion.parse::<Motion>()?,
        noise_sigma: a.noise_sigma,
        drop_prob: a.drop_prob,
        seed: a.seed,
        video_id: a.video_id,
    };
    let v = generate(&cfg)?;
    save_annotation(&v.ground_truth, &a.gt_out).map_err(|e| CliError::from(e).context(a.gt_out.display()))?;
    save_detections(&v.detections, &a.dets_out).map_err(|e| CliError::from(e).context(a.dets_out.display()))?;
    Ok(())
}
