use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use motpipe_cli::commands::{
    cmd_benchmark, cmd_evaluate, cmd_generate, cmd_track, BenchmarkOptions, EvaluateOptions,
    GenerateOptions, TrackOptions,
};
use motpipe_cli::config::Overrides;

/// Multi-object tracking pipeline for static-camera detections.
#[derive(Parser)]
#[command(name = "motpipe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOverrides {
    /// Tracker config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weight of the normalized-distance cost term.
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight of the fingerprint cost term.
    #[arg(long)]
    beta: Option<f64>,
    /// Association gate: matches with cost strictly above it are rejected.
    #[arg(long)]
    gate: Option<f64>,
    /// Frames a track may coast before deletion.
    #[arg(long)]
    timeout: Option<u32>,
    /// Frames buffered per fingerprint batch.
    #[arg(long)]
    buffer: Option<u32>,
    /// Minimum detection confidence; lower detections are dropped.
    #[arg(long = "min-conf")]
    min_conf: Option<f64>,
}

impl CommonOverrides {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            beta: self.beta,
            gate: self.gate,
            timeout: self.timeout,
            buffer: self.buffer,
            min_conf: self.min_conf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Track objects in a detection file or MOT sequence directory.
    Track {
        /// Detection file (MOT format). Defaults to <sequence>/det/det.txt.
        #[arg(long)]
        detections: Option<PathBuf>,
        /// MOT sequence directory containing seqinfo.ini.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Frame image directory (overrides the seqinfo image directory).
        #[arg(long)]
        images: Option<PathBuf>,
        /// Precomputed fingerprint sidecar file.
        #[arg(long)]
        fingerprints: Option<PathBuf>,
        /// Output result file.
        #[arg(long, short)]
        output: PathBuf,
        /// Image width in pixels (detection-file input only).
        #[arg(long)]
        width: Option<u32>,
        /// Image height in pixels (detection-file input only).
        #[arg(long)]
        height: Option<u32>,
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Score a result file against ground truth (CLEAR-MOT and IDF1).
    Evaluate {
        /// Ground-truth file (MOT format).
        #[arg(long = "gt")]
        ground_truth: PathBuf,
        /// Tracker result file.
        #[arg(long)]
        results: PathBuf,
        /// IoU threshold for a valid correspondence.
        #[arg(long = "iou", default_value_t = 0.5)]
        iou_threshold: f64,
    },
    /// Generate a synthetic MOT sequence from a scenario file.
    Generate {
        /// Scenario description (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Output sequence directory.
        #[arg(long, short)]
        output: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also render frame images.
        #[arg(long)]
        images: bool,
    },
    /// Measure pipeline throughput on a synthetic scene.
    Benchmark {
        #[arg(long, default_value_t = 600)]
        frames: u32,
        /// Ground-truth targets (= detections) per frame.
        #[arg(long = "detections", default_value_t = 50)]
        detections_per_frame: u32,
        #[arg(long, default_value_t = 3)]
        repetitions: u32,
        /// Also sweep embedding time over detection counts.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        common: CommonOverrides,
    },
}

fn run(cli: Cli) -> Result<(), motpipe_cli::CliError> {
    match cli.command {
        Command::Track {
            detections,
            sequence,
            images,
            fingerprints,
            output,
            width,
            height,
            common,
        } => {
            let summary = cmd_track(&TrackOptions {
                detections,
                sequence,
                images,
                fingerprints,
                config: common.config.clone(),
                output,
                width,
                height,
                overrides: common.overrides(),
            })?;
            println!("{summary}");
        }
        Command::Evaluate { ground_truth, results, iou_threshold } => {
            let summary = cmd_evaluate(&EvaluateOptions { ground_truth, results, iou_threshold })?;
            println!("{summary}");
        }
        Command::Generate { scenario, output, seed, images } => {
            let summary = cmd_generate(&GenerateOptions { scenario, output, seed, images })?;
            println!("{summary}");
        }
        Command::Benchmark { frames, detections_per_frame, repetitions, sweep, common } => {
            let summary = cmd_benchmark(&BenchmarkOptions {
                frames,
                detections_per_frame,
                repetitions,
                sweep,
                config: common.config.clone(),
                overrides: common.overrides(),
            })?;
            println!("{summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
