//! Implementations of the four `motpipe` subcommands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use motpipe_core::fingerprint::{extract_patch, FingerprintProvider, HistogramEmbedder};
use motpipe_core::geometry::ImageGeometry;
use motpipe_core::metrics::{evaluate, track_set_from_ground_truth, TrackSet};
use motpipe_core::mot_io::{
    load_frame_image, read_detections, read_fingerprint_sidecar, read_ground_truth, read_seqinfo,
    write_results,
};
use motpipe_core::synth::{generate, lanes_scenario, write_scene, ScenarioSpec};
use motpipe_core::tracker::{run_stream, StreamDetection, Tracker};

use crate::config::{resolve, Overrides};
use crate::CliError;

// --- track ---------------------------------------------------------------

#[derive(Debug, Default)]
pub struct TrackOptions {
    pub detections: Option<PathBuf>,
    pub sequence: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub fingerprints: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub output: PathBuf,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub overrides: Overrides,
}

#[derive(Debug)]
pub struct TrackSummary {
    pub frames: u64,
    pub detections: u64,
    pub tracks_created: u64,
    pub tracks_deleted: u64,
    pub embedder_evaluations: u64,
    pub wall: Duration,
    pub ingest: Duration,
    pub embed: Duration,
    pub associate: Duration,
    pub update: Duration,
    pub write: Duration,
    pub fingerprint_source: &'static str,
    pub provenance: Vec<String>,
}

impl TrackSummary {
    pub fn fps(&self) -> f64 {
        self.frames as f64 / self.wall.as_secs_f64().max(1e-9)
    }
}

impl fmt::Display for TrackSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration:")?;
        for line in &self.provenance {
            writeln!(f, "  {line}")?;
        }
        writeln!(f, "fingerprints: {}", self.fingerprint_source)?;
        writeln!(f, "frames: {}", self.frames)?;
        writeln!(f, "detections: {}", self.detections)?;
        writeln!(f, "tracks created: {}", self.tracks_created)?;
        writeln!(f, "tracks deleted: {}", self.tracks_deleted)?;
        writeln!(f, "embedder evaluations: {}", self.embedder_evaluations)?;
        writeln!(
            f,
            "stage times: ingest {:.3}s, embed {:.3}s, associate {:.3}s, update {:.3}s, write {:.3}s",
            self.ingest.as_secs_f64(),
            self.embed.as_secs_f64(),
            self.associate.as_secs_f64(),
            self.update.as_secs_f64(),
            self.write.as_secs_f64(),
        )?;
        write!(f, "wall time: {:.3}s ({:.1} frames/s)", self.wall.as_secs_f64(), self.fps())
    }
}

/// Runs the tracker over a detection file or MOT sequence directory and
/// writes a MOT result file.
pub fn cmd_track(opts: &TrackOptions) -> Result<TrackSummary, CliError> {
    let wall_start = Instant::now();
    let resolved = resolve(opts.config.as_deref(), &opts.overrides)?;
    let mut provenance = resolved.provenance;

    // Input resolution: an explicit sequence directory supplies geometry,
    // frame count and default file locations; a bare detection file relies
    // on --width/--height.
    let (det_path, geometry, seq_frames, image_dir, im_ext) = match &opts.sequence {
        Some(seq) => {
            let info = read_seqinfo(&seq.join("seqinfo.ini"))?;
            let det = opts
                .detections
                .clone()
                .unwrap_or_else(|| seq.join("det").join("det.txt"));
            let images = opts.images.clone().unwrap_or_else(|| seq.join(&info.im_dir));
            let geometry = ImageGeometry::new(info.im_width as f64, info.im_height as f64);
            provenance.push(format!(
                "geometry = {}x{} (seqinfo)",
                info.im_width, info.im_height
            ));
            (det, geometry, info.seq_length, Some(images), info.im_ext)
        }
        None => {
            let det = opts.detections.clone().ok_or_else(|| {
                CliError::Config("either --sequence or --detections is required".into())
            })?;
            let width = opts.width.unwrap_or(1920);
            let height = opts.height.unwrap_or(1080);
            let source = if opts.width.is_some() && opts.height.is_some() {
                "flag"
            } else {
                "default"
            };
            provenance.push(format!("geometry = {width}x{height} ({source})"));
            (det, ImageGeometry::new(width as f64, height as f64), 0, opts.images.clone(), ".jpg".into())
        }
    };

    let ingest_start = Instant::now();
    let det_by_frame = read_detections(&det_path)?;
    let sidecar = match &opts.fingerprints {
        Some(path) => Some(read_fingerprint_sidecar(path)?),
        None => None,
    };
    let last_frame = det_by_frame
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .max(seq_frames);

    // Sidecar fingerprints win over image patches; images are only probed
    // when no sidecar was given.
    let use_images = sidecar.is_none() && image_dir.is_some();
    let mut stream: Vec<(u32, Vec<StreamDetection>)> = Vec::with_capacity(last_frame as usize);
    let mut fingerprint_source = "none (geometry only)";
    for frame in 1..=last_frame {
        let image = if use_images {
            load_frame_image(
                image_dir.as_ref().unwrap().parent().unwrap_or(Path::new(".")),
                image_dir
                    .as_ref()
                    .unwrap()
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "img1".into())
                    .as_str(),
                &im_ext,
                frame,
            )?
        } else {
            None
        };
        let empty = Vec::new();
        let records = det_by_frame.get(&frame).unwrap_or(&empty);
        let mut dets = Vec::with_capacity(records.len());
        for (index, rec) in records.iter().enumerate() {
            let fingerprint = sidecar
                .as_ref()
                .and_then(|(_, map)| map.get(&(frame, index as u32)))
                .cloned();
            if fingerprint.is_some() {
                fingerprint_source = "sidecar file";
            }
            // a box that misses the image entirely degrades to geometry-only
            let patch = image
                .as_ref()
                .and_then(|img| extract_patch(img, &rec.bbox).ok());
            if patch.is_some() {
                fingerprint_source = "image patches";
            }
            dets.push(StreamDetection {
                bbox: rec.bbox,
                confidence: rec.confidence,
                patch,
                fingerprint,
            });
        }
        stream.push((frame, dets));
    }
    let ingest = ingest_start.elapsed();

    let embedder = HistogramEmbedder::new(resolved.tracker.fingerprint_dim.max(12));
    let mut tracker = Tracker::new(resolved.tracker, geometry);
    let (results, times) = run_stream(stream, Some(&embedder), &mut tracker)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let write_start = Instant::now();
    write_results(&opts.output, &results)?;
    let write = write_start.elapsed();

    let stats = tracker.stats();
    Ok(TrackSummary {
        frames: stats.frames,
        detections: stats.detections,
        tracks_created: stats.tracks_created,
        tracks_deleted: stats.tracks_deleted,
        embedder_evaluations: embedder.evaluations(),
        wall: wall_start.elapsed(),
        ingest,
        embed: times.embed,
        associate: stats.associate_time,
        update: stats.update_time,
        write,
        fingerprint_source,
        provenance,
    })
}

// --- evaluate ------------------------------------------------------------

#[derive(Debug)]
pub struct EvaluateOptions {
    pub ground_truth: PathBuf,
    pub results: PathBuf,
    pub iou_threshold: f64,
}

#[derive(Debug)]
pub struct EvaluateSummary {
    pub report: motpipe_core::metrics::ScoreReport,
}

impl fmt::Display for EvaluateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.report.table())?;
        write!(f, "{}", self.report.csv_line())
    }
}

/// Scores a result file against ground truth with CLEAR-MOT and IDF1.
pub fn cmd_evaluate(opts: &EvaluateOptions) -> Result<EvaluateSummary, CliError> {
    if !(0.0..=1.0).contains(&opts.iou_threshold) {
        return Err(CliError::Config(format!(
            "iou threshold must be in [0,1], got {}",
            opts.iou_threshold
        )));
    }
    let gt_records = read_ground_truth(&opts.ground_truth)?;
    let gt = track_set_from_ground_truth(&gt_records);
    let hyp_records = read_ground_truth(&opts.results)?;
    let mut hyp: TrackSet = TrackSet::new();
    for r in &hyp_records {
        hyp.entry(r.frame).or_default().push((r.identity, r.bbox));
    }
    let report =
        evaluate(&gt, &hyp, opts.iou_threshold).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(EvaluateSummary { report })
}

// --- generate ------------------------------------------------------------

#[derive(Debug)]
pub struct GenerateOptions {
    pub scenario: PathBuf,
    pub output: PathBuf,
    pub seed: Option<u64>,
    pub images: bool,
}

#[derive(Debug)]
pub struct GenerateSummary {
    pub frames: u32,
    pub ground_truth_records: usize,
    pub detections: usize,
    pub output: PathBuf,
}

impl fmt::Display for GenerateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "wrote {} frames, {} ground-truth records, {} detections to {}",
            self.frames,
            self.ground_truth_records,
            self.detections,
            self.output.display()
        )
    }
}

/// Generates a synthetic MOT sequence directory from a scenario file.
pub fn cmd_generate(opts: &GenerateOptions) -> Result<GenerateSummary, CliError> {
    let text = std::fs::read_to_string(&opts.scenario)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", opts.scenario.display())))?;
    let mut spec: ScenarioSpec = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("scenario {}: {e}", opts.scenario.display())))?;
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let scene = generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    write_scene(&opts.output, &spec, &scene, opts.images)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", opts.output.display())))?;
    Ok(GenerateSummary {
        frames: spec.frames,
        ground_truth_records: scene.ground_truth.len(),
        detections: scene.detections.iter().map(|(_, d)| d.len()).sum(),
        output: opts.output.clone(),
    })
}

// --- benchmark -----------------------------------------------------------

#[derive(Debug)]
pub struct BenchmarkOptions {
    pub frames: u32,
    pub detections_per_frame: u32,
    pub repetitions: u32,
    /// Also measure embedding time across detection counts to expose the
    /// (expected linear) scaling.
    pub sweep: bool,
    pub config: Option<PathBuf>,
    pub overrides: Overrides,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self {
            frames: 600,
            detections_per_frame: 50,
            repetitions: 3,
            sweep: false,
            config: None,
            overrides: Overrides::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchmarkRun {
    pub ingest: Duration,
    pub embed: Duration,
    pub associate: Duration,
    pub update: Duration,
    pub write: Duration,
    pub total: Duration,
    pub frames: u64,
    pub detections: u64,
}

impl BenchmarkRun {
    pub fn fps(&self) -> f64 {
        self.frames as f64 / self.total.as_secs_f64().max(1e-9)
    }
}

#[derive(Debug)]
pub struct BenchmarkSummary {
    pub runs: Vec<BenchmarkRun>,
    /// (detections per frame, embed seconds) pairs, when sweeping.
    pub sweep: Vec<(u32, f64)>,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl fmt::Display for BenchmarkSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, run) in self.runs.iter().enumerate() {
            writeln!(
                f,
                "run {}: ingest {:.3}s, embed {:.3}s, associate {:.3}s, update {:.3}s, write {:.3}s, total {:.3}s ({:.1} frames/s)",
                i + 1,
                run.ingest.as_secs_f64(),
                run.embed.as_secs_f64(),
                run.associate.as_secs_f64(),
                run.update.as_secs_f64(),
                run.write.as_secs_f64(),
                run.total.as_secs_f64(),
                run.fps(),
            )?;
        }
        let totals: Vec<f64> = self.runs.iter().map(|r| r.total.as_secs_f64()).collect();
        let best = totals.iter().cloned().fold(f64::INFINITY, f64::min);
        write!(
            f,
            "total: min {:.3}s, median {:.3}s, best {:.1} frames/s",
            best,
            median(totals.clone()),
            self.runs.iter().map(|r| r.fps()).fold(0.0, f64::max),
        )?;
        if !self.sweep.is_empty() {
            write!(f, "\nembed scaling (detections/frame -> embed seconds):")?;
            for (d, secs) in &self.sweep {
                write!(f, "\n  {d:>4}: {secs:.3}s")?;
            }
        }
        Ok(())
    }
}

fn one_benchmark_run(
    spec: &ScenarioSpec,
    cfg: motpipe_core::tracker::TrackerConfig,
) -> Result<BenchmarkRun, CliError> {
    let scene = generate(spec).map_err(|e| CliError::Config(e.to_string()))?;
    let geometry = ImageGeometry::new(spec.width as f64, spec.height as f64);

    let ingest_start = Instant::now();
    let stream = scene.to_stream();
    let ingest = ingest_start.elapsed();

    let dim = cfg.fingerprint_dim.max(12);
    let embedder = HistogramEmbedder::new(dim);
    let mut tracker = Tracker::new(cfg, geometry);
    let run_start = Instant::now();
    let (results, times) = run_stream(stream, Some(&embedder), &mut tracker)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let pipeline = run_start.elapsed();

    let write_start = Instant::now();
    let tmp = tempfile::NamedTempFile::new()
        .map_err(|e| CliError::Io(format!("cannot create temp file: {e}")))?;
    write_results(tmp.path(), &results)?;
    let write = write_start.elapsed();

    let stats = tracker.stats();
    Ok(BenchmarkRun {
        ingest,
        embed: times.embed,
        associate: stats.associate_time,
        update: stats.update_time,
        write,
        total: ingest + pipeline + write,
        frames: stats.frames,
        detections: stats.detections,
    })
}

/// Benchmarks the full pipeline on a synthetic scene, reporting per-stage
/// times per repetition plus min/median totals, and optionally an
/// embedding-time sweep over detection counts.
pub fn cmd_benchmark(opts: &BenchmarkOptions) -> Result<BenchmarkSummary, CliError> {
    if opts.frames == 0 || opts.detections_per_frame == 0 || opts.repetitions == 0 {
        return Err(CliError::Config(
            "frames, detections and repetitions must all be positive".into(),
        ));
    }
    let resolved = resolve(opts.config.as_deref(), &opts.overrides)?;
    let spec = lanes_scenario(opts.detections_per_frame, opts.frames);
    let mut runs = Vec::with_capacity(opts.repetitions as usize);
    for _ in 0..opts.repetitions {
        runs.push(one_benchmark_run(&spec, resolved.tracker.clone())?);
    }
    let mut sweep = Vec::new();
    if opts.sweep {
        for d in [25u32, 50, 100, 200] {
            let spec = lanes_scenario(d, 200);
            let run = one_benchmark_run(&spec, resolved.tracker.clone())?;
            sweep.push((d, run.embed.as_secs_f64()));
        }
    }
    Ok(BenchmarkSummary { runs, sweep })
}
