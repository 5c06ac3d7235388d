//! Per-frame tracking pipeline: predict all tracks, associate detections,
//! update assigned tracks, spawn tracks for leftover detections, age out
//! stale tracks. `run_stream` adds the buffered fingerprint hand-off.

use std::time::{Duration, Instant};

use serde::Deserialize;
use thiserror::Error;

use crate::association::{build_cost_matrix, gate, solve_assignment, AssociationWeights};
use crate::fingerprint::{Fingerprint, FingerprintProvider, Patch};
use crate::geometry::{BoundingBox, ImageGeometry};
use crate::kalman::{init_state, predict, state_to_box, update, MotionState, NoiseConfig};

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("non-monotonic frame id {got}, expected {expected}")]
    FrameOrder { expected: u32, got: u32 },
    #[error(transparent)]
    Kalman(#[from] crate::kalman::KalmanError),
}

/// One per-frame observation handed to the tracker.
#[derive(Debug, Clone)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub fingerprint: Option<Fingerprint>,
}

/// A hypothesized identity: Kalman state plus cached appearance.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub motion: MotionState,
    pub fingerprint: Option<Fingerprint>,
    pub frames_since_update: u32,
    pub age: u32,
    pub hit_count: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub weights: AssociationWeights,
    /// Track deleted once it has gone more than this many frames unassigned.
    pub timeout: u32,
    /// Fingerprint buffering window in frames (1 = per-frame embedding).
    pub buffer_len: u32,
    /// Detections below this confidence are dropped before tracking.
    pub min_confidence: f64,
    pub noise: NoiseConfig,
    pub fingerprint_dim: usize,
    /// Report coasting (predicted-only) tracks in frame results.
    pub report_coasting: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            weights: AssociationWeights::default(),
            timeout: 30,
            buffer_len: 45,
            min_confidence: 0.0,
            noise: NoiseConfig::default(),
            fingerprint_dim: crate::fingerprint::DEFAULT_DIM,
            report_coasting: true,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.weights.validate()?;
        self.noise.validate()?;
        if self.timeout == 0 {
            return Err("timeout must be > 0".into());
        }
        if self.buffer_len == 0 {
            return Err("buffer_len must be >= 1".into());
        }
        if !self.min_confidence.is_finite() {
            return Err("min_confidence must be finite".into());
        }
        if self.fingerprint_dim == 0 {
            return Err("fingerprint_dim must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOutput {
    pub track_id: u64,
    pub bbox: BoundingBox,
    /// True when the track was propagated by prediction alone this frame.
    pub coasting: bool,
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub frame_id: u32,
    pub tracks: Vec<TrackOutput>,
}

/// Run counters and stage timings.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrackerStats {
    pub frames: u64,
    pub detections: u64,
    pub tracks_created: u64,
    pub tracks_deleted: u64,
    pub similarity_evaluations: u64,
    pub associate_time: Duration,
    pub update_time: Duration,
}

pub struct Tracker {
    cfg: TrackerConfig,
    geometry: ImageGeometry,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
    stats: TrackerStats,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig, geometry: ImageGeometry) -> Self {
        Self {
            cfg,
            geometry,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            stats: TrackerStats::default(),
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &TrackerStats {
        &self.stats
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Advance one frame. Frame ids must increase by exactly 1.
    pub fn step(&mut self, frame_id: u32, detections: &[Detection]) -> Result<FrameResult, TrackError> {
        if let Some(last) = self.last_frame {
            if frame_id != last + 1 {
                return Err(TrackError::FrameOrder { expected: last + 1, got: frame_id });
            }
        }
        self.last_frame = Some(frame_id);
        self.stats.frames += 1;
        self.stats.detections += detections.len() as u64;

        // 1. predict every track once
        for t in &mut self.tracks {
            t.motion = predict(&t.motion, &self.cfg.noise);
            t.age += 1;
        }

        // 2. associate
        let assoc_start = Instant::now();
        let predicted: Vec<BoundingBox> = self.tracks.iter().map(|t| state_to_box(&t.motion)).collect();
        let track_fps: Vec<Option<Fingerprint>> =
            self.tracks.iter().map(|t| t.fingerprint.clone()).collect();
        let det_boxes: Vec<BoundingBox> = detections.iter().map(|d| d.bbox).collect();
        let det_fps: Vec<Option<Fingerprint>> =
            detections.iter().map(|d| d.fingerprint.clone()).collect();
        let cost = build_cost_matrix(
            &predicted,
            &track_fps,
            &det_boxes,
            &det_fps,
            &self.cfg.weights,
            &self.geometry,
        );
        self.stats.similarity_evaluations += cost.similarity_evaluations;
        let matching = solve_assignment(&cost);
        let assoc = gate(&matching, &cost, self.cfg.weights.gate);
        self.stats.associate_time += assoc_start.elapsed();

        // 3. update assigned tracks, replace their fingerprints
        let update_start = Instant::now();
        let mut updated = vec![false; self.tracks.len()];
        for &(ti, di) in &assoc.pairs {
            let track = &mut self.tracks[ti];
            let det = &detections[di];
            match update(&track.motion, &det.bbox, &self.cfg.noise) {
                Ok(st) => track.motion = st,
                Err(_) => {
                    // broken covariance: reset the state from the detection, keep the id
                    if let Ok(st) = init_state(&det.bbox, &self.cfg.noise) {
                        track.motion = st;
                    }
                }
            }
            if det.fingerprint.is_some() {
                track.fingerprint = det.fingerprint.clone();
            }
            track.frames_since_update = 0;
            track.hit_count += 1;
            updated[ti] = true;
        }
        for (ti, t) in self.tracks.iter_mut().enumerate() {
            if !updated[ti] {
                t.frames_since_update += 1;
            }
        }

        // 4. spawn tracks for unassigned detections
        for &di in &assoc.unassigned_detections {
            let det = &detections[di];
            let Ok(motion) = init_state(&det.bbox, &self.cfg.noise) else {
                continue; // degenerate box, never trackable
            };
            self.tracks.push(Track {
                id: self.next_id,
                motion,
                fingerprint: det.fingerprint.clone(),
                frames_since_update: 0,
                age: 0,
                hit_count: 1,
            });
            self.next_id += 1;
            self.stats.tracks_created += 1;
        }

        // 5. delete timed-out tracks
        let timeout = self.cfg.timeout;
        let before = self.tracks.len();
        self.tracks.retain(|t| t.frames_since_update <= timeout);
        self.stats.tracks_deleted += (before - self.tracks.len()) as u64;
        self.stats.update_time += update_start.elapsed();

        // 6. report
        let tracks = self
            .tracks
            .iter()
            .filter(|t| self.cfg.report_coasting || t.frames_since_update == 0)
            .map(|t| TrackOutput {
                track_id: t.id,
                bbox: state_to_box(&t.motion),
                coasting: t.frames_since_update > 0,
            })
            .collect();
        Ok(FrameResult { frame_id, tracks })
    }
}

/// One frame of raw stream input before fingerprints are resolved.
#[derive(Debug, Clone)]
pub struct StreamDetection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub patch: Option<Patch>,
    /// Precomputed fingerprint (sidecar route); takes precedence over `patch`.
    pub fingerprint: Option<Fingerprint>,
}

/// Wall-clock split of a `run_stream` call.
#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineTimes {
    pub embed: Duration,
    pub track: Duration,
}

/// Buffers up to `buffer_len` frames, embeds all buffered patches in one
/// batch, then steps the buffered frames in order. Output latency is bounded
/// by the buffer length; results are unchanged by it. Provider failure
/// degrades the whole buffer to null fingerprints.
pub fn run_stream<I>(
    frames: I,
    provider: Option<&dyn FingerprintProvider>,
    tracker: &mut Tracker,
) -> Result<(Vec<FrameResult>, PipelineTimes), TrackError>
where
    I: IntoIterator<Item = (u32, Vec<StreamDetection>)>,
{
    let buffer_len = tracker.cfg.buffer_len.max(1) as usize;
    let min_conf = tracker.cfg.min_confidence;
    let mut results = Vec::new();
    let mut times = PipelineTimes::default();
    let mut buffer: Vec<(u32, Vec<StreamDetection>)> = Vec::with_capacity(buffer_len);

    let flush = |buffer: &mut Vec<(u32, Vec<StreamDetection>)>,
                     results: &mut Vec<FrameResult>,
                     times: &mut PipelineTimes,
                     tracker: &mut Tracker|
     -> Result<(), TrackError> {
        // batch-embed every buffered patch that still needs a fingerprint
        let embed_start = Instant::now();
        let mut pending: Vec<(usize, usize)> = Vec::new();
        let mut patches: Vec<Patch> = Vec::new();
        for (fi, (_, dets)) in buffer.iter().enumerate() {
            for (di, det) in dets.iter().enumerate() {
                if det.fingerprint.is_none() {
                    if let Some(p) = &det.patch {
                        pending.push((fi, di));
                        patches.push(p.clone());
                    }
                }
            }
        }
        if let Some(provider) = provider {
            if !patches.is_empty() {
                if let Ok(embedded) = provider.embed_batch(&patches) {
                    for ((fi, di), fp) in pending.into_iter().zip(embedded) {
                        buffer[fi].1[di].fingerprint = fp;
                    }
                }
                // on provider failure the buffer keeps null fingerprints
            }
        }
        times.embed += embed_start.elapsed();

        let track_start = Instant::now();
        for (frame_id, dets) in buffer.drain(..) {
            let detections: Vec<Detection> = dets
                .into_iter()
                .map(|d| Detection {
                    bbox: d.bbox,
                    confidence: d.confidence,
                    fingerprint: d.fingerprint,
                })
                .collect();
            results.push(tracker.step(frame_id, &detections)?);
        }
        times.track += track_start.elapsed();
        Ok(())
    };

    for (frame_id, mut dets) in frames {
        if min_conf > 0.0 {
            dets.retain(|d| d.confidence >= min_conf);
        }
        buffer.push((frame_id, dets));
        if buffer.len() >= buffer_len {
            flush(&mut buffer, &mut results, &mut times, tracker)?;
        }
    }
    if !buffer.is_empty() {
        flush(&mut buffer, &mut results, &mut times, tracker)?;
    }
    Ok((results, times))
}
