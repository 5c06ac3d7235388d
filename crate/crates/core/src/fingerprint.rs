//! Appearance fingerprints: patch extraction, provider abstraction with
//! batched embedding, a deterministic histogram embedder, and the squared
//! cosine similarity head.

use std::sync::atomic::{AtomicU64, Ordering};

use image::RgbImage;
use thiserror::Error;

use crate::geometry::BoundingBox;

/// Patch height after resampling.
pub const PATCH_HEIGHT: usize = 60;
/// Patch width after resampling.
pub const PATCH_WIDTH: usize = 35;
/// Default fingerprint dimension.
pub const DEFAULT_DIM: usize = 100;

#[derive(Debug, Error)]
pub enum FingerprintError {
    #[error("patch buffer has {got} values, expected {expected}")]
    BadPatchShape { got: usize, expected: usize },
    #[error("detection box lies fully outside the image")]
    BoxOutsideImage,
    #[error("fingerprint dimensions differ: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("zero-norm fingerprint has no direction")]
    ZeroNorm,
    #[error("embedding provider failed: {0}")]
    Provider(String),
}

/// H×W×3 color patch, values in [0,1], row-major (y, x, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    data: Vec<f32>,
}

impl Patch {
    pub fn from_vec(data: Vec<f32>) -> Result<Self, FingerprintError> {
        let expected = PATCH_HEIGHT * PATCH_WIDTH * 3;
        if data.len() != expected {
            return Err(FingerprintError::BadPatchShape { got: data.len(), expected });
        }
        Ok(Self { data })
    }

    pub fn filled(value: f32) -> Self {
        Self { data: vec![value; PATCH_HEIGHT * PATCH_WIDTH * 3] }
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * PATCH_WIDTH + x) * 3 + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * PATCH_WIDTH + x) * 3 + c] = v;
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }
}

/// Fixed-length appearance vector. Constructed values are guaranteed to have
/// at least one nonzero component; all-zero vectors are rejected upstream and
/// represented as `None` at call sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    values: Vec<f64>,
}

impl Fingerprint {
    /// Returns `None` for an all-zero vector (a "null" fingerprint).
    pub fn new(values: Vec<f64>) -> Option<Self> {
        if values.iter().all(|v| *v == 0.0) {
            None
        } else {
            Some(Self { values })
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Crop `bbox ∩ image`, bilinearly resampled to 35×60, channels normalized to
/// [0,1]; regions outside the image are zero. Errors if the box misses the
/// image entirely.
pub fn extract_patch(frame: &RgbImage, bbox: &BoundingBox) -> Result<Patch, FingerprintError> {
    let (iw, ih) = (frame.width() as f64, frame.height() as f64);
    if bbox.right() <= 0.0 || bbox.bottom() <= 0.0 || bbox.x >= iw || bbox.y >= ih
        || bbox.w <= 0.0 || bbox.h <= 0.0
    {
        return Err(FingerprintError::BoxOutsideImage);
    }
    let sx = bbox.w / PATCH_WIDTH as f64;
    let sy = bbox.h / PATCH_HEIGHT as f64;
    let mut patch = Patch::filled(0.0);
    for py in 0..PATCH_HEIGHT {
        let src_y = bbox.y + (py as f64 + 0.5) * sy - 0.5;
        for px in 0..PATCH_WIDTH {
            let src_x = bbox.x + (px as f64 + 0.5) * sx - 0.5;
            let rgb = sample_bilinear(frame, src_x, src_y);
            for c in 0..3 {
                patch.set(py, px, c, rgb[c]);
            }
        }
    }
    Ok(patch)
}

/// Bilinear sample with zero padding outside the image.
fn sample_bilinear(frame: &RgbImage, x: f64, y: f64) -> [f32; 3] {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = (x - x0) as f32;
    let fy = (y - y0) as f32;
    let mut out = [0.0f32; 3];
    let weights = [
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x0 + 1.0, y0, fx * (1.0 - fy)),
        (x0, y0 + 1.0, (1.0 - fx) * fy),
        (x0 + 1.0, y0 + 1.0, fx * fy),
    ];
    for (px, py, w) in weights {
        if w == 0.0 || px < 0.0 || py < 0.0 {
            continue;
        }
        let (ux, uy) = (px as u32, py as u32);
        if ux >= frame.width() || uy >= frame.height() {
            continue;
        }
        let p = frame.get_pixel(ux, uy);
        for c in 0..3 {
            out[c] += w * p.0[c] as f32 / 255.0;
        }
    }
    out
}

/// Batched patch-to-fingerprint embedding. Implementations must be pure
/// functions of the patch contents.
pub trait FingerprintProvider {
    fn dim(&self) -> usize;
    /// One fingerprint per patch, order-preserving. `None` entries mark
    /// patches the provider could not embed.
    fn embed_batch(&self, patches: &[Patch]) -> Result<Vec<Option<Fingerprint>>, FingerprintError>;
    /// Total single-patch embeddings performed so far.
    fn evaluations(&self) -> u64;
}

/// Deterministic stand-in for a learned backbone: per-channel intensity
/// histograms over a 2×2 spatial grid, truncated/zero-padded to the declared
/// dimension and L2-normalized.
pub struct HistogramEmbedder {
    dim: usize,
    bins: usize,
    calls: AtomicU64,
}

impl HistogramEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 12, "histogram embedder needs at least 12 dims");
        Self { dim, bins: (dim / 12).max(1), calls: AtomicU64::new(0) }
    }

    fn embed_one(&self, patch: &Patch) -> Option<Fingerprint> {
        let bins = self.bins;
        let mut feat = vec![0.0f64; 12 * bins];
        let half_h = PATCH_HEIGHT / 2;
        let half_w = PATCH_WIDTH / 2;
        for y in 0..PATCH_HEIGHT {
            for x in 0..PATCH_WIDTH {
                let cell = (y / half_h).min(1) * 2 + (x / half_w).min(1);
                for c in 0..3 {
                    let v = patch.get(y, x, c).clamp(0.0, 1.0) as f64;
                    let bin = ((v * bins as f64) as usize).min(bins - 1);
                    feat[(cell * 3 + c) * bins + bin] += 1.0;
                }
            }
        }
        let norm = feat.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let mut values = vec![0.0f64; self.dim];
        for (i, v) in feat.iter().take(self.dim).enumerate() {
            values[i] = v / norm;
        }
        Fingerprint::new(values)
    }
}

impl FingerprintProvider for HistogramEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, patches: &[Patch]) -> Result<Vec<Option<Fingerprint>>, FingerprintError> {
        self.calls.fetch_add(patches.len() as u64, Ordering::Relaxed);
        Ok(patches.iter().map(|p| self.embed_one(p)).collect())
    }

    fn evaluations(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// (a·b / ‖a‖‖b‖)²: both parallel and antiparallel vectors score 1.
pub fn squared_cosine_similarity(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.dim() != b.dim() {
        return Err(FingerprintError::DimensionMismatch { a: a.dim(), b: b.dim() });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(FingerprintError::ZeroNorm);
    }
    Ok(((dot * dot) / (na * nb)).clamp(0.0, 1.0))
}

/// Neutral cost when either fingerprint is missing.
pub const NULL_FINGERPRINT_COST: f64 = 0.5;

/// 1 − squared cosine similarity; 0.5 when either side is null.
pub fn fingerprint_cost(a: Option<&Fingerprint>, b: Option<&Fingerprint>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => match squared_cosine_similarity(a, b) {
            Ok(sim) => 1.0 - sim,
            Err(_) => NULL_FINGERPRINT_COST,
        },
        _ => NULL_FINGERPRINT_COST,
    }
}
