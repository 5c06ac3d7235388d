//! Online multi-object tracking for static-camera streams: per-track
//! constant-velocity Kalman filters, Hungarian association over a combined
//! IoU / pixel-distance / appearance cost, linear-complexity fingerprint
//! embedding with buffered batch inference, MOT-format I/O, CLEAR-MOT and
//! IDF1 scoring, and a deterministic synthetic-scene oracle.

pub mod association;
pub mod fingerprint;
pub mod geometry;
pub mod kalman;
pub mod metrics;
pub mod mot_io;
pub mod synth;
pub mod tracker;

pub use association::{AssociationResult, AssociationWeights, CostMatrix};
pub use fingerprint::{Fingerprint, FingerprintProvider, HistogramEmbedder, Patch};
pub use geometry::{BoundingBox, ImageGeometry};
pub use kalman::{MotionState, NoiseConfig};
pub use metrics::ScoreReport;
pub use tracker::{Detection, FrameResult, Track, Tracker, TrackerConfig};
