//! Shared fixtures for the criterion benchmarks.

use motpipe_core::fingerprint::Patch;
use motpipe_core::geometry::BoundingBox;
use motpipe_core::synth::{lanes_scenario, texture_patch, ScenarioSpec};
use motpipe_core::tracker::StreamDetection;

/// Lanes scene of `n` targets streamed frame by frame without holding the
/// whole patch set in memory.
pub fn lanes_stream(n: u32, frames: u32) -> (ScenarioSpec, Vec<(u32, Vec<StreamDetection>)>) {
    let spec = lanes_scenario(n, frames);
    let textures: Vec<Patch> = spec.targets.iter().map(|t| texture_patch(t.appearance)).collect();
    let stream = (1..=frames)
        .map(|f| {
            let dets = spec
                .targets
                .iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    t.gt_box(f).map(|bbox| StreamDetection {
                        bbox,
                        confidence: 1.0,
                        patch: Some(textures[i].clone()),
                        fingerprint: None,
                    })
                })
                .collect();
            (f, dets)
        })
        .collect();
    (spec, stream)
}

/// A grid of n slightly jittered boxes, useful for cost-matrix benchmarks.
pub fn grid_boxes(n: usize, jitter: f64) -> Vec<BoundingBox> {
    (0..n)
        .map(|i| {
            let col = (i % 10) as f64;
            let row = (i / 10) as f64;
            BoundingBox::new(60.0 + col * 185.0 + jitter, 20.0 + row * 100.0 + jitter, 30.0, 60.0)
        })
        .collect()
}
