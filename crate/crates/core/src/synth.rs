//! Deterministic synthetic scenes: ground-truth identities with piecewise
//! constant-velocity motion, rendered detection streams with controllable
//! jitter, dropout and clutter, and per-identity patch textures. Serves as
//! the oracle for end-to-end tracking properties.

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::Deserialize;
use thiserror::Error;

use crate::fingerprint::{Patch, PATCH_HEIGHT, PATCH_WIDTH};
use crate::geometry::BoundingBox;
use crate::mot_io::GroundTruthRecord;
use crate::tracker::StreamDetection;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("target {index}: entry {entry} must be < exit {exit} <= frames+1 ({frames})")]
    BadLifetime { index: usize, entry: u32, exit: u32, frames: u32 },
    #[error("{name} must be a probability in [0,1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("scenario needs positive image dimensions and frame count")]
    BadDimensions,
}

/// Velocity in pixels/frame applied from `from_frame` onward.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct VelocityPhase {
    pub from_frame: u32,
    pub vx: f64,
    pub vy: f64,
}

/// One ground-truth identity: active on frames `entry..exit` (1-based,
/// exclusive exit), constant box size, piecewise constant velocity.
#[derive(Debug, Clone, Deserialize)]
pub struct TargetSpec {
    pub entry: u32,
    pub exit: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub velocity: Vec<VelocityPhase>,
    /// Drives the identity's patch texture.
    pub appearance: u32,
}

impl TargetSpec {
    fn velocity_at(&self, frame: u32) -> (f64, f64) {
        let mut v = (0.0, 0.0);
        for p in &self.velocity {
            if p.from_frame <= frame {
                v = (p.vx, p.vy);
            }
        }
        v
    }

    /// Ground-truth box at `frame`, if the target is active there.
    pub fn gt_box(&self, frame: u32) -> Option<BoundingBox> {
        if frame < self.entry || frame >= self.exit {
            return None;
        }
        let (mut x, mut y) = (self.x, self.y);
        for f in self.entry..frame {
            let (vx, vy) = self.velocity_at(f);
            x += vx;
            y += vy;
        }
        Some(BoundingBox::new(x, y, self.w, self.h))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Box-jitter std in pixels, truncated at ±3σ.
    pub jitter_std: f64,
    /// Per-detection dropout probability.
    pub dropout: f64,
    /// Expected false positives per frame (Poisson).
    pub false_positive_rate: f64,
    pub clutter_min_size: f64,
    pub clutter_max_size: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            jitter_std: 0.0,
            dropout: 0.0,
            false_positive_rate: 0.0,
            clutter_min_size: 20.0,
            clutter_max_size: 60.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(SynthError::BadDimensions);
        }
        for (index, t) in self.targets.iter().enumerate() {
            if t.entry < 1 || t.entry >= t.exit || t.exit > self.frames + 1 {
                return Err(SynthError::BadLifetime {
                    index,
                    entry: t.entry,
                    exit: t.exit,
                    frames: self.frames,
                });
            }
        }
        for (name, value) in [("dropout", self.noise.dropout)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::BadProbability { name, value });
            }
        }
        if self.noise.false_positive_rate < 0.0 {
            return Err(SynthError::BadProbability {
                name: "false_positive_rate",
                value: self.noise.false_positive_rate,
            });
        }
        Ok(())
    }
}

/// One generated detection with its appearance patch.
#[derive(Debug, Clone)]
pub struct SynthDetection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub patch: Patch,
    pub is_clutter: bool,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub ground_truth: Vec<GroundTruthRecord>,
    /// Per-frame detections, frames 1..=spec.frames, every frame present.
    pub detections: Vec<(u32, Vec<SynthDetection>)>,
}

impl Scene {
    /// Tracker input with patches attached.
    pub fn to_stream(&self) -> Vec<(u32, Vec<StreamDetection>)> {
        self.detections
            .iter()
            .map(|(frame, dets)| {
                let stream = dets
                    .iter()
                    .map(|d| StreamDetection {
                        bbox: d.bbox,
                        confidence: d.confidence,
                        patch: Some(d.patch.clone()),
                        fingerprint: None,
                    })
                    .collect();
                (*frame, stream)
            })
            .collect()
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let c = v * s;
    let hp = (h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// Flat per-identity base color plus a fixed stripe pattern; stable over
/// time, distinct across identities.
pub fn texture_patch(appearance: u32) -> Patch {
    let hue = (appearance as f64 * 137.508) % 360.0; // golden-angle spacing
    let base = hsv_to_rgb(hue, 0.85, 0.9);
    let stripe = hsv_to_rgb(hue + 180.0, 0.85, 0.45);
    let period = 6 + (appearance % 5) as usize * 3;
    let mut patch = Patch::filled(0.0);
    for y in 0..PATCH_HEIGHT {
        let color = if (y / period) % 2 == 1 { &stripe } else { &base };
        for x in 0..PATCH_WIDTH {
            for c in 0..3 {
                patch.set(y, x, c, color[c] as f32);
            }
        }
    }
    patch
}

fn truncated_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std <= 0.0 {
        return 0.0;
    }
    let dist = Normal::new(0.0, std).expect("valid std");
    loop {
        let v = dist.sample(rng);
        if v.abs() <= 3.0 * std {
            return v;
        }
    }
}

/// Deterministic generation: ground truth follows the declared motion
/// exactly; detections are ground truth plus jitter, minus dropouts, plus
/// clutter.
pub fn generate(spec: &ScenarioSpec) -> Result<Scene, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let textures: Vec<Patch> = spec.targets.iter().map(|t| texture_patch(t.appearance)).collect();
    let mut ground_truth = Vec::new();
    let mut detections = Vec::with_capacity(spec.frames as usize);

    // running positions avoid re-walking velocity phases per frame
    let mut positions: Vec<(f64, f64)> = spec.targets.iter().map(|t| (t.x, t.y)).collect();

    for frame in 1..=spec.frames {
        let mut frame_dets = Vec::new();
        for (ti, target) in spec.targets.iter().enumerate() {
            if frame < target.entry || frame >= target.exit {
                continue;
            }
            let (x, y) = positions[ti];
            let bbox = BoundingBox::new(x, y, target.w, target.h);
            ground_truth.push(GroundTruthRecord {
                frame,
                identity: ti as i64 + 1,
                bbox,
                consider: true,
                class: 1,
                visibility: 1.0,
            });
            let dropped = spec.noise.dropout > 0.0 && rng.gen::<f64>() < spec.noise.dropout;
            if !dropped {
                let jit = spec.noise.jitter_std;
                let bbox = BoundingBox::new(
                    x + truncated_normal(&mut rng, jit),
                    y + truncated_normal(&mut rng, jit),
                    target.w,
                    target.h,
                );
                frame_dets.push(SynthDetection {
                    bbox,
                    confidence: 1.0,
                    patch: textures[ti].clone(),
                    is_clutter: false,
                });
            }
        }
        // advance positions for the next frame
        for (ti, target) in spec.targets.iter().enumerate() {
            if frame >= target.entry && frame < target.exit {
                let (vx, vy) = target.velocity_at(frame);
                positions[ti].0 += vx;
                positions[ti].1 += vy;
            }
        }
        if spec.noise.false_positive_rate > 0.0 {
            let poisson = Poisson::new(spec.noise.false_positive_rate).expect("positive rate");
            let count = poisson.sample(&mut rng) as u32;
            for _ in 0..count {
                let w = rng.gen_range(spec.noise.clutter_min_size..=spec.noise.clutter_max_size);
                let h = rng.gen_range(spec.noise.clutter_min_size..=spec.noise.clutter_max_size);
                let x = rng.gen_range(0.0..(spec.width as f64 - w).max(1.0));
                let y = rng.gen_range(0.0..(spec.height as f64 - h).max(1.0));
                let mut patch = Patch::filled(0.0);
                for py in 0..PATCH_HEIGHT {
                    for px in 0..PATCH_WIDTH {
                        for c in 0..3 {
                            patch.set(py, px, c, rng.gen::<f32>());
                        }
                    }
                }
                frame_dets.push(SynthDetection {
                    bbox: BoundingBox::new(x, y, w, h),
                    confidence: 0.3,
                    patch,
                    is_clutter: true,
                });
            }
        }
        detections.push((frame, frame_dets));
    }
    Ok(Scene { ground_truth, detections })
}

/// Renders the frame: gray background, each active target drawn as its
/// texture resampled to the ground-truth box. Later targets draw on top.
pub fn render_frame(spec: &ScenarioSpec, frame: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(spec.width, spec.height, Rgb([96, 96, 96]));
    for target in &spec.targets {
        let Some(bbox) = target.gt_box(frame) else { continue };
        let patch = texture_patch(target.appearance);
        let x0 = bbox.x.max(0.0) as u32;
        let y0 = bbox.y.max(0.0) as u32;
        let x1 = (bbox.right().min(spec.width as f64)).max(0.0) as u32;
        let y1 = (bbox.bottom().min(spec.height as f64)).max(0.0) as u32;
        for py in y0..y1 {
            let ty = (((py as f64 - bbox.y) / bbox.h) * PATCH_HEIGHT as f64) as usize;
            let ty = ty.min(PATCH_HEIGHT - 1);
            for px in x0..x1 {
                let tx = (((px as f64 - bbox.x) / bbox.w) * PATCH_WIDTH as f64) as usize;
                let tx = tx.min(PATCH_WIDTH - 1);
                let rgb = [
                    (patch.get(ty, tx, 0) * 255.0) as u8,
                    (patch.get(ty, tx, 1) * 255.0) as u8,
                    (patch.get(ty, tx, 2) * 255.0) as u8,
                ];
                img.put_pixel(px, py, Rgb(rgb));
            }
        }
    }
    img
}

/// Writes the scene as a MOT sequence directory: `det/det.txt`,
/// `gt/gt.txt`, `seqinfo.ini` and, when requested, rendered `img1/*.png`
/// frames.
pub fn write_scene(
    dir: &std::path::Path,
    spec: &ScenarioSpec,
    scene: &Scene,
    with_images: bool,
) -> std::io::Result<()> {
    use std::fmt::Write as _;
    use std::fs;
    fs::create_dir_all(dir.join("det"))?;
    fs::create_dir_all(dir.join("gt"))?;

    let mut det = String::new();
    for (frame, dets) in &scene.detections {
        for d in dets {
            writeln!(
                det,
                "{},-1,{:.2},{:.2},{:.2},{:.2},{},-1,-1,-1",
                frame, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h, d.confidence
            )
            .unwrap();
        }
    }
    fs::write(dir.join("det").join("det.txt"), det)?;

    let mut gt = String::new();
    for r in &scene.ground_truth {
        writeln!(
            gt,
            "{},{},{:.2},{:.2},{:.2},{:.2},1,1,1",
            r.frame, r.identity, r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h
        )
        .unwrap();
    }
    fs::write(dir.join("gt").join("gt.txt"), gt)?;

    let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or("synthetic");
    fs::write(
        dir.join("seqinfo.ini"),
        format!(
            "[Sequence]\nname={}\nimDir=img1\nframeRate=30\nseqLength={}\nimWidth={}\nimHeight={}\nimExt=.png\n",
            name, spec.frames, spec.width, spec.height
        ),
    )?;

    if with_images {
        let img_dir = dir.join("img1");
        fs::create_dir_all(&img_dir)?;
        for frame in 1..=spec.frames {
            let img = render_frame(spec, frame);
            img.save(img_dir.join(format!("{frame:06}.png")))
                .map_err(|e| std::io::Error::other(e.to_string()))?;
        }
    }
    Ok(())
}

/// Two targets that meet mid-scene and bounce back the way they came. A
/// constant-velocity motion model prefers the straight-through (wrong)
/// continuation, so geometry-only association swaps identities; the
/// appearance term disambiguates.
pub fn crossing_fixture() -> ScenarioSpec {
    let mid = 31;
    ScenarioSpec {
        seed: 7,
        width: 640,
        height: 480,
        frames: 60,
        targets: vec![
            TargetSpec {
                entry: 1,
                exit: 61,
                x: 100.0,
                y: 200.0,
                w: 40.0,
                h: 80.0,
                velocity: vec![
                    VelocityPhase { from_frame: 1, vx: 4.0, vy: 0.0 },
                    VelocityPhase { from_frame: mid, vx: -4.0, vy: 0.0 },
                ],
                appearance: 0,
            },
            TargetSpec {
                entry: 1,
                exit: 61,
                x: 340.0,
                y: 200.0,
                w: 40.0,
                h: 80.0,
                velocity: vec![
                    VelocityPhase { from_frame: 1, vx: -4.0, vy: 0.0 },
                    VelocityPhase { from_frame: mid, vx: 4.0, vy: 0.0 },
                ],
                appearance: 3,
            },
        ],
        noise: NoiseSpec::default(),
    }
}

/// Well-separated constant-velocity targets, zero noise. Used by the perfect
/// -input checks and as the default benchmark scene shape.
pub fn lanes_scenario(n_targets: u32, frames: u32) -> ScenarioSpec {
    let cols = 10u32.min(n_targets.max(1));
    let rows = n_targets.div_ceil(cols);
    let width = 1920u32;
    let height = (rows * 100 + 80).max(480);
    let mut targets = Vec::new();
    for i in 0..n_targets {
        let col = i % cols;
        let row = i / cols;
        // oscillate horizontally so long runs stay inside the image
        let mut velocity = Vec::new();
        let mut dir = if i % 2 == 0 { 0.6 } else { -0.6 };
        let mut f = 1u32;
        while f <= frames {
            velocity.push(VelocityPhase { from_frame: f, vx: dir, vy: 0.0 });
            dir = -dir;
            f += 80;
        }
        targets.push(TargetSpec {
            entry: 1,
            exit: frames + 1,
            x: 60.0 + col as f64 * 185.0,
            y: 20.0 + row as f64 * 100.0,
            w: 30.0,
            h: 60.0,
            velocity,
            appearance: i,
        });
    }
    ScenarioSpec {
        seed: 1,
        width,
        height,
        frames,
        targets,
        noise: NoiseSpec::default(),
    }
}
