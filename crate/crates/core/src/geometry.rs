//! Bounding-box arithmetic: IoU, centers, normalized image distance.

use serde::{Deserialize, Serialize};

/// Axis-aligned pixel rectangle, top-left convention. Coordinates are
/// real-valued; rounding happens only at file output.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        debug_assert!(w >= 0.0 && h >= 0.0, "negative box extent");
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Box center (x + w/2, y + h/2).
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { x: self.x + dx, y: self.y + dy, ..*self }
    }
}

/// Image dimensions; the diagonal normalizes pixel distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGeometry {
    pub width: f64,
    pub height: f64,
}

impl ImageGeometry {
    pub fn new(width: f64, height: f64) -> Self {
        assert!(width > 0.0 && height > 0.0, "image dimensions must be positive");
        Self { width, height }
    }

    /// Distance between opposite image corners.
    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

/// Intersection over union of two boxes. Zero union area yields 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let iy = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Euclidean distance between two points divided by the image diagonal,
/// clamped to [0,1]. Points slightly outside the image (extrapolated boxes)
/// would otherwise exceed 1.
pub fn normalized_distance(p: (f64, f64), q: (f64, f64), g: &ImageGeometry) -> f64 {
    let d = (p.0 - q.0).hypot(p.1 - q.1) / g.diagonal();
    d.clamp(0.0, 1.0)
}
