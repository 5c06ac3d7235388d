//! Track-to-detection association: multi-criteria cost matrix, rectangular
//! Hungarian solve, and threshold gating.
//!
//! The combined cost per pair is `c_iou + alpha * c_dist + beta * c_fp`.

use serde::Deserialize;

use crate::fingerprint::{fingerprint_cost, Fingerprint};
use crate::geometry::{iou, normalized_distance, BoundingBox, ImageGeometry};

/// Weights alpha, beta and the gating threshold for combined costs.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gate: f64,
}

impl Default for AssociationWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, gate: 1.5 }
    }
}

impl AssociationWeights {
    pub fn validate(&self) -> Result<(), String> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err("alpha must be finite and >= 0".into());
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err("beta must be finite and >= 0".into());
        }
        if !self.gate.is_finite() || self.gate <= 0.0 {
            return Err("gate must be finite and > 0".into());
        }
        Ok(())
    }
}

/// N×M combined costs with the component matrices retained for diagnostics.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    combined: Vec<f64>,
    iou_cost: Vec<f64>,
    dist_cost: Vec<f64>,
    fp_cost: Vec<f64>,
    /// Squared-cosine evaluations performed while building this matrix.
    pub similarity_evaluations: u64,
}

impl CostMatrix {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.combined[row * self.cols + col]
    }

    pub fn iou_at(&self, row: usize, col: usize) -> f64 {
        self.iou_cost[row * self.cols + col]
    }

    pub fn dist_at(&self, row: usize, col: usize) -> f64 {
        self.dist_cost[row * self.cols + col]
    }

    pub fn fingerprint_at(&self, row: usize, col: usize) -> f64 {
        self.fp_cost[row * self.cols + col]
    }

    /// Test/diagnostic constructor from a dense combined matrix; component
    /// matrices are zeroed.
    pub fn from_combined(rows: usize, cols: usize, combined: Vec<f64>) -> Self {
        assert_eq!(combined.len(), rows * cols);
        Self {
            rows,
            cols,
            iou_cost: vec![0.0; combined.len()],
            dist_cost: vec![0.0; combined.len()],
            fp_cost: vec![0.0; combined.len()],
            combined,
            similarity_evaluations: 0,
        }
    }
}

/// Gated assignment plus leftovers on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationResult {
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_tracks: Vec<usize>,
    pub unassigned_detections: Vec<usize>,
}

pub fn build_cost_matrix(
    track_boxes: &[BoundingBox],
    track_fingerprints: &[Option<Fingerprint>],
    det_boxes: &[BoundingBox],
    det_fingerprints: &[Option<Fingerprint>],
    weights: &AssociationWeights,
    geometry: &ImageGeometry,
) -> CostMatrix {
    assert_eq!(track_boxes.len(), track_fingerprints.len());
    assert_eq!(det_boxes.len(), det_fingerprints.len());
    let rows = track_boxes.len();
    let cols = det_boxes.len();
    let mut combined = vec![0.0; rows * cols];
    let mut iou_cost = vec![0.0; rows * cols];
    let mut dist_cost = vec![0.0; rows * cols];
    let mut fp_cost = vec![0.0; rows * cols];
    let mut sim_evals = 0u64;
    for (n, (tb, tf)) in track_boxes.iter().zip(track_fingerprints).enumerate() {
        let tc = tb.center();
        for (m, (db, df)) in det_boxes.iter().zip(det_fingerprints).enumerate() {
            let idx = n * cols + m;
            iou_cost[idx] = 1.0 - iou(tb, db);
            dist_cost[idx] = normalized_distance(tc, db.center(), geometry);
            if tf.is_some() && df.is_some() {
                sim_evals += 1;
            }
            fp_cost[idx] = fingerprint_cost(tf.as_ref(), df.as_ref());
            combined[idx] = iou_cost[idx] + weights.alpha * dist_cost[idx] + weights.beta * fp_cost[idx];
        }
    }
    CostMatrix {
        rows,
        cols,
        combined,
        iou_cost,
        dist_cost,
        fp_cost,
        similarity_evaluations: sim_evals,
    }
}

/// Minimum-cost matching of size min(N,M). The rectangular case is padded to
/// square with a constant strictly larger than any real entry; pad matches
/// are discarded. Pairs come back sorted by track index.
pub fn solve_assignment(c: &CostMatrix) -> Vec<(usize, usize)> {
    solve_dense(c.rows, c.cols, |r, col| c.at(r, col))
}

/// Hungarian algorithm on a dense cost function, O(n^3), deterministic.
pub fn solve_dense<F: Fn(usize, usize) -> f64>(
    rows: usize,
    cols: usize,
    cost: F,
) -> Vec<(usize, usize)> {
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let n = rows.max(cols);
    let mut max_entry = 0.0f64;
    for r in 0..rows {
        for c in 0..cols {
            max_entry = max_entry.max(cost(r, c));
        }
    }
    let pad = 10.0 * (max_entry + 1.0);
    let at = |r: usize, c: usize| -> f64 {
        if r < rows && c < cols {
            cost(r, c)
        } else {
            pad
        }
    };

    // Kuhn-Munkres with potentials, 1-based bookkeeping.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] >= 1 && p[j] <= rows && j <= cols)
        .map(|j| (p[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Drops every matched pair whose combined cost exceeds the gate (strict
/// inequality); its track and detection become unassigned.
pub fn gate(matching: &[(usize, usize)], c: &CostMatrix, gate: f64) -> AssociationResult {
    let mut pairs = Vec::with_capacity(matching.len());
    let mut assigned_tracks = vec![false; c.rows];
    let mut assigned_dets = vec![false; c.cols];
    for &(n, m) in matching {
        if c.at(n, m) > gate {
            continue;
        }
        pairs.push((n, m));
        assigned_tracks[n] = true;
        assigned_dets[m] = true;
    }
    AssociationResult {
        pairs,
        unassigned_tracks: (0..c.rows).filter(|&n| !assigned_tracks[n]).collect(),
        unassigned_detections: (0..c.cols).filter(|&m| !assigned_dets[m]).collect(),
    }
}
