//! CLEAR-MOT scoring (MOTA, MOTP, ID switches, FP/FN) and IDF1.
//!
//! Matching per frame: correspondences carried over from the previous frame
//! are kept while their IoU stays at or above the threshold, even when a
//! higher-IoU alternative exists; leftover boxes are matched by Hungarian on
//! IoU. MOTP is reported as mean IoU over matches.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::association::solve_dense;
use crate::geometry::{iou, BoundingBox};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("ground truth is empty: scores are undefined")]
    EmptyGroundTruth,
}

/// Frame-indexed boxes with identities, for either side of the evaluation.
pub type TrackSet = BTreeMap<u32, Vec<(i64, BoundingBox)>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub mota: f64,
    /// Mean IoU over matched pairs, in [0,1].
    pub motp: f64,
    pub idf1: f64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub id_switches: u64,
    pub gt_boxes: u64,
}

impl ScoreReport {
    /// Aligned human-readable table.
    pub fn table(&self) -> String {
        format!(
            "metric      value\n\
             ---------  ------\n\
             MOTA       {:>6.4}\n\
             MOTP       {:>6.4}\n\
             IDF1       {:>6.4}\n\
             FP         {:>6}\n\
             FN         {:>6}\n\
             IDSW       {:>6}\n\
             GT         {:>6}",
            self.mota,
            self.motp,
            self.idf1,
            self.false_positives,
            self.false_negatives,
            self.id_switches,
            self.gt_boxes,
        )
    }

    /// Machine-readable comma-separated summary.
    pub fn csv_line(&self) -> String {
        format!(
            "MOTA={:.6},MOTP={:.6},IDF1={:.6},FP={},FN={},IDSW={},GT={}",
            self.mota,
            self.motp,
            self.idf1,
            self.false_positives,
            self.false_negatives,
            self.id_switches,
            self.gt_boxes,
        )
    }
}

const INVALID: f64 = 1e6;

/// Matches one frame: carried-over correspondences first, Hungarian on IoU
/// for the rest. Returns (gt index, hyp index, iou) triples.
pub fn match_frame(
    gt: &[(i64, BoundingBox)],
    hyp: &[(i64, BoundingBox)],
    prior: &BTreeMap<i64, i64>,
    threshold: f64,
) -> Vec<(usize, usize, f64)> {
    let mut matches = Vec::new();
    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];

    // keep prior correspondences still above threshold
    for (gi, (gid, gbox)) in gt.iter().enumerate() {
        if let Some(hid) = prior.get(gid) {
            if let Some(hi) = hyp.iter().position(|(id, _)| id == hid) {
                if hyp_used[hi] {
                    continue;
                }
                let overlap = iou(gbox, &hyp[hi].1);
                if overlap >= threshold {
                    matches.push((gi, hi, overlap));
                    gt_used[gi] = true;
                    hyp_used[hi] = true;
                }
            }
        }
    }

    // Hungarian over the remainder
    let free_gt: Vec<usize> = (0..gt.len()).filter(|&i| !gt_used[i]).collect();
    let free_hyp: Vec<usize> = (0..hyp.len()).filter(|&i| !hyp_used[i]).collect();
    if !free_gt.is_empty() && !free_hyp.is_empty() {
        let cost = |r: usize, c: usize| {
            let overlap = iou(&gt[free_gt[r]].1, &hyp[free_hyp[c]].1);
            if overlap >= threshold {
                1.0 - overlap
            } else {
                INVALID
            }
        };
        for (r, c) in solve_dense(free_gt.len(), free_hyp.len(), cost) {
            let overlap = iou(&gt[free_gt[r]].1, &hyp[free_hyp[c]].1);
            if overlap >= threshold {
                matches.push((free_gt[r], free_hyp[c], overlap));
            }
        }
    }
    matches
}

/// CLEAR-MOT scores plus IDF1 at the given IoU matching threshold.
pub fn evaluate(gt: &TrackSet, hyp: &TrackSet, iou_threshold: f64) -> Result<ScoreReport, MetricsError> {
    let gt_boxes: u64 = gt.values().map(|v| v.len() as u64).sum();
    if gt_boxes == 0 {
        return Err(MetricsError::EmptyGroundTruth);
    }
    let hyp_boxes: u64 = hyp.values().map(|v| v.len() as u64).sum();

    let mut fp = 0u64;
    let mut fn_ = 0u64;
    let mut idsw = 0u64;
    let mut iou_sum = 0.0;
    let mut match_count = 0u64;
    // correspondence carried between frames and last matched hyp id per gt id
    let mut prior: BTreeMap<i64, i64> = BTreeMap::new();
    let mut last_hyp: BTreeMap<i64, i64> = BTreeMap::new();

    let empty = Vec::new();
    let mut frames: Vec<u32> = gt.keys().chain(hyp.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();

    for frame in frames {
        let g = gt.get(&frame).unwrap_or(&empty);
        let h = hyp.get(&frame).unwrap_or(&empty);
        let matches = match_frame(g, h, &prior, iou_threshold);
        let mut next_prior = BTreeMap::new();
        for &(gi, hi, overlap) in &matches {
            let gid = g[gi].0;
            let hid = h[hi].0;
            if let Some(&prev) = last_hyp.get(&gid) {
                if prev != hid {
                    idsw += 1;
                }
            }
            last_hyp.insert(gid, hid);
            next_prior.insert(gid, hid);
            iou_sum += overlap;
            match_count += 1;
        }
        // carry correspondences for gt ids absent this frame
        for (gid, hid) in &prior {
            next_prior.entry(*gid).or_insert(*hid);
        }
        prior = next_prior;
        fn_ += (g.len() - matches.len()) as u64;
        fp += (h.len() - matches.len()) as u64;
    }

    let mota = 1.0 - (fn_ + fp + idsw) as f64 / gt_boxes as f64;
    let motp = if match_count > 0 { iou_sum / match_count as f64 } else { 0.0 };
    let idf1 = idf1_score(gt, hyp, iou_threshold, gt_boxes, hyp_boxes);

    Ok(ScoreReport {
        mota,
        motp,
        idf1,
        false_positives: fp,
        false_negatives: fn_,
        id_switches: idsw,
        gt_boxes,
    })
}

/// Frames where each (gt id, hyp id) pair overlaps at or above the threshold.
fn overlap_counts(gt: &TrackSet, hyp: &TrackSet, threshold: f64) -> BTreeMap<(i64, i64), u64> {
    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for (frame, g) in gt {
        let Some(h) = hyp.get(frame) else { continue };
        for (gid, gbox) in g {
            for (hid, hbox) in h {
                if iou(gbox, hbox) >= threshold {
                    *counts.entry((*gid, *hid)).or_default() += 1;
                }
            }
        }
    }
    counts
}

/// IDF1 = 2·IDTP / (2·IDTP + IDFP + IDFN) under the global bipartite
/// matching of gt identities to hypothesis ids that maximizes overlap frames.
fn idf1_score(gt: &TrackSet, hyp: &TrackSet, threshold: f64, gt_boxes: u64, hyp_boxes: u64) -> f64 {
    let counts = overlap_counts(gt, hyp, threshold);
    let mut gt_ids: Vec<i64> = gt.values().flatten().map(|(id, _)| *id).collect();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    let mut hyp_ids: Vec<i64> = hyp.values().flatten().map(|(id, _)| *id).collect();
    hyp_ids.sort_unstable();
    hyp_ids.dedup();

    let idtp = if gt_ids.is_empty() || hyp_ids.is_empty() {
        0
    } else {
        let max_count = counts.values().copied().max().unwrap_or(0) as f64;
        let cost = |r: usize, c: usize| {
            let n = counts.get(&(gt_ids[r], hyp_ids[c])).copied().unwrap_or(0) as f64;
            max_count - n
        };
        let pairs = solve_dense(gt_ids.len(), hyp_ids.len(), cost);
        pairs
            .iter()
            .map(|&(r, c)| counts.get(&(gt_ids[r], hyp_ids[c])).copied().unwrap_or(0))
            .sum::<u64>()
    };
    let idfp = hyp_boxes - idtp;
    let idfn = gt_boxes - idtp;
    let denom = 2 * idtp + idfp + idfn;
    if denom == 0 {
        0.0
    } else {
        2.0 * idtp as f64 / denom as f64
    }
}

/// Builds a `TrackSet` from ground-truth records, skipping unconsidered ones.
pub fn track_set_from_ground_truth(records: &[crate::mot_io::GroundTruthRecord]) -> TrackSet {
    let mut set = TrackSet::new();
    for r in records {
        if r.consider {
            set.entry(r.frame).or_default().push((r.identity, r.bbox));
        }
    }
    set
}
