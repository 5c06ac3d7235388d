//! MOT-challenge file I/O: detection files, ground-truth files, result
//! files, sequence metadata, and frame image loading.
//!
//! Detection lines carry 10 comma-separated fields
//! `frame,id,x,y,w,h,conf,-1,-1,-1`; ground-truth lines carry 9
//! `frame,id,x,y,w,h,flag,class,visibility`. Frames are 1-based end to end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::RgbImage;
use thiserror::Error;

use crate::geometry::BoundingBox;
use crate::tracker::FrameResult;

#[derive(Debug, Error)]
pub enum MotIoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: expected {expected} comma-separated fields, found {found}")]
    FieldCount { path: PathBuf, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: field {column} ({name}): invalid number {value:?}")]
    BadNumber { path: PathBuf, line: usize, column: usize, name: &'static str, value: String },
    #[error("{path}:{line}: frame index must be >= 1")]
    BadFrame { path: PathBuf, line: usize },
    #[error("corrupt image file {path}: {message}")]
    CorruptImage { path: PathBuf, message: String },
    #[error("{path}: missing required key {key}")]
    MissingKey { path: PathBuf, key: &'static str },
}

/// One detection-file line.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame: u32,
    pub id: i64,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

/// One ground-truth line. `consider` is the evaluation flag; records with
/// `consider == false` are ignored by scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub frame: u32,
    pub identity: i64,
    pub bbox: BoundingBox,
    pub consider: bool,
    pub class: i64,
    pub visibility: f64,
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    path: &Path,
    line: usize,
    column: usize,
    name: &'static str,
) -> Result<T, MotIoError> {
    raw.trim().parse::<T>().map_err(|_| MotIoError::BadNumber {
        path: path.to_path_buf(),
        line,
        column,
        name,
        value: raw.trim().to_string(),
    })
}

/// Reads a 10-field detection file, grouped by frame, original order
/// preserved within each frame. Empty files yield an empty map.
pub fn read_detections(path: &Path) -> Result<BTreeMap<u32, Vec<DetectionRecord>>, MotIoError> {
    let text = fs::read_to_string(path)
        .map_err(|source| MotIoError::Read { path: path.to_path_buf(), source })?;
    let mut by_frame: BTreeMap<u32, Vec<DetectionRecord>> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(MotIoError::FieldCount {
                path: path.to_path_buf(),
                line: line_no,
                expected: 10,
                found: fields.len(),
            });
        }
        let frame: u32 = parse_field(fields[0], path, line_no, 1, "frame")?;
        if frame < 1 {
            return Err(MotIoError::BadFrame { path: path.to_path_buf(), line: line_no });
        }
        let id: i64 = parse_field(fields[1], path, line_no, 2, "id")?;
        let x: f64 = parse_field(fields[2], path, line_no, 3, "x")?;
        let y: f64 = parse_field(fields[3], path, line_no, 4, "y")?;
        let w: f64 = parse_field(fields[4], path, line_no, 5, "w")?;
        let h: f64 = parse_field(fields[5], path, line_no, 6, "h")?;
        let confidence: f64 = parse_field(fields[6], path, line_no, 7, "confidence")?;
        for (i, name) in [(7, "world_x"), (8, "world_y"), (9, "world_z")] {
            let _: f64 = parse_field(fields[i], path, line_no, i + 1, name)?;
        }
        by_frame.entry(frame).or_default().push(DetectionRecord {
            frame,
            id,
            bbox: BoundingBox::new(x, y, w.max(0.0), h.max(0.0)),
            confidence,
        });
    }
    Ok(by_frame)
}

/// Reads a ground-truth file (9 fields) or a result file (10 fields).
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruthRecord>, MotIoError> {
    let text = fs::read_to_string(path)
        .map_err(|source| MotIoError::Read { path: path.to_path_buf(), source })?;
    let mut records = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 && fields.len() != 10 {
            return Err(MotIoError::FieldCount {
                path: path.to_path_buf(),
                line: line_no,
                expected: 9,
                found: fields.len(),
            });
        }
        let frame: u32 = parse_field(fields[0], path, line_no, 1, "frame")?;
        if frame < 1 {
            return Err(MotIoError::BadFrame { path: path.to_path_buf(), line: line_no });
        }
        let identity: i64 = parse_field(fields[1], path, line_no, 2, "identity")?;
        let x: f64 = parse_field(fields[2], path, line_no, 3, "x")?;
        let y: f64 = parse_field(fields[3], path, line_no, 4, "y")?;
        let w: f64 = parse_field(fields[4], path, line_no, 5, "w")?;
        let h: f64 = parse_field(fields[5], path, line_no, 6, "h")?;
        let flag: f64 = parse_field(fields[6], path, line_no, 7, "consider")?;
        let (class, visibility) = if fields.len() == 9 {
            (
                parse_field::<i64>(fields[7], path, line_no, 8, "class")?,
                parse_field::<f64>(fields[8], path, line_no, 9, "visibility")?,
            )
        } else {
            // 10-field result file: no class/visibility semantics
            (1, 1.0)
        };
        records.push(GroundTruthRecord {
            frame,
            identity,
            bbox: BoundingBox::new(x, y, w.max(0.0), h.max(0.0)),
            consider: flag != 0.0,
            class,
            visibility,
        });
    }
    Ok(records)
}

/// Writes tracker output in MOT result format: 2-decimal coordinates,
/// confidence written as a constant `1`, `\n` line endings. Byte-identical
/// across runs for identical input.
pub fn write_results(path: &Path, results: &[FrameResult]) -> Result<(), MotIoError> {
    let mut out = String::new();
    for fr in results {
        for t in &fr.tracks {
            out.push_str(&format!(
                "{},{},{:.2},{:.2},{:.2},{:.2},1,-1,-1,-1\n",
                fr.frame_id, t.track_id, t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h
            ));
        }
    }
    let mut file = fs::File::create(path)
        .map_err(|source| MotIoError::Write { path: path.to_path_buf(), source })?;
    file.write_all(out.as_bytes())
        .map_err(|source| MotIoError::Write { path: path.to_path_buf(), source })?;
    Ok(())
}

/// Reads a fingerprint sidecar file: a `#dim=F` header line followed by
/// `frame,det_index,v1,...,vF` records. Returns the declared dimension and
/// the vectors keyed by (frame, detection index).
pub fn read_fingerprint_sidecar(
    path: &Path,
) -> Result<(usize, BTreeMap<(u32, u32), crate::fingerprint::Fingerprint>), MotIoError> {
    let text = fs::read_to_string(path)
        .map_err(|source| MotIoError::Read { path: path.to_path_buf(), source })?;
    let mut lines = text.lines().enumerate();
    let dim: usize = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(MotIoError::MissingKey { path: path.to_path_buf(), key: "#dim" });
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(rest) = line.strip_prefix("#dim=") else {
            return Err(MotIoError::MissingKey { path: path.to_path_buf(), key: "#dim" });
        };
        break parse_field(rest, path, idx + 1, 1, "dim")?;
    };
    let mut map = BTreeMap::new();
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(MotIoError::FieldCount {
                path: path.to_path_buf(),
                line: line_no,
                expected: dim + 2,
                found: fields.len(),
            });
        }
        let frame: u32 = parse_field(fields[0], path, line_no, 1, "frame")?;
        let det_index: u32 = parse_field(fields[1], path, line_no, 2, "det_index")?;
        let mut values = Vec::with_capacity(dim);
        for (i, raw) in fields[2..].iter().enumerate() {
            values.push(parse_field::<f64>(raw, path, line_no, i + 3, "component")?);
        }
        if let Some(fp) = crate::fingerprint::Fingerprint::new(values) {
            map.insert((frame, det_index), fp);
        }
        // all-zero vectors stay null: the detection falls back to geometry costs
    }
    Ok((dim, map))
}

/// Sequence metadata parsed from `seqinfo.ini`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInfo {
    pub name: String,
    pub im_dir: String,
    pub im_ext: String,
    pub frame_rate: f64,
    pub seq_length: u32,
    pub im_width: u32,
    pub im_height: u32,
}

pub fn read_seqinfo(path: &Path) -> Result<SequenceInfo, MotIoError> {
    let text = fs::read_to_string(path)
        .map_err(|source| MotIoError::Read { path: path.to_path_buf(), source })?;
    let mut kv = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('[') || line.starts_with(';') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            kv.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
    }
    let get = |key: &'static str| -> Result<&String, MotIoError> {
        kv.get(key).ok_or(MotIoError::MissingKey { path: path.to_path_buf(), key })
    };
    let parse_num = |key: &'static str| -> Result<f64, MotIoError> {
        get(key)?.parse::<f64>().map_err(|_| MotIoError::BadNumber {
            path: path.to_path_buf(),
            line: 0,
            column: 0,
            name: "seqinfo value",
            value: kv.get(key).cloned().unwrap_or_default(),
        })
    };
    Ok(SequenceInfo {
        name: get("name")?.clone(),
        im_dir: kv.get("imdir").cloned().unwrap_or_else(|| "img1".into()),
        im_ext: kv.get("imext").cloned().unwrap_or_else(|| ".jpg".into()),
        frame_rate: parse_num("framerate")?,
        seq_length: parse_num("seqlength")? as u32,
        im_width: parse_num("imwidth")? as u32,
        im_height: parse_num("imheight")? as u32,
    })
}

/// Loads the frame image `<seq>/<imDir>/000001<imExt>`. A missing file or
/// directory is `Ok(None)` (geometry-only run); a present but undecodable
/// file is an error naming the file.
pub fn load_frame_image(
    seq_dir: &Path,
    im_dir: &str,
    im_ext: &str,
    frame: u32,
) -> Result<Option<RgbImage>, MotIoError> {
    let path = seq_dir.join(im_dir).join(format!("{frame:06}{im_ext}"));
    if !path.exists() {
        return Ok(None);
    }
    match image::open(&path) {
        Ok(img) => Ok(Some(img.to_rgb8())),
        Err(e) => Err(MotIoError::CorruptImage { path, message: e.to_string() }),
    }
}
