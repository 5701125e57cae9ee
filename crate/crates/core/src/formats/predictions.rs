use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::tracking::DetectionRecord;

use super::coco::segmentation_json;

#[derive(Deserialize)]
struct WireRecord {
    frame: u64,
    label: String,
    score: f64,
    #[serde(default)]
    bbox: Option<BoundingBox>,
    segmentation: serde_json::Value,
}

#[derive(Serialize)]
struct WireOut<'a> {
    frame: u64,
    label: &'a str,
    score: f64,
    bbox: BoundingBox,
    segmentation: serde_json::Value,
}

/// Reads a JSON-Lines prediction stream, one detection per line. Blank lines
/// are skipped; errors carry the 1-based line number.
pub fn parse_predictions<R: BufRead>(reader: R) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireRecord = serde_json::from_str(&line).map_err(|e| Error::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        if !(0.0..=1.0).contains(&wire.score) {
            return Err(Error::ScoreRange {
                line: lineno,
                score: wire.score,
            });
        }
        if wire.label.is_empty() {
            return Err(Error::Line {
                line: lineno,
                message: "empty label".into(),
            });
        }
        let segmentation = segmentation_json::from_value(wire.segmentation).map_err(|e| Error::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        let bbox = match wire.bbox {
            Some(b) if !b.is_valid() => {
                return Err(Error::Line {
                    line: lineno,
                    message: format!("invalid bbox {:?}", <[f64; 4]>::from(b)),
                })
            }
            Some(b) => b,
            None => segmentation.bbox(),
        };
        out.push(DetectionRecord {
            frame: wire.frame,
            label: wire.label,
            score: wire.score,
            segmentation,
            bbox,
        });
    }
    Ok(out)
}

/// Serializes detections in the same JSON-Lines layout `parse_predictions`
/// reads. RLE segmentations use the compressed string form.
pub fn write_predictions(records: &[DetectionRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        let wire = WireOut {
            frame: r.frame,
            label: &r.label,
            score: r.score,
            bbox: r.bbox,
            segmentation: segmentation_json::to_value(&r.segmentation),
        };
        serde_json::to_writer(&mut out, &wire).expect("in-memory write");
        out.push(b'\n');
    }
    out
}
