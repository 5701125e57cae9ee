//! Identity tracks from per-frame classified detections.
//!
//! Each label names one individual, so a track is simply the time series of
//! that label's detections. There is no motion model and no cross-frame
//! matching.

mod assemble;
mod csv_io;
mod events;

pub use assemble::{
    assemble_tracks, assemble_tracks_in, filter_by_score, interpolate_gaps, resolve_all_duplicates, resolve_duplicates,
    Track, TrackState, DEFAULT_SCORE_THRESHOLD,
};
pub use csv_io::{read_tracks_csv, write_tracks_csv};
pub use events::{detect_novel_spots, segment_bouts, Bout, SpotEvent, DEFAULT_SPOT_PERSISTENCE};

use crate::geometry::{BoundingBox, Segmentation};

/// One model output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame: u64,
    /// Identity (or behavior) class.
    pub label: String,
    pub score: f64,
    pub segmentation: Segmentation,
    pub bbox: BoundingBox,
}
