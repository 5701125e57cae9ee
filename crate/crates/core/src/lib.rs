//! Mask geometry, dataset conversion, identity-as-class track assembly,
//! CLEAR-MOT / COCO-AP evaluation and behavior analytics for multi-animal
//! instance segmentation output.
//!
//! Every animal is its own class, so a per-frame classifier already answers
//! "which animal is this". Tracks fall out of grouping detections by label;
//! no motion model or frame-to-frame association is involved.

pub mod analytics;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod metrics;
pub mod synth;
pub mod tracking;

pub use error::{Error, Result};
pub use formats::{CocoDataset, LabelmeDocument};
pub use geometry::{BinaryMask, BoundingBox, Point2D, Polygon, RleMask, Segmentation};
pub use metrics::{ApReport, MotConfig, MotReport};
pub use tracking::{DetectionRecord, Track, TrackState};
