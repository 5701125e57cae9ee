//! Tracking and segmentation evaluation: CLEAR-MOT accuracy with sticky plus
//! optimal-assignment matching, and COCO-protocol average precision.

mod coco_ap;
mod hungarian;
mod mot;

pub use coco_ap::{evaluate_coco_ap, ApReport, ApRow, AreaRange, DEFAULT_MAX_DETS, IOU_THRESHOLDS};
pub use hungarian::{hungarian, Assignment};
pub use mot::{
    evaluate_mot, event_rates, match_frame, mota, Denominator, FrameMatch, MotConfig, MotFrameLog, MotReport,
};
