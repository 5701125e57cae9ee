//! Annotation interchange: labelme documents in, COCO datasets and
//! prediction JSON-Lines in and out, dataset splitting and frame sampling.

mod coco;
mod convert;
mod labelme;
mod predictions;
mod sampling;
mod split;

pub use coco::{read_coco, write_coco, CocoAnnotation, CocoCategory, CocoDataset, CocoImage};
pub use convert::{coco_to_detections, keypoint_to_region, labelme_to_coco, DEFAULT_KEYPOINT_RADIUS};
pub use labelme::{parse_labelme, LabelmeDocument, Shape, ShapeType};
pub use predictions::{parse_predictions, write_predictions};
pub use sampling::{sample_frames, SamplingStrategy};
pub use split::{split_dataset, SplitResult, DEFAULT_SPLIT_RATIO};
