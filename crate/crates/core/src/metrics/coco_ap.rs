use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{CocoAnnotation, CocoDataset};
use crate::geometry::RleMask;
use crate::tracking::DetectionRecord;

pub const DEFAULT_MAX_DETS: usize = 100;

/// 0.50, 0.55, ..., 0.95
pub const IOU_THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

const RECALL_POINTS: usize = 101;
const SMALL_MAX: f64 = 32.0 * 32.0;
const MEDIUM_MAX: f64 = 96.0 * 96.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaRange {
    All,
    /// area < 32^2
    Small,
    /// 32^2 <= area <= 96^2
    Medium,
    /// area > 96^2
    Large,
}

impl AreaRange {
    pub const ALL: [AreaRange; 4] = [AreaRange::All, AreaRange::Small, AreaRange::Medium, AreaRange::Large];

    pub fn contains(self, area: f64) -> bool {
        match self {
            AreaRange::All => true,
            AreaRange::Small => area < SMALL_MAX,
            AreaRange::Medium => (SMALL_MAX..=MEDIUM_MAX).contains(&area),
            AreaRange::Large => area > MEDIUM_MAX,
        }
    }
}

/// One row of an AP table. Values are fractions in [0, 1]; `None` marks a
/// column with no ground truth to score against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRow {
    pub name: String,
    #[serde(rename = "AP")]
    pub ap: Option<f64>,
    #[serde(rename = "AP50")]
    pub ap50: Option<f64>,
    #[serde(rename = "AP75")]
    pub ap75: Option<f64>,
    #[serde(rename = "APS")]
    pub ap_small: Option<f64>,
    #[serde(rename = "APM")]
    pub ap_medium: Option<f64>,
    #[serde(rename = "APL")]
    pub ap_large: Option<f64>,
}

impl ApRow {
    pub fn values(&self) -> [Option<f64>; 6] {
        [
            self.ap,
            self.ap50,
            self.ap75,
            self.ap_small,
            self.ap_medium,
            self.ap_large,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ApReport {
    pub rows: Vec<ApRow>,
}

impl ApReport {
    /// Column-wise mean over the rows that define each value.
    pub fn summary(&self, name: &str) -> ApRow {
        let col = |k: usize| -> Option<f64> {
            let vals: Vec<f64> = self.rows.iter().filter_map(|r| r.values()[k]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        ApRow {
            name: name.to_string(),
            ap: col(0),
            ap50: col(1),
            ap75: col(2),
            ap_small: col(3),
            ap_medium: col(4),
            ap_large: col(5),
        }
    }
}

/// Detections and ground truth of one (image, category) cell with their
/// IoU matrix, computed once and reused for every threshold and area range.
struct Cell<'a> {
    gts: Vec<&'a CocoAnnotation>,
    /// `(score, area)` of the kept detections, score-descending.
    dets: Vec<(f64, f64)>,
    /// `ious[d][g]`
    ious: Vec<Vec<f64>>,
}

/// COCO-protocol segmentation AP per category.
///
/// Predictions are placed on ground-truth images by frame number (see
/// [`CocoDataset::frame_indices`]) and on categories by label name. Per
/// image and category, at most `max_dets` highest-scoring detections are
/// scored. Crowd ground truth is ignored and may absorb any number of
/// detections.
pub fn evaluate_coco_ap(gt: &CocoDataset, preds: &[DetectionRecord], max_dets: usize) -> Result<ApReport> {
    let frame_to_image: HashMap<u64, u64> = gt.frame_indices().into_iter().map(|(img, f)| (f, img)).collect();
    let image_dims: HashMap<u64, (u32, u32)> = gt.images.iter().map(|i| (i.id, (i.height, i.width))).collect();

    // (category, image) -> detections in input order
    let mut det_cells: BTreeMap<(u64, u64), Vec<&DetectionRecord>> = BTreeMap::new();
    for d in preds {
        let cat = gt
            .category_by_name(&d.label)
            .ok_or_else(|| Error::Schema(format!("prediction label {:?} is not a ground-truth category", d.label)))?;
        let img = frame_to_image
            .get(&d.frame)
            .ok_or_else(|| Error::Schema(format!("prediction frame {} has no ground-truth image", d.frame)))?;
        det_cells.entry((cat.id, *img)).or_default().push(d);
    }
    let mut gt_cells: BTreeMap<(u64, u64), Vec<&CocoAnnotation>> = BTreeMap::new();
    for a in &gt.annotations {
        gt_cells.entry((a.category_id, a.image_id)).or_default().push(a);
    }

    let mut image_ids: Vec<u64> = gt.images.iter().map(|i| i.id).collect();
    image_ids.sort_unstable();
    let mut categories = gt.categories.clone();
    categories.sort_by_key(|c| c.id);

    let rows = categories
        .par_iter()
        .map(|cat| -> Result<ApRow> {
            let mut cells = Vec::new();
            for &img in &image_ids {
                let gts = gt_cells.get(&(cat.id, img)).cloned().unwrap_or_default();
                let mut dets = det_cells.get(&(cat.id, img)).cloned().unwrap_or_default();
                if gts.is_empty() && dets.is_empty() {
                    continue;
                }
                dets.sort_by(|a, b| b.score.total_cmp(&a.score));
                dets.truncate(max_dets);
                let (h, w) = image_dims[&img];
                let gt_masks = gts
                    .iter()
                    .map(|a| a.segmentation.to_rle(h, w))
                    .collect::<Result<Vec<RleMask>>>()?;
                let mut ious = Vec::with_capacity(dets.len());
                let mut det_info = Vec::with_capacity(dets.len());
                for d in &dets {
                    let m = d.segmentation.to_rle(h, w)?;
                    ious.push(
                        gt_masks
                            .iter()
                            .zip(&gts)
                            .map(|(g, a)| m.iou(g, a.iscrowd != 0))
                            .collect::<Result<Vec<f64>>>()?,
                    );
                    det_info.push((d.score, m.area() as f64));
                }
                cells.push(Cell {
                    gts,
                    dets: det_info,
                    ious,
                });
            }
            let ap_over = |range: AreaRange, thresholds: &[f64]| -> Option<f64> {
                let per: Option<Vec<f64>> = thresholds
                    .iter()
                    .map(|&t| average_precision(&cells, range, t))
                    .collect();
                per.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            };
            Ok(ApRow {
                name: cat.name.clone(),
                ap: ap_over(AreaRange::All, &IOU_THRESHOLDS),
                ap50: ap_over(AreaRange::All, &[0.5]),
                ap75: ap_over(AreaRange::All, &[0.75]),
                ap_small: ap_over(AreaRange::Small, &IOU_THRESHOLDS),
                ap_medium: ap_over(AreaRange::Medium, &IOU_THRESHOLDS),
                ap_large: ap_over(AreaRange::Large, &IOU_THRESHOLDS),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApReport { rows })
}

#[derive(Clone, Copy, PartialEq)]
enum Outcome {
    TruePositive,
    FalsePositive,
    Ignored,
}

/// 101-point interpolated AP of one category at one IoU threshold, or `None`
/// if no ground truth falls in `range`.
fn average_precision(cells: &[Cell<'_>], range: AreaRange, thr: f64) -> Option<f64> {
    let mut scored: Vec<(f64, Outcome)> = Vec::new();
    let mut n_positive = 0usize;
    for cell in cells {
        let ignore: Vec<bool> = cell
            .gts
            .iter()
            .map(|a| a.iscrowd != 0 || !range.contains(a.area))
            .collect();
        n_positive += ignore.iter().filter(|&&i| !i).count();
        // non-ignored ground truth is tried first
        let mut order: Vec<usize> = (0..cell.gts.len()).collect();
        order.sort_by_key(|&g| ignore[g]);
        let mut taken = vec![false; cell.gts.len()];
        for (d, &(score, area)) in cell.dets.iter().enumerate() {
            let mut best: Option<usize> = None;
            let mut best_iou = thr.min(1.0 - 1e-10);
            for &g in &order {
                if taken[g] && cell.gts[g].iscrowd == 0 {
                    continue;
                }
                // once matched to a real object, stop before ignored ones
                if let Some(b) = best {
                    if !ignore[b] && ignore[g] {
                        break;
                    }
                }
                if cell.ious[d][g] < best_iou {
                    continue;
                }
                best_iou = cell.ious[d][g];
                best = Some(g);
            }
            let outcome = match best {
                Some(g) => {
                    taken[g] = true;
                    if ignore[g] {
                        Outcome::Ignored
                    } else {
                        Outcome::TruePositive
                    }
                }
                None if !range.contains(area) => Outcome::Ignored,
                None => Outcome::FalsePositive,
            };
            scored.push((score, outcome));
        }
    }
    if n_positive == 0 {
        return None;
    }
    // stable: equal scores keep image order, then per-image order
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut recall = Vec::new();
    let mut precision = Vec::new();
    for &(_, o) in &scored {
        match o {
            Outcome::TruePositive => tp += 1,
            Outcome::FalsePositive => fp += 1,
            Outcome::Ignored => continue,
        }
        recall.push(tp as f64 / n_positive as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    // precision envelope, right to left
    for i in (1..precision.len()).rev() {
        if precision[i] > precision[i - 1] {
            precision[i - 1] = precision[i];
        }
    }
    let sum: f64 = (0..RECALL_POINTS)
        .map(|k| {
            let r = k as f64 / (RECALL_POINTS - 1) as f64;
            let idx = recall.partition_point(|&x| x < r);
            precision.get(idx).copied().unwrap_or(0.0)
        })
        .sum();
    Some(sum / RECALL_POINTS as f64)
}
