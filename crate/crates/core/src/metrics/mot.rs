use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segmentation_iou, BoundingBox, Segmentation};
use crate::tracking::Track;

use super::hungarian::hungarian;

/// What `N_GT` in the MOTA denominator counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Ground-truth objects summed over frames (the CLEAR-MOT definition).
    #[default]
    GtObjects,
    /// Number of evaluated frames.
    Frames,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotConfig {
    pub iou_threshold: f64,
    pub denominator: Denominator,
}

impl Default for MotConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            denominator: Denominator::GtObjects,
        }
    }
}

impl MotConfig {
    pub fn new(iou_threshold: f64, denominator: Denominator) -> Result<Self> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(Error::invalid_argument(format!(
                "IoU threshold must be in (0, 1], got {iou_threshold}"
            )));
        }
        Ok(Self {
            iou_threshold,
            denominator,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMatch {
    pub gt_id: String,
    pub pred_label: String,
    pub iou: f64,
}

/// Outcome of matching one frame. The four lists are disjoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MotFrameLog {
    pub frame: u64,
    pub matches: Vec<FrameMatch>,
    pub misses: Vec<String>,
    pub false_positives: Vec<String>,
    /// Ground-truth ids whose matched label changed in this frame.
    pub switches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotReport {
    pub false_negatives: u64,
    pub id_switches: u64,
    pub false_positives: u64,
    pub n_gt: u64,
    pub n_frames: u64,
    pub n_matches: u64,
    pub mota: f64,
    /// Mean IoU over all matches; 0 when nothing matched.
    pub motp: f64,
    pub per_frame_log: Vec<MotFrameLog>,
}

/// `1 - (fn + ids + fp) / n_gt`.
pub fn mota(false_negatives: u64, id_switches: u64, false_positives: u64, n_gt: u64) -> Result<f64> {
    if n_gt == 0 {
        return Err(Error::UndefinedMetric("MOTA with zero ground-truth objects".into()));
    }
    Ok(1.0 - (false_negatives + id_switches + false_positives) as f64 / n_gt as f64)
}

/// Event count as a percentage of frames.
pub fn event_rates(count: u64, n_frames: u64) -> Result<f64> {
    if n_frames == 0 {
        return Err(Error::UndefinedMetric("event rate over zero frames".into()));
    }
    Ok(100.0 * count as f64 / n_frames as f64)
}

struct Shape<'a> {
    seg: &'a Segmentation,
    bbox: BoundingBox,
}

fn iou_pruned(a: &Shape<'_>, b: &Shape<'_>) -> Result<f64> {
    if !a.bbox.overlaps(&b.bbox) {
        return Ok(0.0);
    }
    segmentation_iou(a.seg, b.seg)
}

/// Matches one frame.
///
/// Correspondences from `prev` (ground-truth id to the label it was last
/// matched with) are kept first while their IoU still reaches the threshold.
/// The remaining objects and predictions are assigned by minimum total
/// `1 - IoU`, and pairs below the threshold are dropped. A ground-truth
/// object matched to a label other than its previous one is a switch.
pub fn match_frame(
    frame: u64,
    gt: &[(&str, &Segmentation)],
    preds: &[(&str, &Segmentation)],
    prev: &HashMap<String, String>,
    cfg: &MotConfig,
) -> Result<MotFrameLog> {
    let mut seen = HashSet::new();
    if let Some((id, _)) = gt.iter().find(|(id, _)| !seen.insert(*id)) {
        return Err(Error::invalid_argument(format!(
            "duplicate ground-truth id {id:?} in frame {frame}"
        )));
    }
    let thr = cfg.iou_threshold;
    let gts: Vec<Shape> = gt.iter().map(|(_, s)| Shape { seg: s, bbox: s.bbox() }).collect();
    let prs: Vec<Shape> = preds.iter().map(|(_, s)| Shape { seg: s, bbox: s.bbox() }).collect();
    let mut iou = vec![vec![0.0; prs.len()]; gts.len()];
    for (g, gs) in gts.iter().enumerate() {
        for (p, ps) in prs.iter().enumerate() {
            iou[g][p] = iou_pruned(gs, ps)?;
        }
    }

    let mut gt_match: Vec<Option<usize>> = vec![None; gt.len()];
    let mut pred_used = vec![false; preds.len()];

    // sticky correspondences
    for (g, (id, _)) in gt.iter().enumerate() {
        let Some(label) = prev.get(*id) else { continue };
        if let Some(p) = (0..preds.len()).find(|&p| !pred_used[p] && preds[p].0 == label.as_str()) {
            if iou[g][p] >= thr {
                gt_match[g] = Some(p);
                pred_used[p] = true;
            }
        }
    }

    // optimal assignment of the rest
    let free_g: Vec<usize> = (0..gt.len()).filter(|&g| gt_match[g].is_none()).collect();
    let free_p: Vec<usize> = (0..preds.len()).filter(|&p| !pred_used[p]).collect();
    if !free_g.is_empty() && !free_p.is_empty() {
        // Below-threshold pairs cost more than any set of valid pairs can
        // save, so the solver maximizes the number of valid matches first.
        let forbidden = 2.0 * (free_g.len().min(free_p.len()) + 1) as f64;
        let cost: Vec<Vec<f64>> = free_g
            .iter()
            .map(|&g| {
                free_p
                    .iter()
                    .map(|&p| if iou[g][p] >= thr { 1.0 - iou[g][p] } else { forbidden })
                    .collect()
            })
            .collect();
        for (r, c) in hungarian(&cost)?.pairs {
            let (g, p) = (free_g[r], free_p[c]);
            if iou[g][p] >= thr {
                gt_match[g] = Some(p);
                pred_used[p] = true;
            }
        }
    }

    let mut log = MotFrameLog {
        frame,
        ..Default::default()
    };
    for (g, (id, _)) in gt.iter().enumerate() {
        match gt_match[g] {
            Some(p) => {
                let label = preds[p].0;
                if prev.get(*id).is_some_and(|l| l != label) {
                    log.switches.push(id.to_string());
                }
                log.matches.push(FrameMatch {
                    gt_id: id.to_string(),
                    pred_label: label.to_string(),
                    iou: iou[g][p],
                });
            }
            None => log.misses.push(id.to_string()),
        }
    }
    log.false_positives = (0..preds.len())
        .filter(|&p| !pred_used[p])
        .map(|p| preds[p].0.to_string())
        .collect();
    Ok(log)
}

/// CLEAR-MOT over a whole sequence: [`match_frame`] folded over the union of
/// frames in both track sets, in increasing order.
///
/// Present ground-truth states must carry a segmentation. Prediction states
/// without one (interpolated fill) are not counted as detections.
pub fn evaluate_mot(gt_tracks: &[Track], pred_tracks: &[Track], cfg: &MotConfig) -> Result<MotReport> {
    if gt_tracks.is_empty() {
        return Err(Error::UndefinedMetric("no ground-truth tracks".into()));
    }
    let mut frames: BTreeSet<u64> = BTreeSet::new();
    for t in gt_tracks {
        frames.extend(t.states.iter().map(|s| s.frame));
    }
    for t in pred_tracks {
        frames.extend(t.present().map(|s| s.frame));
    }

    let mut missing = Vec::new();
    for t in gt_tracks {
        for s in t.present().filter(|s| s.segmentation.is_none()) {
            missing.push(format!("{}@{}", t.label, s.frame));
        }
    }
    if !missing.is_empty() {
        missing.truncate(20);
        return Err(Error::MissingData(format!(
            "ground-truth states without segmentation: {}",
            missing.join(", ")
        )));
    }

    // cursors into each track's sorted states
    let mut gt_cur = vec![0usize; gt_tracks.len()];
    let mut pr_cur = vec![0usize; pred_tracks.len()];
    let at = |t: &'_ Track, cur: &mut usize, frame: u64| -> Option<usize> {
        while *cur < t.states.len() && t.states[*cur].frame < frame {
            *cur += 1;
        }
        (*cur < t.states.len() && t.states[*cur].frame == frame).then_some(*cur)
    };

    let mut prev: HashMap<String, String> = HashMap::new();
    let mut report = MotReport {
        false_negatives: 0,
        id_switches: 0,
        false_positives: 0,
        n_gt: 0,
        n_frames: frames.len() as u64,
        n_matches: 0,
        mota: 0.0,
        motp: 0.0,
        per_frame_log: Vec::with_capacity(frames.len()),
    };
    let mut gt_objects = 0u64;
    let mut iou_sum = 0.0;
    for &frame in &frames {
        let mut gt = Vec::new();
        for (k, t) in gt_tracks.iter().enumerate() {
            if let Some(i) = at(t, &mut gt_cur[k], frame) {
                let s = &t.states[i];
                if s.present {
                    gt.push((t.label.as_str(), s.segmentation.as_ref().unwrap()));
                }
            }
        }
        let mut preds = Vec::new();
        for (k, t) in pred_tracks.iter().enumerate() {
            if let Some(i) = at(t, &mut pr_cur[k], frame) {
                if let Some(seg) = t.states[i].segmentation.as_ref().filter(|_| t.states[i].present) {
                    preds.push((t.label.as_str(), seg));
                }
            }
        }
        let log = match_frame(frame, &gt, &preds, &prev, cfg)?;
        gt_objects += gt.len() as u64;
        report.false_negatives += log.misses.len() as u64;
        report.false_positives += log.false_positives.len() as u64;
        report.id_switches += log.switches.len() as u64;
        report.n_matches += log.matches.len() as u64;
        for m in &log.matches {
            iou_sum += m.iou;
            prev.insert(m.gt_id.clone(), m.pred_label.clone());
        }
        report.per_frame_log.push(log);
    }
    report.n_gt = match cfg.denominator {
        Denominator::GtObjects => gt_objects,
        Denominator::Frames => report.n_frames,
    };
    report.mota = mota(
        report.false_negatives,
        report.id_switches,
        report.false_positives,
        report.n_gt,
    )?;
    report.motp = if report.n_matches == 0 {
        0.0
    } else {
        iou_sum / report.n_matches as f64
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BinaryMask, Point2D};
    use crate::tracking::{assemble_tracks, DetectionRecord};

    fn block(r0: u32, c0: u32, rh: u32, cw: u32) -> Segmentation {
        Segmentation::Rle(BinaryMask::from_fn(60, 60, |r, c| r >= r0 && r < r0 + rh && c >= c0 && c < c0 + cw).to_rle())
    }

    #[test]
    fn mota_reported_counts() {
        // 38 FN, 52 IDS, 11 FP over 10,575 frames
        let m = mota(38, 52, 11, 10575).unwrap();
        assert!((m - 0.990449).abs() < 1e-6);
        assert_eq!(mota(0, 0, 0, 7).unwrap(), 1.0);
        assert_eq!(mota(7, 0, 0, 7).unwrap(), 0.0);
        assert!(matches!(mota(0, 0, 0, 0), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn rates() {
        assert!((event_rates(52, 10575).unwrap() - 0.4917).abs() < 1e-4);
        assert!((event_rates(38, 10575).unwrap() - 0.3593).abs() < 1e-4);
        assert!((event_rates(11, 10575).unwrap() - 0.1040).abs() < 1e-4);
        assert!(event_rates(1, 0).is_err());
    }

    #[test]
    fn config_bounds() {
        assert!(MotConfig::new(0.0, Denominator::Frames).is_err());
        assert!(MotConfig::new(1.0, Denominator::Frames).is_ok());
    }

    #[test]
    fn diagonal_match_no_errors() {
        // gt0 vs A: IoU 0.8 (100 px vs 80 px subset), gt1 vs B: 0.7
        let g0 = block(0, 0, 10, 10);
        let g1 = block(30, 30, 10, 10);
        let a = block(0, 0, 10, 8);
        let b = block(30, 30, 10, 7);
        let log = match_frame(
            0,
            &[("g0", &g0), ("g1", &g1)],
            &[("A", &a), ("B", &b)],
            &HashMap::new(),
            &MotConfig::default(),
        )
        .unwrap();
        assert_eq!(log.matches.len(), 2);
        assert_eq!(
            (log.matches[0].pred_label.as_str(), log.matches[1].pred_label.as_str()),
            ("A", "B")
        );
        assert!((log.matches[0].iou - 0.8).abs() < 1e-12);
        assert!(log.misses.is_empty() && log.false_positives.is_empty() && log.switches.is_empty());
    }

    #[test]
    fn sticky_beats_better_overlap() {
        let g = block(0, 0, 10, 10);
        let a = block(0, 0, 10, 6); // IoU 0.6
        let b = block(0, 0, 9, 10); // IoU 0.9
        let prev = HashMap::from([("g1".to_string(), "A".to_string())]);
        let log = match_frame(1, &[("g1", &g)], &[("A", &a), ("B", &b)], &prev, &MotConfig::default()).unwrap();
        assert_eq!(log.matches[0].pred_label, "A");
        assert_eq!(log.false_positives, vec!["B".to_string()]);
        assert!(log.switches.is_empty());
    }

    #[test]
    fn switch_when_label_changes() {
        let g = block(0, 0, 10, 10);
        let b = block(0, 0, 8, 10);
        let prev = HashMap::from([("g1".to_string(), "A".to_string())]);
        let log = match_frame(1, &[("g1", &g)], &[("B", &b)], &prev, &MotConfig::default()).unwrap();
        assert_eq!(log.switches, vec!["g1".to_string()]);
    }

    #[test]
    fn duplicate_gt_rejected() {
        let g = block(0, 0, 10, 10);
        assert!(match_frame(0, &[("g", &g), ("g", &g)], &[], &HashMap::new(), &MotConfig::default()).is_err());
    }

    fn det(frame: u64, label: &str, seg: Segmentation) -> DetectionRecord {
        DetectionRecord {
            frame,
            label: label.into(),
            score: 1.0,
            bbox: seg.bbox(),
            segmentation: seg,
        }
    }

    #[test]
    fn identical_tracks() {
        let dets: Vec<_> = (0..5)
            .flat_map(|f| {
                [
                    det(f, "a", block(f as u32, 0, 5, 5)),
                    det(f, "b", block(0, 30 + f as u32, 5, 5)),
                ]
            })
            .collect();
        let t = assemble_tracks(&dets).unwrap();
        let r = evaluate_mot(&t, &t, &MotConfig::default()).unwrap();
        assert_eq!(
            (r.false_negatives, r.false_positives, r.id_switches, r.n_gt),
            (0, 0, 0, 10)
        );
        assert_eq!(r.mota, 1.0);
        assert_eq!(r.motp, 1.0);
    }

    #[test]
    fn permuted_labels_from_frame_k() {
        let gt: Vec<_> = (0..6)
            .flat_map(|f| [det(f, "a", block(0, 0, 5, 5)), det(f, "b", block(20, 20, 5, 5))])
            .collect();
        let pred: Vec<_> = gt
            .iter()
            .map(|d| {
                let mut d = d.clone();
                if d.frame >= 3 {
                    d.label = if d.label == "a" { "b".into() } else { "a".into() };
                }
                d
            })
            .collect();
        let r = evaluate_mot(
            &assemble_tracks(&gt).unwrap(),
            &assemble_tracks(&pred).unwrap(),
            &MotConfig::default(),
        )
        .unwrap();
        assert_eq!(r.id_switches, 2);
        for log in &r.per_frame_log {
            assert_eq!(log.switches.len(), if log.frame == 3 { 2 } else { 0 });
        }
    }

    #[test]
    fn frames_denominator() {
        let gt: Vec<_> = (0..4)
            .flat_map(|f| [det(f, "a", block(0, 0, 5, 5)), det(f, "b", block(20, 20, 5, 5))])
            .collect();
        let t = assemble_tracks(&gt).unwrap();
        let cfg = MotConfig::new(0.5, Denominator::Frames).unwrap();
        let r = evaluate_mot(&t, &t[..1], &cfg).unwrap();
        assert_eq!((r.n_gt, r.false_negatives), (4, 4));
        assert_eq!(r.mota, 0.0);
    }

    #[test]
    fn empty_gt_undefined() {
        assert!(matches!(
            evaluate_mot(&[], &[], &MotConfig::default()),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn missing_gt_segmentation() {
        let mut t = assemble_tracks(&[det(0, "a", block(0, 0, 5, 5))]).unwrap();
        t[0].states[0].segmentation = None;
        t[0].states[0].centroid = Some(Point2D::new(1.0, 1.0));
        assert!(matches!(
            evaluate_mot(&t, &[], &MotConfig::default()),
            Err(Error::MissingData(_))
        ));
    }
}
