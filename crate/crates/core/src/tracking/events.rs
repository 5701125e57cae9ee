use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::Point2D;

use super::DetectionRecord;

pub const DEFAULT_SPOT_PERSISTENCE: u64 = 3;

/// A stationary mark (e.g. a urine deposit) that stayed detected long enough
/// to count.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotEvent {
    pub first_frame: u64,
    pub location: Point2D,
    pub confirmed_frame: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bout {
    pub behavior: String,
    pub start_frame: u64,
    /// Inclusive.
    pub end_frame: u64,
}

struct Candidate {
    location: Point2D,
    first_frame: u64,
    frames: BTreeSet<u64>,
    confirmed: bool,
}

/// Finds newly appearing stationary spots among one class's detections.
///
/// A detection farther than `min_dist` from every known spot opens a
/// candidate at its centroid. Detections closer than `min_dist` to a
/// candidate add their frame to it; the candidate is confirmed once it has
/// been seen in `persistence` distinct frames. Confirmed spots absorb later
/// detections for the rest of the sequence. Events come out in confirmation
/// order.
pub fn detect_novel_spots(dets: &[DetectionRecord], min_dist: f64, persistence: u64) -> Result<Vec<SpotEvent>> {
    if min_dist.is_nan() || min_dist <= 0.0 {
        return Err(Error::invalid_argument(format!("min_dist must be > 0, got {min_dist}")));
    }
    if persistence == 0 {
        return Err(Error::invalid_argument("persistence must be >= 1"));
    }
    let mut order: Vec<&DetectionRecord> = dets.iter().collect();
    order.sort_by_key(|d| d.frame);

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut events = Vec::new();
    for d in order {
        let c = d.segmentation.centroid()?;
        // confirmed spots take precedence, then the nearest open candidate
        if candidates
            .iter()
            .any(|s| s.confirmed && s.location.distance(&c) < min_dist)
        {
            continue;
        }
        let nearest = candidates
            .iter_mut()
            .filter(|s| !s.confirmed)
            .map(|s| (s.location.distance(&c), s))
            .filter(|(dist, _)| *dist < min_dist)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let spot = match nearest {
            Some((_, s)) => s,
            None => {
                candidates.push(Candidate {
                    location: c,
                    first_frame: d.frame,
                    frames: BTreeSet::new(),
                    confirmed: false,
                });
                candidates.last_mut().unwrap()
            }
        };
        spot.frames.insert(d.frame);
        if spot.frames.len() as u64 >= persistence {
            spot.confirmed = true;
            events.push(SpotEvent {
                first_frame: spot.first_frame,
                location: spot.location,
                confirmed_frame: d.frame,
            });
        }
    }
    Ok(events)
}

/// Splits a per-frame behavior sequence (index = frame) into bouts.
///
/// Maximal constant runs shorter than `min_duration` are folded into the
/// preceding surviving bout; a short run with nothing before it is dropped.
/// Adjacent bouts that end up with the same label are joined.
pub fn segment_bouts<S: AsRef<str>>(frame_labels: &[S], min_duration: u64) -> Result<Vec<Bout>> {
    if min_duration == 0 {
        return Err(Error::invalid_argument("min_duration must be >= 1"));
    }
    let mut bouts: Vec<Bout> = Vec::new();
    let mut start = 0usize;
    while start < frame_labels.len() {
        let label = frame_labels[start].as_ref();
        let mut end = start;
        while end + 1 < frame_labels.len() && frame_labels[end + 1].as_ref() == label {
            end += 1;
        }
        let len = (end - start + 1) as u64;
        match bouts.last_mut() {
            Some(last) if len < min_duration || last.behavior == label => last.end_frame = end as u64,
            None if len < min_duration => {}
            _ => bouts.push(Bout {
                behavior: label.to_string(),
                start_frame: start as u64,
                end_frame: end as u64,
            }),
        }
        start = end + 1;
    }
    Ok(bouts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundingBox, Polygon};

    fn spot(frame: u64, x: f64, y: f64) -> DetectionRecord {
        // 2x2 square centered on (x, y)
        let p = Polygon::new(vec![
            Point2D::new(x - 1.0, y - 1.0),
            Point2D::new(x + 1.0, y - 1.0),
            Point2D::new(x + 1.0, y + 1.0),
            Point2D::new(x - 1.0, y + 1.0),
        ])
        .unwrap();
        DetectionRecord {
            frame,
            label: "urine".into(),
            score: 0.9,
            bbox: BoundingBox::new(x - 1.0, y - 1.0, 2.0, 2.0),
            segmentation: p.into(),
        }
    }

    #[test]
    fn one_spot_confirmed_on_third_frame() {
        let dets: Vec<_> = (1..=5).map(|f| spot(f, 10.0, 10.0)).collect();
        let ev = detect_novel_spots(&dets, 20.0, 3).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].first_frame, ev[0].confirmed_frame), (1, 3));
        assert_eq!(ev[0].location, Point2D::new(10.0, 10.0));
    }

    #[test]
    fn second_distant_spot() {
        let mut dets: Vec<_> = (1..=5).map(|f| spot(f, 10.0, 10.0)).collect();
        dets.extend((6..=8).map(|f| spot(f, 100.0, 100.0)));
        // re-detection near the first spot after confirmation
        dets.push(spot(9, 12.0, 11.0));
        dets.push(spot(10, 12.0, 11.0));
        dets.push(spot(11, 12.0, 11.0));
        let ev = detect_novel_spots(&dets, 20.0, 3).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[1].first_frame, ev[1].confirmed_frame), (6, 8));
    }

    #[test]
    fn frames_counted_not_consecutive() {
        let dets = vec![
            spot(1, 5.0, 5.0),
            spot(4, 5.0, 5.0),
            spot(4, 6.0, 5.0),
            spot(9, 5.0, 6.0),
        ];
        let ev = detect_novel_spots(&dets, 3.0, 3).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].confirmed_frame, 9);
    }

    #[test]
    fn spot_argument_checks() {
        assert!(detect_novel_spots(&[], 0.0, 3).is_err());
        assert!(detect_novel_spots(&[], 1.0, 0).is_err());
    }

    #[test]
    fn bouts_plain_runs() {
        let b = segment_bouts(&["H", "H", "H", "L", "L"], 1).unwrap();
        assert_eq!(
            b,
            vec![
                Bout {
                    behavior: "H".into(),
                    start_frame: 0,
                    end_frame: 2
                },
                Bout {
                    behavior: "L".into(),
                    start_frame: 3,
                    end_frame: 4
                },
            ]
        );
    }

    #[test]
    fn short_run_absorbed() {
        let b = segment_bouts(&["H", "H", "L", "H", "H"], 2).unwrap();
        assert_eq!(
            b,
            vec![Bout {
                behavior: "H".into(),
                start_frame: 0,
                end_frame: 4
            }]
        );
    }

    #[test]
    fn leading_short_run_dropped() {
        let b = segment_bouts(&["L", "H", "H", "H"], 2).unwrap();
        assert_eq!(
            b,
            vec![Bout {
                behavior: "H".into(),
                start_frame: 1,
                end_frame: 3
            }]
        );
        assert!(segment_bouts::<&str>(&[], 1).unwrap().is_empty());
        assert!(segment_bouts(&["a"], 0).is_err());
    }
}
