use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segmentation_iou, Polygon};
use crate::tracking::{Track, TrackState};

/// Mask IoU at or above which two animals count as huddling.
pub const DEFAULT_HUDDLE_IOU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneDefinition {
    pub name: String,
    pub region: Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneCount {
    pub name: String,
    pub frames: u64,
    /// Share of the track's present frames; 0 when it has none.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    /// Same order as the zone list.
    pub zones: Vec<ZoneCount>,
    pub outside: ZoneCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionCriterion {
    MaskIou,
    CentroidDistance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEvent {
    /// Sorted, so the result does not depend on argument order.
    pub labels: (String, String),
    pub start_frame: u64,
    /// Inclusive.
    pub end_frame: u64,
    pub criterion: InteractionCriterion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub label: String,
    pub distance_traveled: f64,
    pub frames_present: u64,
    /// Distance per elapsed frame between the first and last present state.
    pub mean_speed: f64,
}

/// Path length through the present centroids, divided by `px_per_unit`.
/// A gap contributes the straight step across it.
pub fn distance_traveled(track: &Track, px_per_unit: f64) -> Result<f64> {
    if !(px_per_unit > 0.0 && px_per_unit.is_finite()) {
        return Err(Error::invalid_argument(format!(
            "px_per_unit must be positive, got {px_per_unit}"
        )));
    }
    let pts: Vec<_> = track.present().filter_map(|s| s.centroid).collect();
    let px: f64 = pts.windows(2).map(|w| w[0].distance(&w[1])).sum();
    Ok(px / px_per_unit)
}

pub fn trajectory_stats(track: &Track, px_per_unit: f64) -> Result<TrajectoryStats> {
    let distance = distance_traveled(track, px_per_unit)?;
    let present: Vec<&TrackState> = track.present().collect();
    let elapsed = match (present.first(), present.last()) {
        (Some(a), Some(b)) => b.frame - a.frame,
        _ => 0,
    };
    Ok(TrajectoryStats {
        label: track.label.clone(),
        distance_traveled: distance,
        frames_present: present.len() as u64,
        mean_speed: if elapsed == 0 { 0.0 } else { distance / elapsed as f64 },
    })
}

pub fn trajectory_stats_all(tracks: &[Track], px_per_unit: f64) -> Result<Vec<TrajectoryStats>> {
    tracks.par_iter().map(|t| trajectory_stats(t, px_per_unit)).collect()
}

/// Assigns each present state to the first zone containing its centroid.
pub fn zone_occupancy(track: &Track, zones: &[ZoneDefinition]) -> Occupancy {
    let mut counts = vec![0u64; zones.len()];
    let mut outside = 0u64;
    let mut total = 0u64;
    for c in track.present().filter_map(|s| s.centroid) {
        total += 1;
        match zones.iter().position(|z| z.region.contains(c)) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let frac = |n: u64| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    Occupancy {
        zones: zones
            .iter()
            .zip(&counts)
            .map(|(z, &n)| ZoneCount {
                name: z.name.clone(),
                frames: n,
                fraction: frac(n),
            })
            .collect(),
        outside: ZoneCount {
            name: "outside".into(),
            frames: outside,
            fraction: frac(outside),
        },
    }
}

/// Maximal runs of frames where both animals are present and the criterion
/// holds (IoU `>=` threshold, or centroid distance `<=` threshold). Runs
/// shorter than `min_duration` frames are dropped.
///
/// Under [`InteractionCriterion::MaskIou`] every co-present frame needs a
/// segmentation on both sides; interpolated states have none.
pub fn interaction_events(
    a: &Track,
    b: &Track,
    criterion: InteractionCriterion,
    threshold: f64,
    min_duration: u64,
) -> Result<Vec<InteractionEvent>> {
    if a.label == b.label {
        return Err(Error::invalid_argument(format!(
            "interaction needs two distinct labels, got {:?} twice",
            a.label
        )));
    }
    let threshold_ok = match criterion {
        InteractionCriterion::MaskIou => threshold > 0.0 && threshold <= 1.0,
        InteractionCriterion::CentroidDistance => threshold > 0.0 && threshold.is_finite(),
    };
    if !threshold_ok {
        return Err(Error::invalid_argument(format!(
            "threshold {threshold} out of range for {criterion:?}"
        )));
    }
    if min_duration == 0 {
        return Err(Error::invalid_argument("min_duration must be at least 1"));
    }
    let (a, b) = if a.label <= b.label { (a, b) } else { (b, a) };

    let co_present: Vec<(&TrackState, &TrackState)> = a
        .present()
        .filter_map(|sa| b.state_at(sa.frame).filter(|sb| sb.present).map(|sb| (sa, sb)))
        .collect();

    let mut hits = Vec::with_capacity(co_present.len());
    match criterion {
        InteractionCriterion::CentroidDistance => {
            for (sa, sb) in &co_present {
                let (ca, cb) = (sa.centroid.expect("present"), sb.centroid.expect("present"));
                hits.push((sa.frame, ca.distance(&cb) <= threshold));
            }
        }
        InteractionCriterion::MaskIou => {
            let missing: Vec<u64> = co_present
                .iter()
                .filter(|(sa, sb)| sa.segmentation.is_none() || sb.segmentation.is_none())
                .map(|(sa, _)| sa.frame)
                .collect();
            if !missing.is_empty() {
                let shown: Vec<String> = missing.iter().take(10).map(u64::to_string).collect();
                let more = if missing.len() > 10 {
                    format!(" and {} more", missing.len() - 10)
                } else {
                    String::new()
                };
                return Err(Error::MissingData(format!(
                    "no segmentation for {}/{} in frames {}{more}",
                    a.label,
                    b.label,
                    shown.join(", ")
                )));
            }
            for (sa, sb) in &co_present {
                let iou = segmentation_iou(sa.segmentation.as_ref().unwrap(), sb.segmentation.as_ref().unwrap())?;
                hits.push((sa.frame, iou >= threshold));
            }
        }
    }

    let labels = (a.label.clone(), b.label.clone());
    let mut events = Vec::new();
    let mut run: Option<(u64, u64)> = None;
    let close = |run: (u64, u64), events: &mut Vec<InteractionEvent>| {
        if run.1 - run.0 + 1 >= min_duration {
            events.push(InteractionEvent {
                labels: labels.clone(),
                start_frame: run.0,
                end_frame: run.1,
                criterion,
            });
        }
    };
    for (frame, hit) in hits {
        run = match (run, hit) {
            (Some((s, e)), true) if frame == e + 1 => Some((s, frame)),
            (Some(r), true) => {
                close(r, &mut events);
                Some((frame, frame))
            }
            (None, true) => Some((frame, frame)),
            (Some(r), false) => {
                close(r, &mut events);
                None
            }
            (None, false) => None,
        };
    }
    if let Some(r) = run {
        close(r, &mut events);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BinaryMask, Point2D, Segmentation};

    fn track(label: &str, pts: &[Option<(f64, f64)>]) -> Track {
        let states = pts
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                Some((x, y)) => TrackState {
                    frame: i as u64,
                    present: true,
                    centroid: Some(Point2D::new(*x, *y)),
                    score: 1.0,
                    segmentation: None,
                    interpolated: false,
                },
                None => TrackState::absent(i as u64),
            })
            .collect();
        Track::new(label, states).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            distance_traveled(&track("a", &[Some((0.0, 0.0)), Some((3.0, 4.0))]), 1.0).unwrap(),
            5.0
        );
        assert_eq!(distance_traveled(&track("a", &[Some((1.0, 1.0))]), 1.0).unwrap(), 0.0);
        let t = track("a", &[Some((0.0, 0.0)), Some((3.0, 4.0)), Some((3.0, 4.0))]);
        assert_eq!(distance_traveled(&t, 1.0).unwrap(), 5.0);
        assert_eq!(distance_traveled(&t, 2.0).unwrap(), 2.5);
        assert!(distance_traveled(&t, 0.0).is_err());
    }

    #[test]
    fn gap_is_straight_step() {
        let t = track("a", &[Some((0.0, 0.0)), None, None, Some((6.0, 8.0))]);
        assert_eq!(distance_traveled(&t, 1.0).unwrap(), 10.0);
        let s = trajectory_stats(&t, 1.0).unwrap();
        assert_eq!(s.frames_present, 2);
        assert!((s.mean_speed - 10.0 / 3.0).abs() < 1e-12);
    }

    fn square_zone(name: &str, x0: f64, x1: f64) -> ZoneDefinition {
        ZoneDefinition {
            name: name.into(),
            region: Polygon::from_flat(&[x0, 0.0, x1, 0.0, x1, 100.0, x0, 100.0]).unwrap(),
        }
    }

    #[test]
    fn occupancy_fractions() {
        let mut pts: Vec<Option<(f64, f64)>> = (0..4).map(|_| Some((5.0, 5.0))).collect();
        pts.extend((0..6).map(|_| Some((500.0, 5.0))));
        pts.push(None);
        let occ = zone_occupancy(&track("a", &pts), &[square_zone("A", 0.0, 10.0)]);
        assert_eq!(occ.zones[0].frames, 4);
        assert!((occ.zones[0].fraction - 0.4).abs() < 1e-12);
        assert_eq!(occ.outside.frames, 6);
    }

    #[test]
    fn occupancy_first_zone_wins() {
        let zones = [square_zone("A", 0.0, 10.0), square_zone("B", 0.0, 20.0)];
        let occ = zone_occupancy(&track("a", &[Some((5.0, 5.0))]), &zones);
        assert_eq!((occ.zones[0].frames, occ.zones[1].frames), (1, 0));
        assert_eq!(occ.zones[0].fraction, 1.0);
    }

    #[test]
    fn distance_run() {
        let a = track("a", &vec![Some((0.0, 0.0)); 30]);
        let pts: Vec<_> = (0..30)
            .map(|i| {
                Some(if (10..=20).contains(&i) {
                    (1.0, 0.0)
                } else {
                    (50.0, 0.0)
                })
            })
            .collect();
        let b = track("b", &pts);
        let ev = interaction_events(&a, &b, InteractionCriterion::CentroidDistance, 2.0, 5).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].start_frame, ev[0].end_frame), (10, 20));
        assert_eq!(
            ev,
            interaction_events(&b, &a, InteractionCriterion::CentroidDistance, 2.0, 5).unwrap()
        );
        assert!(
            interaction_events(&a, &b, InteractionCriterion::CentroidDistance, 2.0, 12)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn absent_partner() {
        let a = track("a", &[Some((0.0, 0.0)); 5]);
        let b = track("b", &[None; 5]);
        assert!(
            interaction_events(&a, &b, InteractionCriterion::CentroidDistance, 2.0, 1)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn mask_iou_needs_masks() {
        let a = track("a", &[Some((0.0, 0.0)); 3]);
        let b = track("b", &[Some((0.0, 0.0)); 3]);
        match interaction_events(&a, &b, InteractionCriterion::MaskIou, 0.1, 1) {
            Err(Error::MissingData(m)) => assert!(m.contains("0, 1, 2"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mask_iou_run() {
        let disc = |cx: u32| {
            Segmentation::Rle(
                BinaryMask::from_fn(20, 40, |r, c| r.abs_diff(10).pow(2) + c.abs_diff(cx).pow(2) <= 16).to_rle(),
            )
        };
        let mk = |label: &str, xs: &[u32]| {
            let states = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let seg = disc(x);
                    TrackState {
                        frame: i as u64,
                        present: true,
                        centroid: Some(seg.centroid().unwrap()),
                        score: 1.0,
                        segmentation: Some(seg),
                        interpolated: false,
                    }
                })
                .collect();
            Track::new(label, states).unwrap()
        };
        let a = mk("x", &[10, 10, 10, 10, 10]);
        let b = mk("y", &[30, 11, 12, 30, 10]);
        let ev = interaction_events(&a, &b, InteractionCriterion::MaskIou, 0.1, 1).unwrap();
        let spans: Vec<_> = ev.iter().map(|e| (e.start_frame, e.end_frame)).collect();
        assert_eq!(spans, vec![(1, 2), (4, 4)]);
    }
}
