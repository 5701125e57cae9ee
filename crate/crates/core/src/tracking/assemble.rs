use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Segmentation};

use super::DetectionRecord;

pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub frame: u64,
    pub present: bool,
    /// `Some` exactly when `present`.
    pub centroid: Option<Point2D>,
    pub score: f64,
    /// Absent for missing frames and for interpolated states.
    pub segmentation: Option<Segmentation>,
    pub interpolated: bool,
}

impl TrackState {
    pub fn absent(frame: u64) -> Self {
        Self {
            frame,
            present: false,
            centroid: None,
            score: 0.0,
            segmentation: None,
            interpolated: false,
        }
    }
}

/// Per-identity time series. States are sorted by strictly increasing frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: String,
    pub states: Vec<TrackState>,
}

impl Track {
    pub fn new(label: impl Into<String>, states: Vec<TrackState>) -> Result<Self> {
        if let Some(w) = states.windows(2).find(|w| w[0].frame >= w[1].frame) {
            return Err(Error::Precondition(format!(
                "track states must have strictly increasing frames ({} then {})",
                w[0].frame, w[1].frame
            )));
        }
        if let Some(s) = states.iter().find(|s| s.present != s.centroid.is_some()) {
            return Err(Error::Precondition(format!(
                "frame {}: present flag disagrees with centroid",
                s.frame
            )));
        }
        Ok(Self {
            label: label.into(),
            states,
        })
    }

    pub fn state_at(&self, frame: u64) -> Option<&TrackState> {
        self.states
            .binary_search_by_key(&frame, |s| s.frame)
            .ok()
            .map(|i| &self.states[i])
    }

    pub fn present(&self) -> impl Iterator<Item = &TrackState> + '_ {
        self.states.iter().filter(|s| s.present)
    }

    pub fn frame_span(&self) -> Option<RangeInclusive<u64>> {
        Some(self.states.first()?.frame..=self.states.last()?.frame)
    }
}

/// Keeps records with `score >= threshold`, in order.
pub fn filter_by_score(dets: &[DetectionRecord], threshold: f64) -> Vec<DetectionRecord> {
    dets.iter().filter(|d| d.score >= threshold).cloned().collect()
}

/// Collapses one frame's detections to at most one per label: highest score
/// wins, then larger segmentation area, then earlier input position. Output
/// keeps the input order of the survivors.
pub fn resolve_duplicates(frame_dets: &[DetectionRecord]) -> Vec<DetectionRecord> {
    let mut best: HashMap<&str, usize> = HashMap::new();
    for (i, d) in frame_dets.iter().enumerate() {
        match best.get(d.label.as_str()) {
            None => {
                best.insert(&d.label, i);
            }
            Some(&j) => {
                let cur = &frame_dets[j];
                let better =
                    d.score > cur.score || (d.score == cur.score && d.segmentation.area() > cur.segmentation.area());
                if better {
                    best.insert(&d.label, i);
                }
            }
        }
    }
    let mut keep: Vec<usize> = best.into_values().collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| frame_dets[i].clone()).collect()
}

/// [`resolve_duplicates`] applied per frame over a whole stream. Output is
/// ordered by frame, then input order.
pub fn resolve_all_duplicates(dets: &[DetectionRecord]) -> Vec<DetectionRecord> {
    let mut by_frame: BTreeMap<u64, Vec<DetectionRecord>> = BTreeMap::new();
    for d in dets {
        by_frame.entry(d.frame).or_default().push(d.clone());
    }
    by_frame.values().flat_map(|f| resolve_duplicates(f)).collect()
}

/// One track per label, dense over the frame range the detections span.
pub fn assemble_tracks(dets: &[DetectionRecord]) -> Result<Vec<Track>> {
    let Some(lo) = dets.iter().map(|d| d.frame).min() else {
        return Ok(Vec::new());
    };
    let hi = dets.iter().map(|d| d.frame).max().unwrap();
    assemble_tracks_in(dets, lo..=hi)
}

/// One track per label with a state for every frame in `frames`; a label is
/// present exactly where it was detected. Tracks are sorted by label.
pub fn assemble_tracks_in(dets: &[DetectionRecord], frames: RangeInclusive<u64>) -> Result<Vec<Track>> {
    let mut by_label: BTreeMap<&str, BTreeMap<u64, &DetectionRecord>> = BTreeMap::new();
    for d in dets {
        if !frames.contains(&d.frame) {
            return Err(Error::Precondition(format!(
                "detection at frame {} outside range {}..={}",
                d.frame,
                frames.start(),
                frames.end()
            )));
        }
        if by_label.entry(&d.label).or_default().insert(d.frame, d).is_some() {
            return Err(Error::Precondition(format!(
                "duplicate detection for label {:?} at frame {}",
                d.label, d.frame
            )));
        }
    }
    by_label
        .into_iter()
        .map(|(label, hits)| {
            let states = frames
                .clone()
                .map(|f| match hits.get(&f) {
                    None => Ok(TrackState::absent(f)),
                    Some(d) => {
                        let centroid = d.segmentation.centroid().map_err(|_| {
                            Error::Precondition(format!("detection {label:?} at frame {f} has an empty segmentation"))
                        })?;
                        Ok(TrackState {
                            frame: f,
                            present: true,
                            centroid: Some(centroid),
                            score: d.score,
                            segmentation: Some(d.segmentation.clone()),
                            interpolated: false,
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Track {
                label: label.to_string(),
                states,
            })
        })
        .collect()
}

/// Fills interior runs of at most `max_gap` absent frames with linearly
/// interpolated centroids. Filled states are marked `interpolated`, carry no
/// segmentation and a score of 0. Leading and trailing runs are left alone.
pub fn interpolate_gaps(track: &Track, max_gap: u64) -> Track {
    let mut out = track.clone();
    if max_gap == 0 {
        return out;
    }
    let present: Vec<usize> = (0..out.states.len()).filter(|&i| out.states[i].present).collect();
    for pair in present.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let (a, b) = (&track.states[i], &track.states[j]);
        let gap = b.frame - a.frame - 1;
        if gap == 0 || gap > max_gap {
            continue;
        }
        // dense tracks have a state per frame; sparse ones have none to fill
        let (ca, cb) = (a.centroid.unwrap(), b.centroid.unwrap());
        let span = (b.frame - a.frame) as f64;
        for state in &mut out.states[i + 1..j] {
            let t = (state.frame - a.frame) as f64 / span;
            state.present = true;
            state.interpolated = true;
            state.centroid = Some(Point2D::new(ca.x + t * (cb.x - ca.x), ca.y + t * (cb.y - ca.y)));
        }
    }
    out
}
