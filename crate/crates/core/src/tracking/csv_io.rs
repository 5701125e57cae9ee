use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Point2D;

use super::assemble::{Track, TrackState};

const HEADER: [&str; 7] = ["frame", "label", "present", "cx", "cy", "score", "interpolated"];

/// One row per (frame, label) over the union of the tracks' frame spans,
/// ordered by frame then label. Absent rows leave `cx`, `cy` empty.
pub fn write_tracks_csv(tracks: &[Track]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&Track> = tracks.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    let lo = sorted.iter().filter_map(|t| t.states.first()).map(|s| s.frame).min();
    let hi = sorted.iter().filter_map(|t| t.states.last()).map(|s| s.frame).max();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_err)?;
    if let (Some(lo), Some(hi)) = (lo, hi) {
        for frame in lo..=hi {
            for t in &sorted {
                let row = match t.state_at(frame).filter(|s| s.present) {
                    Some(s) => {
                        let c = s.centroid.unwrap_or_default();
                        [
                            frame.to_string(),
                            t.label.clone(),
                            "1".into(),
                            c.x.to_string(),
                            c.y.to_string(),
                            s.score.to_string(),
                            if s.interpolated { "1" } else { "0" }.into(),
                        ]
                    }
                    None => [
                        frame.to_string(),
                        t.label.clone(),
                        "0".into(),
                        String::new(),
                        String::new(),
                        "0".into(),
                        "0".into(),
                    ],
                };
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Parses the layout written by [`write_tracks_csv`]. Segmentations are not
/// part of the format, so states come back without them.
pub fn read_tracks_csv(bytes: &[u8]) -> Result<Vec<Track>> {
    let mut r = csv::Reader::from_reader(bytes);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Schema(format!(
            "unexpected track CSV header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut by_label: BTreeMap<String, Vec<TrackState>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |what: &str| Error::Line {
            line,
            message: format!(
                "bad {what} value {:?}",
                field(HEADER.iter().position(|h| *h == what).unwrap())
            ),
        };
        let frame: u64 = field(0).parse().map_err(|_| bad("frame"))?;
        let flag = |k: usize, name: &str| match field(k) {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            _ => Err(bad(name)),
        };
        let present = flag(2, "present")?;
        let interpolated = flag(6, "interpolated")?;
        let score: f64 = field(5).parse().map_err(|_| bad("score"))?;
        let centroid = if present {
            let x: f64 = field(3).parse().map_err(|_| bad("cx"))?;
            let y: f64 = field(4).parse().map_err(|_| bad("cy"))?;
            Some(Point2D::new(x, y))
        } else {
            None
        };
        by_label.entry(field(1).to_string()).or_default().push(TrackState {
            frame,
            present,
            centroid,
            score,
            segmentation: None,
            interpolated,
        });
    }
    by_label
        .into_iter()
        .map(|(label, states)| Track::new(label, states))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(frame: u64, c: Option<(f64, f64)>) -> TrackState {
        TrackState {
            frame,
            present: c.is_some(),
            centroid: c.map(Point2D::from),
            score: if c.is_some() { 0.75 } else { 0.0 },
            segmentation: None,
            interpolated: false,
        }
    }

    #[test]
    fn roundtrip_and_layout() {
        let tracks = vec![
            Track::new("vole_2", vec![state(0, None), state(1, Some((3.5, 4.25)))]).unwrap(),
            Track::new("vole_1", vec![state(0, Some((1.0, 2.0))), state(1, None)]).unwrap(),
        ];
        let bytes = write_tracks_csv(&tracks).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "frame,label,present,cx,cy,score,interpolated");
        assert_eq!(lines[1], "0,vole_1,1,1,2,0.75,0");
        assert_eq!(lines[2], "0,vole_2,0,,,0,0");
        assert_eq!(lines.len(), 5);
        let back = read_tracks_csv(&bytes).unwrap();
        assert_eq!(back[0], tracks[1]);
        assert_eq!(back[1], tracks[0]);
    }

    #[test]
    fn bad_rows() {
        let err = read_tracks_csv(b"frame,label,present,cx,cy,score,interpolated\nx,a,1,1,1,1,0\n").unwrap_err();
        assert!(matches!(err, Error::Line { line: 2, .. }));
        assert!(matches!(read_tracks_csv(b"a,b\n"), Err(Error::Schema(_))));
    }
}
