use serde::{Deserialize, Serialize};

use crate::metrics::{ApReport, MotReport};

use super::TrajectoryStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Summary line of one MOT evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotRow {
    pub video: String,
    pub n_frames: u64,
    pub n_gt: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
    #[serde(rename = "fp")]
    pub false_positives: u64,
    #[serde(rename = "ids")]
    pub id_switches: u64,
    pub mota: f64,
    pub motp: f64,
}

impl MotRow {
    pub fn from_report(video: impl Into<String>, r: &MotReport) -> Self {
        Self {
            video: video.into(),
            n_frames: r.n_frames,
            n_gt: r.n_gt,
            false_negatives: r.false_negatives,
            false_positives: r.false_positives,
            id_switches: r.id_switches,
            mota: r.mota,
            motp: r.motp,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ReportRows<'a> {
    Ap(&'a ApReport),
    Mot(&'a [MotRow]),
    Stats(&'a [TrajectoryStats]),
}

/// Renders a report table.
///
/// CSV output is meant for reading: AP values become percentages with three
/// decimals and undefined cells print as `-`; MOTA and MOTP get six
/// decimals. JSON output keeps the raw values (AP as fractions, undefined as
/// `null`) and parses back to the same numbers.
pub fn emit_report(rows: ReportRows<'_>, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => csv_bytes(rows),
        ReportFormat::Json => {
            let mut out = match rows {
                ReportRows::Ap(r) => serde_json::to_vec_pretty(&r.rows),
                ReportRows::Mot(r) => serde_json::to_vec_pretty(r),
                ReportRows::Stats(r) => serde_json::to_vec_pretty(r),
            }
            .expect("report rows serialize");
            out.push(b'\n');
            out
        }
    }
}

fn ap_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{:.3}", x * 100.0),
        None => "-".to_string(),
    }
}

fn csv_bytes(rows: ReportRows<'_>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let res: csv::Result<()> = (|| {
        match rows {
            ReportRows::Ap(r) => {
                w.write_record(["name", "AP", "AP50", "AP75", "APS", "APM", "APL"])?;
                for row in &r.rows {
                    let mut rec = vec![row.name.clone()];
                    rec.extend(row.values().into_iter().map(ap_cell));
                    w.write_record(&rec)?;
                }
            }
            ReportRows::Mot(r) => {
                w.write_record(["video", "n_frames", "n_gt", "fn", "fp", "ids", "mota", "motp"])?;
                for m in r {
                    w.write_record([
                        m.video.clone(),
                        m.n_frames.to_string(),
                        m.n_gt.to_string(),
                        m.false_negatives.to_string(),
                        m.false_positives.to_string(),
                        m.id_switches.to_string(),
                        format!("{:.6}", m.mota),
                        format!("{:.6}", m.motp),
                    ])?;
                }
            }
            ReportRows::Stats(r) => {
                w.write_record(["label", "distance_traveled", "frames_present", "mean_speed"])?;
                for s in r {
                    w.write_record([
                        s.label.clone(),
                        format!("{:.3}", s.distance_traveled),
                        s.frames_present.to_string(),
                        format!("{:.3}", s.mean_speed),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })();
    res.expect("writing CSV to memory");
    w.into_inner().expect("in-memory CSV writer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ApRow;

    fn mice() -> ApReport {
        ApReport {
            rows: vec![ApRow {
                name: "mice".into(),
                ap: Some(0.79906),
                ap50: Some(0.97006),
                ap75: Some(0.93182),
                ap_small: None,
                ap_medium: Some(0.79906),
                ap_large: Some(0.0),
            }],
        }
    }

    #[test]
    fn ap_csv_line() {
        let out = String::from_utf8(emit_report(ReportRows::Ap(&mice()), ReportFormat::Csv)).unwrap();
        assert_eq!(
            out,
            "name,AP,AP50,AP75,APS,APM,APL\nmice,79.906,97.006,93.182,-,79.906,0.000\n"
        );
    }

    #[test]
    fn empty_is_header_only() {
        let out = emit_report(ReportRows::Ap(&ApReport::default()), ReportFormat::Csv);
        assert_eq!(out, b"name,AP,AP50,AP75,APS,APM,APL\n");
        let out = emit_report(ReportRows::Mot(&[]), ReportFormat::Csv);
        assert_eq!(out, b"video,n_frames,n_gt,fn,fp,ids,mota,motp\n");
    }

    #[test]
    fn json_roundtrip() {
        let rep = mice();
        let back: Vec<ApRow> = serde_json::from_slice(&emit_report(ReportRows::Ap(&rep), ReportFormat::Json)).unwrap();
        assert_eq!(back, rep.rows);

        let rows = vec![MotRow {
            video: "v,1".into(),
            n_frames: 10575,
            n_gt: 10575,
            false_negatives: 38,
            false_positives: 11,
            id_switches: 52,
            mota: 1.0 - 101.0 / 10575.0,
            motp: 0.1 + 0.2,
        }];
        let back: Vec<MotRow> =
            serde_json::from_slice(&emit_report(ReportRows::Mot(&rows), ReportFormat::Json)).unwrap();
        assert_eq!(back, rows);
        let csv = String::from_utf8(emit_report(ReportRows::Mot(&rows), ReportFormat::Csv)).unwrap();
        assert!(
            csv.ends_with("\"v,1\",10575,10575,38,11,52,0.990449,0.300000\n"),
            "{csv}"
        );
    }

    #[test]
    fn deterministic() {
        let a = emit_report(ReportRows::Ap(&mice()), ReportFormat::Json);
        assert_eq!(a, emit_report(ReportRows::Ap(&mice()), ReportFormat::Json));
    }
}
