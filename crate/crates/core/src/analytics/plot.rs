use std::fmt::Write;

use crate::error::{Error, Result};
use crate::tracking::Track;

/// Twelve-color qualitative palette (ColorBrewer "Paired").
pub const PALETTE: [&str; 12] = [
    "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00", "#cab2d6", "#6a3d9a",
    "#ffff99", "#b15928",
];

/// Palette entry for a label, stable across runs and platforms (FNV-1a).
pub fn label_color(label: &str) -> &'static str {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// SVG of the present-state centroid paths over an arena of `width` x
/// `height` pixels. A track seen in a single frame is drawn as a dot; one
/// with no present states only gets its legend entry.
pub fn plot_trajectories(tracks: &[Track], width: u32, height: u32) -> Result<Vec<u8>> {
    if width == 0 || height == 0 {
        return Err(Error::invalid_argument(format!(
            "plot size must be positive, got {width}x{height}"
        )));
    }
    let mut s = String::new();
    // writing to a String cannot fail
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<g id="tracks" fill="none" stroke-width="1.5">"#);
    for t in tracks {
        let color = label_color(&t.label);
        let pts: Vec<_> = t.present().filter_map(|st| st.centroid).collect();
        match pts.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    s,
                    r#"<circle class="track" data-label="{}" cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                    escape(&t.label),
                    pts[0].x,
                    pts[0].y
                );
            }
            _ => {
                let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline class="track" data-label="{}" stroke="{color}" points="{}"/>"#,
                    escape(&t.label),
                    coords.join(" ")
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="legend" font-family="sans-serif" font-size="10">"#);
    let _ = writeln!(s, r#"<text x="8" y="14" font-weight="bold">tracks</text>"#);
    for (i, t) in tracks.iter().enumerate() {
        let y = 20 + 14 * i;
        let _ = writeln!(
            s,
            r#"<rect class="legend-entry" x="8" y="{y}" width="10" height="10" fill="{}"/><text x="22" y="{}">{}</text>"#,
            label_color(&t.label),
            y + 9,
            escape(&t.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use crate::tracking::TrackState;

    fn track(label: &str, n: u64) -> Track {
        let states = (0..n)
            .map(|f| TrackState {
                frame: f,
                present: true,
                centroid: Some(Point2D::new(f as f64 * 3.0, 10.0)),
                score: 1.0,
                segmentation: None,
                interpolated: false,
            })
            .collect();
        Track::new(label, states).unwrap()
    }

    fn count(svg: &str, pat: &str) -> usize {
        svg.matches(pat).count()
    }

    #[test]
    fn four_tracks() {
        let tracks: Vec<_> = ["vole_1", "vole_2", "vole_3", "vole_4"]
            .iter()
            .map(|l| track(l, 5))
            .collect();
        let svg = String::from_utf8(plot_trajectories(&tracks, 640, 480).unwrap()).unwrap();
        assert_eq!(count(&svg, "<polyline"), 4);
        assert_eq!(count(&svg, "legend-entry"), 4);
        assert!(svg.contains(r#"viewBox="0 0 640 480""#));
        assert_eq!(svg.into_bytes(), plot_trajectories(&tracks, 640, 480).unwrap());
    }

    #[test]
    fn single_state_is_dot() {
        let svg = String::from_utf8(plot_trajectories(&[track("a", 1)], 10, 10).unwrap()).unwrap();
        assert_eq!((count(&svg, "<polyline"), count(&svg, "<circle")), (0, 1));
    }

    #[test]
    fn empty_plot_and_bad_size() {
        let svg = String::from_utf8(plot_trajectories(&[], 10, 10).unwrap()).unwrap();
        assert!(svg.contains(">tracks</text>"));
        assert!(plot_trajectories(&[], 0, 10).is_err());
    }

    #[test]
    fn labels_escaped() {
        let svg = String::from_utf8(plot_trajectories(&[track("a<b", 2)], 10, 10).unwrap()).unwrap();
        assert!(svg.contains("a&lt;b") && !svg.contains("a<b"));
    }

    #[test]
    fn color_is_stable() {
        assert_eq!(label_color("vole_1"), label_color("vole_1"));
        // FNV-1a of the empty string is the offset basis
        assert_eq!(label_color(""), PALETTE[(0xcbf2_9ce4_8422_2325u64 % 12) as usize]);
    }
}
