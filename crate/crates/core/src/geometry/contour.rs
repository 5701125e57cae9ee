use std::collections::VecDeque;

use super::mask::BinaryMask;
use super::polygon::{Point2D, Polygon};

/// Outer boundary of every 4-connected foreground component, traced along
/// pixel edges. Rings run clockwise on screen and keep only corner vertices.
/// Holes are not reported; rasterizing a ring fills its component's holes.
///
/// Components are returned in row-major order of their first pixel.
pub fn mask_to_polygons(mask: &BinaryMask) -> Vec<Polygon> {
    let (h, w) = (mask.height() as usize, mask.width() as usize);
    let mut labels = vec![0u32; h * w];
    let mut rings = Vec::new();
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            if !mask.get(r as u32, c as u32) || labels[r * w + c] != 0 {
                continue;
            }
            next += 1;
            labels[r * w + c] = next;
            queue.push_back((r, c));
            while let Some((qr, qc)) = queue.pop_front() {
                let nbrs = [
                    (qr.wrapping_sub(1), qc),
                    (qr + 1, qc),
                    (qr, qc.wrapping_sub(1)),
                    (qr, qc + 1),
                ];
                for (nr, nc) in nbrs {
                    if nr < h && nc < w && labels[nr * w + nc] == 0 && mask.get(nr as u32, nc as u32) {
                        labels[nr * w + nc] = next;
                        queue.push_back((nr, nc));
                    }
                }
            }
            rings.push(trace_outer(&labels, h, w, next, r, c));
        }
    }
    rings
}

// Headings in screen coordinates (y down), listed clockwise.
const EAST: usize = 0;
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn trace_outer(labels: &[u32], h: usize, w: usize, id: u32, r0: usize, c0: usize) -> Polygon {
    let in_comp = |row: i64, col: i64| -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < h
            && (col as usize) < w
            && labels[row as usize * w + col as usize] == id
    };
    // A boundary edge leaving vertex (x, y) with heading d has the component on
    // its right and background on its left.
    let is_edge = |x: i64, y: i64, d: usize| -> bool {
        let ((rr, rc), (lr, lc)) = match d {
            0 => ((y, x), (y - 1, x)),
            1 => ((y, x - 1), (y, x)),
            2 => ((y - 1, x - 1), (y, x - 1)),
            _ => ((y - 1, x), (y - 1, x - 1)),
        };
        in_comp(rr, rc) && !in_comp(lr, lc)
    };

    // The first pixel in row-major order has background above it, so its top
    // edge lies on the outer boundary.
    let start = (c0 as i64, r0 as i64);
    let mut pos = start;
    let mut heading = EAST;
    let mut vertices = Vec::new();
    loop {
        let (dx, dy) = DIRS[heading];
        pos = (pos.0 + dx, pos.1 + dy);
        // Prefer turning right so diagonal contacts stay separate.
        let next = [(heading + 1) % 4, heading, (heading + 3) % 4]
            .into_iter()
            .find(|&d| is_edge(pos.0, pos.1, d))
            .unwrap_or((heading + 2) % 4);
        if next != heading {
            vertices.push(Point2D::new(pos.0 as f64, pos.1 as f64));
        }
        heading = next;
        if pos == start && heading == EAST {
            break;
        }
    }
    // Start from the top-left corner of the seed pixel.
    if let Some(i) = vertices
        .iter()
        .position(|p| p.x == start.0 as f64 && p.y == start.1 as f64)
    {
        vertices.rotate_left(i);
    }
    Polygon::new(vertices).expect("pixel boundary rings have at least four corners")
}
