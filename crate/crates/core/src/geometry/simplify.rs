use crate::error::{Error, Result};

use super::polygon::{Point2D, Polygon};

/// Ramer-Douglas-Peucker on a closed ring.
///
/// The ring is cut at its two mutually farthest vertices and each half is
/// simplified as an open chain. Kept vertices are a subsequence of the input
/// in the original order; every dropped vertex lies within `epsilon` of the
/// kept segment that spans it. At least three vertices are always kept.
pub fn simplify_polygon(polygon: &Polygon, epsilon: f64) -> Result<Polygon> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::invalid_argument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let v = polygon.vertices();
    let n = v.len();
    let (a, b) = farthest_pair(v);

    let mut keep = vec![false; n];
    keep[a] = true;
    keep[b] = true;
    rdp_chain(v, a, b, epsilon, &mut keep);
    rdp_chain(v, b, a, epsilon, &mut keep);

    if keep.iter().filter(|&&k| k).count() < 3 {
        // Only the anchors survived; add the vertex farthest from their chord.
        let extra = (0..n)
            .filter(|&i| !keep[i])
            .fold((None, -1.0), |(best, bd), i| {
                let d = segment_distance(v[i], v[a], v[b]);
                if d > bd {
                    (Some(i), d)
                } else {
                    (best, bd)
                }
            })
            .0;
        if let Some(i) = extra {
            keep[i] = true;
        }
    }

    Polygon::new((0..n).filter(|&i| keep[i]).map(|i| v[i]).collect())
}

/// Lowest-index pair among those at maximal distance.
fn farthest_pair(v: &[Point2D]) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_d = -1.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = (v[i].x - v[j].x).powi(2) + (v[i].y - v[j].y).powi(2);
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

/// Simplifies the ring walk from `from` forward (wrapping) to `to`.
fn rdp_chain(v: &[Point2D], from: usize, to: usize, epsilon: f64, keep: &mut [bool]) {
    let n = v.len();
    let len = (to + n - from) % n;
    let idx = |k: usize| (from + k) % n;
    let mut stack = vec![(0usize, len)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (p, q) = (v[idx(lo)], v[idx(hi)]);
        let mut split = None;
        let mut dmax = epsilon;
        for k in (lo + 1)..hi {
            let d = segment_distance(v[idx(k)], p, q);
            if d > dmax {
                dmax = d;
                split = Some(k);
            }
        }
        if let Some(k) = split {
            keep[idx(k)] = true;
            stack.push((lo, k));
            stack.push((k, hi));
        }
    }
}

pub(crate) fn segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Point2D::new(a.x + t * dx, a.y + t * dy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn drops_small_bump() {
        let p = ring(&[(0.0, 0.0), (5.0, 0.1), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]);
        let s = simplify_polygon(&p, 0.5).unwrap();
        assert_eq!(s, ring(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]));
    }

    #[test]
    fn zero_epsilon_only_drops_collinear() {
        let p = ring(&[
            (0.0, 0.0),
            (5.0, 0.0),
            (10.0, 0.0),
            (10.0, 10.0),
            (5.0, 10.0001),
            (0.0, 10.0),
        ]);
        let s = simplify_polygon(&p, 0.0).unwrap();
        assert_eq!(
            s,
            ring(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (5.0, 10.0001), (0.0, 10.0)])
        );
    }

    #[test]
    fn huge_epsilon_keeps_three() {
        // anchors (0,0)-(10,10); (10,0) and (0,10) tie, the first is kept
        let p = ring(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]);
        let s = simplify_polygon(&p, 1000.0).unwrap();
        assert_eq!(s, ring(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)]));
    }

    #[test]
    fn negative_epsilon_rejected() {
        let p = ring(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(simplify_polygon(&p, -1.0), Err(Error::InvalidArgument(_))));
        assert!(simplify_polygon(&p, f64::NAN).is_err());
    }
}
