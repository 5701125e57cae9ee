use crate::error::{Error, Result};

use super::mask::BinaryMask;
use super::polygon::Polygon;

/// Fills every pixel whose center lies inside `polygon` under the even-odd
/// rule. Centers exactly on a left or top edge are inside, on a right or
/// bottom edge outside, so polygons sharing an edge never both claim a pixel.
pub fn rasterize(polygon: &Polygon, height: u32, width: u32) -> Result<BinaryMask> {
    if height == 0 || width == 0 {
        return Err(Error::invalid_argument(format!(
            "raster size {height}x{width} must be positive"
        )));
    }
    let mut mask = BinaryMask::new(height, width);
    fill(&mut mask, polygon);
    Ok(mask)
}

/// Union of the fills of several rings, the COCO reading of a multi-polygon
/// segmentation.
pub fn rasterize_rings(rings: &[Polygon], height: u32, width: u32) -> Result<BinaryMask> {
    if height == 0 || width == 0 {
        return Err(Error::invalid_argument(format!(
            "raster size {height}x{width} must be positive"
        )));
    }
    let mut mask = BinaryMask::new(height, width);
    for ring in rings {
        fill(&mut mask, ring);
    }
    Ok(mask)
}

fn fill(mask: &mut BinaryMask, polygon: &Polygon) {
    let bbox = polygon.bbox();
    let h = mask.height() as i64;
    let w = mask.width() as i64;
    // rows whose center y = r + 0.5 can fall in [bbox.y, bbox.bottom)
    let r_lo = ((bbox.y - 0.5).ceil() as i64).max(0);
    let r_hi = ((bbox.bottom() - 0.5).ceil() as i64).min(h);
    let mut xs: Vec<f64> = Vec::new();
    for r in r_lo..r_hi {
        let y = r as f64 + 0.5;
        xs.clear();
        for (a, b) in polygon.edges() {
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|p, q| p.total_cmp(q));
        for span in xs.chunks_exact(2) {
            // centers c + 0.5 in [span[0], span[1])
            let c0 = ((span[0] - 0.5).ceil() as i64).max(0);
            let c1 = ((span[1] - 0.5).ceil() as i64).min(w);
            for c in c0..c1 {
                mask.set(r as u32, c as u32, true);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;

    fn ring(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    /// Brute force: ray-cast every pixel center independently.
    fn oracle(p: &Polygon, h: u32, w: u32) -> BinaryMask {
        let v = p.vertices();
        BinaryMask::from_fn(h, w, |r, c| {
            let (x, y) = (c as f64 + 0.5, r as f64 + 0.5);
            let mut inside = false;
            let mut j = v.len() - 1;
            for i in 0..v.len() {
                let (xi, yi, xj, yj) = (v[i].x, v[i].y, v[j].x, v[j].y);
                if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                    inside = !inside;
                }
                j = i;
            }
            inside
        })
    }

    #[test]
    fn square_fills_sixteen() {
        let m = rasterize(&ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]), 8, 8).unwrap();
        assert_eq!(m.count_ones(), 16);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(m.get(r, c), r < 4 && c < 4);
            }
        }
    }

    #[test]
    fn outside_grid_is_empty() {
        let m = rasterize(&ring(&[(20.0, 20.0), (30.0, 20.0), (25.0, 30.0)]), 8, 8).unwrap();
        assert!(m.is_empty());
        let m = rasterize(&ring(&[(-20.0, -20.0), (-10.0, -20.0), (-15.0, -10.0)]), 8, 8).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn bow_tie_matches_even_odd_oracle() {
        let p = ring(&[(0.0, 0.0), (8.0, 8.0), (8.0, 0.0), (0.0, 8.0)]);
        let m = rasterize(&p, 8, 8).unwrap();
        assert_eq!(m, oracle(&p, 8, 8));
        // two triangles, one on the left and one on the right; centers on the
        // crossing diagonals are split by the half-open rule
        assert!(m.get(4, 7) && m.get(4, 0));
        assert!(!m.get(0, 4) && !m.get(7, 4));
    }

    #[test]
    fn shared_edge_not_double_counted() {
        let left = ring(&[(0.0, 0.0), (3.0, 0.0), (3.0, 5.0), (0.0, 5.0)]);
        let right = ring(&[(3.0, 0.0), (6.0, 0.0), (6.0, 5.0), (3.0, 5.0)]);
        let a = rasterize(&left, 6, 6).unwrap().to_rle();
        let b = rasterize(&right, 6, 6).unwrap().to_rle();
        assert_eq!(a.intersection_area(&b).unwrap(), 0);
        assert_eq!(a.area() + b.area(), 30);
    }

    #[test]
    fn zero_size_rejected() {
        let p = ring(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(rasterize(&p, 0, 4).is_err());
    }

    #[test]
    fn random_polygons_match_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.random_range(3..9);
            let pts = (0..n)
                .map(|_| Point2D::new(rng.random_range(-5.0..25.0), rng.random_range(-5.0..25.0)))
                .collect();
            let p = Polygon::new(pts).unwrap();
            assert_eq!(rasterize(&p, 20, 20).unwrap(), oracle(&p, 20, 20));
        }
    }
}
