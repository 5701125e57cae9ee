use crate::error::{Error, Result};

use super::mask::RleMask;
use super::polygon::{BoundingBox, Point2D, Polygon};
use super::raster::rasterize_rings;

/// An instance shape: either one or more polygon rings (filled as a union)
/// or a run-length mask.
#[derive(Debug, Clone, PartialEq)]
pub enum Segmentation {
    Polygons(Vec<Polygon>),
    Rle(RleMask),
}

impl Segmentation {
    /// Shoelace area summed over rings, or the foreground pixel count.
    pub fn area(&self) -> f64 {
        match self {
            Segmentation::Polygons(rings) => rings.iter().map(Polygon::area).sum(),
            Segmentation::Rle(r) => r.area() as f64,
        }
    }

    pub fn bbox(&self) -> BoundingBox {
        match self {
            Segmentation::Polygons(rings) => rings
                .iter()
                .map(Polygon::bbox)
                .reduce(|a, b| a.union(&b))
                .unwrap_or_default(),
            Segmentation::Rle(r) => r.bbox(),
        }
    }

    /// Area-weighted ring centroid, or the mean of foreground pixel centers.
    pub fn centroid(&self) -> Result<Point2D> {
        match self {
            Segmentation::Rle(r) => r.centroid(),
            Segmentation::Polygons(rings) => {
                if rings.is_empty() {
                    return Err(Error::EmptySegmentation);
                }
                let total: f64 = rings.iter().map(Polygon::area).sum();
                if total == 0.0 {
                    let pts: Vec<_> = rings.iter().flat_map(|r| r.vertices()).collect();
                    let n = pts.len() as f64;
                    return Ok(Point2D::new(
                        pts.iter().map(|p| p.x).sum::<f64>() / n,
                        pts.iter().map(|p| p.y).sum::<f64>() / n,
                    ));
                }
                let (mut x, mut y) = (0.0, 0.0);
                for ring in rings {
                    let (a, c) = (ring.area(), ring.centroid());
                    x += a * c.x;
                    y += a * c.y;
                }
                Ok(Point2D::new(x / total, y / total))
            }
        }
    }

    /// Rasterizes onto an `height x width` grid. RLE input must already have
    /// those dimensions.
    pub fn to_rle(&self, height: u32, width: u32) -> Result<RleMask> {
        match self {
            Segmentation::Rle(r) => {
                if (r.height(), r.width()) != (height, width) {
                    return Err(Error::DimensionMismatch(format!(
                        "mask is {}x{}, expected {height}x{width}",
                        r.height(),
                        r.width()
                    )));
                }
                Ok(r.clone())
            }
            Segmentation::Polygons(rings) => Ok(rasterize_rings(rings, height, width)?.to_rle()),
        }
    }

    pub fn dims(&self) -> Option<(u32, u32)> {
        match self {
            Segmentation::Rle(r) => Some((r.height(), r.width())),
            Segmentation::Polygons(_) => None,
        }
    }
}

impl From<Polygon> for Segmentation {
    fn from(p: Polygon) -> Self {
        Segmentation::Polygons(vec![p])
    }
}

impl From<RleMask> for Segmentation {
    fn from(r: RleMask) -> Self {
        Segmentation::Rle(r)
    }
}

/// Pixel IoU of two segmentations of any form.
///
/// A polygon compared with a mask is rasterized on the mask's grid. Two
/// polygon segmentations are rasterized on a local grid aligned to whole
/// pixels that covers both.
pub fn segmentation_iou(a: &Segmentation, b: &Segmentation) -> Result<f64> {
    match (a, b) {
        (Segmentation::Rle(x), Segmentation::Rle(y)) => x.iou(y, false),
        (Segmentation::Rle(x), poly) | (poly, Segmentation::Rle(x)) => {
            let y = poly.to_rle(x.height(), x.width())?;
            x.iou(&y, false)
        }
        (Segmentation::Polygons(pa), Segmentation::Polygons(pb)) => {
            let bounds = a.bbox().union(&b.bbox());
            let (x0, y0) = (bounds.x.floor(), bounds.y.floor());
            let w = ((bounds.right().ceil() - x0) as u32).max(1);
            let h = ((bounds.bottom().ceil() - y0) as u32).max(1);
            let shift = |rings: &[Polygon]| rings.iter().map(|r| r.translate(-x0, -y0)).collect::<Vec<_>>();
            let ra = rasterize_rings(&shift(pa), h, w)?.to_rle();
            let rb = rasterize_rings(&shift(pb), h, w)?.to_rle();
            ra.iou(&rb, false)
        }
    }
}
