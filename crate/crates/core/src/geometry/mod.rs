//! Pixel-exact mask and polygon kernels.
//!
//! Coordinates are image pixels: origin at the top-left corner, x to the
//! right, y downward. Pixel `(row, col)` covers `[col, col+1) x [row, row+1)`
//! and its center is `(col + 0.5, row + 0.5)`.

mod contour;
mod mask;
mod polygon;
mod raster;
mod segmentation;
mod simplify;

pub use contour::mask_to_polygons;
pub use mask::{bbox_iou, BinaryMask, RleMask};
pub use polygon::{BoundingBox, Point2D, Polygon};
pub use raster::{rasterize, rasterize_rings};
pub use segmentation::{segmentation_iou, Segmentation};
pub use simplify::simplify_polygon;
