use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Point2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeType {
    Polygon,
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub label: String,
    pub points: Vec<Point2D>,
    pub shape_type: ShapeType,
    pub group_id: Option<i64>,
}

/// One labeled image as written by labelme.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelmeDocument {
    pub image_path: String,
    pub image_height: u32,
    pub image_width: u32,
    pub shapes: Vec<Shape>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawDocument {
    image_path: Option<String>,
    image_height: Option<u32>,
    image_width: Option<u32>,
    #[serde(default)]
    shapes: Vec<RawShape>,
}

#[derive(Deserialize)]
struct RawShape {
    label: String,
    points: Vec<[f64; 2]>,
    #[serde(default)]
    shape_type: Option<String>,
    #[serde(default)]
    group_id: Option<i64>,
}

pub fn parse_labelme(bytes: &[u8]) -> Result<LabelmeDocument> {
    let raw: RawDocument = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })?;
    let image_height = raw
        .image_height
        .ok_or_else(|| Error::Schema("missing imageHeight".into()))?;
    let image_width = raw
        .image_width
        .ok_or_else(|| Error::Schema("missing imageWidth".into()))?;
    if image_height == 0 || image_width == 0 {
        return Err(Error::Schema(format!(
            "image size {image_height}x{image_width} must be positive"
        )));
    }
    let image_path = raw
        .image_path
        .ok_or_else(|| Error::Schema("missing imagePath".into()))?;

    let mut shapes = Vec::with_capacity(raw.shapes.len());
    for (i, s) in raw.shapes.into_iter().enumerate() {
        if s.label.is_empty() {
            return Err(Error::Schema(format!("shape {i} has an empty label")));
        }
        // labelme omits shape_type on very old files; those were polygons
        let shape_type = match s.shape_type.as_deref().unwrap_or("polygon") {
            "polygon" => ShapeType::Polygon,
            "point" => ShapeType::Point,
            other => {
                return Err(Error::Schema(format!(
                    "shape {i} ({}): unsupported shape_type {other:?}",
                    s.label
                )))
            }
        };
        let points: Vec<Point2D> = s.points.iter().map(|&[x, y]| Point2D::new(x, y)).collect();
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Schema(format!("shape {i} ({}) has a non-finite point", s.label)));
        }
        match shape_type {
            ShapeType::Polygon if points.len() < 3 => {
                return Err(Error::Schema(format!(
                    "polygon shape {i} ({}) has {} points, needs at least 3",
                    s.label,
                    points.len()
                )))
            }
            ShapeType::Point if points.len() != 1 => {
                return Err(Error::Schema(format!(
                    "point shape {i} ({}) has {} points, needs exactly 1",
                    s.label,
                    points.len()
                )))
            }
            _ => {}
        }
        shapes.push(Shape {
            label: s.label,
            points,
            shape_type,
            group_id: s.group_id,
        });
    }
    Ok(LabelmeDocument {
        image_path,
        image_height,
        image_width,
        shapes,
    })
}
