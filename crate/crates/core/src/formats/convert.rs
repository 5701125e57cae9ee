use std::collections::{BTreeSet, HashMap, HashSet};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D, Polygon, Segmentation};
use crate::tracking::DetectionRecord;

use super::coco::{CocoAnnotation, CocoCategory, CocoDataset, CocoImage};
use super::labelme::{LabelmeDocument, ShapeType};

pub const DEFAULT_KEYPOINT_RADIUS: f64 = 5.0;
const KEYPOINT_SIDES: usize = 16;

/// Regular 16-gon around a keypoint, first vertex at angle 0.
pub fn keypoint_to_region(center: Point2D, radius: f64) -> Result<Polygon> {
    if radius.is_nan() || radius <= 0.0 || radius.is_infinite() {
        return Err(Error::invalid_argument(format!(
            "keypoint radius must be > 0, got {radius}"
        )));
    }
    let vertices = (0..KEYPOINT_SIDES)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / KEYPOINT_SIDES as f64;
            Point2D::new(center.x + radius * t.cos(), center.y + radius * t.sin())
        })
        .collect();
    Polygon::new(vertices)
}

/// Builds a COCO dataset from labelme documents.
///
/// Categories are the sorted unique shape labels with ids from 1. Each shape
/// becomes one annotation, except that shapes sharing a label and a non-null
/// `group_id` inside one document merge into a single multi-ring annotation.
/// Point shapes become keypoint regions. Image ids and `frame_index` follow
/// input order.
pub fn labelme_to_coco(docs: &[LabelmeDocument], keypoint_radius: f64) -> Result<CocoDataset> {
    if docs.is_empty() {
        return Err(Error::invalid_argument("no labelme documents to convert"));
    }
    let mut seen = HashSet::new();
    for d in docs {
        if !seen.insert(d.image_path.as_str()) {
            return Err(Error::Conflict(format!("duplicate image file name {:?}", d.image_path)));
        }
    }

    let labels: BTreeSet<&str> = docs
        .iter()
        .flat_map(|d| d.shapes.iter().map(|s| s.label.as_str()))
        .collect();
    let categories: Vec<CocoCategory> = labels
        .iter()
        .enumerate()
        .map(|(i, name)| CocoCategory {
            id: i as u64 + 1,
            name: name.to_string(),
            supercategory: None,
        })
        .collect();
    let cat_id: HashMap<&str, u64> = categories.iter().map(|c| (c.name.as_str(), c.id)).collect();

    let mut images = Vec::with_capacity(docs.len());
    let mut annotations = Vec::new();
    for (idx, doc) in docs.iter().enumerate() {
        let image_id = idx as u64 + 1;
        images.push(CocoImage {
            id: image_id,
            file_name: doc.image_path.clone(),
            height: doc.image_height,
            width: doc.image_width,
            frame_index: Some(idx as u64),
        });

        // Each entry: (label, rings); groups keep the slot of their first shape.
        let mut instances: Vec<(&str, Vec<Polygon>)> = Vec::new();
        let mut group_slot: HashMap<(&str, i64), usize> = HashMap::new();
        for shape in &doc.shapes {
            let ring = match shape.shape_type {
                ShapeType::Polygon => Polygon::new(shape.points.clone())?,
                ShapeType::Point => keypoint_to_region(shape.points[0], keypoint_radius)?,
            };
            match shape.group_id {
                Some(g) => match group_slot.get(&(shape.label.as_str(), g)) {
                    Some(&slot) => instances[slot].1.push(ring),
                    None => {
                        group_slot.insert((shape.label.as_str(), g), instances.len());
                        instances.push((&shape.label, vec![ring]));
                    }
                },
                None => instances.push((&shape.label, vec![ring])),
            }
        }

        for (label, rings) in instances {
            let area = rings.iter().map(Polygon::area).sum();
            let bbox = rings
                .iter()
                .map(Polygon::bbox)
                .reduce(|a, b| a.union(&b))
                .unwrap_or(BoundingBox::default());
            annotations.push(CocoAnnotation {
                id: annotations.len() as u64 + 1,
                image_id,
                category_id: cat_id[label],
                segmentation: Segmentation::Polygons(rings),
                area,
                bbox,
                iscrowd: 0,
            });
        }
    }
    Ok(CocoDataset {
        images,
        annotations,
        categories,
    })
}

/// Ground-truth annotations as detection records (score 1), labelled by
/// category name and placed on frames via [`CocoDataset::frame_indices`].
/// Output is ordered by frame, then annotation id.
pub fn coco_to_detections(ds: &CocoDataset) -> Result<Vec<DetectionRecord>> {
    let frames = ds.frame_indices();
    let names: HashMap<u64, &str> = ds.categories.iter().map(|c| (c.id, c.name.as_str())).collect();
    let mut out = ds
        .annotations
        .iter()
        .map(|a| {
            let frame = *frames.get(&a.image_id).ok_or_else(|| {
                Error::Integrity(format!("annotation {} references missing image {}", a.id, a.image_id))
            })?;
            let label = names.get(&a.category_id).ok_or_else(|| {
                Error::Integrity(format!(
                    "annotation {} references missing category {}",
                    a.id, a.category_id
                ))
            })?;
            Ok((
                a.id,
                DetectionRecord {
                    frame,
                    label: label.to_string(),
                    score: 1.0,
                    segmentation: a.segmentation.clone(),
                    bbox: a.bbox,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|(id, d)| (d.frame, *id));
    Ok(out.into_iter().map(|(_, d)| d).collect())
}
