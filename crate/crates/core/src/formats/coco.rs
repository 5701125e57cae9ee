use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Polygon, RleMask, Segmentation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub height: u32,
    pub width: u32,
    /// Position of the image in its source video, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_index: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    #[serde(with = "segmentation_json")]
    pub segmentation: Segmentation,
    pub area: f64,
    pub bbox: BoundingBox,
    #[serde(default)]
    pub iscrowd: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u64,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supercategory: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    #[serde(default)]
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

impl CocoDataset {
    pub fn category_by_name(&self, name: &str) -> Option<&CocoCategory> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn image(&self, id: u64) -> Option<&CocoImage> {
        self.images.iter().find(|i| i.id == id)
    }

    /// Frame number of every image. Uses `frame_index` when all images carry
    /// one, otherwise ranks images by ascending file name.
    pub fn frame_indices(&self) -> HashMap<u64, u64> {
        if self.images.iter().all(|i| i.frame_index.is_some()) {
            return self.images.iter().map(|i| (i.id, i.frame_index.unwrap())).collect();
        }
        let mut order: Vec<&CocoImage> = self.images.iter().collect();
        order.sort_by(|a, b| a.file_name.cmp(&b.file_name).then(a.id.cmp(&b.id)));
        order
            .iter()
            .enumerate()
            .map(|(rank, img)| (img.id, rank as u64))
            .collect()
    }

    /// Checks id uniqueness and that every annotation points at an existing
    /// image and category.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let dup = |ids: &mut dyn Iterator<Item = u64>| -> Vec<u64> {
            let mut seen = HashSet::new();
            let mut d: Vec<u64> = ids.filter(|id| !seen.insert(*id)).collect();
            d.sort_unstable();
            d.dedup();
            d
        };
        let d = dup(&mut self.images.iter().map(|i| i.id));
        if !d.is_empty() {
            problems.push(format!("duplicate image ids {d:?}"));
        }
        let d = dup(&mut self.annotations.iter().map(|a| a.id));
        if !d.is_empty() {
            problems.push(format!("duplicate annotation ids {d:?}"));
        }
        let d = dup(&mut self.categories.iter().map(|c| c.id));
        if !d.is_empty() {
            problems.push(format!("duplicate category ids {d:?}"));
        }
        let images: HashSet<u64> = self.images.iter().map(|i| i.id).collect();
        let cats: HashSet<u64> = self.categories.iter().map(|c| c.id).collect();
        let bad_img: Vec<String> = self
            .annotations
            .iter()
            .filter(|a| !images.contains(&a.image_id))
            .map(|a| format!("{} (image_id {})", a.id, a.image_id))
            .collect();
        if !bad_img.is_empty() {
            problems.push(format!(
                "annotations referencing missing images: {}",
                bad_img.join(", ")
            ));
        }
        let bad_cat: Vec<String> = self
            .annotations
            .iter()
            .filter(|a| !cats.contains(&a.category_id))
            .map(|a| format!("{} (category_id {})", a.id, a.category_id))
            .collect();
        if !bad_cat.is_empty() {
            problems.push(format!(
                "annotations referencing missing categories: {}",
                bad_cat.join(", ")
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Integrity(problems.join("; ")))
        }
    }
}

/// Compact JSON with a fixed key order; identical datasets give identical
/// bytes. RLE segmentations are written in compressed-string form.
pub fn write_coco(ds: &CocoDataset) -> Result<Vec<u8>> {
    serde_json::to_vec(ds).map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_coco(bytes: &[u8]) -> Result<CocoDataset> {
    let ds: CocoDataset = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })?;
    ds.validate()?;
    Ok(ds)
}

/// Serde adapter for the three COCO segmentation encodings: polygon rings
/// `[[x1,y1,...],...]`, uncompressed RLE `{size, counts:[...]}` and
/// compressed RLE `{size, counts:"..."}`.
pub(crate) mod segmentation_json {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawCounts {
        Compressed(String),
        Plain(Vec<u32>),
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawSegmentation {
        Polygons(Vec<Vec<f64>>),
        Rle { size: [u32; 2], counts: RawCounts },
    }

    #[derive(Serialize)]
    struct CompressedRle<'a> {
        size: [u32; 2],
        counts: &'a str,
    }

    pub fn serialize<S: Serializer>(seg: &Segmentation, s: S) -> std::result::Result<S::Ok, S::Error> {
        match seg {
            Segmentation::Polygons(rings) => {
                let flat: Vec<Vec<f64>> = rings.iter().map(Polygon::to_flat).collect();
                flat.serialize(s)
            }
            Segmentation::Rle(r) => {
                let counts = r.to_compressed_string();
                CompressedRle {
                    size: [r.height(), r.width()],
                    counts: &counts,
                }
                .serialize(s)
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Segmentation, D::Error> {
        let raw = RawSegmentation::deserialize(d)?;
        from_raw(raw).map_err(serde::de::Error::custom)
    }

    fn from_raw(raw: RawSegmentation) -> Result<Segmentation> {
        match raw {
            RawSegmentation::Polygons(rings) => {
                let rings = rings
                    .iter()
                    .map(|r| Polygon::from_flat(r))
                    .collect::<Result<Vec<_>>>()?;
                if rings.is_empty() {
                    return Err(Error::EmptySegmentation);
                }
                Ok(Segmentation::Polygons(rings))
            }
            RawSegmentation::Rle { size: [h, w], counts } => Ok(Segmentation::Rle(match counts {
                RawCounts::Compressed(s) => RleMask::from_compressed_string(&s, h, w)?,
                RawCounts::Plain(c) => RleMask::new(h, w, c)?,
            })),
        }
    }

    /// Decodes a standalone segmentation value.
    pub fn from_value(v: serde_json::Value) -> Result<Segmentation> {
        let raw: RawSegmentation = serde_json::from_value(v)
            .map_err(|_| Error::Schema("segmentation is not a polygon list or an RLE object".into()))?;
        from_raw(raw)
    }

    pub fn to_value(seg: &Segmentation) -> serde_json::Value {
        serialize(seg, serde_json::value::Serializer).expect("segmentation serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BinaryMask, Point2D};

    fn sample() -> CocoDataset {
        let square = Polygon::new(vec![
            Point2D::new(1.0, 1.0),
            Point2D::new(11.0, 1.0),
            Point2D::new(11.0, 11.0),
            Point2D::new(1.0, 11.0),
        ])
        .unwrap();
        let rle = BinaryMask::from_fn(20, 30, |r, c| r > 3 && r < 9 && c > 10 && c < 14).to_rle();
        CocoDataset {
            images: vec![CocoImage {
                id: 1,
                file_name: "a.png".into(),
                height: 20,
                width: 30,
                frame_index: Some(0),
            }],
            annotations: vec![
                CocoAnnotation {
                    id: 1,
                    image_id: 1,
                    category_id: 1,
                    segmentation: square.into(),
                    area: 100.0,
                    bbox: BoundingBox::new(1.0, 1.0, 10.0, 10.0),
                    iscrowd: 0,
                },
                CocoAnnotation {
                    id: 2,
                    image_id: 1,
                    category_id: 2,
                    area: rle.area() as f64,
                    bbox: rle.bbox(),
                    segmentation: rle.into(),
                    iscrowd: 0,
                },
            ],
            categories: vec![
                CocoCategory {
                    id: 1,
                    name: "vole_1".into(),
                    supercategory: None,
                },
                CocoCategory {
                    id: 2,
                    name: "vole_2".into(),
                    supercategory: None,
                },
            ],
        }
    }

    #[test]
    fn roundtrip() {
        let ds = sample();
        let bytes = write_coco(&ds).unwrap();
        assert_eq!(read_coco(&bytes).unwrap(), ds);
        assert_eq!(write_coco(&ds).unwrap(), bytes);
    }

    #[test]
    fn dangling_image_reference() {
        let mut ds = sample();
        ds.annotations[1].image_id = 9;
        let err = read_coco(&write_coco(&ds).unwrap()).unwrap_err();
        assert!(
            matches!(err, Error::Integrity(ref m) if m.contains("2 (image_id 9)")),
            "{err}"
        );
    }

    #[test]
    fn empty_annotations_valid() {
        let mut ds = sample();
        ds.annotations.clear();
        assert_eq!(read_coco(&write_coco(&ds).unwrap()).unwrap(), ds);
    }

    #[test]
    fn reads_all_segmentation_forms() {
        let json = br#"{"images":[{"id":1,"file_name":"a","height":2,"width":2}],
            "categories":[{"id":1,"name":"m"}],
            "annotations":[
              {"id":1,"image_id":1,"category_id":1,"segmentation":{"size":[2,2],"counts":[0,1,3]},"area":1,"bbox":[0,0,1,1],"iscrowd":0},
              {"id":2,"image_id":1,"category_id":1,"segmentation":{"size":[2,2],"counts":"013"},"area":1,"bbox":[0,0,1,1]},
              {"id":3,"image_id":1,"category_id":1,"segmentation":[[0,0,1,0,1,1]],"area":0.5,"bbox":[0,0,1,1]}
            ]}"#;
        let ds = read_coco(json).unwrap();
        assert_eq!(ds.annotations[0].segmentation, ds.annotations[1].segmentation);
        assert!(matches!(ds.annotations[2].segmentation, Segmentation::Polygons(_)));
    }

    #[test]
    fn frame_indices_fall_back_to_file_name() {
        let mut ds = sample();
        ds.images = vec![
            CocoImage {
                id: 7,
                file_name: "b.png".into(),
                height: 1,
                width: 1,
                frame_index: None,
            },
            CocoImage {
                id: 8,
                file_name: "a.png".into(),
                height: 1,
                width: 1,
                frame_index: None,
            },
        ];
        let f = ds.frame_indices();
        assert_eq!((f[&8], f[&7]), (0, 1));
    }
}
