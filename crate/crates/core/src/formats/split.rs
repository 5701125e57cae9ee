use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::coco::{CocoAnnotation, CocoDataset, CocoImage};

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub train: CocoDataset,
    pub val: CocoDataset,
    pub seed: u64,
    pub ratio: f64,
}

/// Seeded train/validation split. The first `ceil(ratio * N)` images of a
/// seeded shuffle go to training; annotations follow their image and ids are
/// renumbered from 1 in each part. Both parts keep the full category table.
pub fn split_dataset(ds: &CocoDataset, ratio: f64, seed: u64) -> Result<SplitResult> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid_argument(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let n = ds.images.len();
    if n < 2 {
        return Err(Error::TooSmall(format!("need at least 2 images to split, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ratio * n as f64).ceil() as usize).min(n);
    let mut train_idx = order[..n_train].to_vec();
    let mut val_idx = order[n_train..].to_vec();
    // parts list images in their original order
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    Ok(SplitResult {
        train: subset(ds, &train_idx),
        val: subset(ds, &val_idx),
        seed,
        ratio,
    })
}

fn subset(ds: &CocoDataset, image_idx: &[usize]) -> CocoDataset {
    let mut remap = HashMap::new();
    let images: Vec<CocoImage> = image_idx
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let img = &ds.images[i];
            remap.insert(img.id, k as u64 + 1);
            CocoImage {
                id: k as u64 + 1,
                ..img.clone()
            }
        })
        .collect();
    let mut annotations: Vec<CocoAnnotation> = Vec::new();
    // annotations grouped by new image id, original order within an image
    let mut by_image: Vec<Vec<&CocoAnnotation>> = vec![Vec::new(); images.len()];
    for a in &ds.annotations {
        if let Some(&new_id) = remap.get(&a.image_id) {
            by_image[new_id as usize - 1].push(a);
        }
    }
    for (k, anns) in by_image.into_iter().enumerate() {
        for a in anns {
            annotations.push(CocoAnnotation {
                id: annotations.len() as u64 + 1,
                image_id: k as u64 + 1,
                ..a.clone()
            });
        }
    }
    CocoDataset {
        images,
        annotations,
        categories: ds.categories.clone(),
    }
}
