//! Seeded synthetic scenes of disc-shaped animals with a known error budget.
//!
//! [`generate_scenario`] produces ground truth; [`perturb`] turns it into
//! detector-like output while logging every miss, spurious detection and
//! identity swap it introduces, so evaluation results can be checked
//! against the log.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{CocoAnnotation, CocoCategory, CocoDataset, CocoImage};
use crate::geometry::{Point2D, RleMask, Segmentation};
use crate::tracking::{DetectionRecord, Track, TrackState};

const PLACEMENT_ATTEMPTS: usize = 10_000;
const STEP_ATTEMPTS: usize = 100;
const SPURIOUS_ATTEMPTS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_animals: usize,
    pub n_frames: u64,
    /// Arena `(width, height)` in pixels.
    pub arena: (u32, u32),
    pub body_radius: f64,
    pub speed_max: f64,
    /// Minimum center distance kept between animals; 0 allows crossings.
    pub min_separation: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Chance of dropping each true detection.
    pub p_fn: f64,
    /// Mean number of spurious detections per frame.
    pub p_fp: f64,
    /// Number of pairwise label swaps.
    pub n_ids: usize,
    /// Standard deviation of the centroid jitter, pixels.
    pub centroid_noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnEvent {
    pub frame: u64,
    /// Ground-truth identity whose detection was removed.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpEvent {
    pub frame: u64,
    pub label: String,
    pub center: Point2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsEvent {
    pub frame: u64,
    /// Ground-truth identities whose output labels were exchanged from this
    /// frame on.
    pub labels: (String, String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InjectionLog {
    pub fn_events: Vec<FnEvent>,
    pub fp_events: Vec<FpEvent>,
    pub ids_events: Vec<IdsEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// One track per animal, present in every frame, sorted by label.
    pub gt_tracks: Vec<Track>,
    pub dataset: CocoDataset,
    /// `centers[animal][frame]`: exact disc centers (track centroids are the
    /// pixel centroids of the rasterized discs).
    pub centers: Vec<Vec<Point2D>>,
}

pub fn animal_label(i: usize) -> String {
    format!("animal_{i}")
}

/// Pixels whose centers lie within `radius` of `center`, clipped to the grid.
pub fn disc_mask(center: Point2D, radius: f64, height: u32, width: u32) -> Result<RleMask> {
    let c0 = (center.x - radius - 0.5).ceil().max(0.0) as i64;
    let c1 = ((center.x + radius - 0.5).floor() as i64).min(width as i64 - 1);
    let intervals = (c0..=c1).filter_map(|c| {
        let dx = c as f64 + 0.5 - center.x;
        let half2 = radius * radius - dx * dx;
        if half2 < 0.0 {
            return None;
        }
        let half = half2.sqrt();
        let r0 = (center.y - half - 0.5).ceil().max(0.0) as i64;
        let r1 = ((center.y + half - 0.5).floor() as i64).min(height as i64 - 1);
        (r0 <= r1).then_some((c as u32, r0 as u32, r1 as u32 + 1))
    });
    RleMask::from_column_intervals(height, width, intervals)
}

fn check_config(cfg: &ScenarioConfig) -> Result<()> {
    let (w, h) = cfg.arena;
    let bad = |m: String| Err(Error::Config(m));
    if cfg.n_animals == 0 || cfg.n_frames == 0 || w == 0 || h == 0 {
        return bad("n_animals, n_frames and arena size must be positive".into());
    }
    if !(cfg.body_radius > 0.0 && cfg.body_radius.is_finite()) || !(cfg.speed_max > 0.0 && cfg.speed_max.is_finite()) {
        return bad("body_radius and speed_max must be positive".into());
    }
    if !(cfg.min_separation >= 0.0 && cfg.min_separation.is_finite()) {
        return bad("min_separation must be non-negative".into());
    }
    if 2.0 * cfg.body_radius >= w.min(h) as f64 {
        return bad(format!(
            "a disc of radius {} does not fit a {w}x{h} arena",
            cfg.body_radius
        ));
    }
    Ok(())
}

fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let v = if v < lo {
        2.0 * lo - v
    } else if v > hi {
        2.0 * hi - v
    } else {
        v
    };
    v.clamp(lo, hi)
}

fn separated(p: Point2D, others: &[Point2D], skip: usize, min_sep: f64) -> bool {
    min_sep <= 0.0
        || others
            .iter()
            .enumerate()
            .all(|(j, q)| j == skip || p.distance(q) >= min_sep)
}

/// Random-walk scene of `n_animals` discs kept fully inside the arena.
///
/// Each frame the animals move one after another, each by a uniformly drawn
/// direction and a step length in `[0, speed_max]`, reflecting off the
/// walls. With a positive `min_separation`, a step that would bring an
/// animal closer than that to another animal's current position is redrawn,
/// up to 100 times, after which the animal stays put.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    check_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = cfg.arena;
    let r = cfg.body_radius;
    let (x_lo, x_hi, y_lo, y_hi) = (r, w as f64 - r, r, h as f64 - r);

    let mut pos: Vec<Point2D> = Vec::with_capacity(cfg.n_animals);
    for i in 0..cfg.n_animals {
        let placed = (0..PLACEMENT_ATTEMPTS).find_map(|_| {
            let p = Point2D::new(rng.random_range(x_lo..=x_hi), rng.random_range(y_lo..=y_hi));
            separated(p, &pos, usize::MAX, cfg.min_separation).then_some(p)
        });
        match placed {
            Some(p) => pos.push(p),
            None => {
                return Err(Error::Config(format!(
                    "could not place animal {} of {} at separation {} in a {w}x{h} arena",
                    i + 1,
                    cfg.n_animals,
                    cfg.min_separation
                )))
            }
        }
    }

    let mut centers = vec![Vec::with_capacity(cfg.n_frames as usize); cfg.n_animals];
    for frame in 0..cfg.n_frames {
        if frame > 0 {
            for i in 0..cfg.n_animals {
                for _ in 0..STEP_ATTEMPTS {
                    let theta = rng.random_range(0.0..std::f64::consts::TAU);
                    let len = rng.random_range(0.0..=cfg.speed_max);
                    let p = Point2D::new(
                        reflect(pos[i].x + len * theta.cos(), x_lo, x_hi),
                        reflect(pos[i].y + len * theta.sin(), y_lo, y_hi),
                    );
                    if separated(p, &pos, i, cfg.min_separation) {
                        pos[i] = p;
                        break;
                    }
                }
            }
        }
        for (i, p) in pos.iter().enumerate() {
            centers[i].push(*p);
        }
    }

    let mut images = Vec::with_capacity(cfg.n_frames as usize);
    let mut annotations = Vec::with_capacity(cfg.n_frames as usize * cfg.n_animals);
    let mut states: Vec<Vec<TrackState>> = vec![Vec::with_capacity(cfg.n_frames as usize); cfg.n_animals];
    for frame in 0..cfg.n_frames {
        let image_id = frame + 1;
        images.push(CocoImage {
            id: image_id,
            file_name: format!("frame_{frame:06}.png"),
            height: h,
            width: w,
            frame_index: Some(frame),
        });
        for i in 0..cfg.n_animals {
            let mask = disc_mask(centers[i][frame as usize], r, h, w)?;
            let seg = Segmentation::Rle(mask);
            annotations.push(CocoAnnotation {
                id: annotations.len() as u64 + 1,
                image_id,
                category_id: i as u64 + 1,
                area: seg.area(),
                bbox: seg.bbox(),
                segmentation: seg.clone(),
                iscrowd: 0,
            });
            states[i].push(TrackState {
                frame,
                present: true,
                centroid: Some(seg.centroid()?),
                score: 1.0,
                segmentation: Some(seg),
                interpolated: false,
            });
        }
    }
    let categories = (0..cfg.n_animals)
        .map(|i| CocoCategory {
            id: i as u64 + 1,
            name: animal_label(i + 1),
            supercategory: Some("animal".into()),
        })
        .collect();
    let mut gt_tracks = states
        .into_iter()
        .enumerate()
        .map(|(i, s)| Track::new(animal_label(i + 1), s))
        .collect::<Result<Vec<_>>>()?;
    gt_tracks.sort_by(|a, b| a.label.cmp(&b.label));

    Ok(Scenario {
        config: cfg.clone(),
        gt_tracks,
        dataset: CocoDataset {
            images,
            annotations,
            categories,
        },
        centers,
    })
}

fn check_perturbation(p: &PerturbationConfig, sc: &ScenarioConfig) -> Result<()> {
    if !(0.0..1.0).contains(&p.p_fn) {
        return Err(Error::Config(format!("p_fn must be in [0, 1), got {}", p.p_fn)));
    }
    if !(p.p_fp >= 0.0 && p.p_fp.is_finite()) {
        return Err(Error::Config(format!(
            "p_fp must be a non-negative mean, got {}",
            p.p_fp
        )));
    }
    if !(p.centroid_noise >= 0.0 && p.centroid_noise.is_finite()) {
        return Err(Error::Config(format!(
            "centroid_noise must be non-negative, got {}",
            p.centroid_noise
        )));
    }
    if p.n_ids > 0 && sc.n_animals < 2 {
        return Err(Error::Config("label swaps need at least two animals".into()));
    }
    let slots = sc.n_frames.saturating_sub(1);
    if p.n_ids as u64 > slots {
        return Err(Error::Config(format!(
            "{} label swaps requested but only {slots} frames can host one",
            p.n_ids
        )));
    }
    Ok(())
}

/// Detector-like output for a scenario, with every injected error logged.
///
/// Per frame and animal a detection is dropped with probability `p_fn`;
/// the two animals of a swap are never dropped on the swap frame or the
/// frame before it, so each swap is observable. A Poisson number of
/// spurious discs (mean `p_fp`) is added per frame, labelled `spurious_{j}`
/// and centered at least three body radii from every true center. Each
/// swap exchanges the output labels of two animals from its frame to the
/// end of the sequence; swaps fall on distinct frames. Kept detections are
/// moved by Gaussian noise, capped at `min(radius / 4, 3 * noise)` and
/// halved until the moved disc still overlaps its true disc at IoU > 0.5.
pub fn perturb(scenario: &Scenario, cfg: &PerturbationConfig) -> Result<(Vec<DetectionRecord>, InjectionLog)> {
    let sc = &scenario.config;
    check_perturbation(cfg, sc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = sc.arena;
    let r = sc.body_radius;
    let n = sc.n_animals;

    // swap frame -> animal pair
    let swap_frames = index::sample(&mut rng, sc.n_frames.saturating_sub(1) as usize, cfg.n_ids).into_vec();
    let mut swaps: Vec<(u64, usize, usize)> = swap_frames
        .into_iter()
        .map(|k| {
            let pair = index::sample(&mut rng, n, 2);
            let (a, b) = (pair.index(0).min(pair.index(1)), pair.index(0).max(pair.index(1)));
            (k as u64 + 1, a, b)
        })
        .collect();
    swaps.sort_unstable();

    let noise = if cfg.centroid_noise > 0.0 {
        Some(Normal::new(0.0, cfg.centroid_noise).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let spurious = if cfg.p_fp > 0.0 {
        Some(Poisson::new(cfg.p_fp).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let max_shift = (r / 4.0).min(3.0 * cfg.centroid_noise);

    let labels: Vec<String> = (1..=n).map(animal_label).collect();
    let mut out_label: Vec<usize> = (0..n).collect();
    let mut log = InjectionLog::default();
    let mut preds = Vec::new();
    let mut next_swap = 0;

    for frame in 0..sc.n_frames {
        let mut protected = vec![false; n];
        for &(k, a, b) in &swaps {
            if k == frame || k == frame + 1 {
                protected[a] = true;
                protected[b] = true;
            }
        }
        while next_swap < swaps.len() && swaps[next_swap].0 == frame {
            let (_, a, b) = swaps[next_swap];
            out_label.swap(a, b);
            log.ids_events.push(IdsEvent {
                frame,
                labels: (labels[a].clone(), labels[b].clone()),
            });
            next_swap += 1;
        }

        for i in 0..n {
            let state = scenario.gt_tracks[i]
                .state_at(frame)
                .ok_or_else(|| Error::MissingData(format!("{} has no state at frame {frame}", labels[i])))?;
            let truth = state
                .segmentation
                .as_ref()
                .ok_or_else(|| Error::MissingData(format!("{} has no mask at frame {frame}", labels[i])))?;
            let drop = rng.random::<f64>() < cfg.p_fn;
            if drop && !protected[i] {
                log.fn_events.push(FnEvent {
                    frame,
                    label: labels[i].clone(),
                });
                continue;
            }
            let segmentation = match &noise {
                None => truth.clone(),
                Some(dist) => {
                    let (mut dx, mut dy): (f64, f64) = (dist.sample(&mut rng), dist.sample(&mut rng));
                    let len = dx.hypot(dy);
                    if len > max_shift {
                        dx *= max_shift / len;
                        dy *= max_shift / len;
                    }
                    let truth_rle = truth.to_rle(h, w)?;
                    let center = scenario.centers[i][frame as usize];
                    loop {
                        let moved = disc_mask(Point2D::new(center.x + dx, center.y + dy), r, h, w)?;
                        if moved.iou(&truth_rle, false)? > 0.5 {
                            break Segmentation::Rle(moved);
                        }
                        dx /= 2.0;
                        dy /= 2.0;
                    }
                }
            };
            preds.push(DetectionRecord {
                frame,
                label: labels[out_label[i]].clone(),
                score: 1.0,
                bbox: segmentation.bbox(),
                segmentation,
            });
        }

        let n_spurious = spurious.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
        let truth_centers: Vec<Point2D> = (0..n).map(|i| scenario.centers[i][frame as usize]).collect();
        let mut placed = 0;
        for _ in 0..n_spurious {
            let spot = (0..SPURIOUS_ATTEMPTS).find_map(|_| {
                let p = Point2D::new(rng.random_range(r..=w as f64 - r), rng.random_range(r..=h as f64 - r));
                truth_centers.iter().all(|c| c.distance(&p) >= 3.0 * r).then_some(p)
            });
            let Some(center) = spot else { continue };
            let label = format!("spurious_{placed}");
            placed += 1;
            let segmentation = Segmentation::Rle(disc_mask(center, r, h, w)?);
            log.fp_events.push(FpEvent {
                frame,
                label: label.clone(),
                center,
            });
            preds.push(DetectionRecord {
                frame,
                label,
                score: 1.0,
                bbox: segmentation.bbox(),
                segmentation,
            });
        }
    }
    Ok((preds, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::write_coco;
    use crate::geometry::segmentation_iou;
    use crate::metrics::{evaluate_mot, MotConfig};
    use crate::tracking::assemble_tracks;

    fn cfg(n_animals: usize, n_frames: u64, sep: f64, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n_animals,
            n_frames,
            arena: (200, 150),
            body_radius: 8.0,
            speed_max: 4.0,
            min_separation: sep,
            seed,
        }
    }

    #[test]
    fn disc_matches_brute_force() {
        let c = Point2D::new(10.3, 7.8);
        let m = disc_mask(c, 5.5, 20, 25).unwrap().to_mask();
        for row in 0..20 {
            for col in 0..25 {
                let inside = Point2D::new(col as f64 + 0.5, row as f64 + 0.5).distance(&c) <= 5.5;
                assert_eq!(m.get(row, col), inside, "({row},{col})");
            }
        }
        // clipped at the border
        let m = disc_mask(Point2D::new(0.0, 0.0), 3.0, 10, 10).unwrap();
        assert!(m.area() > 0 && m.area() < 28);
    }

    #[test]
    fn construction() {
        let s = generate_scenario(&cfg(3, 50, 0.0, 1)).unwrap();
        assert_eq!(s.gt_tracks.len(), 3);
        assert!(s.gt_tracks.iter().all(|t| t.present().count() == 50));
        assert_eq!(s.dataset.annotations.len(), 150);
        s.dataset.validate().unwrap();
    }

    #[test]
    fn seed_deterministic() {
        let a = generate_scenario(&cfg(4, 100, 20.0, 9)).unwrap();
        let b = generate_scenario(&cfg(4, 100, 20.0, 9)).unwrap();
        assert_eq!(write_coco(&a.dataset).unwrap(), write_coco(&b.dataset).unwrap());
        let c = generate_scenario(&cfg(4, 100, 20.0, 10)).unwrap();
        assert_ne!(a.centers, c.centers);
    }

    #[test]
    fn steps_bounded_and_inside() {
        let c = cfg(4, 300, 0.0, 3);
        let s = generate_scenario(&c).unwrap();
        for track in &s.centers {
            for w in track.windows(2) {
                assert!(w[0].distance(&w[1]) <= c.speed_max + 1e-9);
            }
            for p in track {
                assert!(p.x >= 8.0 && p.x <= 192.0 && p.y >= 8.0 && p.y <= 142.0);
            }
        }
    }

    #[test]
    fn separated_masks_never_overlap() {
        let s = generate_scenario(&cfg(5, 200, 17.0, 4)).unwrap();
        for f in 0..200u64 {
            for i in 0..5 {
                for j in i + 1..5 {
                    let a = s.gt_tracks[i].state_at(f).unwrap().segmentation.as_ref().unwrap();
                    let b = s.gt_tracks[j].state_at(f).unwrap().segmentation.as_ref().unwrap();
                    assert_eq!(segmentation_iou(a, b).unwrap(), 0.0, "frame {f}: {i} vs {j}");
                }
            }
        }
    }

    #[test]
    fn infeasible_packing() {
        let mut c = cfg(50, 5, 60.0, 0);
        c.arena = (100, 100);
        assert!(matches!(generate_scenario(&c), Err(Error::Config(_))));
        c.body_radius = 60.0;
        assert!(matches!(generate_scenario(&c), Err(Error::Config(_))));
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let s = generate_scenario(&cfg(3, 20, 0.0, 2)).unwrap();
        let (preds, log) = perturb(&s, &PerturbationConfig::default()).unwrap();
        assert_eq!(log, InjectionLog::default());
        assert_eq!(preds.len(), 60);
        for d in &preds {
            let t = s.gt_tracks.iter().find(|t| t.label == d.label).unwrap();
            assert_eq!(
                t.state_at(d.frame).unwrap().segmentation.as_ref(),
                Some(&d.segmentation)
            );
        }
    }

    #[test]
    fn one_swap_two_switches() {
        let s = generate_scenario(&cfg(2, 40, 30.0, 5)).unwrap();
        let p = PerturbationConfig {
            n_ids: 1,
            seed: 11,
            ..Default::default()
        };
        let (preds, log) = perturb(&s, &p).unwrap();
        assert_eq!(log.ids_events.len(), 1);
        let rep = evaluate_mot(&s.gt_tracks, &assemble_tracks(&preds).unwrap(), &MotConfig::default()).unwrap();
        assert_eq!(rep.id_switches, 2);
        let at = log.ids_events[0].frame;
        let fr = rep.per_frame_log.iter().find(|f| f.frame == at).unwrap();
        assert_eq!(fr.switches.len(), 2);
    }

    #[test]
    fn log_matches_evaluation() {
        let sc = cfg(4, 300, 8.0 * 2.0 + 6.0 * 1.0 + 1.0, 6);
        let s = generate_scenario(&sc).unwrap();
        let p = PerturbationConfig {
            p_fn: 0.1,
            p_fp: 0.3,
            n_ids: 5,
            centroid_noise: 1.0,
            seed: 8,
        };
        let (preds, log) = perturb(&s, &p).unwrap();
        assert!(!log.fn_events.is_empty() && !log.fp_events.is_empty());
        let dropped = 4 * 300 - preds.iter().filter(|d| d.label.starts_with("animal_")).count();
        assert_eq!(dropped, log.fn_events.len());
        let rep = evaluate_mot(&s.gt_tracks, &assemble_tracks(&preds).unwrap(), &MotConfig::default()).unwrap();
        assert_eq!(rep.false_negatives, log.fn_events.len() as u64);
        assert_eq!(rep.false_positives, log.fp_events.len() as u64);
        assert_eq!(rep.id_switches, 2 * log.ids_events.len() as u64);
    }

    #[test]
    fn swap_budget() {
        let s = generate_scenario(&cfg(2, 5, 0.0, 0)).unwrap();
        let too_many = PerturbationConfig {
            n_ids: 5,
            ..Default::default()
        };
        assert!(matches!(perturb(&s, &too_many), Err(Error::Config(_))));
        let s1 = generate_scenario(&cfg(1, 5, 0.0, 0)).unwrap();
        let one = PerturbationConfig {
            n_ids: 1,
            ..Default::default()
        };
        assert!(matches!(perturb(&s1, &one), Err(Error::Config(_))));
        assert!(perturb(
            &s,
            &PerturbationConfig {
                p_fn: 1.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
