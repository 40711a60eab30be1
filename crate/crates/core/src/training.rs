//! Two-stage detector training: fit on positives and random negative
//! windows, mine false positives from object-free images with that
//! preliminary detector, then retrain with the mined windows added.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{mine_hard_negatives, scale_pyramid, BBox, Detector, Pipeline, ScanConfig};
use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::image::GrayImage;
use crate::svm::{train_svm, KernelKind, SvmModel, TrainOptions, TrainReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub kernel: KernelKind,
    pub c: f64,
    pub tol: f64,
    /// Random negative windows drawn from each object-free image.
    pub negatives_per_image: usize,
    /// Add horizontally mirrored copies of the positives.
    pub mirror_positives: bool,
    pub hard_mining: bool,
    /// Upper bound on mined windows added to the negative set.
    pub mining_cap: usize,
    /// Scan used while mining; its threshold decides what counts as a
    /// false positive.
    pub mining_scan: ScanConfig,
    /// Resolution of the per-dimension tables of intersection-kernel models.
    pub fast_samples: usize,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn new(kernel: KernelKind) -> Self {
        TrainingConfig {
            kernel,
            c: 0.1,
            tol: 1e-3,
            negatives_per_image: 10,
            mirror_positives: true,
            hard_mining: true,
            mining_cap: 1000,
            mining_scan: ScanConfig::default(),
            fast_samples: 64,
            seed: 1,
        }
    }
}

/// Sizes and solver outcome of one training stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub positives: usize,
    pub negatives: usize,
    pub solver: TrainReport,
}

#[derive(Clone, Debug)]
pub struct TrainedDetector {
    pub pipeline: Pipeline,
    pub stages: Vec<StageReport>,
    /// Windows added by mining (0 when mining is off).
    pub mined: usize,
}

/// Crops each box and resamples it to the window size.
pub fn positive_windows(
    images: &[(GrayImage, Vec<BBox>)],
    window: (usize, usize),
) -> Result<Vec<GrayImage>> {
    let mut out = Vec::new();
    for (img, boxes) in images {
        for b in boxes {
            let x = b.x.round().max(0.0) as usize;
            let y = b.y.round().max(0.0) as usize;
            let w = (b.w.round() as usize).min(img.width().saturating_sub(x));
            let h = (b.h.round() as usize).min(img.height().saturating_sub(y));
            let crop = img.crop(x, y, w, h)?;
            out.push(if (w, h) == window {
                crop
            } else {
                crop.resize_bilinear(window.0, window.1)?
            });
        }
    }
    Ok(out)
}

/// Like [`positive_windows`], plus `copies` extra crops per box whose
/// position is perturbed by up to `shift` of the box width and whose size by
/// up to `scale` (relative), clipped to the image.
pub fn jittered_positive_windows(
    images: &[(GrayImage, Vec<BBox>)],
    window: (usize, usize),
    copies: usize,
    shift: f64,
    scale: f64,
    seed: u64,
) -> Result<Vec<GrayImage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = positive_windows(images, window)?;
    for (img, boxes) in images {
        for b in boxes {
            for _ in 0..copies {
                let f = 1.0 + rng.gen_range(-scale..=scale);
                let (w, h) = (b.w * f, b.h * f);
                let cx = b.x + b.w / 2.0 + rng.gen_range(-shift..=shift) * b.w;
                let cy = b.y + b.h / 2.0 + rng.gen_range(-shift..=shift) * b.w;
                let x = (cx - w / 2.0).clamp(0.0, (img.width() as f64 - w).max(0.0));
                let y = (cy - h / 2.0).clamp(0.0, (img.height() as f64 - h).max(0.0));
                let jb = BBox::new(x, y, w.min(img.width() as f64), h.min(img.height() as f64));
                out.extend(positive_windows(&[(img.clone(), vec![jb])], window)?);
            }
        }
    }
    Ok(out)
}

/// Draws windows uniformly over positions and pyramid levels of each image.
pub fn random_negative_windows(
    images: &[GrayImage],
    per_image: usize,
    window: (usize, usize),
    scan: &ScanConfig,
    seed: u64,
) -> Result<Vec<GrayImage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for img in images {
        let levels = scale_pyramid(img, scan, window)?;
        if levels.is_empty() {
            continue;
        }
        for _ in 0..per_image {
            let l = &levels[rng.gen_range(0..levels.len())];
            let x = rng.gen_range(0..=l.image.width() - window.0);
            let y = rng.gen_range(0..=l.image.height() - window.1);
            out.push(l.image.crop(x, y, window.0, window.1)?);
        }
    }
    Ok(out)
}

/// Descriptors of many windows, in input order.
pub fn describe_all(feature: &FeatureKind, windows: &[GrayImage]) -> Result<Vec<Vec<f64>>> {
    let ex = feature.extractor()?;
    windows
        .par_iter()
        .map(|w| {
            let maps = ex.prepare(w)?;
            let mut v = vec![0.0; ex.len()];
            ex.describe_at(&maps, 0, 0, &mut v);
            Ok(v)
        })
        .collect()
}

fn fit(
    feature: &FeatureKind,
    pos: &[Vec<f64>],
    neg: &[Vec<f64>],
    cfg: &TrainingConfig,
) -> Result<(Pipeline, StageReport)> {
    let examples: Vec<Vec<f64>> = pos.iter().chain(neg).cloned().collect();
    let labels: Vec<f64> = (0..examples.len())
        .map(|i| if i < pos.len() { 1.0 } else { -1.0 })
        .collect();
    let opts = TrainOptions {
        tol: cfg.tol,
        ..TrainOptions::new(cfg.kernel, cfg.c)
    };
    let trained = train_svm(&examples, &labels, &opts)?;
    let model = match cfg.kernel {
        KernelKind::Linear => trained.model,
        KernelKind::Hik => fast_model(&trained.model, cfg.fast_samples)?,
    };
    Ok((
        Pipeline::new(feature.clone(), model)?,
        StageReport {
            positives: pos.len(),
            negatives: neg.len(),
            solver: trained.report,
        },
    ))
}

fn fast_model(m: &SvmModel, samples: usize) -> Result<SvmModel> {
    if m.support_vector_count() == 0 {
        return Ok(m.clone());
    }
    m.build_fast_hik(samples.max(2))
}

/// Trains a detector from positive windows, random negative windows and
/// (for mining) the object-free images they came from.
pub fn train_detector(
    feature: &FeatureKind,
    positives: &[GrayImage],
    negatives: &[GrayImage],
    negative_images: &[GrayImage],
    cfg: &TrainingConfig,
) -> Result<TrainedDetector> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid(
            "training needs positive and negative windows",
        ));
    }
    let mut pos_windows = positives.to_vec();
    if cfg.mirror_positives {
        pos_windows.extend(positives.iter().map(GrayImage::flip_horizontal));
    }
    let pos = describe_all(feature, &pos_windows)?;
    let mut neg = describe_all(feature, negatives)?;
    let (mut pipeline, first) = fit(feature, &pos, &neg, cfg)?;
    let mut stages = vec![first];
    let mut mined = 0;
    if cfg.hard_mining && !negative_images.is_empty() {
        let hits = mine_hard_negatives(
            &Detector::single(pipeline.clone()),
            negative_images,
            &cfg.mining_scan,
            cfg.mining_cap,
        )?;
        mined = hits.len();
        if mined > 0 {
            let windows: Vec<GrayImage> = hits.into_iter().map(|h| h.window).collect();
            neg.extend(describe_all(feature, &windows)?);
            let (p, second) = fit(feature, &pos, &neg, cfg)?;
            pipeline = p;
            stages.push(second);
        }
    }
    Ok(TrainedDetector {
        pipeline,
        stages,
        mined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_crops_are_resampled_to_window() {
        let img = GrayImage::from_fn(200, 300, |x, y| ((x + y) % 13) as f64 / 12.0).unwrap();
        let w = positive_windows(
            &[(img, vec![BBox::new(10.0, 20.0, 96.0, 192.0)])],
            (64, 128),
        )
        .unwrap();
        assert_eq!((w[0].width(), w[0].height()), (64, 128));
    }

    #[test]
    fn random_negatives_are_seeded() {
        let img = GrayImage::from_fn(150, 200, |x, y| ((x * y) % 17) as f64 / 16.0).unwrap();
        let scan = ScanConfig::default();
        let a =
            random_negative_windows(std::slice::from_ref(&img), 5, (64, 128), &scan, 3).unwrap();
        let b = random_negative_windows(&[img], 5, (64, 128), &scan, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }
}
