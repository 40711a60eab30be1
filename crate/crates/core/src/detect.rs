//! Multiscale sliding-window detection, non-maximum suppression and
//! hard-negative mining.
//!
//! Multiscale search downsamples the image: level `k` has scale
//! `s_k = factor^k` and dimensions `floor(W / s_k) x floor(H / s_k)`. A window
//! at `(x, y)` on level `k` maps back to the box
//! `(floor(x s_k), floor(y s_k), w, 2w)` with `w = round(64 s_k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Extractor, FeatureKind, PreparedImage};
use crate::image::GrayImage;
use crate::svm::{averaged_score, SvmModel};

/// Axis-aligned box in pixels, `(x, y)` the top-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersection(&self, o: &BBox) -> f64 {
        let iw = (self.x + self.w).min(o.x + o.w) - self.x.max(o.x);
        let ih = (self.y + self.h).min(o.y + o.h) - self.y.max(o.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    /// Intersection over union; 0 when both boxes are degenerate.
    pub fn iou(&self, o: &BBox) -> f64 {
        let inter = self.intersection(o);
        let union = self.area() + o.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            (inter / union).clamp(0.0, 1.0)
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x + dx, self.y + dy, self.w, self.h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
    pub scale_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Window step in pixels on every pyramid level.
    pub step: usize,
    pub scale_factor: f64,
    /// Smallest downscale factor searched (1 = original resolution).
    pub min_scale: f64,
    /// Largest downscale factor searched; `None` runs until the image is
    /// smaller than the window.
    pub max_scale: Option<f64>,
    /// Windows must score strictly above this to be reported.
    pub score_threshold: f64,
    pub nms_overlap: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            step: 8,
            scale_factor: 1.09,
            min_scale: 1.0,
            max_scale: None,
            score_threshold: 0.0,
            nms_overlap: 0.5,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step == 0 {
            return Err(Error::config("step must be at least 1"));
        }
        if !(self.scale_factor > 1.0) || !self.scale_factor.is_finite() {
            return Err(Error::config(format!(
                "scale factor must be > 1, got {}",
                self.scale_factor
            )));
        }
        if !(self.min_scale > 0.0) {
            return Err(Error::config("min_scale must be positive"));
        }
        if let Some(m) = self.max_scale {
            if !(m >= self.min_scale) {
                return Err(Error::config("max_scale must be >= min_scale"));
            }
        }
        if !(self.nms_overlap > 0.0 && self.nms_overlap < 1.0) {
            return Err(Error::config("NMS overlap must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One level of the scale pyramid.
#[derive(Clone, Debug)]
pub struct PyramidLevel {
    pub index: usize,
    /// Downscale factor relative to the original image.
    pub scale: f64,
    pub image: GrayImage,
}

/// Downscaled copies of `img` for every scale in `[min_scale, max_scale]`
/// at which a `window` still fits. Empty if the image is smaller than the
/// window.
pub fn scale_pyramid(
    img: &GrayImage,
    cfg: &ScanConfig,
    window: (usize, usize),
) -> Result<Vec<PyramidLevel>> {
    cfg.validate()?;
    let (ww, wh) = window;
    let mut levels = Vec::new();
    let mut scale = 1.0f64;
    let mut k = 0usize;
    loop {
        let w = (img.width() as f64 / scale).floor() as usize;
        let h = (img.height() as f64 / scale).floor() as usize;
        if w < ww || h < wh || cfg.max_scale.is_some_and(|m| scale > m * (1.0 + 1e-12)) {
            break;
        }
        if scale >= cfg.min_scale * (1.0 - 1e-12) {
            let image = if k == 0 {
                img.clone()
            } else {
                img.resample(w, h, scale, scale)?
            };
            levels.push(PyramidLevel {
                index: k,
                scale,
                image,
            });
        }
        scale *= cfg.scale_factor;
        k += 1;
    }
    Ok(levels)
}

/// Maps a window on a level with downscale `scale` back to original pixels.
pub fn window_box(x: usize, y: usize, scale: f64, window: (usize, usize)) -> BBox {
    let w = (window.0 as f64 * scale).round();
    let h = w * window.1 as f64 / window.0 as f64;
    BBox::new((x as f64 * scale).floor(), (y as f64 * scale).floor(), w, h)
}

/// A feature configuration paired with a model trained on it.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub feature: FeatureKind,
    pub model: SvmModel,
    extractor: Extractor,
}

impl Pipeline {
    pub fn new(feature: FeatureKind, model: SvmModel) -> Result<Self> {
        let extractor = feature.extractor()?;
        if model.feature_length != extractor.len() {
            return Err(Error::config(format!(
                "model expects {} features but {} produces {}",
                model.feature_length,
                feature.name(),
                extractor.len()
            )));
        }
        Ok(Pipeline {
            feature,
            model,
            extractor,
        })
    }

    pub fn extractor(&self) -> &Extractor {
        &self.extractor
    }

    pub fn score_window(&self, window: &GrayImage) -> Result<f64> {
        self.model.score(&self.feature.describe(window)?)
    }
}

/// One pipeline, or several whose scores are averaged per window.
#[derive(Clone, Debug)]
pub struct Detector {
    pipelines: Vec<Pipeline>,
}

impl Detector {
    pub fn single(p: Pipeline) -> Self {
        Detector { pipelines: vec![p] }
    }

    /// Averages the two pipelines' scores on every window.
    pub fn combined(a: Pipeline, b: Pipeline) -> Result<Self> {
        if a.extractor.window_size() != b.extractor.window_size() {
            return Err(Error::config(
                "combined pipelines need the same window size",
            ));
        }
        Ok(Detector {
            pipelines: vec![a, b],
        })
    }

    pub fn pipelines(&self) -> &[Pipeline] {
        &self.pipelines
    }

    pub fn window_size(&self) -> (usize, usize) {
        self.pipelines[0].extractor.window_size()
    }

    fn prepare(&self, img: &GrayImage) -> Result<Vec<PreparedImage>> {
        self.pipelines
            .iter()
            .map(|p| p.extractor.prepare(img))
            .collect()
    }

    fn score_at(&self, maps: &[PreparedImage], x: usize, y: usize, buf: &mut [Vec<f64>]) -> f64 {
        let scores: Vec<f64> = self
            .pipelines
            .iter()
            .zip(maps)
            .zip(buf.iter_mut())
            .map(|((p, m), b)| {
                p.extractor.describe_at(m, x, y, b);
                p.model.score_unchecked(b)
            })
            .collect();
        match scores.as_slice() {
            [s] => *s,
            [a, b] => averaged_score(*a, *b),
            all => all.iter().sum::<f64>() / all.len() as f64,
        }
    }

    /// Scores a single window of the detector's size.
    pub fn score_window(&self, window: &GrayImage) -> Result<f64> {
        let maps = self.prepare(window)?;
        let mut buf: Vec<Vec<f64>> = self
            .pipelines
            .iter()
            .map(|p| vec![0.0; p.extractor.len()])
            .collect();
        Ok(self.score_at(&maps, 0, 0, &mut buf))
    }

    fn scan_level(&self, level: &PyramidLevel, cfg: &ScanConfig) -> Result<Vec<ScoredWindow>> {
        let (ww, wh) = self.window_size();
        let maps = self.prepare(&level.image)?;
        let xs: Vec<usize> = (0..=level.image.width() - ww).step_by(cfg.step).collect();
        let ys: Vec<usize> = (0..=level.image.height() - wh).step_by(cfg.step).collect();
        let rows: Vec<Vec<ScoredWindow>> = ys
            .par_iter()
            .map(|&y| {
                let mut buf: Vec<Vec<f64>> = self
                    .pipelines
                    .iter()
                    .map(|p| vec![0.0; p.extractor.len()])
                    .collect();
                xs.iter()
                    .map(|&x| ScoredWindow {
                        level: level.index,
                        scale: level.scale,
                        x,
                        y,
                        score: self.score_at(&maps, x, y, &mut buf),
                    })
                    .collect()
            })
            .collect();
        Ok(rows.concat())
    }

    /// Scores every window on every pyramid level, in (scale, y, x) order.
    pub fn scan_all(&self, img: &GrayImage, cfg: &ScanConfig) -> Result<Vec<ScoredWindow>> {
        let levels = scale_pyramid(img, cfg, self.window_size())?;
        let per_level: Vec<Vec<ScoredWindow>> = levels
            .par_iter()
            .map(|l| self.scan_level(l, cfg))
            .collect::<Result<_>>()?;
        Ok(per_level.concat())
    }

    /// Windows scoring above the threshold, mapped to original coordinates,
    /// before NMS.
    pub fn detect_raw(&self, img: &GrayImage, cfg: &ScanConfig) -> Result<Vec<Detection>> {
        let window = self.window_size();
        Ok(self
            .scan_all(img, cfg)?
            .into_iter()
            .filter(|w| w.score > cfg.score_threshold)
            .map(|w| Detection {
                bbox: window_box(w.x, w.y, w.scale, window),
                score: w.score,
                scale_index: w.level,
            })
            .collect())
    }

    /// Full detection: scan, threshold, NMS; sorted by descending score.
    pub fn detect(&self, img: &GrayImage, cfg: &ScanConfig) -> Result<Vec<Detection>> {
        Ok(nms(&self.detect_raw(img, cfg)?, cfg.nms_overlap))
    }
}

/// A scored window on one pyramid level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredWindow {
    pub level: usize,
    pub scale: f64,
    pub x: usize,
    pub y: usize,
    pub score: f64,
}

/// Convenience wrapper for a single pipeline.
pub fn detect(
    img: &GrayImage,
    model: &SvmModel,
    feature: &FeatureKind,
    cfg: &ScanConfig,
) -> Result<Vec<Detection>> {
    Detector::single(Pipeline::new(feature.clone(), model.clone())?).detect(img, cfg)
}

/// Greedy non-maximum suppression: repeatedly keeps the best remaining
/// detection and drops everything overlapping it by more than `overlap`
/// (IoU). Equal scores keep input order.
pub fn nms(dets: &[Detection], overlap: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    let mut kept: Vec<Detection> = Vec::new();
    for i in order {
        let d = dets[i];
        if kept.iter().all(|k| k.bbox.iou(&d.bbox) <= overlap) {
            kept.push(d);
        }
    }
    kept
}

/// A window mined from a negative image.
#[derive(Clone, Debug)]
pub struct MinedWindow {
    pub image_index: usize,
    pub level: usize,
    pub x: usize,
    pub y: usize,
    pub score: f64,
    /// The window crop at its pyramid level, ready for training.
    pub window: GrayImage,
}

/// Scans object-free images and returns every window scoring above the
/// threshold, highest scores first, at most `cap` of them.
pub fn mine_hard_negatives(
    detector: &Detector,
    negatives: &[GrayImage],
    cfg: &ScanConfig,
    cap: usize,
) -> Result<Vec<MinedWindow>> {
    if cap == 0 {
        return Ok(Vec::new());
    }
    let (ww, wh) = detector.window_size();
    let mut hits: Vec<(usize, ScoredWindow)> = Vec::new();
    for (i, img) in negatives.iter().enumerate() {
        hits.extend(
            detector
                .scan_all(img, cfg)?
                .into_iter()
                .filter(|w| w.score > cfg.score_threshold)
                .map(|w| (i, w)),
        );
    }
    hits.sort_by(|a, b| b.1.score.total_cmp(&a.1.score));
    hits.truncate(cap);
    hits.into_iter()
        .map(|(i, w)| {
            let img = &negatives[i];
            let level = if w.level == 0 {
                img.crop(w.x, w.y, ww, wh)?
            } else {
                let lw = (img.width() as f64 / w.scale).floor() as usize;
                let lh = (img.height() as f64 / w.scale).floor() as usize;
                img.resample(lw, lh, w.scale, w.scale)?
                    .crop(w.x, w.y, ww, wh)?
            };
            Ok(MinedWindow {
                image_index: i,
                level: w.level,
                x: w.x,
                y: w.y,
                score: w.score,
                window: level,
            })
        })
        .collect()
}
