//! Seeded synthetic corpus: pedestrian-like figures planted on cluttered
//! backgrounds.
//!
//! Each figure is drawn inside a box with the detection window's 1:2 aspect
//! ratio, at a random size between `min_scale` and `max_scale` times
//! 64x128. The figure occupies the central part of its box (head, torso,
//! arms, two legs), leaving a margin like a cropped training window.
//! Backgrounds mix a smooth gradient, rectangles, bars, line segments and
//! ellipses of random graylevels, plus pixel noise.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::detect::BBox;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::{WINDOW_HEIGHT, WINDOW_WIDTH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub images: usize,
    pub width: usize,
    pub height: usize,
    /// Share of images without any figure.
    pub negative_fraction: f64,
    pub max_targets: usize,
    pub min_scale: f64,
    pub max_scale: f64,
    /// Number of clutter primitives per image.
    pub clutter: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            images: 50,
            width: 320,
            height: 256,
            negative_fraction: 0.4,
            max_targets: 3,
            min_scale: 1.0,
            max_scale: 1.35,
            clutter: 28,
            noise_sigma: 0.02,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthImage {
    pub name: String,
    pub image: GrayImage,
    /// Boxes of the planted figures; empty for negatives.
    pub boxes: Vec<BBox>,
}

/// Soft membership of a point in a shape: 1 inside, 0 outside, linear
/// across a one-unit band at the boundary.
fn soft(dist_inside: f64) -> f64 {
    (dist_inside + 0.5).clamp(0.0, 1.0)
}

fn rect_membership(x: f64, y: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    soft((x - x0).min(x1 - x).min(y - y0).min(y1 - y))
}

fn ellipse_membership(x: f64, y: f64, cx: f64, cy: f64, rx: f64, ry: f64) -> f64 {
    let d = ((x - cx) / rx).hypot((y - cy) / ry);
    soft((1.0 - d) * rx.min(ry))
}

fn segment_membership(x: f64, y: f64, a: (f64, f64), b: (f64, f64), half_width: f64) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x - a.0) * dx + (y - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = (x - a.0 - t * dx).hypot(y - a.1 - t * dy);
    soft(half_width - d)
}

/// Figure parameters in window coordinates (64x128).
#[derive(Clone, Debug)]
struct Figure {
    head: (f64, f64, f64, f64),
    torso: (f64, f64, f64, f64),
    arms: [((f64, f64), (f64, f64)); 2],
    legs: [((f64, f64), (f64, f64)); 2],
    limb: f64,
    head_level: f64,
    upper_level: f64,
    lower_level: f64,
    stripes: f64,
}

impl Figure {
    /// `dark` selects the figure polarity.
    fn random(rng: &mut ChaCha8Rng, dark: bool) -> Self {
        let cx = 32.0 + rng.gen_range(-2.0..2.0);
        let shoulders = 16.0 + rng.gen_range(-1.5..3.0);
        let hip = 66.0 + rng.gen_range(-3.0..3.0);
        let half = rng.gen_range(8.5..11.5);
        let stride = rng.gen_range(0.0..9.0);
        let foot = 112.0 + rng.gen_range(-2.0..3.0);
        let arm_swing = rng.gen_range(-4.0..4.0);
        let level = |rng: &mut ChaCha8Rng| {
            if dark {
                rng.gen_range(0.04..0.25)
            } else {
                rng.gen_range(0.75..0.96)
            }
        };
        Figure {
            head: (
                cx,
                shoulders - 6.0,
                rng.gen_range(5.5..7.0),
                rng.gen_range(7.0..8.5),
            ),
            torso: (cx - half, shoulders, cx + half, hip),
            arms: [
                (
                    (cx - half - 2.0, shoulders + 3.0),
                    (cx - half - 3.0 + arm_swing, hip + 2.0),
                ),
                (
                    (cx + half + 2.0, shoulders + 3.0),
                    (cx + half + 3.0 - arm_swing, hip + 2.0),
                ),
            ],
            legs: [
                (
                    (cx - half * 0.45, hip - 2.0),
                    (cx - half * 0.45 - stride, foot),
                ),
                (
                    (cx + half * 0.45, hip - 2.0),
                    (cx + half * 0.45 + stride, foot),
                ),
            ],
            limb: rng.gen_range(3.0..4.2),
            head_level: level(rng),
            upper_level: level(rng),
            lower_level: level(rng),
            stripes: rng.gen_range(0.0..0.08),
        }
    }

    /// Coverage and graylevel at window point `(u, v)`.
    fn sample(&self, u: f64, v: f64) -> (f64, f64) {
        let (hx, hy, hrx, hry) = self.head;
        let (tx0, ty0, tx1, ty1) = self.torso;
        let head = ellipse_membership(u, v, hx, hy, hrx, hry);
        let torso = rect_membership(u, v, tx0, ty0, tx1, ty1);
        let arms = self
            .arms
            .iter()
            .map(|&(a, b)| segment_membership(u, v, a, b, self.limb * 0.75))
            .fold(0.0, f64::max);
        let legs = self
            .legs
            .iter()
            .map(|&(a, b)| segment_membership(u, v, a, b, self.limb))
            .fold(0.0, f64::max);
        let stripe = if ((v / 4.0).floor() as i64) % 2 == 0 {
            self.stripes
        } else {
            -self.stripes
        };
        let upper = (self.upper_level + stripe).clamp(0.0, 1.0);
        let parts = [
            (head, self.head_level),
            (torso.max(arms), upper),
            (legs, self.lower_level),
        ];
        let cover = parts.iter().fold(0.0f64, |m, p| m.max(p.0));
        if cover <= 0.0 {
            return (0.0, 0.0);
        }
        let (wsum, vsum) = parts
            .iter()
            .fold((0.0, 0.0), |(w, s), &(c, l)| (w + c, s + c * l));
        (cover, vsum / wsum)
    }
}

fn draw_clutter(buf: &mut [f64], width: usize, height: usize, count: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..count {
        let level: f64 = rng.gen_range(0.0..1.0);
        let alpha: f64 = rng.gen_range(0.5..1.0);
        let kind = rng.gen_range(0..4);
        let (w, h) = (width as f64, height as f64);
        let shape: Box<dyn Fn(f64, f64) -> f64> = match kind {
            0 => {
                let (x0, y0) = (rng.gen_range(-20.0..w), rng.gen_range(-20.0..h));
                let (rw, rh) = (rng.gen_range(6.0..80.0), rng.gen_range(6.0..80.0));
                Box::new(move |x, y| rect_membership(x, y, x0, y0, x0 + rw, y0 + rh))
            }
            1 => {
                // tall bars, vertical or horizontal
                let (x0, y0) = (rng.gen_range(-10.0..w), rng.gen_range(-40.0..h));
                let (bw, bh) = (rng.gen_range(3.0..12.0), rng.gen_range(30.0..140.0));
                if rng.gen_bool(0.5) {
                    Box::new(move |x, y| rect_membership(x, y, x0, y0, x0 + bw, y0 + bh))
                } else {
                    Box::new(move |x, y| {
                        rect_membership(x, y, x0 - bh / 2.0, y0, x0 + bh / 2.0, y0 + bw)
                    })
                }
            }
            2 => {
                let a = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
                let b = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
                let hw = rng.gen_range(1.0..4.0);
                Box::new(move |x, y| segment_membership(x, y, a, b, hw))
            }
            _ => {
                let (cx, cy) = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
                let (rx, ry) = (rng.gen_range(4.0..40.0), rng.gen_range(4.0..40.0));
                Box::new(move |x, y| ellipse_membership(x, y, cx, cy, rx, ry))
            }
        };
        for y in 0..height {
            for x in 0..width {
                let m = shape(x as f64 + 0.5, y as f64 + 0.5) * alpha;
                if m > 0.0 {
                    let p = &mut buf[y * width + x];
                    *p = *p * (1.0 - m) + level * m;
                }
            }
        }
    }
}

fn place_targets(cfg: &SynthConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<BBox> {
    let mut boxes: Vec<BBox> = Vec::new();
    for _ in 0..n {
        for _attempt in 0..50 {
            let s = rng.gen_range(cfg.min_scale..=cfg.max_scale);
            let w = (WINDOW_WIDTH as f64 * s).round();
            let h = w * (WINDOW_HEIGHT / WINDOW_WIDTH) as f64;
            if w > cfg.width as f64 || h > cfg.height as f64 {
                break;
            }
            let x = rng.gen_range(0..=(cfg.width - w as usize)) as f64;
            let y = rng.gen_range(0..=(cfg.height - h as usize)) as f64;
            let b = BBox::new(x, y, w, h);
            // boxes must not overlap
            if boxes.iter().all(|o| o.intersection(&b) == 0.0) {
                boxes.push(b);
                break;
            }
        }
    }
    boxes
}

/// Renders one image with figures in `boxes`.
fn render(cfg: &SynthConfig, boxes: &[BBox], rng: &mut ChaCha8Rng) -> Result<GrayImage> {
    let (w, h) = (cfg.width, cfg.height);
    let base = rng.gen_range(0.3..0.7);
    let (gx, gy) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let mut buf: Vec<f64> = (0..w * h)
        .map(|i| {
            base + gx * ((i % w) as f64 / w as f64 - 0.5) + gy * ((i / w) as f64 / h as f64 - 0.5)
        })
        .collect();
    draw_clutter(&mut buf, w, h, cfg.clutter, rng);
    for b in boxes {
        // figures contrast with the mean graylevel around them
        let mut mean = 0.0;
        let mut n = 0.0;
        for y in b.y as usize..(b.y + b.h) as usize {
            for x in b.x as usize..(b.x + b.w) as usize {
                mean += buf[y * w + x];
                n += 1.0;
            }
        }
        let fig = Figure::random(rng, mean / n > 0.5);
        let s = b.w / WINDOW_WIDTH as f64;
        for y in b.y as usize..(b.y + b.h) as usize {
            for x in b.x as usize..(b.x + b.w) as usize {
                // 2x2 supersampling in window coordinates
                let mut cover = 0.0;
                let mut value = 0.0;
                for (ox, oy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    let u = (x as f64 + ox - b.x) / s;
                    let v = (y as f64 + oy - b.y) / s;
                    let (c, l) = fig.sample(u, v);
                    cover += c / 4.0;
                    value += c * l / 4.0;
                }
                if cover > 0.0 {
                    let p = &mut buf[y * w + x];
                    *p = *p * (1.0 - cover) + value;
                }
            }
        }
    }
    if cfg.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::config(e.to_string()))?;
        for p in &mut buf {
            *p += noise.sample(rng);
        }
    }
    for p in &mut buf {
        *p = p.clamp(0.0, 1.0);
    }
    GrayImage::new(w, h, buf)
}

/// Generates the corpus. Image `i` is negative when `i` falls in the
/// negative share (interleaved so any contiguous split mixes both kinds).
pub fn generate_corpus(cfg: &SynthConfig) -> Result<Vec<SynthImage>> {
    if cfg.width < WINDOW_WIDTH || cfg.height < WINDOW_HEIGHT {
        return Err(Error::config("synthetic images must fit one window"));
    }
    if !(cfg.min_scale >= 1.0 && cfg.max_scale >= cfg.min_scale) {
        return Err(Error::config("need 1 <= min_scale <= max_scale"));
    }
    if !(0.0..=1.0).contains(&cfg.negative_fraction) {
        return Err(Error::config("negative_fraction must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.images);
    let mut neg_acc = 0.0;
    for i in 0..cfg.images {
        neg_acc += cfg.negative_fraction;
        let negative = neg_acc >= 1.0 - 1e-9;
        if negative {
            neg_acc -= 1.0;
        }
        let boxes = if negative {
            Vec::new()
        } else {
            let n = rng.gen_range(1..=cfg.max_targets.max(1));
            place_targets(cfg, n, &mut rng)
        };
        let image = render(cfg, &boxes, &mut rng)?;
        out.push(SynthImage {
            name: format!("{}{:03}", if boxes.is_empty() { "neg" } else { "pos" }, i),
            image,
            boxes,
        });
    }
    Ok(out)
}

/// Writes the corpus in the dataset layout read by
/// [`crate::eval::load_dataset`].
pub fn write_corpus(corpus: &[SynthImage], root: &Path) -> Result<()> {
    for sub in ["pos", "neg", "annotations"] {
        let d = root.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    for item in corpus {
        if item.boxes.is_empty() {
            item.image
                .save(root.join("neg").join(format!("{}.png", item.name)))?;
        } else {
            item.image
                .save(root.join("pos").join(format!("{}.png", item.name)))?;
            let ann = root.join("annotations").join(format!("{}.txt", item.name));
            let text: String = item
                .boxes
                .iter()
                .map(|b| format!("{} {} {} {}\n", b.x, b.y, b.w, b.h))
                .collect();
            std::fs::write(&ann, text).map_err(|e| Error::io(&ann, e))?;
        }
    }
    Ok(())
}

/// Standalone 64x128 figure windows, for window-level experiments.
pub fn figure_windows(count: usize, seed: u64) -> Result<Vec<GrayImage>> {
    let cfg = SynthConfig {
        width: WINDOW_WIDTH,
        height: WINDOW_HEIGHT,
        min_scale: 1.0,
        max_scale: 1.0,
        clutter: 6,
        ..SynthConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = [BBox::new(
        0.0,
        0.0,
        WINDOW_WIDTH as f64,
        WINDOW_HEIGHT as f64,
    )];
    (0..count).map(|_| render(&cfg, &b, &mut rng)).collect()
}

/// Figure-free 64x128 clutter windows.
pub fn clutter_windows(count: usize, seed: u64) -> Result<Vec<GrayImage>> {
    let cfg = SynthConfig {
        width: WINDOW_WIDTH,
        height: WINDOW_HEIGHT,
        clutter: 6,
        ..SynthConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count).map(|_| render(&cfg, &[], &mut rng)).collect()
}
