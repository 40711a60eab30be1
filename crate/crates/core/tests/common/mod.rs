//! Brute-force reference implementations written straight from the
//! definitions, for checking the optimized library code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use cslbp::dense::{DenseConfig, NormScheme};
use cslbp::pyramid::PyramidConfig;
use cslbp::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen::<f64>()).unwrap()
}

/// Smooth random texture: a few random sinusoids plus mild noise, so that
/// pattern codes are neither all-zero nor pure noise.
pub fn textured_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.02..0.4),
                rng.gen_range(0.02..0.4),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.05..0.2),
            )
        })
        .collect();
    let noise: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-0.03..0.03)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let v: f64 = waves
            .iter()
            .map(|&(fx, fy, ph, a)| a * (fx * x as f64 + fy * y as f64 + ph).sin())
            .sum();
        (0.5 + v + noise[y * w + x]).clamp(0.0, 1.0)
    })
    .unwrap()
}

fn px(img: &GrayImage, x: i64, y: i64) -> f64 {
    let x = x.clamp(0, img.width() as i64 - 1) as usize;
    let y = y.clamp(0, img.height() as i64 - 1) as usize;
    img.get(x, y)
}

/// Four-weight bilinear interpolation. Pixels with zero weight contribute
/// nothing even when they lie past the border.
pub fn bilinear(img: &GrayImage, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (ix, iy) = (x0 as i64, y0 as i64);
    let mut s = 0.0;
    for (dx, dy, wt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        if wt != 0.0 {
            s += wt * px(img, ix + dx, iy + dy);
        }
    }
    s
}

/// The `p` circle samples around `(x, y)`, counter-clockwise from the
/// right-hand neighbor (image y grows downward). Offsets within 1e-9 of an
/// integer are taken as that integer.
pub fn circle_samples(img: &GrayImage, x: usize, y: usize, p: usize, r: f64) -> Vec<f64> {
    let snap = |v: f64| {
        if (v - v.round()).abs() < 1e-9 {
            v.round()
        } else {
            v
        }
    };
    (0..p)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / p as f64;
            bilinear(
                img,
                x as f64 + snap(r * a.cos()),
                y as f64 + snap(-r * a.sin()),
            )
        })
        .collect()
}

pub fn lbp(img: &GrayImage, x: usize, y: usize, p: usize, r: f64) -> u32 {
    let c = img.get(x, y);
    let mut code = 0;
    for (i, g) in circle_samples(img, x, y, p, r).into_iter().enumerate() {
        if g >= c {
            code += 1 << i;
        }
    }
    code
}

fn trit(d: f64, t: f64) -> i32 {
    if d >= t {
        1
    } else if d <= -t {
        -1
    } else {
        0
    }
}

pub fn ltp(img: &GrayImage, x: usize, y: usize, p: usize, r: f64, t: f64) -> (u32, u32) {
    let c = img.get(x, y);
    let mut pos = 0;
    let mut neg = 0;
    for (i, g) in circle_samples(img, x, y, p, r).into_iter().enumerate() {
        match trit(g - c, t) {
            1 => pos += 1 << i,
            -1 => neg += 1 << i,
            _ => {}
        }
    }
    (pos, neg)
}

pub fn cs_lbp(img: &GrayImage, x: usize, y: usize, p: usize, r: f64, t: f64) -> u32 {
    let s = circle_samples(img, x, y, p, r);
    (0..p / 2)
        .filter(|&i| s[i] - s[i + p / 2] >= t)
        .map(|i| 1 << i)
        .sum()
}

pub fn cs_ltp(img: &GrayImage, x: usize, y: usize, p: usize, r: f64, t: f64) -> (u32, u32) {
    let s = circle_samples(img, x, y, p, r);
    let mut pos = 0;
    let mut neg = 0;
    for i in 0..p / 2 {
        match trit(s[i] - s[i + p / 2], t) {
            1 => pos += 1 << i,
            -1 => neg += 1 << i,
            _ => {}
        }
    }
    (pos, neg)
}

/// Centered-difference gradient magnitude at an interior pixel.
pub fn grad_mag(img: &GrayImage, x: usize, y: usize) -> f64 {
    let (x, y) = (x as i64, y as i64);
    let dx = (px(img, x + 1, y) - px(img, x - 1, y)) / 2.0;
    let dy = (px(img, x, y + 1) - px(img, x, y - 1)) / 2.0;
    (dx * dx + dy * dy).sqrt()
}

pub fn normalize(v: &[f64], scheme: NormScheme, eps: f64) -> Vec<f64> {
    let l1: f64 = v.iter().sum();
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    match scheme {
        NormScheme::None => v.to_vec(),
        NormScheme::L1 => v.iter().map(|x| x / (l1 + eps)).collect(),
        NormScheme::L1Sqrt => v.iter().map(|x| x / (l1 + eps).sqrt()).collect(),
        NormScheme::L1SqrtElem => v.iter().map(|x| (x / (l1 + eps)).sqrt()).collect(),
        NormScheme::L2 => {
            let n = (l2(v) + eps).sqrt();
            v.iter().map(|x| x / n).collect()
        }
        NormScheme::L2Hys => {
            let n = (l2(v) + eps).sqrt();
            let c: Vec<f64> = v.iter().map(|x| (x / n).min(0.2)).collect();
            let n2 = (l2(&c) + eps).sqrt();
            c.iter().map(|x| x / n2).collect()
        }
    }
}

fn uniform_bin(code: u32) -> usize {
    [0u32, 1, 3, 4, 7, 8, 13, 15]
        .iter()
        .position(|&c| c == code)
        .unwrap_or(8)
}

/// Dense descriptor of a window: every block histogram accumulated pixel by
/// pixel with explicit tent weights over cell centers.
pub fn dense(window: &GrayImage, cfg: &DenseConfig) -> Vec<f64> {
    let pat = &cfg.pattern;
    let bins = if pat.uniform { 9 } else { 1 << (pat.p / 2) };
    let (ww, wh) = (cfg.window_width, cfg.window_height);
    let b = cfg.block;
    let cells = b / cfg.cell;
    let margin = pat.r.ceil() as usize;
    let center = (b as f64 - 1.0) / 2.0;
    let tent = |p: usize, c: usize| -> f64 {
        if !cfg.interpolate {
            return if p / cfg.cell == c { 1.0 } else { 0.0 };
        }
        let u = ((p as f64 + 0.5) / cfg.cell as f64 - 0.5).clamp(0.0, (cells - 1) as f64);
        (1.0 - (u - c as f64).abs()).max(0.0)
    };
    let mut out = Vec::new();
    let mut by = 0;
    while by + b <= wh {
        let mut bx = 0;
        while bx + b <= ww {
            let mut hist = vec![0.0; cells * cells * bins];
            for py in 0..b {
                for pxl in 0..b {
                    let (x, y) = (bx + pxl, by + py);
                    if x < margin || y < margin || x + margin >= ww || y + margin >= wh {
                        continue;
                    }
                    let code = cs_lbp(window, x, y, pat.p, pat.r, pat.t);
                    let bin = if pat.uniform {
                        uniform_bin(code)
                    } else {
                        code as usize
                    };
                    let g = match cfg.gaussian_sigma {
                        Some(s) => {
                            let (dx, dy) = (pxl as f64 - center, py as f64 - center);
                            (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
                        }
                        None => 1.0,
                    };
                    let vote = grad_mag(window, x, y) * g;
                    for cy in 0..cells {
                        for cx in 0..cells {
                            hist[(cy * cells + cx) * bins + bin] +=
                                vote * tent(py, cy) * tent(pxl, cx);
                        }
                    }
                }
            }
            out.extend(normalize(&hist, cfg.norm, cfg.epsilon));
            bx += cfg.block_stride;
        }
        by += cfg.block_stride;
    }
    out
}

/// Pyramid descriptor following the construction step by step on explicit
/// per-pattern layers.
pub fn pyramid(window: &GrayImage, cfg: &PyramidConfig) -> Vec<f64> {
    let pat = cfg.pattern();
    let (ww, wh) = (cfg.window_width, cfg.window_height);
    let ternary = cfg.channels() == 2;
    let lpc = if pat.uniform { 9 } else { 16 };
    let margin = pat.r.ceil() as usize;
    let channels = cfg.channels();
    // layers[c][k][y][x]
    let mut layers = vec![vec![vec![vec![0.0; ww]; wh]; lpc]; channels];
    for y in margin..wh - margin {
        for x in margin..ww - margin {
            let codes: Vec<u32> = if ternary {
                let (p, n) = cs_ltp(window, x, y, pat.p, pat.r, pat.t);
                vec![p, n]
            } else {
                vec![cs_lbp(window, x, y, pat.p, pat.r, pat.t)]
            };
            for (c, code) in codes.into_iter().enumerate() {
                let k = if pat.uniform {
                    uniform_bin(code)
                } else {
                    code as usize
                };
                layers[c][k][y][x] = grad_mag(window, x, y);
            }
        }
    }
    let nc = cfg.norm_cell;
    for c in 0..channels {
        for cy in (0..wh).step_by(nc) {
            for cx in (0..ww).step_by(nc) {
                let mut total = 0.0;
                for layer in &layers[c] {
                    for row in &layer[cy..cy + nc] {
                        total += row[cx..cx + nc].iter().sum::<f64>();
                    }
                }
                if total > 0.0 {
                    for layer in &mut layers[c] {
                        for row in &mut layer[cy..cy + nc] {
                            row[cx..cx + nc].iter_mut().for_each(|v| *v /= total);
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (&cell, &weight) in cfg.level_cells.iter().zip(&cfg.level_weights) {
        let mut level = Vec::new();
        for cy in (0..wh).step_by(cell) {
            for cx in (0..ww).step_by(cell) {
                for layer_set in &layers {
                    for layer in layer_set {
                        let mut s = 0.0;
                        for row in &layer[cy..cy + cell] {
                            s += row[cx..cx + cell].iter().sum::<f64>();
                        }
                        level.push(s);
                    }
                }
            }
        }
        let bins = channels * lpc;
        for c in 0..channels {
            let total: f64 = level
                .chunks(bins)
                .map(|h| h[c * lpc..(c + 1) * lpc].iter().sum::<f64>())
                .sum();
            if total > 0.0 {
                for h in level.chunks_mut(bins) {
                    h[c * lpc..(c + 1) * lpc]
                        .iter_mut()
                        .for_each(|v| *v *= weight / total);
                }
            }
        }
        out.extend(level);
    }
    out
}

pub fn hik(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
