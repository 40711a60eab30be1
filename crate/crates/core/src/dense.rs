//! Dense CS-LBP window descriptor.
//!
//! A 64x128 window is tiled by overlapping 32x32 blocks (stride 16), each
//! split into 2x2 cells of 16x16 pixels. Every valid pixel votes its
//! Gaussian-weighted gradient magnitude into the bin of its CS-LBP code,
//! shared bilinearly between the four nearest cell centers. Each block's
//! `cells x bins` histogram is normalized on its own and the blocks are
//! concatenated in row-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{gradient_magnitude, GrayImage, Plane};
use crate::patterns::{code_map, uniform_bin_of, CodeMap, Family, PatternConfig};
use crate::{WINDOW_HEIGHT, WINDOW_WIDTH};

/// Block normalization scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormScheme {
    None,
    /// `v / (|v|_1 + eps)`
    L1,
    /// `v / sqrt(|v|_1 + eps)`
    L1Sqrt,
    /// `sqrt(v / (|v|_1 + eps))`, elementwise
    L1SqrtElem,
    /// `v / sqrt(|v|_2^2 + eps)`
    L2,
    /// L2, clip at 0.2, L2 again
    L2Hys,
}

impl NormScheme {
    pub const ALL: [NormScheme; 6] = [
        NormScheme::None,
        NormScheme::L1,
        NormScheme::L1Sqrt,
        NormScheme::L1SqrtElem,
        NormScheme::L2,
        NormScheme::L2Hys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NormScheme::None => "none",
            NormScheme::L1 => "l1",
            NormScheme::L1Sqrt => "l1sqrt",
            NormScheme::L1SqrtElem => "l1sqrt-elem",
            NormScheme::L2 => "l2",
            NormScheme::L2Hys => "l2hys",
        }
    }
}

impl std::str::FromStr for NormScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NormScheme::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown normalization scheme '{s}'")))
    }
}

/// Clipping level used by [`NormScheme::L2Hys`].
pub const L2HYS_CLIP: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseConfig {
    pub window_width: usize,
    pub window_height: usize,
    pub block: usize,
    pub cell: usize,
    pub block_stride: usize,
    /// Gaussian sigma in pixels; `None` disables the spatial weighting.
    pub gaussian_sigma: Option<f64>,
    pub norm: NormScheme,
    pub epsilon: f64,
    pub interpolate: bool,
    /// Must be a CS-LBP configuration.
    pub pattern: PatternConfig,
}

impl Default for DenseConfig {
    fn default() -> Self {
        DenseConfig {
            window_width: WINDOW_WIDTH,
            window_height: WINDOW_HEIGHT,
            block: 32,
            cell: 16,
            block_stride: 16,
            gaussian_sigma: Some(16.0),
            norm: NormScheme::L1Sqrt,
            epsilon: 1e-4,
            interpolate: true,
            pattern: PatternConfig::default(),
        }
    }
}

impl DenseConfig {
    pub fn validate(&self) -> Result<()> {
        self.pattern.validate()?;
        if self.pattern.family != Family::CsLbp {
            return Err(Error::config("dense descriptor uses the CS-LBP operator"));
        }
        if self.pattern.uniform && self.pattern.p != 8 {
            return Err(Error::config("uniform CS-LBP bins need p = 8"));
        }
        if self.cell == 0 || self.block == 0 || self.block_stride == 0 {
            return Err(Error::config("block, cell and stride must be positive"));
        }
        if !self.block.is_multiple_of(self.cell) {
            return Err(Error::config(format!(
                "block {} is not a whole number of {} cells",
                self.block, self.cell
            )));
        }
        if self.block > self.window_width || self.block > self.window_height {
            return Err(Error::config("block larger than the window"));
        }
        if !(self.window_width - self.block).is_multiple_of(self.block_stride)
            || !(self.window_height - self.block).is_multiple_of(self.block_stride)
        {
            return Err(Error::config(format!(
                "stride {} does not tile a {}x{} window with {} blocks",
                self.block_stride, self.window_width, self.window_height, self.block
            )));
        }
        if let Some(s) = self.gaussian_sigma {
            if !(s > 0.0) {
                return Err(Error::config("gaussian sigma must be positive"));
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::config("epsilon must be >= 0"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        if self.pattern.uniform {
            9
        } else {
            self.pattern.code_count()
        }
    }

    /// Block positions along x and y.
    pub fn block_grid(&self) -> (usize, usize) {
        (
            (self.window_width - self.block) / self.block_stride + 1,
            (self.window_height - self.block) / self.block_stride + 1,
        )
    }

    pub fn cells_per_block(&self) -> usize {
        let c = self.block / self.cell;
        c * c
    }

    pub fn block_len(&self) -> usize {
        self.cells_per_block() * self.bins()
    }

    pub fn descriptor_len(&self) -> usize {
        let (bx, by) = self.block_grid();
        bx * by * self.block_len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseDescriptor {
    pub values: Vec<f64>,
    pub config: DenseConfig,
}

/// Normalizes one block vector. Entries must be non-negative.
pub fn normalize_block(v: &[f64], scheme: NormScheme, epsilon: f64) -> Result<Vec<f64>> {
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::invalid(format!("block entry {x} is negative")));
    }
    let mut out = v.to_vec();
    normalize_in_place(&mut out, scheme, epsilon);
    Ok(out)
}

pub(crate) fn normalize_in_place(v: &mut [f64], scheme: NormScheme, epsilon: f64) {
    fn scale(v: &mut [f64], denom: f64) {
        if denom > 0.0 {
            v.iter_mut().for_each(|x| *x /= denom);
        }
    }
    fn l2(v: &mut [f64], epsilon: f64) {
        let sq: f64 = v.iter().map(|x| x * x).sum();
        scale(v, (sq + epsilon).sqrt());
    }
    match scheme {
        NormScheme::None => {}
        NormScheme::L1 => {
            let n: f64 = v.iter().sum();
            scale(v, n + epsilon);
        }
        NormScheme::L1Sqrt => {
            let n: f64 = v.iter().sum();
            scale(v, (n + epsilon).sqrt());
        }
        NormScheme::L1SqrtElem => {
            let n: f64 = v.iter().sum();
            scale(v, n + epsilon);
            v.iter_mut().for_each(|x| *x = x.sqrt());
        }
        NormScheme::L2 => l2(v, epsilon),
        NormScheme::L2Hys => {
            l2(v, epsilon);
            v.iter_mut().for_each(|x| *x = x.min(L2HYS_CLIP));
            l2(v, epsilon);
        }
    }
}

/// Precomputed per-block tables for a [`DenseConfig`].
#[derive(Clone, Debug)]
pub struct DenseExtractor {
    cfg: DenseConfig,
    bins: usize,
    cells_side: usize,
    /// Gaussian weight per block-local pixel, row-major.
    gauss: Vec<f64>,
    /// Per block-local coordinate: two (cell index, share) pairs.
    share: Vec<[(usize, f64); 2]>,
}

impl DenseExtractor {
    pub fn new(cfg: &DenseConfig) -> Result<Self> {
        cfg.validate()?;
        let b = cfg.block;
        let center = (b as f64 - 1.0) / 2.0;
        let mut gauss = Vec::with_capacity(b * b);
        for py in 0..b {
            for px in 0..b {
                gauss.push(match cfg.gaussian_sigma {
                    Some(s) => gaussian_weight(px as f64 - center, py as f64 - center, s),
                    None => 1.0,
                });
            }
        }
        let cells_side = b / cfg.cell;
        let share = (0..b)
            .map(|p| cell_shares(p, cfg.cell, cells_side, cfg.interpolate))
            .collect();
        Ok(DenseExtractor {
            cfg: cfg.clone(),
            bins: cfg.bins(),
            cells_side,
            gauss,
            share,
        })
    }

    pub fn config(&self) -> &DenseConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.cfg.descriptor_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn bin(&self, code: u16) -> usize {
        if self.cfg.pattern.uniform {
            uniform_bin_of(code as u32)
        } else {
            code as usize
        }
    }

    /// Accumulates the unnormalized histogram of the block whose top-left
    /// corner is `(bx, by)` in the window at `(x0, y0)` of the maps.
    pub(crate) fn accumulate_block(
        &self,
        codes: &CodeMap,
        mags: &Plane,
        (x0, y0): (usize, usize),
        (bx, by): (usize, usize),
        out: &mut [f64],
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let b = self.cfg.block;
        let m = codes.margin;
        let (ww, wh) = (self.cfg.window_width, self.cfg.window_height);
        for py in 0..b {
            let wy = by + py;
            if wy < m || wy + m >= wh {
                continue;
            }
            let iy = y0 + wy;
            let row = iy * codes.width;
            let [(cy0, sy0), (cy1, sy1)] = self.share[py];
            for px in 0..b {
                let wx = bx + px;
                if wx < m || wx + m >= ww {
                    continue;
                }
                let idx = row + x0 + wx;
                let vote = mags.data[idx] * self.gauss[py * b + px];
                if vote == 0.0 {
                    continue;
                }
                let bin = self.bin(codes.primary[idx]);
                let [(cx0, sx0), (cx1, sx1)] = self.share[px];
                let cs = self.cells_side;
                out[(cy0 * cs + cx0) * self.bins + bin] += vote * sy0 * sx0;
                out[(cy0 * cs + cx1) * self.bins + bin] += vote * sy0 * sx1;
                out[(cy1 * cs + cx0) * self.bins + bin] += vote * sy1 * sx0;
                out[(cy1 * cs + cx1) * self.bins + bin] += vote * sy1 * sx1;
            }
        }
    }

    /// Writes the descriptor of the window at `(x0, y0)` into `out`.
    pub(crate) fn describe_into(
        &self,
        codes: &CodeMap,
        mags: &Plane,
        origin: (usize, usize),
        out: &mut [f64],
    ) {
        let (gx, gy) = self.cfg.block_grid();
        let bl = self.cfg.block_len();
        let s = self.cfg.block_stride;
        for j in 0..gy {
            for i in 0..gx {
                let k = j * gx + i;
                let slice = &mut out[k * bl..(k + 1) * bl];
                self.accumulate_block(codes, mags, origin, (i * s, j * s), slice);
                normalize_in_place(slice, self.cfg.norm, self.cfg.epsilon);
            }
        }
    }
}

/// Unnormalized Gaussian `exp(-(dx^2 + dy^2) / (2 sigma^2))`.
pub fn gaussian_weight(dx: f64, dy: f64, sigma: f64) -> f64 {
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Bilinear shares of block-local coordinate `p` between its two nearest
/// cell centers. Shares falling outside the cell grid are clamped onto the
/// nearest cell so the total stays 1.
fn cell_shares(p: usize, cell: usize, cells: usize, interpolate: bool) -> [(usize, f64); 2] {
    if !interpolate {
        return [(p / cell, 1.0), (p / cell, 0.0)];
    }
    let u = (p as f64 + 0.5) / cell as f64 - 0.5;
    let lo = u.floor();
    let f = u - lo;
    let clamp = |i: f64| (i.max(0.0) as usize).min(cells - 1);
    [(clamp(lo), 1.0 - f), (clamp(lo + 1.0), f)]
}

fn check_window(window: &GrayImage, cfg: &DenseConfig) -> Result<()> {
    if window.width() != cfg.window_width || window.height() != cfg.window_height {
        return Err(Error::invalid(format!(
            "expected a {}x{} window, got {}x{}",
            cfg.window_width,
            cfg.window_height,
            window.width(),
            window.height()
        )));
    }
    Ok(())
}

/// Unnormalized per-cell histograms of the block at `block_origin`, one
/// `bins`-long vector per cell in row-major cell order.
pub fn cell_histograms(
    window: &GrayImage,
    block_origin: (usize, usize),
    cfg: &DenseConfig,
) -> Result<Vec<Vec<f64>>> {
    check_window(window, cfg)?;
    let (bx, by) = block_origin;
    if bx + cfg.block > window.width() || by + cfg.block > window.height() {
        return Err(Error::range(format!(
            "block at ({bx}, {by}) exceeds the window"
        )));
    }
    let ex = DenseExtractor::new(cfg)?;
    let codes = code_map(window, &cfg.pattern)?;
    let mags = gradient_magnitude(window)?;
    let mut block = vec![0.0; cfg.block_len()];
    ex.accumulate_block(&codes, &mags, (0, 0), (bx, by), &mut block);
    Ok(block.chunks(cfg.bins()).map(<[f64]>::to_vec).collect())
}

pub fn dense_descriptor(window: &GrayImage, cfg: &DenseConfig) -> Result<DenseDescriptor> {
    check_window(window, cfg)?;
    let ex = DenseExtractor::new(cfg)?;
    let codes = code_map(window, &cfg.pattern)?;
    let mags = gradient_magnitude(window)?;
    let mut values = vec![0.0; ex.len()];
    ex.describe_into(&codes, &mags, (0, 0), &mut values);
    Ok(DenseDescriptor {
        values,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn textured() -> GrayImage {
        GrayImage::from_fn(64, 128, |x, y| {
            let v = ((x * 31 + y * 17) % 23) as f64 / 22.0;
            0.2 + 0.6 * v
        })
        .unwrap()
    }

    #[test]
    fn default_geometry() {
        let cfg = DenseConfig::default();
        assert_eq!(cfg.block_grid(), (3, 7));
        assert_eq!(cfg.cells_per_block(), 4);
        assert_eq!(cfg.bins(), 16);
        assert_eq!(cfg.descriptor_len(), 1344);
    }

    #[test]
    fn flat_window_gives_zero() {
        let w = GrayImage::filled(64, 128, 0.7).unwrap();
        let d = dense_descriptor(&w, &DenseConfig::default()).unwrap();
        assert_eq!(d.values.len(), 1344);
        assert!(d.values.iter().all(|&v| v == 0.0));
        let h = cell_histograms(&w, (16, 32), &DenseConfig::default()).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_window_or_block_rejected() {
        let w = GrayImage::filled(64, 120, 0.7).unwrap();
        assert!(matches!(
            dense_descriptor(&w, &DenseConfig::default()),
            Err(Error::InvalidInput(_))
        ));
        let w = GrayImage::filled(64, 128, 0.7).unwrap();
        assert!(matches!(
            cell_histograms(&w, (40, 0), &DenseConfig::default()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn shares_partition_unity() {
        for p in 0..32 {
            let [(_, a), (_, b)] = cell_shares(p, 16, 2, true);
            assert_abs_diff_eq!(a + b, 1.0, epsilon = 1e-15);
        }
        assert_eq!(cell_shares(15, 16, 2, true), [(0, 0.53125), (1, 0.46875)]);
        assert_eq!(cell_shares(2, 16, 2, true)[0].0, 0);
        assert_eq!(cell_shares(2, 16, 2, true)[1].0, 0);
        assert_eq!(cell_shares(20, 16, 2, false), [(1, 1.0), (1, 0.0)]);
    }

    #[test]
    fn single_vote_at_block_center() {
        let cfg = DenseConfig::default();
        let ex = DenseExtractor::new(&cfg).unwrap();
        // maps for one window: a single magnitude-1 pixel with code 5 at
        // block-local (15, 15) of the block at (16, 16)
        let mut codes = code_map(&GrayImage::filled(64, 128, 0.5).unwrap(), &cfg.pattern).unwrap();
        let mut mags = Plane::zeros(64, 128);
        let (x, y) = (16 + 15, 16 + 15);
        codes.primary[y * 64 + x] = 5;
        mags.set(x, y, 1.0);
        let mut out = vec![0.0; 64];
        ex.accumulate_block(&codes, &mags, (0, 0), (16, 16), &mut out);
        let g = gaussian_weight(0.5, 0.5, 16.0);
        let (a, b) = (0.53125, 0.46875);
        assert_abs_diff_eq!(out[5], g * a * a, epsilon = 1e-15);
        assert_abs_diff_eq!(out[16 + 5], g * a * b, epsilon = 1e-15);
        assert_abs_diff_eq!(out[32 + 5], g * b * a, epsilon = 1e-15);
        assert_abs_diff_eq!(out[48 + 5], g * b * b, epsilon = 1e-15);
        assert_abs_diff_eq!(out.iter().sum::<f64>(), g, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_peak_and_decay() {
        assert_eq!(gaussian_weight(0.0, 0.0, 16.0), 1.0);
        let mut prev = 1.0;
        for d in 1..40 {
            let w = gaussian_weight(d as f64, 0.0, 16.0);
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn block_mass_is_interpolation_independent() {
        let w = textured();
        let on = DenseConfig::default();
        let off = DenseConfig {
            interpolate: false,
            ..DenseConfig::default()
        };
        let codes = code_map(&w, &on.pattern).unwrap();
        let mags = gradient_magnitude(&w).unwrap();
        let center = 15.5;
        for origin in [(0, 0), (16, 48), (32, 96)] {
            let mut expected = 0.0;
            for py in 0..32 {
                for px in 0..32 {
                    let (x, y) = (origin.0 + px, origin.1 + py);
                    if codes.is_valid(x, y) {
                        expected += mags.get(x, y)
                            * gaussian_weight(px as f64 - center, py as f64 - center, 16.0);
                    }
                }
            }
            for cfg in [&on, &off] {
                let total: f64 = cell_histograms(&w, origin, cfg)
                    .unwrap()
                    .iter()
                    .flatten()
                    .sum();
                assert_abs_diff_eq!(total, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn normalization_examples() {
        let mut v = vec![0.0; 64];
        for scheme in NormScheme::ALL {
            assert!(normalize_block(&v, scheme, 1e-4)
                .unwrap()
                .iter()
                .all(|&x| x == 0.0));
        }
        v[..4].copy_from_slice(&[1.0; 4]);
        let l1 = normalize_block(&v, NormScheme::L1, 0.0).unwrap();
        assert_eq!(&l1[..5], &[0.25, 0.25, 0.25, 0.25, 0.0]);
        let mut e = vec![0.0; 64];
        e[0] = 1.0;
        let hys = normalize_block(&e, NormScheme::L2Hys, 0.0).unwrap();
        assert_eq!(hys, e);
        e[0] = -1.0;
        assert!(matches!(
            normalize_block(&e, NormScheme::L1, 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn descriptor_is_shift_invariant() {
        let w = textured();
        let d0 = dense_descriptor(&w, &DenseConfig::default()).unwrap();
        let d1 = dense_descriptor(&w.shifted(0.125).unwrap(), &DenseConfig::default()).unwrap();
        for (a, b) in d0.values.iter().zip(&d1.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn l1_slices_sum_to_one() {
        let cfg = DenseConfig {
            norm: NormScheme::L1,
            epsilon: 0.0,
            ..DenseConfig::default()
        };
        let d = dense_descriptor(&textured(), &cfg).unwrap();
        for block in d.values.chunks(64) {
            assert_abs_diff_eq!(block.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let bad = DenseConfig {
            block_stride: 12,
            ..DenseConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = DenseConfig {
            cell: 12,
            ..DenseConfig::default()
        };
        assert!(bad.validate().is_err());
        let small = DenseConfig {
            block: 16,
            cell: 8,
            block_stride: 8,
            gaussian_sigma: Some(8.0),
            ..DenseConfig::default()
        };
        assert_eq!(small.descriptor_len(), 7 * 15 * 4 * 16);
        assert_eq!("l2hys".parse::<NormScheme>().unwrap(), NormScheme::L2Hys);
    }
}
