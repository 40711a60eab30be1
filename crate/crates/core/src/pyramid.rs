//! Pyramid CS-LBP / CS-LTP window descriptor.
//!
//! Steps, for a 64x128 window:
//!
//! 1. route each valid pixel's gradient magnitude into the edge-energy layer
//!    of its pattern code (16 layers, 9 for the uniform mapping, two channels
//!    for CS-LTP);
//! 2. L1-normalize the layers jointly inside non-overlapping 16x16 cells;
//! 3. at each level, sum the normalized energy over cells of 64, 32, 16 and
//!    8 pixels, giving 2, 8, 32 and 128 histograms;
//! 4. normalize each level to unit sum per channel and scale it by the level
//!    weight (1, 2, 4, 9);
//! 5. concatenate the levels.
//!
//! Within a level, cells are row-major and each cell lists its positive
//! channel layers before its negative channel layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{gradient_magnitude, GrayImage, Plane};
use crate::patterns::{code_map, uniform_bin_of, CodeMap, Family, PatternConfig, SignMode};
use crate::{WINDOW_HEIGHT, WINDOW_WIDTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PyramidVariant {
    CsLbp,
    UniformCsLbp,
    CsLtp,
    UniformCsLtp,
}

impl PyramidVariant {
    pub fn channels(self) -> usize {
        match self {
            PyramidVariant::CsLbp | PyramidVariant::UniformCsLbp => 1,
            PyramidVariant::CsLtp | PyramidVariant::UniformCsLtp => 2,
        }
    }

    pub fn layers_per_channel(self) -> usize {
        if self.is_uniform() {
            9
        } else {
            16
        }
    }

    pub fn is_uniform(self) -> bool {
        matches!(
            self,
            PyramidVariant::UniformCsLbp | PyramidVariant::UniformCsLtp
        )
    }

    pub fn family(self) -> Family {
        if self.channels() == 2 {
            Family::CsLtp
        } else {
            Family::CsLbp
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PyramidConfig {
    pub variant: PyramidVariant,
    pub window_width: usize,
    pub window_height: usize,
    pub norm_cell: usize,
    /// Square cell side per level, coarse to fine.
    pub level_cells: Vec<usize>,
    pub level_weights: Vec<f64>,
    pub t: f64,
    pub sign_mode: SignMode,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig::new(PyramidVariant::CsLbp)
    }
}

impl PyramidConfig {
    pub fn new(variant: PyramidVariant) -> Self {
        PyramidConfig {
            variant,
            window_width: WINDOW_WIDTH,
            window_height: WINDOW_HEIGHT,
            norm_cell: 16,
            level_cells: vec![64, 32, 16, 8],
            level_weights: vec![1.0, 2.0, 4.0, 9.0],
            t: 0.022,
            sign_mode: SignMode::Signed,
        }
    }

    pub fn pattern(&self) -> PatternConfig {
        PatternConfig {
            family: self.variant.family(),
            t: self.t,
            sign_mode: self.sign_mode,
            uniform: self.variant.is_uniform(),
            ..PatternConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pattern().validate()?;
        let (w, h) = (self.window_width, self.window_height);
        if self.level_cells.is_empty() || self.level_cells.len() != self.level_weights.len() {
            return Err(Error::config("need one weight per pyramid level"));
        }
        for &c in self
            .level_cells
            .iter()
            .chain(std::iter::once(&self.norm_cell))
        {
            if c == 0 || w % c != 0 || h % c != 0 {
                return Err(Error::config(format!(
                    "cell size {c} does not divide the {w}x{h} window"
                )));
            }
        }
        if self.level_weights.iter().any(|&wt| !(wt > 0.0)) {
            return Err(Error::config("level weights must be positive"));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.variant.channels()
    }

    /// Histogram length per cell (all channels).
    pub fn cell_bins(&self) -> usize {
        self.variant.channels() * self.variant.layers_per_channel()
    }

    /// Cells at each level.
    pub fn level_cell_counts(&self) -> Vec<usize> {
        self.level_cells
            .iter()
            .map(|&c| (self.window_width / c) * (self.window_height / c))
            .collect()
    }

    pub fn descriptor_len(&self) -> usize {
        self.level_cell_counts().iter().sum::<usize>() * self.cell_bins()
    }
}

/// Per-pattern gradient-magnitude layers. Layer `c * layers_per_channel + k`
/// holds the magnitude of pixels whose channel-`c` code maps to layer `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeEnergyStack {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub layers_per_channel: usize,
    pub layers: Vec<Plane>,
}

impl EdgeEnergyStack {
    pub fn layer(&self, channel: usize, k: usize) -> &Plane {
        &self.layers[channel * self.layers_per_channel + k]
    }

    /// Sum over the layers of one channel at a pixel.
    pub fn channel_sum_at(&self, channel: usize, x: usize, y: usize) -> f64 {
        (0..self.layers_per_channel)
            .map(|k| self.layer(channel, k).get(x, y))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> EdgeEnergyStack {
        let mut out = self.clone();
        for layer in &mut out.layers {
            layer.data.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }
}

#[inline]
fn layer_of(code: u16, uniform: bool) -> usize {
    if uniform {
        uniform_bin_of(code as u32)
    } else {
        code as usize
    }
}

/// Builds the edge-energy layers of a window of any size of at least 3x3.
pub fn edge_energy_layers(window: &GrayImage, cfg: &PyramidConfig) -> Result<EdgeEnergyStack> {
    cfg.validate()?;
    let pattern = cfg.pattern();
    let m = pattern.margin();
    let (w, h) = (window.width(), window.height());
    if w <= 2 * m || h <= 2 * m {
        return Err(Error::invalid(format!(
            "{w}x{h} window is too small for a radius-{} neighborhood",
            pattern.r
        )));
    }
    let codes = code_map(window, &pattern)?;
    let mags = gradient_magnitude(window)?;
    let lpc = cfg.variant.layers_per_channel();
    let channels = cfg.channels();
    let uniform = cfg.variant.is_uniform();
    let mut layers = vec![Plane::zeros(w, h); channels * lpc];
    for y in m..h - m {
        for x in m..w - m {
            let idx = y * w + x;
            let mag = mags.data[idx];
            layers[layer_of(codes.primary[idx], uniform)].data[idx] = mag;
            if let Some(neg) = &codes.negative {
                layers[lpc + layer_of(neg[idx], uniform)].data[idx] = mag;
            }
        }
    }
    Ok(EdgeEnergyStack {
        width: w,
        height: h,
        channels,
        layers_per_channel: lpc,
        layers,
    })
}

/// Divides every layer value by its channel's total inside each
/// non-overlapping `norm_cell x norm_cell` cell. Empty cells stay zero.
pub fn cellwise_l1_normalize(stack: &EdgeEnergyStack, norm_cell: usize) -> Result<EdgeEnergyStack> {
    if norm_cell == 0
        || !stack.width.is_multiple_of(norm_cell)
        || !stack.height.is_multiple_of(norm_cell)
    {
        return Err(Error::invalid(format!(
            "cell {norm_cell} does not divide the {}x{} stack",
            stack.width, stack.height
        )));
    }
    let mut out = stack.clone();
    let lpc = stack.layers_per_channel;
    for cy in (0..stack.height).step_by(norm_cell) {
        for cx in (0..stack.width).step_by(norm_cell) {
            for c in 0..stack.channels {
                let layers = &mut out.layers[c * lpc..(c + 1) * lpc];
                let mut total = 0.0;
                for layer in layers.iter() {
                    for y in cy..cy + norm_cell {
                        for x in cx..cx + norm_cell {
                            total += layer.get(x, y);
                        }
                    }
                }
                if total > 0.0 {
                    for layer in layers.iter_mut() {
                        for y in cy..cy + norm_cell {
                            for x in cx..cx + norm_cell {
                                let v = layer.get(x, y);
                                layer.set(x, y, v / total);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Per-cell histograms of level `level` (1-based, coarse to fine). Bin
/// `c * layers_per_channel + k` sums layer `(c, k)` over the cell.
pub fn level_histograms(
    stack: &EdgeEnergyStack,
    level: usize,
    cfg: &PyramidConfig,
) -> Result<Vec<Vec<f64>>> {
    if level == 0 || level > cfg.level_cells.len() {
        return Err(Error::range(format!(
            "level {level} not in 1..={}",
            cfg.level_cells.len()
        )));
    }
    let cell = cfg.level_cells[level - 1];
    if !stack.width.is_multiple_of(cell) || !stack.height.is_multiple_of(cell) {
        return Err(Error::invalid(format!(
            "level cell {cell} does not divide the {}x{} stack",
            stack.width, stack.height
        )));
    }
    let mut out = Vec::new();
    for cy in (0..stack.height).step_by(cell) {
        for cx in (0..stack.width).step_by(cell) {
            let hist = stack
                .layers
                .iter()
                .map(|layer| {
                    let mut s = 0.0;
                    for y in cy..cy + cell {
                        for x in cx..cx + cell {
                            s += layer.get(x, y);
                        }
                    }
                    s
                })
                .collect();
            out.push(hist);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PyramidDescriptor {
    pub values: Vec<f64>,
    pub config: PyramidConfig,
}

/// Normalizes each channel of a level slice to unit sum, then applies the
/// level weight. Slices without energy stay zero.
fn finish_level(slice: &mut [f64], cell_bins: usize, lpc: usize, channels: usize, weight: f64) {
    for c in 0..channels {
        let total: f64 = slice
            .chunks(cell_bins)
            .map(|cell| cell[c * lpc..(c + 1) * lpc].iter().sum::<f64>())
            .sum();
        if total > 0.0 {
            let k = weight / total;
            for cell in slice.chunks_mut(cell_bins) {
                cell[c * lpc..(c + 1) * lpc]
                    .iter_mut()
                    .for_each(|v| *v *= k);
            }
        }
    }
}

/// Precomputed geometry for computing many pyramid descriptors from shared
/// per-image code and magnitude maps.
#[derive(Clone, Debug)]
pub struct PyramidExtractor {
    cfg: PyramidConfig,
    level_offsets: Vec<usize>,
}

impl PyramidExtractor {
    pub fn new(cfg: &PyramidConfig) -> Result<Self> {
        cfg.validate()?;
        let mut level_offsets = Vec::with_capacity(cfg.level_cells.len());
        let mut off = 0;
        for n in cfg.level_cell_counts() {
            level_offsets.push(off);
            off += n * cfg.cell_bins();
        }
        Ok(PyramidExtractor {
            cfg: cfg.clone(),
            level_offsets,
        })
    }

    pub fn config(&self) -> &PyramidConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.cfg.descriptor_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the descriptor of the window whose top-left pixel is `(x0, y0)`
    /// in the maps. Window-border pixels without a full neighborhood inside
    /// the window carry no energy.
    pub(crate) fn describe_into(
        &self,
        codes: &CodeMap,
        mags: &Plane,
        (x0, y0): (usize, usize),
        out: &mut [f64],
    ) {
        let cfg = &self.cfg;
        let (ww, wh) = (cfg.window_width, cfg.window_height);
        let m = codes.margin;
        let nc = cfg.norm_cell;
        let ncx = ww / nc;
        let lpc = cfg.variant.layers_per_channel();
        let bins = cfg.cell_bins();
        let uniform = cfg.variant.is_uniform();

        let valid = |wx: usize, wy: usize| wx >= m && wy >= m && wx + m < ww && wy + m < wh;

        // per-cell magnitude totals, equal to every channel's layer total
        let mut totals = vec![0.0; ncx * (wh / nc)];
        for wy in m..wh - m {
            let row = (y0 + wy) * codes.width + x0;
            for wx in m..ww - m {
                totals[(wy / nc) * ncx + wx / nc] += mags.data[row + wx];
            }
        }

        out.iter_mut().for_each(|v| *v = 0.0);
        for (li, &cell) in cfg.level_cells.iter().enumerate() {
            let lcx = ww / cell;
            let base = self.level_offsets[li];
            for wy in 0..wh {
                let row = (y0 + wy) * codes.width + x0;
                for wx in 0..ww {
                    if !valid(wx, wy) {
                        continue;
                    }
                    let total = totals[(wy / nc) * ncx + wx / nc];
                    if total <= 0.0 {
                        continue;
                    }
                    let idx = row + wx;
                    let e = mags.data[idx] / total;
                    if e == 0.0 {
                        continue;
                    }
                    let cell_base = base + ((wy / cell) * lcx + wx / cell) * bins;
                    out[cell_base + layer_of(codes.primary[idx], uniform)] += e;
                    if let Some(neg) = &codes.negative {
                        out[cell_base + lpc + layer_of(neg[idx], uniform)] += e;
                    }
                }
            }
            let end = base + cfg.level_cell_counts()[li] * bins;
            finish_level(
                &mut out[base..end],
                bins,
                lpc,
                cfg.channels(),
                cfg.level_weights[li],
            );
        }
    }
}

pub fn pyramid_descriptor(window: &GrayImage, cfg: &PyramidConfig) -> Result<PyramidDescriptor> {
    if window.width() != cfg.window_width || window.height() != cfg.window_height {
        return Err(Error::invalid(format!(
            "expected a {}x{} window, got {}x{}",
            cfg.window_width,
            cfg.window_height,
            window.width(),
            window.height()
        )));
    }
    let ex = PyramidExtractor::new(cfg)?;
    let codes = code_map(window, &cfg.pattern())?;
    let mags = gradient_magnitude(window)?;
    let mut values = vec![0.0; ex.len()];
    ex.describe_into(&codes, &mags, (0, 0), &mut values);
    Ok(PyramidDescriptor {
        values,
        config: cfg.clone(),
    })
}

/// Reference pipeline built from the materialized stack operations. Slower
/// than [`pyramid_descriptor`] but follows the steps literally.
pub fn pyramid_descriptor_from_stack(window: &GrayImage, cfg: &PyramidConfig) -> Result<Vec<f64>> {
    let stack = edge_energy_layers(window, cfg)?;
    let normalized = cellwise_l1_normalize(&stack, cfg.norm_cell)?;
    let bins = cfg.cell_bins();
    let mut out = Vec::with_capacity(cfg.descriptor_len());
    for level in 1..=cfg.level_cells.len() {
        let start = out.len();
        for hist in level_histograms(&normalized, level, cfg)? {
            out.extend(hist);
        }
        finish_level(
            &mut out[start..],
            bins,
            cfg.variant.layers_per_channel(),
            cfg.channels(),
            cfg.level_weights[level - 1],
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn textured(seed: usize) -> GrayImage {
        GrayImage::from_fn(64, 128, |x, y| {
            let v = ((x * 31 + y * 17 + seed * 7) % 23) as f64 / 22.0;
            let stripe = if (x / 5 + y / 9) % 2 == 0 { 0.2 } else { 0.0 };
            0.1 + 0.6 * v + stripe
        })
        .unwrap()
    }

    #[test]
    fn descriptor_lengths() {
        assert_eq!(
            PyramidConfig::new(PyramidVariant::CsLbp).descriptor_len(),
            2720
        );
        assert_eq!(
            PyramidConfig::new(PyramidVariant::UniformCsLbp).descriptor_len(),
            1530
        );
        assert_eq!(
            PyramidConfig::new(PyramidVariant::CsLtp).descriptor_len(),
            5440
        );
        assert_eq!(
            PyramidConfig::new(PyramidVariant::UniformCsLtp).descriptor_len(),
            3060
        );
        assert_eq!(
            PyramidConfig::default().level_cell_counts(),
            vec![2, 8, 32, 128]
        );
    }

    #[test]
    fn flat_window() {
        let w = GrayImage::filled(64, 128, 0.3).unwrap();
        let cfg = PyramidConfig::default();
        let s = edge_energy_layers(&w, &cfg).unwrap();
        assert!(s.layers.iter().all(|l| l.data.iter().all(|&v| v == 0.0)));
        let d = pyramid_descriptor(&w, &cfg).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn routing_partition() {
        let w = textured(1);
        for variant in [PyramidVariant::CsLbp, PyramidVariant::UniformCsLtp] {
            let cfg = PyramidConfig::new(variant);
            let s = edge_energy_layers(&w, &cfg).unwrap();
            let mags = gradient_magnitude(&w).unwrap();
            for y in 1..127 {
                for x in 1..63 {
                    for c in 0..s.channels {
                        let nonzero = (0..s.layers_per_channel)
                            .filter(|&k| s.layer(c, k).get(x, y) != 0.0)
                            .count();
                        assert!(nonzero <= 1);
                        assert_eq!(s.channel_sum_at(c, x, y), mags.get(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_layer_collects_non_uniform_codes() {
        let w = textured(2);
        let full = edge_energy_layers(&w, &PyramidConfig::new(PyramidVariant::CsLbp)).unwrap();
        let uni =
            edge_energy_layers(&w, &PyramidConfig::new(PyramidVariant::UniformCsLbp)).unwrap();
        assert_eq!(uni.layers.len(), 9);
        let non_uniform: f64 = [2, 5, 6, 9, 10, 11, 12, 14]
            .iter()
            .map(|&k| full.layers[k].sum())
            .sum();
        assert_abs_diff_eq!(uni.layers[8].sum(), non_uniform, epsilon = 1e-9);
    }

    #[test]
    fn cellwise_normalization() {
        let w = textured(3);
        let cfg = PyramidConfig::default();
        let s = edge_energy_layers(&w, &cfg).unwrap();
        let n = cellwise_l1_normalize(&s, 16).unwrap();
        for cy in (0..128).step_by(16) {
            for cx in (0..64).step_by(16) {
                let total: f64 = n
                    .layers
                    .iter()
                    .map(|l| {
                        let mut t = 0.0;
                        for y in cy..cy + 16 {
                            for x in cx..cx + 16 {
                                t += l.get(x, y);
                            }
                        }
                        t
                    })
                    .sum();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            }
        }
        let n5 = cellwise_l1_normalize(&s.scaled(5.0), 16).unwrap();
        for (a, b) in n.layers.iter().zip(&n5.layers) {
            for (x, y) in a.data.iter().zip(&b.data) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
        assert!(cellwise_l1_normalize(&s, 24).is_err());
    }

    #[test]
    fn zero_cell_stays_zero() {
        let w = GrayImage::filled(64, 128, 0.5).unwrap();
        let s = edge_energy_layers(&w, &PyramidConfig::default()).unwrap();
        let n = cellwise_l1_normalize(&s, 16).unwrap();
        assert_eq!(n, s);
    }

    #[test]
    fn level_counts_and_partition() {
        let w = textured(4);
        let cfg = PyramidConfig::default();
        let s = cellwise_l1_normalize(&edge_energy_layers(&w, &cfg).unwrap(), 16).unwrap();
        let counts: Vec<usize> = (1..=4)
            .map(|l| level_histograms(&s, l, &cfg).unwrap().len())
            .collect();
        assert_eq!(counts, vec![2, 8, 32, 128]);
        let mass = |l| -> f64 {
            level_histograms(&s, l, &cfg)
                .unwrap()
                .iter()
                .flatten()
                .sum()
        };
        assert_abs_diff_eq!(mass(3), mass(4), epsilon = 1e-9);
        assert!(matches!(
            level_histograms(&s, 0, &cfg),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            level_histograms(&s, 5, &cfg),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn fast_path_matches_stack_pipeline() {
        for (i, variant) in [
            PyramidVariant::CsLbp,
            PyramidVariant::UniformCsLbp,
            PyramidVariant::CsLtp,
            PyramidVariant::UniformCsLtp,
        ]
        .into_iter()
        .enumerate()
        {
            let w = textured(i);
            let cfg = PyramidConfig::new(variant);
            let fast = pyramid_descriptor(&w, &cfg).unwrap();
            let slow = pyramid_descriptor_from_stack(&w, &cfg).unwrap();
            assert_eq!(fast.values.len(), slow.len());
            for (a, b) in fast.values.iter().zip(&slow) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn level_sums_match_weights() {
        let w = textured(5);
        let cfg = PyramidConfig::new(PyramidVariant::CsLtp);
        let d = pyramid_descriptor(&w, &cfg).unwrap();
        let mut off = 0;
        for (n, wt) in cfg.level_cell_counts().into_iter().zip(&cfg.level_weights) {
            let slice = &d.values[off..off + n * 32];
            for c in 0..2 {
                let s: f64 = slice
                    .chunks(32)
                    .map(|cell| cell[c * 16..(c + 1) * 16].iter().sum::<f64>())
                    .sum();
                assert_abs_diff_eq!(s, *wt, epsilon = 1e-6);
            }
            off += n * 32;
        }
    }

    #[test]
    fn wrong_size_rejected() {
        let w = GrayImage::filled(32, 128, 0.3).unwrap();
        assert!(pyramid_descriptor(&w, &PyramidConfig::default()).is_err());
        let tiny = GrayImage::filled(2, 2, 0.3).unwrap();
        assert!(edge_energy_layers(&tiny, &PyramidConfig::default()).is_err());
    }
}
