//! Per-pixel local pattern operators: LBP, LTP, CS-LBP and CS-LTP.
//!
//! Neighbors are sampled on a circle of radius `r`. Neighbor `i` sits at
//! angle `2 * pi * i / p`, starting east and running counterclockwise as
//! seen on screen, i.e. at offset `(r cos a, -r sin a)` with `y` pointing
//! down. Off-grid samples are bilinearly interpolated.
//!
//! Pixels whose circle leaves the image have no code. Every operator here
//! uses the same valid region: `ceil(r) <= x < width - ceil(r)` and likewise
//! for `y`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Largest supported neighbor count.
pub const MAX_NEIGHBORS: usize = 32;

/// Operator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Lbp,
    Ltp,
    CsLbp,
    CsLtp,
}

impl Family {
    /// Ternary families produce a positive and a negative code.
    pub fn is_ternary(self) -> bool {
        matches!(self, Family::Ltp | Family::CsLtp)
    }

    pub fn is_center_symmetric(self) -> bool {
        matches!(self, Family::CsLbp | Family::CsLtp)
    }
}

/// How a CS-LBP pair difference is thresholded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignMode {
    /// Bit fires iff `g_i - g_{i+p/2} >= t`.
    Signed,
    /// Bit fires iff `|g_i - g_{i+p/2}| >= t`.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternConfig {
    pub family: Family,
    /// Number of sampling points on the circle.
    pub p: usize,
    /// Circle radius in pixels.
    pub r: f64,
    /// Graylevel threshold on the `[0, 1]` scale. Unused by plain LBP.
    pub t: f64,
    pub sign_mode: SignMode,
    pub uniform: bool,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig {
            family: Family::CsLbp,
            p: 8,
            r: 1.0,
            t: 0.022,
            sign_mode: SignMode::Signed,
            uniform: false,
        }
    }
}

impl PatternConfig {
    pub fn with_family(family: Family) -> Self {
        PatternConfig {
            family,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.p > MAX_NEIGHBORS {
            return Err(Error::invalid(format!(
                "neighbor count {} not in 1..={MAX_NEIGHBORS}",
                self.p
            )));
        }
        if self.family.is_center_symmetric() && (self.p < 4 || !self.p.is_multiple_of(2)) {
            return Err(Error::invalid(format!(
                "center-symmetric operators need an even p >= 4, got {}",
                self.p
            )));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::invalid(format!(
                "radius must be positive, got {}",
                self.r
            )));
        }
        if !(self.t >= 0.0) {
            return Err(Error::invalid(format!(
                "threshold must be >= 0, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// Bits per code (per channel for ternary families).
    pub fn bit_width(&self) -> u32 {
        if self.family.is_center_symmetric() {
            (self.p / 2) as u32
        } else {
            self.p as u32
        }
    }

    /// Number of distinct raw codes per channel.
    pub fn code_count(&self) -> usize {
        1 << self.bit_width()
    }

    /// Margin in pixels excluded on every side of the image.
    pub fn margin(&self) -> usize {
        self.r.ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Single,
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternCode {
    pub value: u32,
    pub bit_width: u32,
    pub channel: Channel,
}

impl PatternCode {
    pub fn single(value: u32, bit_width: u32) -> Self {
        PatternCode {
            value,
            bit_width,
            channel: Channel::Single,
        }
    }
}

/// Precomputed sampling geometry for one `(p, r)` pair. Each offset is split
/// into an integer anchor and a fractional bilinear weight so that sampled
/// values do not depend on the absolute pixel position.
#[derive(Clone, Debug)]
pub struct Neighborhood {
    taps: Vec<Tap>,
    margin: usize,
}

#[derive(Clone, Copy, Debug)]
struct Tap {
    dx: isize,
    dy: isize,
    fx: f64,
    fy: f64,
}

/// Offsets within this distance of an integer are snapped onto it, so axis
/// samples read pixels exactly instead of blending in a 1e-17 share.
const SNAP: f64 = 1e-9;

/// Offset `(dx, dy)` of neighbor `i` out of `p` on a circle of radius `r`.
pub fn neighbor_offset(i: usize, p: usize, r: f64) -> (f64, f64) {
    let angle = 2.0 * PI * i as f64 / p as f64;
    (snap(r * angle.cos()), snap(-r * angle.sin()))
}

fn snap(v: f64) -> f64 {
    let rounded = v.round();
    if (v - rounded).abs() < SNAP {
        rounded + 0.0
    } else {
        v
    }
}

impl Neighborhood {
    pub fn new(p: usize, r: f64) -> Self {
        let taps = (0..p)
            .map(|i| {
                let (ox, oy) = neighbor_offset(i, p, r);
                let (fx0, fy0) = (ox.floor(), oy.floor());
                Tap {
                    dx: fx0 as isize,
                    dy: fy0 as isize,
                    fx: ox - fx0,
                    fy: oy - fy0,
                }
            })
            .collect();
        Neighborhood {
            taps,
            margin: r.ceil() as usize,
        }
    }

    pub fn from_config(cfg: &PatternConfig) -> Self {
        Neighborhood::new(cfg.p, cfg.r)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Whether `(x, y)` admits the full neighborhood in `img`.
    pub fn is_valid(&self, img: &GrayImage, x: usize, y: usize) -> bool {
        x >= self.margin
            && y >= self.margin
            && x + self.margin < img.width()
            && y + self.margin < img.height()
    }

    /// Writes the sampled graylevels into `out[..p]`. The caller guarantees
    /// `(x, y)` is valid.
    #[inline]
    pub fn sample_into(&self, img: &GrayImage, x: usize, y: usize, out: &mut [f64]) {
        for (slot, tap) in out.iter_mut().zip(&self.taps) {
            let ix = (x as isize + tap.dx) as usize;
            let iy = (y as isize + tap.dy) as usize;
            *slot = img.lerp_at(ix, iy, tap.fx, tap.fy);
        }
    }

    fn checked_samples(&self, img: &GrayImage, x: usize, y: usize) -> Result<[f64; MAX_NEIGHBORS]> {
        if !self.is_valid(img, x, y) {
            return Err(Error::range(format!(
                "neighborhood of ({x}, {y}) with margin {} leaves the {}x{} image",
                self.margin,
                img.width(),
                img.height()
            )));
        }
        let mut buf = [0.0; MAX_NEIGHBORS];
        self.sample_into(img, x, y, &mut buf[..self.taps.len()]);
        Ok(buf)
    }
}

/// LBP from materialized samples: bit `i` set iff `g_i >= g_c`.
pub fn lbp_from_samples(center: f64, samples: &[f64]) -> u32 {
    samples.iter().enumerate().fold(
        0,
        |acc, (i, &g)| if g - center >= 0.0 { acc | 1 << i } else { acc },
    )
}

/// Ternary sign with dead zone `|d| < t`.
#[inline]
fn ternary(d: f64, t: f64) -> i8 {
    if d >= t {
        1
    } else if d <= -t {
        -1
    } else {
        0
    }
}

/// LTP split into (positive, negative) binary codes.
pub fn ltp_from_samples(center: f64, samples: &[f64], t: f64) -> (u32, u32) {
    let mut pos = 0;
    let mut neg = 0;
    for (i, &g) in samples.iter().enumerate() {
        match ternary(g - center, t) {
            1 => pos |= 1 << i,
            -1 => neg |= 1 << i,
            _ => {}
        }
    }
    (pos, neg)
}

/// CS-LBP over center-symmetric pairs `(g_i, g_{i+p/2})`.
pub fn cs_lbp_from_samples(samples: &[f64], t: f64, mode: SignMode) -> u32 {
    let half = samples.len() / 2;
    let mut code = 0;
    for i in 0..half {
        let d = samples[i] - samples[i + half];
        let fires = match mode {
            SignMode::Signed => d >= t,
            SignMode::Absolute => d.abs() >= t,
        };
        if fires {
            code |= 1 << i;
        }
    }
    code
}

/// CS-LTP split into (positive, negative) codes of `p / 2` bits each.
pub fn cs_ltp_from_samples(samples: &[f64], t: f64) -> (u32, u32) {
    let half = samples.len() / 2;
    let mut pos = 0;
    let mut neg = 0;
    for i in 0..half {
        match ternary(samples[i] - samples[i + half], t) {
            1 => pos |= 1 << i,
            -1 => neg |= 1 << i,
            _ => {}
        }
    }
    (pos, neg)
}

fn expect_family(cfg: &PatternConfig, family: Family) -> Result<()> {
    cfg.validate()?;
    if cfg.family != family {
        return Err(Error::invalid(format!(
            "expected a {family:?} configuration, got {:?}",
            cfg.family
        )));
    }
    Ok(())
}

pub fn lbp_code(img: &GrayImage, x: usize, y: usize, cfg: &PatternConfig) -> Result<PatternCode> {
    expect_family(cfg, Family::Lbp)?;
    let nb = Neighborhood::from_config(cfg);
    let s = nb.checked_samples(img, x, y)?;
    Ok(PatternCode::single(
        lbp_from_samples(img.get(x, y), &s[..cfg.p]),
        cfg.bit_width(),
    ))
}

pub fn ltp_codes(
    img: &GrayImage,
    x: usize,
    y: usize,
    cfg: &PatternConfig,
) -> Result<(PatternCode, PatternCode)> {
    expect_family(cfg, Family::Ltp)?;
    let nb = Neighborhood::from_config(cfg);
    let s = nb.checked_samples(img, x, y)?;
    let (pos, neg) = ltp_from_samples(img.get(x, y), &s[..cfg.p], cfg.t);
    Ok(split(pos, neg, cfg.bit_width()))
}

pub fn cs_lbp_code(
    img: &GrayImage,
    x: usize,
    y: usize,
    cfg: &PatternConfig,
) -> Result<PatternCode> {
    expect_family(cfg, Family::CsLbp)?;
    let nb = Neighborhood::from_config(cfg);
    let s = nb.checked_samples(img, x, y)?;
    Ok(PatternCode::single(
        cs_lbp_from_samples(&s[..cfg.p], cfg.t, cfg.sign_mode),
        cfg.bit_width(),
    ))
}

pub fn cs_ltp_codes(
    img: &GrayImage,
    x: usize,
    y: usize,
    cfg: &PatternConfig,
) -> Result<(PatternCode, PatternCode)> {
    expect_family(cfg, Family::CsLtp)?;
    let nb = Neighborhood::from_config(cfg);
    let s = nb.checked_samples(img, x, y)?;
    let (pos, neg) = cs_ltp_from_samples(&s[..cfg.p], cfg.t);
    Ok(split(pos, neg, cfg.bit_width()))
}

fn split(pos: u32, neg: u32, bit_width: u32) -> (PatternCode, PatternCode) {
    (
        PatternCode {
            value: pos,
            bit_width,
            channel: Channel::Positive,
        },
        PatternCode {
            value: neg,
            bit_width,
            channel: Channel::Negative,
        },
    )
}

/// Number of 0/1 transitions in the circular bit string of `value`.
pub fn circular_transitions(value: u32, bit_width: u32) -> u32 {
    let mask = if bit_width >= 32 {
        u32::MAX
    } else {
        (1u32 << bit_width) - 1
    };
    let v = value & mask;
    let rotated = ((v >> 1) | ((v & 1) << (bit_width - 1))) & mask;
    (v ^ rotated).count_ones()
}

/// Uniform LBP: at most two circular bit transitions.
pub fn is_uniform_lbp(code: PatternCode) -> bool {
    circular_transitions(code.value, code.bit_width) <= 2
}

/// The eight most frequent 4-bit CS-LBP codes, in bin order
/// (`0000, 0001, 0011, 0100, 0111, 1000, 1101, 1111`).
pub const UNIFORM_CS_LBP_CODES: [u32; 8] = [
    0b0000, 0b0001, 0b0011, 0b0100, 0b0111, 0b1000, 0b1101, 0b1111,
];

/// Bin shared by every non-uniform CS-LBP code.
pub const NON_UNIFORM_CS_LBP_BIN: usize = 8;

const UNIFORM_CS_LBP_LUT: [u8; 16] = {
    let mut lut = [NON_UNIFORM_CS_LBP_BIN as u8; 16];
    let mut i = 0;
    while i < UNIFORM_CS_LBP_CODES.len() {
        lut[UNIFORM_CS_LBP_CODES[i] as usize] = i as u8;
        i += 1;
    }
    lut
};

/// Maps a 4-bit CS-LBP code to its uniform bin in `0..9`.
///
/// Panics if the code is not 4 bits wide.
pub fn uniform_cs_lbp_bin(code: PatternCode) -> usize {
    assert_eq!(
        code.bit_width, 4,
        "uniform CS-LBP bins are defined for 4-bit codes"
    );
    UNIFORM_CS_LBP_LUT[(code.value & 0xF) as usize] as usize
}

#[inline]
pub(crate) fn uniform_bin_of(value: u32) -> usize {
    UNIFORM_CS_LBP_LUT[(value & 0xF) as usize] as usize
}

/// Per-pixel codes for a whole image. Pixels outside the valid region hold
/// code 0 and must be skipped by consumers via [`CodeMap::is_valid`].
#[derive(Clone, Debug)]
pub struct CodeMap {
    pub width: usize,
    pub height: usize,
    pub margin: usize,
    /// Single-channel codes, or the positive channel of a ternary family.
    pub primary: Vec<u16>,
    /// Negative channel for ternary families.
    pub negative: Option<Vec<u16>>,
}

impl CodeMap {
    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        x >= self.margin
            && y >= self.margin
            && x + self.margin < self.width
            && y + self.margin < self.height
    }

    #[inline]
    pub fn primary_at(&self, x: usize, y: usize) -> u16 {
        self.primary[y * self.width + x]
    }
}

/// Computes the code of every valid pixel.
pub fn code_map(img: &GrayImage, cfg: &PatternConfig) -> Result<CodeMap> {
    cfg.validate()?;
    if cfg.bit_width() > 16 {
        return Err(Error::invalid("code maps support at most 16 bits per code"));
    }
    let nb = Neighborhood::from_config(cfg);
    let (w, h) = (img.width(), img.height());
    let m = nb.margin();
    let mut primary = vec![0u16; w * h];
    let mut negative = cfg.family.is_ternary().then(|| vec![0u16; w * h]);
    let mut buf = [0.0; MAX_NEIGHBORS];
    if w > 2 * m && h > 2 * m {
        for y in m..h - m {
            for x in m..w - m {
                let s = &mut buf[..cfg.p];
                nb.sample_into(img, x, y, s);
                let idx = y * w + x;
                match cfg.family {
                    Family::Lbp => primary[idx] = lbp_from_samples(img.get(x, y), s) as u16,
                    Family::CsLbp => {
                        primary[idx] = cs_lbp_from_samples(s, cfg.t, cfg.sign_mode) as u16
                    }
                    Family::Ltp | Family::CsLtp => {
                        let (pos, neg) = if cfg.family == Family::Ltp {
                            ltp_from_samples(img.get(x, y), s, cfg.t)
                        } else {
                            cs_ltp_from_samples(s, cfg.t)
                        };
                        primary[idx] = pos as u16;
                        if let Some(n) = negative.as_mut() {
                            n[idx] = neg as u16;
                        }
                    }
                }
            }
        }
    }
    Ok(CodeMap {
        width: w,
        height: h,
        margin: m,
        primary,
        negative,
    })
}

/// Relative frequency of each raw code over all valid pixels of all images.
/// Only single-channel families (LBP, CS-LBP) are supported.
pub fn pattern_distribution(images: &[GrayImage], cfg: &PatternConfig) -> Result<Vec<f64>> {
    if images.is_empty() {
        return Err(Error::invalid(
            "pattern distribution needs at least one image",
        ));
    }
    if cfg.family.is_ternary() {
        return Err(Error::invalid(
            "pattern distribution is defined for single-channel families",
        ));
    }
    cfg.validate()?;
    let mut counts = vec![0u64; cfg.code_count()];
    for img in images {
        let map = code_map(img, cfg)?;
        let m = map.margin;
        if img.width() <= 2 * m || img.height() <= 2 * m {
            return Err(Error::invalid(format!(
                "{}x{} image has no pixel admitting the neighborhood",
                img.width(),
                img.height()
            )));
        }
        for y in m..map.height - m {
            for x in m..map.width - m {
                counts[map.primary_at(x, y) as usize] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Fraction of a 16-bin CS-LBP distribution that falls on the uniform codes.
pub fn uniform_mass(distribution: &[f64]) -> f64 {
    UNIFORM_CS_LBP_CODES
        .iter()
        .map(|&c| distribution[c as usize])
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(family: Family) -> PatternConfig {
        PatternConfig::with_family(family)
    }

    /// 3x3 image: center `c`, east pixel `e`, everything else `rest`.
    fn patch(c: f64, e: f64, rest: f64) -> GrayImage {
        GrayImage::from_fn(3, 3, |x, y| match (x, y) {
            (1, 1) => c,
            (2, 1) => e,
            _ => rest,
        })
        .unwrap()
    }

    #[test]
    fn offsets_start_east_and_turn_counterclockwise() {
        assert_eq!(neighbor_offset(0, 8, 1.0), (1.0, 0.0));
        assert_eq!(neighbor_offset(2, 8, 1.0), (0.0, -1.0));
        assert_eq!(neighbor_offset(4, 8, 1.0), (-1.0, 0.0));
        assert_eq!(neighbor_offset(6, 8, 1.0), (0.0, 1.0));
    }

    #[test]
    fn lbp_examples() {
        let c = cfg(Family::Lbp);
        let flat = GrayImage::filled(3, 3, 0.5).unwrap();
        assert_eq!(lbp_code(&flat, 1, 1, &c).unwrap().value, 255);
        assert_eq!(lbp_code(&patch(0.5, 0.4, 0.4), 1, 1, &c).unwrap().value, 0);
        assert_eq!(lbp_code(&patch(0.5, 0.6, 0.4), 1, 1, &c).unwrap().value, 1);
        assert_eq!(lbp_code(&flat, 1, 1, &c).unwrap().bit_width, 8);
    }

    #[test]
    fn lbp_rejects_border_and_wrong_family() {
        let img = GrayImage::filled(5, 5, 0.5).unwrap();
        assert!(matches!(
            lbp_code(&img, 0, 2, &cfg(Family::Lbp)),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            lbp_code(&img, 2, 2, &cfg(Family::CsLbp)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ltp_examples() {
        let c = cfg(Family::Ltp);
        let flat = GrayImage::filled(3, 3, 0.5).unwrap();
        let (p, n) = ltp_codes(&flat, 1, 1, &c).unwrap();
        assert_eq!((p.value, n.value), (0, 0));
        let (p, n) = ltp_codes(&patch(0.5, 0.6, 0.5), 1, 1, &c).unwrap();
        assert_eq!((p.value, n.value), (1, 0));
        assert_eq!(
            (p.channel, n.channel),
            (Channel::Positive, Channel::Negative)
        );

        let mut s = [0.5; 8];
        s[0] = 0.3;
        assert_eq!(ltp_from_samples(0.5, &s, 0.022), (0, 1));
        s[0] = 0.6;
        assert_eq!(ltp_from_samples(0.5, &s, 0.022), (1, 0));
    }

    #[test]
    fn ltp_dead_zone_boundaries() {
        // exactly +-t fires, strictly inside does not
        assert_eq!(ltp_from_samples(0.5, &[0.75], 0.25), (1, 0));
        assert_eq!(ltp_from_samples(0.5, &[0.25], 0.25), (0, 1));
        assert_eq!(ltp_from_samples(0.5, &[0.625], 0.25), (0, 0));
    }

    #[test]
    fn cs_lbp_examples() {
        let flat = GrayImage::filled(3, 3, 0.5).unwrap();
        for mode in [SignMode::Signed, SignMode::Absolute] {
            let c = PatternConfig {
                sign_mode: mode,
                ..cfg(Family::CsLbp)
            };
            assert_eq!(cs_lbp_code(&flat, 1, 1, &c).unwrap().value, 0);
            assert_eq!(cs_lbp_code(&flat, 1, 1, &c).unwrap().bit_width, 4);
        }
        let mut s = [0.5; 8];
        s[0] = 0.9;
        s[4] = 0.1;
        assert_eq!(cs_lbp_from_samples(&s, 0.022, SignMode::Signed), 1);
        assert_eq!(cs_lbp_from_samples(&s, 0.022, SignMode::Absolute), 1);
        s[0] = 0.1;
        s[4] = 0.9;
        assert_eq!(cs_lbp_from_samples(&s, 0.022, SignMode::Signed), 0);
        assert_eq!(cs_lbp_from_samples(&s, 0.022, SignMode::Absolute), 1);
    }

    #[test]
    fn cs_lbp_four_neighbors_on_image() {
        // p = 4 samples only axis pixels: east, north, west, south
        let img = GrayImage::from_fn(3, 3, |x, y| match (x, y) {
            (2, 1) => 0.9,
            (0, 1) => 0.1,
            _ => 0.5,
        })
        .unwrap();
        let c = PatternConfig {
            p: 4,
            ..cfg(Family::CsLbp)
        };
        assert_eq!(cs_lbp_code(&img, 1, 1, &c).unwrap().value, 1);
        let mirrored = img.flip_horizontal();
        assert_eq!(cs_lbp_code(&mirrored, 1, 1, &c).unwrap().value, 0);
        let abs = PatternConfig {
            sign_mode: SignMode::Absolute,
            ..c
        };
        assert_eq!(cs_lbp_code(&mirrored, 1, 1, &abs).unwrap().value, 1);
    }

    #[test]
    fn cs_ltp_examples() {
        let flat = GrayImage::filled(3, 3, 0.5).unwrap();
        let (p, n) = cs_ltp_codes(&flat, 1, 1, &cfg(Family::CsLtp)).unwrap();
        assert_eq!((p.value, n.value), (0, 0));
        let mut s = [0.5; 8];
        s[0] = 0.9;
        s[4] = 0.1;
        assert_eq!(cs_ltp_from_samples(&s, 0.022), (1, 0));
        s[0] = 0.1;
        s[4] = 0.9;
        assert_eq!(cs_ltp_from_samples(&s, 0.022), (0, 1));
    }

    #[test]
    fn config_validation() {
        let odd = PatternConfig {
            p: 7,
            ..cfg(Family::CsLbp)
        };
        assert!(odd.validate().is_err());
        let tiny = PatternConfig {
            p: 2,
            ..cfg(Family::CsLtp)
        };
        assert!(tiny.validate().is_err());
        let lbp_odd = PatternConfig {
            p: 7,
            ..cfg(Family::Lbp)
        };
        assert!(lbp_odd.validate().is_ok());
        assert!(PatternConfig {
            r: 0.0,
            ..cfg(Family::Lbp)
        }
        .validate()
        .is_err());
        assert!(PatternConfig {
            t: -0.1,
            ..cfg(Family::Ltp)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn uniform_lbp_examples() {
        let u = |v| is_uniform_lbp(PatternCode::single(v, 8));
        assert!(u(0b1111_1111));
        assert!(u(0b0000_1100));
        assert!(!u(0b0101_0000));
        assert_eq!((0..256).filter(|&v| u(v)).count(), 58);
    }

    #[test]
    fn uniform_cs_lbp_examples() {
        let b = |v| uniform_cs_lbp_bin(PatternCode::single(v, 4));
        assert_eq!(b(0b0000), 0);
        assert_eq!(b(0b1111), 7);
        assert_eq!(b(0b0010), 8);
        assert_eq!((0..16).filter(|&v| b(v) < 8).count(), 8);
        let mut seen: Vec<usize> = (0..16).map(b).filter(|&i| i < 8).collect();
        seen.sort();
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn distribution_of_flat_image() {
        let img = GrayImage::filled(10, 10, 0.4).unwrap();
        let d = pattern_distribution(&[img], &PatternConfig::default()).unwrap();
        assert_eq!(d.len(), 16);
        assert_eq!(d[0], 1.0);
        assert_eq!(uniform_mass(&d), 1.0);
    }

    #[test]
    fn distribution_errors() {
        assert!(pattern_distribution(&[], &PatternConfig::default()).is_err());
        let small = GrayImage::filled(2, 2, 0.4).unwrap();
        assert!(pattern_distribution(&[small], &PatternConfig::default()).is_err());
        let img = GrayImage::filled(4, 4, 0.4).unwrap();
        assert!(pattern_distribution(&[img], &cfg(Family::CsLtp)).is_err());
    }

    #[test]
    fn code_map_matches_pointwise_operator() {
        let img = GrayImage::from_fn(9, 7, |x, y| ((x * 7 + y * 13) % 11) as f64 / 10.0).unwrap();
        let c = cfg(Family::CsLbp);
        let map = code_map(&img, &c).unwrap();
        for y in 1..6 {
            for x in 1..8 {
                assert_eq!(
                    map.primary_at(x, y) as u32,
                    cs_lbp_code(&img, x, y, &c).unwrap().value
                );
            }
        }
        assert!(!map.is_valid(0, 3));
        assert!(!map.is_valid(8, 3));
    }
}
