//! Grayscale images on the normalized `[0, 1]` graylevel scale.
//!
//! Coordinates follow the usual raster convention: `x` grows to the right,
//! `y` grows downward and `(0, 0)` is the center of the top-left pixel.

use std::path::Path;

use crate::error::{Error, Result};

/// Immutable grayscale image with graylevels in `[0, 1]`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// A dense 2-D array of reals, row-major. Used for gradient magnitudes and
/// edge-energy layers, which are not bounded to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

impl GrayImage {
    /// Builds an image from already-normalized graylevels.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("graylevel {v} outside [0, 1]")));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel. Values are
    /// validated like [`GrayImage::new`].
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage::new(width, height, data)
    }

    /// A constant image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Copies out the `width x height` region whose top-left pixel is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<GrayImage> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(Error::range(format!(
                "crop {width}x{height}+{x}+{y} exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for row in y..y + height {
            let start = row * self.width + x;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Crops a `width x height` region centered in the image.
    pub fn center_crop(&self, width: usize, height: usize) -> Result<GrayImage> {
        if width > self.width || height > self.height {
            return Err(Error::invalid(format!(
                "cannot center-crop {width}x{height} from {}x{}",
                self.width, self.height
            )));
        }
        self.crop(
            (self.width - width) / 2,
            (self.height - height) / 2,
            width,
            height,
        )
    }

    pub fn flip_horizontal(&self) -> GrayImage {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks(self.width) {
            data.extend(row.iter().rev());
        }
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Adds `offset` to every graylevel. Fails if any value leaves `[0, 1]`.
    pub fn shifted(&self, offset: f64) -> Result<GrayImage> {
        GrayImage::new(
            self.width,
            self.height,
            self.data.iter().map(|v| v + offset).collect(),
        )
    }

    /// Resamples to `width x height` with bilinear interpolation, aligning
    /// pixel centers. No anti-alias prefilter is applied.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Result<GrayImage> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("resize target must be at least 1x1"));
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        self.resample(width, height, sx, sy)
    }

    /// Resamples so that output pixel `(i, j)` reads source position
    /// `((i + 0.5) * sx - 0.5, (j + 0.5) * sy - 0.5)`, clamped to the image.
    pub(crate) fn resample(
        &self,
        width: usize,
        height: usize,
        sx: f64,
        sy: f64,
    ) -> Result<GrayImage> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            let src_y = ((j as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
            for i in 0..width {
                let src_x = ((i as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
                data.push(self.bilinear_unchecked(src_x, src_y));
            }
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    /// Writes an 8-bit grayscale file; the format follows the extension
    /// (`.png` or `.pgm`).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer length matches dimensions");
        buf.save(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    #[inline]
    fn bilinear_unchecked(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let ix = x0 as usize;
        let iy = y0 as usize;
        self.lerp_at(ix, iy, x - x0, y - y0)
    }

    /// Bilinear blend of the 2x2 patch anchored at `(ix, iy)`. Neighbors with a
    /// zero weight are never read, so `(ix, iy)` may sit on the last row or
    /// column when the matching fraction is zero. The lerp form returns the
    /// exact pixel value on flat patches.
    #[inline]
    pub(crate) fn lerp_at(&self, ix: usize, iy: usize, fx: f64, fy: f64) -> f64 {
        let w = self.width;
        let row = iy * w;
        let a = self.data[row + ix];
        let top = if fx > 0.0 {
            a + fx * (self.data[row + ix + 1] - a)
        } else {
            a
        };
        if fy > 0.0 {
            let row2 = row + w;
            let c = self.data[row2 + ix];
            let bottom = if fx > 0.0 {
                c + fx * (self.data[row2 + ix + 1] - c)
            } else {
                c
            };
            top + fy * (bottom - top)
        } else {
            top
        }
    }
}

/// Maps 8-bit intensities onto `[0, 1]` by dividing by 255.
pub fn normalize_graylevel(width: usize, height: usize, raw: &[u8]) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("empty image"));
    }
    if raw.len() != width * height {
        return Err(Error::invalid(format!(
            "raw length {} does not match {}x{}",
            raw.len(),
            width,
            height
        )));
    }
    Ok(GrayImage {
        width,
        height,
        data: raw.iter().map(|&v| v as f64 / 255.0).collect(),
    })
}

/// 16-bit counterpart of [`normalize_graylevel`], scaled by 65535.
pub fn normalize_graylevel_u16(width: usize, height: usize, raw: &[u16]) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("empty image"));
    }
    if raw.len() != width * height {
        return Err(Error::invalid(format!(
            "raw length {} does not match {}x{}",
            raw.len(),
            width,
            height
        )));
    }
    Ok(GrayImage {
        width,
        height,
        data: raw.iter().map(|&v| v as f64 / 65535.0).collect(),
    })
}

/// Bilinear sample at a real-valued position.
pub fn sample_bilinear(img: &GrayImage, x: f64, y: f64) -> Result<f64> {
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;
    if !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y) {
        return Err(Error::range(format!(
            "sample ({x}, {y}) outside {}x{} image",
            img.width, img.height
        )));
    }
    Ok(img.bilinear_unchecked(x, y))
}

/// Per-pixel gradient magnitude `sqrt(dx^2 + dy^2)` from `[-1, 0, 1] / 2`
/// centered differences, one-sided at the image border. No smoothing.
pub fn gradient_magnitude(img: &GrayImage) -> Result<Plane> {
    let (w, h) = (img.width, img.height);
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!(
            "gradient needs at least 3x3, got {w}x{h}"
        )));
    }
    let d = &img.data;
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let dx = if x == 0 {
                d[row + 1] - d[row]
            } else if x == w - 1 {
                d[row + x] - d[row + x - 1]
            } else {
                (d[row + x + 1] - d[row + x - 1]) * 0.5
            };
            let dy = if y == 0 {
                d[w + x] - d[x]
            } else if y == h - 1 {
                d[row + x] - d[row - w + x]
            } else {
                (d[row + w + x] - d[row - w + x]) * 0.5
            };
            out.data[row + x] = (dx * dx + dy * dy).sqrt();
        }
    }
    Ok(out)
}

/// Decodes a PNG or binary PGM file into a normalized grayscale image.
/// Color inputs are reduced with luma `0.299 R + 0.587 G + 0.114 B`.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    from_dynamic(img)
}

/// Converts a decoded image into the normalized graylevel representation.
pub fn from_dynamic(img: image::DynamicImage) -> Result<GrayImage> {
    use image::DynamicImage as D;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        D::ImageLuma8(buf) => normalize_graylevel(w, h, buf.as_raw()),
        D::ImageLumaA8(_) => normalize_graylevel(w, h, img.to_luma8().as_raw()),
        D::ImageLuma16(buf) => normalize_graylevel_u16(w, h, buf.as_raw()),
        D::ImageLumaA16(_) => normalize_graylevel_u16(w, h, img.to_luma16().as_raw()),
        other => {
            if w == 0 || h == 0 {
                return Err(Error::invalid("empty image"));
            }
            let rgb = other.to_rgb32f();
            let data = rgb
                .pixels()
                .map(|p| {
                    let [r, g, b] = p.0;
                    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).clamp(0.0, 1.0)
                })
                .collect();
            GrayImage::new(w, h, data)
        }
    }
}
