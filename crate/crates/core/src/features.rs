//! Window feature kinds and the plain-text descriptor record format.
//!
//! A record is one line: `<window id> <config hash> <v1> <v2> ...`, fields
//! separated by single spaces, values in shortest round-trip decimal form.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dense::{DenseConfig, DenseExtractor};
use crate::error::{Error, Result};
use crate::image::{gradient_magnitude, GrayImage, Plane};
use crate::patterns::{code_map, CodeMap};
use crate::pyramid::{PyramidConfig, PyramidExtractor, PyramidVariant};

/// A window descriptor configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Dense(DenseConfig),
    Pyramid(PyramidConfig),
}

impl FeatureKind {
    /// Parses the command-line names `dense-cslbp`, `pyr-cslbp`,
    /// `pyr-ucslbp`, `pyr-csltp` and `pyr-ucsltp` with default parameters.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "dense-cslbp" => FeatureKind::Dense(DenseConfig::default()),
            "pyr-cslbp" => FeatureKind::Pyramid(PyramidConfig::new(PyramidVariant::CsLbp)),
            "pyr-ucslbp" => FeatureKind::Pyramid(PyramidConfig::new(PyramidVariant::UniformCsLbp)),
            "pyr-csltp" => FeatureKind::Pyramid(PyramidConfig::new(PyramidVariant::CsLtp)),
            "pyr-ucsltp" => FeatureKind::Pyramid(PyramidConfig::new(PyramidVariant::UniformCsLtp)),
            other => return Err(Error::config(format!("unknown feature '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Dense(_) => "dense-cslbp",
            FeatureKind::Pyramid(p) => match p.variant {
                PyramidVariant::CsLbp => "pyr-cslbp",
                PyramidVariant::UniformCsLbp => "pyr-ucslbp",
                PyramidVariant::CsLtp => "pyr-csltp",
                PyramidVariant::UniformCsLtp => "pyr-ucsltp",
            },
        }
    }

    pub fn window_size(&self) -> (usize, usize) {
        match self {
            FeatureKind::Dense(c) => (c.window_width, c.window_height),
            FeatureKind::Pyramid(c) => (c.window_width, c.window_height),
        }
    }

    pub fn descriptor_len(&self) -> usize {
        match self {
            FeatureKind::Dense(c) => c.descriptor_len(),
            FeatureKind::Pyramid(c) => c.descriptor_len(),
        }
    }

    /// First 16 hex digits of the SHA-256 of the JSON-encoded configuration.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("feature configs serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn extractor(&self) -> Result<Extractor> {
        Ok(match self {
            FeatureKind::Dense(c) => Extractor::Dense(DenseExtractor::new(c)?),
            FeatureKind::Pyramid(c) => Extractor::Pyramid(PyramidExtractor::new(c)?),
        })
    }

    /// Describes one window of exactly the configured size.
    pub fn describe(&self, window: &GrayImage) -> Result<Vec<f64>> {
        let (w, h) = self.window_size();
        if window.width() != w || window.height() != h {
            return Err(Error::invalid(format!(
                "expected a {w}x{h} window, got {}x{}",
                window.width(),
                window.height()
            )));
        }
        let ex = self.extractor()?;
        let maps = ex.prepare(window)?;
        let mut out = vec![0.0; ex.len()];
        ex.describe_at(&maps, 0, 0, &mut out);
        Ok(out)
    }
}

/// Pattern codes and gradient magnitudes of a whole image, shared by every
/// window scanned over it.
#[derive(Clone, Debug)]
pub struct PreparedImage {
    pub codes: CodeMap,
    pub mags: Plane,
}

#[derive(Clone, Debug)]
pub enum Extractor {
    Dense(DenseExtractor),
    Pyramid(PyramidExtractor),
}

impl Extractor {
    pub fn len(&self) -> usize {
        match self {
            Extractor::Dense(e) => e.len(),
            Extractor::Pyramid(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn window_size(&self) -> (usize, usize) {
        match self {
            Extractor::Dense(e) => (e.config().window_width, e.config().window_height),
            Extractor::Pyramid(e) => (e.config().window_width, e.config().window_height),
        }
    }

    pub fn prepare(&self, img: &GrayImage) -> Result<PreparedImage> {
        let pattern = match self {
            Extractor::Dense(e) => e.config().pattern,
            Extractor::Pyramid(e) => e.config().pattern(),
        };
        Ok(PreparedImage {
            codes: code_map(img, &pattern)?,
            mags: gradient_magnitude(img)?,
        })
    }

    /// Describes the window whose top-left pixel is `(x, y)`. The result is
    /// identical to describing the cropped window on its own.
    pub fn describe_at(&self, maps: &PreparedImage, x: usize, y: usize, out: &mut [f64]) {
        let (w, h) = self.window_size();
        assert!(
            x + w <= maps.codes.width && y + h <= maps.codes.height,
            "window exceeds the prepared image"
        );
        match self {
            Extractor::Dense(e) => e.describe_into(&maps.codes, &maps.mags, (x, y), out),
            Extractor::Pyramid(e) => e.describe_into(&maps.codes, &maps.mags, (x, y), out),
        }
    }
}

/// One serialized descriptor.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorRecord {
    pub window_id: String,
    pub config_hash: String,
    pub values: Vec<f64>,
}

pub fn write_records<W: Write>(mut out: W, records: &[DescriptorRecord]) -> std::io::Result<()> {
    for r in records {
        write!(out, "{} {}", r.window_id, r.config_hash)?;
        for v in &r.values {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<DescriptorRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(id), Some(hash)) = (fields.next(), fields.next()) else {
            return Err(Error::parse(
                path,
                i + 1,
                "expected window id and config hash",
            ));
        };
        let values = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        records.push(DescriptorRecord {
            window_id: id.to_string(),
            config_hash: hash.to_string(),
            values,
        });
    }
    Ok(records)
}
