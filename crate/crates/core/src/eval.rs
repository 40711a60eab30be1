//! Dataset ingestion, PASCAL matching, per-image FPPI curves, per-window ROC
//! and curve export.
//!
//! Dataset layout:
//!
//! ```text
//! root/pos/<name>.png          images containing objects
//! root/annotations/<name>.txt  one "x y w h" line per object
//! root/neg/<name>.png          object-free images
//! ```

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::{BBox, Detection};
use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "jpg", "jpeg"];

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedImage {
    pub path: PathBuf,
    pub boxes: Vec<BBox>,
}

impl AnnotatedImage {
    /// File stem used as the image id in detection output.
    pub fn id(&self) -> String {
        image_id(&self.path)
    }
}

pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub positives: Vec<AnnotatedImage>,
    pub negatives: Vec<PathBuf>,
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn image_dimensions(path: &Path) -> Result<(u32, u32)> {
    image::image_dimensions(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parses "x y w h" lines; blank lines and `#` comments are skipped.
pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<BBox>> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let [x, y, w, h] = v[..] else {
            return Err(Error::parse(path, i + 1, "expected four numbers: x y w h"));
        };
        if !(w > 0.0 && h > 0.0) || !v.iter().all(|c| c.is_finite()) {
            return Err(Error::parse(
                path,
                i + 1,
                "box needs finite coordinates and positive size",
            ));
        }
        boxes.push(BBox::new(x, y, w, h));
    }
    Ok(boxes)
}

/// Reads a dataset directory. Images are checked for readability but not
/// decoded.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let pos_dir = root.join("pos");
    let neg_dir = root.join("neg");
    let ann_dir = root.join("annotations");
    for d in [&pos_dir, &neg_dir, &ann_dir] {
        if !d.is_dir() {
            return Err(Error::invalid(format!(
                "missing dataset directory {}",
                d.display()
            )));
        }
    }
    let mut positives = Vec::new();
    for path in image_files(&pos_dir)? {
        let (w, h) = image_dimensions(&path)?;
        let ann = ann_dir.join(format!("{}.txt", image_id(&path)));
        let text = std::fs::read_to_string(&ann).map_err(|e| Error::io(&ann, e))?;
        let boxes = parse_annotations(&text, &ann)?;
        for (i, b) in boxes.iter().enumerate() {
            if b.x < 0.0 || b.y < 0.0 || b.x + b.w > w as f64 || b.y + b.h > h as f64 {
                return Err(Error::invalid(format!(
                    "{}: box {} lies outside the {w}x{h} image",
                    ann.display(),
                    i + 1
                )));
            }
        }
        positives.push(AnnotatedImage { path, boxes });
    }
    let negatives = image_files(&neg_dir)?;
    for n in &negatives {
        image_dimensions(n)?;
    }
    Ok(Dataset {
        positives,
        negatives,
    })
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub true_positives: usize,
    pub false_positives: usize,
    pub missed: usize,
    /// Per detection, the ground truth it matched.
    pub assignment: Vec<Option<usize>>,
}

/// Greedy one-to-one matching in the given (descending score) order: each
/// detection takes the unmatched ground truth with the highest IoU if that
/// IoU exceeds 0.5.
pub fn pascal_match(dets: &[Detection], gts: &[BBox]) -> MatchResult {
    let mut taken = vec![false; gts.len()];
    let mut res = MatchResult::default();
    for d in dets {
        let best = gts
            .iter()
            .enumerate()
            .filter(|(g, _)| !taken[*g])
            .map(|(g, b)| (g, d.bbox.iou(b)))
            .fold(None, |acc: Option<(usize, f64)>, (g, o)| match acc {
                Some((_, bo)) if bo >= o => acc,
                _ => Some((g, o)),
            });
        match best {
            Some((g, o)) if o > 0.5 => {
                taken[g] = true;
                res.true_positives += 1;
                res.assignment.push(Some(g));
            }
            _ => {
                res.false_positives += 1;
                res.assignment.push(None);
            }
        }
    }
    res.missed = gts.len() - res.true_positives;
    res
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub detection_rate: f64,
    pub fppi: f64,
}

/// Detections and ground truth of one evaluated image.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImageResult {
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<BBox>,
}

/// Every distinct detection score, descending.
pub fn score_thresholds(images: &[ImageResult]) -> Vec<f64> {
    let mut s: Vec<f64> = images
        .iter()
        .flat_map(|r| r.detections.iter().map(|d| d.score))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.dedup();
    s
}

/// One point per threshold: detections scoring `>= threshold` are matched
/// per image; rate is matched ground truths over all ground truths, FPPI is
/// false positives over images.
pub fn fppi_curve(images: &[ImageResult], thresholds: &[f64]) -> Result<Vec<CurvePoint>> {
    if images.is_empty() {
        return Err(Error::invalid("FPPI curve needs at least one image"));
    }
    let total_gt: usize = images.iter().map(|r| r.ground_truth.len()).sum();
    if total_gt == 0 {
        return Err(Error::invalid(
            "FPPI curve needs at least one ground-truth box",
        ));
    }
    let sorted: Vec<Vec<Detection>> = images
        .iter()
        .map(|r| {
            let mut d = r.detections.clone();
            d.sort_by(|a, b| b.score.total_cmp(&a.score));
            d
        })
        .collect();
    Ok(thresholds
        .iter()
        .map(|&t| {
            let (mut tp, mut fp) = (0usize, 0usize);
            for (dets, r) in sorted.iter().zip(images) {
                let n = dets.partition_point(|d| d.score >= t);
                let m = pascal_match(&dets[..n], &r.ground_truth);
                tp += m.true_positives;
                fp += m.false_positives;
            }
            CurvePoint {
                threshold: t,
                detection_rate: tp as f64 / total_gt as f64,
                fppi: fp as f64 / images.len() as f64,
            }
        })
        .collect())
}

/// Best detection rate among points with FPPI at most `max_fppi` (0 if none).
pub fn rate_at_fppi(curve: &[CurvePoint], max_fppi: f64) -> f64 {
    curve
        .iter()
        .filter(|p| p.fppi <= max_fppi)
        .map(|p| p.detection_rate)
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub classification_rate: f64,
}

/// Per-window ROC: a window is classified positive when its score is
/// `>= threshold`. Starts with `(0, 0)` at an infinite threshold, then one
/// point per distinct score, descending.
pub fn perwindow_roc(pos: &[f64], neg: &[f64]) -> Result<Vec<RocPoint>> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("ROC needs positive and negative scores"));
    }
    let mut p = pos.to_vec();
    let mut n = neg.to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    n.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = p.iter().chain(&n).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = vec![RocPoint {
        threshold: f64::INFINITY,
        false_positive_rate: 0.0,
        classification_rate: 0.0,
    }];
    for t in thresholds {
        out.push(RocPoint {
            threshold: t,
            false_positive_rate: n.partition_point(|&s| s >= t) as f64 / n.len() as f64,
            classification_rate: p.partition_point(|&s| s >= t) as f64 / p.len() as f64,
        });
    }
    Ok(out)
}

/// Best classification rate among points with FPR at most `max_fpr`.
pub fn rate_at_fpr(roc: &[RocPoint], max_fpr: f64) -> f64 {
    roc.iter()
        .filter(|p| p.false_positive_rate <= max_fpr)
        .map(|p| p.classification_rate)
        .fold(0.0, f64::max)
}

pub fn write_curve_csv<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::invalid(format!("writing curve: {e}"));
    w.write_record(["threshold", "detection_rate", "fppi"])
        .map_err(err)?;
    for p in points {
        w.write_record([
            p.threshold.to_string(),
            p.detection_rate.to_string(),
            p.fppi.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("writing curve: {e}")))
}

pub fn read_curve_csv<R: BufRead>(input: R, path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["threshold", "detection_rate", "fppi"] {
        return Err(Error::parse(
            path,
            1,
            "expected header threshold,detection_rate,fppi",
        ));
    }
    let mut points = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let v = rec
            .iter()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        let [threshold, detection_rate, fppi] = v[..] else {
            return Err(Error::parse(path, line, "expected three fields"));
        };
        points.push(CurvePoint {
            threshold,
            detection_rate,
            fppi,
        });
    }
    Ok(points)
}

/// Standalone SVG plot of detection rate against FPPI, one polyline per
/// curve.
pub fn curves_svg(curves: &[(&str, &[CurvePoint])]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 40.0;
    const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let max_fppi = curves
        .iter()
        .flat_map(|(_, c)| c.iter().map(|p| p.fppi))
        .fold(0.0, f64::max)
        .max(1e-9);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">FPPI (0 to {max_fppi:.3})</text>\n",
        W / 2.0,
        H - 10.0
    ));
    s.push_str(&format!(
        "<text x=\"12\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">detection rate</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for (i, (name, pts)) in curves.iter().enumerate() {
        let mut sorted: Vec<&CurvePoint> = pts.iter().collect();
        sorted.sort_by(|a, b| {
            a.fppi
                .total_cmp(&b.fppi)
                .then(a.detection_rate.total_cmp(&b.detection_rate))
        });
        let coords: Vec<String> = sorted
            .iter()
            .map(|p| {
                let x = M + p.fppi / max_fppi * (W - 2.0 * M);
                let y = H - M - p.detection_rate * (H - 2.0 * M);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let color = COLORS[i % COLORS.len()];
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"><title>{}</title></polyline>\n",
            coords.join(" "),
            xml_escape(name)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Writes the curve as CSV and, if `svg` is given, as an SVG plot.
pub fn export_curve(points: &[CurvePoint], csv_path: &Path, svg: Option<&Path>) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("nothing to export"));
    }
    let f = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    write_curve_csv(std::io::BufWriter::new(f), points)?;
    if let Some(p) = svg {
        std::fs::write(p, curves_svg(&[("curve", points)])).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

/// Detection CSV: header `image,x,y,w,h,score`, one row per detection.
pub fn write_detections_csv<W: Write>(out: W, rows: &[(String, Detection)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::invalid(format!("writing detections: {e}"));
    w.write_record(["image", "x", "y", "w", "h", "score"])
        .map_err(err)?;
    for (id, d) in rows {
        let b = d.bbox;
        w.write_record([
            id.clone(),
            b.x.to_string(),
            b.y.to_string(),
            b.w.to_string(),
            b.h.to_string(),
            d.score.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("writing detections: {e}")))
}

pub fn read_detections_csv(path: &Path) -> Result<Vec<(String, Detection)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if rec.len() != 6 {
            return Err(Error::parse(path, line, "expected image,x,y,w,h,score"));
        }
        let v = rec
            .iter()
            .skip(1)
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        rows.push((
            rec[0].to_string(),
            Detection {
                bbox: BBox::new(v[0], v[1], v[2], v[3]),
                score: v[4],
                scale_index: 0,
            },
        ));
    }
    Ok(rows)
}
