//! Match hand-made detections against ground truth, build an FPPI curve and
//! write it as CSV and SVG.
//!
//! cargo run --example fppi_eval [out_dir]

use std::path::PathBuf;

use cslbp::detect::{BBox, Detection};
use cslbp::eval::{
    export_curve, fppi_curve, pascal_match, rate_at_fppi, score_thresholds, ImageResult,
};

fn det(x: f64, y: f64, score: f64) -> Detection {
    Detection {
        bbox: BBox::new(x, y, 64.0, 128.0),
        score,
        scale_index: 0,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fppi_out".into()));
    std::fs::create_dir_all(&out)?;

    let images = vec![
        ImageResult {
            detections: vec![
                det(10.0, 10.0, 2.0),
                det(14.0, 12.0, 1.5),
                det(200.0, 40.0, 0.4),
            ],
            ground_truth: vec![BBox::new(12.0, 10.0, 64.0, 128.0)],
        },
        ImageResult {
            detections: vec![det(100.0, 60.0, 0.9)],
            ground_truth: vec![
                BBox::new(98.0, 64.0, 64.0, 128.0),
                BBox::new(300.0, 0.0, 64.0, 128.0),
            ],
        },
        ImageResult {
            detections: vec![det(50.0, 50.0, 1.1)],
            ground_truth: vec![],
        },
    ];
    for (i, r) in images.iter().enumerate() {
        let m = pascal_match(&r.detections, &r.ground_truth);
        println!(
            "image {i}: {} TP, {} FP, {} missed",
            m.true_positives, m.false_positives, m.missed
        );
    }
    let curve = fppi_curve(&images, &score_thresholds(&images))?;
    for p in &curve {
        println!(
            "t {:>5.2}  rate {:.3}  fppi {:.3}",
            p.threshold, p.detection_rate, p.fppi
        );
    }
    println!("rate at <= 0.5 FPPI: {:.3}", rate_at_fppi(&curve, 0.5));
    export_curve(&curve, &out.join("curve.csv"), Some(&out.join("curve.svg")))?;
    println!("wrote {}", out.display());
    Ok(())
}
