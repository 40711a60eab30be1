//! Train dense+linear and pyramid+HIK detectors on a synthetic corpus with
//! hard-negative mining, then evaluate each and their score average on a
//! held-out split.
//!
//! cargo run --release --example detect_synthetic [seed] [dense-norm]

use std::time::Instant;

use cslbp::dense::NormScheme;
use cslbp::detect::{Detector, ScanConfig};
use cslbp::eval::{fppi_curve, rate_at_fppi, score_thresholds, ImageResult};
use cslbp::features::FeatureKind;
use cslbp::svm::KernelKind;
use cslbp::synth::{generate_corpus, SynthConfig};
use cslbp::training::{positive_windows, random_negative_windows, train_detector, TrainingConfig};

fn main() -> cslbp::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let start = Instant::now();
    let corpus = generate_corpus(&SynthConfig {
        seed,
        ..SynthConfig::default()
    })?;
    let (train, test) = corpus.split_at(30);

    let pos_images: Vec<_> = train
        .iter()
        .filter(|s| !s.boxes.is_empty())
        .map(|s| (s.image.clone(), s.boxes.clone()))
        .collect();
    let neg_images: Vec<_> = train
        .iter()
        .filter(|s| s.boxes.is_empty())
        .map(|s| s.image.clone())
        .collect();
    let positives = positive_windows(&pos_images, (64, 128))?;
    let negatives =
        random_negative_windows(&neg_images, 20, (64, 128), &ScanConfig::default(), 11)?;
    println!(
        "train: {} positive windows, {} random negatives from {} images",
        positives.len(),
        negatives.len(),
        neg_images.len()
    );

    let mut dense = FeatureKind::from_name("dense-cslbp")?;
    if let FeatureKind::Dense(c) = &mut dense {
        c.norm = match std::env::args().nth(2) {
            Some(n) => n.parse()?,
            None => NormScheme::L1SqrtElem,
        };
    }
    let mut pipelines = Vec::new();
    for (feature, kernel) in [
        (dense, KernelKind::Linear),
        (FeatureKind::from_name("pyr-cslbp")?, KernelKind::Hik),
    ] {
        let t = Instant::now();
        let trained = train_detector(
            &feature,
            &positives,
            &negatives,
            &neg_images,
            &TrainingConfig::new(kernel),
        )?;
        println!(
            "{}: mined {} hard negatives, {} support vectors ({:.1?})",
            feature.name(),
            trained.mined,
            trained
                .stages
                .last()
                .map_or(0, |s| s.solver.support_vectors),
            t.elapsed()
        );
        pipelines.push(trained.pipeline);
    }

    let eval_scan = ScanConfig {
        score_threshold: -1.0,
        nms_overlap: 0.3,
        ..ScanConfig::default()
    };
    let detectors = [
        ("dense+linear", Detector::single(pipelines[0].clone())),
        ("pyramid+hik", Detector::single(pipelines[1].clone())),
        (
            "averaged",
            Detector::combined(pipelines[0].clone(), pipelines[1].clone())?,
        ),
    ];
    for (name, det) in &detectors {
        let results = test
            .iter()
            .map(|s| {
                Ok(ImageResult {
                    detections: det.detect(&s.image, &eval_scan)?,
                    ground_truth: s.boxes.clone(),
                })
            })
            .collect::<cslbp::Result<Vec<_>>>()?;
        let curve = fppi_curve(&results, &score_thresholds(&results))?;
        println!(
            "{name:<13} detection rate {:.3} at <= 0.2 FPPI, {:.3} at <= 1 FPPI",
            rate_at_fppi(&curve, 0.2),
            rate_at_fppi(&curve, 1.0)
        );
    }
    println!("total {:.1?}", start.elapsed());
    Ok(())
}
