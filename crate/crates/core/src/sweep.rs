//! Dense-descriptor parameter sweeps scored by per-window ROC.
//!
//! For every configuration a linear SVM is trained on a seeded half of the
//! windows and the classification rate of the held-out positives is read
//! off the ROC at a fixed false-positive rate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{DenseConfig, NormScheme};
use crate::error::{Error, Result};
use crate::eval::{perwindow_roc, rate_at_fpr};
use crate::features::FeatureKind;
use crate::image::GrayImage;
use crate::svm::{train_svm, KernelKind, TrainOptions};
use crate::training::describe_all;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub c: f64,
    /// False-positive rate at which configurations are compared.
    pub fpr: f64,
    /// Share of each class used for training.
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            c: 0.1,
            fpr: 0.01,
            train_fraction: 0.5,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub name: String,
    pub config: DenseConfig,
    pub rate: f64,
    pub test_positives: usize,
    pub test_negatives: usize,
}

/// The one-factor-at-a-time grid around the default configuration: block
/// size, Gaussian weighting, interpolation, normalization scheme and block
/// overlap.
pub fn default_grid() -> Vec<(String, DenseConfig)> {
    let base = DenseConfig::default();
    let mut grid = vec![("baseline".to_string(), base.clone())];
    grid.push((
        "block16".into(),
        DenseConfig {
            block: 16,
            cell: 8,
            block_stride: 8,
            gaussian_sigma: Some(8.0),
            ..base.clone()
        },
    ));
    grid.push((
        "no-gaussian".into(),
        DenseConfig {
            gaussian_sigma: None,
            ..base.clone()
        },
    ));
    grid.push((
        "no-interpolation".into(),
        DenseConfig {
            interpolate: false,
            ..base.clone()
        },
    ));
    for n in NormScheme::ALL {
        if n != base.norm {
            grid.push((
                format!("norm-{}", n.name()),
                DenseConfig {
                    norm: n,
                    ..base.clone()
                },
            ));
        }
    }
    grid.push((
        "no-overlap".into(),
        DenseConfig {
            block_stride: 32,
            ..base.clone()
        },
    ));
    grid
}

fn split<T: Clone>(items: &[T], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<T>, Vec<T>) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(rng);
    let n = ((items.len() as f64 * fraction).round() as usize).clamp(1, items.len() - 1);
    (
        idx[..n].iter().map(|&i| items[i].clone()).collect(),
        idx[n..].iter().map(|&i| items[i].clone()).collect(),
    )
}

pub fn sweep_harness(
    positives: &[GrayImage],
    negatives: &[GrayImage],
    grid: &[(String, DenseConfig)],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if positives.len() < 2 || negatives.len() < 2 {
        return Err(Error::invalid(
            "sweep needs at least two windows of each class",
        ));
    }
    if grid.is_empty() {
        return Err(Error::invalid("empty configuration grid"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (pos_train, pos_test) = split(positives, opts.train_fraction, &mut rng);
    let (neg_train, neg_test) = split(negatives, opts.train_fraction, &mut rng);
    grid.iter()
        .map(|(name, cfg)| {
            let feature = FeatureKind::Dense(cfg.clone());
            let train: Vec<GrayImage> = pos_train.iter().chain(&neg_train).cloned().collect();
            let labels: Vec<f64> = (0..train.len())
                .map(|i| if i < pos_train.len() { 1.0 } else { -1.0 })
                .collect();
            let x = describe_all(&feature, &train)?;
            let model =
                train_svm(&x, &labels, &TrainOptions::new(KernelKind::Linear, opts.c))?.model;
            let score = |ws: &[GrayImage]| -> Result<Vec<f64>> {
                describe_all(&feature, ws)?
                    .iter()
                    .map(|d| model.score(d))
                    .collect()
            };
            let roc = perwindow_roc(&score(&pos_test)?, &score(&neg_test)?)?;
            Ok(SweepRow {
                name: name.clone(),
                config: cfg.clone(),
                rate: rate_at_fpr(&roc, opts.fpr),
                test_positives: pos_test.len(),
                test_negatives: neg_test.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_each_factor() {
        let g = default_grid();
        assert!(g.iter().all(|(_, c)| c.validate().is_ok()));
        let names: Vec<&str> = g.iter().map(|(n, _)| n.as_str()).collect();
        for n in [
            "baseline",
            "block16",
            "no-gaussian",
            "no-interpolation",
            "norm-l2hys",
            "no-overlap",
        ] {
            assert!(names.contains(&n), "{n}");
        }
    }

    #[test]
    fn empty_sets_are_rejected() {
        let w = GrayImage::filled(64, 128, 0.5).unwrap();
        let r = sweep_harness(
            &[],
            &[w.clone(), w],
            &default_grid(),
            &SweepOptions::default(),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
