//! Linear and histogram-intersection-kernel SVMs.
//!
//! Scores are raw decision values `f(x) = sum_i coef_i k(sv_i, x) + bias`
//! with `coef_i = alpha_i y_i`; positive means "object".

mod fast;
mod io;
mod smo;

pub use fast::{FastHik, FastHikMode};
pub use io::{load_model, read_model, save_model, write_model};
pub use smo::{kkt_violation, train_svm, TrainOptions, TrainReport, Trained};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel used during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Hik,
}

impl KernelKind {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelKind::Linear => dot(a, b),
            KernelKind::Hik => hik_unchecked(a, b),
        }
    }
}

/// Stored model representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear,
    HikExact,
    HikFast,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::HikExact => "hik_exact",
            ModelKind::HikFast => "hik_fast",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelBody {
    Linear {
        weights: Vec<f64>,
    },
    HikExact {
        support_vectors: Vec<Vec<f64>>,
        /// `alpha_i * y_i` per support vector.
        coefficients: Vec<f64>,
    },
    HikFast(FastHik),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel {
    pub feature_length: usize,
    pub bias: f64,
    /// Box constraint the model was trained with (informational).
    pub c: f64,
    pub body: ModelBody,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn hik_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum()
}

/// Histogram intersection `sum_i min(a_i, b_i)`.
pub fn hik(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "histogram lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(hik_unchecked(a, b))
}

/// Kernel matrix of `vectors` under `kernel`, row-major `n x n`.
pub fn gram_matrix(vectors: &[Vec<f64>], kernel: KernelKind) -> Vec<f64> {
    let n = vectors.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| kernel.eval(&vectors[i], &vectors[j]))
                .collect()
        })
        .collect();
    rows.concat()
}

/// Score averaging of two classifiers evaluated on the same window.
pub fn averaged_score(score1: f64, score2: f64) -> f64 {
    0.5 * (score1 + score2)
}

impl SvmModel {
    pub fn linear(weights: Vec<f64>, bias: f64) -> Self {
        SvmModel {
            feature_length: weights.len(),
            bias,
            c: 0.0,
            body: ModelBody::Linear { weights },
        }
    }

    pub fn hik_exact(
        support_vectors: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
    ) -> Result<Self> {
        if support_vectors.len() != coefficients.len() {
            return Err(Error::invalid(
                "one coefficient per support vector required",
            ));
        }
        let Some(first) = support_vectors.first() else {
            return Err(Error::invalid(
                "kernel model needs at least one support vector",
            ));
        };
        let len = first.len();
        if support_vectors.iter().any(|sv| sv.len() != len) {
            return Err(Error::invalid("support vectors differ in length"));
        }
        Ok(SvmModel {
            feature_length: len,
            bias,
            c: 0.0,
            body: ModelBody::HikExact {
                support_vectors,
                coefficients,
            },
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self.body {
            ModelBody::Linear { .. } => ModelKind::Linear,
            ModelBody::HikExact { .. } => ModelKind::HikExact,
            ModelBody::HikFast(_) => ModelKind::HikFast,
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_length {
            return Err(Error::invalid(format!(
                "feature length {} does not match model length {}",
                x.len(),
                self.feature_length
            )));
        }
        Ok(())
    }

    /// Decision value with whichever evaluation the model kind implies.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> f64 {
        match &self.body {
            ModelBody::Linear { weights } => dot(weights, x) + self.bias,
            ModelBody::HikExact {
                support_vectors,
                coefficients,
            } => {
                support_vectors
                    .iter()
                    .zip(coefficients)
                    .map(|(sv, c)| c * hik_unchecked(sv, x))
                    .sum::<f64>()
                    + self.bias
            }
            ModelBody::HikFast(f) => f.eval(x) + self.bias,
        }
    }

    /// `w . x + bias`; only for linear models.
    pub fn linear_score(&self, x: &[f64]) -> Result<f64> {
        if self.kind() != ModelKind::Linear {
            return Err(Error::config("linear_score needs a linear model"));
        }
        self.score(x)
    }

    /// Exact kernel expansion; only for exact HIK models.
    pub fn hik_score_exact(&self, x: &[f64]) -> Result<f64> {
        if self.kind() != ModelKind::HikExact {
            return Err(Error::config("hik_score_exact needs an exact HIK model"));
        }
        self.score(x)
    }

    /// Precomputes per-dimension lookup tables from an exact HIK model.
    pub fn build_fast_hik(&self, samples_per_dim: usize) -> Result<SvmModel> {
        let ModelBody::HikExact {
            support_vectors,
            coefficients,
        } = &self.body
        else {
            return Err(Error::config("fast HIK tables need an exact HIK model"));
        };
        if samples_per_dim < 2 {
            return Err(Error::invalid("need at least 2 samples per dimension"));
        }
        Ok(SvmModel {
            feature_length: self.feature_length,
            bias: self.bias,
            c: self.c,
            body: ModelBody::HikFast(FastHik::build(
                support_vectors,
                coefficients,
                samples_per_dim,
                FastHikMode::Exact,
            )),
        })
    }

    /// Switches a fast model between exact breakpoint search and grid
    /// interpolation. No-op on other kinds.
    pub fn with_fast_mode(mut self, mode: FastHikMode) -> Self {
        if let ModelBody::HikFast(f) = &mut self.body {
            f.mode = mode;
        }
        self
    }

    /// Number of stored support vectors (0 for linear models).
    pub fn support_vector_count(&self) -> usize {
        match &self.body {
            ModelBody::Linear { .. } => 0,
            ModelBody::HikExact { coefficients, .. } => coefficients.len(),
            ModelBody::HikFast(f) => f.coefficients.len(),
        }
    }
}
