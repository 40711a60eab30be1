//! C-SVC dual solver: sequential minimal optimization with second-order
//! working-set selection.
//!
//! Solves `min 1/2 a'Qa - e'a` subject to `0 <= a_i <= C`, `y'a = 0`, where
//! `Q_ij = y_i y_j k(x_i, x_j)`. The full kernel matrix is precomputed, which
//! bounds practical problem sizes to a few thousand examples.

use crate::error::{Error, Result};
use crate::svm::{gram_matrix, KernelKind, ModelBody, SvmModel};

const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    pub kernel: KernelKind,
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iterations: usize,
}

impl TrainOptions {
    pub fn new(kernel: KernelKind, c: f64) -> Self {
        TrainOptions {
            kernel,
            c,
            tol: 1e-3,
            max_iterations: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Maximal violating pair gap `m(a) - M(a)` at exit.
    pub kkt_gap: f64,
    pub support_vectors: usize,
}

/// A trained model together with the dual solution it came from.
#[derive(Clone, Debug)]
pub struct Trained {
    pub model: SvmModel,
    /// Dual variables, one per training example.
    pub alphas: Vec<f64>,
    pub report: TrainReport,
}

/// Trains a binary SVM. `labels` are `+1` / `-1` (any positive value counts
/// as `+1`). Linear models collapse the dual into one weight vector; HIK
/// models keep the support vectors.
pub fn train_svm(examples: &[Vec<f64>], labels: &[f64], opts: &TrainOptions) -> Result<Trained> {
    if examples.len() != labels.len() {
        return Err(Error::invalid("one label per example required"));
    }
    if !(opts.c > 0.0) {
        return Err(Error::invalid(format!(
            "C must be positive, got {}",
            opts.c
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l > 0.0 { 1.0 } else { -1.0 })
        .collect();
    let npos = y.iter().filter(|&&v| v > 0.0).count();
    if npos == 0 || npos == y.len() {
        return Err(Error::invalid("training needs examples of both classes"));
    }
    let len = examples[0].len();
    if examples.iter().any(|e| e.len() != len) {
        return Err(Error::invalid("examples differ in length"));
    }

    let kernel = gram_matrix(examples, opts.kernel);
    let (alphas, rho, report) = solve(&kernel, &y, opts);

    let coef: Vec<(usize, f64)> = alphas
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(i, &a)| (i, a * y[i]))
        .collect();
    let body = match opts.kernel {
        KernelKind::Linear => {
            let mut w = vec![0.0; len];
            for &(i, c) in &coef {
                for (wd, xd) in w.iter_mut().zip(&examples[i]) {
                    *wd += c * xd;
                }
            }
            ModelBody::Linear { weights: w }
        }
        KernelKind::Hik => ModelBody::HikExact {
            support_vectors: coef.iter().map(|&(i, _)| examples[i].clone()).collect(),
            coefficients: coef.iter().map(|&(_, c)| c).collect(),
        },
    };
    Ok(Trained {
        model: SvmModel {
            feature_length: len,
            bias: -rho,
            c: opts.c,
            body,
        },
        alphas,
        report: TrainReport {
            support_vectors: coef.len(),
            ..report
        },
    })
}

fn solve(k: &[f64], y: &[f64], opts: &TrainOptions) -> (Vec<f64>, f64, TrainReport) {
    let n = y.len();
    let c = opts.c;
    let qd: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iterations {
        // i: maximal -y_t G_t over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 {
                !upper(alpha[t])
            } else {
                !lower(alpha[t])
            };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        // j: second-order choice over I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let in_low = if y[t] > 0.0 {
                    !lower(alpha[t])
                } else {
                    !upper(alpha[t])
                };
                if !in_low {
                    continue;
                }
                let yg = y[t] * grad[t];
                gmax2 = gmax2.max(yg);
                let diff = gmax + yg;
                if diff > 0.0 {
                    let quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * k[i * n + t];
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        gap = gmax + gmax2;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gap < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // rho from free variables, or the midpoint of the feasible interval
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    };
    (
        alpha,
        rho,
        TrainReport {
            iterations,
            converged,
            kkt_gap: gap,
            support_vectors: 0,
        },
    )
}

/// Largest violation of the C-SVC optimality conditions for a dual
/// solution, measured on margins `y_i f(x_i)`:
///
/// - `alpha = 0` requires margin `>= 1`
/// - `0 < alpha < C` requires margin `== 1`
/// - `alpha = C` requires margin `<= 1`
///
/// `decision` holds `f(x_i)`; alphas within `bound_tol` of a bound count as
/// at the bound.
pub fn kkt_violation(
    alphas: &[f64],
    labels: &[f64],
    decision: &[f64],
    c: f64,
    bound_tol: f64,
) -> f64 {
    alphas
        .iter()
        .zip(labels)
        .zip(decision)
        .map(|((&a, &l), &f)| {
            let y = if l > 0.0 { 1.0 } else { -1.0 };
            let m = y * f;
            if a <= bound_tol {
                (1.0 - m).max(0.0)
            } else if a >= c - bound_tol {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_pair_splits_at_midpoint() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![-1.0, 1.0];
        let t = train_svm(&x, &y, &TrainOptions::new(KernelKind::Linear, 1e3)).unwrap();
        let m = &t.model;
        assert_abs_diff_eq!(m.score(&[0.5]).unwrap(), 0.0, epsilon = 1e-9);
        assert!(m.score(&[0.0]).unwrap() < 0.0);
        assert!(m.score(&[1.0]).unwrap() > 0.0);
        // hard margin: w = 2, b = -1
        assert_abs_diff_eq!(m.score(&[1.0]).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dual_constraints_hold() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 5) as f64 / 4.0, (i / 5) as f64 / 3.0])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|p| if p[0] + 0.3 * p[1] > 0.6 { 1.0 } else { -1.0 })
            .collect();
        let opts = TrainOptions::new(KernelKind::Hik, 2.0);
        let t = train_svm(&x, &y, &opts).unwrap();
        assert!(t.report.converged);
        assert!(t.alphas.iter().all(|&a| (0.0..=2.0).contains(&a)));
        let s: f64 = t.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_single_class_and_bad_c() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(train_svm(&x, &[1.0, 1.0], &TrainOptions::new(KernelKind::Linear, 1.0)).is_err());
        assert!(train_svm(
            &x,
            &[1.0, -1.0],
            &TrainOptions::new(KernelKind::Linear, 0.0)
        )
        .is_err());
    }
}
