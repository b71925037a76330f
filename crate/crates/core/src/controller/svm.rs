//! Linear hinge-loss SVM trained by dual coordinate descent.
//!
//! Solves `min_a 1/2 a'Qa - e'a` subject to `0 <= a_i <= C` with
//! `Q_ij = y_i y_j x_i.x_j`, where each `x` is augmented with a constant
//! feature so the bias is learned (and regularised) with the weights.
//! Training stops when the projected-gradient spread, the relative
//! primal-dual gap, or the relative dual-objective gain over the last
//! [`OBJECTIVE_WINDOW`] epochs falls to the tolerance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Regularisation constant `C`.
    pub c: f64,
    /// Convergence tolerance shared by the three stopping tests.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seeds the coordinate visiting order.
    pub shuffle_seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-6,
            max_epochs: 20_000,
            shuffle_seed: 0,
        }
    }
}

/// Epochs between objective checks.
pub const OBJECTIVE_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmFit<T> {
    pub weight: Vec<T>,
    pub bias: T,
    pub epochs: usize,
    pub accuracy: f64,
    pub support_vectors: usize,
}

/// Fits `w, b` so that `w.x + b > 0` predicts the `true` class.
pub fn train_linear_svm<T: Scalar>(x: &[Vec<T>], y: &[bool], cfg: &SvmConfig) -> Result<SvmFit<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::SingleClass("svm".into()));
    }
    if cfg.c.is_nan() || cfg.c <= 0.0 {
        return Err(Error::InvalidInput("C must be positive".into()));
    }

    let c = T::lit(cfg.c);
    let tol = T::lit(cfg.tolerance);
    let n = x.len();
    let sign: Vec<T> = y
        .iter()
        .map(|&v| if v { T::one() } else { -T::one() })
        .collect();
    let qii: Vec<T> = x.iter().map(|r| dot(r, r) + T::one()).collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);

    // Variables stuck at a bound are shrunk out of the active set; the
    // stopping test is only trusted once re-checked on the full set.
    let mut active = n;
    let mut pg_max_old = T::infinity();
    let mut pg_min_old = T::neg_infinity();
    let mut converged = false;
    let mut epochs = 0;
    let mut gap = T::infinity();
    let mut last_obj = T::neg_infinity();
    while epochs < cfg.max_epochs {
        epochs += 1;
        order[..active].shuffle(&mut rng);
        let mut max_pg = T::neg_infinity();
        let mut min_pg = T::infinity();
        let mut s = 0;
        while s < active {
            let i = order[s];
            let g = sign[i] * (dot(&w, &x[i]) + b) - T::one();
            let pg = if alpha[i] == T::zero() {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.min(T::zero())
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.max(T::zero())
            } else {
                g
            };
            max_pg = max_pg.max(pg);
            min_pg = min_pg.min(pg);
            if pg != T::zero() {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).max(T::zero()).min(c);
                let delta = (alpha[i] - old) * sign[i];
                if delta != T::zero() {
                    for (wj, &xj) in w.iter_mut().zip(&x[i]) {
                        *wj += delta * xj;
                    }
                    b += delta;
                }
            }
            s += 1;
        }
        if active == 0 {
            max_pg = T::zero();
            min_pg = T::zero();
        }
        gap = max_pg - min_pg;
        if gap <= tol {
            if active == n {
                converged = true;
                break;
            }
            active = n;
            pg_max_old = T::infinity();
            pg_min_old = T::neg_infinity();
            continue;
        }
        pg_max_old = if max_pg <= T::zero() {
            T::infinity()
        } else {
            max_pg
        };
        pg_min_old = if min_pg >= T::zero() {
            T::neg_infinity()
        } else {
            min_pg
        };
        if epochs % OBJECTIVE_WINDOW == 0 {
            let rel = duality_gap(x, &sign, &alpha, &w, b, c);
            let obj = dual_objective(&alpha, &w, b);
            let gain = (obj - last_obj) / obj.abs().max(T::one());
            last_obj = obj;
            if rel <= tol || gain <= tol {
                gap = rel;
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: epochs,
            gap: gap.to_f64_lossy(),
        });
    }

    let correct = x
        .iter()
        .zip(y)
        .filter(|(r, &label)| (dot(&w, r) + b > T::zero()) == label)
        .count();
    Ok(SvmFit {
        weight: w,
        bias: b,
        epochs,
        accuracy: correct as f64 / n as f64,
        support_vectors: alpha.iter().filter(|&&a| a > T::zero()).count(),
    })
}

/// `(P - D) / max(1, P)` for the primal `P = |w|^2/2 + C sum hinge` and the
/// dual `D = sum a - |w|^2/2`, with `|w|^2` including the bias term.
/// Dual objective `sum a - |w|^2/2` (maximised).
fn dual_objective<T: Scalar>(alpha: &[T], w: &[T], b: T) -> T {
    let sum: T = alpha.iter().copied().sum();
    sum - T::lit(0.5) * (dot(w, w) + b * b)
}

fn duality_gap<T: Scalar>(x: &[Vec<T>], sign: &[T], alpha: &[T], w: &[T], b: T, c: T) -> T {
    let wn = dot(w, w) + b * b;
    let mut hinge = T::zero();
    let mut sum_alpha = T::zero();
    for ((r, &s), &a) in x.iter().zip(sign).zip(alpha) {
        hinge += (T::one() - s * (dot(w, r) + b)).max(T::zero());
        sum_alpha += a;
    }
    let half = T::lit(0.5);
    let primal = half * wn + c * hinge;
    let dual = sum_alpha - half * wn;
    (primal - dual) / primal.max(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_separable_toy() {
        let x = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let fit = train_linear_svm(&x, &[false, true], &SvmConfig::default()).unwrap();
        let n = crate::linalg::norm(&fit.weight);
        assert!((fit.weight[0] / n - 1.0f64).abs() < 1e-6);
        assert!((fit.weight[1] / n).abs() < 1e-6);
        assert_eq!(fit.accuracy, 1.0);
    }

    #[test]
    fn toy_in_f32() {
        let x = vec![
            vec![-1.0f32, 0.0],
            vec![1.0, 0.0],
            vec![-2.0, 0.5],
            vec![2.0, -0.5],
        ];
        let fit = train_linear_svm(&x, &[false, true, false, true], &SvmConfig::default()).unwrap();
        assert!(fit.weight[0] > 0.0);
        assert_eq!(fit.accuracy, 1.0);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(
            train_linear_svm(&x, &[true, true], &SvmConfig::default()),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let x: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.71).cos()])
            .collect();
        let y: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let cfg = SvmConfig {
            max_epochs: 1,
            tolerance: 1e-12,
            ..Default::default()
        };
        assert!(matches!(
            train_linear_svm(&x, &y, &cfg),
            Err(Error::NotConverged { .. })
        ));
    }
}
