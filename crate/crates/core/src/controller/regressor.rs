//! Ridge-regularised least squares with an unpenalised intercept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressorConfig {
    pub ridge: f64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self { ridge: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit<T> {
    pub weight: Vec<T>,
    pub bias: T,
    pub r_squared: f64,
}

pub fn train_ridge<T: Scalar>(
    x: &[Vec<T>],
    y: &[T],
    cfg: &RegressorConfig,
) -> Result<RegressionFit<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    if n < d + 1 || d == 0 {
        return Err(Error::InvalidInput(format!(
            "need at least {} samples, got {n}",
            d + 1
        )));
    }
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let nf = T::lit(n as f64);
    let mut mean_x = vec![T::zero(); d];
    for r in x {
        for (m, &v) in mean_x.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean_x {
        *m /= nf;
    }
    let mean_y = y.iter().copied().sum::<T>() / nf;

    let mut gram = vec![T::zero(); d * d];
    let mut rhs = vec![T::zero(); d];
    let mut centered = vec![T::zero(); d];
    for (r, &yi) in x.iter().zip(y) {
        for j in 0..d {
            centered[j] = r[j] - mean_x[j];
        }
        let yc = yi - mean_y;
        for i in 0..d {
            rhs[i] += centered[i] * yc;
            let ci = centered[i];
            for j in 0..=i {
                gram[i * d + j] += ci * centered[j];
            }
        }
    }
    let ridge = T::lit(cfg.ridge);
    for i in 0..d {
        for j in 0..i {
            gram[j * d + i] = gram[i * d + j];
        }
        gram[i * d + i] += ridge;
    }
    let weight = cholesky_solve(&gram, &rhs, d).ok_or(Error::RankDeficient)?;
    let bias = mean_y - dot(&weight, &mean_x);

    let ss_tot: T = y.iter().map(|&v| (v - mean_y) * (v - mean_y)).sum();
    let ss_res: T = x
        .iter()
        .zip(y)
        .map(|(r, &v)| {
            let e = v - (dot(&weight, r) + bias);
            e * e
        })
        .sum();
    let scale = T::one() + mean_y.abs();
    if ss_tot <= T::epsilon() * T::epsilon() * nf * scale * scale
        || weight.iter().all(|w| *w == T::zero())
    {
        return Err(Error::DegenerateDirection("regressor".into()));
    }
    let r_squared = (T::one() - ss_res / ss_tot).to_f64_lossy();
    Ok(RegressionFit {
        weight,
        bias,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_labels() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 * 0.1 - 1.0, ((i * 7) % 5) as f64])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let fit = train_ridge(&x, &y, &RegressorConfig::default()).unwrap();
        assert!((fit.weight[0] - 2.0).abs() < 1e-6);
        assert!(fit.weight[1].abs() < 1e-6);
        assert!((fit.bias - 1.0).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_labels_are_degenerate() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = vec![0.1; 10];
        assert!(matches!(
            train_ridge(&x, &y, &RegressorConfig::default()),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn rank_deficient_without_ridge() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let cfg = RegressorConfig { ridge: 0.0 };
        assert!(matches!(
            train_ridge(&x, &y, &cfg),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn too_few_samples() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(train_ridge(&x, &[1.0, 2.0], &RegressorConfig::default()).is_err());
    }
}
