//! Linear attribute directions in latent space and the traversals built on them.

pub mod regressor;
pub mod svm;
pub mod traversal;

use serde::{Deserialize, Serialize};

use crate::domain::{Gender, LatentCode, Race};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, scale};
use crate::scalar::Scalar;

pub use regressor::RegressorConfig;
pub use svm::SvmConfig;
pub use traversal::{
    make_attribute_sequence, make_lighting_sequence, make_pose_sequence, make_prototypes,
    PrototypeConfig, SequenceOutcome, SequenceStatus, TraversalSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub gender: Gender,
    pub race: Race,
    pub age: f64,
    pub expression: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingEntry<T = f64> {
    pub latent: LatentCode<T>,
    pub labels: Labels,
    pub image_ref: Option<String>,
}

/// Labeled latents used to fit directions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingSet<T = f64> {
    pub entries: Vec<TrainingEntry<T>>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(entries: Vec<TrainingEntry<T>>) -> Result<Self> {
        if let Some(first) = entries.first() {
            let d = first.latent.dim();
            if let Some(bad) = entries.iter().find(|e| e.latent.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.latent.dim(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn design(&self) -> Vec<Vec<T>> {
        self.entries
            .iter()
            .map(|e| e.latent.values.clone())
            .collect()
    }
}

/// What a direction model separates or predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(
    rename_all = "snake_case",
    tag = "attribute",
    content = "positive_class"
)]
pub enum DirectionTarget {
    /// Binary gender; `positive` scores above zero.
    Gender(Gender),
    /// One-vs-all race classifier.
    Race(Race),
    Age,
    Expression,
}

impl DirectionTarget {
    pub fn name(&self) -> String {
        match self {
            DirectionTarget::Gender(g) => format!("gender:{g:?}"),
            DirectionTarget::Race(r) => format!("race:{r:?}"),
            DirectionTarget::Age => "age".into(),
            DirectionTarget::Expression => "expression".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    LinearSvm,
    LinearRegressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub samples: usize,
    pub accuracy: Option<f64>,
    pub r_squared: Option<f64>,
    pub epochs: Option<usize>,
}

/// A fitted linear model `s(z) = w.z + b` and its unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionModel<T = f64> {
    pub kind: ModelKind,
    pub target: DirectionTarget,
    pub weight: Vec<T>,
    pub bias: T,
    pub unit_normal: Vec<T>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> DirectionModel<T> {
    pub fn new(
        kind: ModelKind,
        target: DirectionTarget,
        weight: Vec<T>,
        bias: T,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let n = norm(&weight);
        if !n.is_finite() || n <= T::zero() {
            return Err(Error::DegenerateDirection(target.name()));
        }
        let unit_normal = scale(&weight, T::one() / n);
        Ok(Self {
            kind,
            target,
            weight,
            bias,
            unit_normal,
            diagnostics,
        })
    }

    /// Linear model through `weight` and `bias` with empty diagnostics.
    pub fn linear(
        kind: ModelKind,
        target: DirectionTarget,
        weight: Vec<T>,
        bias: T,
    ) -> Result<Self> {
        Self::new(
            kind,
            target,
            weight,
            bias,
            Diagnostics {
                samples: 0,
                accuracy: None,
                r_squared: None,
                epochs: None,
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    pub fn weight_norm(&self) -> T {
        norm(&self.weight)
    }

    pub fn score(&self, z: &[T]) -> T {
        dot(&self.weight, z) + self.bias
    }
}

/// Trains a linear SVM for `target`; the positive class is the target's value.
pub fn fit_svm<T: Scalar>(
    train: &TrainingSet<T>,
    target: DirectionTarget,
    cfg: &SvmConfig,
) -> Result<DirectionModel<T>> {
    let y: Vec<bool> = match target {
        DirectionTarget::Gender(g) => train.entries.iter().map(|e| e.labels.gender == g).collect(),
        DirectionTarget::Race(r) => train.entries.iter().map(|e| e.labels.race == r).collect(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "{} is not a classification target",
                target.name()
            )))
        }
    };
    let fit = svm::train_linear_svm(&train.design(), &y, cfg).map_err(|e| match e {
        Error::SingleClass(_) => Error::SingleClass(target.name()),
        other => other,
    })?;
    DirectionModel::new(
        ModelKind::LinearSvm,
        target,
        fit.weight,
        fit.bias,
        Diagnostics {
            samples: train.len(),
            accuracy: Some(fit.accuracy),
            r_squared: None,
            epochs: Some(fit.epochs),
        },
    )
}

pub fn fit_regressor<T: Scalar>(
    train: &TrainingSet<T>,
    target: DirectionTarget,
    cfg: &RegressorConfig,
) -> Result<DirectionModel<T>> {
    let y: Vec<T> = match target {
        DirectionTarget::Age => train.entries.iter().map(|e| T::lit(e.labels.age)).collect(),
        DirectionTarget::Expression => train
            .entries
            .iter()
            .map(|e| T::lit(e.labels.expression))
            .collect(),
        _ => {
            return Err(Error::InvalidInput(format!(
                "{} is not a regression target",
                target.name()
            )))
        }
    };
    let fit = regressor::train_ridge(&train.design(), &y, cfg).map_err(|e| match e {
        Error::DegenerateDirection(_) => Error::DegenerateDirection(target.name()),
        other => other,
    })?;
    DirectionModel::new(
        ModelKind::LinearRegressor,
        target,
        fit.weight,
        fit.bias,
        Diagnostics {
            samples: train.len(),
            accuracy: None,
            r_squared: Some(fit.r_squared),
            epochs: None,
        },
    )
}

/// The six fitted models used by prototype and sequence generation
/// (`directions.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet<T = f64> {
    pub gender: DirectionModel<T>,
    /// One-vs-all models indexed by [`Race::index`].
    pub race: [DirectionModel<T>; 3],
    pub age: DirectionModel<T>,
    pub expression: DirectionModel<T>,
}

impl<T: Scalar> DirectionSet<T> {
    pub fn fit(train: &TrainingSet<T>, svm: &SvmConfig, reg: &RegressorConfig) -> Result<Self> {
        let gender = fit_svm(train, DirectionTarget::Gender(Gender::Male), svm)?;
        let [r0, r1, r2] = Race::ALL.map(|r| fit_svm(train, DirectionTarget::Race(r), svm));
        Ok(Self {
            gender,
            race: [r0?, r1?, r2?],
            age: fit_regressor(train, DirectionTarget::Age, reg)?,
            expression: fit_regressor(train, DirectionTarget::Expression, reg)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(z: Vec<f64>, gender: Gender, age: f64) -> TrainingEntry {
        TrainingEntry {
            latent: LatentCode::new(z, "t"),
            labels: Labels {
                gender,
                race: Race::White,
                age,
                expression: 0.5,
            },
            image_ref: None,
        }
    }

    #[test]
    fn svm_on_toy_training_set() {
        let train = TrainingSet::new(vec![
            entry(vec![-1.0, 0.0], Gender::Female, 0.0),
            entry(vec![1.0, 0.0], Gender::Male, 1.0),
        ])
        .unwrap();
        let m = fit_svm(
            &train,
            DirectionTarget::Gender(Gender::Male),
            &SvmConfig::default(),
        )
        .unwrap();
        assert!((m.unit_normal[0] - 1.0).abs() < 1e-6);
        assert_eq!(m.diagnostics.accuracy, Some(1.0));
    }

    #[test]
    fn single_class_and_wrong_target() {
        let train = TrainingSet::new(vec![
            entry(vec![-1.0, 0.0], Gender::Male, 0.0),
            entry(vec![1.0, 0.0], Gender::Male, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            fit_svm(
                &train,
                DirectionTarget::Gender(Gender::Male),
                &SvmConfig::default()
            ),
            Err(Error::SingleClass(_))
        ));
        assert!(fit_svm(&train, DirectionTarget::Age, &SvmConfig::default()).is_err());
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let r = TrainingSet::new(vec![
            entry(vec![0.0], Gender::Male, 0.0),
            entry(vec![0.0, 1.0], Gender::Male, 0.0),
        ]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_weight_is_degenerate() {
        let r = DirectionModel::<f64>::linear(
            ModelKind::LinearRegressor,
            DirectionTarget::Age,
            vec![0.0, 0.0],
            0.0,
        );
        assert!(matches!(r, Err(Error::DegenerateDirection(_))));
    }
}
