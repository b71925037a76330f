//! Prototype generation along protected directions and sequence generation
//! along non-protected ones.

use serde::{Deserialize, Serialize};

use super::{DirectionModel, DirectionTarget};
use crate::domain::{
    AttributeKind, DemographicGroup, FaceRecord, Gender, LatentCode, LightDirection, Lighting,
    SeedId, POSE_ANGLES_DEG,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrototypeConfig {
    /// Decision score each protected model must reach (in its target's sign).
    pub margin: f64,
    /// Largest displacement allowed along one direction.
    pub max_distance: f64,
    /// Gender-then-race passes before giving up on joint satisfaction.
    pub max_rounds: usize,
    /// Move along race before gender instead of the default order.
    pub race_first: bool,
}

impl Default for PrototypeConfig {
    fn default() -> Self {
        Self {
            margin: 1.0,
            max_distance: 10.0,
            max_rounds: 8,
            race_first: false,
        }
    }
}

/// Signed step along `model`'s unit normal that moves its score to `target`
/// when the current score falls short; zero when already past it.
pub fn margin_displacement<T: Scalar>(
    model: &DirectionModel<T>,
    z: &[T],
    target: T,
    positive: bool,
) -> T {
    let s = model.score(z);
    let satisfied = if positive { s >= target } else { s <= -target };
    if satisfied {
        return T::zero();
    }
    let goal = if positive { target } else { -target };
    (goal - s) / model.weight_norm()
}

fn satisfied<T: Scalar>(model: &DirectionModel<T>, z: &[T], margin: T, positive: bool) -> bool {
    // allow rounding slack of the closed-form step
    let slack = T::lit(1e-9) * (T::one() + margin.abs());
    let s = model.score(z);
    if positive {
        s >= margin - slack
    } else {
        s <= -margin + slack
    }
}

/// Moves `seed` into each of the six demographic groups.
///
/// Returns the prototypes in [`DemographicGroup::ALL`] order.
pub fn make_prototypes(
    seed_id: SeedId,
    seed: &LatentCode,
    gender_model: &DirectionModel,
    race_models: &[DirectionModel; 3],
    cfg: &PrototypeConfig,
) -> Result<Vec<FaceRecord>> {
    let check = |m: &DirectionModel| {
        if m.dim() != seed.dim() {
            Err(Error::DimensionMismatch {
                expected: seed.dim(),
                got: m.dim(),
            })
        } else {
            Ok(())
        }
    };
    check(gender_model)?;
    race_models.iter().try_for_each(check)?;
    if !matches!(gender_model.target, DirectionTarget::Gender(_)) {
        return Err(Error::InvalidInput("gender model expected".into()));
    }
    for (r, m) in crate::domain::Race::ALL.iter().zip(race_models) {
        if m.target != DirectionTarget::Race(*r) {
            return Err(Error::InvalidInput(format!(
                "race model for {r:?} expected"
            )));
        }
    }

    DemographicGroup::ALL
        .iter()
        .map(|&group| {
            let positive_gender = match gender_model.target {
                DirectionTarget::Gender(g) => g == group.gender,
                _ => unreachable!(),
            };
            let race_model = &race_models[group.race.index()];
            let steps: [(&DirectionModel, bool); 2] = if cfg.race_first {
                [(race_model, true), (gender_model, positive_gender)]
            } else {
                [(gender_model, positive_gender), (race_model, true)]
            };
            let mut z = seed.clone();
            let mut done = false;
            for _ in 0..cfg.max_rounds.max(1) {
                if steps
                    .iter()
                    .all(|(m, pos)| satisfied(m, &z.values, cfg.margin, *pos))
                {
                    done = true;
                    break;
                }
                for (m, pos) in steps {
                    let t = margin_displacement(m, &z.values, cfg.margin, pos);
                    if t.abs() > cfg.max_distance {
                        return Err(Error::TargetUnreachable {
                            target: cfg.margin,
                            max_distance: cfg.max_distance,
                        });
                    }
                    if t != 0.0 {
                        z = z.displaced(&m.unit_normal, t);
                    }
                }
            }
            if !done
                && !steps
                    .iter()
                    .all(|(m, pos)| satisfied(m, &z.values, cfg.margin, *pos))
            {
                return Err(Error::TargetUnreachable {
                    target: cfg.margin,
                    max_distance: cfg.max_distance,
                });
            }
            Ok(FaceRecord::prototype(seed_id, group, z))
        })
        .collect()
}

/// Parameters of a threshold-then-step traversal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraversalSpec<T = f64> {
    /// Model output that defines the far end of the sequence.
    pub target: T,
    /// Steps on each side of the prototype.
    pub steps: usize,
    pub max_distance: T,
    pub search_step: T,
    /// Width at which bisection stops.
    pub refine_tol: T,
}

impl<T: Scalar> Default for TraversalSpec<T> {
    fn default() -> Self {
        Self {
            target: T::lit(0.8),
            steps: 2,
            max_distance: T::lit(10.0),
            search_step: T::lit(0.05),
            refine_tol: T::lit(1e-7),
        }
    }
}

impl<T: Scalar> TraversalSpec<T> {
    pub fn age() -> Self {
        Self {
            target: T::lit(0.8),
            ..Self::default()
        }
    }

    pub fn expression() -> Self {
        Self {
            target: T::lit(0.9),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidInput(
                "traversal needs at least one step".into(),
            ));
        }
        if !(self.target > T::zero() && self.target < T::one()) {
            return Err(Error::InvalidInput(
                "traversal target must lie in (0, 1)".into(),
            ));
        }
        if !(self.search_step > T::zero()
            && self.refine_tol > T::zero()
            && self.max_distance > T::zero())
        {
            return Err(Error::InvalidInput(
                "search step, tolerance and max distance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceStatus {
    Complete,
    /// The prototype already meets the target: every member is identical.
    Degenerate,
    /// The target was not reached within the maximum distance.
    Truncated,
}

/// Smallest distance along `+unit_normal` at which `model`'s output reaches
/// `spec.target`, found by fixed-step search then bisection.
pub fn find_target_distance<T: Scalar>(
    model: &DirectionModel<T>,
    z: &[T],
    spec: &TraversalSpec<T>,
) -> (T, SequenceStatus) {
    let output = |t: T| {
        let moved: Vec<T> = z
            .iter()
            .zip(&model.unit_normal)
            .map(|(&a, &u)| a + t * u)
            .collect();
        model.score(&moved)
    };
    if output(T::zero()) >= spec.target {
        return (T::zero(), SequenceStatus::Degenerate);
    }
    let mut prev = T::zero();
    let (mut lo, mut hi) = loop {
        let next = (prev + spec.search_step).min(spec.max_distance);
        if output(next) >= spec.target {
            break (prev, next);
        }
        if next >= spec.max_distance {
            return (spec.max_distance, SequenceStatus::Truncated);
        }
        prev = next;
    };
    while hi - lo > spec.refine_tol {
        let mid = (lo + hi) / T::lit(2.0);
        if output(mid) >= spec.target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ((lo + hi) / T::lit(2.0), SequenceStatus::Complete)
}

/// Offsets `k * d / n` for `k = -n..=n`.
pub fn sequence_offsets<T: Scalar>(distance: T, steps: usize) -> Vec<T> {
    let n = steps as i64;
    let step = distance / T::lit(steps as f64);
    (-n..=n).map(|k| step * T::lit(k as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutcome {
    /// Five faces; the neutral slot is the prototype itself.
    pub faces: Vec<FaceRecord>,
    pub distance: f64,
    pub status: SequenceStatus,
}

pub fn make_attribute_sequence(
    prototype: &FaceRecord,
    model: &DirectionModel,
    spec: &TraversalSpec,
) -> Result<SequenceOutcome> {
    spec.validate()?;
    if !prototype.is_prototype() {
        return Err(Error::InvalidInput(
            "sequences start from a prototype".into(),
        ));
    }
    let attribute = match model.target {
        DirectionTarget::Age => AttributeKind::Age,
        DirectionTarget::Expression => AttributeKind::Expression,
        _ => {
            return Err(Error::InvalidInput(
                "age or expression model expected".into(),
            ))
        }
    };
    if 2 * spec.steps + 1 != AttributeKind::SEQUENCE_LENGTH as usize {
        return Err(Error::InvalidInput(
            "sequence length must be 5 (steps = 2)".into(),
        ));
    }
    if model.dim() != prototype.latent.dim() {
        return Err(Error::DimensionMismatch {
            expected: prototype.latent.dim(),
            got: model.dim(),
        });
    }
    let (distance, status) = find_target_distance(model, &prototype.latent.values, spec);
    let neutral = attribute.neutral_index().expect("varied attribute");
    let faces = sequence_offsets(distance, spec.steps)
        .into_iter()
        .enumerate()
        .map(|(i, off)| {
            if i as u8 == neutral {
                prototype.clone()
            } else {
                let latent = prototype.latent.displaced(&model.unit_normal, off);
                prototype.sequence_member(attribute, i as u8, latent, 0.0, Lighting::NEUTRAL)
            }
        })
        .collect();
    Ok(SequenceOutcome {
        faces,
        distance,
        status,
    })
}

fn require_neutral(prototype: &FaceRecord) -> Result<()> {
    if !prototype.is_prototype() || prototype.pose_deg != 0.0 || !prototype.light.is_neutral() {
        return Err(Error::InvalidInput(
            "prototype must have neutral pose and lighting".into(),
        ));
    }
    Ok(())
}

/// Render-parameter sequence at -30, -15, 0, 15, 30 degrees.
pub fn make_pose_sequence(prototype: &FaceRecord) -> Result<Vec<FaceRecord>> {
    require_neutral(prototype)?;
    Ok(POSE_ANGLES_DEG
        .iter()
        .enumerate()
        .map(|(i, &deg)| {
            if deg == 0.0 {
                prototype.clone()
            } else {
                prototype.sequence_member(
                    AttributeKind::Pose,
                    i as u8,
                    prototype.latent.clone(),
                    deg,
                    Lighting::NEUTRAL,
                )
            }
        })
        .collect())
}

/// Neutral prototype followed by up, down, left and right light at power 0.7.
pub fn make_lighting_sequence(prototype: &FaceRecord) -> Result<Vec<FaceRecord>> {
    require_neutral(prototype)?;
    Ok(LightDirection::SEQUENCE
        .iter()
        .enumerate()
        .map(|(i, &dir)| {
            if dir == LightDirection::Neutral {
                prototype.clone()
            } else {
                prototype.sequence_member(
                    AttributeKind::Lighting,
                    i as u8,
                    prototype.latent.clone(),
                    0.0,
                    Lighting::directional(dir),
                )
            }
        })
        .collect())
}

/// Whether `group`'s gender is the gender model's positive class.
pub fn is_positive_gender(model: &DirectionModel, gender: Gender) -> bool {
    matches!(model.target, DirectionTarget::Gender(g) if g == gender)
}
