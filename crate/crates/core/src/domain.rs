//! Shared record types for every pipeline stage.
//!
//! All records serialize to one JSON object per line; field names follow the
//! struct fields verbatim.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hex prefix of a SHA-256 digest over `parts`, joined with an unambiguous separator.
pub fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

macro_rules! string_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(FaceId);
string_id!(PairId);
string_id!(AnnotationId);
string_id!(WorkerId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedId(pub u64);

impl fmt::Display for SeedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// A point in a generator latent space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCode<T = f64> {
    pub values: Vec<T>,
    pub space_id: String,
}

impl<T: Scalar> LatentCode<T> {
    pub fn new(values: Vec<T>, space_id: impl Into<String>) -> Self {
        Self {
            values,
            space_id: space_id.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Checks the invariants against a registered space dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.values.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite latent coordinate in space {}",
                self.space_id
            )));
        }
        Ok(())
    }

    /// `self + step * direction`
    pub fn displaced(&self, direction: &[T], step: T) -> Self {
        let values = self
            .values
            .iter()
            .zip(direction)
            .map(|(&z, &u)| z + step * u)
            .collect();
        Self {
            values,
            space_id: self.space_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Race {
    White,
    Black,
    EastAsian,
}

impl Race {
    pub const ALL: [Race; 3] = [Race::White, Race::Black, Race::EastAsian];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One of the six gender x race intersections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DemographicGroup {
    pub gender: Gender,
    pub race: Race,
}

impl DemographicGroup {
    pub const ALL: [DemographicGroup; 6] = [
        DemographicGroup {
            gender: Gender::Male,
            race: Race::White,
        },
        DemographicGroup {
            gender: Gender::Female,
            race: Race::White,
        },
        DemographicGroup {
            gender: Gender::Male,
            race: Race::Black,
        },
        DemographicGroup {
            gender: Gender::Female,
            race: Race::Black,
        },
        DemographicGroup {
            gender: Gender::Male,
            race: Race::EastAsian,
        },
        DemographicGroup {
            gender: Gender::Female,
            race: Race::EastAsian,
        },
    ];

    pub const fn new(gender: Gender, race: Race) -> Self {
        Self { gender, race }
    }

    /// Position in [`DemographicGroup::ALL`].
    pub fn index(self) -> usize {
        self.race.index() * 2 + (self.gender as usize)
    }

    pub fn code(self) -> &'static str {
        match (self.race, self.gender) {
            (Race::White, Gender::Male) => "WM",
            (Race::White, Gender::Female) => "WF",
            (Race::Black, Gender::Male) => "BM",
            (Race::Black, Gender::Female) => "BF",
            (Race::EastAsian, Gender::Male) => "AM",
            (Race::EastAsian, Gender::Female) => "AF",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.code().eq_ignore_ascii_case(code))
    }
}

impl fmt::Display for DemographicGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttributeKind {
    Pose,
    Lighting,
    Age,
    Expression,
    Gender,
    Race,
}

impl AttributeKind {
    /// The non-protected attributes varied by sequences, in canonical order.
    pub const VARIED: [AttributeKind; 4] = [
        AttributeKind::Pose,
        AttributeKind::Lighting,
        AttributeKind::Age,
        AttributeKind::Expression,
    ];

    pub const SEQUENCE_LENGTH: u8 = 5;

    pub fn is_protected(self) -> bool {
        matches!(self, AttributeKind::Gender | AttributeKind::Race)
    }

    /// Sequence slot that coincides with the prototype.
    pub fn neutral_index(self) -> Option<u8> {
        match self {
            AttributeKind::Pose | AttributeKind::Age | AttributeKind::Expression => Some(2),
            AttributeKind::Lighting => Some(0),
            AttributeKind::Gender | AttributeKind::Race => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttributeKind::Pose => "pose",
            AttributeKind::Lighting => "lighting",
            AttributeKind::Age => "age",
            AttributeKind::Expression => "expression",
            AttributeKind::Gender => "gender",
            AttributeKind::Race => "race",
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which face of a prototype's family a record is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Prototype,
    Sequence { attribute: AttributeKind, index: u8 },
}

impl Variant {
    pub fn tag(&self) -> String {
        match self {
            Variant::Prototype => "prototype".into(),
            Variant::Sequence { attribute, index } => format!("{attribute}:{index}"),
        }
    }
}

pub const POSE_ANGLES_DEG: [f64; 5] = [-30.0, -15.0, 0.0, 15.0, 30.0];
pub const LIGHT_INTENSITY: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightDirection {
    Neutral,
    Up,
    Down,
    Left,
    Right,
}

impl LightDirection {
    /// Lighting sequence order: slot 0 is the prototype.
    pub const SEQUENCE: [LightDirection; 5] = [
        LightDirection::Neutral,
        LightDirection::Up,
        LightDirection::Down,
        LightDirection::Left,
        LightDirection::Right,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lighting {
    pub direction: LightDirection,
    /// Light source power in [0, 1].
    pub intensity: f64,
}

impl Lighting {
    pub const NEUTRAL: Lighting = Lighting {
        direction: LightDirection::Neutral,
        intensity: 0.0,
    };

    pub fn directional(direction: LightDirection) -> Self {
        if direction == LightDirection::Neutral {
            Self::NEUTRAL
        } else {
            Self {
                direction,
                intensity: LIGHT_INTENSITY,
            }
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.direction == LightDirection::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub face_id: FaceId,
    pub seed_id: SeedId,
    pub group: DemographicGroup,
    pub variant: Variant,
    pub latent: LatentCode,
    pub pose_deg: f64,
    pub light: Lighting,
    pub image_ref: Option<String>,
    pub background_removed: bool,
}

impl FaceRecord {
    pub fn derive_id(seed_id: SeedId, group: DemographicGroup, variant: Variant) -> FaceId {
        FaceId(format!(
            "f{}",
            content_hash(&[&seed_id.0.to_string(), group.code(), &variant.tag()])
        ))
    }

    pub fn prototype(seed_id: SeedId, group: DemographicGroup, latent: LatentCode) -> Self {
        Self {
            face_id: Self::derive_id(seed_id, group, Variant::Prototype),
            seed_id,
            group,
            variant: Variant::Prototype,
            latent,
            pose_deg: 0.0,
            light: Lighting::NEUTRAL,
            image_ref: None,
            background_removed: false,
        }
    }

    /// A sequence member derived from `self` with a new variant and render state.
    pub fn sequence_member(
        &self,
        attribute: AttributeKind,
        index: u8,
        latent: LatentCode,
        pose_deg: f64,
        light: Lighting,
    ) -> Self {
        let variant = Variant::Sequence { attribute, index };
        Self {
            face_id: Self::derive_id(self.seed_id, self.group, variant),
            seed_id: self.seed_id,
            group: self.group,
            variant,
            latent,
            pose_deg,
            light,
            image_ref: None,
            background_removed: self.background_removed,
        }
    }

    pub fn is_prototype(&self) -> bool {
        self.variant == Variant::Prototype
    }

    /// Record-level invariants (variant range, render-state consistency).
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::Inconsistent {
            id: self.face_id.0.clone(),
            reason: reason.into(),
        };
        if !self.latent.is_finite() {
            return Err(bad("non-finite latent"));
        }
        match self.variant {
            Variant::Prototype => {
                if self.pose_deg != 0.0 || !self.light.is_neutral() {
                    return Err(bad("prototype must have zero pose and neutral lighting"));
                }
            }
            Variant::Sequence { attribute, index } => {
                if index >= AttributeKind::SEQUENCE_LENGTH {
                    return Err(Error::VariantIndexOutOfRange {
                        face_id: self.face_id.0.clone(),
                        index,
                    });
                }
                if attribute.is_protected() {
                    return Err(bad("protected attributes have no sequences"));
                }
                if Some(index) == attribute.neutral_index() {
                    return Err(bad("neutral sequence slot is the prototype itself"));
                }
                let i = index as usize;
                match attribute {
                    AttributeKind::Pose => {
                        if self.pose_deg != POSE_ANGLES_DEG[i] || !self.light.is_neutral() {
                            return Err(bad("pose variant render state does not match its index"));
                        }
                    }
                    AttributeKind::Lighting => {
                        if self.pose_deg != 0.0
                            || self.light.direction != LightDirection::SEQUENCE[i]
                        {
                            return Err(bad(
                                "lighting variant render state does not match its index",
                            ));
                        }
                    }
                    _ => {
                        if self.pose_deg != 0.0 || !self.light.is_neutral() {
                            return Err(bad(
                                "latent traversal variants keep neutral pose and lighting",
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairKind {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_id: PairId,
    pub left: FaceId,
    pub right: FaceId,
    pub intended_kind: PairKind,
    pub varied_attribute: AttributeKind,
    pub left_seed: SeedId,
    pub right_seed: SeedId,
    pub group: DemographicGroup,
    /// Sequence slot of the right face within `varied_attribute`.
    pub slot: u8,
    /// The right face is the left prototype itself.
    pub is_self_slot: bool,
    /// Set only on diagnostic cross-group pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_group: Option<DemographicGroup>,
}

impl PairRecord {
    pub fn derive_id(left: &FaceId, right: &FaceId, attribute: AttributeKind, slot: u8) -> PairId {
        PairId(format!(
            "p{}",
            content_hash(&[
                left.as_str(),
                right.as_str(),
                attribute.name(),
                &slot.to_string()
            ])
        ))
    }

    pub fn is_cross_group(&self) -> bool {
        self.right_group.is_some_and(|g| g != self.group)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::Inconsistent {
            id: self.pair_id.0.clone(),
            reason: reason.into(),
        };
        match self.intended_kind {
            PairKind::Positive => {
                if self.left_seed != self.right_seed
                    || self.right_group.is_some_and(|g| g != self.group)
                {
                    return Err(bad("positive pair must share seed and group"));
                }
            }
            PairKind::Negative => {
                if self.left_seed == self.right_seed {
                    return Err(bad("negative pair must change seed"));
                }
            }
        }
        if self.slot >= AttributeKind::SEQUENCE_LENGTH {
            return Err(bad("slot out of range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    PairIdentity,
    SingleAttribute,
}

/// Attributes rated on single images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RatedAttribute {
    Age,
    Expression,
    Gender,
    SkinTone,
    Uncanniness,
}

impl RatedAttribute {
    pub const ALL: [RatedAttribute; 5] = [
        RatedAttribute::Age,
        RatedAttribute::Expression,
        RatedAttribute::Gender,
        RatedAttribute::SkinTone,
        RatedAttribute::Uncanniness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RatedAttribute::Age => "age",
            RatedAttribute::Expression => "expression",
            RatedAttribute::Gender => "gender",
            RatedAttribute::SkinTone => "skin_tone",
            RatedAttribute::Uncanniness => "uncanniness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
    }
}

pub const MAX_SCORE: u8 = 4;

impl AnnotationId {
    /// Content id of `worker`'s rating of `item` (and `attribute`).
    pub fn derive(worker: &WorkerId, item: &str, attribute: Option<RatedAttribute>) -> Self {
        let attr = attribute.map(|a| a.name()).unwrap_or("identity");
        AnnotationId(format!("a{}", content_hash(&[worker.as_str(), item, attr])))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotation_id: AnnotationId,
    pub task_kind: TaskKind,
    /// A pair id for identity tasks, a face id for single-image tasks.
    pub item_ref: String,
    pub attribute: Option<RatedAttribute>,
    pub worker_id: WorkerId,
    pub score: u8,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

impl AnnotationRecord {
    pub fn validate(&self) -> Result<()> {
        if self.score > MAX_SCORE {
            return Err(Error::ScoreOutOfRange(self.score as i64));
        }
        match (self.task_kind, self.attribute) {
            (TaskKind::PairIdentity, Some(_)) => Err(Error::Inconsistent {
                id: self.annotation_id.0.clone(),
                reason: "pair identity annotations carry no attribute".into(),
            }),
            (TaskKind::SingleAttribute, None) => Err(Error::Inconsistent {
                id: self.annotation_id.0.clone(),
                reason: "single-image annotation needs an attribute".into(),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcicRecord {
    pub pair_id: PairId,
    pub hcic: f64,
    pub n_scores: usize,
    /// Standard deviation of all scores, in units of the scale's range.
    pub dispersion: f64,
    /// Fewer than nine scores were trimmed with the symmetric fallback.
    #[serde(default)]
    pub fallback_trim: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<T = f64> {
    pub face_id: FaceId,
    pub values: Vec<T>,
    pub model_id: String,
}

/// Evenly spaced, strictly increasing decision thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self {
            start: -1.0,
            end: 1.0,
            points: 513,
        }
    }
}

impl ThresholdGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::Config(
                "threshold grid needs points >= 1 and finite bounds".into(),
            ));
        }
        if self.points > 1 && self.end <= self.start {
            return Err(Error::Config(
                "threshold grid must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzerConfig {
    /// Pairs with HCIC at or below this value are ground-truth positives.
    pub t_hcic: f64,
    /// Additional HCIC thresholds for which curves are repeated.
    pub t_hcic_set: Vec<f64>,
    /// Faces whose normalized uncanniness reaches this value are excluded.
    pub uncanny_max: f64,
    /// Fixed decision threshold marked as the operating point.
    pub fixed_threshold: f64,
    pub threshold_sweep: ThresholdGrid,
    /// FMR levels at which group FNMRs are compared.
    pub fmr_grid: Vec<f64>,
    /// FMR levels of the pooled between-group gap test.
    pub null_fmr_levels: Vec<f64>,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    pub include_self_slots: bool,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            t_hcic: 0.3,
            t_hcic_set: vec![0.2, 0.3, 0.4],
            uncanny_max: 0.8,
            fixed_threshold: 0.6,
            threshold_sweep: ThresholdGrid::default(),
            fmr_grid: vec![0.01, 0.05, 0.1, 0.2],
            null_fmr_levels: vec![0.01, 0.1],
            bootstrap_resamples: 1000,
            bootstrap_seed: 7,
            include_self_slots: true,
        }
    }
}

impl AnalyzerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.t_hcic) || !self.t_hcic_set.iter().all(|&t| unit(t)) {
            return Err(Error::Config("t_hcic values must lie in [0, 1]".into()));
        }
        if !self
            .fmr_grid
            .iter()
            .chain(&self.null_fmr_levels)
            .all(|&f| unit(f))
        {
            return Err(Error::Config("fmr_grid values must lie in [0, 1]".into()));
        }
        if !self.uncanny_max.is_finite() || !self.fixed_threshold.is_finite() {
            return Err(Error::Config(
                "uncanny_max and fixed_threshold must be finite".into(),
            ));
        }
        self.threshold_sweep.validate()
    }

    /// `t_hcic` followed by the extra set, without duplicates, in ascending order.
    pub fn all_t_hcic(&self) -> Vec<f64> {
        let mut v: Vec<f64> = std::iter::once(self.t_hcic)
            .chain(self.t_hcic_set.iter().copied())
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proto() -> FaceRecord {
        FaceRecord::prototype(
            SeedId(3),
            DemographicGroup::new(Gender::Female, Race::Black),
            LatentCode::new(vec![0.5, -1.0], "w"),
        )
    }

    #[test]
    fn six_distinct_groups() {
        let mut seen = std::collections::HashSet::new();
        for (i, g) in DemographicGroup::ALL.iter().enumerate() {
            assert_eq!(g.index(), i);
            assert_eq!(DemographicGroup::from_code(g.code()), Some(*g));
            seen.insert(*g);
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn ids_are_content_derived() {
        let a = proto();
        let b = proto();
        assert_eq!(a.face_id, b.face_id);
        let other = FaceRecord::derive_id(SeedId(4), a.group, Variant::Prototype);
        assert_ne!(a.face_id, other);
    }

    #[test]
    fn prototype_render_state_is_checked() {
        let mut p = proto();
        p.validate().unwrap();
        p.pose_deg = 15.0;
        assert!(matches!(p.validate(), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn variant_index_out_of_range() {
        let p = proto();
        let v = p.sequence_member(
            AttributeKind::Age,
            7,
            p.latent.clone(),
            0.0,
            Lighting::NEUTRAL,
        );
        assert!(matches!(
            v.validate(),
            Err(Error::VariantIndexOutOfRange { index: 7, .. })
        ));
        let neutral = p.sequence_member(
            AttributeKind::Pose,
            2,
            p.latent.clone(),
            0.0,
            Lighting::NEUTRAL,
        );
        assert!(neutral.validate().is_err());
        let ok = p.sequence_member(
            AttributeKind::Pose,
            0,
            p.latent.clone(),
            -30.0,
            Lighting::NEUTRAL,
        );
        ok.validate().unwrap();
    }

    #[test]
    fn annotation_rules() {
        let mut a = AnnotationRecord {
            annotation_id: "a1".into(),
            task_kind: TaskKind::PairIdentity,
            item_ref: "p1".into(),
            attribute: None,
            worker_id: "w".into(),
            score: 3,
            timestamp: 0,
        };
        a.validate().unwrap();
        a.score = 7;
        assert!(matches!(a.validate(), Err(Error::ScoreOutOfRange(7))));
        a.score = 1;
        a.attribute = Some(RatedAttribute::Age);
        assert!(a.validate().is_err());
    }

    #[test]
    fn threshold_grid_default() {
        let g = ThresholdGrid::default().values();
        assert_eq!(g.len(), 513);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[512], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn analyzer_config_rejects_bad_t_hcic() {
        let mut c = AnalyzerConfig::default();
        c.validate().unwrap();
        c.t_hcic = 1.5;
        assert!(c.validate().is_err());
        assert_eq!(AnalyzerConfig::default().all_t_hcic(), vec![0.2, 0.3, 0.4]);
    }
}
