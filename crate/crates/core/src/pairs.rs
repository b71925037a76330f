//! Positive, negative and diagnostic cross-group pair construction.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::domain::{AttributeKind, DemographicGroup, FaceRecord, PairKind, PairRecord};
use crate::error::{Error, Result};
use crate::world::keyed_rng;

fn pair(
    left: &FaceRecord,
    right: &FaceRecord,
    kind: PairKind,
    attribute: AttributeKind,
    slot: u8,
) -> PairRecord {
    PairRecord {
        pair_id: PairRecord::derive_id(&left.face_id, &right.face_id, attribute, slot),
        left: left.face_id.clone(),
        right: right.face_id.clone(),
        intended_kind: kind,
        varied_attribute: attribute,
        left_seed: left.seed_id,
        right_seed: right.seed_id,
        group: left.group,
        slot,
        is_self_slot: left.face_id == right.face_id,
        right_group: (right.group != left.group).then_some(right.group),
    }
}

/// The 20 sequence slots (4 attributes x 5) of `prototype`'s family.
fn family_slots<'a>(
    dataset: &'a Dataset,
    prototype: &FaceRecord,
) -> Result<Vec<(AttributeKind, u8, &'a FaceRecord)>> {
    let mut out = Vec::with_capacity(20);
    for attribute in AttributeKind::VARIED {
        for index in 0..AttributeKind::SEQUENCE_LENGTH {
            let face = dataset
                .slot(prototype.seed_id, prototype.group, attribute, index)
                .ok_or_else(|| Error::MissingSequence {
                    face_id: prototype.face_id.0.clone(),
                    attribute: attribute.name().into(),
                })?;
            out.push((attribute, index, face));
        }
    }
    Ok(out)
}

/// Pairs every prototype with each member of its own four sequences,
/// neutral slots included.
pub fn build_positive_pairs(dataset: &Dataset) -> Result<Vec<PairRecord>> {
    let mut out = Vec::with_capacity(dataset.prototype_count() * 20);
    for p in dataset.prototypes() {
        for (attribute, slot, face) in family_slots(dataset, p)? {
            out.push(pair(p, face, PairKind::Positive, attribute, slot));
        }
    }
    Ok(out)
}

fn sample_partners<'a>(
    candidates: &[&'a FaceRecord],
    n_other: usize,
    rng_seed: u64,
    stream: &str,
    anchor: &FaceRecord,
) -> Vec<&'a FaceRecord> {
    let mut rng = keyed_rng(rng_seed, &[stream, anchor.face_id.as_str()]);
    let mut picks: Vec<usize> = sample(&mut rng, candidates.len(), n_other).into_vec();
    picks.sort_unstable();
    picks.into_iter().map(|i| candidates[i]).collect()
}

/// Pairs every prototype with all sequence slots of `n_other` other
/// prototypes of the same group, drawn with a seeded generator.
pub fn build_negative_pairs(
    dataset: &Dataset,
    n_other: usize,
    rng_seed: u64,
) -> Result<Vec<PairRecord>> {
    if n_other == 0 {
        return Ok(Vec::new());
    }
    let mut by_group: BTreeMap<DemographicGroup, Vec<&FaceRecord>> = BTreeMap::new();
    for p in dataset.prototypes() {
        by_group.entry(p.group).or_default().push(p);
    }
    for (group, members) in &by_group {
        if members.len() < n_other + 1 {
            return Err(Error::InsufficientPrototypes {
                group: group.code().into(),
                required: n_other + 1,
                available: members.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(dataset.prototype_count() * n_other * 20);
    for p in dataset.prototypes() {
        let candidates: Vec<&FaceRecord> = by_group[&p.group]
            .iter()
            .copied()
            .filter(|q| q.seed_id != p.seed_id)
            .collect();
        if candidates.len() < n_other {
            return Err(Error::InsufficientPrototypes {
                group: p.group.code().into(),
                required: n_other + 1,
                available: candidates.len() + 1,
            });
        }
        for q in sample_partners(&candidates, n_other, rng_seed, "negatives", p) {
            for (attribute, slot, face) in family_slots(dataset, q)? {
                out.push(pair(p, face, PairKind::Negative, attribute, slot));
            }
        }
    }
    Ok(out)
}

/// Diagnostic pairs across groups and seeds; not part of the benchmark set.
pub fn build_cross_group_pairs(
    dataset: &Dataset,
    n_other: usize,
    rng_seed: u64,
) -> Result<Vec<PairRecord>> {
    if n_other == 0 {
        return Ok(Vec::new());
    }
    let protos: Vec<&FaceRecord> = dataset.prototypes().collect();
    let mut out = Vec::new();
    for p in &protos {
        let candidates: Vec<&FaceRecord> = protos
            .iter()
            .copied()
            .filter(|q| q.group != p.group && q.seed_id != p.seed_id)
            .collect();
        if candidates.len() < n_other {
            return Err(Error::InsufficientPrototypes {
                group: p.group.code().into(),
                required: n_other,
                available: candidates.len(),
            });
        }
        for q in sample_partners(&candidates, n_other, rng_seed, "cross-group", p) {
            for (attribute, slot, face) in family_slots(dataset, q)? {
                out.push(pair(p, face, PairKind::Negative, attribute, slot));
            }
        }
    }
    Ok(out)
}

/// Pair counts per intended kind, group and attribute.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub positive: usize,
    pub negative: usize,
    pub self_slots: usize,
    /// `"<kind>/<group>/<attribute>"` -> count
    pub by_stratum: BTreeMap<String, usize>,
}

pub fn summarize(pairs: &[PairRecord]) -> PairSummary {
    let mut s = PairSummary::default();
    for p in pairs {
        match p.intended_kind {
            PairKind::Positive => s.positive += 1,
            PairKind::Negative => s.negative += 1,
        }
        s.self_slots += p.is_self_slot as usize;
        let key =
            format!("{:?}/{}/{}", p.intended_kind, p.group, p.varied_attribute).to_lowercase();
        *s.by_stratum.entry(key).or_insert(0) += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{make_lighting_sequence, make_pose_sequence};
    use crate::domain::{LatentCode, SeedId, Variant};

    /// A dataset whose age/expression members are copies at shifted latents.
    pub(crate) fn synthetic_dataset(seeds: u64) -> Dataset {
        let mut faces = Vec::new();
        for s in 0..seeds {
            for g in DemographicGroup::ALL {
                let p = FaceRecord::prototype(
                    SeedId(s),
                    g,
                    LatentCode::new(vec![s as f64, g.index() as f64], "t"),
                );
                for f in make_pose_sequence(&p).unwrap() {
                    if !f.is_prototype() {
                        faces.push(f);
                    }
                }
                for f in make_lighting_sequence(&p).unwrap() {
                    if !f.is_prototype() {
                        faces.push(f);
                    }
                }
                for attr in [AttributeKind::Age, AttributeKind::Expression] {
                    for i in [0u8, 1, 3, 4] {
                        let z = p.latent.displaced(&[0.0, 1.0], i as f64);
                        faces.push(p.sequence_member(
                            attr,
                            i,
                            z,
                            0.0,
                            crate::domain::Lighting::NEUTRAL,
                        ));
                    }
                }
                faces.push(p);
            }
        }
        Dataset::new(faces).unwrap()
    }

    #[test]
    fn seventeen_faces_per_prototype() {
        let ds = synthetic_dataset(2);
        assert_eq!(ds.len(), 2 * 6 * 17);
        assert!(ds.family_sizes().values().all(|&n| n == 17));
    }

    #[test]
    fn single_prototype_pose_pairs() {
        let ds = synthetic_dataset(1);
        let pos = build_positive_pairs(&ds).unwrap();
        let p0 = ds.prototypes().next().unwrap();
        let pose: Vec<_> = pos
            .iter()
            .filter(|p| p.left == p0.face_id && p.varied_attribute == AttributeKind::Pose)
            .collect();
        assert_eq!(pose.len(), 5);
        let selfs: Vec<_> = pose.iter().filter(|p| p.is_self_slot).collect();
        assert_eq!(selfs.len(), 1);
        assert_eq!(selfs[0].slot, 2);
    }

    #[test]
    fn count_law_and_invariants() {
        let ds = synthetic_dataset(5);
        let pos = build_positive_pairs(&ds).unwrap();
        let neg = build_negative_pairs(&ds, 3, 1).unwrap();
        assert_eq!(pos.len(), 30 * 20);
        assert_eq!(neg.len(), 30 * 3 * 20);
        for p in pos.iter().chain(&neg) {
            p.validate().unwrap();
            assert!(p.right_group.is_none());
        }
        assert!(neg.iter().all(|p| p.left_seed != p.right_seed));
        assert!(build_negative_pairs(&ds, 0, 1).unwrap().is_empty());
        let s = summarize(&pos);
        for g in DemographicGroup::ALL {
            let n: usize = s
                .by_stratum
                .iter()
                .filter(|(k, _)| k.contains(&format!("/{}/", g.code().to_lowercase())))
                .map(|(_, v)| v)
                .sum();
            assert_eq!(n, pos.len() / 6);
        }
    }

    #[test]
    fn negative_sampling_is_deterministic() {
        let ds = synthetic_dataset(6);
        assert_eq!(
            build_negative_pairs(&ds, 3, 9).unwrap(),
            build_negative_pairs(&ds, 3, 9).unwrap()
        );
        assert_ne!(
            build_negative_pairs(&ds, 3, 9).unwrap(),
            build_negative_pairs(&ds, 3, 10).unwrap()
        );
    }

    #[test]
    fn insufficient_prototypes() {
        let ds = synthetic_dataset(3);
        assert!(matches!(
            build_negative_pairs(&ds, 3, 1),
            Err(Error::InsufficientPrototypes { .. })
        ));
    }

    #[test]
    fn missing_sequence_is_reported() {
        let ds = synthetic_dataset(1);
        let faces: Vec<FaceRecord> = ds
            .faces()
            .iter()
            .filter(|f| {
                f.variant
                    != Variant::Sequence {
                        attribute: AttributeKind::Age,
                        index: 4,
                    }
            })
            .cloned()
            .collect();
        let ds = Dataset::new(faces).unwrap();
        assert!(matches!(
            build_positive_pairs(&ds),
            Err(Error::MissingSequence { .. })
        ));
    }

    #[test]
    fn cross_group_pairs_change_group_and_seed() {
        let ds = synthetic_dataset(3);
        let cross = build_cross_group_pairs(&ds, 2, 4).unwrap();
        assert_eq!(cross.len(), 18 * 2 * 20);
        assert!(cross
            .iter()
            .all(|p| p.is_cross_group() && p.left_seed != p.right_seed));
    }
}
