//! Read-only registry of face records.

use std::collections::{BTreeMap, HashMap};

use crate::domain::{AttributeKind, DemographicGroup, FaceId, FaceRecord, SeedId, Variant};
use crate::error::{Error, Result};

/// Indexed, immutable view over a set of [`FaceRecord`]s.
///
/// Iteration order is ascending `face_id`.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    faces: Vec<FaceRecord>,
    by_id: HashMap<FaceId, usize>,
    by_key: HashMap<(SeedId, DemographicGroup, Variant), usize>,
    prototypes: BTreeMap<(SeedId, DemographicGroup), usize>,
}

/// Validates and indexes `records`.
pub fn register_dataset(records: Vec<FaceRecord>) -> Result<Dataset> {
    Dataset::new(records)
}

impl Dataset {
    pub fn new(mut records: Vec<FaceRecord>) -> Result<Self> {
        for r in &records {
            r.validate()?;
        }
        records.sort_by(|a, b| a.face_id.cmp(&b.face_id));
        let mut by_id = HashMap::with_capacity(records.len());
        let mut by_key = HashMap::with_capacity(records.len());
        let mut prototypes = BTreeMap::new();
        let mut space: Option<(&str, usize)> = None;
        for (i, r) in records.iter().enumerate() {
            if by_id.insert(r.face_id.clone(), i).is_some() {
                return Err(Error::DuplicateId(r.face_id.0.clone()));
            }
            if by_key.insert((r.seed_id, r.group, r.variant), i).is_some() {
                return Err(Error::DuplicateId(format!(
                    "{}/{}/{}",
                    r.seed_id,
                    r.group,
                    r.variant.tag()
                )));
            }
            match space {
                None => space = Some((r.latent.space_id.as_str(), r.latent.dim())),
                Some((id, dim)) => {
                    if id != r.latent.space_id {
                        return Err(Error::Inconsistent {
                            id: r.face_id.0.clone(),
                            reason: format!("latent space {} differs from {id}", r.latent.space_id),
                        });
                    }
                    if dim != r.latent.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: r.latent.dim(),
                        });
                    }
                }
            }
            if r.is_prototype() {
                prototypes.insert((r.seed_id, r.group), i);
            }
        }
        for r in &records {
            if !r.is_prototype() && !prototypes.contains_key(&(r.seed_id, r.group)) {
                return Err(Error::Inconsistent {
                    id: r.face_id.0.clone(),
                    reason: format!("no prototype for seed {} group {}", r.seed_id, r.group),
                });
            }
        }
        Ok(Self {
            faces: records,
            by_id,
            by_key,
            prototypes,
        })
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> &[FaceRecord] {
        &self.faces
    }

    pub fn into_faces(self) -> Vec<FaceRecord> {
        self.faces
    }

    pub fn get(&self, id: &FaceId) -> Option<&FaceRecord> {
        self.by_id.get(id).map(|&i| &self.faces[i])
    }

    pub fn find(
        &self,
        seed: SeedId,
        group: DemographicGroup,
        variant: Variant,
    ) -> Option<&FaceRecord> {
        self.by_key
            .get(&(seed, group, variant))
            .map(|&i| &self.faces[i])
    }

    pub fn prototype_count(&self) -> usize {
        self.prototypes.len()
    }

    /// Prototypes ordered by (seed, group).
    pub fn prototypes(&self) -> impl Iterator<Item = &FaceRecord> + '_ {
        self.prototypes.values().map(|&i| &self.faces[i])
    }

    pub fn prototypes_of_group(&self, group: DemographicGroup) -> Vec<&FaceRecord> {
        self.prototypes().filter(|p| p.group == group).collect()
    }

    pub fn seeds(&self) -> Vec<SeedId> {
        let mut s: Vec<SeedId> = self.prototypes.keys().map(|(s, _)| *s).collect();
        s.dedup();
        s
    }

    /// Face occupying `index` of the prototype's `attribute` sequence; the
    /// neutral slot resolves to the prototype itself.
    pub fn slot(
        &self,
        seed: SeedId,
        group: DemographicGroup,
        attribute: AttributeKind,
        index: u8,
    ) -> Option<&FaceRecord> {
        if Some(index) == attribute.neutral_index() {
            self.find(seed, group, Variant::Prototype)
        } else {
            self.find(seed, group, Variant::Sequence { attribute, index })
        }
    }

    /// Number of faces per prototype, keyed by (seed, group).
    pub fn family_sizes(&self) -> BTreeMap<(SeedId, DemographicGroup), usize> {
        let mut m = BTreeMap::new();
        for f in &self.faces {
            *m.entry((f.seed_id, f.group)).or_insert(0) += 1;
        }
        m
    }
}
