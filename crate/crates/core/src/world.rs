//! Analytic stand-in for the generator, attribute classifiers, recognizers
//! and human observers.
//!
//! Latents are standard normal. Six orthonormal directions carry the
//! attributes (gender, two race coordinates, age, expression, realism);
//! everything orthogonal to them is identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{
    DemographicGroup, EmbeddingVector, FaceRecord, Gender, LatentCode, LightDirection, Race,
    RatedAttribute,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt, norm, normalized};

/// Deterministic generator keyed by a master seed and free-form labels.
pub fn keyed_rng(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn unit_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        if let Some(v) = normalized(&gaussian_vec(rng, n)) {
            return v;
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Angle of each race's score axis in the (race1, race2) plane.
const RACE_ANGLES_DEG: [f64; 3] = [90.0, 210.0, 330.0];

/// Unit vector in latent space along which `race`'s oracle score grows.
fn race_axis(race: Race) -> (f64, f64) {
    let t = RACE_ANGLES_DEG[race.index()].to_radians();
    (t.cos(), t.sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDirections {
    pub gender: Vec<f64>,
    pub race1: Vec<f64>,
    pub race2: Vec<f64>,
    pub age: Vec<f64>,
    pub expression: Vec<f64>,
    pub realism: Vec<f64>,
}

impl AttributeDirections {
    pub fn all(&self) -> [&Vec<f64>; 6] {
        [
            &self.gender,
            &self.race1,
            &self.race2,
            &self.age,
            &self.expression,
            &self.realism,
        ]
    }

    /// Latent direction along which the oracle score of `race` grows fastest.
    pub fn race_direction(&self, race: Race) -> Vec<f64> {
        let (c, s) = race_axis(race);
        self.race1
            .iter()
            .zip(&self.race2)
            .map(|(a, b)| c * a + s * b)
            .collect()
    }

    /// Largest deviation of the Gram matrix from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let all = self.all();
        let mut worst = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(all[i], all[j]) - target).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasInjection {
    pub group: DemographicGroup,
    /// Norm of the per-face perturbation added before normalisation.
    pub severity: f64,
}

/// Response gains of one stand-in recognition model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub model_id: String,
    /// Seeds the model's projection matrices.
    pub key: u64,
    pub group_gain: f64,
    pub attribute_gain: f64,
    pub pose_gain: f64,
    pub light_gain: f64,
    /// Overrides the world's injection for this model when set.
    pub bias_injection: Option<BiasInjection>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            model_id: "model1".into(),
            key: 1,
            group_gain: 0.35,
            attribute_gain: 0.15,
            pose_gain: 1.2,
            light_gain: 0.5,
            bias_injection: None,
        }
    }
}

/// Parameters from which a [`WorldSpec`] is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldParams {
    pub latent_dim: usize,
    pub rng_seed: u64,
    pub embed_dim: usize,
    pub mesh_dim: usize,
    pub bias_injection: Option<BiasInjection>,
    pub annotator_sigma: f64,
    pub annotator_bias_sd: f64,
    pub identity_drift: f64,
    pub distance_scale: f64,
}

/// Annotator noise calibrated so that the median per-pair standard deviation
/// of nine quantized identity scores is about 0.3 of the scale range.
pub const CALIBRATED_ANNOTATOR_SIGMA: f64 = 0.5;

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            latent_dim: 32,
            rng_seed: 0,
            embed_dim: 128,
            mesh_dim: 24,
            bias_injection: None,
            annotator_sigma: CALIBRATED_ANNOTATOR_SIGMA,
            annotator_bias_sd: 0.05,
            identity_drift: 0.1,
            distance_scale: 3.0,
        }
    }
}

/// Serialized stand-in world (`world.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub space_id: String,
    pub latent_dim: usize,
    pub rng_seed: u64,
    pub directions: AttributeDirections,
    pub embed_dim: usize,
    pub mesh_dim: usize,
    pub bias_injection: Option<BiasInjection>,
    pub annotator_sigma: f64,
    pub annotator_bias_sd: f64,
    pub identity_drift: f64,
    pub distance_scale: f64,
}

impl WorldSpec {
    pub fn generate(params: &WorldParams) -> Result<Self> {
        if params.latent_dim < 7 {
            return Err(Error::InvalidInput("latent_dim must be at least 7".into()));
        }
        if params.embed_dim == 0 || params.mesh_dim == 0 {
            return Err(Error::InvalidInput(
                "embed_dim and mesh_dim must be positive".into(),
            ));
        }
        let mut rng = keyed_rng(params.rng_seed, &["directions"]);
        let raw: Vec<Vec<f64>> = (0..6)
            .map(|_| gaussian_vec(&mut rng, params.latent_dim))
            .collect();
        let basis = gram_schmidt(&raw)
            .ok_or_else(|| Error::InvalidInput("degenerate direction draw".into()))?;
        let mut it = basis.into_iter();
        let mut next = || it.next().expect("six directions");
        let directions = AttributeDirections {
            gender: next(),
            race1: next(),
            race2: next(),
            age: next(),
            expression: next(),
            realism: next(),
        };
        let spec = Self {
            space_id: format!("standin-{}-d{}", params.rng_seed, params.latent_dim),
            latent_dim: params.latent_dim,
            rng_seed: params.rng_seed,
            directions,
            embed_dim: params.embed_dim,
            mesh_dim: params.mesh_dim,
            bias_injection: params.bias_injection,
            annotator_sigma: params.annotator_sigma,
            annotator_bias_sd: params.annotator_bias_sd,
            identity_drift: params.identity_drift,
            distance_scale: params.distance_scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for d in self.directions.all() {
            if d.len() != self.latent_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.latent_dim,
                    got: d.len(),
                });
            }
        }
        let err = self.directions.orthonormality_error();
        if err.is_nan() || err > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "attribute directions not orthonormal (error {err:e})"
            )));
        }
        if !(self.annotator_sigma >= 0.0
            && self.annotator_bias_sd >= 0.0
            && self.identity_drift >= 0.0)
        {
            return Err(Error::InvalidInput(
                "noise and drift parameters must be non-negative".into(),
            ));
        }
        if self.distance_scale.is_nan() || self.distance_scale <= 0.0 {
            return Err(Error::InvalidInput(
                "distance_scale must be positive".into(),
            ));
        }
        if let Some(b) = self.bias_injection {
            if b.severity.is_nan() || b.severity < 0.0 {
                return Err(Error::InvalidInput(
                    "bias severity must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Oracle attribute read-out of a latent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueAttributes {
    /// Probability-like male score.
    pub gender: f64,
    pub race_scores: [f64; 3],
    pub race: Race,
    pub age: f64,
    pub expression: f64,
    pub skin_tone: f64,
    pub uncanniness: f64,
}

impl TrueAttributes {
    pub fn perceived_group(&self) -> DemographicGroup {
        let gender = if self.gender >= 0.5 {
            Gender::Male
        } else {
            Gender::Female
        };
        DemographicGroup::new(gender, self.race)
    }

    pub fn rated(&self, attribute: RatedAttribute) -> f64 {
        match attribute {
            RatedAttribute::Age => self.age,
            RatedAttribute::Expression => self.expression,
            RatedAttribute::Gender => self.gender,
            RatedAttribute::SkinTone => self.skin_tone,
            RatedAttribute::Uncanniness => self.uncanniness,
        }
    }
}

/// Immutable stand-in world with precomputed mesh projections.
#[derive(Debug, Clone)]
pub struct World {
    spec: WorldSpec,
    mesh_matrix: Vec<Vec<f64>>,
    mesh_attr: Vec<Vec<f64>>,
    mesh_offset: Vec<f64>,
    mesh_pose: Vec<f64>,
}

impl World {
    pub fn new(spec: WorldSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.latent_dim;
        let mut rng = keyed_rng(spec.rng_seed, &["mesh"]);
        let scale = 1.0 / (d as f64).sqrt();
        let mesh_matrix = (0..spec.mesh_dim)
            .map(|_| {
                gaussian_vec(&mut rng, d)
                    .into_iter()
                    .map(|x| x * scale)
                    .collect()
            })
            .collect();
        let mesh_attr = (0..spec.mesh_dim)
            .map(|_| gaussian_vec(&mut rng, 6))
            .collect();
        let mesh_offset = gaussian_vec(&mut rng, spec.mesh_dim);
        let mesh_pose = gaussian_vec(&mut rng, spec.mesh_dim);
        Ok(Self {
            spec,
            mesh_matrix,
            mesh_attr,
            mesh_offset,
            mesh_pose,
        })
    }

    pub fn from_params(params: &WorldParams) -> Result<Self> {
        Self::new(WorldSpec::generate(params)?)
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn space_id(&self) -> &str {
        &self.spec.space_id
    }

    pub fn dim(&self) -> usize {
        self.spec.latent_dim
    }

    pub fn directions(&self) -> &AttributeDirections {
        &self.spec.directions
    }

    fn check(&self, z: &LatentCode) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        Ok(())
    }

    /// I.i.d. standard-normal latents from a named stream.
    pub fn sample_latents(&self, stream: &str, count: usize) -> Result<Vec<LatentCode>> {
        if count == 0 {
            return Err(Error::InvalidInput("count must be at least 1".into()));
        }
        let mut rng = keyed_rng(self.spec.rng_seed, &["latents", stream]);
        Ok((0..count)
            .map(|_| LatentCode::new(gaussian_vec(&mut rng, self.dim()), self.space_id()))
            .collect())
    }

    /// Projections of `z` on the six attribute directions.
    pub fn attribute_coords(&self, z: &LatentCode) -> [f64; 6] {
        let dirs = self.directions().all();
        std::array::from_fn(|i| dot(&z.values, dirs[i]))
    }

    pub fn true_attributes(&self, z: &LatentCode) -> Result<TrueAttributes> {
        self.check(z)?;
        let [g, r1, r2, age, expr, realism] = self.attribute_coords(z);
        let race_scores: [f64; 3] = std::array::from_fn(|k| {
            let (c, s) = race_axis(Race::ALL[k]);
            c * r1 + s * r2
        });
        let mut race = Race::White;
        for r in Race::ALL {
            if race_scores[r.index()] > race_scores[race.index()] {
                race = r;
            }
        }
        Ok(TrueAttributes {
            gender: sigmoid(g),
            race_scores,
            race,
            age: sigmoid(age),
            expression: sigmoid(expr),
            skin_tone: sigmoid(1.5 * race_scores[Race::Black.index()]),
            uncanniness: sigmoid(1.5 * realism - 2.0),
        })
    }

    /// `z` with every attribute component removed.
    pub fn identity_component(&self, z: &LatentCode) -> Result<Vec<f64>> {
        self.check(z)?;
        let mut out = z.values.clone();
        for u in self.directions().all() {
            let c = dot(&z.values, u);
            for (o, &ui) in out.iter_mut().zip(u.iter()) {
                *o -= c * ui;
            }
        }
        Ok(out)
    }

    pub fn mesh_features(&self, face: &FaceRecord) -> Result<MeshFeature> {
        let id = self.identity_component(&face.latent)?;
        let coords = self.attribute_coords(&face.latent);
        let values = (0..self.spec.mesh_dim)
            .map(|k| {
                self.mesh_offset[k]
                    + dot(&self.mesh_matrix[k], &id)
                    + 0.05 * dot(&self.mesh_attr[k], &coords)
                    + 0.01 * face.pose_deg * self.mesh_pose[k]
            })
            .collect();
        Ok(MeshFeature {
            face_id: face.face_id.clone(),
            values,
        })
    }

    /// Ground-truth identity distance in [0, 1].
    pub fn true_pair_distance(&self, a: &FaceRecord, b: &FaceRecord) -> Result<f64> {
        let ia = self.identity_component(&a.latent)?;
        let ib = self.identity_component(&b.latent)?;
        let id_gap = crate::linalg::distance(&ia, &ib);
        let ca = self.attribute_coords(&a.latent);
        let cb = self.attribute_coords(&b.latent);
        let traversal = ((ca[3] - cb[3]).powi(2) + (ca[4] - cb[4]).powi(2)).sqrt();
        let render = (a.pose_deg - b.pose_deg).abs() / 30.0
            + if a.light.direction == b.light.direction {
                (a.light.intensity - b.light.intensity).abs()
            } else {
                a.light.intensity.max(b.light.intensity)
            };
        let raw = id_gap + self.spec.identity_drift * (traversal + render);
        Ok(1.0 - (-raw / self.spec.distance_scale).exp())
    }

    pub fn embedder(&self, model: ModelSpec) -> Result<StandInEmbedder<'_>> {
        StandInEmbedder::new(self, model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFeature<T = f64> {
    pub face_id: crate::domain::FaceId,
    pub values: Vec<T>,
}

/// Deterministic recognition model over the stand-in world.
#[derive(Debug, Clone)]
pub struct StandInEmbedder<'w> {
    world: &'w World,
    model: ModelSpec,
    identity_map: Vec<Vec<f64>>,
    attribute_map: Vec<Vec<f64>>,
}

impl<'w> StandInEmbedder<'w> {
    pub fn new(world: &'w World, model: ModelSpec) -> Result<Self> {
        if model.model_id.is_empty() {
            return Err(Error::InvalidInput("model_id must be non-empty".into()));
        }
        let (d, e) = (world.dim(), world.spec.embed_dim);
        let mut rng = keyed_rng(world.spec.rng_seed, &["embedder", &model.key.to_string()]);
        let scale = 1.0 / (d as f64).sqrt();
        let identity_map = (0..e)
            .map(|_| {
                gaussian_vec(&mut rng, d)
                    .into_iter()
                    .map(|x| x * scale)
                    .collect()
            })
            .collect();
        let attribute_map = (0..6).map(|_| unit_vec(&mut rng, e)).collect();
        Ok(Self {
            world,
            model,
            identity_map,
            attribute_map,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model.model_id
    }

    pub fn bias_injection(&self) -> Option<BiasInjection> {
        self.model.bias_injection.or(self.world.spec.bias_injection)
    }

    fn render_direction(&self, face: &FaceRecord, what: &str) -> Vec<f64> {
        let mut rng = keyed_rng(
            self.world.spec.rng_seed,
            &[
                "render",
                &self.model.key.to_string(),
                &face.seed_id.0.to_string(),
                face.group.code(),
                what,
            ],
        );
        unit_vec(&mut rng, self.world.spec.embed_dim)
    }

    pub fn embed(&self, face: &FaceRecord) -> Result<EmbeddingVector> {
        let id = self.world.identity_component(&face.latent)?;
        let e = self.world.spec.embed_dim;
        let base: Vec<f64> = self
            .identity_map
            .iter()
            .map(|row| dot(row, &id).tanh())
            .collect();
        let mut v = normalized(&base).unwrap_or_else(|| {
            let mut u = vec![0.0; e];
            u[0] = 1.0;
            u
        });

        let coords = self.world.attribute_coords(&face.latent);
        let gains = [
            self.model.group_gain,
            self.model.group_gain,
            self.model.group_gain,
            self.model.attribute_gain,
            self.model.attribute_gain,
            0.0,
        ];
        for (k, col) in self.attribute_map.iter().enumerate() {
            let c = gains[k] * coords[k];
            if c != 0.0 {
                for (vi, &ci) in v.iter_mut().zip(col) {
                    *vi += c * ci;
                }
            }
        }

        if face.pose_deg != 0.0 {
            let side = if face.pose_deg < 0.0 {
                "pose-"
            } else {
                "pose+"
            };
            let q = self.render_direction(face, side);
            let mag = self.model.pose_gain * face.pose_deg.abs() / 30.0;
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi += mag * qi;
            }
        }
        if face.light.direction != LightDirection::Neutral && face.light.intensity > 0.0 {
            let q = self.render_direction(face, &format!("light-{:?}", face.light.direction));
            let mag = self.model.light_gain * face.light.intensity;
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi += mag * qi;
            }
        }
        if let Some(bias) = self.bias_injection() {
            if bias.group == face.group && bias.severity > 0.0 {
                let mut rng = keyed_rng(
                    self.world.spec.rng_seed,
                    &["bias", &self.model.key.to_string(), face.face_id.as_str()],
                );
                let r = unit_vec(&mut rng, e);
                for (vi, ri) in v.iter_mut().zip(r) {
                    *vi += bias.severity * ri;
                }
            }
        }

        let values = normalized(&v).ok_or_else(|| Error::ZeroNorm(face.face_id.0.clone()))?;
        debug_assert!((norm(&values) - 1.0).abs() < 1e-9);
        Ok(EmbeddingVector {
            face_id: face.face_id.clone(),
            values,
            model_id: self.model.model_id.clone(),
        })
    }
}
