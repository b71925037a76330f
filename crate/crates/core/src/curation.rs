//! Seed screening and max-min diversity filtering.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::SeedId;
use crate::error::{Error, Result};
use crate::linalg::distance;
use crate::scalar::Scalar;
use crate::world::MeshFeature;

/// Ordered seed selection: `filtered` is a subset of `base` in selection order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeedPool {
    pub base: Vec<SeedId>,
    pub filtered: Vec<SeedId>,
    /// Min-distance of each filtered seed at the moment it was chosen
    /// (`None` for the initial seed).
    pub selection_distances: Vec<Option<f64>>,
}

impl SeedPool {
    pub fn from_base(base: Vec<SeedId>) -> Self {
        Self {
            base,
            filtered: Vec::new(),
            selection_distances: Vec::new(),
        }
    }
}

/// Per-seed screening evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedScreening {
    pub seed_id: SeedId,
    /// Normalized uncanniness of each prototype, in [0, 1].
    pub uncanniness: Vec<f64>,
    /// Fraction of prototypes perceived as their intended group.
    pub agreement: f64,
}

impl SeedScreening {
    pub fn mean_realism(&self) -> f64 {
        if self.uncanniness.is_empty() {
            return 0.0;
        }
        self.uncanniness.iter().map(|u| 1.0 - u).sum::<f64>() / self.uncanniness.len() as f64
    }

    pub fn fully_realistic(&self, uncanny_max: f64) -> bool {
        self.uncanniness.iter().all(|&u| u < uncanny_max)
    }
}

/// Keeps the `keep` best seeds.
///
/// Seeds with any prototype at or above `uncanny_max` rank after every fully
/// realistic seed; within each tier the order is agreement, then mean
/// realism, both descending, then seed id ascending.
pub fn screen_seeds(pool: &[SeedScreening], keep: usize, uncanny_max: f64) -> Result<SeedPool> {
    if keep > pool.len() {
        return Err(Error::PoolTooSmall {
            requested: keep,
            available: pool.len(),
        });
    }
    let mut ranked: Vec<&SeedScreening> = pool.iter().collect();
    ranked.sort_by(|a, b| {
        b.fully_realistic(uncanny_max)
            .cmp(&a.fully_realistic(uncanny_max))
            .then(b.agreement.total_cmp(&a.agreement))
            .then(b.mean_realism().total_cmp(&a.mean_realism()))
            .then(a.seed_id.cmp(&b.seed_id))
    });
    Ok(SeedPool::from_base(
        ranked.into_iter().take(keep).map(|s| s.seed_id).collect(),
    ))
}

/// Greedy farthest-point selection over per-group feature vectors.
///
/// `features[s][g]` is seed `s`'s feature for group `g`. The distance of a
/// candidate to the selection is the minimum, over selected seeds and
/// groups, of the Euclidean distance between same-group features. Starting
/// from `initial`, the candidate with the largest such distance is added
/// until `n` seeds are chosen; ties go to the lowest `ids` value.
///
/// Returns the chosen indices and their distances at selection time.
pub fn maxmin_select<T: Scalar>(
    features: &[Vec<Vec<T>>],
    ids: &[u64],
    initial: usize,
    n: usize,
) -> Result<(Vec<usize>, Vec<Option<T>>)> {
    let m = features.len();
    if ids.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: ids.len(),
        });
    }
    if n > m {
        return Err(Error::PoolTooSmall {
            requested: n,
            available: m,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if initial >= m {
        return Err(Error::InvalidInput(format!(
            "initial index {initial} outside pool of {m}"
        )));
    }
    let groups = features[0].len();
    if groups == 0 || features.iter().any(|f| f.len() != groups) {
        return Err(Error::InvalidInput(
            "every seed needs the same non-zero number of group features".into(),
        ));
    }

    let set_distance = |a: usize, b: usize| -> T {
        (0..groups)
            .map(|g| distance(&features[a][g], &features[b][g]))
            .fold(T::infinity(), T::min)
    };

    let mut selected = vec![initial];
    let mut chosen_dist = vec![None];
    let mut is_selected = vec![false; m];
    is_selected[initial] = true;
    let mut min_dist: Vec<T> = (0..m)
        .into_par_iter()
        .map(|s| set_distance(s, initial))
        .collect();

    while selected.len() < n {
        let mut best: Option<usize> = None;
        for s in 0..m {
            if is_selected[s] {
                continue;
            }
            best = match best {
                None => Some(s),
                Some(b)
                    if min_dist[s] > min_dist[b]
                        || (min_dist[s] == min_dist[b] && ids[s] < ids[b]) =>
                {
                    Some(s)
                }
                keep => keep,
            };
        }
        let next = best.expect("candidates remain while selection is short");
        is_selected[next] = true;
        selected.push(next);
        chosen_dist.push(Some(min_dist[next]));
        min_dist.par_iter_mut().enumerate().for_each(|(s, d)| {
            let nd = set_distance(s, next);
            if nd < *d {
                *d = nd;
            }
        });
    }
    Ok((selected, chosen_dist))
}

/// Mesh features of every prototype, keyed by seed, in group order.
pub type MeshTable = BTreeMap<SeedId, Vec<MeshFeature>>;

/// Filters `pool.base` down to `n` diverse seeds; the selection starts from
/// `initial` if given, else from the first base seed.
pub fn maxmin_filter(
    pool: &SeedPool,
    mesh: &MeshTable,
    n: usize,
    initial: Option<SeedId>,
) -> Result<SeedPool> {
    if n > pool.base.len() {
        return Err(Error::PoolTooSmall {
            requested: n,
            available: pool.base.len(),
        });
    }
    let mut features = Vec::with_capacity(pool.base.len());
    for s in &pool.base {
        let rows = mesh.get(s).ok_or(Error::MissingMesh(s.0))?;
        features.push(rows.iter().map(|r| r.values.clone()).collect::<Vec<_>>());
    }
    let ids: Vec<u64> = pool.base.iter().map(|s| s.0).collect();
    let start = match initial {
        None => 0,
        Some(seed) => pool
            .base
            .iter()
            .position(|&s| s == seed)
            .ok_or_else(|| Error::InvalidInput(format!("initial seed {seed} not in pool")))?,
    };
    let (idx, dist) = maxmin_select(&features, &ids, start, n)?;
    Ok(SeedPool {
        base: pool.base.clone(),
        filtered: idx.into_iter().map(|i| pool.base[i]).collect(),
        selection_distances: dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn screening(id: u64, unc: f64, agreement: f64) -> SeedScreening {
        SeedScreening {
            seed_id: SeedId(id),
            uncanniness: vec![unc; 6],
            agreement,
        }
    }

    #[test]
    fn keeps_requested_count() {
        let pool: Vec<_> = (0..1000)
            .map(|i| screening(i, (i % 17) as f64 / 40.0, (i % 7) as f64 / 6.0))
            .collect();
        assert_eq!(screen_seeds(&pool, 300, 0.8).unwrap().base.len(), 300);
        assert!(matches!(
            screen_seeds(&pool, 1001, 0.8),
            Err(Error::PoolTooSmall { .. })
        ));
    }

    #[test]
    fn identical_scores_tie_break_on_seed_id() {
        let pool: Vec<_> = [5, 3, 9, 1, 7]
            .iter()
            .map(|&i| screening(i, 0.1, 1.0))
            .collect();
        let kept = screen_seeds(&pool, 3, 0.8).unwrap();
        assert_eq!(kept.base, vec![SeedId(1), SeedId(3), SeedId(5)]);
    }

    #[test]
    fn unrealistic_prototype_ranks_last() {
        let mut pool: Vec<_> = (0..5)
            .map(|i| screening(i, 0.3 + 0.05 * i as f64, 0.5))
            .collect();
        let mut bad = screening(99, 0.0, 1.0);
        bad.uncanniness[3] = 0.85;
        pool.push(bad);
        let kept = screen_seeds(&pool, 6, 0.8).unwrap();
        assert_eq!(*kept.base.last().unwrap(), SeedId(99));
    }

    #[test]
    fn one_dimensional_trace() {
        let features: Vec<Vec<Vec<f64>>> = [0.0, 1.0, 5.0, 6.0]
            .iter()
            .map(|&x| vec![vec![x]])
            .collect();
        let (idx, dist) = maxmin_select(&features, &[0, 1, 2, 3], 0, 3).unwrap();
        assert_eq!(idx, vec![0, 3, 1]);
        assert_eq!(dist, vec![None, Some(6.0), Some(1.0)]);
    }

    #[test]
    fn exhaustion_is_permutation() {
        let features: Vec<Vec<Vec<f64>>> = (0..8)
            .map(|i| vec![vec![(i * 37 % 11) as f64, i as f64]])
            .collect();
        let ids: Vec<u64> = (0..8).collect();
        let (mut idx, _) = maxmin_select(&features, &ids, 2, 8).unwrap();
        idx.sort();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn missing_mesh_and_oversized_request() {
        let pool = SeedPool::from_base(vec![SeedId(1), SeedId(2)]);
        let mut mesh = MeshTable::new();
        mesh.insert(
            SeedId(1),
            vec![MeshFeature {
                face_id: "a".into(),
                values: vec![0.0],
            }],
        );
        assert!(matches!(
            maxmin_filter(&pool, &mesh, 2, None),
            Err(Error::MissingMesh(2))
        ));
        assert!(matches!(
            maxmin_filter(&pool, &mesh, 3, None),
            Err(Error::PoolTooSmall { .. })
        ));
    }
}
