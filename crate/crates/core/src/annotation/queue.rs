//! Task assignment and collection for human raters, backed by an
//! append-only JSONL log.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::domain::{
    AnnotationId, AnnotationRecord, FaceId, PairRecord, RatedAttribute, TaskKind, WorkerId,
};
use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, JsonlAppender};

use super::consensus::{aggregate_log, Aggregates, ConsensusConfig, REQUIRED_SCORES};

/// One rateable unit: a pair, or one attribute of one face.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemKey {
    pub task_kind: TaskKind,
    pub item_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<RatedAttribute>,
}

impl ItemKey {
    pub fn of(record: &AnnotationRecord) -> Self {
        Self {
            task_kind: record.task_kind,
            item_ref: record.item_ref.clone(),
            attribute: record.attribute,
        }
    }
}

/// What a rater is shown for an item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemInfo {
    #[serde(flatten)]
    pub key: ItemKey,
    pub face_ids: Vec<FaceId>,
    pub image_refs: Vec<Option<String>>,
}

/// Identity items for `pairs` followed by one item per face and attribute.
pub fn collect_items(
    dataset: &Dataset,
    pairs: &[PairRecord],
    attributes: &[RatedAttribute],
) -> Result<Vec<ItemInfo>> {
    let image = |id: &FaceId| -> Result<Option<String>> {
        Ok(dataset
            .get(id)
            .ok_or_else(|| Error::UnknownItem(id.0.clone()))?
            .image_ref
            .clone())
    };
    let mut items = Vec::with_capacity(pairs.len() + dataset.len() * attributes.len());
    for p in pairs {
        items.push(ItemInfo {
            key: ItemKey {
                task_kind: TaskKind::PairIdentity,
                item_ref: p.pair_id.0.clone(),
                attribute: None,
            },
            face_ids: vec![p.left.clone(), p.right.clone()],
            image_refs: vec![image(&p.left)?, image(&p.right)?],
        });
    }
    for f in dataset.faces() {
        for &a in attributes {
            items.push(ItemInfo {
                key: ItemKey {
                    task_kind: TaskKind::SingleAttribute,
                    item_ref: f.face_id.0.clone(),
                    attribute: Some(a),
                },
                face_ids: vec![f.face_id.clone()],
                image_refs: vec![f.image_ref.clone()],
            });
        }
    }
    Ok(items)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueConfig {
    /// Ratings needed before an item stops being served.
    pub required: usize,
    /// Extra outstanding assignments allowed per item, covering abandoned tasks.
    pub overflow: usize,
}

impl Default for QueueConfig {
    fn default() -> Self {
        Self {
            required: REQUIRED_SCORES,
            overflow: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub item: ItemInfo,
    pub required: usize,
    pub collected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmitOutcome {
    Accepted,
    /// The same annotation id was already stored; nothing changed.
    Duplicate,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindProgress {
    pub items: usize,
    pub complete: usize,
    pub annotations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub items: usize,
    pub complete: usize,
    pub annotations: usize,
    pub workers: usize,
    pub by_kind: BTreeMap<TaskKind, KindProgress>,
}

/// Ratings and assignments of one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemCount {
    #[serde(flatten)]
    pub key: ItemKey,
    pub collected: usize,
    pub served: usize,
}

#[derive(Debug, Default)]
struct ItemState {
    info: Option<ItemInfo>,
    served: BTreeSet<WorkerId>,
    scored: BTreeSet<WorkerId>,
}

/// Serves under-annotated items, least-annotated first, and records scores.
#[derive(Debug)]
pub struct TaskQueue {
    cfg: QueueConfig,
    items: BTreeMap<ItemKey, ItemState>,
    by_ref: HashMap<String, Vec<ItemKey>>,
    ids: HashMap<AnnotationId, usize>,
    log: Vec<AnnotationRecord>,
    sink: Option<JsonlAppender>,
}

impl TaskQueue {
    pub fn new(items: Vec<ItemInfo>, cfg: QueueConfig) -> Result<Self> {
        if cfg.required == 0 {
            return Err(Error::Config("queue.required must be positive".into()));
        }
        let mut map = BTreeMap::new();
        let mut by_ref: HashMap<String, Vec<ItemKey>> = HashMap::new();
        for info in items {
            let key = info.key.clone();
            if map.contains_key(&key) {
                return Err(Error::DuplicateId(format!(
                    "{}/{:?}",
                    key.item_ref, key.attribute
                )));
            }
            by_ref
                .entry(key.item_ref.clone())
                .or_default()
                .push(key.clone());
            map.insert(
                key,
                ItemState {
                    info: Some(info),
                    ..Default::default()
                },
            );
        }
        Ok(Self {
            cfg,
            items: map,
            by_ref,
            ids: HashMap::new(),
            log: Vec::new(),
            sink: None,
        })
    }

    /// Replays the log at `path` (if present) and appends new submissions to it.
    pub fn with_log(mut self, path: &Path) -> Result<Self> {
        if path.exists() {
            let records: Vec<AnnotationRecord> = read_jsonl(path)?;
            self.replay(records)?;
        }
        self.sink = Some(JsonlAppender::open(path)?);
        Ok(self)
    }

    /// Re-applies stored submissions without assignment checks or writes.
    pub fn replay(&mut self, records: impl IntoIterator<Item = AnnotationRecord>) -> Result<()> {
        for r in records {
            if self.ids.contains_key(&r.annotation_id) {
                continue;
            }
            r.validate()?;
            let state = self
                .items
                .get_mut(&ItemKey::of(&r))
                .ok_or_else(|| Error::UnknownItem(r.item_ref.clone()))?;
            state.served.insert(r.worker_id.clone());
            state.scored.insert(r.worker_id.clone());
            self.ids.insert(r.annotation_id.clone(), self.log.len());
            self.log.push(r);
        }
        Ok(())
    }

    pub fn config(&self) -> QueueConfig {
        self.cfg
    }

    /// Assigns `worker` the least-annotated open item of `kind` it has not
    /// been served; ties break on fewer outstanding assignments, then item key.
    pub fn next_task(&mut self, worker: &WorkerId, kind: TaskKind) -> Option<Task> {
        let cap = self.cfg.required + self.cfg.overflow;
        let mut best: Option<(&ItemKey, (usize, usize))> = None;
        for (key, st) in &self.items {
            if key.task_kind != kind
                || st.scored.len() >= self.cfg.required
                || st.served.len() >= cap
            {
                continue;
            }
            if st.served.contains(worker) {
                continue;
            }
            let rank = (st.scored.len(), st.served.len());
            if best.is_none_or(|(_, r)| rank < r) {
                best = Some((key, rank));
            }
        }
        let key = best?.0.clone();
        let st = self.items.get_mut(&key).expect("key from map");
        st.served.insert(worker.clone());
        Some(Task {
            item: st.info.clone().expect("registered item"),
            required: self.cfg.required,
            collected: st.scored.len(),
        })
    }

    /// Stores one rating. Resubmitting an identical record is a no-op; a
    /// different record under a known id is rejected.
    pub fn submit(&mut self, record: AnnotationRecord) -> Result<SubmitOutcome> {
        record.validate()?;
        if let Some(&i) = self.ids.get(&record.annotation_id) {
            return if self.log[i] == record {
                Ok(SubmitOutcome::Duplicate)
            } else {
                Err(Error::Inconsistent {
                    id: record.annotation_id.0.clone(),
                    reason: "annotation id reused with different content".into(),
                })
            };
        }
        let key = ItemKey::of(&record);
        let st = self
            .items
            .get(&key)
            .ok_or_else(|| Error::UnknownItem(record.item_ref.clone()))?;
        if !st.served.contains(&record.worker_id) {
            return Err(Error::UnassignedSubmission {
                worker: record.worker_id.0.clone(),
                item: record.item_ref.clone(),
            });
        }
        if st.scored.contains(&record.worker_id) {
            return Err(Error::Inconsistent {
                id: record.annotation_id.0.clone(),
                reason: format!("worker {} already rated this item", record.worker_id),
            });
        }
        if let Some(sink) = self.sink.as_mut() {
            sink.append(&record)?;
        }
        let st = self.items.get_mut(&key).expect("checked above");
        st.scored.insert(record.worker_id.clone());
        self.ids
            .insert(record.annotation_id.clone(), self.log.len());
        self.log.push(record);
        Ok(SubmitOutcome::Accepted)
    }

    /// Every item registered under `item_ref` (one per rated attribute for faces).
    pub fn items(&self, item_ref: &str) -> Vec<&ItemInfo> {
        self.by_ref
            .get(item_ref)
            .map(|keys| {
                keys.iter()
                    .filter_map(|k| self.items[k].info.as_ref())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn progress(&self) -> Progress {
        let mut p = Progress::default();
        let mut workers = BTreeSet::new();
        for (key, st) in &self.items {
            let complete = st.scored.len() >= self.cfg.required;
            let k = p.by_kind.entry(key.task_kind).or_default();
            k.items += 1;
            k.complete += complete as usize;
            k.annotations += st.scored.len();
            p.items += 1;
            p.complete += complete as usize;
            p.annotations += st.scored.len();
            workers.extend(st.scored.iter());
        }
        p.workers = workers.len();
        p
    }

    /// Per-item counts in key order.
    pub fn item_counts(&self) -> Vec<ItemCount> {
        self.items
            .iter()
            .map(|(key, st)| ItemCount {
                key: key.clone(),
                collected: st.scored.len(),
                served: st.served.len(),
            })
            .collect()
    }

    pub fn record(&self, id: &AnnotationId) -> Option<&AnnotationRecord> {
        self.ids.get(id).map(|&i| &self.log[i])
    }

    pub fn log(&self) -> &[AnnotationRecord] {
        &self.log
    }

    pub fn aggregates(&self, cfg: &ConsensusConfig) -> Result<Aggregates> {
        aggregate_log(&self.log, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_items(n: usize) -> Vec<ItemInfo> {
        (0..n)
            .map(|i| ItemInfo {
                key: ItemKey {
                    task_kind: TaskKind::PairIdentity,
                    item_ref: format!("p{i}"),
                    attribute: None,
                },
                face_ids: vec![format!("l{i}").into(), format!("r{i}").into()],
                image_refs: vec![None, None],
            })
            .collect()
    }

    fn rating(task: &Task, worker: &WorkerId, score: u8) -> AnnotationRecord {
        AnnotationRecord {
            annotation_id: format!("{}-{}", task.item.key.item_ref, worker).into(),
            task_kind: task.item.key.task_kind,
            item_ref: task.item.key.item_ref.clone(),
            attribute: task.item.key.attribute,
            worker_id: worker.clone(),
            score,
            timestamp: 0,
        }
    }

    #[test]
    fn least_annotated_first_and_no_repeats() {
        let mut q = TaskQueue::new(
            pair_items(3),
            QueueConfig {
                required: 2,
                overflow: 0,
            },
        )
        .unwrap();
        let a: WorkerId = "a".into();
        let b: WorkerId = "b".into();
        let t = q.next_task(&a, TaskKind::PairIdentity).unwrap();
        assert_eq!(t.item.key.item_ref, "p0");
        q.submit(rating(&t, &a, 1)).unwrap();
        let seen: Vec<String> = std::iter::from_fn(|| q.next_task(&a, TaskKind::PairIdentity))
            .map(|t| t.item.key.item_ref)
            .collect();
        assert_eq!(seen, vec!["p1", "p2"]);
        // b gets an item nobody has rated yet before p0
        let tb = q.next_task(&b, TaskKind::PairIdentity).unwrap();
        assert_ne!(tb.item.key.item_ref, "p0");
        assert!(q.next_task(&a, TaskKind::SingleAttribute).is_none());
    }

    #[test]
    fn submission_rules() {
        let mut q = TaskQueue::new(pair_items(1), QueueConfig::default()).unwrap();
        let a: WorkerId = "a".into();
        let fake = Task {
            item: pair_items(1).remove(0),
            required: 9,
            collected: 0,
        };
        assert!(matches!(
            q.submit(rating(&fake, &a, 2)),
            Err(Error::UnassignedSubmission { .. })
        ));
        let t = q.next_task(&a, TaskKind::PairIdentity).unwrap();
        let r = rating(&t, &a, 2);
        assert_eq!(q.submit(r.clone()).unwrap(), SubmitOutcome::Accepted);
        assert_eq!(q.submit(r.clone()).unwrap(), SubmitOutcome::Duplicate);
        assert_eq!(q.log().len(), 1);
        let mut changed = r.clone();
        changed.score = 3;
        assert!(q.submit(changed).is_err());
        let mut second = r.clone();
        second.annotation_id = "other".into();
        assert!(q.submit(second).is_err());
        let mut bad = r;
        bad.annotation_id = "x".into();
        bad.score = 5;
        assert!(matches!(q.submit(bad), Err(Error::ScoreOutOfRange(5))));
        let mut unknown = rating(&t, &a, 1);
        unknown.item_ref = "nope".into();
        unknown.annotation_id = "y".into();
        assert!(matches!(q.submit(unknown), Err(Error::UnknownItem(_))));
    }

    #[test]
    fn completes_after_required_ratings() {
        let mut q = TaskQueue::new(pair_items(2), QueueConfig::default()).unwrap();
        for w in 0..12 {
            let worker: WorkerId = format!("w{w}").into();
            while let Some(t) = q.next_task(&worker, TaskKind::PairIdentity) {
                q.submit(rating(&t, &worker, (w % 5) as u8)).unwrap();
            }
        }
        let p = q.progress();
        assert_eq!(
            (p.items, p.complete, p.annotations, p.workers),
            (2, 2, 18, 9)
        );
        let agg = q.aggregates(&ConsensusConfig::default()).unwrap();
        assert_eq!(agg.hcic.len(), 2);
        assert!(agg.skipped.is_empty());
    }

    #[test]
    fn log_replay_reconstructs_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotations.jsonl");
        let mut q = TaskQueue::new(pair_items(3), QueueConfig::default())
            .unwrap()
            .with_log(&path)
            .unwrap();
        for w in 0..9 {
            let worker: WorkerId = format!("w{w}").into();
            while let Some(t) = q.next_task(&worker, TaskKind::PairIdentity) {
                let r = rating(&t, &worker, ((w * 7 + t.item.key.item_ref.len()) % 5) as u8);
                q.submit(r.clone()).unwrap();
                q.submit(r).unwrap();
            }
        }
        let expected = q.aggregates(&ConsensusConfig::default()).unwrap();
        drop(q);
        let reopened = TaskQueue::new(pair_items(3), QueueConfig::default())
            .unwrap()
            .with_log(&path)
            .unwrap();
        assert_eq!(reopened.log().len(), 27);
        assert_eq!(
            reopened.aggregates(&ConsensusConfig::default()).unwrap(),
            expected
        );
        assert_eq!(reopened.progress().complete, 3);
    }

    #[test]
    fn duplicate_items_rejected() {
        let mut items = pair_items(2);
        items.push(items[0].clone());
        assert!(TaskQueue::new(items, QueueConfig::default()).is_err());
    }
}
