//! Rating collection, simulated raters and consensus aggregation.

pub mod consensus;
pub mod queue;
pub mod simulate;

pub use consensus::{
    aggregate_log, aggregate_single, compute_hcic, dispersion, rebin_attribute, uncanny_filter,
    Aggregates, ConsensusConfig, SingleAggregate, UncannyFiltered, REQUIRED_SCORES,
};
pub use queue::{
    collect_items, ItemCount, ItemInfo, ItemKey, Progress, QueueConfig, SubmitOutcome, Task,
    TaskQueue,
};
pub use simulate::{
    annotator_pool, default_pool, simulate_pair_annotations, simulate_single_annotations,
    SimulatedAnnotator,
};
