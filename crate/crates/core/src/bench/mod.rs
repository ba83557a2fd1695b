//! Benchmark pipeline: the discrimination task, pair-matching performance,
//! unit characterization, the population study and the depth comparison.

pub mod characterize;
pub mod depth;
pub mod performance;
pub mod store;
pub mod study;
pub mod task;

pub use characterize::{characterize, Characterization, CharacterizeOptions};
pub use depth::{
    compare_depths, pooled_diagram, run_depth_study, unit_survey, Contrast, DepthConfig,
    DepthStudy, UnitSummary,
};
pub use performance::{pair_matching_performance, score_pairs, split_items, LabeledPair, PairMatching};
pub use store::ArtifactStore;
pub use study::{
    audit_artifacts, correlate, handles, measures_from_artifacts, network_artifacts, recompute_measures, run_study,
    sample_references, BenchResult, CorrelationRow, CorrelationTable, NetworkArtifacts,
    NetworkRecord, StudyConfig, STUDY_MEASURES, MEASURE_COLUMNS,
};
pub use task::{generate_task_stimuli, TaskSpec};
