//! Hyperdimensional computing classifier for two-class EEG recordings.
//!
//! The pipeline:
//!
//! 1. [`preprocess`]: drop the first samples, clip outliers at pooled
//!    percentiles, average down by a fixed factor, quantise each channel
//!    onto `L` levels.
//! 2. [`encoder`]: cut each channel into non-overlapping n-grams, encode each
//!    n-gram by binding rotated level vectors, bind with the channel's item
//!    vector and bundle across channels.
//! 3. [`memory`]: accumulate class prototypes under a similarity gate;
//!    classify windows by the nearer prototype (cosine).
//! 4. [`classifier`]: a patient is correct when strictly more than half of
//!    its windows are.
//!
//! [`dataio`] reads and writes datasets and [`snapshot`] persists models.

pub mod classifier;
pub mod dataio;
pub mod encoder;
pub mod error;
pub mod hv;
pub mod memory;
pub mod preprocess;
pub mod snapshot;

pub use classifier::{
    fit, incremental_sweep, repeated_holdout, run_experiment, train, EvalReport, PatientPrediction, PipelineParams,
    SplitConfig, StatsScope, SweepConfig, SweepTable, TrainedModel,
};
pub use dataio::{load_dataset, Dataset, DatasetManifest, SplitCounts, SyntheticSpec};
pub use encoder::{EncodedNGram, NGramWindow, SpatioTemporalEncoder};
pub use error::{HdcError, Result};
pub use hv::{bind, bundle, cosine_similarity, hamming_distance, permute, random_bipolar, Hypervector, Seed};
pub use memory::{AssociativeMemory, Class, ContinuousItemMemory, ItemMemory, QueryResult};
pub use preprocess::{ChannelStats, EegRecording, PreprocessParams, QuantizedRecording};

/// Purpose numbers for [`Seed::derive`]. Every random stream in an
/// experiment descends from one root seed through these.
pub mod seed_purpose {
    pub const ITEM_MEMORY: u64 = 1;
    pub const LEVEL_MEMORY: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const SYNTHETIC: u64 = 4;
    pub const RUN: u64 = 5;
}
