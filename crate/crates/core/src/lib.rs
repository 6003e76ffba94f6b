//! Keyframe selection by global irreplaceability.
//!
//! Given `N` frame embeddings and one query embedding, the selector scores each
//! frame by `relevance × directed diversity`, where directed diversity is the
//! squared distance to the closest *more relevant* frame. Frames are picked in
//! small batches; after each batch the survivors are re-scored so that frames
//! previously shadowed by a chosen frame can surface as temporal context.
//!
//! Modules:
//! - [`math`]: embedding containers and the vector primitives everything else uses.
//! - [`selector`]: the batched irreplaceability selector and its incremental twin.
//! - [`baselines`]: uniform, relevance-only, undirected-diversity and MMR-greedy selectors.
//! - [`synth`]: seeded synthetic "videos" with planted events, metrics and sweeps.
//! - [`io`]: `.npy` / JSON embedding files, candidate subsampling and report writers.

pub mod baselines;
pub mod error;
pub mod io;
pub mod math;
pub mod selector;
pub mod synth;

pub use error::{Error, Result};
pub use math::{DistanceMatrix, EmbeddingMatrix, QueryEmbedding};
pub use selector::{
    select, select_incremental, select_with_relevance, OutputOrder, ScoreTable, SelectionResult,
    SelectorConfig, TieBreak,
};

/// How data-parallel loops are executed.
///
/// `Parallel` uses rayon when the `parallel` feature is enabled and silently
/// runs sequentially otherwise. Both paths produce bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this execution mode will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}
