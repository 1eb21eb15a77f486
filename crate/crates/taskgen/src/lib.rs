//! Synthetic task generators: the seven regression function classes, the
//! token-retrieval and predict-then-retrieve tasks, and the scaled-down
//! word-classification task, all deterministic under their seeds.

mod batch;
mod embedding;
mod error;
mod function;
mod retrieval;
mod serde_helpers;

pub(crate) use serde_helpers::{serde_mat, serde_vec};

pub use batch::{sample_icl_batch, IclBatch, STREAM_BATCH};
pub use embedding::{default_cache_dir, EmbeddingId, EmbeddingTable, CACHE_ENV, STREAM_EMBED};
pub use error::{Result, TaskGenError};
pub use function::{
    sample_task, TaskFunction, TaskKind, TaskParams, DEFAULT_HIDDEN_DIM, STREAM_TASK,
};
pub use retrieval::{
    make_predict_retrieve_instance, make_retrieval_instance, make_word_classification_instance,
    predict_retrieve_margin, read_jsonl, write_jsonl, GeneratorMeta, PhiKind, RetrievalInstance,
    INPUT_ROWS, SCHEMA, STREAM_RETRIEVAL,
};
