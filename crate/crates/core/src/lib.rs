//! Overlap-aware BPE vocabulary induction for related multilingual corpora.
//!
//! Plain BPE picks the adjacent pair with the largest total frequency. The
//! trainer here scores a candidate token `k` with
//!
//! ```text
//! (1 - α) Σ_j f_kj  +  α Σ_{i ∈ LRL} max_{h ∈ HRL} ((f_ki^p + f_kh^p) / 2)^(1/p)
//! ```
//!
//! so tokens that a low-resource language shares with a related
//! high-resource language are inducted earlier. `α = 0` is exactly BPE.
//!
//! Besides training, the crate covers the surrounding measurement tooling:
//! size smoothing across languages ([`corpus`]), vocabulary composition and
//! overlap statistics ([`analysis`]), and synthetic corpora with a controlled
//! amount of token overlap ([`synthlab`]).

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod overlap_math;
pub mod synthlab;
pub mod tokenizer;
pub mod trainer;
pub mod vocab;

pub use corpus::{
    load_corpus, smoothing_multipliers, Language, LanguageId, MultilingualCorpus, ResourceClass, SizeBasis,
    SmoothingWeights, WordTable,
};
pub use error::{Error, Result};
pub use overlap_math::{generalized_mean, merge_score, overlap_term, MixWeight, Partition, PowerParam};
pub use tokenizer::{detokenize, encode_corpus, encoded_size, Tokenizer};
pub use trainer::{init_state, train, TieBreak, TrainerConfig, TrainerState};
pub use vocab::{load_vocab, save_vocab, MergeRule, Vocabulary, MARKER_ESCAPE, UNK_TOKEN};
