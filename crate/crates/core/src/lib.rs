//! Topic-model inference for hypertext corpora.
//!
//! Links are first-class observations here: a link from a word to a document
//! is generated when the word's topic matches a topic drawn from the target
//! document's mixture, so link structure and text share one latent space.
//! The crate provides the EM trainer with linear-time statistic aggregation,
//! plain-LDA and link-LDA baselines, a generative sampler with retained
//! ground truth, and a ranking-based link-prediction harness.

pub mod baselines;
pub mod corpus;
pub mod em;
pub mod error;
pub mod eval;
pub mod generator;
pub mod math;
pub mod model;
pub mod ranking;

pub use baselines::{freq_rank, link_lda_score, link_lda_train, LinkLdaParams};
pub use corpus::{
    build_vocabulary, parse_corpus, parse_corpus_with_vocab, split_train_test, Corpus, CorpusView,
    Document, Vocabulary, VocabPolicy,
};
pub use em::{
    compute_token_posteriors, doc_link_mass, e_step, expected_u_fast, expected_u_naive, fold_in,
    m_step, score_links, token_posterior, train, EStep, EStepCounters, TokenPosterior, TrainTrace,
};
pub use error::{Error, Result};
pub use eval::{emit_curves, evaluate, truth_from_view, EvalReport, MethodCurves};
pub use generator::{
    empirical_link_rate, sample_corpus, write_truth, GenConfig, PinnedParams, SyntheticTruth,
    TokensPerDoc,
};
pub use model::{
    init_params, log_map_objective, Hyperparams, ModelParams, SavedModel, SufficientStats,
    TrainConfig,
};
pub use ranking::RankedPrediction;
