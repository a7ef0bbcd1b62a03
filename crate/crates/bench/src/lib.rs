//! Benchmark fixtures: synthetic corpora with trained-shape parameters.

use lthm_core::corpus::Corpus;
use lthm_core::generator::{sample_corpus, GenConfig, TokensPerDoc};
use lthm_core::model::{init_params, Hyperparams, ModelParams, TrainConfig};

pub struct Fixture {
    pub corpus: Corpus,
    pub hyper: Hyperparams,
    pub params: ModelParams,
}

/// A sampled corpus plus freshly initialized parameters of matching shape.
pub fn fixture(docs: usize, topics: usize, vocab: usize, tokens: usize, seed: u64) -> Fixture {
    let gen = GenConfig {
        docs,
        topics,
        vocab,
        tokens_per_doc: TokensPerDoc::Fixed(tokens),
        alpha: 0.5,
        eta: 0.1,
        gamma_doc: 1.1,
        gamma_null: 4.0 * docs as f64,
        seed,
        pinned: None,
    };
    let corpus = sample_corpus(&gen).expect("valid generator config").corpus;
    let hyper = Hyperparams::reference(topics, vocab, corpus.total_tokens(), corpus.total_links());
    let mut config = TrainConfig::new(topics);
    config.seed = seed;
    let params = init_params(&corpus.full_view(), &hyper, &config).expect("valid init");
    Fixture { corpus, hyper, params }
}
