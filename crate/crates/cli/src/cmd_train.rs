use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use lthm_core::baselines::link_lda_train;
use lthm_core::corpus::{parse_corpus, write_split, Corpus, CorpusView, VocabPolicy};
use lthm_core::em::{train, TrainTrace};
use lthm_core::model::{Hyperparams, SavedModel, TrainConfig};

use crate::manifest::RunManifest;
use crate::util::{create_writer, ensure_out_dir, init_threads, open_reader};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Hypertext topic model with explicit link observations
    Lthm,
    /// Plain LDA (links disabled)
    Lda,
    /// link-LDA: citations drawn per topic from a K x D table
    LinkLda,
    /// In-degree frequency ranker
    Freq,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Lthm => "lthm",
            ModelKind::Lda => "lda",
            ModelKind::LinkLda => "link-lda",
            ModelKind::Freq => "freq",
        }
    }
}

#[derive(Args)]
pub struct TrainArgs {
    /// Corpus file (line-delimited JSON records)
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory (model.json, vocab.tsv, split.tsv, trace.csv, manifest.json)
    #[arg(long)]
    pub out: PathBuf,
    /// Model to train
    #[arg(long, value_enum, default_value = "lthm")]
    pub model: ModelKind,
    /// Number of topics
    #[arg(long, default_value_t = 20)]
    pub topics: usize,
    /// Symmetric document-topic prior
    #[arg(long, default_value_t = 1.1)]
    pub alpha: f64,
    /// Symmetric topic-word prior
    #[arg(long, default_value_t = 1.1)]
    pub eta: f64,
    /// Link-propensity prior for each document slot
    #[arg(long, default_value_t = 1.1)]
    pub gamma_doc: f64,
    /// Link-propensity prior for the no-link slot; 0 derives
    /// gamma_doc * tokens / max(links, 1) from the training view
    #[arg(long, default_value_t = 0.0)]
    pub gamma_null: f64,
    /// Maximum EM iterations
    #[arg(long, default_value_t = 600)]
    pub iters: usize,
    /// Relative objective-change stopping threshold
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed for the split and the parameter initialization
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Train fraction of the document split; 1 disables the held-out split
    #[arg(long, default_value_t = 0.9)]
    pub split: f64,
    /// Keep words seen at least this many times
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Stopword list, one word per line
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Weight of one citation relative to one word in the link-lda mixture
    #[arg(long, default_value_t = 1.0)]
    pub citation_weight: f64,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Fixed-order statistics merge for bit-reproducible runs (always on in
    /// this implementation; flag kept for interface stability)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub deterministic: bool,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    model: &'a str,
    topics: usize,
    alpha: f64,
    eta: f64,
    gamma_doc: f64,
    gamma_null: f64,
    iters: usize,
    tol: f64,
    seed: u64,
    train_fraction: f64,
    min_count: usize,
    stopword_count: usize,
    citation_weight: f64,
    threads: usize,
    deterministic: bool,
    disable_links: bool,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(args.threads)?;

    let stopwords: BTreeSet<String> = match &args.stopwords {
        Some(path) => open_reader(path)?
            .lines()
            .collect::<std::io::Result<BTreeSet<_>>>()?
            .into_iter()
            .filter(|w| !w.is_empty())
            .collect(),
        None => BTreeSet::new(),
    };
    let policy = VocabPolicy { min_count: args.min_count, stopwords };
    let corpus = parse_corpus(open_reader(&args.corpus)?, &policy)?;

    if !(args.split > 0.0 && args.split <= 1.0) {
        bail!(lthm_core::Error::invalid(format!(
            "train fraction {} outside (0, 1]",
            args.split
        )));
    }
    let (train_set, test_set): (BTreeSet<usize>, BTreeSet<usize>) = if args.split == 1.0 {
        ((0..corpus.n_docs()).collect(), BTreeSet::new())
    } else {
        let (train_view, test_view) =
            lthm_core::corpus::split_train_test(&corpus, 1.0 - args.split, args.seed)?;
        (train_view.sources().clone(), test_view.sources().clone())
    };
    let train_view = corpus.view(train_set);

    let gamma_null = if args.gamma_null > 0.0 {
        args.gamma_null
    } else {
        args.gamma_doc * corpus.total_tokens() as f64
            / train_view.visible_link_count().max(1) as f64
    };
    let hyper = Hyperparams::symmetric(
        args.topics,
        corpus.word_count(),
        args.alpha,
        args.eta,
        args.gamma_doc,
        gamma_null,
    );
    for warning in hyper.warnings() {
        eprintln!("warning: {warning}");
    }
    let mut config = TrainConfig::new(args.topics);
    config.max_iters = args.iters;
    config.tol = args.tol;
    config.seed = args.seed;
    config.disable_links = args.model == ModelKind::Lda;

    let train_start = Instant::now();
    let (saved, trace) = fit(&args, &corpus, &train_view, &hyper, &config)?;
    let train_seconds = train_start.elapsed().as_secs_f64();

    ensure_out_dir(&args.out)?;
    saved.write(create_writer(&args.out.join("model.json"))?)?;
    corpus.vocabulary().write_tsv(create_writer(&args.out.join("vocab.tsv"))?)?;
    write_split(&corpus, &test_set, create_writer(&args.out.join("split.tsv"))?)?;
    trace.write_csv(create_writer(&args.out.join("trace.csv"))?)?;

    let mut manifest = RunManifest::new("train");
    manifest.seed = Some(args.seed);
    manifest.config(ResolvedConfig {
        model: args.model.name(),
        topics: args.topics,
        alpha: args.alpha,
        eta: args.eta,
        gamma_doc: args.gamma_doc,
        gamma_null,
        iters: args.iters,
        tol: args.tol,
        seed: args.seed,
        train_fraction: args.split,
        min_count: args.min_count,
        stopword_count: policy.stopwords.len(),
        citation_weight: args.citation_weight,
        threads: args.threads,
        deterministic: args.deterministic,
        disable_links: config.disable_links,
    })?;
    manifest.input("corpus", &args.corpus)?;
    if let Some(path) = &args.stopwords {
        manifest.input("stopwords", path)?;
    }
    manifest.outputs = vec![
        "model.json".into(),
        "vocab.tsv".into(),
        "split.tsv".into(),
        "trace.csv".into(),
    ];
    manifest.timing("train_seconds", train_seconds);
    manifest.timing("total_seconds", started.elapsed().as_secs_f64());
    manifest.write(&args.out)?;

    if let Some(last) = trace.iterations.last() {
        eprintln!(
            "trained {} ({} iterations, objective {:.4}) -> {}",
            args.model.name(),
            trace.iterations.len(),
            last.objective,
            args.out.display()
        );
    } else {
        eprintln!("trained {} -> {}", args.model.name(), args.out.display());
    }
    Ok(())
}

fn fit(
    args: &TrainArgs,
    corpus: &Corpus,
    train_view: &CorpusView,
    hyper: &Hyperparams,
    config: &TrainConfig,
) -> Result<(SavedModel, TrainTrace)> {
    match args.model {
        ModelKind::Lthm | ModelKind::Lda => {
            let (params, trace) = train(train_view, hyper, config)?;
            let saved = SavedModel::from_params(args.model.name(), &params, corpus, hyper, config);
            Ok((saved, trace))
        }
        ModelKind::LinkLda => {
            let (params, trace) = link_lda_train(train_view, hyper, config, args.citation_weight)?;
            let full = lthm_core::model::ModelParams {
                theta: params.theta.clone(),
                beta: params.beta.clone(),
                lambda: ndarray::Array1::zeros(corpus.n_docs() + 1),
            };
            let mut saved = SavedModel::from_params("link-lda", &full, corpus, hyper, config);
            saved.lambda = Vec::new(); // not a parameter of this model
            saved.omega = Some(params.omega.iter().copied().collect());
            Ok((saved, trace))
        }
        ModelKind::Freq => {
            let counts = train_view.in_degree();
            let mut saved = SavedModel {
                version: 1,
                kind: "freq".into(),
                k: 0,
                d: corpus.n_docs(),
                w: corpus.word_count(),
                doc_ids: corpus.docs().iter().map(|d| d.doc_id.clone()).collect(),
                vocab_hash: corpus.vocabulary().digest(),
                theta: Vec::new(),
                beta: Vec::new(),
                lambda: Vec::new(),
                omega: None,
                in_degree: Some(counts.into_iter().map(|c| c as u64).collect()),
                hyper: hyper.clone(),
                config: config.clone(),
            };
            saved.config.topics = 0;
            Ok((saved, TrainTrace::default()))
        }
    }
}
