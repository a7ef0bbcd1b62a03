use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use ndarray::Array2;
use serde::Serialize;

use lthm_core::baselines::{link_lda_score, LinkLdaParams};
use lthm_core::corpus::{parse_corpus_with_vocab, Corpus};
use lthm_core::em::{fold_in, score_links, DEFAULT_FOLD_IN_ITERS};
use lthm_core::model::{ModelParams, SavedModel};
use lthm_core::ranking::RankedPrediction;
use lthm_core::Error;

use crate::manifest::RunManifest;
use crate::util::{
    create_writer, ensure_out_dir, init_threads, load_model, load_vocab, open_reader,
    read_split_sets, write_ranking_line,
};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Test,
    Train,
    All,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Trained model file
    #[arg(long)]
    pub model: PathBuf,
    /// Vocabulary file written at training time
    #[arg(long)]
    pub vocab: PathBuf,
    /// Corpus file; document ids must match the model
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory (rankings.jsonl, manifest.json)
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated document ids to rank for (default: see --subset)
    #[arg(long, value_delimiter = ',')]
    pub docs: Vec<String>,
    /// Split file; selects the documents to rank when --docs is absent
    #[arg(long)]
    pub split_file: Option<PathBuf>,
    /// Which side of the split to rank when --split-file is given
    #[arg(long, value_enum, default_value = "test")]
    pub subset: Subset,
    /// Re-estimate each document's topic mixture from its text instead of
    /// using the trained row
    #[arg(long, default_value_t = false)]
    pub fold_in: bool,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    model_kind: &'a str,
    subset: Option<Subset>,
    explicit_docs: usize,
    fold_in: bool,
}

enum Scorer {
    Lthm(ModelParams),
    LinkLda(LinkLdaParams),
    Freq(RankedPrediction),
}

pub fn run(args: PredictArgs) -> Result<()> {
    let started = Instant::now();
    init_threads(args.threads)?;

    let saved = load_model(&args.model)?;
    let vocab = load_vocab(&args.vocab)?;
    if vocab.digest() != saved.vocab_hash {
        bail!(Error::invalid("vocabulary file does not match the model's vocabulary hash"));
    }
    let corpus = parse_corpus_with_vocab(open_reader(&args.corpus)?, vocab)?;
    let corpus_ids: Vec<&str> = corpus.docs().iter().map(|d| d.doc_id.as_str()).collect();
    if corpus_ids != saved.doc_ids.iter().map(String::as_str).collect::<Vec<_>>() {
        bail!(Error::invalid("corpus documents do not match the model's document list"));
    }

    let docs = requested_docs(&args, &corpus)?;
    let scorer = build_scorer(&saved)?;
    if args.fold_in && !matches!(scorer, Scorer::Lthm(_)) {
        bail!(Error::invalid("--fold-in applies only to lthm/lda models"));
    }

    ensure_out_dir(&args.out)?;
    let mut out = create_writer(&args.out.join("rankings.jsonl"))?;
    for &d in &docs {
        let prediction = match &scorer {
            Scorer::Lthm(params) => {
                let tokens = &corpus.doc(d).tokens;
                if args.fold_in {
                    let theta = fold_in(tokens, params, &saved.hyper, DEFAULT_FOLD_IN_ITERS)?;
                    score_links(tokens, theta.as_slice().unwrap(), params)
                } else {
                    score_links(tokens, params.theta.row(d).as_slice().unwrap(), params)
                }
            }
            Scorer::LinkLda(params) => {
                link_lda_score(params.theta.row(d).as_slice().unwrap(), params)
            }
            Scorer::Freq(ranking) => ranking.clone(),
        };
        write_ranking_line(&mut out, &corpus, d, &prediction)?;
    }
    drop(out);

    let mut manifest = RunManifest::new("predict");
    manifest.config(ResolvedConfig {
        model_kind: &saved.kind,
        subset: args.split_file.as_ref().map(|_| args.subset),
        explicit_docs: args.docs.len(),
        fold_in: args.fold_in,
    })?;
    manifest.input("model", &args.model)?;
    manifest.input("vocab", &args.vocab)?;
    manifest.input("corpus", &args.corpus)?;
    if let Some(path) = &args.split_file {
        manifest.input("split", path)?;
    }
    manifest.outputs = vec!["rankings.jsonl".into()];
    manifest.timing("total_seconds", started.elapsed().as_secs_f64());
    manifest.write(&args.out)?;

    eprintln!("ranked {} documents -> {}", docs.len(), args.out.display());
    Ok(())
}

fn requested_docs(args: &PredictArgs, corpus: &Corpus) -> Result<Vec<usize>> {
    if !args.docs.is_empty() {
        return args
            .docs
            .iter()
            .map(|id| {
                corpus
                    .doc_id_to_index(id)
                    .ok_or_else(|| Error::invalid(format!("unknown document id {id:?}")).into())
            })
            .collect();
    }
    if let Some(path) = &args.split_file {
        let (train, test) = read_split_sets(corpus, path)?;
        let set = match args.subset {
            Subset::Test => test,
            Subset::Train => train,
            Subset::All => (0..corpus.n_docs()).collect(),
        };
        if set.is_empty() {
            bail!(Error::invalid("the selected split subset is empty"));
        }
        return Ok(set.into_iter().collect());
    }
    Ok((0..corpus.n_docs()).collect())
}

fn build_scorer(saved: &SavedModel) -> Result<Scorer> {
    match saved.kind.as_str() {
        "lthm" | "lda" => Ok(Scorer::Lthm(saved.to_params()?)),
        "link-lda" => {
            let omega = saved
                .omega
                .as_ref()
                .ok_or_else(|| Error::invalid("link-lda model is missing its omega table"))?;
            let theta = Array2::from_shape_vec((saved.d, saved.k), saved.theta.clone())
                .map_err(|e| Error::invalid(format!("theta shape: {e}")))?;
            let beta = Array2::from_shape_vec((saved.k, saved.w), saved.beta.clone())
                .map_err(|e| Error::invalid(format!("beta shape: {e}")))?;
            let omega = Array2::from_shape_vec((saved.k, saved.d), omega.clone())
                .map_err(|e| Error::invalid(format!("omega shape: {e}")))?;
            Ok(Scorer::LinkLda(LinkLdaParams { theta, beta, omega }))
        }
        "freq" => {
            let counts = saved
                .in_degree
                .as_ref()
                .ok_or_else(|| Error::invalid("freq model is missing its in-degree counts"))?;
            let scores: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            Ok(Scorer::Freq(RankedPrediction::from_scores(scores)))
        }
        other => bail!(Error::invalid(format!("unknown model kind {other:?}"))),
    }
}
