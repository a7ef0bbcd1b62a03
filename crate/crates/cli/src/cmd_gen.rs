use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;

use lthm_core::generator::{sample_corpus, write_truth, GenConfig};

use crate::manifest::RunManifest;
use crate::util::{create_writer, ensure_out_dir, open_reader};

#[derive(Args)]
pub struct GenArgs {
    /// JSON sampling configuration (docs, topics, vocab, tokens_per_doc,
    /// priors, seed, optional pinned parameters)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (corpus.jsonl, truth.jsonl, manifest.json)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: GenArgs) -> Result<()> {
    let started = Instant::now();
    let config: GenConfig = serde_json::from_reader(open_reader(&args.config)?)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let truth = sample_corpus(&config)?;

    ensure_out_dir(&args.out)?;
    let corpus_path = args.out.join("corpus.jsonl");
    truth.corpus.write_records(create_writer(&corpus_path)?)?;
    let truth_path = args.out.join("truth.jsonl");
    write_truth(&truth, create_writer(&truth_path)?)?;

    let mut manifest = RunManifest::new("gen");
    manifest.seed = Some(config.seed);
    manifest.config(&config)?;
    manifest.input("config", &args.config)?;
    manifest.outputs = vec!["corpus.jsonl".into(), "truth.jsonl".into()];
    manifest.timing("total_seconds", started.elapsed().as_secs_f64());
    manifest.write(&args.out)?;

    eprintln!(
        "sampled {} documents, {} tokens, {} links -> {}",
        truth.corpus.n_docs(),
        truth.corpus.total_tokens(),
        truth.corpus.total_links(),
        args.out.display()
    );
    Ok(())
}
