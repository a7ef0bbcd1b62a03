use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use lthm_core::corpus::{parse_corpus, VocabPolicy};
use lthm_core::eval::{emit_curves, evaluate, truth_from_view, EvalReport};
use lthm_core::ranking::RankedPrediction;
use lthm_core::Error;

use crate::manifest::RunManifest;
use crate::util::{create_writer, ensure_out_dir, open_reader, read_rankings, read_split_sets};

#[derive(Args)]
pub struct EvalArgs {
    /// Corpus file; held-out links are the ground truth
    #[arg(long)]
    pub corpus: PathBuf,
    /// Split file naming the test documents
    #[arg(long)]
    pub split_file: PathBuf,
    /// Rankings to score, as NAME=PATH; repeatable
    #[arg(long = "rankings", value_name = "NAME=PATH", required = true)]
    pub rankings: Vec<String>,
    /// Largest N for the hit/precision/recall curves
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
    /// Output directory (curves.csv, manifest.json)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ResolvedConfig {
    methods: Vec<String>,
    n_max: usize,
    test_docs: usize,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let started = Instant::now();
    let corpus = parse_corpus(open_reader(&args.corpus)?, &VocabPolicy::default())?;
    let (_, test_set) = read_split_sets(&corpus, &args.split_file)?;
    if test_set.is_empty() {
        bail!(Error::invalid("the split file names no test documents"));
    }
    let test_view = corpus.view(test_set.clone());
    let truth = truth_from_view(&test_view);

    let mut report = EvalReport { n_max: args.nmax, methods: Vec::new() };
    let mut parsed_specs = Vec::new();
    for spec in &args.rankings {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("--rankings {spec:?} is not NAME=PATH")))?;
        let path = PathBuf::from(path);
        let mut predictions: BTreeMap<usize, RankedPrediction> = BTreeMap::new();
        for record in read_rankings(&path)? {
            let doc = corpus
                .doc_id_to_index(&record.doc)
                .ok_or_else(|| Error::invalid(format!("unknown document id {:?}", record.doc)))?;
            if record.ranking.len() < args.nmax {
                bail!(Error::invalid(format!(
                    "method {name:?}: ranking for {:?} has {} entries, need at least {}",
                    record.doc,
                    record.ranking.len(),
                    args.nmax
                )));
            }
            let mut scores = vec![f64::NEG_INFINITY; corpus.n_docs()];
            for (target, score) in &record.ranking {
                let t = corpus.doc_id_to_index(target).ok_or_else(|| {
                    Error::invalid(format!("unknown ranking target {target:?}"))
                })?;
                scores[t] = *score;
            }
            predictions.insert(doc, RankedPrediction::from_scores(scores));
        }
        for &d in &test_set {
            if !predictions.contains_key(&d) {
                bail!(Error::invalid(format!(
                    "method {name:?} has no ranking for test document {:?}",
                    corpus.doc(d).doc_id
                )));
            }
        }
        report
            .methods
            .push(evaluate(name, &predictions, &truth, args.nmax).context(name.to_string())?);
        parsed_specs.push((name.to_string(), path));
    }

    ensure_out_dir(&args.out)?;
    emit_curves(&report, create_writer(&args.out.join("curves.csv"))?)?;

    let mut manifest = RunManifest::new("eval");
    manifest.config(ResolvedConfig {
        methods: parsed_specs.iter().map(|(n, _)| n.clone()).collect(),
        n_max: args.nmax,
        test_docs: test_set.len(),
    })?;
    manifest.input("corpus", &args.corpus)?;
    manifest.input("split", &args.split_file)?;
    for (name, path) in &parsed_specs {
        manifest.input(&format!("rankings:{name}"), path)?;
    }
    manifest.outputs = vec!["curves.csv".into()];
    manifest.timing("total_seconds", started.elapsed().as_secs_f64());
    manifest.write(&args.out)?;

    eprintln!(
        "evaluated {} methods on {} test documents -> {}",
        report.methods.len(),
        test_set.len(),
        args.out.display()
    );
    Ok(())
}
