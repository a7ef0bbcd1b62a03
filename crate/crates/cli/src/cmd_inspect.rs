use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;

use lthm_core::Error;

use crate::util::{load_model, load_vocab};

#[derive(Args)]
pub struct InspectArgs {
    /// Trained lthm/lda model file
    #[arg(long)]
    pub model: PathBuf,
    /// Vocabulary file; without it, word ids are printed
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Words to show per topic
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    /// Link targets to show per topic
    #[arg(long, default_value_t = 2)]
    pub top_links: usize,
}

pub fn run(args: InspectArgs) -> Result<()> {
    let saved = load_model(&args.model)?;
    if saved.kind != "lthm" && saved.kind != "lda" {
        bail!(Error::invalid(format!(
            "inspect needs an lthm or lda model, got {:?}",
            saved.kind
        )));
    }
    let vocab = match &args.vocab {
        Some(path) => {
            let v = load_vocab(path)?;
            if v.digest() != saved.vocab_hash {
                bail!(Error::invalid("vocabulary file does not match the model's vocabulary hash"));
            }
            Some(v)
        }
        None => None,
    };
    let params = saved.to_params()?;
    let k = params.n_topics();
    let d = params.n_docs();

    let mut report = String::new();
    for z in 0..k {
        report.push_str(&format!("topic {z}\n"));
        let mut words: Vec<(usize, f64)> = params.beta.row(z).iter().copied().enumerate().collect();
        words.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(w, p) in words.iter().take(args.top_words) {
            match &vocab {
                Some(v) => report.push_str(&format!("  word {:<24} {p:.4}\n", v.word(w))),
                None => report.push_str(&format!("  word #{w:<23} {p:.4}\n")),
            }
        }
        // Probability a topic-z link proposal lands on each document,
        // normalized over documents.
        let weights: Vec<f64> = (0..d).map(|t| params.lambda[t] * params.theta[[t, z]]).collect();
        let total: f64 = weights.iter().sum();
        let mut targets: Vec<(usize, f64)> = weights
            .into_iter()
            .map(|wgt| if total > 0.0 { wgt / total } else { 0.0 })
            .enumerate()
            .collect();
        targets.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(t, p) in targets.iter().take(args.top_links) {
            report.push_str(&format!("  link {:<24} {p:.4}\n", saved.doc_ids[t]));
        }
        report.push('\n');
    }
    // A closed pipe (e.g. `lthm inspect ... | head`) is not an error.
    use std::io::Write;
    if let Err(e) = std::io::stdout().write_all(report.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    Ok(())
}
