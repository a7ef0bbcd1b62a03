//! Synthetic corpus sampling from the two-stage generative process, with
//! ground-truth parameters and latents retained for recovery and oracle
//! tests.
//!
//! Stage one draws topic-word rows, per-document mixtures, and the text.
//! Stage two draws, for every token, a link proposal `tau` over documents
//! (or none); a proposal to document d draws a link topic from d's mixture
//! and materializes a link only when that topic matches the token's word
//! topic.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{sample_dirichlet, Hyperparams, ModelParams};

/// Document length model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TokensPerDoc {
    Fixed(usize),
    /// Uniform inclusive range.
    Range(usize, usize),
}

/// Optional fixed parameters; anything pinned bypasses its Dirichlet draw.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct PinnedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}

/// Sampling configuration. Hyperparameters are symmetric scalars here; the
/// gamma pair controls how strongly the no-link slot dominates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenConfig {
    pub docs: usize,
    pub topics: usize,
    pub vocab: usize,
    pub tokens_per_doc: TokensPerDoc,
    #[serde(default = "default_prior")]
    pub alpha: f64,
    #[serde(default = "default_prior")]
    pub eta: f64,
    #[serde(default = "default_prior")]
    pub gamma_doc: f64,
    pub gamma_null: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned: Option<PinnedParams>,
}

fn default_prior() -> f64 {
    1.1
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        if self.docs < 1 || self.topics < 1 || self.vocab < 1 {
            return Err(Error::invalid("docs, topics, and vocab must all be at least 1"));
        }
        match self.tokens_per_doc {
            TokensPerDoc::Fixed(n) if n < 1 => {
                return Err(Error::invalid("tokens_per_doc must be at least 1"))
            }
            TokensPerDoc::Range(lo, hi) if lo < 1 || hi < lo => {
                return Err(Error::invalid("tokens_per_doc range must satisfy 1 <= lo <= hi"))
            }
            _ => {}
        }
        if self.alpha <= 0.0 || self.eta <= 0.0 || self.gamma_doc <= 0.0 || self.gamma_null <= 0.0 {
            return Err(Error::invalid("hyperparameters must be strictly positive"));
        }
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams::symmetric(
            self.topics,
            self.vocab,
            self.alpha,
            self.eta,
            self.gamma_doc,
            self.gamma_null,
        )
    }
}

/// A sampled corpus with the parameters and per-token latents behind it.
///
/// `tau[d][i]` is the link proposal for token i of document d (None when the
/// no-link slot was drawn); `zl[d][i]` the link topic drawn for a proposal.
/// A link exists at (d, i) iff `tau` is a document and `zl == zw`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub params: ModelParams,
    pub corpus: Corpus,
    pub zw: Vec<Vec<usize>>,
    pub tau: Vec<Vec<Option<usize>>>,
    pub zl: Vec<Vec<Option<usize>>>,
}

impl SyntheticTruth {
    /// Re-applies the link decision rule to the recorded latents and checks
    /// it reproduces exactly the links stored in the corpus.
    pub fn replay_is_consistent(&self) -> bool {
        for (d, doc) in self.corpus.docs().iter().enumerate() {
            for i in 0..doc.len() {
                let expected = match (self.tau[d][i], self.zl[d][i]) {
                    (Some(t), Some(zl)) if zl == self.zw[d][i] => Some(t),
                    _ => None,
                };
                if doc.link_at.get(&i).copied() != expected {
                    return false;
                }
            }
        }
        true
    }
}

fn pinned_matrix(rows: usize, cols: usize, src: &[Vec<f64>], name: &str) -> Result<Array2<f64>> {
    if src.len() != rows || src.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid(format!("pinned {name} has the wrong shape")));
    }
    let mut out = Array2::zeros((rows, cols));
    for (r, row) in src.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("pinned {name} row {r} is not on the simplex")));
        }
        for (c, &x) in row.iter().enumerate() {
            out[[r, c]] = x / sum;
        }
    }
    Ok(out)
}

fn sample_categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let x: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if x < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Inclusive-prefix-sum table for O(log n) categorical draws.
fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|&w| {
            acc += w;
            acc
        })
        .collect()
}

fn sample_from_cumulative(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let x: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
}

/// Samples a corpus and keeps every latent variable.
pub fn sample_corpus(config: &GenConfig) -> Result<SyntheticTruth> {
    config.validate()?;
    let (d_count, k, w) = (config.docs, config.topics, config.vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pinned = config.pinned.clone().unwrap_or_default();

    let beta = match &pinned.beta {
        Some(rows) => pinned_matrix(k, w, rows, "beta")?,
        None => {
            let eta = vec![config.eta; w];
            let mut m = Array2::zeros((k, w));
            for mut row in m.rows_mut() {
                for (dst, src) in row.iter_mut().zip(sample_dirichlet(&eta, &mut rng)) {
                    *dst = src;
                }
            }
            m
        }
    };
    let theta = match &pinned.theta {
        Some(rows) => pinned_matrix(d_count, k, rows, "theta")?,
        None => {
            let alpha = vec![config.alpha; k];
            let mut m = Array2::zeros((d_count, k));
            for mut row in m.rows_mut() {
                for (dst, src) in row.iter_mut().zip(sample_dirichlet(&alpha, &mut rng)) {
                    *dst = src;
                }
            }
            m
        }
    };
    let lambda = match &pinned.lambda {
        Some(v) => {
            if v.len() != d_count + 1 {
                return Err(Error::invalid("pinned lambda must have D+1 entries"));
            }
            let sum: f64 = v.iter().sum();
            if v.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::invalid("pinned lambda is not on the simplex"));
            }
            Array1::from_vec(v.iter().map(|&x| x / sum).collect())
        }
        None => {
            let mut gamma = vec![config.gamma_doc; d_count];
            gamma.push(config.gamma_null);
            Array1::from_vec(sample_dirichlet(&gamma, &mut rng))
        }
    };

    // Stage one: text.
    let mut zw: Vec<Vec<usize>> = Vec::with_capacity(d_count);
    let mut words: Vec<Vec<usize>> = Vec::with_capacity(d_count);
    // Per-topic cumulative word tables reused across all tokens.
    let beta_cdfs: Vec<Vec<f64>> = (0..k).map(|z| cumulative(beta.row(z).as_slice().unwrap())).collect();
    for d in 0..d_count {
        let n = match config.tokens_per_doc {
            TokensPerDoc::Fixed(n) => n,
            TokensPerDoc::Range(lo, hi) => rng.random_range(lo..=hi),
        };
        let theta_d = theta.row(d).to_vec();
        let mut z_doc = Vec::with_capacity(n);
        let mut w_doc = Vec::with_capacity(n);
        for _ in 0..n {
            let z = sample_categorical(&theta_d, &mut rng);
            let word = sample_from_cumulative(&beta_cdfs[z], &mut rng);
            z_doc.push(z);
            w_doc.push(word);
        }
        zw.push(z_doc);
        words.push(w_doc);
    }

    // Stage two: link proposals over the finished text. The no-link slot is
    // tested first: it dominates, and a full scan over documents per token
    // would make large corpora quadratic-ish in practice.
    let lambda_vec = lambda.to_vec();
    let lambda_null = lambda_vec[d_count];
    let mut tau: Vec<Vec<Option<usize>>> = Vec::with_capacity(d_count);
    let mut zl: Vec<Vec<Option<usize>>> = Vec::with_capacity(d_count);
    let mut links: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); d_count];
    for d in 0..d_count {
        let n = words[d].len();
        let mut tau_doc = Vec::with_capacity(n);
        let mut zl_doc = Vec::with_capacity(n);
        for i in 0..n {
            let x: f64 = rng.random();
            if x < lambda_null {
                tau_doc.push(None);
                zl_doc.push(None);
                continue;
            }
            let mut rest = x - lambda_null;
            let mut pick = d_count - 1;
            for (t, &w) in lambda_vec[..d_count].iter().enumerate() {
                if rest < w {
                    pick = t;
                    break;
                }
                rest -= w;
            }
            let theta_t = theta.row(pick);
            let zl_draw = sample_categorical(theta_t.as_slice().unwrap(), &mut rng);
            tau_doc.push(Some(pick));
            zl_doc.push(Some(zl_draw));
            if zl_draw == zw[d][i] {
                links[d].insert(i, pick);
            }
        }
        tau.push(tau_doc);
        zl.push(zl_doc);
    }

    let id_width = (d_count.max(2) - 1).to_string().len();
    let documents: Vec<Document> = (0..d_count)
        .map(|d| Document {
            doc_id: format!("d{:0width$}", d, width = id_width),
            tokens: std::mem::take(&mut words[d]),
            link_at: std::mem::take(&mut links[d]),
        })
        .collect();
    let vocab = Vocabulary::from_words((0..w).map(|i| format!("w{i}")).collect())?;
    let corpus = Corpus::from_parts(documents, vocab)?;
    let params = ModelParams { theta, beta, lambda };
    Ok(SyntheticTruth { params, corpus, zw, tau, zl })
}

/// Observed link frequencies conditioned on the source token's topic.
#[derive(Debug, Clone)]
pub struct LinkRates {
    /// K×D: fraction of topic-z tokens that link to document d.
    pub rate: Array2<f64>,
    /// Number of tokens observed per topic.
    pub tokens_per_topic: Vec<usize>,
}

/// Empirical per-(source-topic, target) link rates; converges to
/// `lambda_d · theta_d(z)` as token counts grow.
pub fn empirical_link_rate(truth: &SyntheticTruth) -> LinkRates {
    let k = truth.params.n_topics();
    let d_count = truth.corpus.n_docs();
    let mut counts = Array2::<f64>::zeros((k, d_count));
    let mut totals = vec![0usize; k];
    for (d, doc) in truth.corpus.docs().iter().enumerate() {
        for i in 0..doc.len() {
            let z = truth.zw[d][i];
            totals[z] += 1;
            if let Some(&target) = doc.link_at.get(&i) {
                counts[[z, target]] += 1.0;
            }
        }
    }
    let mut rate = counts;
    for z in 0..k {
        if totals[z] > 0 {
            for t in 0..d_count {
                rate[[z, t]] /= totals[z] as f64;
            }
        }
    }
    LinkRates { rate, tokens_per_topic: totals }
}

/// Truth-file records: one `params` line, then one `latents` line per doc.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TruthRecord {
    Params {
        theta: Vec<f64>,
        beta: Vec<f64>,
        lambda: Vec<f64>,
        k: usize,
        d: usize,
        w: usize,
    },
    Latents {
        doc: String,
        zw: Vec<usize>,
        tau: Vec<Option<usize>>,
        zl: Vec<Option<usize>>,
    },
}

/// Writes the ground truth in the same line-delimited record syntax as the
/// corpus file.
pub fn write_truth<W: Write>(truth: &SyntheticTruth, mut w: W) -> Result<()> {
    let rec = TruthRecord::Params {
        theta: truth.params.theta.iter().copied().collect(),
        beta: truth.params.beta.iter().copied().collect(),
        lambda: truth.params.lambda.to_vec(),
        k: truth.params.n_topics(),
        d: truth.params.n_docs(),
        w: truth.params.word_count(),
    };
    serde_json::to_writer(&mut w, &rec).map_err(|e| Error::invalid(e.to_string()))?;
    writeln!(w)?;
    for (d, doc) in truth.corpus.docs().iter().enumerate() {
        let rec = TruthRecord::Latents {
            doc: doc.doc_id.clone(),
            zw: truth.zw[d].clone(),
            tau: truth.tau[d].clone(),
            zl: truth.zl[d].clone(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}
