//! Shared helpers for integration tests: independent oracles, alignment and
//! correlation utilities, and random fixture builders.
//!
//! The oracles here deliberately avoid the library's inference code paths:
//! plain nested loops in linear space, so they stay meaningful as checks.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lthm_core::corpus::{Corpus, CorpusView, Document, Vocabulary};
use lthm_core::model::ModelParams;

/// Expected counts computed by materializing the posterior of every latent
/// configuration (word topic, proposal target, link topic) per token.
pub struct OracleStats {
    pub f: Array2<f64>,
    pub g: Array2<f64>,
    pub v: Array2<f64>,
    pub u: Array2<f64>,
    pub t: Array1<f64>,
}

pub fn enumerate_stats(view: &CorpusView, params: &ModelParams) -> OracleStats {
    let corpus = view.corpus();
    let (n_docs, k, w) = (params.n_docs(), params.n_topics(), params.word_count());
    let lambda_null = params.lambda[n_docs];
    let mut f = Array2::zeros((n_docs, k));
    let mut g = Array2::zeros((k, w));
    let mut v = Array2::zeros((n_docs, k));
    let mut u = Array2::zeros((n_docs, k));
    let mut t = Array1::zeros(n_docs);

    for d in 0..n_docs {
        let doc = corpus.doc(d);
        for (i, &word) in doc.tokens.iter().enumerate() {
            match view.link_at(d, i) {
                Some(e) => {
                    // Configurations: z^W = z^L = z, tau = e.
                    let weights: Vec<f64> = (0..k)
                        .map(|z| {
                            params.theta[[d, z]]
                                * params.beta[[z, word]]
                                * params.lambda[e]
                                * params.theta[[e, z]]
                        })
                        .collect();
                    let total: f64 = weights.iter().sum();
                    for z in 0..k {
                        let p = weights[z] / total;
                        f[[d, z]] += p;
                        g[[z, word]] += p;
                        v[[e, z]] += p;
                    }
                    // The proposal target is observed: all mass on tau = e.
                    t[e] += 1.0;
                }
                None => {
                    // Configurations: (z^W = zw, tau = null), and
                    // (z^W = zw, tau = tgt, z^L = zl) with zl != zw.
                    let a: Vec<f64> = (0..k)
                        .map(|z| params.theta[[d, z]] * params.beta[[z, word]])
                        .collect();
                    let mut total = 0.0;
                    for &az in &a {
                        total += az * lambda_null;
                    }
                    for tgt in 0..n_docs {
                        for (zw, &az) in a.iter().enumerate() {
                            for zl in 0..k {
                                if zl != zw {
                                    total += az * params.lambda[tgt] * params.theta[[tgt, zl]];
                                }
                            }
                        }
                    }
                    for (zw, &az) in a.iter().enumerate() {
                        let mut zw_mass = az * lambda_null / total;
                        for tgt in 0..n_docs {
                            for zl in 0..k {
                                if zl != zw {
                                    let p = az * params.lambda[tgt] * params.theta[[tgt, zl]] / total;
                                    zw_mass += p;
                                    u[[tgt, zl]] += p;
                                    t[tgt] += p;
                                }
                            }
                        }
                        f[[d, zw]] += zw_mass;
                        g[[zw, word]] += zw_mass;
                    }
                }
            }
        }
    }
    OracleStats { f, g, v, u, t }
}

/// Independent plain-LDA MAP EM state (theta D×K, beta K×W).
#[derive(Clone)]
pub struct LdaState {
    pub theta: Array2<f64>,
    pub beta: Array2<f64>,
}

/// One LDA EM step, written from the update equations directly.
pub fn lda_em_step(corpus: &Corpus, state: &LdaState, alpha: &[f64], eta: &[f64]) -> LdaState {
    let (n_docs, k) = state.theta.dim();
    let w = state.beta.ncols();
    let mut doc_topic = Array2::<f64>::zeros((n_docs, k));
    let mut topic_word = Array2::<f64>::zeros((k, w));
    for d in 0..n_docs {
        for &word in &corpus.doc(d).tokens {
            let q: Vec<f64> = (0..k)
                .map(|z| state.theta[[d, z]] * state.beta[[z, word]])
                .collect();
            let total: f64 = q.iter().sum();
            for z in 0..k {
                doc_topic[[d, z]] += q[z] / total;
                topic_word[[z, word]] += q[z] / total;
            }
        }
    }
    let floor_normalize = |row: &mut Vec<f64>| {
        let mut sum = 0.0;
        for x in row.iter_mut() {
            if *x < 1e-12 {
                *x = 1e-12;
            }
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    };
    let mut theta = Array2::zeros((n_docs, k));
    for d in 0..n_docs {
        let mut row: Vec<f64> = (0..k).map(|z| doc_topic[[d, z]] + alpha[z] - 1.0).collect();
        floor_normalize(&mut row);
        for (z, x) in row.into_iter().enumerate() {
            theta[[d, z]] = x;
        }
    }
    let mut beta = Array2::zeros((k, w));
    for z in 0..k {
        let mut row: Vec<f64> = (0..w).map(|ww| topic_word[[z, ww]] + eta[ww] - 1.0).collect();
        floor_normalize(&mut row);
        for (ww, x) in row.into_iter().enumerate() {
            beta[[z, ww]] = x;
        }
    }
    LdaState { theta, beta }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..n {
            let mut q: Vec<usize> = p.iter().map(|&x| if x >= slot { x + 1 } else { x }).collect();
            q.insert(0, slot);
            out.push(q);
        }
    }
    out
}

/// Best topic alignment by exhaustive permutation search (small K); returns
/// the permutation mapping true row z to estimated row perm[z] and the mean
/// cosine similarity under it.
pub fn align_topics(true_rows: &Array2<f64>, est_rows: &Array2<f64>) -> (Vec<usize>, f64) {
    let k = true_rows.nrows();
    assert!(k <= 8, "exhaustive alignment is factorial in K");
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for perm in permutations(k) {
        let mean: f64 = (0..k)
            .map(|z| {
                cosine(
                    true_rows.row(z).as_slice().unwrap(),
                    est_rows.row(perm[z]).as_slice().unwrap(),
                )
            })
            .sum::<f64>()
            / k as f64;
        if mean > best.1 {
            best = (perm, mean);
        }
    }
    best
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Probability that a uniformly random ranking of `d` documents puts none of
/// the `t` true targets in its first `n` slots.
pub fn hypergeometric_miss(d: usize, t: usize, n: usize) -> f64 {
    let mut p = 1.0;
    for j in 0..n {
        if d - t < j + 1 {
            return 0.0;
        }
        p *= (d - t - j) as f64 / (d - j) as f64;
    }
    p
}

/// Random corpus: D docs of `n_tokens` words over a W-word vocabulary, each
/// token linking to a uniform target with probability `link_density`.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    n_docs: usize,
    vocab: usize,
    max_tokens: usize,
    link_density: f64,
) -> Corpus {
    let vocabulary = Vocabulary::from_words((0..vocab).map(|i| format!("w{i}")).collect()).unwrap();
    let documents: Vec<Document> = (0..n_docs)
        .map(|d| {
            let n = rng.random_range(1..=max_tokens);
            let tokens: Vec<usize> = (0..n).map(|_| rng.random_range(0..vocab)).collect();
            let mut link_at = BTreeMap::new();
            for i in 0..n {
                if rng.random::<f64>() < link_density {
                    link_at.insert(i, rng.random_range(0..n_docs));
                }
            }
            Document { doc_id: format!("d{d}"), tokens, link_at }
        })
        .collect();
    Corpus::from_parts(documents, vocabulary).unwrap()
}

/// Random parameters with a dominant no-link slot.
pub fn random_params(rng: &mut ChaCha8Rng, n_docs: usize, k: usize, w: usize) -> ModelParams {
    let simplex = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.02).collect();
        let sum: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= sum;
        }
        v
    };
    let mut theta = Array2::zeros((n_docs, k));
    for mut row in theta.rows_mut() {
        for (dst, src) in row.iter_mut().zip(simplex(rng, k)) {
            *dst = src;
        }
    }
    let mut beta = Array2::zeros((k, w));
    for mut row in beta.rows_mut() {
        for (dst, src) in row.iter_mut().zip(simplex(rng, w)) {
            *dst = src;
        }
    }
    let mut lambda = simplex(rng, n_docs + 1);
    lambda[n_docs] += 2.0;
    let sum: f64 = lambda.iter().sum();
    for x in lambda.iter_mut() {
        *x /= sum;
    }
    ModelParams { theta, beta, lambda: Array1::from_vec(lambda) }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
