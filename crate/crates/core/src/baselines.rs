//! Comparison systems: in-degree frequency ranking and the link-LDA model,
//! which treats citations as a second observation type drawn per topic from
//! a K×D target distribution. Plain LDA comes from the main trainer with
//! links disabled.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusView;
use crate::error::{Error, Result};
use crate::math::{clamp_normalize, ln_dirichlet_const, KahanSum};
use crate::model::{sample_dirichlet, Hyperparams, TrainConfig};
use crate::em::{IterationRecord, TrainTrace, MONOTONICITY_SLACK};
use crate::ranking::RankedPrediction;

/// Ranks documents by visible in-degree, descending, ties by ascending
/// index. The same ranking serves every source document.
pub fn freq_rank(view: &CorpusView) -> RankedPrediction {
    let scores: Vec<f64> = view.in_degree().into_iter().map(|c| c as f64).collect();
    RankedPrediction::from_scores(scores)
}

/// link-LDA parameters: `omega` holds one citation distribution over target
/// documents per topic, K×D — a factor K more link parameters than the
/// hypertext model's single propensity vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLdaParams {
    pub theta: Array2<f64>,
    pub beta: Array2<f64>,
    pub omega: Array2<f64>,
}

impl LinkLdaParams {
    pub fn n_docs(&self) -> usize {
        self.theta.nrows()
    }

    pub fn n_topics(&self) -> usize {
        self.theta.ncols()
    }
}

/// EM for link-LDA.
///
/// Per document, word tokens and citation tokens (the multiset of visible
/// link targets, anchor positions discarded) each draw their own topic from
/// the document mixture. Citation counts enter the mixture update scaled by
/// `citation_weight` (the models in this family weight the two observation
/// types differently; 1.0 treats a citation like a word).
pub fn link_lda_train(
    view: &CorpusView,
    hyper: &Hyperparams,
    config: &TrainConfig,
    citation_weight: f64,
) -> Result<(LinkLdaParams, TrainTrace)> {
    config.validate()?;
    if citation_weight < 0.0 {
        return Err(Error::invalid("citation weight must be non-negative"));
    }
    let corpus = view.corpus();
    let (d_count, k, w) = (corpus.n_docs(), config.topics, corpus.word_count());
    hyper.validate(k, w)?;

    // Citation multiset per document.
    let mut citations: Vec<Vec<usize>> = vec![Vec::new(); d_count];
    for (src, _, target) in view.iter_links() {
        citations[src].push(target);
    }

    // Shared init scheme with the main trainer: theta rows then beta rows
    // from one seeded stream, so reduction tests can share a starting point.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = Array2::zeros((d_count, k));
    for mut row in theta.rows_mut() {
        for (dst, src) in row.iter_mut().zip(sample_dirichlet(&hyper.alpha, &mut rng)) {
            *dst = src;
        }
    }
    let mut beta = Array2::zeros((k, w));
    for mut row in beta.rows_mut() {
        for (dst, src) in row.iter_mut().zip(sample_dirichlet(&hyper.eta, &mut rng)) {
            *dst = src;
        }
    }
    let gamma_row = vec![hyper.gamma_doc; d_count];
    let mut omega = Array2::zeros((k, d_count));
    for mut row in omega.rows_mut() {
        for (dst, src) in row.iter_mut().zip(sample_dirichlet(&gamma_row, &mut rng)) {
            *dst = src;
        }
    }
    let mut params = LinkLdaParams { theta, beta, omega };

    let mut trace = TrainTrace::default();
    let mut prev: Option<f64> = None;
    for it in 0..config.max_iters {
        let started = std::time::Instant::now();
        let (next, objective) = link_lda_step(view, &citations, &params, hyper, citation_weight)?;
        if let Some(prev) = prev {
            if objective < prev - MONOTONICITY_SLACK {
                return Err(Error::numerical(format!(
                    "EM monotonicity violated at iteration {it}: {prev} -> {objective}"
                )));
            }
        }
        params = next;
        trace.iterations.push(IterationRecord {
            iter: it,
            objective,
            seconds: started.elapsed().as_secs_f64(),
            stats_checksum: 0,
        });
        let converged = prev.is_some_and(|p| (objective - p).abs() / p.abs().max(1e-12) < config.tol);
        prev = Some(objective);
        if converged {
            break;
        }
    }
    Ok((params, trace))
}

fn link_lda_step(
    view: &CorpusView,
    citations: &[Vec<usize>],
    params: &LinkLdaParams,
    hyper: &Hyperparams,
    citation_weight: f64,
) -> Result<(LinkLdaParams, f64)> {
    let corpus = view.corpus();
    let (d_count, k, w) = (params.n_docs(), params.n_topics(), params.beta.ncols());
    let mut word_doc_topic = Array2::<f64>::zeros((d_count, k));
    let mut cite_doc_topic = Array2::<f64>::zeros((d_count, k));
    let mut word_stats = Array2::<f64>::zeros((k, w));
    let mut cite_stats = Array2::<f64>::zeros((k, d_count));
    let mut objective = KahanSum::new();
    let mut p = vec![0.0; k];

    for d in 0..d_count {
        let theta_d = params.theta.row(d);
        for (i, &word) in corpus.doc(d).tokens.iter().enumerate() {
            let mut sum = 0.0;
            for z in 0..k {
                p[z] = theta_d[z] * params.beta[[z, word]];
                sum += p[z];
            }
            if !sum.is_finite() || sum <= 0.0 {
                return Err(Error::numerical(format!(
                    "token has zero likelihood (doc {d}, token {i})"
                )));
            }
            objective.add(sum.ln());
            for z in 0..k {
                let q = p[z] / sum;
                word_doc_topic[[d, z]] += q;
                word_stats[[z, word]] += q;
            }
        }
        for &target in &citations[d] {
            let mut sum = 0.0;
            for z in 0..k {
                p[z] = theta_d[z] * params.omega[[z, target]];
                sum += p[z];
            }
            if !sum.is_finite() || sum <= 0.0 {
                return Err(Error::numerical(format!(
                    "citation has zero likelihood (doc {d} -> {target})"
                )));
            }
            objective.add(citation_weight * sum.ln());
            for z in 0..k {
                let q = p[z] / sum;
                cite_doc_topic[[d, z]] += q;
                cite_stats[[z, target]] += q;
            }
        }
    }

    let mut theta = Array2::zeros((d_count, k));
    for d in 0..d_count {
        let mut row: Vec<f64> = (0..k)
            .map(|z| {
                word_doc_topic[[d, z]] + citation_weight * cite_doc_topic[[d, z]] + hyper.alpha[z]
                    - 1.0
            })
            .collect();
        clamp_normalize(&mut row);
        for (z, x) in row.into_iter().enumerate() {
            theta[[d, z]] = x;
        }
    }
    let mut beta = Array2::zeros((k, w));
    for z in 0..k {
        let mut row: Vec<f64> = (0..w).map(|ww| word_stats[[z, ww]] + hyper.eta[ww] - 1.0).collect();
        clamp_normalize(&mut row);
        for (ww, x) in row.into_iter().enumerate() {
            beta[[z, ww]] = x;
        }
    }
    let mut omega = Array2::zeros((k, d_count));
    for z in 0..k {
        let mut row: Vec<f64> = (0..d_count)
            .map(|t| citation_weight * cite_stats[[z, t]] + hyper.gamma_doc - 1.0)
            .collect();
        clamp_normalize(&mut row);
        for (t, x) in row.into_iter().enumerate() {
            omega[[z, t]] = x;
        }
    }

    // Priors evaluated at the *input* parameters, matching the main trainer's
    // convention of reporting the objective for the pre-update state.
    let mut prior = 0.0;
    let alpha_const = ln_dirichlet_const(&hyper.alpha);
    for row in params.theta.rows() {
        prior += alpha_const;
        for (&x, &a) in row.iter().zip(&hyper.alpha) {
            if a != 1.0 {
                prior += (a - 1.0) * x.ln();
            }
        }
    }
    let eta_const = ln_dirichlet_const(&hyper.eta);
    for row in params.beta.rows() {
        prior += eta_const;
        for (&x, &e) in row.iter().zip(&hyper.eta) {
            if e != 1.0 {
                prior += (e - 1.0) * x.ln();
            }
        }
    }
    let gamma_row = vec![hyper.gamma_doc; d_count];
    let gamma_const = ln_dirichlet_const(&gamma_row);
    for row in params.omega.rows() {
        prior += gamma_const;
        if hyper.gamma_doc != 1.0 {
            for &x in row.iter() {
                prior += (hyper.gamma_doc - 1.0) * x.ln();
            }
        }
    }

    let total = objective.total() + prior;
    if !total.is_finite() {
        return Err(Error::numerical("objective is not finite"));
    }
    Ok((LinkLdaParams { theta, beta, omega }, total))
}

/// Ranks targets for a source mixture: `score(d) = Σ_z theta_src(z) · omega_z(d)`.
pub fn link_lda_score(theta_source: &[f64], params: &LinkLdaParams) -> RankedPrediction {
    let (d_count, k) = (params.omega.ncols(), params.n_topics());
    let mut scores = vec![0.0; d_count];
    for (t, score) in scores.iter_mut().enumerate() {
        for z in 0..k {
            *score += theta_source[z] * params.omega[[z, t]];
        }
    }
    RankedPrediction::from_scores(scores)
}
