//! EM inference for the hypertext topic model.
//!
//! Every token carries two observations: its word, and whether a link leaves
//! it. Given parameters, the per-token posterior over topics is
//!
//! ```text
//! p(z) ∝ theta_d(z) · beta_z(w) · link_factor(z)
//! link_factor(z) = lambda_e · theta_e(z)          token links to e
//!                = 1 − Σ_d lambda_d · theta_d(z)  token has no link
//! ```
//!
//! A naive E-step would track a posterior over every (token, candidate
//! target) pair — quadratic in the corpus. Only aggregated expectations are
//! needed, and the mismatched-proposal aggregate `u` factors into
//! `lambda_d · theta_d(z) · S(z)` where `S` is a single per-topic sum over
//! non-linked tokens, so each iteration runs in O(K·tokens + D·K).

use std::ops::Range;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::corpus::{Corpus, CorpusView};
use crate::error::{Error, Result};
use crate::math::{clamp_normalize, KahanSum};
use crate::model::{
    init_params, log_prior, Hyperparams, ModelParams, SufficientStats, TrainConfig,
};
use crate::ranking::RankedPrediction;

/// Default inner iterations when folding in an unseen document.
pub const DEFAULT_FOLD_IN_ITERS: usize = 50;

/// Sup-norm change on the folded-in topic mixture that counts as converged.
const FOLD_IN_TOL: f64 = 1e-7;

/// Objective decrease tolerated before training aborts with a bug report.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

/// Per-topic link mass `m(z) = Σ_d lambda[d] · theta[d][z]`.
///
/// `1 − m(z)` is the probability a token of topic z produces no link, which
/// stays at least `lambda_null`; both bounds are asserted.
pub fn doc_link_mass(params: &ModelParams) -> Array1<f64> {
    let (d, k) = (params.n_docs(), params.n_topics());
    let mut m = Array1::zeros(k);
    for dd in 0..d {
        let ld = params.lambda[dd];
        if ld == 0.0 {
            continue;
        }
        let row = params.theta.row(dd);
        for z in 0..k {
            m[z] += ld * row[z];
        }
    }
    let bound = 1.0 - params.lambda_null();
    for z in 0..k {
        assert!(
            m[z] >= -1e-12 && m[z] <= bound + 1e-9,
            "link mass m({z}) = {} outside [0, 1 - lambda_null = {bound}]",
            m[z]
        );
    }
    m
}

/// Topic posteriors for a single token.
///
/// `p` conditions on all observations; `p_hat` drops the token's own
/// link/no-link event, i.e. `p_hat ∝ theta_d(z) · beta_z(w)`.
#[derive(Debug, Clone)]
pub struct TokenPosterior {
    pub p: Vec<f64>,
    pub p_hat: Vec<f64>,
}

/// Posterior for token `(d, i)` under `params`; `m` must be
/// `doc_link_mass(params)`.
pub fn token_posterior(
    view: &CorpusView,
    d: usize,
    i: usize,
    params: &ModelParams,
    m: &Array1<f64>,
) -> Result<TokenPosterior> {
    let k = params.n_topics();
    let word = view.corpus().doc(d).tokens[i];
    let theta_d = params.theta.row(d);
    let mut p_hat = vec![0.0; k];
    let mut p = vec![0.0; k];
    for z in 0..k {
        p_hat[z] = theta_d[z] * params.beta[[z, word]];
    }
    match view.link_at(d, i) {
        Some(e) => {
            let le = params.lambda[e];
            for z in 0..k {
                p[z] = p_hat[z] * le * params.theta[[e, z]];
            }
        }
        None => {
            for z in 0..k {
                p[z] = p_hat[z] * (1.0 - m[z]);
            }
        }
    }
    for vec in [&mut p, &mut p_hat] {
        let sum: f64 = vec.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::numerical(format!(
                "token has zero likelihood (doc {d}, token {i})"
            )));
        }
        for x in vec.iter_mut() {
            *x /= sum;
        }
    }
    Ok(TokenPosterior { p, p_hat })
}

/// Materializes posteriors for every token (small-corpus convenience; the
/// E-step itself never stores these).
pub fn compute_token_posteriors(
    view: &CorpusView,
    params: &ModelParams,
) -> Result<Vec<Vec<TokenPosterior>>> {
    let m = doc_link_mass(params);
    let mut out = Vec::with_capacity(view.corpus().n_docs());
    for d in 0..view.corpus().n_docs() {
        let n = view.corpus().doc(d).len();
        let mut per_doc = Vec::with_capacity(n);
        for i in 0..n {
            per_doc.push(token_posterior(view, d, i, params, &m)?);
        }
        out.push(per_doc);
    }
    Ok(out)
}

/// Reference computation of the mismatched-proposal aggregate `u[d][z]` by
/// explicit enumeration over every non-linked token, candidate target, and
/// word-topic/link-topic pair. Quadratic in D; keep to small instances.
///
/// This is the oracle the fast path is checked against, so it deliberately
/// shares nothing with the scan machinery: plain linear-space products,
/// normalizers enumerated per token.
pub fn expected_u_naive(view: &CorpusView, params: &ModelParams) -> Array2<f64> {
    let corpus = view.corpus();
    let (n_docs, k) = (params.n_docs(), params.n_topics());
    let lambda_null = params.lambda_null();
    let mut u = Array2::zeros((n_docs, k));

    for d_src in 0..n_docs {
        let doc = corpus.doc(d_src);
        let theta_src = params.theta.row(d_src);
        for (i, &word) in doc.tokens.iter().enumerate() {
            if view.link_at(d_src, i).is_some() {
                continue;
            }
            // Weight of each word-topic assignment before the link event.
            let a: Vec<f64> = (0..k)
                .map(|z| theta_src[z] * params.beta[[z, word]])
                .collect();
            let a_total: f64 = a.iter().sum();

            // Total probability of "no link here" across all configurations:
            // tau = null, or tau = t with mismatched link topic.
            let mut total = lambda_null * a_total;
            for t in 0..n_docs {
                let lt = params.lambda[t];
                if lt == 0.0 {
                    continue;
                }
                let theta_t = params.theta.row(t);
                for (z_w, &az) in a.iter().enumerate() {
                    total += lt * az * (1.0 - theta_t[z_w]);
                }
            }
            if total <= 0.0 {
                continue;
            }
            for t in 0..n_docs {
                let lt = params.lambda[t];
                if lt == 0.0 {
                    continue;
                }
                let theta_t = params.theta.row(t);
                for z in 0..k {
                    // Sum over word topics z' ≠ z of the joint posterior.
                    u[[t, z]] += lt * theta_t[z] * (a_total - a[z]) / total;
                }
            }
        }
    }
    u
}

/// Fast computation of the mismatched-proposal aggregate from detached
/// posteriors: `u[d][z] = lambda_d · theta_d(z) · S(z)` with
/// `S(z) = Σ_{non-linked (d',i)} (1 − p_hat(z)) / Pr(no-link at (d',i))`.
pub fn expected_u_fast(
    view: &CorpusView,
    params: &ModelParams,
    posteriors: &[Vec<TokenPosterior>],
) -> Result<Array2<f64>> {
    let corpus = view.corpus();
    let (n_docs, k) = (params.n_docs(), params.n_topics());
    let m = doc_link_mass(params);
    let mut s = vec![0.0; k];
    for d in 0..n_docs {
        for i in 0..corpus.doc(d).len() {
            if view.link_at(d, i).is_some() {
                continue;
            }
            let p_hat = &posteriors[d][i].p_hat;
            let mut no_link = 1.0;
            for z in 0..k {
                no_link -= m[z] * p_hat[z];
            }
            if no_link <= 0.0 {
                return Err(Error::numerical(format!(
                    "non-positive no-link probability at (doc {d}, token {i})"
                )));
            }
            for z in 0..k {
                s[z] += (1.0 - p_hat[z]) / no_link;
            }
        }
    }
    let mut u = Array2::zeros((n_docs, k));
    for d in 0..n_docs {
        let ld = params.lambda[d];
        if ld == 0.0 {
            continue;
        }
        let theta_d = params.theta.row(d);
        for z in 0..k {
            u[[d, z]] = ld * theta_d[z] * s[z];
        }
    }
    Ok(u)
}

/// Operation counts from one E-step, for complexity probes.
#[derive(Debug, Clone, Copy, Default)]
pub struct EStepCounters {
    /// Token posterior evaluations; exactly one per corpus token.
    pub token_posterior_evals: usize,
    /// Inner-loop arithmetic spent on the `u` aggregate.
    pub u_arithmetic_ops: usize,
}

impl EStepCounters {
    fn absorb(&mut self, other: &EStepCounters) {
        self.token_posterior_evals += other.token_posterior_evals;
        self.u_arithmetic_ops += other.u_arithmetic_ops;
    }
}

/// Result of one E-step: expected counts, the log MAP objective evaluated at
/// the input parameters, and operation counters.
#[derive(Debug, Clone)]
pub struct EStep {
    pub stats: SufficientStats,
    pub objective: f64,
    pub counters: EStepCounters,
}

/// Precomputed log-space tables for one parameter setting.
///
/// Token posteriors are normalized in linear space after subtracting the
/// max log term, so tiny word probabilities at large W cannot underflow the
/// accumulation.
struct Scan {
    k: usize,
    log_theta: Array2<f64>,
    /// W×K: row w holds log beta[z][w] over z, for cache-friendly lookup.
    log_beta_by_word: Array2<f64>,
    m: Array1<f64>,
    log_no_link: Vec<f64>,
    log_lambda: Vec<f64>,
}

impl Scan {
    fn new(params: &ModelParams) -> Self {
        let (d, k, w) = (params.n_docs(), params.n_topics(), params.word_count());
        let log_theta = params.theta.mapv(f64::ln);
        let mut log_beta_by_word = Array2::zeros((w, k));
        for z in 0..k {
            let row = params.beta.row(z);
            for ww in 0..w {
                log_beta_by_word[[ww, z]] = row[ww].ln();
            }
        }
        let m = doc_link_mass(params);
        let log_no_link = m.iter().map(|&mz| (1.0 - mz).ln()).collect();
        let log_lambda = (0..=d).map(|i| params.lambda[i].ln()).collect();
        Self { k, log_theta, log_beta_by_word, m, log_no_link, log_lambda }
    }

    /// Fills `t` with full-posterior log terms and `s` with link-event-
    /// detached log terms for one token.
    fn log_terms(&self, d: usize, word: usize, link: Option<usize>, t: &mut [f64], s: &mut [f64]) {
        let lt = self.log_theta.row(d);
        let lb = self.log_beta_by_word.row(word);
        match link {
            None => {
                for z in 0..self.k {
                    s[z] = lt[z] + lb[z];
                    t[z] = s[z] + self.log_no_link[z];
                }
            }
            Some(e) => {
                let lte = self.log_theta.row(e);
                let ll = self.log_lambda[e];
                for z in 0..self.k {
                    s[z] = lt[z] + lb[z];
                    t[z] = s[z] + ll + lte[z];
                }
            }
        }
    }
}

fn log_sum_exp(t: &[f64]) -> Option<f64> {
    let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let sum: f64 = t.iter().map(|&x| (x - max).exp()).sum();
    if sum > 0.0 && sum.is_finite() {
        Some(max + sum.ln())
    } else {
        None
    }
}

/// Replaces log terms by normalized probabilities; returns the log normalizer.
fn normalize_log_terms(t: &mut [f64]) -> Option<f64> {
    let log_norm = log_sum_exp(t)?;
    for x in t.iter_mut() {
        *x = (*x - log_norm).exp();
    }
    Some(log_norm)
}

/// Contiguous doc ranges processed independently and merged in index order,
/// so results do not depend on scheduling.
fn doc_blocks(n_docs: usize) -> Vec<Range<usize>> {
    let threads = rayon::current_num_threads();
    let n_blocks = if threads <= 1 { 1 } else { (2 * threads).min(n_docs.max(1)) };
    let per = n_docs.div_ceil(n_blocks);
    (0..n_blocks)
        .map(|b| (b * per).min(n_docs)..((b + 1) * per).min(n_docs))
        .filter(|r| !r.is_empty())
        .collect()
}

struct BlockResult {
    stats: SufficientStats,
    objective: KahanSum,
    counters: EStepCounters,
}

fn scan_block(
    scan: &Scan,
    view: &CorpusView,
    params: &ModelParams,
    docs: Range<usize>,
) -> Result<BlockResult> {
    let corpus = view.corpus();
    let (n_docs, k, w) = (params.n_docs(), scan.k, params.word_count());
    let mut stats = SufficientStats::zeros(n_docs, k, w);
    let mut counters = EStepCounters::default();
    let mut objective = KahanSum::new();
    let mut s_acc = vec![0.0; k];
    let mut t = vec![0.0; k];
    let mut s = vec![0.0; k];

    for d in docs {
        let doc = corpus.doc(d);
        for (i, &word) in doc.tokens.iter().enumerate() {
            let link = view.link_at(d, i);
            scan.log_terms(d, word, link, &mut t, &mut s);
            let log_norm = normalize_log_terms(&mut t).ok_or_else(|| {
                Error::numerical(format!(
                    "token has zero likelihood (doc {:?}, token {i})",
                    doc.doc_id
                ))
            })?;
            counters.token_posterior_evals += 1;
            objective.add(log_norm);

            for z in 0..k {
                stats.f[[d, z]] += t[z];
                stats.g[[z, word]] += t[z];
            }
            match link {
                Some(e) => {
                    // The link topic equals the word topic when a link exists.
                    for z in 0..k {
                        stats.v[[e, z]] += t[z];
                    }
                }
                None => {
                    normalize_log_terms(&mut s).ok_or_else(|| {
                        Error::numerical(format!(
                            "token has zero likelihood (doc {:?}, token {i})",
                            doc.doc_id
                        ))
                    })?;
                    let mut no_link = 1.0;
                    for z in 0..k {
                        no_link -= scan.m[z] * s[z];
                    }
                    if no_link <= 0.0 {
                        return Err(Error::numerical(format!(
                            "non-positive no-link probability at (doc {:?}, token {i})",
                            doc.doc_id
                        )));
                    }
                    for z in 0..k {
                        s_acc[z] += (1.0 - s[z]) / no_link;
                    }
                    counters.u_arithmetic_ops += k;
                }
            }
        }
    }

    // Finalize this block's share of u and t.
    for d in 0..n_docs {
        let ld = params.lambda[d];
        let theta_d = params.theta.row(d);
        let mut t_d = 0.0;
        for z in 0..k {
            let u_dz = if ld == 0.0 { 0.0 } else { ld * theta_d[z] * s_acc[z] };
            stats.u[[d, z]] = u_dz;
            t_d += stats.v[[d, z]] + u_dz;
        }
        stats.t[d] = t_d;
    }
    counters.u_arithmetic_ops += n_docs * k;

    Ok(BlockResult { stats, objective, counters })
}

/// One E-step over the view: expected counts for every aggregate, plus the
/// log MAP objective at the current parameters, in a single pass.
pub fn e_step(view: &CorpusView, params: &ModelParams, hyper: &Hyperparams) -> Result<EStep> {
    params.validate()?;
    hyper.validate(params.n_topics(), params.word_count())?;
    if params.n_docs() != view.corpus().n_docs() || params.word_count() != view.corpus().word_count() {
        return Err(Error::invalid("parameter dimensions do not match the corpus"));
    }
    let scan = Scan::new(params);
    let blocks = doc_blocks(view.corpus().n_docs());
    let partials: Vec<BlockResult> = blocks
        .into_par_iter()
        .map(|range| scan_block(&scan, view, params, range))
        .collect::<Result<Vec<_>>>()?;

    let mut iter = partials.into_iter();
    let mut acc = iter.next().expect("at least one block");
    for p in iter {
        acc.stats.merge(&p.stats);
        acc.objective.add(p.objective.total());
        acc.counters.absorb(&p.counters);
    }
    let objective = acc.objective.total() + log_prior(params, hyper);
    if !objective.is_finite() {
        return Err(Error::numerical("objective is not finite"));
    }
    Ok(EStep { stats: acc.stats, objective, counters: acc.counters })
}

/// Token log-likelihood part of the objective (no priors); used by
/// [`crate::model::log_map_objective`].
pub(crate) fn token_log_likelihood(view: &CorpusView, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let scan = Scan::new(params);
    let corpus = view.corpus();
    let blocks = doc_blocks(corpus.n_docs());
    let partials: Vec<f64> = blocks
        .into_par_iter()
        .map(|range| -> Result<f64> {
            let mut acc = KahanSum::new();
            let mut t = vec![0.0; scan.k];
            let mut s = vec![0.0; scan.k];
            for d in range {
                let doc = corpus.doc(d);
                for (i, &word) in doc.tokens.iter().enumerate() {
                    scan.log_terms(d, word, view.link_at(d, i), &mut t, &mut s);
                    let log_norm = log_sum_exp(&t).ok_or_else(|| {
                        Error::numerical(format!(
                            "token has zero likelihood (doc {:?}, token {i})",
                            doc.doc_id
                        ))
                    })?;
                    acc.add(log_norm);
                }
            }
            Ok(acc.total())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = KahanSum::new();
    for p in partials {
        total.add(p);
    }
    Ok(total.total())
}

/// MAP re-estimation from expected counts.
///
/// `beta[z] ∝ g[z] + eta − 1`, `theta[d] ∝ f[d] + v[d] + u[d] + alpha − 1`,
/// `lambda[d] ∝ t[d] + gamma_doc − 1` with the no-link slot getting
/// `total_tokens − Σ t + gamma_null − 1`. Negative numerators are floored
/// before normalization.
pub fn m_step(stats: &SufficientStats, hyper: &Hyperparams, corpus: &Corpus) -> ModelParams {
    let (d, k) = stats.f.dim();
    let w = stats.g.ncols();

    let mut beta = Array2::zeros((k, w));
    for z in 0..k {
        let mut row: Vec<f64> = (0..w).map(|ww| stats.g[[z, ww]] + hyper.eta[ww] - 1.0).collect();
        clamp_normalize(&mut row);
        for (ww, x) in row.into_iter().enumerate() {
            beta[[z, ww]] = x;
        }
    }

    let mut theta = Array2::zeros((d, k));
    for dd in 0..d {
        let mut row: Vec<f64> = (0..k)
            .map(|z| stats.f[[dd, z]] + stats.v[[dd, z]] + stats.u[[dd, z]] + hyper.alpha[z] - 1.0)
            .collect();
        clamp_normalize(&mut row);
        for (z, x) in row.into_iter().enumerate() {
            theta[[dd, z]] = x;
        }
    }

    let total_t: f64 = stats.t.sum();
    let mut lambda: Vec<f64> = (0..d).map(|dd| stats.t[dd] + hyper.gamma_doc - 1.0).collect();
    lambda.push(corpus.total_tokens() as f64 - total_t + hyper.gamma_null - 1.0);
    clamp_normalize(&mut lambda);

    ModelParams { theta, beta, lambda: Array1::from_vec(lambda) }
}

/// One training iteration record.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub seconds: f64,
    pub stats_checksum: u64,
}

/// Per-iteration objective/time trace of a training run.
#[derive(Debug, Clone, Default)]
pub struct TrainTrace {
    pub iterations: Vec<IterationRecord>,
}

impl TrainTrace {
    /// CSV with header `iter,objective,seconds`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iter,objective,seconds")?;
        for rec in &self.iterations {
            writeln!(w, "{},{},{}", rec.iter, rec.objective, rec.seconds)?;
        }
        Ok(())
    }
}

/// Alternates E and M steps from a seeded start until the relative objective
/// change drops below `config.tol` or `config.max_iters` is reached.
///
/// With `disable_links` the view's links are hidden and lambda stays pinned
/// to the no-link slot every iteration, which is exactly plain-LDA training.
/// The objective must not decrease beyond [`MONOTONICITY_SLACK`]; a decrease
/// signals an implementation bug and aborts.
pub fn train(
    view: &CorpusView,
    hyper: &Hyperparams,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainTrace)> {
    config.validate()?;
    let work = if config.disable_links { view.without_links() } else { view.clone() };
    let mut params = init_params(&work, hyper, config)?;
    let mut trace = TrainTrace::default();
    let mut prev: Option<f64> = None;

    for it in 0..config.max_iters {
        let started = Instant::now();
        let out = e_step(&work, &params, hyper)?;
        if let Some(prev) = prev {
            if out.objective < prev - MONOTONICITY_SLACK {
                return Err(Error::numerical(format!(
                    "EM monotonicity violated at iteration {it}: {prev} -> {}",
                    out.objective
                )));
            }
        }
        params = m_step(&out.stats, hyper, work.corpus());
        if config.disable_links {
            params.pin_lambda_null();
        }
        trace.iterations.push(IterationRecord {
            iter: it,
            objective: out.objective,
            seconds: started.elapsed().as_secs_f64(),
            stats_checksum: out.stats.checksum(),
        });
        let converged = prev.is_some_and(|p| {
            (out.objective - p).abs() / p.abs().max(1e-12) < config.tol
        });
        prev = Some(out.objective);
        if converged {
            break;
        }
    }
    Ok((params, trace))
}

/// Estimates a topic mixture for a document outside the trained corpus.
///
/// Runs EM over the mixture alone with `beta` and `lambda` frozen, treating
/// every token as a no-link observation. An empty document returns the
/// normalized prior.
pub fn fold_in(
    tokens: &[usize],
    params: &ModelParams,
    hyper: &Hyperparams,
    max_iters: usize,
) -> Result<Array1<f64>> {
    let k = params.n_topics();
    hyper.validate(k, params.word_count())?;
    if let Some(&bad) = tokens.iter().find(|&&t| t >= params.word_count()) {
        return Err(Error::invalid(format!("token id {bad} outside the vocabulary")));
    }
    if k == 1 {
        return Ok(Array1::ones(1));
    }
    let mut theta: Vec<f64> = hyper.alpha.clone();
    clamp_normalize(&mut theta);
    if tokens.is_empty() {
        return Ok(Array1::from_vec(theta));
    }
    let m = doc_link_mass(params);
    let no_link: Vec<f64> = m.iter().map(|&mz| 1.0 - mz).collect();

    let mut p = vec![0.0; k];
    for _ in 0..max_iters {
        let mut acc = vec![0.0; k];
        for &word in tokens {
            let mut sum = 0.0;
            for z in 0..k {
                p[z] = theta[z] * params.beta[[z, word]] * no_link[z];
                sum += p[z];
            }
            if !sum.is_finite() || sum <= 0.0 {
                return Err(Error::numerical(format!(
                    "token has zero likelihood (word {word})"
                )));
            }
            for z in 0..k {
                acc[z] += p[z] / sum;
            }
        }
        let mut next: Vec<f64> = (0..k).map(|z| acc[z] + hyper.alpha[z] - 1.0).collect();
        clamp_normalize(&mut next);
        let delta = next
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = next;
        if delta < FOLD_IN_TOL {
            break;
        }
    }
    Ok(Array1::from_vec(theta))
}

/// Ranks every document as a link target for a source document.
///
/// Per token, the topic distribution is `p_i(z) ∝ theta_src(z) · beta_z(w_i)`;
/// the score of target d is the expected number of links from the source,
/// `Σ_i Σ_z p_i(z) · lambda_d · theta_d(z)`.
pub fn score_links(tokens: &[usize], theta_source: &[f64], params: &ModelParams) -> RankedPrediction {
    let (n_docs, k) = (params.n_docs(), params.n_topics());
    let mut q = vec![0.0; k];
    let mut p = vec![0.0; k];
    for &word in tokens {
        let mut sum = 0.0;
        for z in 0..k {
            p[z] = theta_source[z] * params.beta[[z, word]];
            sum += p[z];
        }
        if sum <= 0.0 {
            continue; // zero-likelihood token carries no ranking signal
        }
        for z in 0..k {
            q[z] += p[z] / sum;
        }
    }
    let mut scores = vec![0.0; n_docs];
    for d in 0..n_docs {
        let ld = params.lambda[d];
        if ld == 0.0 {
            continue;
        }
        let theta_d = params.theta.row(d);
        let mut acc = 0.0;
        for z in 0..k {
            acc += q[z] * theta_d[z];
        }
        scores[d] = ld * acc;
    }
    RankedPrediction::from_scores(scores)
}
