//! Parameter containers, priors, initialization, objective, and model files.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusView};
use crate::error::{Error, Result};
use crate::math::{clamp_normalize, ln_dirichlet_const, PROB_FLOOR};

/// Dirichlet hyperparameters.
///
/// `alpha` (length K) governs document-topic rows, `eta` (length W)
/// topic-word rows. The link-propensity prior over documents plus the
/// no-link slot is asymmetric: `gamma_doc` for each of the D document
/// entries and `gamma_null` for the no-link entry, which is expected to
/// dominate (most words carry no link).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma_doc: f64,
    pub gamma_null: f64,
}

impl Hyperparams {
    pub fn symmetric(k: usize, w: usize, alpha: f64, eta: f64, gamma_doc: f64, gamma_null: f64) -> Self {
        Self { alpha: vec![alpha; k], eta: vec![eta; w], gamma_doc, gamma_null }
    }

    /// Reference configuration: uniform 1.1 priors, with `gamma_null` scaled
    /// so that `gamma_null / gamma_doc ≈ total_tokens / total_links`.
    pub fn reference(k: usize, w: usize, total_tokens: usize, total_links: usize) -> Self {
        let gamma_doc = 1.1;
        let gamma_null = gamma_doc * total_tokens as f64 / total_links.max(1) as f64;
        Self::symmetric(k, w, 1.1, 1.1, gamma_doc, gamma_null)
    }

    pub fn validate(&self, k: usize, w: usize) -> Result<()> {
        if self.alpha.len() != k {
            return Err(Error::invalid(format!("alpha has length {}, expected {k}", self.alpha.len())));
        }
        if self.eta.len() != w {
            return Err(Error::invalid(format!("eta has length {}, expected {w}", self.eta.len())));
        }
        let positive = self.alpha.iter().chain(self.eta.iter()).all(|&x| x > 0.0)
            && self.gamma_doc > 0.0
            && self.gamma_null > 0.0;
        if !positive {
            return Err(Error::invalid("hyperparameters must be strictly positive"));
        }
        Ok(())
    }

    /// Non-fatal configuration smells.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.gamma_doc >= self.gamma_null {
            out.push(format!(
                "gamma_doc ({}) >= gamma_null ({}): the prior no longer favors not creating links",
                self.gamma_doc, self.gamma_null
            ));
        }
        out
    }
}

/// Model parameters.
///
/// `theta`: D×K document-topic rows; `beta`: K×W topic-word rows; `lambda`:
/// a (D+1)-simplex of link-target propensities whose last entry is the
/// no-link slot. Consequently, for every topic z,
/// `Σ_d lambda[d]·theta[d][z] ≤ 1 − lambda[D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub theta: Array2<f64>,
    pub beta: Array2<f64>,
    pub lambda: Array1<f64>,
}

impl ModelParams {
    pub fn n_docs(&self) -> usize {
        self.theta.nrows()
    }

    pub fn n_topics(&self) -> usize {
        self.theta.ncols()
    }

    pub fn word_count(&self) -> usize {
        self.beta.ncols()
    }

    pub fn lambda_null(&self) -> f64 {
        self.lambda[self.lambda.len() - 1]
    }

    /// True when lambda is pinned to the no-link slot (the plain-LDA regime).
    pub fn links_disabled(&self) -> bool {
        self.lambda_null() == 1.0 && self.lambda.iter().take(self.n_docs()).all(|&x| x == 0.0)
    }

    /// Lambda pinned so that no token ever proposes a link.
    pub fn pin_lambda_null(&mut self) {
        self.lambda.fill(0.0);
        let last = self.lambda.len() - 1;
        self.lambda[last] = 1.0;
    }

    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-9;
        if self.lambda.len() != self.n_docs() + 1 {
            return Err(Error::invalid("lambda must have D+1 entries"));
        }
        let row_ok = |row: &[f64]| {
            row.iter().all(|&x| x >= 0.0) && (row.iter().sum::<f64>() - 1.0).abs() <= TOL
        };
        for (d, row) in self.theta.rows().into_iter().enumerate() {
            if !row_ok(row.as_slice().unwrap()) {
                return Err(Error::invalid(format!("theta row {d} is not on the simplex")));
            }
        }
        for (z, row) in self.beta.rows().into_iter().enumerate() {
            if !row_ok(row.as_slice().unwrap()) {
                return Err(Error::invalid(format!("beta row {z} is not on the simplex")));
            }
        }
        if !row_ok(self.lambda.as_slice().unwrap()) {
            return Err(Error::invalid("lambda is not on the simplex"));
        }
        Ok(())
    }
}

/// Expected counts gathered by one pass of inference.
///
/// `f`: D×K expected topic counts over each document's words; `g`: K×W
/// expected topic-word counts; `v`: D×K expected incoming-link topic counts;
/// `u`: D×K expected proposed-but-topic-mismatched link counts; `t`: per-doc
/// expected link-proposal totals, `t[d] = Σ_z (v[d,z] + u[d,z])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub f: Array2<f64>,
    pub g: Array2<f64>,
    pub v: Array2<f64>,
    pub u: Array2<f64>,
    pub t: Array1<f64>,
}

impl SufficientStats {
    pub fn zeros(d: usize, k: usize, w: usize) -> Self {
        Self {
            f: Array2::zeros((d, k)),
            g: Array2::zeros((k, w)),
            v: Array2::zeros((d, k)),
            u: Array2::zeros((d, k)),
            t: Array1::zeros(d),
        }
    }

    /// Associative, commutative elementwise addition; lets the E-step shard
    /// documents across workers and combine privately accumulated counts.
    pub fn merge(&mut self, other: &SufficientStats) {
        self.f += &other.f;
        self.g += &other.g;
        self.v += &other.v;
        self.u += &other.u;
        self.t += &other.t;
    }

    pub fn checksum(&self) -> u64 {
        crate::math::checksum_f64s(
            self.f
                .iter()
                .chain(self.g.iter())
                .chain(self.v.iter())
                .chain(self.u.iter())
                .chain(self.t.iter()),
        )
    }
}

/// Training knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub topics: usize,
    pub max_iters: usize,
    /// Relative objective-change stopping threshold.
    pub tol: f64,
    pub seed: u64,
    /// Pin lambda to the no-link slot and hide all links: plain LDA.
    pub disable_links: bool,
}

impl TrainConfig {
    pub fn new(topics: usize) -> Self {
        Self { topics, max_iters: 600, tol: 1e-6, seed: 0, disable_links: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::invalid("topic count must be at least 1"));
        }
        if self.max_iters < 1 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.tol < 0.0 {
            return Err(Error::invalid("tol must be non-negative"));
        }
        Ok(())
    }
}

/// Draws a simplex sample from Dirichlet(alpha) via normalized Gamma draws.
pub(crate) fn sample_dirichlet(alpha: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, Gamma};
    let mut draw: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    clamp_normalize(&mut draw);
    draw
}

/// Random starting point: theta rows from Dirichlet(alpha), beta rows from
/// Dirichlet(eta), lambda from the in-degree MAP formula with zero expected
/// proposals. With `disable_links`, lambda is pinned to the no-link slot.
pub fn init_params(view: &CorpusView, hyper: &Hyperparams, config: &TrainConfig) -> Result<ModelParams> {
    config.validate()?;
    let corpus = view.corpus();
    let d = corpus.n_docs();
    let k = config.topics;
    let w = corpus.word_count();
    hyper.validate(k, w)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = Array2::zeros((d, k));
    for mut row in theta.rows_mut() {
        let sample = sample_dirichlet(&hyper.alpha, &mut rng);
        for (dst, src) in row.iter_mut().zip(sample) {
            *dst = src;
        }
    }
    let mut beta = Array2::zeros((k, w));
    for mut row in beta.rows_mut() {
        let sample = sample_dirichlet(&hyper.eta, &mut rng);
        for (dst, src) in row.iter_mut().zip(sample) {
            *dst = src;
        }
    }

    let mut params = ModelParams { theta, beta, lambda: Array1::zeros(d + 1) };
    if config.disable_links {
        params.pin_lambda_null();
    } else {
        let in_degree = view.in_degree();
        let mut lambda: Vec<f64> = in_degree
            .iter()
            .map(|&c| c as f64 + hyper.gamma_doc - 1.0)
            .collect();
        lambda.push(
            corpus.total_tokens() as f64 - view.visible_link_count() as f64 + hyper.gamma_null - 1.0,
        );
        clamp_normalize(&mut lambda);
        params.lambda = Array1::from_vec(lambda);
    }
    Ok(params)
}

/// Log prior density of the parameters (full Dirichlet log-densities,
/// normalizers included). The lambda prior is omitted when lambda is pinned:
/// a pinned lambda is not an estimated parameter.
pub(crate) fn log_prior(params: &ModelParams, hyper: &Hyperparams) -> f64 {
    let d = params.n_docs();
    let mut acc = 0.0;

    let theta_const = ln_dirichlet_const(&hyper.alpha);
    for row in params.theta.rows() {
        acc += theta_const;
        for (&x, &a) in row.iter().zip(&hyper.alpha) {
            if a != 1.0 {
                acc += (a - 1.0) * x.ln();
            }
        }
    }
    let beta_const = ln_dirichlet_const(&hyper.eta);
    for row in params.beta.rows() {
        acc += beta_const;
        for (&x, &e) in row.iter().zip(&hyper.eta) {
            if e != 1.0 {
                acc += (e - 1.0) * x.ln();
            }
        }
    }
    if !params.links_disabled() {
        let mut gamma = vec![hyper.gamma_doc; d];
        gamma.push(hyper.gamma_null);
        acc += ln_dirichlet_const(&gamma);
        for (&x, &g) in params.lambda.iter().zip(&gamma) {
            if g != 1.0 {
                acc += (g - 1.0) * x.max(PROB_FLOOR).ln();
            }
        }
    }
    acc
}

/// Log MAP objective: per-token log marginals (words and link/no-link
/// events) plus the log Dirichlet priors.
pub fn log_map_objective(view: &CorpusView, params: &ModelParams, hyper: &Hyperparams) -> Result<f64> {
    hyper.validate(params.n_topics(), params.word_count())?;
    let tokens = crate::em::token_log_likelihood(view, params)?;
    let value = tokens + log_prior(params, hyper);
    if !value.is_finite() {
        return Err(Error::numerical("objective is not finite"));
    }
    Ok(value)
}

const MODEL_FORMAT_VERSION: u32 = 1;

/// On-disk model record: one JSON object per file, arrays row-major.
///
/// Floats are written in shortest round-trip decimal form, so a reload
/// reproduces the objective bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub version: u32,
    /// "lthm" | "lda" | "link-lda" | "freq"
    pub kind: String,
    pub k: usize,
    pub d: usize,
    pub w: usize,
    pub doc_ids: Vec<String>,
    pub vocab_hash: String,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_degree: Option<Vec<u64>>,
    pub hyper: Hyperparams,
    pub config: TrainConfig,
}

impl SavedModel {
    pub fn from_params(
        kind: &str,
        params: &ModelParams,
        corpus: &Corpus,
        hyper: &Hyperparams,
        config: &TrainConfig,
    ) -> Self {
        Self {
            version: MODEL_FORMAT_VERSION,
            kind: kind.to_string(),
            k: params.n_topics(),
            d: params.n_docs(),
            w: params.word_count(),
            doc_ids: corpus.docs().iter().map(|doc| doc.doc_id.clone()).collect(),
            vocab_hash: corpus.vocabulary().digest(),
            theta: params.theta.iter().copied().collect(),
            beta: params.beta.iter().copied().collect(),
            lambda: params.lambda.to_vec(),
            omega: None,
            in_degree: None,
            hyper: hyper.clone(),
            config: config.clone(),
        }
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        let theta = Array2::from_shape_vec((self.d, self.k), self.theta.clone())
            .map_err(|e| Error::invalid(format!("theta shape: {e}")))?;
        let beta = Array2::from_shape_vec((self.k, self.w), self.beta.clone())
            .map_err(|e| Error::invalid(format!("beta shape: {e}")))?;
        if self.lambda.len() != self.d + 1 {
            return Err(Error::invalid("lambda must have D+1 entries"));
        }
        let params = ModelParams { theta, beta, lambda: Array1::from_vec(self.lambda.clone()) };
        params.validate()?;
        Ok(params)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, self).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let model: SavedModel =
            serde_json::from_str(&line).map_err(|e| Error::invalid(format!("bad model file: {e}")))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported model version {}", model.version)));
        }
        Ok(model)
    }
}
