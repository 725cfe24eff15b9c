//! Latent Dirichlet Allocation by collapsed Gibbs sampling.
//!
//! Training produces the topic-word matrix phi from final-sweep counts;
//! inference folds new text in with phi frozen. Both are deterministic for a
//! fixed seed. Models persist to a versioned binary format (`TMDLDA1`) so
//! the per-N background models of the deviation pipeline can be cached.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::ln_gamma;

use crate::corpus::{BowVector, Vocabulary};
use crate::{Error, Result};

/// A point on the K-simplex: per-topic probabilities of one text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    probs: Vec<f64>,
}

impl TopicDistribution {
    const SIMPLEX_TOL: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("topic distribution must be non-empty"));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::validation("topic distribution entries must be >= 0"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SIMPLEX_TOL {
            return Err(Error::validation(format!(
                "topic distribution sums to {sum}, expected 1"
            )));
        }
        Ok(TopicDistribution { probs })
    }

    pub fn uniform(k: usize) -> Self {
        TopicDistribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Training hyperparameters. `alpha` defaults to `1/K`, `beta` to 0.01.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub const DEFAULT_BETA: f64 = 0.01;
    pub const DEFAULT_ITERS: usize = 500;

    pub fn new(k: usize, seed: u64) -> Self {
        TrainConfig {
            k,
            alpha: 1.0 / k.max(1) as f64,
            beta: Self::DEFAULT_BETA,
            iters: Self::DEFAULT_ITERS,
            seed,
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::validation("K must be >= 1"));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(Error::validation("alpha and beta must be > 0"));
        }
        if self.iters < 1 {
            return Err(Error::validation("iters must be >= 1"));
        }
        Ok(())
    }
}

/// Fold-in inference settings. Theta is averaged over the last quarter of
/// sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferConfig {
    pub iters: usize,
    pub seed: u64,
}

impl InferConfig {
    pub const DEFAULT_ITERS: usize = 100;

    pub fn new(seed: u64) -> Self {
        InferConfig {
            iters: Self::DEFAULT_ITERS,
            seed,
        }
    }

    pub fn with_iters(mut self, iters: usize) -> Self {
        self.iters = iters;
        self
    }
}

/// Derives a stable sub-seed from a base seed and a context path, so that
/// per-document inference does not depend on processing order.
pub fn derive_seed(base: u64, context: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in context {
        hasher.update([0u8]);
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// A trained topic model.
#[derive(Debug, Clone)]
pub struct LdaModel {
    k: usize,
    alpha: f64,
    beta: f64,
    /// Row-stochastic K x V matrix, row-major.
    phi: Vec<f64>,
    vocab: Vocabulary,
    seed: u64,
    train_iters: usize,
    loglik_trace: Vec<f64>,
}

struct GibbsState {
    k: usize,
    v: usize,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<usize>>,
    n_dk: Vec<u32>, // D x K
    n_kw: Vec<u32>, // K x V
    n_k: Vec<u64>,
}

impl GibbsState {
    fn init(docs: Vec<Vec<u32>>, k: usize, v: usize, rng: &mut ChaCha8Rng) -> Self {
        let d = docs.len();
        let mut state = GibbsState {
            k,
            v,
            assignments: docs.iter().map(|doc| vec![0usize; doc.len()]).collect(),
            docs,
            n_dk: vec![0; d * k],
            n_kw: vec![0; k * v],
            n_k: vec![0; k],
        };
        for d_idx in 0..state.docs.len() {
            for i in 0..state.docs[d_idx].len() {
                let topic = rng.gen_range(0..k);
                state.assignments[d_idx][i] = topic;
                state.increment(d_idx, state.docs[d_idx][i], topic);
            }
        }
        state
    }

    fn increment(&mut self, d: usize, w: u32, topic: usize) {
        self.n_dk[d * self.k + topic] += 1;
        self.n_kw[topic * self.v + w as usize] += 1;
        self.n_k[topic] += 1;
    }

    fn decrement(&mut self, d: usize, w: u32, topic: usize) {
        self.n_dk[d * self.k + topic] -= 1;
        self.n_kw[topic * self.v + w as usize] -= 1;
        self.n_k[topic] -= 1;
    }

    fn sweep(&mut self, alpha: f64, beta: f64, rng: &mut ChaCha8Rng, weights: &mut Vec<f64>) {
        let vb = self.v as f64 * beta;
        weights.resize(self.k, 0.0);
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.decrement(d, w, old);
                let mut total = 0.0;
                for topic in 0..self.k {
                    let p = (self.n_dk[d * self.k + topic] as f64 + alpha)
                        * (self.n_kw[topic * self.v + w as usize] as f64 + beta)
                        / (self.n_k[topic] as f64 + vb);
                    total += p;
                    weights[topic] = total;
                }
                let draw = rng.gen_range(0.0..total);
                let new = weights.partition_point(|&cum| cum <= draw).min(self.k - 1);
                self.assignments[d][i] = new;
                self.increment(d, w, new);
            }
        }
        #[cfg(debug_assertions)]
        self.check_counts();
    }

    /// Joint log-likelihood of words and assignments under the collapsed
    /// model, used for the per-sweep trace.
    fn joint_loglik(&self, alpha: f64, beta: f64) -> f64 {
        let (k, v) = (self.k as f64, self.v as f64);
        let mut ll = self.k as f64 * (ln_gamma(v * beta) - v * ln_gamma(beta));
        for topic in 0..self.k {
            for w in 0..self.v {
                let count = self.n_kw[topic * self.v + w];
                if count > 0 {
                    ll += ln_gamma(count as f64 + beta);
                } else {
                    ll += ln_gamma(beta);
                }
            }
            ll -= ln_gamma(self.n_k[topic] as f64 + v * beta);
        }
        ll += self.docs.len() as f64 * (ln_gamma(k * alpha) - k * ln_gamma(alpha));
        for d in 0..self.docs.len() {
            for topic in 0..self.k {
                ll += ln_gamma(self.n_dk[d * self.k + topic] as f64 + alpha);
            }
            ll -= ln_gamma(self.docs[d].len() as f64 + k * alpha);
        }
        ll
    }

    #[cfg(debug_assertions)]
    fn check_counts(&self) {
        for d in 0..self.docs.len() {
            let sum: u64 = (0..self.k).map(|t| self.n_dk[d * self.k + t] as u64).sum();
            debug_assert_eq!(sum, self.docs[d].len() as u64, "doc count drift");
        }
        for topic in 0..self.k {
            let sum: u64 = (0..self.v)
                .map(|w| self.n_kw[topic * self.v + w] as u64)
                .sum();
            debug_assert_eq!(sum, self.n_k[topic], "topic count drift");
        }
    }
}

impl LdaModel {
    /// Trains a model on bag-of-words documents over `vocab`.
    pub fn train(bows: &[BowVector], vocab: &Vocabulary, config: TrainConfig) -> Result<LdaModel> {
        config.validate()?;
        if bows.is_empty() {
            return Err(Error::validation("training corpus is empty"));
        }
        if vocab.is_empty() {
            return Err(Error::validation("vocabulary is empty"));
        }
        let v = vocab.len();
        for bow in bows {
            if let Some(max_id) = bow.max_id() {
                if max_id as usize >= v {
                    return Err(Error::validation(format!(
                        "bow token id {max_id} out of range for vocabulary of {v}"
                    )));
                }
            }
        }
        let docs: Vec<Vec<u32>> = bows.iter().map(|b| b.instances()).collect();
        if docs.iter().all(|d| d.is_empty()) {
            return Err(Error::validation("all documents are empty after vocabulary filtering"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut state = GibbsState::init(docs, config.k, v, &mut rng);
        let mut weights = Vec::new();
        let mut loglik_trace = Vec::with_capacity(config.iters);
        for _ in 0..config.iters {
            state.sweep(config.alpha, config.beta, &mut rng, &mut weights);
            loglik_trace.push(state.joint_loglik(config.alpha, config.beta));
        }

        let mut phi = vec![0.0; config.k * v];
        let vb = v as f64 * config.beta;
        for topic in 0..config.k {
            let denom = state.n_k[topic] as f64 + vb;
            for w in 0..v {
                phi[topic * v + w] =
                    (state.n_kw[topic * v + w] as f64 + config.beta) / denom;
            }
        }

        Ok(LdaModel {
            k: config.k,
            alpha: config.alpha,
            beta: config.beta,
            phi,
            vocab: vocab.clone(),
            seed: config.seed,
            train_iters: config.iters,
            loglik_trace,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn train_iters(&self) -> usize {
        self.train_iters
    }

    pub fn loglik_trace(&self) -> &[f64] {
        &self.loglik_trace
    }

    /// Row `k` of phi: the word distribution of one topic.
    pub fn topic_word_row(&self, topic: usize) -> &[f64] {
        let v = self.vocab.len();
        &self.phi[topic * v..(topic + 1) * v]
    }

    /// Fold-in Gibbs inference of the topic distribution of one text, with
    /// phi frozen. An empty bag of words yields the uniform distribution.
    pub fn infer(&self, bow: &BowVector, config: InferConfig) -> Result<TopicDistribution> {
        let v = self.vocab.len();
        if let Some(max_id) = bow.max_id() {
            if max_id as usize >= v {
                return Err(Error::validation(format!(
                    "bow token id {max_id} out of range for model vocabulary of {v}"
                )));
            }
        }
        let instances = bow.instances();
        if instances.is_empty() {
            return Ok(TopicDistribution::uniform(self.k));
        }
        if config.iters < 1 {
            return Err(Error::validation("infer iters must be >= 1"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut n_k = vec![0u32; self.k];
        let mut z: Vec<usize> = (0..instances.len())
            .map(|_| rng.gen_range(0..self.k))
            .collect();
        for &topic in &z {
            n_k[topic] += 1;
        }

        let n_d = instances.len() as f64;
        let averaged_sweeps = (config.iters / 4).max(1);
        let first_averaged = config.iters - averaged_sweeps;
        let mut theta_acc = vec![0.0; self.k];
        let mut weights = vec![0.0; self.k];

        for sweep in 0..config.iters {
            for (i, &w) in instances.iter().enumerate() {
                let old = z[i];
                n_k[old] -= 1;
                let mut total = 0.0;
                for (topic, cum) in weights.iter_mut().enumerate() {
                    let p = (n_k[topic] as f64 + self.alpha) * self.phi[topic * v + w as usize];
                    total += p;
                    *cum = total;
                }
                let draw = rng.gen_range(0.0..total);
                let new = weights.partition_point(|&cum| cum <= draw).min(self.k - 1);
                z[i] = new;
                n_k[new] += 1;
            }
            if sweep >= first_averaged {
                let denom = n_d + self.k as f64 * self.alpha;
                for topic in 0..self.k {
                    theta_acc[topic] += (n_k[topic] as f64 + self.alpha) / denom;
                }
            }
        }

        let mut theta: Vec<f64> = theta_acc
            .iter()
            .map(|t| t / averaged_sweeps as f64)
            .collect();
        // Exact renormalization guards the simplex invariant against
        // accumulated rounding.
        let sum: f64 = theta.iter().sum();
        for t in &mut theta {
            *t /= sum;
        }
        TopicDistribution::new(theta)
    }

    /// Top `m` tokens of a topic by probability, ties broken by ascending
    /// token id. `m` larger than the vocabulary clamps.
    pub fn top_words(&self, topic: usize, m: usize) -> Result<Vec<String>> {
        if topic >= self.k {
            return Err(Error::validation(format!(
                "topic index {topic} out of range for K={}",
                self.k
            )));
        }
        if m < 1 {
            return Err(Error::validation("top_words requires m >= 1"));
        }
        let row = self.topic_word_row(topic);
        let mut order: Vec<u32> = (0..row.len() as u32).collect();
        order.sort_by(|&a, &b| {
            row[b as usize]
                .partial_cmp(&row[a as usize])
                .expect("finite phi")
                .then(a.cmp(&b))
        });
        Ok(order
            .into_iter()
            .take(m)
            .map(|id| self.vocab.token(id).expect("id in range").to_string())
            .collect())
    }

    /// Held-out perplexity:
    /// `exp(-sum_d sum_w c_dw ln(sum_k theta_dk phi_kw) / sum_d N_d)`,
    /// with each theta_d obtained by fold-in inference.
    pub fn perplexity(&self, heldout: &[BowVector], infer_cfg: InferConfig) -> Result<f64> {
        if heldout.is_empty() {
            return Err(Error::validation("held-out set is empty"));
        }
        let total_tokens: u64 = heldout.iter().map(|b| b.total()).sum();
        if total_tokens == 0 {
            return Err(Error::validation(
                "held-out set has no in-vocabulary tokens",
            ));
        }
        let v = self.vocab.len();
        let mut log_sum = 0.0;
        for (d_idx, bow) in heldout.iter().enumerate() {
            if bow.is_empty() {
                continue;
            }
            let seed = derive_seed(infer_cfg.seed, &["perplexity", &d_idx.to_string()]);
            let theta = self.infer(bow, InferConfig { seed, ..infer_cfg })?;
            for &(w, count) in bow.entries() {
                let p_w: f64 = (0..self.k)
                    .map(|topic| theta.probs()[topic] * self.phi[topic * v + w as usize])
                    .sum();
                log_sum += count as f64 * p_w.ln();
            }
        }
        Ok((-log_sum / total_tokens as f64).exp())
    }

    /// Serializes to the versioned `TMDLDA1` binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let v = self.vocab.len();
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.k as u32).to_le_bytes());
        buf.extend_from_slice(&(v as u32).to_le_bytes());
        buf.extend_from_slice(&self.alpha.to_le_bytes());
        buf.extend_from_slice(&self.beta.to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&(self.train_iters as u32).to_le_bytes());
        for id in 0..v as u32 {
            let token = self.vocab.token(id).expect("id in range");
            buf.extend_from_slice(&(token.len() as u32).to_le_bytes());
            buf.extend_from_slice(token.as_bytes());
            buf.extend_from_slice(&self.vocab.corpus_freq(id).to_le_bytes());
            buf.extend_from_slice(&self.vocab.doc_freq(id).to_le_bytes());
        }
        buf.extend_from_slice(&(self.loglik_trace.len() as u32).to_le_bytes());
        for ll in &self.loglik_trace {
            buf.extend_from_slice(&ll.to_le_bytes());
        }
        for value in &self.phi {
            buf.extend_from_slice(&value.to_le_bytes());
        }
        let checksum = Sha256::digest(&buf);
        buf.extend_from_slice(&checksum);
        buf
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LdaModel> {
        let mut cursor = Cursor::new(bytes);
        let magic = cursor.take_n(MAGIC.len())?;
        if magic != MAGIC {
            return Err(Error::Format(format!(
                "bad model magic {:?}; expected TMDLDA1 (stale or foreign file?)",
                String::from_utf8_lossy(magic)
            )));
        }
        if bytes.len() < 32 {
            return Err(Error::Format("model file truncated".into()));
        }
        let (body, stored_checksum) = bytes.split_at(bytes.len() - 32);
        let computed = Sha256::digest(body);
        if computed.as_slice() != stored_checksum {
            return Err(Error::Format("model checksum mismatch".into()));
        }

        let k = cursor.read_u32()? as usize;
        let v = cursor.read_u32()? as usize;
        let alpha = cursor.read_f64()?;
        let beta = cursor.read_f64()?;
        let seed = cursor.read_u64()?;
        let train_iters = cursor.read_u32()? as usize;
        let mut tokens = Vec::with_capacity(v);
        let mut corpus_freq = Vec::with_capacity(v);
        let mut doc_freq = Vec::with_capacity(v);
        for _ in 0..v {
            let len = cursor.read_u32()? as usize;
            let raw = cursor.take_n(len)?;
            let token = std::str::from_utf8(raw)
                .map_err(|_| Error::Format("invalid utf-8 in vocabulary block".into()))?;
            tokens.push(token.to_string());
            corpus_freq.push(cursor.read_u64()?);
            doc_freq.push(cursor.read_u64()?);
        }
        let trace_len = cursor.read_u32()? as usize;
        let mut loglik_trace = Vec::with_capacity(trace_len);
        for _ in 0..trace_len {
            loglik_trace.push(cursor.read_f64()?);
        }
        let mut phi = Vec::with_capacity(k * v);
        for _ in 0..k * v {
            phi.push(cursor.read_f64()?);
        }
        let vocab = Vocabulary::from_parts(tokens, corpus_freq, doc_freq)?;
        Ok(LdaModel {
            k,
            alpha,
            beta,
            phi,
            vocab,
            seed,
            train_iters,
            loglik_trace,
        })
    }

    pub fn load(path: &Path) -> Result<LdaModel> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

const MAGIC: &[u8] = b"TMDLDA1";

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn take_n(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format("model file truncated".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn read_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take_n(4)?.try_into().expect("4 bytes")))
    }

    fn read_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take_n(8)?.try_into().expect("8 bytes")))
    }

    fn read_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take_n(8)?.try_into().expect("8 bytes")))
    }
}
