//! Deterministic synthetic-corpus generation.
//!
//! The generator mirrors the topic-model generative story: every document
//! draws an opening topic, and "fake" documents draw their remainder from a
//! different topic with probability `drift_prob`. Per-topic word
//! distributions put 0.9 of their mass on a disjoint vocabulary slice so a
//! trained model can recover the planted structure unambiguously. The output
//! is ordinary raw text that goes through the standard preprocessing
//! pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, RawDocument};
use crate::{Error, Result};

/// Parameters of the synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub k_true: usize,
    pub vocab_size: usize,
    pub docs_per_class: usize,
    pub sentences_per_doc: usize,
    pub words_per_sentence: usize,
    /// Number of leading sentences drawn from the opening topic; the rest
    /// form the remainder section.
    pub opening_sentences: usize,
    /// Probability that a fake document's remainder comes from a different
    /// topic than its opening.
    pub drift_prob: f64,
    /// Same, for the real class (default 0).
    pub real_drift_prob: f64,
    /// When true, the two classes draw from disjoint topic pools (real docs
    /// from the lower half of the planted topics, fake docs from the upper
    /// half), mirroring the class-distinct topic content of real news data;
    /// drift stays within the document's pool. When false, both classes
    /// share all topics and only drift separates them.
    pub class_topic_split: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            k_true: 4,
            vocab_size: 40,
            docs_per_class: 100,
            sentences_per_doc: 10,
            words_per_sentence: 8,
            opening_sentences: 5,
            drift_prob: 1.0,
            real_drift_prob: 0.0,
            class_topic_split: true,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.k_true < 1 {
            return Err(Error::validation("k_true must be >= 1"));
        }
        if self.vocab_size < 2 * self.k_true {
            return Err(Error::validation(
                "vocab_size must be >= 2 * k_true so each topic gets a disjoint slice",
            ));
        }
        if self.docs_per_class < 1 {
            return Err(Error::validation("docs_per_class must be >= 1"));
        }
        if self.opening_sentences < 1 || self.sentences_per_doc <= self.opening_sentences {
            return Err(Error::validation(
                "sentences_per_doc must exceed opening_sentences (>= 1)",
            ));
        }
        if self.words_per_sentence < 1 {
            return Err(Error::validation("words_per_sentence must be >= 1"));
        }
        for p in [self.drift_prob, self.real_drift_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation("drift probabilities must be in [0, 1]"));
            }
        }
        if self.class_topic_split && self.k_true < 2 {
            return Err(Error::validation(
                "class_topic_split needs k_true >= 2 so each class gets a pool",
            ));
        }
        if !self.class_topic_split
            && self.k_true < 2
            && (self.drift_prob > 0.0 || self.real_drift_prob > 0.0)
        {
            return Err(Error::validation("drift needs k_true >= 2"));
        }
        Ok(())
    }

    /// Topic pool of one class: the full range, or the class's half when
    /// `class_topic_split` is on.
    fn pool(&self, label: Label) -> std::ops::Range<usize> {
        if !self.class_topic_split {
            return 0..self.k_true;
        }
        let half = self.k_true / 2;
        match label {
            Label::Real => 0..half,
            _ => half..self.k_true,
        }
    }
}

/// A synthetic word: "tw0042" etc. All survive default preprocessing
/// (length >= 2, not stopwords, already lowercase).
fn word(index: usize) -> String {
    format!("tw{index:04}")
}

struct TopicSampler {
    vocab_size: usize,
    slice_size: usize,
}

impl TopicSampler {
    /// Draws a word: 0.9 mass uniform on the topic's slice, 0.1 uniform on
    /// the whole vocabulary.
    fn draw(&self, topic: usize, rng: &mut ChaCha8Rng) -> usize {
        if rng.gen_bool(0.9) {
            topic * self.slice_size + rng.gen_range(0..self.slice_size)
        } else {
            rng.gen_range(0..self.vocab_size)
        }
    }
}

fn sentence_text(topic: usize, sampler: &TopicSampler, words: usize, rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<String> = (0..words).map(|_| word(sampler.draw(topic, rng))).collect();
    // Capitalize the opener so the sentence splitter sees a boundary.
    if let Some(first) = tokens.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            *first = c.to_uppercase().collect::<String>() + chars.as_str();
        }
    }
    tokens.join(" ") + "."
}

/// Generates a labelled corpus per `spec`. Identical spec and seed produce
/// identical corpora.
pub fn generate(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sampler = TopicSampler {
        vocab_size: spec.vocab_size,
        slice_size: spec.vocab_size / spec.k_true,
    };

    let mut docs = Vec::with_capacity(2 * spec.docs_per_class);
    for (label, drift) in [
        (Label::Fake, spec.drift_prob),
        (Label::Real, spec.real_drift_prob),
    ] {
        for i in 0..spec.docs_per_class {
            let pool = spec.pool(label);
            let pool_size = pool.len();
            let opening_topic = pool.start + rng.gen_range(0..pool_size);
            let drifts = spec.k_true > 1 && rng.gen_bool(drift);
            // Drift stays inside the class pool when it has at least two
            // topics; a singleton pool drifts to any other planted topic.
            let remainder_topic = if drifts && pool_size > 1 {
                let offset = rng.gen_range(1..pool_size);
                pool.start + (opening_topic - pool.start + offset) % pool_size
            } else if drifts {
                let offset = rng.gen_range(1..spec.k_true);
                (opening_topic + offset) % spec.k_true
            } else {
                opening_topic
            };
            let mut sentences = Vec::with_capacity(spec.sentences_per_doc);
            for s in 0..spec.sentences_per_doc {
                let topic = if s < spec.opening_sentences {
                    opening_topic
                } else {
                    remainder_topic
                };
                sentences.push(sentence_text(topic, &sampler, spec.words_per_sentence, &mut rng));
            }
            docs.push(RawDocument {
                id: format!("{}-{i:05}", label.as_str()),
                label,
                text: sentences.join(" "),
            });
        }
    }
    Corpus::new(docs)
}
