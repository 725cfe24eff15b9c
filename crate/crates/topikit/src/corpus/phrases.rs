//! Bigram phrase promotion.
//!
//! Adjacent token pairs that co-occur often enough and score above the
//! phrasing threshold are rewritten into single `a_b` tokens before the
//! vocabulary is built.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::preprocess::{PreprocessConfig, TokenDoc};

/// Promoted bigrams with their phrasing scores.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "PhraseTableData", into = "PhraseTableData")]
pub struct PhraseTable {
    scores: BTreeMap<(String, String), f64>,
}

/// Serialized form: a flat list of (first, second, score) entries, since
/// JSON maps cannot key on tuples.
#[derive(Serialize, Deserialize)]
struct PhraseTableData {
    entries: Vec<(String, String, f64)>,
}

impl From<PhraseTableData> for PhraseTable {
    fn from(data: PhraseTableData) -> Self {
        PhraseTable {
            scores: data
                .entries
                .into_iter()
                .map(|(a, b, score)| ((a, b), score))
                .collect(),
        }
    }
}

impl From<PhraseTable> for PhraseTableData {
    fn from(table: PhraseTable) -> Self {
        PhraseTableData {
            entries: table
                .scores
                .into_iter()
                .map(|((a, b), score)| (a, b, score))
                .collect(),
        }
    }
}

impl PhraseTable {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        self.scores.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &f64)> {
        self.scores.iter()
    }

    /// Rewrites qualifying adjacent pairs into single `a_b` tokens,
    /// left to right, non-overlapping.
    pub fn rewrite(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len()
                && self
                    .scores
                    .contains_key(&(tokens[i].clone(), tokens[i + 1].clone()))
            {
                out.push(format!("{}_{}", tokens[i], tokens[i + 1]));
                i += 2;
            } else {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
        out
    }
}

/// Scans token documents (sentence-internal adjacency) and collects bigrams
/// with `count(ab) >= bigram_min_count` and
/// `score(a,b) = (count(ab) - min_count) * V / (count(a) * count(b))`
/// at or above `bigram_threshold`, where `V` is the number of distinct
/// tokens seen.
pub fn detect_bigrams(docs: &[TokenDoc], config: &PreprocessConfig) -> PhraseTable {
    let mut unigram: BTreeMap<&str, u64> = BTreeMap::new();
    let mut bigram: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for doc in docs {
        for sentence in &doc.sentences {
            for token in sentence {
                *unigram.entry(token).or_insert(0) += 1;
            }
            for pair in sentence.windows(2) {
                *bigram.entry((&pair[0], &pair[1])).or_insert(0) += 1;
            }
        }
    }
    let v = unigram.len() as f64;
    let delta = config.bigram_min_count as f64;

    let mut scores = BTreeMap::new();
    for ((a, b), count) in bigram {
        if count < config.bigram_min_count as u64 {
            continue;
        }
        let score = (count as f64 - delta) * v / (unigram[a] as f64 * unigram[b] as f64);
        if score >= config.bigram_threshold {
            scores.insert((a.to_string(), b.to_string()), score);
        }
    }
    PhraseTable { scores }
}
