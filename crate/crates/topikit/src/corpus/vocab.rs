//! Vocabulary and bag-of-words views.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::preprocess::TokenDoc;
use crate::{Error, Result};

/// Token <-> id bijection with corpus and document frequencies.
///
/// Ids are contiguous from 0 and assigned in lexicographic token order, so a
/// vocabulary is invariant under document reordering.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData")]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, u32>,
    corpus_freq: Vec<u64>,
    doc_freq: Vec<u64>,
}

/// Persisted fields; the lookup index is rebuilt on deserialization.
#[derive(Deserialize)]
struct VocabularyData {
    tokens: Vec<String>,
    corpus_freq: Vec<u64>,
    doc_freq: Vec<u64>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(data: VocabularyData) -> Self {
        let mut vocab = Vocabulary {
            tokens: data.tokens,
            index: BTreeMap::new(),
            corpus_freq: data.corpus_freq,
            doc_freq: data.doc_freq,
        };
        vocab.reindex();
        vocab
    }
}

impl Vocabulary {
    /// Builds the vocabulary over a set of token documents.
    pub fn build(docs: &[TokenDoc]) -> Vocabulary {
        let mut corpus_freq: BTreeMap<&str, u64> = BTreeMap::new();
        let mut doc_freq: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in docs {
            let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
            for token in doc.tokens() {
                *corpus_freq.entry(token).or_insert(0) += 1;
                seen.entry(token).or_insert(());
            }
            for token in seen.keys() {
                *doc_freq.entry(token).or_insert(0) += 1;
            }
        }
        let tokens: Vec<String> = corpus_freq.keys().map(|t| t.to_string()).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let cf = tokens.iter().map(|t| corpus_freq[t.as_str()]).collect();
        let df = tokens.iter().map(|t| doc_freq[t.as_str()]).collect();
        Vocabulary {
            tokens,
            index,
            corpus_freq: cf,
            doc_freq: df,
        }
    }

    /// Reconstructs a vocabulary from its persisted parts.
    pub fn from_parts(tokens: Vec<String>, corpus_freq: Vec<u64>, doc_freq: Vec<u64>) -> Result<Self> {
        if tokens.len() != corpus_freq.len() || tokens.len() != doc_freq.len() {
            return Err(Error::Format("vocabulary block length mismatch".into()));
        }
        let index: BTreeMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if index.len() != tokens.len() {
            return Err(Error::Format("vocabulary contains duplicate tokens".into()));
        }
        Ok(Vocabulary {
            tokens,
            index,
            corpus_freq,
            doc_freq,
        })
    }

    /// Rebuilds the lookup index after deserialization.
    pub(crate) fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(|s| s.as_str())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn corpus_freq(&self, id: u32) -> u64 {
        self.corpus_freq[id as usize]
    }

    pub fn doc_freq(&self, id: u32) -> u64 {
        self.doc_freq[id as usize]
    }

    pub fn corpus_freqs(&self) -> &[u64] {
        &self.corpus_freq
    }

    pub fn doc_freqs(&self) -> &[u64] {
        &self.doc_freq
    }
}

/// Sparse bag-of-words: `(token_id, count)` pairs with strictly increasing
/// ids and counts >= 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowVector {
    entries: Vec<(u32, u32)>,
}

impl BowVector {
    pub fn from_entries(entries: Vec<(u32, u32)>) -> Result<Self> {
        for window in entries.windows(2) {
            if window[0].0 >= window[1].0 {
                return Err(Error::validation("bow ids must be strictly increasing"));
            }
        }
        if entries.iter().any(|&(_, c)| c == 0) {
            return Err(Error::validation("bow counts must be >= 1"));
        }
        Ok(BowVector { entries })
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total token count.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    /// Expands to one token id per occurrence, in ascending id order.
    pub fn instances(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for &(id, count) in &self.entries {
            for _ in 0..count {
                out.push(id);
            }
        }
        out
    }

    /// Largest token id present, if any.
    pub fn max_id(&self) -> Option<u32> {
        self.entries.last().map(|&(id, _)| id)
    }
}

/// Converts a token sequence to a bag of words over `vocab`. Tokens absent
/// from the vocabulary are dropped.
pub fn to_bow<'a, I>(tokens: I, vocab: &Vocabulary) -> BowVector
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for token in tokens {
        if let Some(id) = vocab.id_of(token) {
            *counts.entry(id).or_insert(0) += 1;
        }
    }
    BowVector {
        entries: counts.into_iter().collect(),
    }
}
