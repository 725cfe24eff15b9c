//! UMass topic coherence over document co-occurrence counts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::TokenDoc;
use crate::lda::LdaModel;
use crate::{Error, Result};

/// Document-level co-occurrence counts for a restricted token set.
///
/// Counts use set semantics: a token appearing several times in one document
/// counts once.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoocCounts {
    pub doc_count: u64,
    single: BTreeMap<String, u64>,
    pair: BTreeMap<(String, String), u64>,
}

impl CoocCounts {
    /// Documents containing `token`.
    pub fn single(&self, token: &str) -> u64 {
        self.single.get(token).copied().unwrap_or(0)
    }

    /// Documents containing both tokens (order-insensitive).
    pub fn pair(&self, a: &str, b: &str) -> u64 {
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.pair.get(&key).copied().unwrap_or(0)
    }

    /// Count-consistency check: `D(a,b) <= min(D(a), D(b)) <= doc_count`.
    pub fn check_invariants(&self) -> Result<()> {
        for ((a, b), &count) in &self.pair {
            let bound = self.single(a).min(self.single(b));
            if count > bound || bound > self.doc_count {
                return Err(Error::validation(format!(
                    "co-occurrence counts inconsistent for ({a}, {b})"
                )));
            }
        }
        Ok(())
    }
}

/// Builds document-level co-occurrence counts over `docs`, restricted to
/// the tokens in `restrict_to`.
pub fn build_cooc(docs: &[TokenDoc], restrict_to: &BTreeSet<String>) -> Result<CoocCounts> {
    if restrict_to.is_empty() {
        return Err(Error::validation("build_cooc requires a non-empty token set"));
    }
    let mut counts = CoocCounts {
        doc_count: docs.len() as u64,
        ..CoocCounts::default()
    };
    for doc in docs {
        let present: BTreeSet<&str> = doc
            .tokens()
            .filter(|t| restrict_to.contains(*t))
            .collect();
        for &token in &present {
            *counts.single.entry(token.to_string()).or_insert(0) += 1;
        }
        let items: Vec<&str> = present.into_iter().collect();
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                *counts
                    .pair
                    .entry((items[i].to_string(), items[j].to_string()))
                    .or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Coherence of a single topic, or a marker that it cannot be scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum TopicCoherence {
    Score(f64),
    /// Fewer than two of the topic's top words occur in the scoring corpus.
    Undefined,
}

impl TopicCoherence {
    pub fn score(&self) -> Option<f64> {
        match self {
            TopicCoherence::Score(v) => Some(*v),
            TopicCoherence::Undefined => None,
        }
    }
}

/// UMass coherence of one topic's top words (probability-descending order):
/// `sum over m in 2..=M, l in 1..m of ln((D(v_m, v_l) + eps) / D(v_l))`.
///
/// Words with zero document frequency in the scoring corpus are excluded
/// before scoring; if fewer than two words remain the topic is undefined.
pub fn umass_topic(cooc: &CoocCounts, top_words: &[String], epsilon: f64) -> TopicCoherence {
    let scoreable: Vec<&String> = top_words.iter().filter(|w| cooc.single(w) > 0).collect();
    if scoreable.len() < 2 {
        return TopicCoherence::Undefined;
    }
    let mut total = 0.0;
    for m in 1..scoreable.len() {
        for l in 0..m {
            let d_pair = cooc.pair(scoreable[m], scoreable[l]) as f64;
            let d_single = cooc.single(scoreable[l]) as f64;
            total += ((d_pair + epsilon) / d_single).ln();
        }
    }
    TopicCoherence::Score(total)
}

/// Per-topic UMass scores and their mean over the defined topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCoherence {
    pub per_topic: Vec<TopicCoherence>,
    pub mean: f64,
    /// Top words actually scored, per topic.
    pub top_words: Vec<Vec<String>>,
}

/// Scores every topic of `model` over `docs` using its top `m` words.
pub fn umass_model(
    model: &LdaModel,
    docs: &[TokenDoc],
    m: usize,
    epsilon: f64,
) -> Result<ModelCoherence> {
    if m < 2 {
        return Err(Error::validation("umass_model requires M >= 2"));
    }
    let top_words: Vec<Vec<String>> = (0..model.num_topics())
        .map(|k| model.top_words(k, m))
        .collect::<Result<_>>()?;
    let restrict: BTreeSet<String> = top_words.iter().flatten().cloned().collect();
    let cooc = build_cooc(docs, &restrict)?;
    cooc.check_invariants()?;

    let per_topic: Vec<TopicCoherence> = top_words
        .iter()
        .map(|words| umass_topic(&cooc, words, epsilon))
        .collect();
    let defined: Vec<f64> = per_topic.iter().filter_map(|t| t.score()).collect();
    if defined.is_empty() {
        return Err(Error::validation(
            "no topic could be scored over the given corpus",
        ));
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    Ok(ModelCoherence {
        per_topic,
        mean,
        top_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn doc(id: &str, tokens: &[&str]) -> TokenDoc {
        TokenDoc {
            id: id.into(),
            label: Label::Unlabeled,
            sentences: vec![tokens.iter().map(|t| t.to_string()).collect()],
        }
    }

    fn abc_docs() -> Vec<TokenDoc> {
        vec![
            doc("1", &["a", "b"]),
            doc("2", &["a"]),
            doc("3", &["a", "b", "c"]),
        ]
    }

    fn restrict(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn hand_counts() {
        let cooc = build_cooc(&abc_docs(), &restrict(&["a", "b", "c"])).unwrap();
        assert_eq!(cooc.single("a"), 3);
        assert_eq!(cooc.single("b"), 2);
        assert_eq!(cooc.single("c"), 1);
        assert_eq!(cooc.pair("a", "b"), 2);
        assert_eq!(cooc.pair("b", "c"), 1);
        assert_eq!(cooc.pair("a", "c"), 1);
        cooc.check_invariants().unwrap();
    }

    #[test]
    fn empty_intersection_gives_zero_counts() {
        let cooc = build_cooc(&abc_docs(), &restrict(&["zzz"])).unwrap();
        assert_eq!(cooc.single("zzz"), 0);
        assert_eq!(cooc.pair("zzz", "a"), 0);
    }

    #[test]
    fn duplicates_within_doc_count_once() {
        let with_dup = build_cooc(&[doc("1", &["a", "a", "b"])], &restrict(&["a", "b"])).unwrap();
        let without = build_cooc(&[doc("1", &["a", "b"])], &restrict(&["a", "b"])).unwrap();
        assert_eq!(with_dup, without);
    }

    #[test]
    fn umass_hand_values() {
        let cooc = build_cooc(&abc_docs(), &restrict(&["a", "b", "c"])).unwrap();
        // [a, b]: ln((D(b,a)+1)/D(a)) = ln(3/3) = 0
        let ab = umass_topic(&cooc, &["a".into(), "b".into()], 1.0);
        assert_eq!(ab, TopicCoherence::Score(0.0));
        // [b, a]: ln((D(a,b)+1)/D(b)) = ln(3/2)
        let ba = umass_topic(&cooc, &["b".into(), "a".into()], 1.0);
        let expected = (3.0f64 / 2.0).ln();
        match ba {
            TopicCoherence::Score(v) => assert!((v - expected).abs() < 1e-15),
            TopicCoherence::Undefined => panic!("should be defined"),
        }
    }

    #[test]
    fn never_cooccurring_words_score_nonpositive() {
        let docs = vec![doc("1", &["x"]), doc("2", &["y"]), doc("3", &["z"])];
        let cooc = build_cooc(&docs, &restrict(&["x", "y", "z"])).unwrap();
        let c = umass_topic(&cooc, &["x".into(), "y".into(), "z".into()], 1.0);
        match c {
            TopicCoherence::Score(v) => assert!(v <= 0.0),
            TopicCoherence::Undefined => panic!("should be defined"),
        }
    }

    #[test]
    fn fewer_than_two_scoreable_words_is_undefined() {
        let cooc = build_cooc(&abc_docs(), &restrict(&["a", "b"])).unwrap();
        let c = umass_topic(&cooc, &["a".into(), "nope".into()], 1.0);
        assert_eq!(c, TopicCoherence::Undefined);
    }

    #[test]
    fn epsilon_monotonicity() {
        let cooc = build_cooc(&abc_docs(), &restrict(&["a", "b", "c"])).unwrap();
        let words: Vec<String> = vec!["a".into(), "c".into(), "b".into()];
        let lo = umass_topic(&cooc, &words, 0.01).score().unwrap();
        let hi = umass_topic(&cooc, &words, 1.0).score().unwrap();
        assert!(hi >= lo);
    }
}
