//! Sentence splitting, token normalization, and the preprocessing pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::phrases::{detect_bigrams, PhraseTable};
use super::vocab::Vocabulary;
use super::{Corpus, Label};
use crate::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// Token normalization strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// Lowercase and strip combining accents via canonical decomposition.
    #[default]
    LowercaseStripAccents,
    /// Lowercase only.
    LowercaseOnly,
}

/// Knobs for the preprocessing recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Base stopword set; defaults to the bundled English list.
    pub stopword_set: BTreeSet<String>,
    /// User additions, unioned with `stopword_set`.
    pub extra_stopwords: BTreeSet<String>,
    /// Tokens shorter than this (in chars) are dropped.
    pub min_token_len: usize,
    /// Minimum corpus count for a bigram to be considered for promotion.
    pub bigram_min_count: u32,
    /// Minimum phrasing score for promotion.
    pub bigram_threshold: f64,
    pub normalizer: Normalizer,
    /// Optional token -> lemma mapping, applied after stopword removal.
    #[serde(default)]
    pub lemmas: Option<BTreeMap<String, String>>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopword_set: default_stopwords(),
            extra_stopwords: BTreeSet::new(),
            min_token_len: 2,
            bigram_min_count: 5,
            bigram_threshold: 100.0,
            normalizer: Normalizer::default(),
            lemmas: None,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bigram_min_count < 1 {
            return Err(Error::validation("bigram_min_count must be >= 1"));
        }
        if self.bigram_threshold <= 0.0 {
            return Err(Error::validation("bigram_threshold must be > 0"));
        }
        Ok(())
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.stopword_set.contains(token) || self.extra_stopwords.contains(token)
    }
}

/// The bundled English stopword list.
pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// Parses stopword file contents: one token per line, `#` starts a comment.
pub fn parse_stopwords(contents: &str) -> BTreeSet<String> {
    contents
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.to_lowercase())
        .collect()
}

/// Loads a stopword file from disk (same format as [`parse_stopwords`]).
pub fn load_stopword_file(path: &Path) -> Result<BTreeSet<String>> {
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&contents))
}

/// Loads a lemma sidecar: TSV with `token<TAB>lemma` per line.
pub fn load_lemma_sidecar(path: &Path) -> Result<BTreeMap<String, String>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        match (parts.next(), parts.next()) {
            (Some(token), Some(lemma)) if !token.is_empty() && !lemma.is_empty() => {
                map.insert(token.trim().to_string(), lemma.trim().to_string());
            }
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: "expected token<TAB>lemma".into(),
                })
            }
        }
    }
    Ok(map)
}

/// A preprocessed document: ordered sentences of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub id: String,
    pub label: Label,
    pub sentences: Vec<Vec<String>>,
}

impl TokenDoc {
    /// All tokens in document order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(|s| s.as_str())
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}

/// Word before `terminator_end` (inclusive), used for the abbreviation guard.
fn word_ending_at(chars: &[char], end: usize) -> String {
    let mut start = end;
    while start > 0 && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    chars[start..=end].iter().collect()
}

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.",
    "u.s.", "u.k.", "u.n.", "u.s.a.", "inc.", "ltd.", "co.", "corp.", "gen.", "gov.", "sen.",
    "rep.", "col.", "sgt.", "lt.", "capt.", "rev.", "hon.", "fig.", "no.", "al.", "jan.", "feb.",
    "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "mon.",
    "tue.", "wed.", "thu.", "fri.", "sat.", "sun.",
];

fn is_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '«' | '»')
}

/// Splits text into sentences.
///
/// A boundary is a `.`, `!`, or `?` followed by whitespace and then an
/// uppercase letter or an opening quote, unless the word ending at the
/// terminator is a known abbreviation. Text without a terminator comes back
/// as a single sentence. No non-whitespace character is ever dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;

    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') {
            // Require whitespace then a capital or quote.
            let mut j = i + 1;
            let mut saw_ws = false;
            while j < chars.len() && chars[j].is_whitespace() {
                saw_ws = true;
                j += 1;
            }
            let next_ok = j < chars.len() && (chars[j].is_uppercase() || is_quote(chars[j]));
            if saw_ws && next_ok {
                let guarded = c == '.'
                    && ABBREVIATIONS.contains(&word_ending_at(&chars, i).to_lowercase().as_str());
                if !guarded {
                    let sentence: String = chars[start..=i].iter().collect();
                    let sentence = sentence.trim();
                    if !sentence.is_empty() {
                        sentences.push(sentence.to_string());
                    }
                    start = j;
                    i = j;
                    continue;
                }
            }
        }
        i += 1;
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim();
        if !tail.is_empty() {
            sentences.push(tail.to_string());
        }
    }
    sentences
}

fn normalize_token(token: &str, normalizer: Normalizer) -> String {
    let lower = token.to_lowercase();
    match normalizer {
        Normalizer::LowercaseOnly => lower,
        Normalizer::LowercaseStripAccents => {
            lower.nfd().filter(|c| !is_combining_mark(*c)).collect()
        }
    }
}

/// Tokenizes one sentence: split on non-alphanumeric boundaries, normalize,
/// drop stopwords and short tokens, then apply the lemma map if configured.
pub fn tokenize_normalize(sentence: &str, config: &PreprocessConfig) -> Vec<String> {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|raw| !raw.is_empty())
        .map(|raw| normalize_token(raw, config.normalizer))
        .filter(|tok| tok.chars().count() >= config.min_token_len && !config.is_stopword(tok))
        .map(|tok| match &config.lemmas {
            Some(map) => map.get(&tok).cloned().unwrap_or(tok),
            None => tok,
        })
        .collect()
}

/// Output of the full preprocessing pipeline over a background corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessedCorpus {
    pub docs: Vec<TokenDoc>,
    pub vocab: Vocabulary,
    pub phrase_table: PhraseTable,
}

/// Runs the preprocessing recipe over a corpus: sentence split, tokenize and
/// normalize, detect and apply bigram phrases, then build the vocabulary from
/// the rewritten documents.
pub fn preprocess(corpus: &Corpus, config: &PreprocessConfig) -> Result<PreprocessedCorpus> {
    config.validate()?;
    let mut docs: Vec<TokenDoc> = corpus
        .iter()
        .map(|raw| TokenDoc {
            id: raw.id.clone(),
            label: raw.label,
            sentences: split_sentences(&raw.text)
                .iter()
                .map(|s| tokenize_normalize(s, config))
                .collect(),
        })
        .collect();

    let phrase_table = detect_bigrams(&docs, config);
    for doc in &mut docs {
        for sentence in &mut doc.sentences {
            *sentence = phrase_table.rewrite(sentence);
        }
    }

    let vocab = Vocabulary::build(&docs);
    Ok(PreprocessedCorpus {
        docs,
        vocab,
        phrase_table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_period_before_capital() {
        assert_eq!(split_sentences("A b. C d."), vec!["A b.", "C d."]);
    }

    #[test]
    fn abbreviation_guard_holds() {
        assert_eq!(
            split_sentences("Mr. Smith left. He ran."),
            vec!["Mr. Smith left.", "He ran."]
        );
        assert_eq!(
            split_sentences("The U.S. Senate voted. It passed."),
            vec!["The U.S. Senate voted.", "It passed."]
        );
    }

    #[test]
    fn no_terminator_is_single_sentence() {
        assert_eq!(split_sentences("no terminator here"), vec!["no terminator here"]);
    }

    #[test]
    fn quote_counts_as_sentence_opener() {
        assert_eq!(
            split_sentences("It ended. \"Quote starts\" here."),
            vec!["It ended.", "\"Quote starts\" here."]
        );
    }

    #[test]
    fn lowercase_continuation_not_split() {
        assert_eq!(
            split_sentences("version 2. 0 was released"),
            vec!["version 2. 0 was released"]
        );
    }

    #[test]
    fn split_preserves_non_whitespace() {
        let text = "One two! Three four? Five\u{2026} and Mr. Six.";
        let joined: String = split_sentences(text).concat();
        let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        assert_eq!(strip(&joined), strip(text));
    }

    #[test]
    fn tokenize_strips_accents_and_stopwords() {
        let mut config = PreprocessConfig::default();
        config.stopword_set = ["the"].iter().map(|s| s.to_string()).collect();
        assert_eq!(tokenize_normalize("The Caf\u{e9} Opened", &config), vec!["cafe", "opened"]);
    }

    #[test]
    fn tokenize_empty_input() {
        let config = PreprocessConfig::default();
        assert!(tokenize_normalize("", &config).is_empty());
    }

    #[test]
    fn tokenize_all_filtered() {
        let config = PreprocessConfig::default();
        // "a" and "I" fall below min_token_len, "it" is a stopword.
        assert!(tokenize_normalize("a I it", &config).is_empty());
    }

    #[test]
    fn lemma_map_applied_after_stopword_removal() {
        let mut config = PreprocessConfig::default();
        config.lemmas = Some(
            [("running".to_string(), "run".to_string())]
                .into_iter()
                .collect(),
        );
        assert_eq!(
            tokenize_normalize("dogs running fast", &config),
            vec!["dogs", "run", "fast"]
        );
    }

    #[test]
    fn stopword_parsing_ignores_comments() {
        let set = parse_stopwords("# header\nfoo\nbar # trailing\n\n");
        assert_eq!(set.len(), 2);
        assert!(set.contains("foo") && set.contains("bar"));
    }

    #[test]
    fn pipeline_is_deterministic() {
        let corpus = Corpus::new(vec![
            RawDocument {
                id: "a".into(),
                label: Label::Fake,
                text: "Stock markets fell sharply. Investors panicked badly.".into(),
            },
            RawDocument {
                id: "b".into(),
                label: Label::Real,
                text: "Stock markets rose again. Traders celebrated loudly.".into(),
            },
        ])
        .unwrap();
        let config = PreprocessConfig::default();
        let once = preprocess(&corpus, &config).unwrap();
        let twice = preprocess(&corpus, &config).unwrap();
        assert_eq!(once.docs, twice.docs);
        assert_eq!(once.vocab, twice.vocab);
    }

    use super::super::RawDocument;
}
