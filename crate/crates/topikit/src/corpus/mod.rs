//! Corpus ingestion and the preprocessing recipe.
//!
//! Raw labelled documents come in as JSONL or CSV; [`preprocess`] turns them
//! into sentence-structured token documents, promotes frequent bigrams into
//! single phrase tokens, and builds the vocabulary / bag-of-words views the
//! topic models consume.

mod phrases;
mod preprocess;
mod vocab;

pub use phrases::{detect_bigrams, PhraseTable};
pub use preprocess::{
    default_stopwords, load_lemma_sidecar, load_stopword_file, parse_stopwords, preprocess,
    split_sentences, tokenize_normalize, Normalizer, PreprocessConfig, PreprocessedCorpus,
    TokenDoc,
};
pub use vocab::{to_bow, BowVector, Vocabulary};

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Class label attached to a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
    Rumour,
    Nonrumour,
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
            Label::Rumour => "rumour",
            Label::Nonrumour => "nonrumour",
            Label::Unlabeled => "unlabeled",
        }
    }

    /// Two-sided grouping used by the class-comparison reports: `fake` and
    /// `rumour` fall on the deviating side, `real` and `nonrumour` on the
    /// authentic side. `Unlabeled` belongs to neither.
    pub fn side(&self) -> Option<LabelSide> {
        match self {
            Label::Fake | Label::Rumour => Some(LabelSide::Fake),
            Label::Real | Label::Nonrumour => Some(LabelSide::Real),
            Label::Unlabeled => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" => Ok(Label::Fake),
            "real" => Ok(Label::Real),
            "rumour" | "rumor" => Ok(Label::Rumour),
            "nonrumour" | "nonrumor" | "non-rumour" | "non-rumor" => Ok(Label::Nonrumour),
            "unlabeled" | "unlabelled" | "" => Ok(Label::Unlabeled),
            other => Err(Error::validation(format!("unknown label `{other}`"))),
        }
    }
}

/// Binary side of a label for fake-vs-real comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSide {
    Fake,
    Real,
}

impl LabelSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelSide::Fake => "fake",
            LabelSide::Real => "real",
        }
    }
}

impl fmt::Display for LabelSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labelled news text unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub label: Label,
    pub text: String,
}

/// A collection of [`RawDocument`]s with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub docs: Vec<RawDocument>,
}

/// On-disk corpus formats accepted by [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::validation(format!(
                "unknown corpus format `{other}` (expected jsonl or csv)"
            ))),
        }
    }
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids and blank texts.
    pub fn new(docs: Vec<RawDocument>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::validation(format!("duplicate document id `{}`", doc.id)));
            }
            if doc.text.trim().is_empty() {
                return Err(Error::validation(format!(
                    "document `{}` has empty text",
                    doc.id
                )));
            }
        }
        Ok(Corpus { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RawDocument> {
        self.docs.iter()
    }

    /// Serializes the corpus as JSONL, one document object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.docs {
            out.push_str(&serde_json::to_string(doc).expect("document serializes"));
            out.push('\n');
        }
        out
    }
}

/// Loads a labelled corpus from disk.
///
/// JSONL expects one object per line with keys `id`, `label`, `text`.
/// CSV expects the header `id,label,text` with RFC-4180 quoting (multi-line
/// quoted fields are preserved). Malformed records are reported with their
/// line number; duplicate ids are rejected.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => load_jsonl(path, BufReader::new(file)),
        CorpusFormat::Csv => load_csv(path, file),
    }
}

fn load_jsonl<R: BufRead>(path: &Path, reader: R) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Corpus::new(docs)
}

fn load_csv<R: std::io::Read>(path: &Path, reader: R) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["id", "label", "text"];
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header id,label,text, got {}", got.join(",")),
            });
        }
    }
    let mut docs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or_default();
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or_default();
        if record.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 3 fields, got {}", record.len()),
            });
        }
        let label: Label = record[1].parse().map_err(|e: Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        docs.push(RawDocument {
            id: record[0].to_string(),
            label,
            text: record[2].to_string(),
        });
    }
    Corpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn jsonl_round_trip_preserves_labels() {
        let f = tmp_file(
            r#"{"id":"a1","label":"fake","text":"one"}
{"id":"a2","label":"fake","text":"two"}
{"id":"b1","label":"real","text":"three"}
{"id":"b2","label":"real","text":"four"}
"#,
        );
        let corpus = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 4);
        assert_eq!(corpus.docs[0].label, Label::Fake);
        assert_eq!(corpus.docs[3].label, Label::Real);
        assert_eq!(corpus.docs[2].id, "b1");
    }

    #[test]
    fn jsonl_missing_text_names_line() {
        let f = tmp_file(
            r#"{"id":"a1","label":"fake","text":"one"}
{"id":"a2","label":"fake"}
"#,
        );
        let err = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = tmp_file(
            r#"{"id":"a1","label":"fake","text":"one"}
{"id":"a1","label":"real","text":"two"}
"#,
        );
        let err = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn csv_quoted_multiline_text_kept_intact() {
        // One record whose text field spans three physical lines.
        let f = tmp_file(
            "id,label,text\nd1,fake,\"line one\nline two\nline three\"\nd2,real,plain\n",
        );
        let corpus = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.docs[0].text, "line one\nline two\nline three");
        assert_eq!(corpus.docs[1].label, Label::Real);
    }

    #[test]
    fn csv_bad_header_rejected() {
        let f = tmp_file("id,text\n1,hello\n");
        let err = load_corpus(f.path(), CorpusFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn label_parsing_accepts_spelling_variants() {
        assert_eq!("Rumor".parse::<Label>().unwrap(), Label::Rumour);
        assert_eq!("non-rumour".parse::<Label>().unwrap(), Label::Nonrumour);
        assert!("bogus".parse::<Label>().is_err());
    }

    #[test]
    fn label_sides() {
        assert_eq!(Label::Fake.side(), Some(LabelSide::Fake));
        assert_eq!(Label::Rumour.side(), Some(LabelSide::Fake));
        assert_eq!(Label::Nonrumour.side(), Some(LabelSide::Real));
        assert_eq!(Label::Unlabeled.side(), None);
    }
}
