//! The TOML run configuration shared by all subcommands.
//!
//! Every section has defaults, so a minimal config (or none at all) works;
//! reports embed the SHA-256 of the canonical JSON form of the full config.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusFormat, Normalizer, PreprocessConfig};
use crate::divergence::{DivergenceMeasure, MeasureKind};
use crate::features::FeatureVariant;
use crate::reduce::{ReductionConfig, ReductionMethod};
use crate::stats::Alternative;
use crate::synth::SynthSpec;
use crate::{Error, Result};

use super::artifacts::sha256_hex;

/// Primary on-disk format for report artifacts; tables are always written
/// as CSV alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::validation(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub plot: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 42,
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Json,
            plot: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSection {
    pub path: PathBuf,
    pub format: CorpusFormat,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            path: PathBuf::from("corpus.jsonl"),
            format: CorpusFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessSection {
    pub min_token_len: usize,
    pub bigram_min_count: u32,
    pub bigram_threshold: f64,
    pub normalizer: Normalizer,
    /// Optional stopword file replacing the bundled list.
    pub stopword_file: Option<PathBuf>,
    pub extra_stopwords: Vec<String>,
    /// Optional token<TAB>lemma sidecar.
    pub lemma_file: Option<PathBuf>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            min_token_len: 2,
            bigram_min_count: 5,
            bigram_threshold: 100.0,
            normalizer: Normalizer::LowercaseStripAccents,
            stopword_file: None,
            extra_stopwords: Vec::new(),
            lemma_file: None,
        }
    }
}

impl PreprocessSection {
    /// Materializes the full preprocessing config, reading the optional
    /// stopword and lemma files.
    pub fn build(&self) -> Result<PreprocessConfig> {
        let stopword_set = match &self.stopword_file {
            Some(path) => crate::corpus::load_stopword_file(path)?,
            None => crate::corpus::default_stopwords(),
        };
        let extra_stopwords: BTreeSet<String> =
            self.extra_stopwords.iter().map(|s| s.to_lowercase()).collect();
        let lemmas = match &self.lemma_file {
            Some(path) => Some(crate::corpus::load_lemma_sidecar(path)?),
            None => None,
        };
        Ok(PreprocessConfig {
            stopword_set,
            extra_stopwords,
            min_token_len: self.min_token_len,
            bigram_min_count: self.bigram_min_count,
            bigram_threshold: self.bigram_threshold,
            normalizer: self.normalizer,
            lemmas,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaSection {
    pub n_set: Vec<usize>,
    /// Document-topic concentration; `None` means `1/K`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub train_iters: usize,
    pub infer_iters: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        LdaSection {
            n_set: vec![10, 20, 30, 40, 50],
            alpha: None,
            beta: 0.01,
            train_iters: 500,
            infer_iters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviateSection {
    pub measure: MeasureKind,
    pub epsilon: f64,
    pub l: usize,
    /// When true, run the full l `1..=l` sweep instead of a single l.
    pub sweep: bool,
}

impl Default for DeviateSection {
    fn default() -> Self {
        DeviateSection {
            measure: MeasureKind::Chebyshev,
            epsilon: DivergenceMeasure::DEFAULT_EPSILON,
            l: 5,
            sweep: false,
        }
    }
}

impl DeviateSection {
    pub fn measure(&self) -> Result<DivergenceMeasure> {
        DivergenceMeasure::with_epsilon(self.measure, self.epsilon)
    }
}

/// Which slice of each document coherence is scored over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceScope {
    Full,
    Openings,
    Remainders,
}

impl std::str::FromStr for CoherenceScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(CoherenceScope::Full),
            "openings" => Ok(CoherenceScope::Openings),
            "remainders" => Ok(CoherenceScope::Remainders),
            other => Err(Error::validation(format!("unknown coherence scope `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoherenceSection {
    pub top_words: usize,
    pub epsilon: f64,
    pub scope: CoherenceScope,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        CoherenceSection {
            top_words: 10,
            epsilon: 1.0,
            scope: CoherenceScope::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturesSection {
    pub variant: FeatureVariant,
    /// N for the single-N variant.
    pub single_n: usize,
    pub balance: bool,
}

impl Default for FeaturesSection {
    fn default() -> Self {
        FeaturesSection {
            variant: FeatureVariant::Aggregate300,
            single_n: 10,
            balance: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceSection {
    pub method: ReductionMethod,
    pub target_dim: usize,
    pub tsne_perplexity: f64,
    pub tsne_iters: usize,
    pub nmf_iters: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Feature CSV to reduce; defaults to the configured features variant.
    pub input: Option<PathBuf>,
}

impl Default for ReduceSection {
    fn default() -> Self {
        ReduceSection {
            method: ReductionMethod::Tsne,
            target_dim: 2,
            tsne_perplexity: 30.0,
            tsne_iters: 1000,
            nmf_iters: 200,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            input: None,
        }
    }
}

impl ReduceSection {
    pub fn build(&self, seed: u64) -> ReductionConfig {
        ReductionConfig {
            method: self.method,
            target_dim: self.target_dim,
            tsne_perplexity: self.tsne_perplexity,
            tsne_iters: self.tsne_iters,
            nmf_iters: self.nmf_iters,
            seed,
            learning_rate: self.learning_rate,
            early_exaggeration: self.early_exaggeration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterSection {
    pub k: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub baseline_trials: usize,
    pub input: Option<PathBuf>,
}

impl Default for ClusterSection {
    fn default() -> Self {
        ClusterSection {
            k: 2,
            max_iter: 500,
            restarts: 10,
            baseline_trials: 1000,
            input: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logistic,
    Knn,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(ClassifierKind::Logistic),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::validation(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifySection {
    pub model: ClassifierKind,
    pub l2_reg: f64,
    pub knn_k: usize,
    pub input: Option<PathBuf>,
}

impl Default for ClassifySection {
    fn default() -> Self {
        ClassifySection {
            model: ClassifierKind::Logistic,
            l2_reg: 1.0,
            knn_k: 20,
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSection {
    pub k_true: usize,
    pub vocab_size: usize,
    pub docs_per_class: usize,
    pub sentences_per_doc: usize,
    pub words_per_sentence: usize,
    pub opening_sentences: usize,
    pub drift_prob: f64,
    pub real_drift_prob: f64,
    pub class_topic_split: bool,
}

impl Default for SynthSection {
    fn default() -> Self {
        let spec = SynthSpec::default();
        SynthSection {
            k_true: spec.k_true,
            vocab_size: spec.vocab_size,
            docs_per_class: spec.docs_per_class,
            sentences_per_doc: spec.sentences_per_doc,
            words_per_sentence: spec.words_per_sentence,
            opening_sentences: spec.opening_sentences,
            drift_prob: spec.drift_prob,
            real_drift_prob: spec.real_drift_prob,
            class_topic_split: spec.class_topic_split,
        }
    }
}

impl SynthSection {
    pub fn build(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            k_true: self.k_true,
            vocab_size: self.vocab_size,
            docs_per_class: self.docs_per_class,
            sentences_per_doc: self.sentences_per_doc,
            words_per_sentence: self.words_per_sentence,
            opening_sentences: self.opening_sentences,
            drift_prob: self.drift_prob,
            real_drift_prob: self.real_drift_prob,
            class_topic_split: self.class_topic_split,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedSection {
    pub embeddings: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub alternative: Alternative,
}

impl Default for EmbedSection {
    fn default() -> Self {
        EmbedSection {
            embeddings: None,
            scores: None,
            alternative: Alternative::TwoSided,
        }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub run: RunSection,
    pub corpus: CorpusSection,
    pub preprocess: PreprocessSection,
    pub lda: LdaSection,
    pub deviate: DeviateSection,
    pub coherence: CoherenceSection,
    pub features: FeaturesSection,
    pub reduce: ReduceSection,
    pub cluster: ClusterSection,
    pub classify: ClassifySection,
    pub synth: SynthSection,
    pub embed: EmbedSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&contents).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map(|s| contents[..s.start].lines().count())
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    /// Canonical JSON form; field order is fixed by the struct layout.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hash embedded into every report.
    pub fn sha256(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }

    /// Seed for one named pipeline stage, derived from the master seed.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        crate::lda::derive_seed(self.run.seed, &["stage", stage])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let config = RunConfig::default();
        let toml_str = toml::to_string_pretty(&config).unwrap();
        let back: RunConfig = toml::from_str(&toml_str).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let config: RunConfig = toml::from_str(
            r#"
[run]
seed = 7

[deviate]
measure = "euclidean"
l = 3
"#,
        )
        .unwrap();
        assert_eq!(config.run.seed, 7);
        assert_eq!(config.deviate.measure, MeasureKind::Euclidean);
        assert_eq!(config.deviate.l, 3);
        assert_eq!(config.lda.n_set, vec![10, 20, 30, 40, 50]);
        assert_eq!(config.cluster.k, 2);
    }

    #[test]
    fn config_hash_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.sha256(), b.sha256());
        b.run.seed = 1;
        assert_ne!(a.sha256(), b.sha256());
    }

    #[test]
    fn stage_seeds_differ_by_stage() {
        let config = RunConfig::default();
        assert_ne!(config.stage_seed("lda"), config.stage_seed("cluster"));
        assert_eq!(config.stage_seed("lda"), config.stage_seed("lda"));
    }
}
