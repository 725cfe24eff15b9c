//! Topic-feature representations for clustering and classification.
//!
//! Three variants: the aggregate opening+remainder stack over the configured
//! N set (300-D for N = {10..50}), whole-document vectors (150-D), and
//! single-N section pairs (2N-D). Every row is a concatenation of simplex
//! blocks. Feature matrices round-trip through a CSV with 17 significant
//! digits.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{to_bow, Label, LabelSide, TokenDoc};
use crate::deviation::{section, section_infer_seed, SectionedDoc};
use crate::lda::{derive_seed, InferConfig, LdaModel};
use crate::{Error, Result};

/// Which representation a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureVariant {
    Aggregate300,
    Wholedoc150,
    SingleN,
    Reduced2d,
}

/// Per-document feature rows with aligned ids and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub variant: FeatureVariant,
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub rows: Vec<Vec<f64>>,
    pub dim: usize,
}

impl FeatureMatrix {
    pub fn new(
        variant: FeatureVariant,
        ids: Vec<String>,
        labels: Vec<Label>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if ids.len() != labels.len() || ids.len() != rows.len() {
            return Err(Error::validation("ids, labels, and rows must align"));
        }
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("all feature rows must share one dimension"));
        }
        Ok(FeatureMatrix {
            variant,
            ids,
            labels,
            rows,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Binary sides of all labels; errors if any document is unlabeled.
    pub fn label_sides(&self) -> Result<Vec<LabelSide>> {
        self.labels
            .iter()
            .map(|l| {
                l.side()
                    .ok_or_else(|| Error::validation("matrix contains unlabeled documents"))
            })
            .collect()
    }

    /// CSV serialization: `id,label,f0..f{dim-1}` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label");
        for i in 0..self.dim {
            out.push_str(&format!(",f{i}"));
        }
        out.push('\n');
        for ((id, label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            out.push_str(id);
            out.push(',');
            out.push_str(label.as_str());
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_str(contents: &str, variant: FeatureVariant) -> Result<Self> {
        let mut lines = contents.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::validation("empty feature file"))?;
        if !header.starts_with("id,label") {
            return Err(Error::validation("feature file must start with id,label header"));
        }
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let id = fields
                .next()
                .ok_or_else(|| Error::validation(format!("line {}: missing id", idx + 1)))?;
            let label: Label = fields
                .next()
                .ok_or_else(|| Error::validation(format!("line {}: missing label", idx + 1)))?
                .parse()?;
            let row: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| {
                        Error::validation(format!("line {}: bad float `{f}`: {e}", idx + 1))
                    })
                })
                .collect::<Result<_>>()?;
            ids.push(id.to_string());
            labels.push(label);
            rows.push(row);
        }
        FeatureMatrix::new(variant, ids, labels, rows)
    }

    pub fn load_csv(path: &Path, variant: FeatureVariant) -> Result<Self> {
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&contents, variant)
    }
}

fn validate_models(models: &BTreeMap<usize, LdaModel>) -> Result<()> {
    if models.is_empty() {
        return Err(Error::validation("no models supplied"));
    }
    let first = models.values().next().expect("non-empty");
    for (&n, model) in models {
        if model.num_topics() != n {
            return Err(Error::validation(format!(
                "model keyed N={n} has K={}",
                model.num_topics()
            )));
        }
        if model.vocab() != first.vocab() {
            return Err(Error::validation("models must share one vocabulary"));
        }
    }
    Ok(())
}

/// Aggregate representation of one sectioned document:
/// `[opening theta_N1 | .. | opening theta_Nk | remainder theta_N1 | ..]`
/// over the models' N set in ascending order. Each block is a simplex.
pub fn aggregate_features(
    doc: &SectionedDoc,
    models: &BTreeMap<usize, LdaModel>,
    infer: InferConfig,
) -> Result<Vec<f64>> {
    validate_models(models)?;
    let vocab = models.values().next().expect("non-empty").vocab();
    let opening = to_bow(doc.opening_tokens.iter().map(|s| s.as_str()), vocab);
    let remainder = to_bow(doc.remainder_tokens.iter().map(|s| s.as_str()), vocab);

    let total: usize = models.keys().sum();
    let mut out = Vec::with_capacity(2 * total);
    for section_bow in [&opening, &remainder] {
        for (&n, model) in models {
            let cfg = InferConfig {
                iters: infer.iters,
                seed: section_infer_seed(infer.seed, &doc.id, n),
            };
            out.extend_from_slice(model.infer(section_bow, cfg)?.probs());
        }
    }
    Ok(out)
}

/// Whole-document representation: `[theta_N1 | theta_N2 | ..]`.
pub fn wholedoc_features(
    doc: &TokenDoc,
    models: &BTreeMap<usize, LdaModel>,
    infer: InferConfig,
) -> Result<Vec<f64>> {
    validate_models(models)?;
    let vocab = models.values().next().expect("non-empty").vocab();
    let bow = to_bow(doc.tokens(), vocab);
    let total: usize = models.keys().sum();
    let mut out = Vec::with_capacity(total);
    for (&n, model) in models {
        let cfg = InferConfig {
            iters: infer.iters,
            seed: derive_seed(infer.seed, &["wholedoc-infer", &doc.id, &n.to_string()]),
        };
        out.extend_from_slice(model.infer(&bow, cfg)?.probs());
    }
    Ok(out)
}

/// Single-N representation: `[opening theta_N | remainder theta_N]` (2N-D).
pub fn single_n_features(
    doc: &SectionedDoc,
    model: &LdaModel,
    infer: InferConfig,
) -> Result<Vec<f64>> {
    let n = model.num_topics();
    let vocab = model.vocab();
    let cfg = InferConfig {
        iters: infer.iters,
        seed: section_infer_seed(infer.seed, &doc.id, n),
    };
    let opening = to_bow(doc.opening_tokens.iter().map(|s| s.as_str()), vocab);
    let remainder = to_bow(doc.remainder_tokens.iter().map(|s| s.as_str()), vocab);
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(model.infer(&opening, cfg)?.probs());
    out.extend_from_slice(model.infer(&remainder, cfg)?.probs());
    Ok(out)
}

/// Builds the aggregate matrix over a corpus, sectioning at `l` and skipping
/// documents with fewer than `l + 1` sentences.
pub fn build_aggregate_matrix(
    docs: &[TokenDoc],
    models: &BTreeMap<usize, LdaModel>,
    l: usize,
    infer: InferConfig,
) -> Result<FeatureMatrix> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for doc in docs {
        if let Some(sectioned) = section(doc, l)? {
            rows.push(aggregate_features(&sectioned, models, infer)?);
            ids.push(doc.id.clone());
            labels.push(doc.label);
        }
    }
    FeatureMatrix::new(FeatureVariant::Aggregate300, ids, labels, rows)
}

/// Builds the whole-document (Baseline 1) matrix.
pub fn build_wholedoc_matrix(
    docs: &[TokenDoc],
    models: &BTreeMap<usize, LdaModel>,
    infer: InferConfig,
) -> Result<FeatureMatrix> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for doc in docs {
        rows.push(wholedoc_features(doc, models, infer)?);
        ids.push(doc.id.clone());
        labels.push(doc.label);
    }
    FeatureMatrix::new(FeatureVariant::Wholedoc150, ids, labels, rows)
}

/// Builds the single-N (Baseline 2) matrix, sectioning at `l`.
pub fn build_single_n_matrix(
    docs: &[TokenDoc],
    model: &LdaModel,
    l: usize,
    infer: InferConfig,
) -> Result<FeatureMatrix> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for doc in docs {
        if let Some(sectioned) = section(doc, l)? {
            rows.push(single_n_features(&sectioned, model, infer)?);
            ids.push(doc.id.clone());
            labels.push(doc.label);
        }
    }
    FeatureMatrix::new(FeatureVariant::SingleN, ids, labels, rows)
}

/// Balances the two label sides by seeded uniform subsampling of the bigger
/// side, without replacement. Row order of kept documents is preserved.
pub fn balance_classes(matrix: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let sides = matrix.label_sides()?;
    let fake_idx: Vec<usize> = (0..sides.len()).filter(|&i| sides[i] == LabelSide::Fake).collect();
    let real_idx: Vec<usize> = (0..sides.len()).filter(|&i| sides[i] == LabelSide::Real).collect();
    if fake_idx.is_empty() || real_idx.is_empty() {
        return Err(Error::validation("both classes required for balancing"));
    }
    let target = fake_idx.len().min(real_idx.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = Vec::with_capacity(2 * target);
    for idx in [fake_idx, real_idx] {
        if idx.len() == target {
            keep.extend(idx);
        } else {
            let mut sampled: Vec<usize> = idx
                .choose_multiple(&mut rng, target)
                .copied()
                .collect();
            sampled.sort_unstable();
            keep.extend(sampled);
        }
    }
    keep.sort_unstable();
    FeatureMatrix::new(
        matrix.variant,
        keep.iter().map(|&i| matrix.ids[i].clone()).collect(),
        keep.iter().map(|&i| matrix.labels[i]).collect(),
        keep.iter().map(|&i| matrix.rows[i].clone()).collect(),
    )
}
