//! Thematic deviation between article openings and remainders.
//!
//! Each article is split into its first `l` sentences and the rest; topic
//! distributions for both parts are inferred against one background model
//! per topic count N, and their divergence is aggregated per class. Articles
//! with fewer than `l + 1` sentences are excluded and tallied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{to_bow, LabelSide, TokenDoc};
use crate::divergence::{divergence, DivergenceMeasure, MeasureKind};
use crate::lda::{derive_seed, InferConfig, LdaModel};
use crate::stats::{describe, t_test_ind, Alternative, TestResult};
use crate::{Error, Result};

/// An article split into opening and remainder token sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionedDoc {
    pub id: String,
    pub label: crate::corpus::Label,
    /// Opening length in sentences.
    pub l: usize,
    pub opening_tokens: Vec<String>,
    pub remainder_tokens: Vec<String>,
}

/// Splits a document at sentence `l`. Returns `None` (the skip signal) when
/// the document has fewer than `l + 1` sentences; callers tally exclusions.
pub fn section(doc: &TokenDoc, l: usize) -> Result<Option<SectionedDoc>> {
    if l < 1 {
        return Err(Error::validation("opening length l must be >= 1"));
    }
    if doc.sentences.len() < l + 1 {
        return Ok(None);
    }
    let opening_tokens = doc.sentences[..l].iter().flatten().cloned().collect();
    let remainder_tokens = doc.sentences[l..].iter().flatten().cloned().collect();
    Ok(Some(SectionedDoc {
        id: doc.id.clone(),
        label: doc.label,
        l,
        opening_tokens,
        remainder_tokens,
    }))
}

/// Seed for inferring one document's sections against the N-topic model.
/// Derived from the document id (not its position) so deviation values are
/// invariant under corpus reordering; shared by both sections so identical
/// section texts infer identical distributions.
pub fn section_infer_seed(base: u64, doc_id: &str, n: usize) -> u64 {
    derive_seed(base, &["section-infer", doc_id, &n.to_string()])
}

/// Per-article deviation values across the configured N set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRecord {
    pub id: String,
    pub label: LabelSide,
    pub per_n: BTreeMap<usize, f64>,
    pub mean_over_n: f64,
}

/// Pair of per-class values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerClass<T> {
    pub fake: T,
    pub real: T,
}

impl<T> PerClass<T> {
    pub fn get(&self, side: LabelSide) -> &T {
        match side {
            LabelSide::Fake => &self.fake,
            LabelSide::Real => &self.real,
        }
    }

    fn get_mut(&mut self, side: LabelSide) -> &mut T {
        match side {
            LabelSide::Fake => &mut self.fake,
            LabelSide::Real => &mut self.real,
        }
    }
}

/// Location and spread of one class's deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub ci95_half_width: Option<f64>,
}

fn class_stats(values: &[f64]) -> Result<ClassStats> {
    let s = describe(values)?;
    Ok(ClassStats {
        n: s.n,
        mean: s.mean,
        median: s.median,
        std: s.std,
        ci95_half_width: s.ci95_half_width,
    })
}

/// Aggregated thematic-deviation report for one opening length `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub measure: MeasureKind,
    pub epsilon: f64,
    pub l: usize,
    pub n_set: Vec<usize>,
    /// Per class, per N: stats of per-article deviations at that N.
    pub per_n_stats: BTreeMap<usize, PerClass<ClassStats>>,
    /// Per class stats of per-article means over the N set.
    pub combined: PerClass<ClassStats>,
    /// Independent-samples t-test on per-article means over N, fake vs real.
    pub t_test: TestResult,
    pub surviving: PerClass<usize>,
    pub skipped: PerClass<usize>,
    /// Documents excluded because they carry no fake/real-side label.
    pub skipped_unlabeled: usize,
    pub records: Vec<DeviationRecord>,
}

impl DeviationReport {
    /// Companion CSV of per-article records: `id,label,d_n<N>...,mean_over_n`.
    pub fn records_csv(&self) -> String {
        let mut out = String::from("id,label");
        for n in &self.n_set {
            out.push_str(&format!(",d_n{n}"));
        }
        out.push_str(",mean_over_n\n");
        for rec in &self.records {
            out.push_str(&format!("{},{}", rec.id, rec.label));
            for n in &self.n_set {
                out.push_str(&format!(",{:.17e}", rec.per_n[n]));
            }
            out.push_str(&format!(",{:.17e}\n", rec.mean_over_n));
        }
        out
    }
}

fn validate_models(models: &BTreeMap<usize, LdaModel>) -> Result<()> {
    if models.is_empty() {
        return Err(Error::validation("no background models supplied"));
    }
    let mut iter = models.iter();
    let (_, first) = iter.next().expect("non-empty");
    for (&n, model) in models.iter() {
        if model.num_topics() != n {
            return Err(Error::validation(format!(
                "model keyed N={n} has K={}",
                model.num_topics()
            )));
        }
        if model.vocab() != first.vocab() {
            return Err(Error::validation(
                "all background models must share one vocabulary",
            ));
        }
    }
    Ok(())
}

/// Runs the deviation evaluation for one opening length.
///
/// For every surviving article and every N, the divergence between the
/// opening and remainder topic distributions is computed; per-class means
/// and medians are reported per N and combined (per-article mean over the N
/// set), with the t-test run on the combined values.
pub fn evaluate(
    docs: &[TokenDoc],
    models: &BTreeMap<usize, LdaModel>,
    measure: DivergenceMeasure,
    l: usize,
    infer: InferConfig,
) -> Result<DeviationReport> {
    validate_models(models)?;
    let vocab = models.values().next().expect("non-empty").vocab();
    let n_set: Vec<usize> = models.keys().copied().collect();

    let mut records = Vec::new();
    let mut surviving = PerClass { fake: 0usize, real: 0usize };
    let mut skipped = PerClass { fake: 0usize, real: 0usize };
    let mut skipped_unlabeled = 0usize;

    for doc in docs {
        let side = match doc.label.side() {
            Some(side) => side,
            None => {
                skipped_unlabeled += 1;
                continue;
            }
        };
        let sectioned = match section(doc, l)? {
            Some(s) => s,
            None => {
                *skipped.get_mut(side) += 1;
                continue;
            }
        };
        let opening_bow = to_bow(sectioned.opening_tokens.iter().map(|s| s.as_str()), vocab);
        let remainder_bow = to_bow(sectioned.remainder_tokens.iter().map(|s| s.as_str()), vocab);

        let mut per_n = BTreeMap::new();
        for (&n, model) in models {
            let cfg = InferConfig {
                iters: infer.iters,
                seed: section_infer_seed(infer.seed, &doc.id, n),
            };
            let theta_opening = model.infer(&opening_bow, cfg)?;
            let theta_remainder = model.infer(&remainder_bow, cfg)?;
            let d = divergence(measure, theta_opening.probs(), theta_remainder.probs())?;
            per_n.insert(n, d);
        }
        let mean_over_n = per_n.values().sum::<f64>() / per_n.len() as f64;
        records.push(DeviationRecord {
            id: doc.id.clone(),
            label: side,
            per_n,
            mean_over_n,
        });
        *surviving.get_mut(side) += 1;
    }

    if surviving.fake == 0 || surviving.real == 0 {
        return Err(Error::validation(format!(
            "a class has zero surviving articles at l={l} (fake: {}, real: {})",
            surviving.fake, surviving.real
        )));
    }

    let values_of = |side: LabelSide, n: usize| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.label == side)
            .map(|r| r.per_n[&n])
            .collect()
    };
    let mut per_n_stats = BTreeMap::new();
    for &n in &n_set {
        per_n_stats.insert(
            n,
            PerClass {
                fake: class_stats(&values_of(LabelSide::Fake, n))?,
                real: class_stats(&values_of(LabelSide::Real, n))?,
            },
        );
    }

    let fake_means: Vec<f64> = records
        .iter()
        .filter(|r| r.label == LabelSide::Fake)
        .map(|r| r.mean_over_n)
        .collect();
    let real_means: Vec<f64> = records
        .iter()
        .filter(|r| r.label == LabelSide::Real)
        .map(|r| r.mean_over_n)
        .collect();
    let combined = PerClass {
        fake: class_stats(&fake_means)?,
        real: class_stats(&real_means)?,
    };
    let t_test = t_test_ind(&fake_means, &real_means, true, Alternative::TwoSided)?;

    Ok(DeviationReport {
        measure: measure.kind,
        epsilon: measure.epsilon,
        l,
        n_set,
        per_n_stats,
        combined,
        t_test,
        surviving,
        skipped,
        skipped_unlabeled,
        records,
    })
}

/// Runs [`evaluate`] for every `l` in the range.
pub fn l_sweep(
    docs: &[TokenDoc],
    models: &BTreeMap<usize, LdaModel>,
    measure: DivergenceMeasure,
    l_range: std::ops::RangeInclusive<usize>,
    infer: InferConfig,
) -> Result<BTreeMap<usize, DeviationReport>> {
    let mut out = BTreeMap::new();
    for l in l_range {
        out.insert(l, evaluate(docs, models, measure, l, infer)?);
    }
    Ok(out)
}
