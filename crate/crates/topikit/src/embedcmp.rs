//! Group comparisons over externally supplied embeddings and scores.
//!
//! Embedding vectors are never computed here; they arrive in a TSV file and
//! get compared: per-item mean pairwise cosine similarity, group deltas with
//! a Mann-Whitney test, post-vs-comment affinity, and generic two-group
//! score comparison.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats::{describe, mann_whitney_u, t_test_ind, Alternative, TestResult};
use crate::{Error, Result};

/// Group tag of an embedded item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedGroup {
    Rumour,
    Nonrumour,
}

impl std::str::FromStr for EmbedGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rumour" | "rumor" => Ok(EmbedGroup::Rumour),
            "nonrumour" | "nonrumor" | "non-rumour" | "non-rumor" => Ok(EmbedGroup::Nonrumour),
            other => Err(Error::validation(format!("unknown embedding group `{other}`"))),
        }
    }
}

/// A set of fixed-dimension vectors with ids and group tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub ids: Vec<String>,
    pub groups: Vec<EmbedGroup>,
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(
        dim: usize,
        ids: Vec<String>,
        groups: Vec<EmbedGroup>,
        vectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if ids.len() != groups.len() || ids.len() != vectors.len() {
            return Err(Error::validation("ids, groups, and vectors must align"));
        }
        for (id, v) in ids.iter().zip(&vectors) {
            if v.len() != dim {
                return Err(Error::validation(format!(
                    "vector `{id}` has dim {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(Error::validation(format!(
                    "vector `{id}` is all zeros; cosine similarity undefined"
                )));
            }
        }
        Ok(EmbeddingSet {
            dim,
            ids,
            groups,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vectors of one group, in file order.
    pub fn group_vectors(&self, group: EmbedGroup) -> Vec<Vec<f64>> {
        self.groups
            .iter()
            .zip(&self.vectors)
            .filter(|(g, _)| **g == group)
            .map(|(_, v)| v.clone())
            .collect()
    }
}

/// Loads an embedding TSV: header `id<TAB>group<TAB><dim>`, then one line
/// per item: `id<TAB>group<TAB>v0 v1 .. v{dim-1}`.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty embedding file".into()))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let parts: Vec<&str> = header.split('\t').collect();
    let dim = match parts.as_slice() {
        ["id", "group", dim] => dim
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(1, format!("bad dimension `{dim}` in header")))?,
        _ => {
            return Err(parse_err(
                1,
                "expected header `id<TAB>group<TAB><dim>`".into(),
            ))
        }
    };

    let mut ids = Vec::new();
    let mut groups = Vec::new();
    let mut vectors = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let id = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(idx + 1, "missing id".into()))?;
        let group: EmbedGroup = fields
            .next()
            .ok_or_else(|| parse_err(idx + 1, "missing group".into()))?
            .parse()
            .map_err(|e: Error| parse_err(idx + 1, e.to_string()))?;
        let values = fields
            .next()
            .ok_or_else(|| parse_err(idx + 1, "missing vector values".into()))?;
        let vector: Vec<f64> = values
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| parse_err(idx + 1, format!("bad value `{v}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if vector.len() != dim {
            return Err(parse_err(
                idx + 1,
                format!("expected {dim} values, got {}", vector.len()),
            ));
        }
        ids.push(id.to_string());
        groups.push(group);
        vectors.push(vector);
    }
    EmbeddingSet::new(dim, ids, groups, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

/// Per-item mean pairwise cosine similarity, self-comparisons excluded:
/// entry i is the mean over j != i of cos(v_i, v_j).
pub fn mean_pairwise_cosim(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::validation("mean_pairwise_cosim requires n >= 2"));
    }
    let dim = matrix[0].len();
    if matrix.iter().any(|r| r.len() != dim) {
        return Err(Error::validation("all vectors must share one dimension"));
    }
    let norms: Vec<f64> = matrix.iter().map(|r| norm(r)).collect();
    if norms.contains(&0.0) {
        return Err(Error::validation("zero vector: cosine similarity undefined"));
    }
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let cs = dot(&matrix[i], &matrix[j]) / (norms[i] * norms[j]);
            sums[i] += cs;
            sums[j] += cs;
        }
    }
    Ok(sums.iter().map(|s| s / (n - 1) as f64).collect())
}

/// Group-level comparison of per-item mean pairwise similarities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    /// Mean over the rumour group of per-item mean pairwise cosines.
    pub a_rumour: f64,
    /// Same for the non-rumour (factual) group.
    pub a_nonrumour: f64,
    /// `a_rumour - a_nonrumour`.
    pub delta_a: f64,
    pub med_rumour: f64,
    pub med_nonrumour: f64,
    pub delta_med: f64,
    /// Mann-Whitney test on the two per-item similarity samples.
    pub test: TestResult,
}

/// Compares the rumour and non-rumour groups: per-item mean pairwise
/// cosines, group means/medians, deltas, and a Mann-Whitney test at the
/// chosen alternative.
pub fn group_delta(
    rumour: &[Vec<f64>],
    nonrumour: &[Vec<f64>],
    alternative: Alternative,
) -> Result<GroupComparison> {
    let sims_r = mean_pairwise_cosim(rumour)?;
    let sims_f = mean_pairwise_cosim(nonrumour)?;
    let desc_r = describe(&sims_r)?;
    let desc_f = describe(&sims_f)?;
    let test = mann_whitney_u(&sims_r, &sims_f, alternative)?;
    Ok(GroupComparison {
        a_rumour: desc_r.mean,
        a_nonrumour: desc_f.mean,
        delta_a: desc_r.mean - desc_f.mean,
        med_rumour: desc_r.median,
        med_nonrumour: desc_f.median,
        delta_med: desc_r.median - desc_f.median,
        test,
    })
}

/// Affinity metric between a post and its comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityMetric {
    CosineSimilarity,
    Euclidean,
}

impl std::str::FromStr for AffinityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine_similarity" => Ok(AffinityMetric::CosineSimilarity),
            "euclidean" => Ok(AffinityMetric::Euclidean),
            other => Err(Error::validation(format!("unknown affinity metric `{other}`"))),
        }
    }
}

/// Mean affinity between one post vector and its comment vectors.
pub fn post_comment_affinity(
    post: &[f64],
    comments: &[Vec<f64>],
    metric: AffinityMetric,
) -> Result<f64> {
    if comments.is_empty() {
        return Err(Error::validation("post_comment_affinity requires >= 1 comment"));
    }
    if comments.iter().any(|c| c.len() != post.len()) {
        return Err(Error::validation("comment dimension mismatch"));
    }
    let mut total = 0.0;
    for comment in comments {
        total += match metric {
            AffinityMetric::CosineSimilarity => {
                if norm(post) == 0.0 || norm(comment) == 0.0 {
                    return Err(Error::validation("zero vector under cosine"));
                }
                cosine(post, comment)
            }
            AffinityMetric::Euclidean => post
                .iter()
                .zip(comment)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        };
    }
    Ok(total / comments.len() as f64)
}

/// Two-group comparison of externally supplied scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub delta_mean: f64,
    pub median_a: f64,
    pub median_b: f64,
    pub delta_median: f64,
    pub mann_whitney: TestResult,
    /// Absent when the t-test is undefined (degenerate variance); the
    /// reason is then in `t_test_error`.
    pub t_test: Option<TestResult>,
    pub t_test_error: Option<String>,
}

/// Descriptive deltas plus Mann-Whitney and t tests (two-sided) between two
/// score samples. A degenerate-variance t-test is surfaced as an error
/// string rather than failing the whole comparison.
pub fn score_group_compare(scores_a: &[f64], scores_b: &[f64]) -> Result<ScoreComparison> {
    if scores_a.len() < 2 || scores_b.len() < 2 {
        return Err(Error::validation("both groups need >= 2 scores"));
    }
    let desc_a = describe(scores_a)?;
    let desc_b = describe(scores_b)?;
    let mann_whitney = mann_whitney_u(scores_a, scores_b, Alternative::TwoSided)?;
    let (t_test, t_test_error) = match t_test_ind(scores_a, scores_b, true, Alternative::TwoSided)
    {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScoreComparison {
        mean_a: desc_a.mean,
        mean_b: desc_b.mean,
        delta_mean: desc_a.mean - desc_b.mean,
        median_a: desc_a.median,
        median_b: desc_b.median,
        delta_median: desc_a.median - desc_b.median,
        mann_whitney,
        t_test,
        t_test_error,
    })
}

/// Scores file: TSV `id<TAB>group<TAB>score`; an optional literal header
/// line is skipped. Returns (group A = rumour, group B = nonrumour) scores.
pub fn load_scores(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rumour = Vec::new();
    let mut nonrumour = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || (idx == 0 && line == "id\tgroup\tscore") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "expected id<TAB>group<TAB>score".into(),
            });
        }
        let group: EmbedGroup = fields[1].parse().map_err(|e: Error| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        let score: f64 = fields[2].parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("bad score: {e}"),
        })?;
        match group {
            EmbedGroup::Rumour => rumour.push(score),
            EmbedGroup::Nonrumour => nonrumour.push(score),
        }
    }
    Ok((rumour, nonrumour))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    #[test]
    fn identical_vectors_give_all_ones() {
        let m = vec![vec![0.3, 0.4], vec![0.3, 0.4], vec![0.3, 0.4]];
        let sims = mean_pairwise_cosim(&m).unwrap();
        for s in sims {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_pair_gives_zeros() {
        let sims = mean_pairwise_cosim(&[e(0, 2), e(1, 2)]).unwrap();
        assert_eq!(sims, vec![0.0, 0.0]);
    }

    #[test]
    fn mixed_triplet_hand_values() {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let m = vec![e(0, 2), e(1, 2), vec![half, half]];
        let sims = mean_pairwise_cosim(&m).unwrap();
        assert!((sims[0] - half / 2.0).abs() < 1e-12);
        assert!((sims[1] - half / 2.0).abs() < 1e-12);
        assert!((sims[2] - half).abs() < 1e-12);
    }

    #[test]
    fn cosim_invariant_to_positive_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let base = mean_pairwise_cosim(&m).unwrap();
        let scaled: Vec<Vec<f64>> = m
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|v| v * (1.0 + i as f64)).collect())
            .collect();
        let after = mean_pairwise_cosim(&scaled).unwrap();
        for (a, b) in base.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn group_delta_identical_groups_is_null() {
        let group = vec![vec![1.0, 0.2], vec![0.9, 0.3], vec![1.1, 0.25]];
        let cmp = group_delta(&group, &group, Alternative::TwoSided).unwrap();
        assert_eq!(cmp.delta_a, 0.0);
        assert_eq!(cmp.delta_med, 0.0);
        assert!((cmp.test.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn group_delta_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| rng.gen_range(0.1..1.0)).collect())
            .collect();
        let b: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..4).map(|_| rng.gen_range(0.1..1.0)).collect())
            .collect();
        let ab = group_delta(&a, &b, Alternative::TwoSided).unwrap();
        let ba = group_delta(&b, &a, Alternative::TwoSided).unwrap();
        assert_eq!(ab.delta_a, -ba.delta_a);
        assert_eq!(ab.delta_med, -ba.delta_med);
    }

    #[test]
    fn tight_cone_vs_orthogonal_separates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dim = 24;
        // Rumour group: e0 plus tiny noise -> pairwise cosine near 1.
        let cone: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                for x in v.iter_mut().skip(1) {
                    *x = rng.gen_range(-0.01..0.01);
                }
                v
            })
            .collect();
        // Non-rumour: distinct basis vectors -> pairwise cosine 0.
        let ortho: Vec<Vec<f64>> = (0..20).map(|i| e(i + 1, dim)).collect();
        let cmp = group_delta(&cone, &ortho, Alternative::Greater).unwrap();
        assert!(cmp.delta_a > 0.5, "delta_a {}", cmp.delta_a);
        assert!(cmp.test.p_value < 0.01, "p {}", cmp.test.p_value);
    }

    #[test]
    fn affinity_hand_values() {
        let post = e(0, 3);
        let same = vec![post.clone(), post.clone()];
        assert_eq!(
            post_comment_affinity(&post, &same, AffinityMetric::CosineSimilarity).unwrap(),
            1.0
        );
        assert_eq!(
            post_comment_affinity(&post, &same, AffinityMetric::Euclidean).unwrap(),
            0.0
        );
        let other = vec![e(1, 3)];
        assert_eq!(
            post_comment_affinity(&post, &other, AffinityMetric::CosineSimilarity).unwrap(),
            0.0
        );
        let euclid = post_comment_affinity(&post, &other, AffinityMetric::Euclidean).unwrap();
        assert!((euclid - std::f64::consts::SQRT_2).abs() < 1e-12);
        // Single comment: mean equals the single value.
        let single = post_comment_affinity(&post, &[e(0, 3)], AffinityMetric::Euclidean).unwrap();
        assert_eq!(single, 0.0);
    }

    #[test]
    fn score_compare_identical_groups() {
        let s = [3.0, 4.0, 5.0, 4.5];
        let cmp = score_group_compare(&s, &s).unwrap();
        assert_eq!(cmp.delta_mean, 0.0);
        assert_eq!(cmp.delta_median, 0.0);
        assert!((cmp.mann_whitney.p_value - 1.0).abs() < 1e-12);
        assert!((cmp.t_test.unwrap().p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_compare_separated_groups() {
        let a = [4.0, 4.0, 4.0, 3.0];
        let b = [0.0, 1.0, 0.0, 1.0];
        let cmp = score_group_compare(&a, &b).unwrap();
        assert!((cmp.delta_mean - 3.25).abs() < 1e-12);
        // One-sided enumeration oracle: exact p for `greater`.
        let one_sided = mann_whitney_u(&a, &b, Alternative::Greater).unwrap();
        assert!(one_sided.p_value < 0.05, "p {}", one_sided.p_value);
    }

    #[test]
    fn score_compare_constant_groups_surfaces_t_error() {
        let a = [2.0, 2.0, 2.0];
        let b = [2.0, 2.0, 2.0];
        let cmp = score_group_compare(&a, &b).unwrap();
        assert!(cmp.t_test.is_none());
        assert!(cmp.t_test_error.is_some());
    }

    #[test]
    fn permutation_invariance_of_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.gen_range(0.1..2.0)).collect())
            .collect();
        let base = mean_pairwise_cosim(&m).unwrap();
        let mut permuted = m.clone();
        permuted.rotate_left(2);
        let rotated = mean_pairwise_cosim(&permuted).unwrap();
        for i in 0..6 {
            assert!((base[(i + 2) % 6] - rotated[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embeds.tsv");
        std::fs::write(
            &path,
            "id\tgroup\t3\nr1\trumour\t1.0 0.5 0.25\nn1\tnonrumour\t0.0 1.0 0.0\n",
        )
        .unwrap();
        let set = load_embeddings(&path).unwrap();
        assert_eq!(set.dim, 3);
        assert_eq!(set.len(), 2);
        assert_eq!(set.groups, vec![EmbedGroup::Rumour, EmbedGroup::Nonrumour]);
        assert_eq!(set.vectors[0], vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn embedding_file_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "id\tgroup\t2\nr1\trumour\t1.0\n").unwrap();
        match load_embeddings(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn scores_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.tsv");
        std::fs::write(
            &path,
            "id\tgroup\tscore\na\trumour\t0.5\nb\tnonrumour\t-1.5\nc\trumour\t2.0\n",
        )
        .unwrap();
        let (r, n) = load_scores(&path).unwrap();
        assert_eq!(r, vec![0.5, 2.0]);
        assert_eq!(n, vec![-1.5]);
    }
}
