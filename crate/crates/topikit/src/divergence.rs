//! Distance and divergence measures between topic distributions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The supported measures. KL is the only asymmetric one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Cosine,
    Chebyshev,
    Euclidean,
    Hellinger,
    JensenShannon,
    KullbackLeibler,
    SquaredEuclidean,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 7] = [
        MeasureKind::Cosine,
        MeasureKind::Chebyshev,
        MeasureKind::Euclidean,
        MeasureKind::Hellinger,
        MeasureKind::JensenShannon,
        MeasureKind::KullbackLeibler,
        MeasureKind::SquaredEuclidean,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::Cosine => "cosine",
            MeasureKind::Chebyshev => "chebyshev",
            MeasureKind::Euclidean => "euclidean",
            MeasureKind::Hellinger => "hellinger",
            MeasureKind::JensenShannon => "jensen_shannon",
            MeasureKind::KullbackLeibler => "kullback_leibler",
            MeasureKind::SquaredEuclidean => "squared_euclidean",
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, MeasureKind::KullbackLeibler)
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(MeasureKind::Cosine),
            "chebyshev" => Ok(MeasureKind::Chebyshev),
            "euclidean" => Ok(MeasureKind::Euclidean),
            "hellinger" => Ok(MeasureKind::Hellinger),
            "jensen_shannon" => Ok(MeasureKind::JensenShannon),
            "kullback_leibler" => Ok(MeasureKind::KullbackLeibler),
            "squared_euclidean" => Ok(MeasureKind::SquaredEuclidean),
            other => Err(Error::validation(format!("unknown measure `{other}`"))),
        }
    }
}

/// A measure plus its smoothing floor (used by KL and JS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMeasure {
    pub kind: MeasureKind,
    pub epsilon: f64,
}

impl DivergenceMeasure {
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    pub fn new(kind: MeasureKind) -> Self {
        DivergenceMeasure {
            kind,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(kind: MeasureKind, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(Error::validation("epsilon must be > 0"));
        }
        Ok(DivergenceMeasure { kind, epsilon })
    }
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::validation("distributions must have length >= 1"));
    }
    if p.len() != q.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Floor every entry at `epsilon`, then renormalize to sum 1.
fn floored(p: &[f64], epsilon: f64) -> Vec<f64> {
    let mut out: Vec<f64> = p.iter().map(|&x| x.max(epsilon)).collect();
    let sum: f64 = out.iter().sum();
    for x in &mut out {
        *x /= sum;
    }
    out
}

fn kl_floored(p: &[f64], q: &[f64], epsilon: f64) -> f64 {
    let p = floored(p, epsilon);
    let q = floored(q, epsilon);
    p.iter().zip(&q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum()
}

/// Computes the chosen divergence between two same-length distributions.
///
/// All measures are non-negative; KL and JS use natural log with both
/// arguments floored at `epsilon` and renormalized.
pub fn divergence(measure: DivergenceMeasure, p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    let value = match measure.kind {
        MeasureKind::Cosine => {
            let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
            let np: f64 = p.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nq: f64 = q.iter().map(|a| a * a).sum::<f64>().sqrt();
            if np == 0.0 || nq == 0.0 {
                return Err(Error::validation("cosine distance undefined for zero vector"));
            }
            1.0 - dot / (np * nq)
        }
        MeasureKind::Chebyshev => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        MeasureKind::Euclidean => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        MeasureKind::SquaredEuclidean => {
            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
        MeasureKind::Hellinger => {
            let sum: f64 = p
                .iter()
                .zip(q)
                .map(|(a, b)| {
                    let d = a.sqrt() - b.sqrt();
                    d * d
                })
                .sum();
            (sum / 2.0).sqrt()
        }
        MeasureKind::KullbackLeibler => kl_floored(p, q, measure.epsilon),
        MeasureKind::JensenShannon => {
            let z: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
            0.5 * (kl_floored(p, &z, measure.epsilon) + kl_floored(q, &z, measure.epsilon))
        }
    };
    // Clamp tiny negative rounding residue (cosine of near-parallel vectors).
    Ok(if value < 0.0 && value > -1e-12 { 0.0 } else { value })
}

/// All-pairs divergence matrix over `rows`. Symmetric measures produce a
/// symmetric matrix with zero diagonal; KL is asymmetric in general.
pub fn pairwise_matrix(measure: DivergenceMeasure, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = rows.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j && measure.kind.is_symmetric() {
                continue;
            }
            matrix[i][j] = divergence(measure, &rows[i], &rows[j])?;
        }
    }
    Ok(matrix)
}
