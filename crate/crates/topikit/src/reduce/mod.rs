//! Dimensionality reduction: PCA, truncated SVD, NMF, and exact t-SNE.

mod nmf;
mod pca;
mod tsne;

pub use nmf::{nmf, NmfResult};
pub use pca::{pca, truncated_svd, PcaResult, SvdResult};
pub use tsne::{tsne, TsneConfig, TsneResult};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduction method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    Pca,
    Svd,
    Nmf,
    Tsne,
}

impl std::str::FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(ReductionMethod::Pca),
            "svd" => Ok(ReductionMethod::Svd),
            "nmf" => Ok(ReductionMethod::Nmf),
            "tsne" => Ok(ReductionMethod::Tsne),
            other => Err(Error::validation(format!("unknown reduction method `{other}`"))),
        }
    }
}

impl std::fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ReductionMethod::Pca => "pca",
            ReductionMethod::Svd => "svd",
            ReductionMethod::Nmf => "nmf",
            ReductionMethod::Tsne => "tsne",
        };
        f.write_str(s)
    }
}

/// One-stop configuration for the `reduce` pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub method: ReductionMethod,
    pub target_dim: usize,
    pub tsne_perplexity: f64,
    pub tsne_iters: usize,
    pub nmf_iters: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
}

impl ReductionConfig {
    pub fn new(method: ReductionMethod, seed: u64) -> Self {
        ReductionConfig {
            method,
            target_dim: 2,
            tsne_perplexity: 30.0,
            tsne_iters: TsneConfig::DEFAULT_ITERS,
            nmf_iters: 200,
            seed,
            learning_rate: TsneConfig::DEFAULT_LEARNING_RATE,
            early_exaggeration: TsneConfig::DEFAULT_EARLY_EXAGGERATION,
        }
    }
}

/// Reduces `x` (row-per-item) to `cfg.target_dim` columns with the chosen
/// method. Output row order always matches input row order.
pub fn reduce(x: &[Vec<f64>], cfg: &ReductionConfig) -> Result<Vec<Vec<f64>>> {
    let input_dim = x.first().map(|r| r.len()).unwrap_or(0);
    if cfg.target_dim < 1 || cfg.target_dim >= input_dim.max(1) {
        return Err(Error::validation(format!(
            "target_dim {} must satisfy 1 <= d < input dim {input_dim}",
            cfg.target_dim
        )));
    }
    match cfg.method {
        ReductionMethod::Pca => Ok(pca(x, cfg.target_dim)?.scores),
        ReductionMethod::Svd => Ok(truncated_svd(x, cfg.target_dim)?.scores),
        ReductionMethod::Nmf => {
            Ok(nmf(x, cfg.target_dim, cfg.nmf_iters, cfg.seed)?.w)
        }
        ReductionMethod::Tsne => {
            if cfg.target_dim != 2 {
                return Err(Error::validation("tsne reduction targets exactly 2 dimensions"));
            }
            let tsne_cfg = TsneConfig {
                perplexity: cfg.tsne_perplexity,
                iters: cfg.tsne_iters,
                seed: cfg.seed,
                learning_rate: cfg.learning_rate,
                early_exaggeration: cfg.early_exaggeration,
                ..TsneConfig::default()
            };
            Ok(tsne(x, &tsne_cfg)?.embedding)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_respects_row_order() {
        // Two separated groups; permuting rows must permute outputs.
        let x: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let base = if i < 6 { 0.0 } else { 100.0 };
                vec![base + i as f64, base - i as f64, base + 0.5 * i as f64]
            })
            .collect();
        let cfg = ReductionConfig::new(ReductionMethod::Pca, 0);
        let direct = reduce(&x, &cfg).unwrap();
        let mut permuted = x.clone();
        permuted.swap(0, 11);
        let swapped = reduce(&permuted, &cfg).unwrap();
        for (a, b) in direct[0].iter().zip(&swapped[11]) {
            assert!((a.abs() - b.abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn target_dim_validation() {
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let mut cfg = ReductionConfig::new(ReductionMethod::Pca, 0);
        cfg.target_dim = 2;
        assert!(reduce(&x, &cfg).is_err());
        cfg.target_dim = 0;
        assert!(reduce(&x, &cfg).is_err());
    }
}
