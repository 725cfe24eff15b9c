//! Exact (O(n^2)) t-SNE to two dimensions.
//!
//! Per-point Gaussian bandwidths come from a binary search matching the
//! conditional-distribution entropy to `ln(perplexity)`; the embedding is
//! PCA-initialized and descends the KL divergence with momentum, adaptive
//! gains, and early exaggeration.

use serde::{Deserialize, Serialize};

use super::pca::pca;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iters: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    /// Early exaggeration is applied for this many leading iterations.
    pub exaggeration_iters: usize,
    /// Momentum switches from 0.5 to 0.8 at this iteration.
    pub momentum_switch_iter: usize,
}

impl TsneConfig {
    pub const DEFAULT_ITERS: usize = 1000;
    pub const DEFAULT_LEARNING_RATE: f64 = 200.0;
    pub const DEFAULT_EARLY_EXAGGERATION: f64 = 12.0;

    pub fn new(perplexity: f64, seed: u64) -> Self {
        TsneConfig {
            perplexity,
            seed,
            ..TsneConfig::default()
        }
    }
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iters: Self::DEFAULT_ITERS,
            seed: 0,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            early_exaggeration: Self::DEFAULT_EARLY_EXAGGERATION,
            exaggeration_iters: 250,
            momentum_switch_iter: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    /// n x 2 embedding, rows aligned with the input.
    pub embedding: Vec<Vec<f64>>,
    /// Perplexity actually used (clamped to `(n - 1) / 3` if needed).
    pub effective_perplexity: f64,
    /// Whether the requested perplexity had to be clamped.
    pub clamped: bool,
    /// Conditional-distribution entropy (nats) achieved per point.
    pub point_entropies: Vec<f64>,
    /// KL(P||Q) right after initialization (exaggeration excluded).
    pub initial_kl: f64,
    pub final_kl: f64,
}

const P_FLOOR: f64 = 1e-12;
const ENTROPY_TOL: f64 = 1e-6;

fn squared_distances(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dist: f64 = x[i]
                .iter()
                .zip(&x[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    d
}

/// Conditional distribution row and its entropy (nats) for precision `beta`.
fn row_for_beta(dists: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for (j, &d) in dists.iter().enumerate() {
        let w = if j == i { 0.0 } else { (-beta * d).exp() };
        out[j] = w;
        sum += w;
    }
    if sum <= 0.0 {
        // All neighbors numerically unreachable at this precision.
        for w in out.iter_mut() {
            *w = 0.0;
        }
        return f64::NEG_INFINITY;
    }
    let mut entropy = 0.0;
    for (j, w) in out.iter_mut().enumerate() {
        *w /= sum;
        if *w > 0.0 {
            entropy += beta * dists[j] * *w;
        }
    }
    entropy + sum.ln()
}

/// Binary-searches the Gaussian precision so the row entropy hits
/// `ln(perplexity)`, then writes the conditional probabilities.
fn calibrate_row(dists: &[f64], i: usize, target_entropy: f64, out: &mut [f64]) -> f64 {
    let mut beta = 1.0;
    let mut beta_min = f64::NEG_INFINITY;
    let mut beta_max = f64::INFINITY;
    let mut entropy = row_for_beta(dists, i, beta, out);
    for _ in 0..200 {
        if (entropy - target_entropy).abs() < ENTROPY_TOL || !entropy.is_finite() {
            break;
        }
        if entropy > target_entropy {
            beta_min = beta;
            beta = if beta_max.is_infinite() {
                beta * 2.0
            } else {
                (beta + beta_max) / 2.0
            };
        } else {
            beta_max = beta;
            beta = if beta_min.is_infinite() {
                beta / 2.0
            } else {
                (beta + beta_min) / 2.0
            };
        }
        entropy = row_for_beta(dists, i, beta, out);
    }
    entropy
}

fn kl_divergence(p: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let n = y.len();
    let mut q_z = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = y[i].iter().zip(&y[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            q_z += 2.0 / (1.0 + d);
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d: f64 = y[i].iter().zip(&y[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let q = ((1.0 / (1.0 + d)) / q_z).max(P_FLOOR);
            let pij = p[i][j].max(P_FLOOR);
            kl += pij * (pij / q).ln();
        }
    }
    kl
}

/// Embeds `x` into 2-D. Requires n >= 4; a perplexity above `(n - 1) / 3`
/// is clamped (reported via [`TsneResult::clamped`]). Deterministic for a
/// fixed seed.
pub fn tsne(x: &[Vec<f64>], config: &TsneConfig) -> Result<TsneResult> {
    let n = x.len();
    if n < 4 {
        return Err(Error::validation("tsne requires at least 4 points"));
    }
    if config.perplexity <= 1.0 {
        return Err(Error::validation("tsne perplexity must be > 1"));
    }
    if config.iters < 1 {
        return Err(Error::validation("tsne iters must be >= 1"));
    }
    let max_perplexity = (n as f64 - 1.0) / 3.0;
    let (perplexity, clamped) = if config.perplexity > max_perplexity {
        (max_perplexity, true)
    } else {
        (config.perplexity, false)
    };
    let target_entropy = perplexity.ln();

    // Exact-duplicate rows share affinity rows and initialization below, so
    // identical inputs follow bitwise-identical trajectories and embed at
    // the same point.
    let mut representative: Vec<usize> = (0..n).collect();
    {
        let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        for (i, row) in x.iter().enumerate() {
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            representative[i] = *seen.entry(key).or_insert(i);
        }
    }

    // Pairwise affinities in the input space.
    let dists = squared_distances(x);
    let mut cond = vec![vec![0.0; n]; n];
    let mut point_entropies = vec![0.0; n];
    for i in 0..n {
        let rep = representative[i];
        if rep == i {
            point_entropies[i] = calibrate_row(&dists[i], i, target_entropy, &mut cond[i]);
        } else {
            let row = cond[rep].clone();
            cond[i] = row;
            cond[i].swap(rep, i);
            point_entropies[i] = point_entropies[rep];
        }
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i][j] = ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(P_FLOOR);
            }
        }
    }

    // PCA initialization scaled to std 1e-4 per column.
    let init = pca(x, 2.min(x[0].len()))?;
    let mut y: Vec<Vec<f64>> = init
        .scores
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.resize(2, 0.0);
            r
        })
        .collect();
    for j in 0..2 {
        let mean: f64 = y.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var: f64 = y.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n as f64;
        let scale = if var > 0.0 { 1e-4 / var.sqrt() } else { 0.0 };
        for r in y.iter_mut() {
            r[j] = (r[j] - mean) * scale;
        }
    }
    for i in 0..n {
        if representative[i] != i {
            y[i] = y[representative[i]].clone();
        }
    }

    let initial_kl = kl_divergence(&p, &y);

    let mut velocity = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut grad = vec![[0.0f64; 2]; n];

    for iter in 0..config.iters {
        let exaggeration = if iter < config.exaggeration_iters {
            config.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < config.momentum_switch_iter {
            0.5
        } else {
            0.8
        };

        // Student-t numerators and their total.
        let mut q_z = 0.0;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d: f64 = y[i].iter().zip(&y[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                let wij = 1.0 / (1.0 + d);
                w[i][j] = wij;
                w[j][i] = wij;
                q_z += 2.0 * wij;
            }
        }

        for g in grad.iter_mut() {
            *g = [0.0, 0.0];
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = (w[i][j] / q_z).max(P_FLOOR);
                let coeff = 4.0 * (exaggeration * p[i][j] - q) * w[i][j];
                for c in 0..2 {
                    grad[i][c] += coeff * (y[i][c] - y[j][c]);
                }
            }
        }

        for i in 0..n {
            for c in 0..2 {
                let same_direction = grad[i][c].signum() == velocity[i][c].signum();
                gains[i][c] = if same_direction {
                    (gains[i][c] * 0.8).max(0.01)
                } else {
                    gains[i][c] + 0.2
                };
                velocity[i][c] =
                    momentum * velocity[i][c] - config.learning_rate * gains[i][c] * grad[i][c];
                y[i][c] += velocity[i][c];
            }
        }
        // Re-center.
        for c in 0..2 {
            let mean: f64 = y.iter().map(|r| r[c]).sum::<f64>() / n as f64;
            for r in y.iter_mut() {
                r[c] -= mean;
            }
        }
    }

    let final_kl = kl_divergence(&p, &y);
    Ok(TsneResult {
        embedding: y,
        effective_perplexity: perplexity,
        clamped,
        point_entropies,
        initial_kl,
        final_kl,
    })
}
