//! K-means clustering and purity evaluation.

use std::collections::HashMap;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lda::derive_seed;
use crate::{Error, Result};

/// Outcome of one k-means run (the best over all restarts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
    pub iterations_used: usize,
    pub seed: u64,
    pub restarts: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: first centroid uniform, the rest proportional to the
/// squared distance to the nearest chosen centroid.
fn seed_centroids(x: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(x[rng.gen_range(0..x.len())].clone());
    let mut best_dist: Vec<f64> = x.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = best_dist.iter().sum();
        let next = if total > 0.0 {
            let draw = rng.gen_range(0.0..total);
            let mut cum = 0.0;
            let mut chosen = x.len() - 1;
            for (i, &d) in best_dist.iter().enumerate() {
                cum += d;
                if draw < cum {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All points coincide with some centroid; any choice works.
            rng.gen_range(0..x.len())
        };
        centroids.push(x[next].clone());
        for (i, p) in x.iter().enumerate() {
            best_dist[i] = best_dist[i].min(sq_dist(p, centroids.last().expect("just pushed")));
        }
    }
    centroids
}

fn lloyd_run(x: &[Vec<f64>], k: usize, max_iter: usize, seed: u64) -> ClusterResult {
    let n = x.len();
    let dim = x[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(x, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut iterations_used = 0;

    for iter in 0..max_iter.max(1) {
        iterations_used = iter + 1;
        // Assign.
        let mut changed = false;
        for (i, p) in x.iter().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        if !changed && iter > 0 {
            break;
        }
        // Update.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in x.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (s, v) in sums[assignments[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // Empty cluster: reseed to the point farthest from its
                // assigned centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&x[a], &centroids[assignments[a]]);
                        let db = sq_dist(&x[b], &centroids[assignments[b]]);
                        da.partial_cmp(&db).expect("finite")
                    })
                    .expect("non-empty input");
                centroids[c] = x[far].clone();
            }
        }
    }

    let inertia = x
        .iter()
        .enumerate()
        .map(|(i, p)| sq_dist(p, &centroids[assignments[i]]))
        .sum();
    ClusterResult {
        assignments,
        centroids,
        inertia,
        iterations_used,
        seed,
        restarts: 1,
    }
}

/// Lloyd's k-means with k-means++ seeding; returns the lowest-inertia result
/// over `restarts` independently seeded runs.
pub fn kmeans(
    x: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterResult> {
    if x.is_empty() || x.len() < k {
        return Err(Error::validation(format!(
            "kmeans requires n >= K (n={}, K={k})",
            x.len()
        )));
    }
    if k < 1 {
        return Err(Error::validation("K must be >= 1"));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(Error::validation("rows must be non-empty and uniform"));
    }
    let restarts = restarts.max(1);
    let mut best: Option<ClusterResult> = None;
    for r in 0..restarts {
        let run_seed = derive_seed(seed, &["kmeans-restart", &r.to_string()]);
        let run = lloyd_run(x, k, max_iter, run_seed);
        let better = match &best {
            Some(b) => run.inertia < b.inertia,
            None => true,
        };
        if better {
            best = Some(run);
        }
    }
    let mut result = best.expect("at least one restart");
    result.seed = seed;
    result.restarts = restarts;
    Ok(result)
}

/// Purity (external clustering criterion): each cluster votes its majority
/// label; purity is the fraction of items covered by those majorities.
pub fn purity<L: Eq + Hash>(assignments: &[usize], labels: &[L]) -> Result<f64> {
    if assignments.is_empty() || assignments.len() != labels.len() {
        return Err(Error::validation(
            "purity requires equal-length non-empty assignments and labels",
        ));
    }
    let mut per_cluster: HashMap<usize, HashMap<&L, u64>> = HashMap::new();
    for (cluster, label) in assignments.iter().zip(labels) {
        *per_cluster
            .entry(*cluster)
            .or_default()
            .entry(label)
            .or_insert(0) += 1;
    }
    let majority_total: u64 = per_cluster
        .values()
        .map(|counts| counts.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority_total as f64 / assignments.len() as f64)
}

/// Baseline 3: the expected purity of random balanced 2-way assignment,
/// estimated over `trials` seeded partitions.
pub fn random_baseline_purity<L: Eq + Hash>(labels: &[L], trials: usize, seed: u64) -> Result<f64> {
    if labels.len() < 2 {
        return Err(Error::validation("random baseline requires >= 2 items"));
    }
    if trials < 1 {
        return Err(Error::validation("trials must be >= 1"));
    }
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    for _ in 0..trials {
        // Fisher-Yates; first half forms cluster 0.
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        let half = n / 2;
        let mut assignments = vec![0usize; n];
        for &idx in &indices[half..] {
            assignments[idx] = 1;
        }
        total += purity(&assignments, labels)?;
    }
    Ok(total / trials as f64)
}
