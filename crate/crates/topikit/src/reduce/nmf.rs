//! Non-negative matrix factorization by multiplicative updates.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Factors `W` (n x d) and `H` (d x m) plus the Frobenius objective trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfResult {
    pub w: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    /// `||X - WH||_F^2` after initialization and after every update pair.
    pub objective_trace: Vec<f64>,
}

const DIV_GUARD: f64 = 1e-12;

fn frobenius_sq(x: &DMatrix<f64>, w: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
    let diff = x - w * h;
    diff.iter().map(|v| v * v).sum()
}

/// Factorizes a non-negative matrix as `X ~ W H` minimizing the Frobenius
/// norm with the classical multiplicative update rules. The objective is
/// non-increasing per update (up to the tiny division guard). Seeded
/// uniform initialization is scaled by `sqrt(mean(X) / d)`, so an all-zero
/// input yields zero factors and a zero objective immediately.
pub fn nmf(x: &[Vec<f64>], d: usize, iters: usize, seed: u64) -> Result<NmfResult> {
    let n = x.len();
    if n == 0 {
        return Err(Error::validation("nmf input is empty"));
    }
    let m = x[0].len();
    if m == 0 || x.iter().any(|row| row.len() != m) {
        return Err(Error::validation("nmf rows must be non-empty and uniform"));
    }
    if d < 1 {
        return Err(Error::validation("nmf rank must be >= 1"));
    }
    for row in x {
        for &v in row {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation("nmf requires entrywise non-negative input"));
            }
        }
    }

    let xm = DMatrix::from_fn(n, m, |i, j| x[i][j]);
    let mean = xm.sum() / (n * m) as f64;
    let scale = (mean / d as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::from_fn(n, d, |_, _| scale * rng.gen::<f64>());
    let mut h = DMatrix::from_fn(d, m, |_, _| scale * rng.gen::<f64>());

    let mut objective_trace = Vec::with_capacity(iters + 1);
    objective_trace.push(frobenius_sq(&xm, &w, &h));

    for _ in 0..iters {
        // H <- H .* (W^T X) ./ (W^T W H)
        let wt = w.transpose();
        let numer = &wt * &xm;
        let denom = &wt * &w * &h;
        for i in 0..d {
            for j in 0..m {
                h[(i, j)] *= numer[(i, j)] / (denom[(i, j)] + DIV_GUARD);
            }
        }
        // W <- W .* (X H^T) ./ (W H H^T)
        let ht = h.transpose();
        let numer = &xm * &ht;
        let denom = &w * &h * &ht;
        for i in 0..n {
            for j in 0..d {
                w[(i, j)] *= numer[(i, j)] / (denom[(i, j)] + DIV_GUARD);
            }
        }
        objective_trace.push(frobenius_sq(&xm, &w, &h));
    }

    let w_rows = (0..n).map(|i| (0..d).map(|j| w[(i, j)]).collect()).collect();
    let h_rows = (0..d).map(|i| (0..m).map(|j| h[(i, j)]).collect()).collect();
    Ok(NmfResult {
        w: w_rows,
        h: h_rows,
        objective_trace,
    })
}
