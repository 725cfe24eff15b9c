//! PCA and truncated SVD on top of a dense SVD.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// PCA scores and per-component explained-variance ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// n x d projection of the centered data.
    pub scores: Vec<Vec<f64>>,
    /// Fraction of total variance captured by each kept component.
    pub explained_variance_ratio: Vec<f64>,
    /// d x m orthonormal principal axes.
    pub components: Vec<Vec<f64>>,
}

/// Truncated SVD scores (`U_d Sigma_d`, no centering).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub scores: Vec<Vec<f64>>,
    /// Kept singular values, non-increasing.
    pub singular_values: Vec<f64>,
    /// d x m right singular vectors.
    pub components: Vec<Vec<f64>>,
}

fn to_matrix(x: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::validation("input matrix is empty"));
    }
    let m = x[0].len();
    if m == 0 || x.iter().any(|row| row.len() != m) {
        return Err(Error::validation("input rows must be non-empty and uniform"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("input contains non-finite values"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| x[i][j]))
}

/// Flips singular-vector signs so each component's largest-magnitude
/// loading is positive; U columns flip in tandem to keep U * S * V^T fixed.
fn canonicalize_signs(u: &mut DMatrix<f64>, v_t: &mut DMatrix<f64>) {
    for comp in 0..v_t.nrows() {
        let row = v_t.row(comp);
        let mut best = 0.0f64;
        for &val in row.iter() {
            if val.abs() > best.abs() {
                best = val;
            }
        }
        if best < 0.0 {
            for val in v_t.row_mut(comp).iter_mut() {
                *val = -*val;
            }
            if comp < u.ncols() {
                for val in u.column_mut(comp).iter_mut() {
                    *val = -*val;
                }
            }
        }
    }
}

/// Principal component analysis to `d` dimensions.
///
/// The data is mean-centered; scores are the projections onto the top-d
/// eigenvectors of the covariance. Requires `n >= 2` and
/// `d <= min(n, m)`.
pub fn pca(x: &[Vec<f64>], d: usize) -> Result<PcaResult> {
    let matrix = to_matrix(x)?;
    let (n, m) = (matrix.nrows(), matrix.ncols());
    if n < 2 {
        return Err(Error::validation("pca requires n >= 2"));
    }
    if d < 1 || d > n.min(m) {
        return Err(Error::validation(format!(
            "pca target dim {d} out of range for {n}x{m} input"
        )));
    }
    let mut centered = matrix;
    for j in 0..m {
        let mean = centered.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    let svd = centered.svd(true, true);
    let mut u = svd.u.expect("u requested");
    let mut v_t = svd.v_t.expect("v_t requested");
    canonicalize_signs(&mut u, &mut v_t);
    let sigma = svd.singular_values;

    let total_var: f64 = sigma.iter().map(|s| s * s).sum();
    let explained_variance_ratio: Vec<f64> = (0..d)
        .map(|j| {
            if total_var > 0.0 {
                sigma[j] * sigma[j] / total_var
            } else {
                0.0
            }
        })
        .collect();

    let scores = (0..n)
        .map(|i| (0..d).map(|j| u[(i, j)] * sigma[j]).collect())
        .collect();
    let components = (0..d)
        .map(|j| (0..m).map(|c| v_t[(j, c)]).collect())
        .collect();
    Ok(PcaResult {
        scores,
        explained_variance_ratio,
        components,
    })
}

/// Rank-d truncated SVD (no centering): scores are `U_d Sigma_d`, the
/// best Frobenius rank-d approximation's left factor.
pub fn truncated_svd(x: &[Vec<f64>], d: usize) -> Result<SvdResult> {
    let matrix = to_matrix(x)?;
    let (n, m) = (matrix.nrows(), matrix.ncols());
    if d < 1 || d > n.min(m) {
        return Err(Error::validation(format!(
            "svd target dim {d} out of range for {n}x{m} input"
        )));
    }
    let svd = matrix.svd(true, true);
    let mut u = svd.u.expect("u requested");
    let mut v_t = svd.v_t.expect("v_t requested");
    canonicalize_signs(&mut u, &mut v_t);
    let sigma = svd.singular_values;

    let scores = (0..n)
        .map(|i| (0..d).map(|j| u[(i, j)] * sigma[j]).collect())
        .collect();
    let components = (0..d)
        .map(|j| (0..m).map(|c| v_t[(j, c)]).collect())
        .collect();
    Ok(SvdResult {
        scores,
        singular_values: sigma.iter().take(d).copied().collect(),
        components,
    })
}
