//! Supervised detection: L2-regularized logistic regression and kNN, with
//! the stratified 80/20 + five-fold cross-validation protocol.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lda::derive_seed;
use crate::{Error, Result};

/// Logistic-regression model with frozen feature standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_reg: f64,
    /// Per-feature training means.
    pub feature_means: Vec<f64>,
    /// Per-feature training standard deviations (1.0 for constant features).
    pub feature_stds: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn standardization(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let dim = x[0].len();
    let mut means = vec![0.0; dim];
    for row in x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for row in x {
        for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    (means, stds)
}

fn validate_xy(x: &[Vec<f64>], y: &[bool]) -> Result<usize> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::validation("x and y must be non-empty and aligned"));
    }
    let dim = x[0].len();
    if dim == 0 || x.iter().any(|r| r.len() != dim) {
        return Err(Error::validation("feature rows must be non-empty and uniform"));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation("features must be finite"));
    }
    Ok(dim)
}

/// Fits L2-regularized logistic regression by Newton iterations on
/// standardized features. The objective is the mean negative log-likelihood
/// plus `l2_reg / (2n) * ||w||^2` (bias unpenalized); training stops when
/// the gradient infinity-norm drops to `tol` or after `max_iter` steps.
pub fn logistic_train(
    x: &[Vec<f64>],
    y: &[bool],
    l2_reg: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LogisticModel> {
    let dim = validate_xy(x, y)?;
    if l2_reg < 0.0 {
        return Err(Error::validation("l2_reg must be >= 0"));
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::validation("training labels must contain both classes"));
    }

    let n = x.len();
    let (means, stds) = standardization(x);
    // Standardized design matrix with a trailing bias column.
    let design = DMatrix::from_fn(n, dim + 1, |i, j| {
        if j < dim {
            (x[i][j] - means[j]) / stds[j]
        } else {
            1.0
        }
    });
    let targets = DVector::from_fn(n, |i, _| if y[i] { 1.0 } else { 0.0 });

    let nf = n as f64;
    let mut params = DVector::zeros(dim + 1);

    let objective = |params: &DVector<f64>| -> f64 {
        let z = &design * params;
        let mut nll = 0.0;
        for i in 0..n {
            // ln(1 + exp(-s*z)) with the stable formulation.
            let zi = z[i];
            let s = if y[i] { zi } else { -zi };
            nll += if s > 0.0 {
                (-s).exp().ln_1p()
            } else {
                -s + s.exp().ln_1p()
            };
        }
        let w_norm: f64 = params.rows(0, dim).iter().map(|v| v * v).sum();
        nll / nf + l2_reg / (2.0 * nf) * w_norm
    };

    for _ in 0..max_iter {
        let z = &design * &params;
        let probs = DVector::from_fn(n, |i, _| sigmoid(z[i]));
        let residual = &probs - &targets;
        let mut grad = design.transpose() * residual / nf;
        for j in 0..dim {
            grad[j] += l2_reg / nf * params[j];
        }
        if grad.amax() <= tol {
            break;
        }

        // Newton direction from the penalized Hessian.
        let r: Vec<f64> = (0..n).map(|i| probs[i] * (1.0 - probs[i])).collect();
        let mut hessian = DMatrix::zeros(dim + 1, dim + 1);
        for (i, ri) in r.iter().enumerate() {
            let row = design.row(i);
            let ri = ri / nf;
            for a in 0..dim + 1 {
                for b in a..dim + 1 {
                    hessian[(a, b)] += ri * row[a] * row[b];
                }
            }
        }
        for a in 0..dim + 1 {
            for b in 0..a {
                hessian[(a, b)] = hessian[(b, a)];
            }
        }
        for j in 0..dim {
            hessian[(j, j)] += l2_reg / nf;
        }
        // Ridge fallback keeps the factorization alive near separation.
        let direction = match Cholesky::new(hessian.clone()) {
            Some(chol) => chol.solve(&grad),
            None => {
                for j in 0..dim + 1 {
                    hessian[(j, j)] += 1e-8;
                }
                match Cholesky::new(hessian) {
                    Some(chol) => chol.solve(&grad),
                    None => grad.clone(),
                }
            }
        };

        // Backtracking line search on the full Newton step.
        let base = objective(&params);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &params - step * &direction;
            if objective(&candidate) <= base {
                params = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    Ok(LogisticModel {
        weights: params.rows(0, dim).iter().copied().collect(),
        bias: params[dim],
        l2_reg,
        feature_means: means,
        feature_stds: stds,
    })
}

impl LogisticModel {
    pub const DEFAULT_MAX_ITER: usize = 100;
    pub const DEFAULT_TOL: f64 = 1e-8;

    /// Probability of the positive class for one raw feature row.
    pub fn predict_proba_one(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::validation(format!(
                "feature dim {} does not match model dim {}",
                row.len(),
                self.weights.len()
            )));
        }
        let z: f64 = row
            .iter()
            .zip(&self.weights)
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|((v, w), (m, s))| w * (v - m) / s)
            .sum::<f64>()
            + self.bias;
        Ok(sigmoid(z))
    }

    /// Probabilities and hard labels at the 0.5 threshold.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<bool>)> {
        let probs: Vec<f64> = x
            .iter()
            .map(|row| self.predict_proba_one(row))
            .collect::<Result<_>>()?;
        let labels = probs.iter().map(|&p| p >= 0.5).collect();
        Ok((probs, labels))
    }

    /// Serializes to the versioned `TMDLOG1` binary format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(LOG_MAGIC);
        buf.extend_from_slice(&(self.weights.len() as u32).to_le_bytes());
        buf.extend_from_slice(&self.bias.to_le_bytes());
        buf.extend_from_slice(&self.l2_reg.to_le_bytes());
        for group in [&self.weights, &self.feature_means, &self.feature_stds] {
            for v in group {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let checksum = Sha256::digest(&buf);
        buf.extend_from_slice(&checksum);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LogisticModel> {
        if bytes.len() < LOG_MAGIC.len() + 32 {
            return Err(Error::Format("logistic model file truncated".into()));
        }
        if &bytes[..LOG_MAGIC.len()] != LOG_MAGIC {
            return Err(Error::Format("bad logistic model magic; expected TMDLOG1".into()));
        }
        let (body, checksum) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != checksum {
            return Err(Error::Format("logistic model checksum mismatch".into()));
        }
        let mut pos = LOG_MAGIC.len();
        let mut take = |n: usize| -> Result<&[u8]> {
            if pos + n > body.len() {
                return Err(Error::Format("logistic model file truncated".into()));
            }
            let s = &body[pos..pos + n];
            pos += n;
            Ok(s)
        };
        let dim = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
        let bias = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let l2_reg = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let mut read_vec = |len: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                out.push(f64::from_le_bytes(take(8)?.try_into().expect("8 bytes")));
            }
            Ok(out)
        };
        let weights = read_vec(dim)?;
        let feature_means = read_vec(dim)?;
        let feature_stds = read_vec(dim)?;
        Ok(LogisticModel {
            weights,
            bias,
            l2_reg,
            feature_means,
            feature_stds,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<LogisticModel> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

const LOG_MAGIC: &[u8] = b"TMDLOG1";

/// kNN prediction by exact brute-force Euclidean neighbors. Distance ties
/// break toward the lower training index; vote ties break toward the single
/// nearest neighbor's label.
pub fn knn_predict(
    train_x: &[Vec<f64>],
    train_y: &[bool],
    query_x: &[Vec<f64>],
    k: usize,
) -> Result<Vec<bool>> {
    let dim = validate_xy(train_x, train_y)?;
    if k < 1 || k > train_x.len() {
        return Err(Error::validation(format!(
            "k={k} out of range for {} training points",
            train_x.len()
        )));
    }
    let mut out = Vec::with_capacity(query_x.len());
    for query in query_x {
        if query.len() != dim {
            return Err(Error::validation("query dimension mismatch"));
        }
        let mut dists: Vec<(f64, usize)> = train_x
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
        let votes_true = dists[..k].iter().filter(|&&(_, i)| train_y[i]).count();
        let label = match (2 * votes_true).cmp(&k) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => train_y[dists[0].1],
        };
        out.push(label);
    }
    Ok(out)
}

/// Accuracy plus macro-averaged F1/precision/recall over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Computes metrics from predictions. Per-class precision/recall/F1 are
/// macro-averaged; empty denominators contribute zero.
pub fn eval_metrics(truth: &[bool], predicted: &[bool]) -> Result<EvalMetrics> {
    if truth.is_empty() || truth.len() != predicted.len() {
        return Err(Error::validation("truth and predictions must align"));
    }
    let mut tp = 0u64;
    let mut tn = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let f1_of = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };

    let prec_pos = ratio(tp, tp + fp);
    let rec_pos = ratio(tp, tp + fn_);
    let prec_neg = ratio(tn, tn + fn_);
    let rec_neg = ratio(tn, tn + fp);
    Ok(EvalMetrics {
        accuracy: (tp + tn) as f64 / truth.len() as f64,
        f1: (f1_of(prec_pos, rec_pos) + f1_of(prec_neg, rec_neg)) / 2.0,
        precision: (prec_pos + prec_neg) / 2.0,
        recall: (rec_pos + rec_neg) / 2.0,
    })
}

/// Which learner the protocol trains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum ModelSpec {
    Logistic { l2_reg: f64 },
    Knn { k: usize },
}

/// Output of [`evaluate_protocol`]: five-fold CV metrics plus the metrics on
/// the untouched 20% test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ModelSpec,
    pub seed: u64,
    /// Mean metrics over the stratified five-fold CV of the full dataset.
    pub cv: EvalMetrics,
    pub per_fold: Vec<EvalMetrics>,
    /// Metrics of the model fit on the 80% split, scored on the 20% split.
    pub test: EvalMetrics,
    pub n_train: usize,
    pub n_test: usize,
}

fn fit_predict(
    spec: ModelSpec,
    train_x: &[Vec<f64>],
    train_y: &[bool],
    test_x: &[Vec<f64>],
) -> Result<Vec<bool>> {
    match spec {
        ModelSpec::Logistic { l2_reg } => {
            let model = logistic_train(
                train_x,
                train_y,
                l2_reg,
                LogisticModel::DEFAULT_MAX_ITER,
                LogisticModel::DEFAULT_TOL,
            )?;
            Ok(model.predict(test_x)?.1)
        }
        ModelSpec::Knn { k } => knn_predict(train_x, train_y, test_x, k.min(train_x.len())),
    }
}

/// Shuffled per-class index lists.
fn stratified_indices(y: &[bool], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    for list in [&mut pos, &mut neg] {
        for i in (1..list.len()).rev() {
            let j = rng.gen_range(0..=i);
            list.swap(i, j);
        }
    }
    (pos, neg)
}

fn gather(x: &[Vec<f64>], y: &[bool], idx: &[usize]) -> (Vec<Vec<f64>>, Vec<bool>) {
    (
        idx.iter().map(|&i| x[i].clone()).collect(),
        idx.iter().map(|&i| y[i]).collect(),
    )
}

/// The paper-style protocol: a stratified seeded 80/20 split scores the
/// untouched test set; stratified five-fold CV over the full dataset gives
/// the headline metrics. Both are reported.
pub fn evaluate_protocol(
    x: &[Vec<f64>],
    y: &[bool],
    spec: ModelSpec,
    seed: u64,
) -> Result<EvalReport> {
    validate_xy(x, y)?;
    let n = x.len();
    if n < 10 {
        return Err(Error::validation("protocol requires n >= 10"));
    }
    let n_pos = y.iter().filter(|&&v| v).count();
    let n_neg = n - n_pos;
    if n_pos < 5 || n_neg < 5 {
        return Err(Error::validation(
            "stratification requires >= 5 samples per class",
        ));
    }

    // 80/20 split.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["split-80-20"]));
    let (pos, neg) = stratified_indices(y, &mut rng);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for list in [&pos, &neg] {
        let n_test = (list.len() / 5).max(1);
        test_idx.extend_from_slice(&list[..n_test]);
        train_idx.extend_from_slice(&list[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let (train_x, train_y) = gather(x, y, &train_idx);
    let (test_x, test_y) = gather(x, y, &test_idx);
    let test_pred = fit_predict(spec, &train_x, &train_y, &test_x)?;
    let test = eval_metrics(&test_y, &test_pred)?;

    // Five-fold stratified CV over the full dataset.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["cv-5fold"]));
    let (pos, neg) = stratified_indices(y, &mut rng);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); 5];
    for list in [&pos, &neg] {
        for (i, &idx) in list.iter().enumerate() {
            folds[i % 5].push(idx);
        }
    }
    let mut per_fold = Vec::with_capacity(5);
    for f in 0..5 {
        let mut heldout = folds[f].clone();
        heldout.sort_unstable();
        let mut rest: Vec<usize> = (0..5).filter(|&g| g != f).flat_map(|g| folds[g].clone()).collect();
        rest.sort_unstable();
        let (fold_train_x, fold_train_y) = gather(x, y, &rest);
        let (fold_test_x, fold_test_y) = gather(x, y, &heldout);
        if fold_test_y.iter().all(|&v| v) || fold_test_y.iter().all(|&v| !v) {
            return Err(Error::validation("a CV fold lost one class entirely"));
        }
        let pred = fit_predict(spec, &fold_train_x, &fold_train_y, &fold_test_x)?;
        per_fold.push(eval_metrics(&fold_test_y, &pred)?);
    }
    let mean = |f: fn(&EvalMetrics) -> f64| per_fold.iter().map(f).sum::<f64>() / 5.0;
    let cv = EvalMetrics {
        accuracy: mean(|m| m.accuracy),
        f1: mean(|m| m.f1),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
    };

    Ok(EvalReport {
        spec,
        seed,
        cv,
        per_fold,
        test,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
    })
}
