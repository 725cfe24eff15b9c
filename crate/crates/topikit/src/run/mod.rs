//! Pipeline orchestration behind the `topikit` binary.
//!
//! Each subcommand is one function here: it validates its upstream
//! artifacts, does the work through the library modules, writes outputs
//! atomically under the configured out directory, and records the step in
//! `run.json`. Reruns with an unchanged config produce byte-identical
//! artifacts.

mod artifacts;
mod config;
mod manifest;
pub mod svg;

pub use artifacts::{require_artifact, sha256_file, sha256_hex, write_atomic};
pub use config::{
    ClassifierKind, ClassifySection, ClusterSection, CoherenceScope, CoherenceSection,
    CorpusSection, DeviateSection, EmbedSection, FeaturesSection, LdaSection, OutputFormat,
    PreprocessSection, ReduceSection, RunConfig, RunSection, SynthSection,
};
pub use manifest::{FileRecord, RunManifest, StepRecord};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::{evaluate_protocol, EvalReport, ModelSpec};
use crate::cluster::{kmeans, purity, random_baseline_purity};
use crate::coherence::umass_model;
use crate::corpus::{load_corpus, to_bow, Corpus, LabelSide, PreprocessedCorpus, TokenDoc};
use crate::deviation::{evaluate, l_sweep, section, DeviationReport};
use crate::embedcmp::{group_delta, load_embeddings, load_scores, score_group_compare, EmbedGroup};
use crate::features::{
    balance_classes, build_aggregate_matrix, build_single_n_matrix, build_wholedoc_matrix,
    FeatureMatrix, FeatureVariant,
};
use crate::lda::{InferConfig, LdaModel, TrainConfig};
use crate::reduce::reduce;
use crate::synth::generate;
use crate::{Error, Result};

/// What one subcommand produced, for the CLI to print.
#[derive(Debug, Clone, Serialize)]
pub struct StepOutput {
    pub step: String,
    pub outputs: Vec<PathBuf>,
    pub summary: String,
}

/// JSON report envelope; every report embeds the config hash.
#[derive(Debug, Serialize)]
struct Report<'a, T: Serialize> {
    config_sha256: &'a str,
    report: T,
}

fn write_json_report<T: Serialize>(path: &Path, config: &RunConfig, report: T) -> Result<()> {
    let hash = config.sha256();
    let envelope = Report {
        config_sha256: &hash,
        report,
    };
    let mut json = serde_json::to_string_pretty(&envelope).expect("report serializes");
    json.push('\n');
    write_atomic(path, json.as_bytes())
}

fn csv_hash_line(config: &RunConfig) -> String {
    format!("# config_sha256={}\n", config.sha256())
}

// Artifact names under the out directory.
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const PREPROCESSED_FILE: &str = "preprocessed.json";

pub fn model_file(n: usize) -> String {
    format!("models/lda_n{n}.tmdlda")
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.run.out_dir.join(name)
}

fn record(
    cfg: &RunConfig,
    step: &str,
    inputs: &[&Path],
    outputs: &[PathBuf],
    summary: String,
) -> Result<StepOutput> {
    std::fs::create_dir_all(&cfg.run.out_dir).map_err(|e| Error::io(&cfg.run.out_dir, e))?;
    let mut manifest = RunManifest::open(&cfg.run.out_dir, cfg)?;
    let output_refs: Vec<&Path> = outputs.iter().map(|p| p.as_path()).collect();
    manifest.record_step(&cfg.run.out_dir, step, inputs, &output_refs)?;
    Ok(StepOutput {
        step: step.to_string(),
        outputs: outputs.to_vec(),
        summary,
    })
}

/// `synth`: generate the configured synthetic corpus into `corpus.jsonl`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<StepOutput> {
    let spec = cfg.synth.build(cfg.stage_seed("synth"));
    let corpus = generate(&spec)?;
    let path = out_path(cfg, CORPUS_FILE);
    write_atomic(&path, corpus.to_jsonl().as_bytes())?;
    let summary = format!(
        "synth: wrote {} documents ({} per class) to {}",
        corpus.len(),
        spec.docs_per_class,
        path.display()
    );
    record(cfg, "synth", &[], &[path], summary)
}

/// `ingest`: load and validate the configured corpus, then write the
/// normalized JSONL copy the rest of the pipeline consumes.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<StepOutput> {
    let source = &cfg.corpus.path;
    let corpus = load_corpus(source, cfg.corpus.format)?;
    let path = out_path(cfg, CORPUS_FILE);
    write_atomic(&path, corpus.to_jsonl().as_bytes())?;
    let summary = format!(
        "ingest: {} documents from {} -> {}",
        corpus.len(),
        source.display(),
        path.display()
    );
    record(cfg, "ingest", &[source], &[path], summary)
}

fn load_corpus_artifact(cfg: &RunConfig) -> Result<(PathBuf, Corpus)> {
    let path = require_artifact(&out_path(cfg, CORPUS_FILE), "synth (or ingest)")?;
    let corpus = load_corpus(&path, crate::corpus::CorpusFormat::Jsonl)?;
    Ok((path, corpus))
}

fn load_preprocessed(cfg: &RunConfig) -> Result<(PathBuf, PreprocessedCorpus)> {
    let path = require_artifact(&out_path(cfg, PREPROCESSED_FILE), "preprocess")?;
    let contents = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let prep: PreprocessedCorpus = serde_json::from_str(&contents).map_err(|e| Error::Parse {
        path: path.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok((path, prep))
}

/// `preprocess`: run the full preprocessing recipe over `corpus.jsonl`.
pub fn cmd_preprocess(cfg: &RunConfig) -> Result<StepOutput> {
    let (corpus_path, corpus) = load_corpus_artifact(cfg)?;
    let preprocess_cfg = cfg.preprocess.build()?;
    let prep = crate::corpus::preprocess(&corpus, &preprocess_cfg)?;
    let path = out_path(cfg, PREPROCESSED_FILE);
    let mut json = serde_json::to_string(&prep).expect("preprocessed corpus serializes");
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;
    let summary = format!(
        "preprocess: {} docs, vocabulary {}, {} promoted bigrams",
        prep.docs.len(),
        prep.vocab.len(),
        prep.phrase_table.len()
    );
    record(cfg, "preprocess", &[&corpus_path], &[path], summary)
}

fn bows_of(prep: &PreprocessedCorpus) -> Vec<crate::corpus::BowVector> {
    prep.docs
        .iter()
        .map(|d| to_bow(d.tokens(), &prep.vocab))
        .collect()
}

/// `lda-train`: train one background model per configured N and cache them.
pub fn cmd_lda_train(cfg: &RunConfig) -> Result<StepOutput> {
    let (prep_path, prep) = load_preprocessed(cfg)?;
    let bows = bows_of(&prep);
    let mut outputs = Vec::new();
    let mut summaries = Vec::new();
    #[derive(Serialize)]
    struct TrainInfo {
        n: usize,
        alpha: f64,
        beta: f64,
        iters: usize,
        seed: u64,
        final_loglik: f64,
    }
    let mut infos = Vec::new();
    for &n in &cfg.lda.n_set {
        let seed = crate::lda::derive_seed(cfg.stage_seed("lda-train"), &[&n.to_string()]);
        let train_cfg = TrainConfig {
            k: n,
            alpha: cfg.lda.alpha.unwrap_or(1.0 / n as f64),
            beta: cfg.lda.beta,
            iters: cfg.lda.train_iters,
            seed,
        };
        let model = LdaModel::train(&bows, &prep.vocab, train_cfg)?;
        let path = out_path(cfg, &model_file(n));
        write_atomic(&path, &model.to_bytes())?;
        infos.push(TrainInfo {
            n,
            alpha: train_cfg.alpha,
            beta: train_cfg.beta,
            iters: train_cfg.iters,
            seed,
            final_loglik: *model.loglik_trace().last().expect("iters >= 1"),
        });
        summaries.push(format!("N={n}"));
        outputs.push(path);
    }
    let report_path = out_path(cfg, "lda_train.json");
    write_json_report(&report_path, cfg, &infos)?;
    outputs.push(report_path);
    let summary = format!("lda-train: cached models for {}", summaries.join(", "));
    record(cfg, "lda-train", &[&prep_path], &outputs, summary)
}

fn load_models(cfg: &RunConfig, n_set: &[usize]) -> Result<BTreeMap<usize, LdaModel>> {
    let mut models = BTreeMap::new();
    for &n in n_set {
        let path = require_artifact(&out_path(cfg, &model_file(n)), "lda-train")?;
        models.insert(n, LdaModel::load(&path)?);
    }
    Ok(models)
}

fn infer_config(cfg: &RunConfig, stage: &str) -> InferConfig {
    InferConfig {
        iters: cfg.lda.infer_iters,
        seed: cfg.stage_seed(stage),
    }
}

/// `lda-infer`: per-document topic distributions under one cached model.
pub fn cmd_lda_infer(cfg: &RunConfig, n: usize) -> Result<StepOutput> {
    let (prep_path, prep) = load_preprocessed(cfg)?;
    let models = load_models(cfg, &[n])?;
    let model = &models[&n];
    let infer = infer_config(cfg, "lda-infer");

    let mut csv = String::from("id,label");
    for k in 0..n {
        let _ = write!(csv, ",t{k}");
    }
    csv.push('\n');
    for doc in &prep.docs {
        let bow = to_bow(doc.tokens(), &prep.vocab);
        let seed = crate::lda::derive_seed(infer.seed, &["doc", &doc.id]);
        let theta = model.infer(&bow, InferConfig { seed, ..infer })?;
        let _ = write!(csv, "{},{}", doc.id, doc.label);
        for p in theta.probs() {
            let _ = write!(csv, ",{p:.16e}");
        }
        csv.push('\n');
    }
    let path = out_path(cfg, &format!("inferred_n{n}.csv"));
    write_atomic(&path, csv.as_bytes())?;
    let summary = format!("lda-infer: {} documents under N={n}", prep.docs.len());
    let model_path = out_path(cfg, &model_file(n));
    record(cfg, &format!("lda-infer-n{n}"), &[&prep_path, &model_path], &[path], summary)
}

fn scope_docs(prep: &PreprocessedCorpus, scope: CoherenceScope, l: usize) -> Result<Vec<TokenDoc>> {
    match scope {
        CoherenceScope::Full => Ok(prep.docs.clone()),
        CoherenceScope::Openings | CoherenceScope::Remainders => {
            let mut out = Vec::new();
            for doc in &prep.docs {
                if let Some(s) = section(doc, l)? {
                    let tokens = match scope {
                        CoherenceScope::Openings => s.opening_tokens,
                        _ => s.remainder_tokens,
                    };
                    out.push(TokenDoc {
                        id: doc.id.clone(),
                        label: doc.label,
                        sentences: vec![tokens],
                    });
                }
            }
            Ok(out)
        }
    }
}

/// `coherence`: UMass coherence of one cached model over the chosen corpus
/// slice, written as `topic_index,score,top_words` with a mean footer row.
pub fn cmd_coherence(cfg: &RunConfig, n: usize) -> Result<StepOutput> {
    let (prep_path, prep) = load_preprocessed(cfg)?;
    let models = load_models(cfg, &[n])?;
    let docs = scope_docs(&prep, cfg.coherence.scope, cfg.deviate.l)?;
    let result = umass_model(&models[&n], &docs, cfg.coherence.top_words, cfg.coherence.epsilon)?;

    let scope_name = match cfg.coherence.scope {
        CoherenceScope::Full => "full",
        CoherenceScope::Openings => "openings",
        CoherenceScope::Remainders => "remainders",
    };
    let mut csv = csv_hash_line(cfg);
    csv.push_str("topic_index,score,top_words\n");
    for (k, topic) in result.per_topic.iter().enumerate() {
        let score = match topic.score() {
            Some(v) => format!("{v:.16e}"),
            None => "undefined".to_string(),
        };
        let _ = writeln!(csv, "{k},{score},{}", result.top_words[k].join(" "));
    }
    let _ = writeln!(csv, "mean,{:.16e},", result.mean);

    let path = out_path(cfg, &format!("coherence_n{n}_{scope_name}.csv"));
    write_atomic(&path, csv.as_bytes())?;
    let summary = format!(
        "coherence: N={n} over {scope_name} corpus, mean UMass {:.4}",
        result.mean
    );
    let model_path = out_path(cfg, &model_file(n));
    record(
        cfg,
        &format!("coherence-n{n}-{scope_name}"),
        &[&prep_path, &model_path],
        &[path],
        summary,
    )
}

fn deviation_outputs(cfg: &RunConfig, report: &DeviationReport) -> Result<Vec<PathBuf>> {
    let l = report.l;
    let mut outputs = Vec::new();

    let json_path = out_path(cfg, &format!("deviation_l{l}.json"));
    write_json_report(&json_path, cfg, report)?;
    outputs.push(json_path);

    let csv_path = out_path(cfg, &format!("deviation_records_l{l}.csv"));
    let csv = format!("{}{}", csv_hash_line(cfg), report.records_csv());
    write_atomic(&csv_path, csv.as_bytes())?;
    outputs.push(csv_path);

    if cfg.run.plot {
        let mut groups = Vec::new();
        for &n in &report.n_set {
            for side in [LabelSide::Fake, LabelSide::Real] {
                let values: Vec<f64> = report
                    .records
                    .iter()
                    .filter(|r| r.label == side)
                    .map(|r| r.per_n[&n])
                    .collect();
                let color = match side {
                    LabelSide::Fake => svg::FAKE_COLOR,
                    LabelSide::Real => svg::REAL_COLOR,
                };
                if let Some(g) =
                    svg::BoxGroup::from_values(&format!("{side} N={n}"), color, &values)
                {
                    groups.push(g);
                }
            }
        }
        let plot = svg::box_plot(
            &format!("Thematic deviation ({}), l={l}", report.measure),
            report.measure.as_str(),
            &groups,
        );
        let svg_path = out_path(cfg, &format!("deviation_boxplot_l{l}.svg"));
        write_atomic(&svg_path, plot.as_bytes())?;
        outputs.push(svg_path);
    }
    Ok(outputs)
}

/// `deviate`: the opening-vs-remainder divergence evaluation, either for
/// the configured `l` or as a full `1..=l` sweep.
pub fn cmd_deviate(cfg: &RunConfig) -> Result<StepOutput> {
    let (prep_path, prep) = load_preprocessed(cfg)?;
    let models = load_models(cfg, &cfg.lda.n_set)?;
    let measure = cfg.deviate.measure()?;
    let infer = infer_config(cfg, "deviate");

    let mut outputs = Vec::new();
    let mut summary_lines = Vec::new();
    if cfg.deviate.sweep {
        let reports = l_sweep(&prep.docs, &models, measure, 1..=cfg.deviate.l, infer)?;
        for report in reports.values() {
            outputs.extend(deviation_outputs(cfg, report)?);
            summary_lines.push(format!(
                "l={}: fake mean {:.4} vs real mean {:.4}, t-test p={:.4e}",
                report.l, report.combined.fake.mean, report.combined.real.mean,
                report.t_test.p_value
            ));
        }
    } else {
        let report = evaluate(&prep.docs, &models, measure, cfg.deviate.l, infer)?;
        summary_lines.push(format!(
            "l={}: fake mean {:.4} vs real mean {:.4}, t-test p={:.4e}",
            report.l, report.combined.fake.mean, report.combined.real.mean,
            report.t_test.p_value
        ));
        outputs.extend(deviation_outputs(cfg, &report)?);
    }
    let model_paths: Vec<PathBuf> = cfg
        .lda
        .n_set
        .iter()
        .map(|&n| out_path(cfg, &model_file(n)))
        .collect();
    let mut inputs: Vec<&Path> = vec![&prep_path];
    inputs.extend(model_paths.iter().map(|p| p.as_path()));
    let summary = format!("deviate ({}):\n  {}", measure.kind, summary_lines.join("\n  "));
    record(cfg, "deviate", &inputs, &outputs, summary)
}

fn features_file_name(cfg: &RunConfig) -> String {
    match cfg.features.variant {
        FeatureVariant::Aggregate300 => "features_aggregate300.csv".into(),
        FeatureVariant::Wholedoc150 => "features_wholedoc150.csv".into(),
        FeatureVariant::SingleN => format!("features_single_n{}.csv", cfg.features.single_n),
        FeatureVariant::Reduced2d => "features_reduced2d.csv".into(),
    }
}

/// `features`: build the configured topic-feature matrix.
pub fn cmd_features(cfg: &RunConfig) -> Result<StepOutput> {
    let (prep_path, prep) = load_preprocessed(cfg)?;
    let infer = infer_config(cfg, "features");
    let (matrix, input_models): (FeatureMatrix, Vec<usize>) = match cfg.features.variant {
        FeatureVariant::Aggregate300 => {
            let models = load_models(cfg, &cfg.lda.n_set)?;
            (
                build_aggregate_matrix(&prep.docs, &models, cfg.deviate.l, infer)?,
                cfg.lda.n_set.clone(),
            )
        }
        FeatureVariant::Wholedoc150 => {
            let models = load_models(cfg, &cfg.lda.n_set)?;
            (
                build_wholedoc_matrix(&prep.docs, &models, infer)?,
                cfg.lda.n_set.clone(),
            )
        }
        FeatureVariant::SingleN => {
            let n = cfg.features.single_n;
            let models = load_models(cfg, &[n])?;
            (
                build_single_n_matrix(&prep.docs, &models[&n], cfg.deviate.l, infer)?,
                vec![n],
            )
        }
        FeatureVariant::Reduced2d => {
            return Err(Error::validation(
                "the reduced2d variant is produced by `topikit reduce`",
            ))
        }
    };
    let matrix = if cfg.features.balance {
        balance_classes(&matrix, cfg.stage_seed("balance"))?
    } else {
        matrix
    };
    let path = out_path(cfg, &features_file_name(cfg));
    write_atomic(&path, matrix.to_csv().as_bytes())?;
    let summary = format!(
        "features: {:?} matrix {} x {} -> {}",
        cfg.features.variant,
        matrix.len(),
        matrix.dim,
        path.display()
    );
    let model_paths: Vec<PathBuf> = input_models
        .iter()
        .map(|&n| out_path(cfg, &model_file(n)))
        .collect();
    let mut inputs: Vec<&Path> = vec![&prep_path];
    inputs.extend(model_paths.iter().map(|p| p.as_path()));
    record(cfg, "features", &inputs, &[path], summary)
}

fn resolve_feature_input(cfg: &RunConfig, configured: &Option<PathBuf>) -> PathBuf {
    match configured {
        Some(path) if path.is_absolute() => path.clone(),
        Some(path) => cfg.run.out_dir.join(path),
        None => out_path(cfg, &features_file_name(cfg)),
    }
}

/// `reduce`: project a feature CSV down to `target_dim` columns.
pub fn cmd_reduce(cfg: &RunConfig) -> Result<StepOutput> {
    let input = resolve_feature_input(cfg, &cfg.reduce.input);
    require_artifact(&input, "features")?;
    let matrix = FeatureMatrix::load_csv(&input, FeatureVariant::Aggregate300)?;
    let reduction = cfg.reduce.build(cfg.stage_seed("reduce"));
    let reduced_rows = reduce(&matrix.rows, &reduction)?;
    let reduced = FeatureMatrix::new(
        FeatureVariant::Reduced2d,
        matrix.ids.clone(),
        matrix.labels.clone(),
        reduced_rows,
    )?;
    let csv_path = out_path(cfg, &format!("reduced_{}.csv", cfg.reduce.method));
    write_atomic(&csv_path, reduced.to_csv().as_bytes())?;
    let mut outputs = vec![csv_path];

    if cfg.run.plot && reduced.dim == 2 {
        let points: Vec<(f64, f64, String)> = reduced
            .rows
            .iter()
            .zip(&reduced.labels)
            .map(|(row, label)| (row[0], row[1], label.as_str().to_string()))
            .collect();
        let plot = svg::scatter_2d(
            &format!("{} of {}", cfg.reduce.method, input.file_name().unwrap_or_default().to_string_lossy()),
            &points,
        );
        let svg_path = out_path(cfg, &format!("reduced_{}_scatter.svg", cfg.reduce.method));
        write_atomic(&svg_path, plot.as_bytes())?;
        outputs.push(svg_path);
    }
    let summary = format!(
        "reduce: {} -> {} dims via {} ({} rows)",
        matrix.dim,
        reduced.dim,
        cfg.reduce.method,
        reduced.len()
    );
    record(cfg, "reduce", &[&input], &outputs, summary)
}

/// `cluster`: K-means over a feature CSV plus purity and the random
/// baseline.
pub fn cmd_cluster(cfg: &RunConfig) -> Result<StepOutput> {
    let input = resolve_feature_input(cfg, &cfg.cluster.input);
    require_artifact(&input, "features (or reduce)")?;
    let matrix = FeatureMatrix::load_csv(&input, FeatureVariant::Aggregate300)?;
    let sides = matrix.label_sides()?;
    let side_strs: Vec<&str> = sides.iter().map(|s| s.as_str()).collect();

    let seed = cfg.stage_seed("cluster");
    let result = kmeans(
        &matrix.rows,
        cfg.cluster.k,
        cfg.cluster.max_iter,
        cfg.cluster.restarts,
        seed,
    )?;
    let purity_score = purity(&result.assignments, &side_strs)?;
    let baseline = random_baseline_purity(
        &side_strs,
        cfg.cluster.baseline_trials,
        cfg.stage_seed("cluster-baseline"),
    )?;

    #[derive(Serialize)]
    struct ClusterReport<'a> {
        input: String,
        k: usize,
        max_iter: usize,
        restarts: usize,
        seed: u64,
        iterations_used: usize,
        inertia: f64,
        purity: f64,
        random_baseline_purity: f64,
        baseline_trials: usize,
        assignments: &'a [usize],
        ids: &'a [String],
    }
    let input_name = input
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let report = ClusterReport {
        input: input_name.clone(),
        k: cfg.cluster.k,
        max_iter: cfg.cluster.max_iter,
        restarts: cfg.cluster.restarts,
        seed,
        iterations_used: result.iterations_used,
        inertia: result.inertia,
        purity: purity_score,
        random_baseline_purity: baseline,
        baseline_trials: cfg.cluster.baseline_trials,
        assignments: &result.assignments,
        ids: &matrix.ids,
    };
    let stem = input_name.trim_end_matches(".csv").to_string();
    let json_path = out_path(cfg, &format!("clustering_{stem}.json"));
    write_json_report(&json_path, cfg, &report)?;

    let mut csv = csv_hash_line(cfg);
    csv.push_str("input,k,max_iter,restarts,purity,random_baseline_purity,inertia\n");
    let _ = writeln!(
        csv,
        "{input_name},{},{},{},{purity_score:.6},{baseline:.6},{:.6e}",
        cfg.cluster.k, cfg.cluster.max_iter, cfg.cluster.restarts, result.inertia
    );
    let csv_path = out_path(cfg, &format!("clustering_{stem}.csv"));
    write_atomic(&csv_path, csv.as_bytes())?;

    let summary = format!(
        "cluster: {} purity {:.4} (random baseline {:.4}) on {}",
        input_name, purity_score, baseline, input.display(),
    );
    record(cfg, &format!("cluster-{stem}"), &[&input], &[json_path, csv_path], summary)
}

/// `classify`: the 80/20 + five-fold protocol over a feature CSV.
pub fn cmd_classify(cfg: &RunConfig) -> Result<StepOutput> {
    let input = resolve_feature_input(cfg, &cfg.classify.input);
    require_artifact(&input, "features (or reduce)")?;
    let matrix = FeatureMatrix::load_csv(&input, FeatureVariant::Aggregate300)?;
    let sides = matrix.label_sides()?;
    let y: Vec<bool> = sides.iter().map(|s| *s == LabelSide::Fake).collect();

    let spec = match cfg.classify.model {
        ClassifierKind::Logistic => ModelSpec::Logistic {
            l2_reg: cfg.classify.l2_reg,
        },
        ClassifierKind::Knn => ModelSpec::Knn { k: cfg.classify.knn_k },
    };
    let report: EvalReport = evaluate_protocol(&matrix.rows, &y, spec, cfg.stage_seed("classify"))?;

    let input_name = input
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let stem = input_name.trim_end_matches(".csv").to_string();
    let json_path = out_path(cfg, &format!("classify_{stem}.json"));
    write_json_report(&json_path, cfg, &report)?;

    let mut csv = csv_hash_line(cfg);
    csv.push_str("input,model,phase,accuracy,f1,precision,recall\n");
    let model_name = match cfg.classify.model {
        ClassifierKind::Logistic => format!("logistic(l2_reg={})", cfg.classify.l2_reg),
        ClassifierKind::Knn => format!("knn(k={})", cfg.classify.knn_k),
    };
    for (phase, m) in [("cv", &report.cv), ("test", &report.test)] {
        let _ = writeln!(
            csv,
            "{input_name},{model_name},{phase},{:.6},{:.6},{:.6},{:.6}",
            m.accuracy, m.f1, m.precision, m.recall
        );
    }
    let csv_path = out_path(cfg, &format!("classify_{stem}.csv"));
    write_atomic(&csv_path, csv.as_bytes())?;

    let summary = format!(
        "classify: {model_name} on {input_name}: cv accuracy {:.4}, test accuracy {:.4}",
        report.cv.accuracy, report.test.accuracy
    );
    record(cfg, &format!("classify-{stem}"), &[&input], &[json_path, csv_path], summary)
}

/// `embed-compare`: group comparison of supplied embeddings and/or scores.
pub fn cmd_embed_compare(cfg: &RunConfig) -> Result<StepOutput> {
    if cfg.embed.embeddings.is_none() && cfg.embed.scores.is_none() {
        return Err(Error::validation(
            "embed-compare needs an embeddings file, a scores file, or both (see [embed] config)",
        ));
    }

    #[derive(Serialize)]
    struct EmbedReport {
        embeddings: Option<crate::embedcmp::GroupComparison>,
        scores: Option<crate::embedcmp::ScoreComparison>,
    }
    let mut inputs: Vec<PathBuf> = Vec::new();
    let mut summary_lines = Vec::new();

    let embeddings = match &cfg.embed.embeddings {
        Some(path) => {
            let set = load_embeddings(path)?;
            inputs.push(path.clone());
            let rumour = set.group_vectors(EmbedGroup::Rumour);
            let nonrumour = set.group_vectors(EmbedGroup::Nonrumour);
            let cmp = group_delta(&rumour, &nonrumour, cfg.embed.alternative)?;
            summary_lines.push(format!(
                "embeddings: delta_a {:+.4}, delta_med {:+.4}, U-test p={:.4e}",
                cmp.delta_a, cmp.delta_med, cmp.test.p_value
            ));
            Some(cmp)
        }
        None => None,
    };
    let scores = match &cfg.embed.scores {
        Some(path) => {
            let (rumour, nonrumour) = load_scores(path)?;
            inputs.push(path.clone());
            let cmp = score_group_compare(&rumour, &nonrumour)?;
            summary_lines.push(format!(
                "scores: delta_mean {:+.4}, U-test p={:.4e}",
                cmp.delta_mean, cmp.mann_whitney.p_value
            ));
            Some(cmp)
        }
        None => None,
    };

    let path = out_path(cfg, "embed_compare.json");
    write_json_report(&path, cfg, &EmbedReport { embeddings, scores })?;
    let input_refs: Vec<&Path> = inputs.iter().map(|p| p.as_path()).collect();
    let summary = format!("embed-compare:\n  {}", summary_lines.join("\n  "));
    record(cfg, "embed-compare", &input_refs, &[path], summary)
}

/// `report`: verify manifest completeness and write a consolidated text
/// digest of every report artifact in the out directory.
pub fn cmd_report(cfg: &RunConfig) -> Result<StepOutput> {
    let manifest_path = out_path(cfg, RunManifest::FILE_NAME);
    require_artifact(&manifest_path, "any other subcommand")?;
    let manifest = RunManifest::open(&cfg.run.out_dir, cfg)?;

    let mut text = String::new();
    let _ = writeln!(text, "topikit run report");
    let _ = writeln!(text, "config_sha256: {}", manifest.config_sha256);
    let _ = writeln!(text, "tool: {} {}", manifest.tool, manifest.version);
    let _ = writeln!(text);

    let mut missing = Vec::new();
    for (step, record) in &manifest.steps {
        let _ = writeln!(text, "step {step}:");
        for file in &record.outputs {
            let exists = cfg.run.out_dir.join(&file.path).exists();
            if !exists {
                missing.push(file.path.clone());
            }
            let _ = writeln!(
                text,
                "  {} {} sha256={}",
                if exists { "ok  " } else { "MISS" },
                file.path,
                &file.sha256[..16]
            );
        }
    }
    if !missing.is_empty() {
        return Err(Error::validation(format!(
            "manifest lists missing artifacts: {}",
            missing.join(", ")
        )));
    }

    let path = out_path(cfg, "report.txt");
    write_atomic(&path, text.as_bytes())?;
    let summary = format!(
        "report: {} steps verified, digest at {}",
        manifest.steps.len(),
        path.display()
    );
    record(cfg, "report", &[&manifest_path], &[path], summary)
}
