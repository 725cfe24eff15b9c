//! Thin command-line front end over the `topikit` library.
//!
//! Every subcommand is one pipeline function in `topikit::run`; this binary
//! only parses arguments, merges flag overrides into the config, dispatches,
//! and maps errors to exit codes (0 success, 2 validation, 1 internal).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use topikit::run::{self, OutputFormat, RunConfig};
use topikit::Error;

#[derive(Parser)]
#[command(
    name = "topikit",
    version,
    about = "Topic-distribution toolkit: thematic deviation, coherence, clustering, classification"
)]
struct Cli {
    /// TOML run configuration; defaults apply for anything unset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override (every stage derives its own seed from this).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Stdout summary format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,

    /// Emit SVG plots where a subcommand has one.
    #[arg(long, global = true, overrides_with = "no_plot")]
    plot: bool,

    /// Suppress SVG plots.
    #[arg(long, global = true)]
    no_plot: bool,

    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, and normalize the configured corpus.
    Ingest,
    /// Run the preprocessing recipe over the ingested corpus.
    Preprocess,
    /// Train and cache one LDA model per configured N.
    LdaTrain,
    /// Infer per-document topic distributions under one cached model.
    LdaInfer {
        /// Topic count of the cached model to use.
        #[arg(long)]
        n: usize,
    },
    /// UMass topic coherence of one cached model.
    Coherence {
        #[arg(long)]
        n: usize,
        /// Corpus slice to score over: full, openings, or remainders.
        #[arg(long)]
        scope: Option<String>,
        /// Top words per topic.
        #[arg(long)]
        top_words: Option<usize>,
    },
    /// Opening-vs-remainder thematic deviation (single l or sweep).
    Deviate {
        /// Run the full 1..=l sweep instead of the single configured l.
        #[arg(long)]
        sweep: bool,
        /// Opening length override.
        #[arg(long)]
        l: Option<usize>,
        /// Divergence measure override (e.g. chebyshev, euclidean).
        #[arg(long)]
        measure: Option<String>,
    },
    /// Build the configured topic-feature matrix.
    Features {
        /// Variant override: aggregate300, wholedoc150, or single_n.
        #[arg(long)]
        variant: Option<String>,
        /// N for the single_n variant.
        #[arg(long)]
        n: Option<usize>,
        /// Balance classes by subsampling the bigger one.
        #[arg(long)]
        balance: bool,
    },
    /// Reduce a feature matrix to low dimension (pca, svd, nmf, tsne).
    Reduce {
        #[arg(long)]
        method: Option<String>,
        /// Feature CSV to reduce (relative to the out dir).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// K-means clustering with purity evaluation.
    Cluster {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Logistic-regression or kNN detection protocol.
    Classify {
        /// Model override: logistic or knn.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compare rumour vs non-rumour embedding or score groups.
    EmbedCompare {
        /// Embedding TSV (id<TAB>group<TAB>dim header).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Scores TSV (id<TAB>group<TAB>score).
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Generate the configured synthetic corpus.
    Synth,
    /// Verify the manifest and write a consolidated digest.
    Report,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(out_dir) = &cli.out_dir {
        config.run.out_dir = out_dir.clone();
    }
    if let Some(format) = cli.format {
        config.run.format = format;
    }
    if cli.plot {
        config.run.plot = true;
    } else if cli.no_plot {
        config.run.plot = false;
    }
    Ok(config)
}

fn dispatch(command: &Command, config: &mut RunConfig) -> Result<run::StepOutput, Error> {
    match command {
        Command::Ingest => run::cmd_ingest(config),
        Command::Preprocess => run::cmd_preprocess(config),
        Command::LdaTrain => run::cmd_lda_train(config),
        Command::LdaInfer { n } => run::cmd_lda_infer(config, *n),
        Command::Coherence { n, scope, top_words } => {
            if let Some(scope) = scope {
                config.coherence.scope = scope.parse()?;
            }
            if let Some(m) = top_words {
                config.coherence.top_words = *m;
            }
            run::cmd_coherence(config, *n)
        }
        Command::Deviate { sweep, l, measure } => {
            if *sweep {
                config.deviate.sweep = true;
            }
            if let Some(l) = l {
                config.deviate.l = *l;
            }
            if let Some(measure) = measure {
                config.deviate.measure = measure.parse()?;
            }
            run::cmd_deviate(config)
        }
        Command::Features { variant, n, balance } => {
            if let Some(variant) = variant {
                config.features.variant = match variant.as_str() {
                    "aggregate300" | "aggregate" => topikit::features::FeatureVariant::Aggregate300,
                    "wholedoc150" | "wholedoc" => topikit::features::FeatureVariant::Wholedoc150,
                    "single_n" | "single-n" => topikit::features::FeatureVariant::SingleN,
                    other => {
                        return Err(Error::Validation(format!(
                            "unknown feature variant `{other}`"
                        )))
                    }
                };
            }
            if let Some(n) = n {
                config.features.single_n = *n;
            }
            if *balance {
                config.features.balance = true;
            }
            run::cmd_features(config)
        }
        Command::Reduce { method, input } => {
            if let Some(method) = method {
                config.reduce.method = method.parse()?;
            }
            if let Some(input) = input {
                config.reduce.input = Some(input.clone());
            }
            run::cmd_reduce(config)
        }
        Command::Cluster { input } => {
            if let Some(input) = input {
                config.cluster.input = Some(input.clone());
            }
            run::cmd_cluster(config)
        }
        Command::Classify { model, input } => {
            if let Some(model) = model {
                config.classify.model = model.parse()?;
            }
            if let Some(input) = input {
                config.classify.input = Some(input.clone());
            }
            run::cmd_classify(config)
        }
        Command::EmbedCompare { embeddings, scores } => {
            if let Some(embeddings) = embeddings {
                config.embed.embeddings = Some(embeddings.clone());
            }
            if let Some(scores) = scores {
                config.embed.scores = Some(scores.clone());
            }
            run::cmd_embed_compare(config)
        }
        Command::Synth => run::cmd_synth(config),
        Command::Report => run::cmd_report(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match load_config(&cli) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_validation() { 2 } else { 1 });
        }
    };
    match dispatch(&cli.command, &mut config) {
        Ok(output) => {
            match config.run.format {
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&output).expect("serializes"));
                }
                OutputFormat::Csv => {
                    println!("{}", output.summary);
                    for path in &output.outputs {
                        println!("wrote {}", path.display());
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
