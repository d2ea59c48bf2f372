//! Command-line pipeline for the retrieval engine: build an index, produce
//! BM25 and paragraph-vector runs over the test queries, and score run files
//! against relevance judgments.
//!
//! Progress goes to stderr; results (corpus statistics, evaluation reports)
//! go to stdout. The exit status is 0 exactly when the requested artifact was
//! fully produced.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lexir::bm25::{Bm25Params, InvertedIndex};
use lexir::corpus::{
    load_case_corpus, load_queries, load_split, load_statutes, Corpus, DocKind, SituationQuery,
    Split,
};
use lexir::eval::{evaluate_run, parse_qrels, parse_run, write_run, RankedRun};
use lexir::pvdm::{rank_by_cosine, train, InferParams, PvDmConfig, PvDmModel};
use lexir::text::{LemmaDictionary, NormalizerConfig, StopwordList};

#[derive(Parser)]
#[command(
    name = "lexir",
    version,
    about = "Legal-document retrieval: BM25 and paragraph-vector runs with TREC-style evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an inverted index over a case or statute corpus
    Index(IndexArgs),
    /// Write a BM25 run over the test queries against a saved index
    SearchBm25(SearchBm25Args),
    /// Train PV-DM paragraph vectors over cases plus queries
    TrainD2v(TrainD2vArgs),
    /// Write a cosine-similarity run over the test queries from a trained model
    SearchD2v(SearchD2vArgs),
    /// Score a run file against qrels
    Eval(EvalArgs),
}

/// Text-pipeline options shared by every corpus-reading subcommand. The
/// bundled English stopword list is used unless one is supplied.
#[derive(Args)]
struct PipelineArgs {
    /// Stopword list file, one token per line ('#' comments ignored)
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,
    /// Lemma dictionary file, two whitespace-separated tokens per line
    #[arg(long, value_name = "FILE")]
    lemmas: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> Result<NormalizerConfig> {
        let mut config = NormalizerConfig::default();
        if let Some(path) = &self.stopwords {
            config.stopwords = StopwordList::from_file(path)?;
        }
        if let Some(path) = &self.lemmas {
            config.lemmas = Some(LemmaDictionary::from_file(path)?);
        }
        Ok(config)
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct IndexArgs {
    /// Directory of <label>.txt prior-case documents
    #[arg(long, value_name = "DIR", group = "source")]
    cases: Option<PathBuf>,
    /// Statute file (label||title||description) or directory of <label>.txt
    #[arg(long, value_name = "PATH", group = "source")]
    statutes: Option<PathBuf>,
    /// Output path for the index
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct QuerySelectionArgs {
    /// Query file, one label||text per line
    #[arg(long, value_name = "FILE")]
    queries: PathBuf,
    /// Split file naming the train queries; without it every query is test
    #[arg(long, value_name = "FILE")]
    split: Option<PathBuf>,
    /// Search the train queries too
    #[arg(long)]
    include_train: bool,
}

impl QuerySelectionArgs {
    fn load(&self, config: &NormalizerConfig) -> Result<Vec<SituationQuery>> {
        let train_labels = match &self.split {
            Some(path) => load_split(path)?,
            None => BTreeSet::new(),
        };
        let queries = load_queries(&self.queries, config, &train_labels)?;
        let selected: Vec<SituationQuery> = queries
            .into_iter()
            .filter(|q| self.include_train || q.split == Split::Test)
            .collect();
        if selected.is_empty() {
            bail!("no queries selected from {}", self.queries.display());
        }
        Ok(selected)
    }
}

#[derive(Args)]
struct SearchBm25Args {
    /// Saved index to search
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    #[command(flatten)]
    selection: QuerySelectionArgs,
    /// Output run file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Run tag written in the last column
    #[arg(long, default_value = "bm25")]
    tag: String,
    /// Ranking depth per query
    #[arg(long, default_value_t = 100)]
    cutoff: usize,
    /// Term-frequency saturation
    #[arg(long, default_value_t = 1.2)]
    k1: f64,
    /// Length-normalization strength, in [0, 1]
    #[arg(long, default_value_t = 0.75)]
    b: f64,
    /// Do not pad rankings with zero-score documents up to the cutoff
    #[arg(long)]
    no_fill: bool,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct TrainD2vArgs {
    /// Directory of <label>.txt prior-case documents
    #[arg(long, value_name = "DIR")]
    cases: PathBuf,
    /// Query file; queries are part of the training corpus
    #[arg(long, value_name = "FILE")]
    queries: PathBuf,
    /// Output path for the model
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Word/paragraph vector dimension
    #[arg(long, default_value_t = 150)]
    dim: usize,
    /// Number of preceding context tokens
    #[arg(long, default_value_t = 20)]
    window: usize,
    /// Passes over the training examples
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Initial learning rate (decays linearly to 1e-4)
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    /// Negative samples per prediction
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    /// Minimum corpus frequency for vocabulary terms
    #[arg(long, default_value_t = 2)]
    min_count: u64,
    /// Seed for initialization, shuffling, and negative sampling
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SearchD2vArgs {
    /// Trained model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[command(flatten)]
    selection: QuerySelectionArgs,
    /// Output run file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Run tag written in the last column
    #[arg(long, default_value = "d2v")]
    tag: String,
    /// Ranking depth per query
    #[arg(long, default_value_t = 100)]
    cutoff: usize,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Run file to score
    #[arg(long, value_name = "FILE")]
    run: PathBuf,
    /// Relevance judgments
    #[arg(long, value_name = "FILE")]
    qrels: PathBuf,
    /// Also write the machine-readable report here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(args) => cmd_index(args),
        Command::SearchBm25(args) => cmd_search_bm25(args),
        Command::TrainD2v(args) => cmd_train_d2v(args),
        Command::SearchD2v(args) => cmd_search_d2v(args),
        Command::Eval(args) => cmd_eval(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let config = args.pipeline.config()?;
    let corpus = load_source(&args.cases, &args.statutes, &config)?;
    let stats = corpus.stats();
    let index = InvertedIndex::build(&corpus)?;
    index.save(&args.index)?;
    println!(
        "docs={} terms={} vocab={} avgdl={:.2}",
        stats.documents,
        stats.total_terms,
        stats.vocabulary,
        index.avgdl()
    );
    eprintln!("wrote index to {}", args.index.display());
    Ok(())
}

fn load_source(
    cases: &Option<PathBuf>,
    statutes: &Option<PathBuf>,
    config: &NormalizerConfig,
) -> Result<Corpus> {
    match (cases, statutes) {
        (Some(dir), None) => Ok(load_case_corpus(dir, config)?),
        (None, Some(path)) => Ok(load_statutes(path, config)?),
        _ => bail!("exactly one of --cases or --statutes is required"),
    }
}

fn cmd_search_bm25(args: SearchBm25Args) -> Result<()> {
    let config = args.pipeline.config()?;
    let index = InvertedIndex::load(&args.index)
        .with_context(|| format!("loading index {}", args.index.display()))?;
    let queries = args.selection.load(&config)?;
    let params = Bm25Params::new(args.k1, args.b)?;
    let mut run = RankedRun::new(&args.tag);
    for query in &queries {
        let ranked = index.rank(&query.normalized, &params, args.cutoff, !args.no_fill)?;
        run.add_ranking(&query.id.label, &ranked)?;
    }
    write_run(&run, &args.out)?;
    eprintln!(
        "wrote bm25 run ({} queries, cutoff {}) to {}",
        queries.len(),
        args.cutoff,
        args.out.display()
    );
    Ok(())
}

fn cmd_train_d2v(args: TrainD2vArgs) -> Result<()> {
    let config = args.pipeline.config()?;
    let pv_config = PvDmConfig {
        dim: args.dim,
        window: args.window,
        epochs: args.epochs,
        learning_rate: args.lr,
        negatives: args.negatives,
        min_count: args.min_count,
        seed: args.seed,
    };
    eprintln!(
        "training pv-dm: dim={} window={} epochs={} lr={} negatives={} min_count={} seed={}",
        pv_config.dim,
        pv_config.window,
        pv_config.epochs,
        pv_config.learning_rate,
        pv_config.negatives,
        pv_config.min_count,
        pv_config.seed
    );

    let cases = load_case_corpus(&args.cases, &config)?;
    let queries = load_queries(&args.queries, &config, &BTreeSet::new())?;
    let mut documents = cases.documents().to_vec();
    documents.extend(queries.into_iter().map(|q| q.normalized));
    let corpus = Corpus::from_documents(documents)?;
    eprintln!(
        "training corpus: {} documents ({} cases)",
        corpus.len(),
        cases.len()
    );

    let (model, stats) = train(&corpus, &pv_config)?;
    for (epoch, loss) in stats.epoch_mean_loss.iter().enumerate() {
        eprintln!(
            "epoch {}/{} mean_loss={loss:.6}",
            epoch + 1,
            pv_config.epochs
        );
    }
    model.save(&args.model)?;
    eprintln!("wrote model to {}", args.model.display());
    Ok(())
}

fn cmd_search_d2v(args: SearchD2vArgs) -> Result<()> {
    let config = args.pipeline.config()?;
    let model = PvDmModel::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let queries = args.selection.load(&config)?;
    let mut run = RankedRun::new(&args.tag);
    for query in &queries {
        // Queries trained alongside the cases already have a vector; anything
        // else is inferred with frozen shared parameters.
        let vector = match model.paragraph_vector_by_id(&query.id) {
            Some(v) => v.to_vec(),
            None => model
                .infer(&query.normalized, &InferParams::default())
                .with_context(|| format!("inferring vector for query {}", query.id))?,
        };
        let candidates = model
            .paragraphs()
            .iter()
            .enumerate()
            .filter(|(_, id)| id.kind == DocKind::Case)
            .map(|(p, id)| (id, model.paragraph_vector(p)));
        let ranked = rank_by_cosine(&vector, candidates, args.cutoff);
        run.add_ranking(&query.id.label, &ranked)?;
    }
    write_run(&run, &args.out)?;
    eprintln!(
        "wrote d2v run ({} queries, cutoff {}) to {}",
        queries.len(),
        args.cutoff,
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let run = parse_run(&args.run)?;
    let qrels = parse_qrels(&args.qrels)?;
    let report = evaluate_run(&run, &qrels)?;
    print!("{}", report.to_table());
    print!("{}", report.to_machine());
    if let Some(path) = &args.out {
        write_report(path, &report.to_machine())?;
        eprintln!("wrote machine report to {}", path.display());
    }
    Ok(())
}

fn write_report(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
