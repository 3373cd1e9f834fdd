//! Command-line grader: synthesize data, train, grade, evaluate, compare.
//!
//! Exit codes: 0 success, 1 data/model errors (one-line diagnostic on
//! stderr), 2 argument errors. All randomness flows from `--seed`, so two
//! identical invocations produce byte-identical files and output.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use gradescore::corpus::{generate_synthetic, Dataset, SynthSpec};
use gradescore::embeddings::TrainParams;
use gradescore::error::{Error, Result};
use gradescore::evaluation::{compare_models, ModelKind, MODEL_ORDER};
use gradescore::forest::ForestParams;
use gradescore::pipeline::{
    compare_pipeline, evaluate_model, load_model, run_pipeline, save_model, RunConfig,
};
use gradescore::textprep::load_stopwords;

#[derive(Parser)]
#[command(
    name = "gradescore",
    version,
    about = "Automated short-answer grading: TF-IDF, word vectors, and \
             word-vector centroids feeding a seeded random forest."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graded-answer dataset CSV.
    Synth(SynthArgs),
    /// Train one featurization and report its test-fold kappa.
    Train(TrainArgs),
    /// Grade a dataset's answers with a saved model.
    Grade(GradeArgs),
    /// Score a saved model against a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Train all three featurizations on one split and rank them.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Bow,
    Vectors,
    Centroids,
}

impl From<KindArg> for ModelKind {
    fn from(kind: KindArg) -> ModelKind {
        match kind {
            KindArg::Bow => ModelKind::Bow,
            KindArg::Vectors => ModelKind::Vectors,
            KindArg::Centroids => ModelKind::Centroids,
        }
    }
}

fn parse_ratio(s: &str) -> std::result::Result<f64, String> {
    let ratio: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if ratio > 0.0 && ratio < 1.0 {
        Ok(ratio)
    } else {
        Err(format!("ratio {ratio} must be strictly between 0 and 1"))
    }
}

/// Flags shared by the training subcommands.
#[derive(Args)]
struct CommonTrain {
    /// Input dataset CSV with header id,question,answer,score.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for model and report files.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; the split, embeddings, clustering, and forest all
    /// derive their randomness from it.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest attainable mark; scores live on 0..=max-marks.
    #[arg(long, default_value_t = 5)]
    max_marks: u32,
    /// Fraction of records used for training (the rest are held out).
    #[arg(long, default_value_t = 0.7, value_parser = parse_ratio)]
    ratio: f64,
    /// Cluster count for the bag-of-centroids featurization.
    #[arg(long, default_value_t = 9)]
    k: usize,
    /// Word-vector dimensionality.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    /// Skip-gram context window (tokens on each side).
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Skip-gram passes over the corpus.
    #[arg(long, default_value_t = 15)]
    epochs: usize,
    /// Trees in the random forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Minimum corpus frequency for vocabulary membership.
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Let embeddings also learn from the held-out fold's text
    /// (never its scores).
    #[arg(long)]
    transductive: bool,
    /// Stopword file, one lowercase word per line; overrides the
    /// GRADESCORE_STOPWORDS environment variable and the built-in list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl CommonTrain {
    fn config(&self, kind: ModelKind) -> Result<RunConfig> {
        let stopwords = self.stopword_set()?;
        Ok(RunConfig {
            kind,
            max_marks: self.max_marks,
            ratio: self.ratio,
            seed: self.seed,
            k: self.k,
            transductive: self.transductive,
            embed: TrainParams {
                dim: self.dim,
                window: self.window,
                epochs: self.epochs,
                min_count: self.min_count,
                ..TrainParams::default()
            },
            forest: ForestParams {
                n_trees: self.trees,
                ..ForestParams::default()
            },
            stopwords,
        })
    }

    /// Flag beats environment beats built-in list.
    fn stopword_set(&self) -> Result<Option<HashSet<String>>> {
        if let Some(path) = &self.stopwords {
            return Ok(Some(load_stopwords(path)?));
        }
        if let Some(path) = std::env::var_os("GRADESCORE_STOPWORDS") {
            return Ok(Some(load_stopwords(Path::new(&path))?));
        }
        Ok(None)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonTrain,
    /// Which featurization to train.
    #[arg(long, value_enum)]
    model: KindArg,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonTrain,
}

#[derive(Args)]
struct GradeArgs {
    /// Saved model file from `train` or `compare`.
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV of answers to grade (scores may be placeholders).
    #[arg(long)]
    data: PathBuf,
    /// Output CSV of predicted marks (id,question,predicted).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Saved model file from `train` or `compare`.
    #[arg(long)]
    model: PathBuf,
    /// Labeled dataset CSV to score the model against.
    #[arg(long)]
    data: PathBuf,
    /// Optional report CSV (question,model,kappa,mean_kappa,best).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Records to generate.
    #[arg(long, default_value_t = 350)]
    records: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the generator.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest attainable mark.
    #[arg(long, default_value_t = 5)]
    max_marks: u32,
    /// Distinct questions to spread records over.
    #[arg(long, default_value_t = 1)]
    questions: usize,
    /// Keyword concepts per question (each has several synonym forms).
    #[arg(long, default_value_t = 6)]
    keywords: usize,
    /// Filler vocabulary size.
    #[arg(long, default_value_t = 120)]
    filler: usize,
    /// Shortest answer length in tokens.
    #[arg(long, default_value_t = 20)]
    len_min: usize,
    /// Longest answer length in tokens.
    #[arg(long, default_value_t = 60)]
    len_max: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(args) => synth(args),
        Command::Train(args) => train(args),
        Command::Grade(args) => grade(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Compare(args) => compare(args),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        records: args.records,
        max_marks: args.max_marks,
        questions: args.questions,
        keywords_per_question: args.keywords,
        filler_vocab: args.filler,
        min_len: args.len_min,
        max_len: args.len_max,
    };
    let ds = generate_synthetic(&spec, args.seed)?;
    ds.save(&args.out)?;
    println!("wrote {} records to {}", ds.len(), args.out.display());
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let kind = ModelKind::from(args.model);
    let cfg = args.common.config(kind)?;
    let ds = Dataset::load(&args.common.data, cfg.max_marks)?;
    let (model, report) = run_pipeline(&cfg, &ds)?;

    std::fs::create_dir_all(&args.common.out)?;
    let model_path = args.common.out.join(format!("model_{kind}.txt"));
    save_model(&model, &model_path)?;
    let cmp = compare_models(vec![report])?;
    let report_path = args.common.out.join(format!("report_{kind}.csv"));
    cmp.write_csv(&report_path)?;

    print!("{}", cmp.render_table());
    println!("model: {}", model_path.display());
    println!("report: {}", report_path.display());
    Ok(())
}

fn grade(args: GradeArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let ds = Dataset::load(&args.data, model.max_marks)?;
    let file = std::fs::File::create(&args.out).map_err(|e| Error::open(&args.out, e))?;
    let mut wtr = csv::Writer::from_writer(file);
    wtr.write_record(["id", "question", "predicted"])?;
    for record in ds.records() {
        let mark = model.grade(&record.text)?;
        wtr.write_record([&record.id, &record.question_id, &mark.to_string()])?;
    }
    wtr.flush().map_err(Error::Io)?;
    println!("graded {} answers to {}", ds.len(), args.out.display());
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let ds = Dataset::load(&args.data, model.max_marks)?;
    let report = evaluate_model(&model, &ds)?;
    let cmp = compare_models(vec![report])?;
    if let Some(out) = &args.out {
        cmp.write_csv(out)?;
    }
    print!("{}", cmp.render_table());
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let cfg = args.common.config(ModelKind::Bow)?;
    let ds = Dataset::load(&args.common.data, cfg.max_marks)?;
    let (models, cmp) = compare_pipeline(&cfg, &ds)?;

    std::fs::create_dir_all(&args.common.out)?;
    for (model, kind) in models.iter().zip(MODEL_ORDER) {
        save_model(model, &args.common.out.join(format!("model_{kind}.txt")))?;
    }
    cmp.write_csv(&args.common.out.join("comparison.csv"))?;
    cmp.write_plot_csvs(&args.common.out)?;
    print!("{}", cmp.render_table());
    Ok(())
}
