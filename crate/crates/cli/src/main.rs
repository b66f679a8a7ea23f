//! `reclab`: train, test, recommend and benchmark from the command line.
//!
//! Exit status is 0 on success, 1 for runtime or data errors and 2 for
//! usage or configuration errors.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reclab::benchmark::{run_benchmark, BenchmarkOptions, DEFAULT_TOP_N};
use reclab::eval::{csv_string, timed, timing_sweep, write_csv, CSV_HEADER};
use reclab::io::{parse_ratings, render_recommendations, write_predictions, write_recommendations};
use reclab::{
    load_model, save_model, train, Algorithm, DataFileSpec, Error, FactorizationConfig,
    MonotonicClock, OutputFormat, RatingStore, TrainParams, TrainSource,
};

#[derive(Parser)]
#[command(
    name = "reclab",
    version,
    about = "Collaborative-filtering recommenders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and save it.
    Train(TrainArgs),
    /// Score a saved model against a test file.
    Test(TestArgs),
    /// Produce a top-N list for one user.
    Recommend(RecommendArgs),
    /// Train and test several algorithms on one split.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Field delimiter: a single character, or `tab`.
    #[arg(long, default_value = "tab", value_parser = parse_delimiter)]
    delimiter: char,
    /// Skip the first line of every data file.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 0)]
    user_col: usize,
    #[arg(long, default_value_t = 1)]
    item_col: usize,
    #[arg(long, default_value_t = 2)]
    rating_col: usize,
}

impl DataArgs {
    fn spec(&self) -> DataFileSpec {
        DataFileSpec {
            delimiter: self.delimiter,
            has_header: self.header,
            user_col: self.user_col,
            item_col: self.item_col,
            rating_col: self.rating_col,
        }
    }
}

fn parse_delimiter(s: &str) -> Result<char, String> {
    match s {
        "tab" | "\\t" => Ok('\t'),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(format!("expected a single character, got {s:?}")),
            }
        }
    }
}

#[derive(Args, Clone)]
struct HyperArgs {
    /// Neighborhood size for userknn/itemknn.
    #[arg(long, default_value_t = reclab::neighborhood::DEFAULT_K, value_parser = parse_positive)]
    k: usize,
    /// Latent factors for funksvd.
    #[arg(long, default_value_t = 100, value_parser = parse_positive)]
    factors: usize,
    /// Training epochs for funksvd.
    #[arg(long, default_value_t = 100, value_parser = parse_positive)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.01)]
    learn_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    regularization: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Drop the user and item bias terms from funksvd.
    #[arg(long)]
    no_biases: bool,
}

impl HyperArgs {
    fn params(&self) -> Result<TrainParams, Error> {
        let factorization = FactorizationConfig {
            factors: self.factors,
            max_iter: self.max_iter,
            learn_rate: self.learn_rate,
            regularization: self.regularization,
            seed: self.seed,
            use_biases: !self.no_biases,
        };
        factorization.validate()?;
        Ok(TrainParams {
            k: self.k,
            factorization,
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Training ratings.
    #[arg(long)]
    train: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    model: PathBuf,
    /// Test ratings.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Write per-pair predictions here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "txt", value_parser = parse_format)]
    format: OutputFormat,
    /// Append a benchmark csv row to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    user: String,
    #[arg(long, default_value_t = 10, value_parser = parse_positive)]
    top_n: usize,
    /// Allow items the user already rated.
    #[arg(long)]
    include_rated: bool,
    /// Training ratings used to find the user's rated items (defaults to the
    /// file recorded in the model).
    #[arg(long)]
    train: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    /// Write the list here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated subset of algorithms (default: all seven).
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algos: Vec<Algorithm>,
    /// Benchmark csv destination (default: standard output).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Factor counts for an extra funksvd timing sweep, ascending.
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    factor_grid: Vec<usize>,
    /// Timing sweep csv destination (default: standard output).
    #[arg(long)]
    timing_csv: Option<PathBuf>,
    /// Keep the trained model files here (default: a temporary directory).
    #[arg(long)]
    model_dir: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Error wrapper that remembers which exit status to use.
struct Failure {
    usage: bool,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            usage: matches!(e, Error::InvalidConfig(_) | Error::InvalidSpec(_)),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            usage: false,
            message: e.to_string(),
        }
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        usage: false,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn load_store(path: &Path, spec: &DataFileSpec) -> Result<RatingStore, Error> {
    RatingStore::build(&parse_ratings(path, spec)?)
}

fn source_of(path: &Path, spec: DataFileSpec) -> TrainSource {
    TrainSource {
        path: path.canonicalize().unwrap_or_else(|_| path.to_owned()),
        spec,
    }
}

fn cmd_train(args: TrainArgs) -> CmdResult {
    let spec = args.data.spec();
    spec.validate()?;
    let params = args.hyper.params()?;
    let store = load_store(&args.train, &spec)?;
    let clock = MonotonicClock::new();
    let (model, elapsed) = timed(&clock, || train(args.algo, &store, &params));
    save_model(&args.model, &model?, Some(&source_of(&args.train, spec)))?;
    println!("train_time_ms: {}", elapsed.as_millis());
    Ok(())
}

fn cmd_test(args: TestArgs) -> CmdResult {
    let spec = args.data.spec();
    spec.validate()?;
    let loaded = load_model(&args.model, None)?;
    let Some(predictor) = loaded.model.predictor() else {
        return Err(runtime(format!(
            "{} models only produce recommendations; use `recommend`",
            loaded.model.algorithm()
        )));
    };
    let test = parse_ratings(&args.test, &spec)?;
    let (report, records) = reclab::eval::evaluate(predictor, &test, &MonotonicClock::new())?;
    println!(
        "MAE: {:.6}  RMSE: {:.6}",
        report.mae.expect("predictors report mae"),
        report.rmse.expect("predictors report rmse")
    );
    println!(
        "n_test: {}  n_fallback: {}  test_time_ms: {}",
        report.n_test, report.n_fallback, report.test_time_ms
    );
    if let Some(out) = &args.out {
        write_predictions(&records, out, args.format)?;
    }
    if let Some(path) = &args.csv {
        let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let csv = csv_string(std::slice::from_ref(&report));
        let body = csv.strip_prefix(&format!("{CSV_HEADER}\n")).unwrap_or(&csv);
        if fresh {
            writeln!(file, "{CSV_HEADER}")?;
        }
        file.write_all(body.as_bytes())?;
    }
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> CmdResult {
    let spec = args.data.spec();
    spec.validate()?;
    let profiles = match &args.train {
        Some(path) => Some(load_store(path, &spec)?),
        None => None,
    };
    let loaded = load_model(&args.model, profiles.as_ref())?;
    let profiles = match profiles {
        Some(p) => Some(p),
        None => match &loaded.train_source {
            Some(source) if source.path.exists() => Some(source.load()?),
            _ => None,
        },
    };
    if profiles.is_none() && !args.include_rated && loaded.model.algorithm() == Algorithm::FunkSvd {
        eprintln!("warning: training ratings unavailable; rated items are not excluded");
    }
    let list = loaded.model.recommend(
        profiles.as_ref(),
        &args.user,
        args.top_n,
        args.include_rated,
    );
    let lists = [list];
    match &args.out {
        Some(out) => write_recommendations(&lists, out, args.format)?,
        None => {
            let text = render_recommendations(&lists, args.format);
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if args.format == OutputFormat::Json {
                writeln!(stdout)?;
            }
        }
    }
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> CmdResult {
    let spec = args.data.spec();
    spec.validate()?;
    let params = args.hyper.params()?;
    if args.factor_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("--factor-grid must be strictly ascending".into()).into());
    }
    let train_store = load_store(&args.train, &spec)?;
    let test = parse_ratings(&args.test, &spec)?;
    let scratch;
    let model_dir = match &args.model_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
            dir.clone()
        }
        None => {
            scratch = tempfile::tempdir()?;
            scratch.path().to_owned()
        }
    };
    let algorithms = if args.algos.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algos.clone()
    };
    let options = BenchmarkOptions {
        algorithms,
        params: params.clone(),
        model_dir,
        train_source: Some(source_of(&args.train, spec)),
        top_n: DEFAULT_TOP_N,
    };
    let clock = MonotonicClock::new();
    let reports = run_benchmark(&train_store, &test, &options, &clock)?;
    emit_csv(args.csv.as_deref(), &reports)?;

    if !args.factor_grid.is_empty() {
        let sweep = timing_sweep(
            &train_store,
            &test,
            &args.factor_grid,
            &params.factorization,
            &clock,
        )?;
        emit_csv(args.timing_csv.as_deref(), &sweep)?;
    }
    Ok(())
}

fn emit_csv(path: Option<&Path>, reports: &[reclab::EvalReport]) -> CmdResult {
    match path {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut out = io::BufWriter::new(file);
            write_csv(&mut out, reports)?;
            out.flush()?;
        }
        None => write_csv(io::stdout().lock(), reports)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Test(a) => cmd_test(a),
        Command::Recommend(a) => cmd_recommend(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}
