//! The `bookmaker` command line.
//!
//! Exit codes: 0 on success, 2 on input or usage errors, 3 when a result is
//! partial because some measure was undefined.

mod report;

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bookmaker::boost::{boost_train, emit_trace, BoostConfig, Ensemble, TraceFormat, UndefinedPolicy};
use bookmaker::contingency::ContingencyTable;
use bookmaker::dataset::{self, CsvOptions, LabelColumn, LabeledDataset, SyntheticKind};
use bookmaker::fmt::g17;
use bookmaker::linear::{self, Informatron, Rule, RuleConfig};
use bookmaker::metrics::{MetricReport, Measure};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

pub use report::{ClassRow, MetricsReport, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDEFINED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bookmaker::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(bookmaker::Error::UndefinedMeasure { .. }) => EXIT_UNDEFINED,
            _ => EXIT_INPUT,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bookmaker", version, about = "Chance-corrected evaluation, linear learners and boosting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predicted labels against gold labels.
    Eval(EvalArgs),
    /// Train a linear learner or the informatron on a train/test split.
    Train(TrainArgs),
    /// Boost decision stumps with a chosen goodness measure.
    Boost(BoostArgs),
    /// Boost with every measure on one split and emit test accuracy per round.
    Compare(CompareArgs),
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// One gold label per line (or CSV with the label first).
    #[arg(long)]
    pub gold: PathBuf,
    /// One predicted label per line, aligned with --gold.
    #[arg(long)]
    pub pred: PathBuf,
    /// Comma-separated class order; labels outside it are an error.
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV dataset, one instance per row.
    #[arg(long)]
    pub data: PathBuf,
    /// The first row is a header.
    #[arg(long)]
    pub header: bool,
    /// Label position: `first`, `last` or a 0-based column index.
    #[arg(long, default_value = "first", value_parser = parse_label_column)]
    pub label_column: LabelColumn,
    /// Fraction of instances used for training.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    /// Preserve class proportions in the split.
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, env = "BOOKMAKER_SEED", default_value_t = 0)]
    pub seed: u64,
}

fn parse_label_column(s: &str) -> std::result::Result<LabelColumn, String> {
    match s {
        "first" => Ok(LabelColumn::First),
        "last" => Ok(LabelColumn::Last),
        other => other
            .parse()
            .map(LabelColumn::Index)
            .map_err(|_| format!("expected first, last or a column index, got {other:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Hebb,
    Perceptron,
    Margin,
    Softmargin,
    Winnow,
    Winnow2,
    Informatron,
}

impl RuleName {
    fn linear(self) -> Option<Rule> {
        match self {
            RuleName::Hebb => Some(Rule::Hebb),
            RuleName::Perceptron => Some(Rule::Perceptron),
            RuleName::Margin => Some(Rule::Margin),
            RuleName::Softmargin => Some(Rule::SoftMargin),
            RuleName::Winnow => Some(Rule::Winnow),
            RuleName::Winnow2 => Some(Rule::Winnow2),
            RuleName::Informatron => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub rule: RuleName,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    /// Learning rate λ in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    /// Margin γ for the margin rules.
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    /// Promotion factor α for the Winnow rules.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Smoothing for the informatron; 0 is strict.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Disable the constant-1 bias input.
    #[arg(long)]
    pub no_bias: bool,
    /// Where to write the trained model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Abort,
    Stop,
}

#[derive(Debug, Args)]
pub struct BoostArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "informedness", value_parser = parse_measure)]
    pub measure: Measure,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    /// Fit each stump to a weighted resample instead of the weights.
    #[arg(long)]
    pub resample: bool,
    /// What to do when the measure is undefined on a round.
    #[arg(long, value_enum, default_value = "abort")]
    pub on_undefined: Policy,
    /// Write the per-round trace here; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub ensemble_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn parse_measure(s: &str) -> std::result::Result<Measure, String> {
    s.parse().map_err(|e: bookmaker::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub rounds: u64,
    #[arg(long)]
    pub resample: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// 26 balanced classes, 16 integer features in 0..=15.
    Letter,
    Blobs,
    Disjunction,
    Planted,
    Independence,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, env = "BOOKMAKER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Boost(a) => cmd_boost(a, out, err),
        Command::Compare(a) => cmd_compare(a, out, err),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').next().unwrap_or("").trim().to_string())
        .collect())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn completion(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_UNDEFINED
    }
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let gold = read_labels(&args.gold)?;
    let pred = read_labels(&args.pred)?;
    if gold.len() != pred.len() {
        return Err(bookmaker::Error::LengthMismatch {
            expected: gold.len(),
            found: pred.len(),
        }
        .into());
    }
    let mut names: Vec<String> = args.classes.clone().unwrap_or_default();
    let mut index: HashMap<String, usize> = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let fixed = args.classes.is_some();
    let mut encode = |labels: &[String]| -> Result<Vec<usize>> {
        labels
            .iter()
            .enumerate()
            .map(|(row, label)| match index.get(label) {
                Some(&c) => Ok(c),
                None if fixed => Err(bookmaker::Error::UnknownLabel {
                    row: row + 1,
                    label: label.clone(),
                }
                .into()),
                None => {
                    names.push(label.clone());
                    index.insert(label.clone(), names.len() - 1);
                    Ok(names.len() - 1)
                }
            })
            .collect()
    };
    let g = encode(&gold)?;
    let p = encode(&pred)?;
    let table = ContingencyTable::from_labels(&g, &p, names.len())?;
    let report = MetricsReport::new(&MetricReport::new(&table, None), &names);
    let text = match args.format {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
        Format::Table => report.to_table(),
    };
    emit(out, &text)?;
    Ok(completion(report.is_complete()))
}

fn load_split(args: &DataArgs) -> Result<(LabeledDataset, LabeledDataset)> {
    let options = CsvOptions {
        has_header: args.header,
        label_column: args.label_column,
        class_order: None,
    };
    let data = dataset::load_csv(&args.data, &options)?;
    Ok(dataset::split(&data, args.split, args.seed, args.stratified)?)
}

fn evaluate(data: &LabeledDataset, predictions: &[usize]) -> Result<MetricsReport> {
    let table = ContingencyTable::from_labels(data.y(), predictions, data.k())?;
    Ok(MetricsReport::new(&MetricReport::new(&table, None), data.class_names()))
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    rule: &'a str,
    epoch_errors: Option<Vec<usize>>,
    train: MetricsReport,
    test: MetricsReport,
    model_path: Option<String>,
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> bookmaker::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write(&mut w)?;
    w.flush().map_err(io_err(path))
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let (train, test) = load_split(&args.data)?;
    let rows = |d: &LabeledDataset| -> Vec<Vec<f64>> { d.rows().map(|(r, _)| r.to_vec()).collect() };
    let (train_pred, test_pred, epoch_errors, rule_name) = match args.rule.linear() {
        Some(rule) => {
            let mut config = RuleConfig::new(rule)
                .epochs(args.epochs as usize)
                .seed(args.data.seed)
                .lr(args.lr)
                .margin(args.margin)
                .promotion(args.alpha);
            if args.no_bias {
                config = config.bias_feature(false);
            }
            let outcome = linear::train(&train, &config)?;
            let predict = |d: &LabeledDataset| -> bookmaker::Result<Vec<usize>> {
                rows(d).iter().map(|x| outcome.model.predict(x)).collect()
            };
            let predictions = (predict(&train)?, predict(&test)?);
            if let Some(path) = &args.model_out {
                write_file(path, |w| outcome.model.write_to(w))?;
            }
            (predictions.0, predictions.1, Some(outcome.epoch_errors), rule.name())
        }
        None => {
            let model = Informatron::fit(&train, args.epsilon)?;
            let predict = |d: &LabeledDataset| -> bookmaker::Result<Vec<usize>> {
                rows(d).iter().map(|x| model.predict_row(x)).collect()
            };
            let predictions = (predict(&train)?, predict(&test)?);
            if let Some(path) = &args.model_out {
                write_file(path, |w| model.write_to(w))?;
            }
            (predictions.0, predictions.1, None, "informatron")
        }
    };
    let summary = TrainSummary {
        rule: rule_name,
        epoch_errors,
        train: evaluate(&train, &train_pred)?,
        test: evaluate(&test, &test_pred)?,
        model_path: args.model_out.as_ref().map(|p| p.display().to_string()),
    };
    let complete = summary.train.is_complete() && summary.test.is_complete();
    let text = match args.format {
        Format::Json => json(&summary),
        Format::Csv => summary.test.to_csv(),
        Format::Table => format!("train\n{}\ntest\n{}", summary.train.to_table(), summary.test.to_table()),
    };
    emit(out, &text)?;
    Ok(completion(complete))
}

#[derive(Serialize)]
struct BoostSummary {
    measure: Measure,
    rounds_run: usize,
    members: usize,
    stop: String,
    train_accuracy: f64,
    test: MetricsReport,
}

fn boost_config(measure: Measure, rounds: u64, resample: bool, seed: u64, policy: Policy) -> BoostConfig {
    BoostConfig::new(measure)
        .rounds(rounds as usize)
        .resample(resample)
        .seed(seed)
        .on_undefined(match policy {
            Policy::Abort => UndefinedPolicy::Abort,
            Policy::Stop => UndefinedPolicy::Stop,
        })
}

fn accuracy(ensemble: &Ensemble, data: &LabeledDataset) -> Result<(Vec<usize>, f64)> {
    let predictions = ensemble.predict_all(data)?;
    let correct = predictions.iter().zip(data.y()).filter(|(p, y)| p == y).count();
    Ok((predictions, correct as f64 / data.n() as f64))
}

pub fn cmd_boost(args: &BoostArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (train, test) = load_split(&args.data)?;
    let config = boost_config(args.measure, args.rounds, args.resample, args.data.seed, args.on_undefined);
    let (ensemble, trace) = boost_train(&train, &config, Some(&test))?;
    if let Some(path) = &args.trace {
        let format = if path.extension().is_some_and(|e| e == "json") {
            TraceFormat::Json
        } else {
            TraceFormat::Csv
        };
        fs::write(path, emit_trace(&trace, format)).map_err(io_err(path))?;
    }
    if let Some(path) = &args.ensemble_out {
        write_file(path, |w| ensemble.write_to(w))?;
    }
    let (_, train_accuracy) = accuracy(&ensemble, &train)?;
    let (test_pred, _) = accuracy(&ensemble, &test)?;
    let summary = BoostSummary {
        measure: args.measure,
        rounds_run: trace.rounds.len(),
        members: ensemble.members().len(),
        stop: format!("{:?}", trace.stop).to_lowercase(),
        train_accuracy,
        test: evaluate(&test, &test_pred)?,
    };
    if ensemble.fallback().is_some() {
        let _ = writeln!(err, "note: no round beat chance; the ensemble is the first stump alone");
    }
    let text = match args.format {
        Format::Json => json(&summary),
        Format::Csv => summary.test.to_csv(),
        Format::Table => format!(
            "{} rounds, {} members, stop: {}, train accuracy {:.4}\n{}",
            summary.rounds_run,
            summary.members,
            summary.stop,
            summary.train_accuracy,
            summary.test.to_table()
        ),
    };
    emit(out, &text)?;
    Ok(completion(summary.test.is_complete()))
}

/// One measure's curve, or the error that aborted it.
type Curve = std::result::Result<Vec<(usize, f64)>, bookmaker::Error>;

fn sweep(train: &LabeledDataset, test: &LabeledDataset, args: &CompareArgs) -> Vec<(Measure, Curve)> {
    let run = |measure: Measure| -> (Measure, Curve) {
        let config = boost_config(measure, args.rounds, args.resample, args.data.seed, Policy::Abort);
        let curve = boost_train(train, &config, Some(test)).map(|(_, trace)| {
            trace
                .rounds
                .iter()
                .map(|r| (r.round, r.test_acc.expect("test set given")))
                .collect()
        });
        (measure, curve)
    };
    let mut results: Vec<(Measure, Curve)> = Measure::ALL.par_iter().map(|&m| run(m)).collect();
    results.sort_by_key(|(m, _)| *m);
    results
}

/// CSV `measure,round,test_accuracy`, sorted by measure then round. An
/// aborted measure contributes one row at its failing round with `nan`.
pub fn compare_csv(results: &[(Measure, Curve)]) -> String {
    let mut rows: Vec<(Measure, usize, String)> = Vec::new();
    for (measure, curve) in results {
        match curve {
            Ok(points) => rows.extend(points.iter().map(|&(r, acc)| (*measure, r, g17(acc)))),
            Err(bookmaker::Error::UndefinedMeasure { round, .. }) => rows.push((*measure, *round, "nan".into())),
            Err(_) => rows.push((*measure, 0, "nan".into())),
        }
    }
    rows.sort_by_key(|(m, r, _)| (*m, *r));
    let mut out = String::from("measure,round,test_accuracy\n");
    for (m, r, acc) in rows {
        out.push_str(&format!("{m},{r},{acc}\n"));
    }
    out
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (train, test) = load_split(&args.data)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results = pool.install(|| sweep(&train, &test, args));
    let csv = compare_csv(&results);
    let mut complete = true;
    for (measure, curve) in &results {
        if let Err(e) = curve {
            complete = false;
            let _ = writeln!(err, "{measure}: {e}");
        }
    }
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(io_err(path))?,
        None => emit(out, &csv)?,
    }
    Ok(completion(complete))
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let kind = match args.kind {
        GenKind::Letter => SyntheticKind::PrototypeClasses(dataset::PrototypeClasses {
            n: args.n.unwrap_or(20_000),
            ..dataset::PrototypeClasses::letter_surrogate()
        }),
        GenKind::Blobs => SyntheticKind::SeparableBlobs(dataset::SeparableBlobs {
            n: args.n.unwrap_or(200),
            d: 2,
            margin: 1.0,
        }),
        GenKind::Disjunction => SyntheticKind::KOfNDisjunction(dataset::KOfNDisjunction {
            n: args.n.unwrap_or(5000),
            attributes: 100,
            relevant: 3,
            p_active: 0.05,
        }),
        GenKind::Planted => SyntheticKind::PlantedAssociation(dataset::PlantedAssociation {
            n: args.n.unwrap_or(3000),
            k: 3,
            features_per_class: 4,
            p_hit: 0.9,
            p_miss: 0.1,
        }),
        GenKind::Independence => SyntheticKind::Independence(dataset::Independence {
            n: args.n.unwrap_or(10_000),
            k: 2,
            d: 8,
        }),
    };
    let data = dataset::gen_synthetic(&kind, args.seed)?;
    write_file(&args.out, |w| dataset::write_csv(&data, w))?;
    Ok(EXIT_OK)
}

/// Reads an ensemble written by `boost --ensemble-out`.
pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(Ensemble::read_from(BufReader::new(file))?)
}
