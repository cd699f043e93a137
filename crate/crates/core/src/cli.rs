//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, malformed or
//! unknown configuration), 2 for data errors (missing or malformed input
//! files, contract violations, divergence).
//!
//! Configuration precedence: command-line flag, then `--config` file, then the
//! built-in default.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{self, build_model, evaluate, predict, Model, ModelConfig, TrainConfig};
use crate::dataset::{self, extract_epochs, split_train_test, Group, LabeledEpoch, SplitConfig, NUM_CLASSES};
use crate::error::Error;
use crate::nn::Checkpoint;
use crate::signal::{self, Axis};
use crate::smoothness::{
    self, assess_recording, cohort_compare, cohort_stats, format_sig, improvement_flags, render_comparison,
    render_sessions, CohortStats, Measure, Report, SessionTable, SmoothnessRecord, TableFixture,
};
use crate::synth;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "neurorehab",
    version,
    about = "Movement classification and jerk-based smoothness assessment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic dataset.
    Synth(SynthArgs),
    /// Train the classifier; writes a checkpoint, the training log and a confusion matrix.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the held-out split of a dataset.
    Eval(EvalArgs),
    /// Label the epochs of one recording.
    Classify(ClassifyArgs),
    /// Compute smoothness statistics, cohort comparisons and session improvement.
    Assess(AssessArgs),
    /// Render table-style reports from fixtures or assessed records.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Labeled segments per movement class.
    #[arg(long, default_value_t = 200)]
    pub n_per_class: usize,
    /// Probability that a generated recording comes from a healthy subject.
    #[arg(long, default_value_t = 0.5)]
    pub healthy_fraction: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings shared by `train` and `eval`; each overrides the config file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// key=value file overriding model and training defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for the split, the initial weights and training.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of each class used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for model.knm, train_log.csv and confusion.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Overrides,
    /// Epoch length W in samples.
    #[arg(long)]
    pub window: Option<usize>,
    /// Number of training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Maximum circular shift as a fraction of W.
    #[arg(long)]
    pub augment_max_frac: Option<f64>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub common: Overrides,
    /// Write the confusion matrix CSV here.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifyMode {
    /// One epoch per annotated key movement.
    Segments,
    /// Sliding windows over the whole recording.
    Windows,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Samples CSV of the recording; sidecar files are found next to it.
    #[arg(long)]
    pub recording: PathBuf,
    /// What to classify.
    #[arg(long, value_enum, default_value_t = ClassifyMode::Segments)]
    pub mode: ClassifyMode,
    /// Raw window length in samples for `windows` mode (default: the model's W).
    #[arg(long)]
    pub window_len: Option<usize>,
    /// Window stride in samples for `windows` mode (default: half the window).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Write the predictions CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Table fixture CSV (cohort or session table).
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub fixtures: Option<PathBuf>,
    /// Dataset directory with annotated recordings.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Patient id; must match the fixture's patient when both are known.
    #[arg(long)]
    pub patient: Option<String>,
    /// Axis for comparisons and session flags.
    #[arg(long, default_value = "x")]
    pub axis: Axis,
    /// Output directory for CSV and JSON files; stdout gets the CSV otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One or more table fixture CSVs.
    #[arg(long, num_args = 1.., required_unless_present = "records")]
    pub fixtures: Vec<PathBuf>,
    /// records.json written by `assess --data`.
    #[arg(long, conflicts_with = "fixtures")]
    pub records: Option<PathBuf>,
    /// Axis for tables built from records.
    #[arg(long, default_value = "x")]
    pub axis: Axis,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Model, training and split settings after defaults, config file and flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub seed: u64,
}

/// Keys accepted in `--config` files.
pub const CONFIG_KEYS: &[&str] = &[
    "seed",
    "window",
    "conv1_channels",
    "conv1_kernel",
    "conv1_stride",
    "conv2_channels",
    "conv2_kernel",
    "conv2_stride",
    "conv3_channels",
    "conv3_kernel",
    "conv3_stride",
    "conv4_channels",
    "conv4_kernel",
    "conv4_stride",
    "pool1_kernel",
    "pool1_stride",
    "pool2_kernel",
    "pool2_stride",
    "conv_dropout",
    "lstm_hidden",
    "lstm_dropout",
    "epochs",
    "batch_size",
    "lr",
    "augment_max_frac",
    "class_weights",
    "train_fraction",
    "stratified",
];

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, String> {
    raw.parse().map_err(|_| format!("invalid value `{raw}` for `{key}`"))
}

impl Settings {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        if let Some(rest) = key.strip_prefix("conv") {
            if let Some((n, field)) = rest.split_once('_') {
                if let Ok(i @ 1..=4) = n.parse::<usize>() {
                    let conv = &mut self.model.convs[i - 1];
                    let slot = match field {
                        "channels" => &mut conv.channels,
                        "kernel" => &mut conv.kernel,
                        "stride" => &mut conv.stride,
                        _ => return Err(format!("unknown config key `{key}`")),
                    };
                    *slot = value(key, raw)?;
                    return Ok(());
                }
            }
        }
        match key {
            "seed" => self.seed = value(key, raw)?,
            "window" => self.model.input_len = value(key, raw)?,
            "pool1_kernel" => self.model.first_pool.kernel = value(key, raw)?,
            "pool1_stride" => self.model.first_pool.stride = value(key, raw)?,
            "pool2_kernel" => self.model.last_pool.kernel = value(key, raw)?,
            "pool2_stride" => self.model.last_pool.stride = value(key, raw)?,
            "conv_dropout" => self.model.conv_dropout = value(key, raw)?,
            "lstm_hidden" => self.model.lstm_hidden = value(key, raw)?,
            "lstm_dropout" => self.model.lstm_dropout = value(key, raw)?,
            "epochs" => self.train.epochs = value(key, raw)?,
            "batch_size" => self.train.batch_size = value(key, raw)?,
            "lr" => self.train.lr = value(key, raw)?,
            "augment_max_frac" => self.train.augment_max_frac = value(key, raw)?,
            "class_weights" => {
                let w: Vec<f64> = raw.split(',').map(|x| value(key, x.trim())).collect::<Result<_, _>>()?;
                if w.len() != NUM_CLASSES {
                    return Err(format!("`class_weights` needs {NUM_CLASSES} values, got {}", w.len()));
                }
                self.train.class_weights = w;
            }
            "train_fraction" => self.split.train_fraction = value(key, raw)?,
            "stratified" => self.split.stratified = value(key, raw)?,
            _ => return Err(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    /// Apply `key=value` lines. `#` starts a comment; blank lines are skipped.
    pub fn apply_config(&mut self, text: &str, name: &str) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: String| format!("{name}:{}: {m}", i + 1);
            let (k, v) =
                line.split_once('=').ok_or_else(|| at(format!("expected key=value, got `{line}`")))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(at(format!("duplicate key `{k}`")));
            }
            self.set(k, v.trim()).map_err(at)?;
        }
        Ok(())
    }

    fn finish(mut self) -> Self {
        self.split.seed = self.seed;
        self.train.seed = self.seed;
        self
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Assess(a) => cmd_assess(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::Data(Error::io(path, e)))
}

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| Failure::Data(Error::io(path, e)))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            Ok(())
        }
    }
}

fn cmd_synth(a: SynthArgs) -> CliResult {
    let recordings = synth::gen_dataset(a.n_per_class, a.healthy_fraction, a.seed)?;
    create_dir(&a.out)?;
    synth::write_dataset(&recordings, &a.out)?;
    let segments: usize = recordings.iter().map(|r| r.annotations.len()).sum();
    println!(
        "wrote {} recordings with {segments} annotated segments to {}",
        recordings.len(),
        a.out.display()
    );
    Ok(())
}

fn settings(common: &Overrides) -> CliResult<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))?;
        s.apply_config(&text, &path.display().to_string()).map_err(Failure::Usage)?;
    }
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(f) = common.train_fraction {
        s.split.train_fraction = f;
    }
    Ok(s)
}

/// Every key-movement segment of every recording in `dir`, resampled to `w`.
pub fn load_epochs(dir: &Path, w: usize) -> crate::Result<Vec<LabeledEpoch>> {
    let recordings = dataset::load_dir(dir)?;
    if recordings.is_empty() {
        return Err(Error::InvalidData(format!("no recordings in {}", dir.display())));
    }
    let mut epochs = Vec::new();
    let mut skipped = 0;
    for r in &recordings {
        let ex = extract_epochs(r, w)?;
        skipped += ex.skipped;
        epochs.extend(ex.epochs);
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} segments shorter than 2 samples");
    }
    Ok(epochs)
}

fn split_cfg_error(e: Error) -> Failure {
    match e {
        Error::Contract(m) => Failure::Data(Error::InvalidData(m)),
        other => other.into(),
    }
}

fn cmd_train(a: TrainArgs) -> CliResult {
    let mut s = settings(&a.common)?;
    if let Some(w) = a.window {
        s.model.input_len = w;
    }
    if let Some(e) = a.epochs {
        s.train.epochs = e;
    }
    if let Some(b) = a.batch_size {
        s.train.batch_size = b;
    }
    if let Some(lr) = a.lr {
        s.train.lr = lr;
    }
    if let Some(f) = a.augment_max_frac {
        s.train.augment_max_frac = f;
    }
    let s = s.finish();
    s.model.validate()?;
    s.train.validate()?;
    check_split(&s.split)?;

    let epochs = load_epochs(&a.data, s.model.input_len)?;
    let (train_set, test_set) = split_train_test(&epochs, &s.split).map_err(split_cfg_error)?;
    let mut model = build_model(&s.model, s.seed)?;
    let total = s.train.epochs;
    let quiet = a.quiet;
    let log = classifier::train_with(&mut model, &train_set, &test_set, &s.train, &mut |e| {
        if !quiet {
            eprintln!(
                "training epoch {}/{total}: loss {:.4} train_acc {:.4} test_acc {:.4}",
                e.epoch + 1,
                e.train_loss,
                e.train_acc,
                e.test_acc
            );
        }
    })?;

    create_dir(&a.out)?;
    model.to_checkpoint().save(&a.out.join("model.knm"))?;
    write_file(&a.out.join("train_log.csv"), log.to_csv())?;
    write_file(&a.out.join("confusion.csv"), log.confusion.to_csv())?;
    println!(
        "trained on {} epochs, tested on {}; test accuracy {:.4}",
        train_set.len(),
        test_set.len(),
        log.final_test_accuracy()
    );
    Ok(())
}

fn check_split(cfg: &SplitConfig) -> CliResult {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Failure::Usage(format!("train fraction must be in (0, 1), got {}", cfg.train_fraction)));
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<Model> {
    Ok(Model::from_checkpoint(Checkpoint::load(path)?)?)
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let mut s = settings(&a.common)?;
    if a.common.seed.is_none() && !config_sets_seed(&a.common)? {
        s.seed = model.seed;
    }
    let s = s.finish();
    check_split(&s.split)?;
    let epochs = load_epochs(&a.data, model.input_len)?;
    let (_, test_set) = split_train_test(&epochs, &s.split).map_err(split_cfg_error)?;
    let ev = evaluate(&model, &test_set)?;
    println!("accuracy: {:.4} ({}/{})", ev.accuracy, ev.confusion.trace(), ev.confusion.total());
    for (i, r) in ev.confusion.recall().iter().enumerate() {
        if let Some(r) = r {
            println!("recall M{}: {:.4}", i + 1, r);
        }
    }
    if let Some(p) = &a.confusion {
        write_file(p, ev.confusion.to_csv())?;
    }
    Ok(())
}

fn config_sets_seed(common: &Overrides) -> CliResult<bool> {
    let Some(path) = &common.config else {
        return Ok(false);
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))?;
    Ok(text.lines().filter_map(|l| l.split('#').next()?.split_once('=')).any(|(k, _)| k.trim() == "seed"))
}

fn cmd_classify(a: ClassifyArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let rec = dataset::parse_recording(&a.recording)?;
    let w = model.input_len;
    let mut segments: Vec<(usize, usize, String)> = Vec::new();
    match a.mode {
        ClassifyMode::Segments => {
            for ann in rec.annotations.iter().filter(|x| x.label.is_key()) {
                segments.push((ann.start, ann.end, ann.label.to_string()));
            }
        }
        ClassifyMode::Windows => {
            let len = a.window_len.unwrap_or(w);
            let stride = a.stride.unwrap_or((len / 2).max(1));
            if len < 2 || stride == 0 {
                return Err(Failure::Usage("window length must be >= 2 and stride >= 1".into()));
            }
            for e in signal::window(&rec.series, len, stride, &rec.id)? {
                let start = e.source.offset;
                let truth = rec
                    .annotations
                    .iter()
                    .find(|x| x.start <= start && start + len <= x.end)
                    .map(|x| x.label.to_string())
                    .unwrap_or_default();
                segments.push((start, start + len, truth));
            }
        }
    }
    let mut csv = String::from("recording,start,end,annotated,label,p_M1,p_M2,p_M3,p_M4\n");
    for (start, end, truth) in segments {
        let seg = rec.series.slice(start, end)?;
        let seg = if seg.len() == w { seg } else { signal::resample(&seg, w)? };
        let epoch = signal::Epoch {
            samples: seg.into_samples(),
            source: signal::EpochSource { recording_id: rec.id.clone(), offset: start },
        };
        let p = predict(&model, &epoch)?;
        let probs: Vec<String> = p.probabilities.iter().map(|x| format_sig(*x)).collect();
        writeln!(csv, "{},{start},{end},{truth},{},{}", rec.id, p.label, probs.join(",")).unwrap();
    }
    emit(a.out.as_deref(), &csv)
}

fn only_axis(stats: &CohortStats, axis: Axis) -> CohortStats {
    stats
        .iter()
        .map(|(m, v)| (*m, v.iter().filter(|(a, _)| **a == axis).map(|(a, s)| (*a, *s)).collect()))
        .collect()
}

fn fixture_report(fx: &TableFixture, patient: Option<&str>, axis: Axis) -> CliResult<(String, Report)> {
    if axis != Axis::X {
        return Err(Failure::Usage("table fixtures only carry axis x".into()));
    }
    if fx.is_cohort_table() {
        if patient.is_some() {
            return Err(Failure::Usage("--patient applies to session tables only".into()));
        }
        let (h, p) = fx.cohort_stats()?;
        let stem = match fx.measure {
            Some(m) => format!("comparison_{}", m.name()),
            None => "comparison".into(),
        };
        return Ok((stem, render_comparison(&cohort_compare(&h, &p)?)));
    }
    let mut table = fx.session_table()?;
    match (patient, &fx.patient) {
        (Some(want), Some(have)) if want != have => {
            return Err(Failure::Data(Error::InvalidData(format!(
                "fixture is for patient {have}, not {want}"
            ))))
        }
        (Some(want), None) => table.patient_id = Some(want.to_string()),
        _ => {}
    }
    let flags = improvement_flags(&table)?;
    let stem = match &table.patient_id {
        Some(id) => format!("sessions_{id}"),
        None => "sessions".into(),
    };
    Ok((stem, render_sessions(&table, &flags)))
}

fn write_report(dir: &Path, stem: &str, r: &Report) -> CliResult {
    write_file(&dir.join(format!("{stem}.csv")), &r.csv)?;
    write_file(&dir.join(format!("{stem}.json")), &r.json)
}

/// Reports computed from assessed records: cohort tables for both measures
/// (when both cohorts cover M1..M4) and one session table per patient.
fn record_reports(
    records: &[SmoothnessRecord],
    axis: Axis,
    patient: Option<&str>,
) -> CliResult<Vec<(String, Report)>> {
    let mut out = Vec::new();
    for measure in [Measure::Jerk, Measure::SquaredJerk] {
        let h = only_axis(&cohort_stats(records, Group::Healthy, measure), axis);
        let p = only_axis(&cohort_stats(records, Group::Patient, measure), axis);
        match cohort_compare(&h, &p) {
            Ok(c) => out.push((format!("comparison_{}", measure.name()), render_comparison(&c))),
            Err(e) => eprintln!("skipping {} cohort comparison: {e}", measure.name()),
        }
    }
    let mut patients: Vec<&str> = records
        .iter()
        .filter(|r| r.group == Group::Patient)
        .map(|r| r.subject_id.as_str())
        .filter(|id| patient.is_none_or(|p| p == *id))
        .collect();
    patients.sort_unstable();
    patients.dedup();
    if let (Some(p), true) = (patient, patients.is_empty()) {
        return Err(Failure::Data(Error::InvalidData(format!("no records for patient {p}"))));
    }
    for id in patients {
        let mine: Vec<SmoothnessRecord> = records.iter().filter(|r| r.subject_id == id).cloned().collect();
        let table = SessionTable::from_records(&mine, axis)?;
        match improvement_flags(&table) {
            Ok(f) => out.push((format!("sessions_{id}"), render_sessions(&table, &f))),
            Err(e) => eprintln!("skipping patient {id}: {e}"),
        }
    }
    Ok(out)
}

fn cmd_assess(a: AssessArgs) -> CliResult {
    if let Some(path) = &a.fixtures {
        let fx = smoothness::load_fixture(path)?;
        let (stem, report) = fixture_report(&fx, a.patient.as_deref(), a.axis)?;
        return match &a.out {
            Some(dir) => {
                create_dir(dir)?;
                write_report(dir, &stem, &report)?;
                println!("wrote {stem}.csv and {stem}.json to {}", dir.display());
                Ok(())
            }
            None => emit(None, &report.csv),
        };
    }
    let dir = a.data.as_ref().expect("clap enforces --fixtures or --data");
    let recordings = dataset::load_dir(dir)?;
    let mut records = Vec::new();
    for r in &recordings {
        records.extend(assess_recording(r)?);
    }
    if records.is_empty() {
        return Err(Failure::Data(Error::InvalidData(format!(
            "no annotated key movements in {}",
            dir.display()
        ))));
    }
    let reports = record_reports(&records, a.axis, a.patient.as_deref())?;
    match &a.out {
        Some(out) => {
            create_dir(out)?;
            let json = serde_json::to_string_pretty(&records).expect("records serialize");
            write_file(&out.join("records.json"), json + "\n")?;
            for (stem, r) in &reports {
                write_report(out, stem, r)?;
            }
            println!(
                "assessed {} segments; wrote {} reports to {}",
                records.len(),
                reports.len(),
                out.display()
            );
        }
        None => {
            for (stem, r) in &reports {
                println!("# {stem}");
                print!("{}", r.csv);
            }
        }
    }
    Ok(())
}

/// Align the columns of a CSV document.
fn text_table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> =
            r.iter()
                .enumerate()
                .map(|(i, s)| {
                    if i == 0 {
                        format!("{s:<w$}", w = widths[i])
                    } else {
                        format!("{s:>w$}", w = widths[i])
                    }
                })
                .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cmd_report(a: ReportArgs) -> CliResult {
    let reports: Vec<(String, Report)> = match &a.records {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))?;
            let records: Vec<SmoothnessRecord> = serde_json::from_str(&text).map_err(|e| {
                Failure::Data(Error::parse(
                    path.display().to_string(),
                    e.line() as u64,
                    "records",
                    e.to_string(),
                ))
            })?;
            record_reports(&records, a.axis, None)?
        }
        None => a
            .fixtures
            .iter()
            .map(|p| {
                let fx = smoothness::load_fixture(p)?;
                fixture_report(&fx, None, a.axis)
            })
            .collect::<CliResult<_>>()?,
    };
    let mut text = String::new();
    match a.format {
        Format::Text => {
            for (i, (stem, r)) in reports.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                writeln!(text, "{stem}").unwrap();
                text.push_str(&text_table(&r.csv));
            }
        }
        Format::Csv => {
            for (stem, r) in &reports {
                if reports.len() > 1 {
                    writeln!(text, "# {stem}").unwrap();
                }
                text.push_str(&r.csv);
            }
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = reports
                .iter()
                .map(|(stem, r)| (stem.clone(), serde_json::from_str(&r.json).expect("rendered JSON parses")))
                .collect();
            text = serde_json::to_string_pretty(&map).unwrap() + "\n";
        }
    }
    emit(a.out.as_deref(), &text)
}
