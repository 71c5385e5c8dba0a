//! Command-line front end over the probe, classifier, corpus, and bench
//! modules.
//!
//! Exit codes are a stable contract: 0 success, 2 I/O trouble, 3 usage
//! errors, 4 model/feature mismatch, 5 training failure. Data goes to
//! stdout (or `--output`); diagnostics go to stderr.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench;
use crate::classifier::{
    evaluate, features_from_map, suggest_merges, train, DiscriminantModel, FeatureSchema,
    SemanticType, SquaredDistanceMatrix,
};
use crate::corpus::{generate_synthetic, scan_corpus, Manifest, SyntheticKind};
use crate::error::{Error, Result};
use crate::estimators::{ByteWindow, EstimatorId, EstimatorRegistry};
use crate::probe::{
    build_map_with, probe_reader, write_csv, write_json, FilterMode, FilterSpec, OutputMode,
    ProbeConfig, MAX_WINDOW_SIZE,
};

const VERSION: &str = "0.1.0 (model format v1)";

// Window-size ladder for the time-versus-window study.
const BENCH_WINDOW_SIZES: [usize; 4] = [256, 1024, 4096, 16384];

#[derive(Parser, Debug)]
#[command(name = "kmap", version = VERSION)]
#[command(about = "Windowed complexity maps and semantic-type discrimination for byte streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    probe: ProbeFlags,

    /// Output format for structured results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write results to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Estimation worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Args, Debug)]
struct ProbeFlags {
    /// Window size in bytes, 16 to 262144.
    #[arg(long, global = true, default_value_t = 4096)]
    window_size: usize,

    /// Fraction of each 4096-byte block to analyze, in (0, 1].
    #[arg(long, global = true, default_value_t = 1.0)]
    sampling_rate: f64,

    /// Record-structure filter applied before windowing.
    #[arg(long, global = true, value_enum, default_value_t = FilterModeArg::None)]
    filter_mode: FilterModeArg,

    /// Header bytes per record (filter modes only).
    #[arg(long, global = true, default_value_t = 0)]
    header_len: usize,

    /// Record length in bytes (filter modes only).
    #[arg(long, global = true, default_value_t = 0)]
    record_len: usize,

    /// Comma-separated estimator ids.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        default_values_t = ["H".to_string(), "LZ".to_string(), "ZIP".to_string(), "BZ".to_string(), "PSI".to_string()]
    )]
    estimators: Vec<String>,

    /// Whether predictions attach per window or once per stream.
    #[arg(long, global = true, value_enum, default_value_t = OutputModeArg::PerWindowVector)]
    output_mode: OutputModeArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum FilterModeArg {
    None,
    HeaderOnly,
    PayloadOnly,
}

impl From<FilterModeArg> for FilterMode {
    fn from(m: FilterModeArg) -> Self {
        match m {
            FilterModeArg::None => FilterMode::None,
            FilterModeArg::HeaderOnly => FilterMode::HeaderOnly,
            FilterModeArg::PayloadOnly => FilterMode::PayloadOnly,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OutputModeArg {
    PerWindowVector,
    SingleType,
}

impl From<OutputModeArg> for OutputMode {
    fn from(m: OutputModeArg) -> Self {
        match m {
            OutputModeArg::PerWindowVector => OutputMode::PerWindowVector,
            OutputModeArg::SingleType => OutputMode::SingleType,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate complexity of a whole input, one line per estimator.
    Estimate {
        /// Input path, or - for stdin.
        input: Option<PathBuf>,
    },
    /// Probe an input into a windowed complexity map.
    Map {
        /// Input path, or - for stdin.
        input: Option<PathBuf>,
        /// Attach predicted types using this trained model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Copy the input verbatim to stdout; requires --output for the map.
        #[arg(long)]
        passthrough: bool,
        /// Include elapsed-time fields in JSON output.
        #[arg(long)]
        include_timings: bool,
    },
    /// Train a discriminant model from a labeled corpus.
    Train {
        /// Corpus root (one subdirectory per type) or a manifest file.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Where to write the model JSON.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Classify a whole input with a trained model.
    Classify {
        /// Input path, or - for stdin.
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Evaluate a model against a labeled corpus.
    Eval {
        /// Corpus root or manifest file.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Suggest group merges from a model's distance matrix.
    MergeSuggest {
        /// Trained model whose distance matrix to inspect.
        #[arg(long)]
        model: Option<PathBuf>,
        /// A distance matrix JSON file, as an alternative to --model.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Suggest pairs with squared distance below this.
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
    },
    /// Run the measurement studies and emit figure data.
    Bench {
        /// Corpus root or manifest file.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// One of fig09..fig15, or all.
        #[arg(long, default_value = "all")]
        figure: String,
        /// Directory for per-figure CSV files (fig09.csv .. fig15.csv).
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Timing repetitions per measurement, at least 3.
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Generate a synthetic labeled corpus on disk.
    Synth {
        /// Directory to create the corpus in.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Samples per synthetic kind.
        #[arg(long, default_value_t = 20)]
        per_kind: usize,
        /// Bytes per sample.
        #[arg(long, default_value_t = 65536)]
        length: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

// The JSON shape --dump-config emits; reparsing it yields the same value.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct DumpConfig {
    command: String,
    probe: ProbeConfig,
    format: String,
    output: Option<String>,
    jobs: Option<usize>,
}

/// Parses arguments, runs the selected command, and returns the process
/// exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. }
        | Error::EmptyInput(_)
        | Error::UnknownType(_)
        | Error::InvalidFile { .. }
        | Error::CorruptStream(_) => 2,
        Error::UnknownEstimator { .. }
        | Error::InvalidConfig(_)
        | Error::InvalidSpec(_)
        | Error::InvalidLength(_)
        | Error::InvalidSpan(_)
        | Error::Unsupported(_) => 3,
        Error::ModelMismatch(_) => 4,
        Error::InsufficientSamples(_) | Error::DegenerateFeatures(_) => 5,
    }
}

fn parse_estimators(names: &[String]) -> Result<Vec<EstimatorId>> {
    names.iter().map(|n| n.trim().parse()).collect()
}

fn probe_config(flags: &ProbeFlags) -> Result<ProbeConfig> {
    Ok(ProbeConfig {
        filter: FilterSpec {
            mode: flags.filter_mode.into(),
            header_len: flags.header_len,
            record_len: flags.record_len,
        },
        sampling_rate: flags.sampling_rate,
        window_size: flags.window_size,
        estimators: parse_estimators(&flags.estimators)?,
        output_mode: flags.output_mode.into(),
    })
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Estimate { .. } => "estimate",
        Command::Map { .. } => "map",
        Command::Train { .. } => "train",
        Command::Classify { .. } => "classify",
        Command::Eval { .. } => "eval",
        Command::MergeSuggest { .. } => "merge-suggest",
        Command::Bench { .. } => "bench",
        Command::Synth { .. } => "synth",
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = probe_config(&cli.probe)?;
    if cli.dump_config {
        let dump = DumpConfig {
            command: command_name(&cli.command).to_string(),
            probe: config,
            format: match cli.format {
                Format::Csv => "csv".to_string(),
                Format::Json => "json".to_string(),
            },
            output: cli.output.map(|p| p.display().to_string()),
            jobs: cli.jobs,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&dump)
                .map_err(|e| Error::InvalidConfig(format!("config serialization failed: {e}")))?
        );
        return Ok(());
    }
    let jobs = cli.jobs;
    match cli.command {
        Command::Estimate { input } => cmd_estimate(&input, &config),
        Command::Map {
            input,
            model,
            passthrough,
            include_timings,
        } => cmd_map(
            &input,
            model.as_deref(),
            passthrough,
            include_timings,
            &config,
            cli.format,
            cli.output.as_deref(),
            jobs,
        ),
        Command::Train { corpus, model_out } => cmd_train(
            corpus.as_deref(),
            model_out.as_deref(),
            &config,
            cli.output.as_deref(),
            jobs,
        ),
        Command::Classify { input, model } => {
            cmd_classify(&input, model.as_deref(), &config, jobs)
        }
        Command::Eval { corpus, model } => cmd_eval(
            corpus.as_deref(),
            model.as_deref(),
            &config,
            cli.format,
            cli.output.as_deref(),
            jobs,
        ),
        Command::MergeSuggest {
            model,
            matrix,
            threshold,
        } => cmd_merge_suggest(
            model.as_deref(),
            matrix.as_deref(),
            threshold,
            cli.output.as_deref(),
        ),
        Command::Bench {
            corpus,
            figure,
            plot_data,
            reps,
        } => cmd_bench(
            corpus.as_deref(),
            &figure,
            plot_data.as_deref(),
            reps,
            &config,
            cli.output.as_deref(),
        ),
        Command::Synth {
            out,
            per_kind,
            length,
            seed,
        } => cmd_synth(out.as_deref(), per_kind, length, seed),
    }
}

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("missing required flag {flag}")))
}

fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read(p).map_err(|e| Error::io(p.display().to_string(), e))
        }
        _ => {
            let mut data = Vec::new();
            io::stdin()
                .read_to_end(&mut data)
                .map_err(|e| Error::io("<stdin>", e))?;
            Ok(data)
        }
    }
}

// Streams a closure's output to --output or stdout.
fn write_output(
    output: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match output {
        Some(path) => {
            let mut file =
                File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            f(&mut file).map_err(|e| Error::io(path.display().to_string(), e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

// Loads a corpus from either a type-per-subdirectory root or a manifest
// file; warnings go to stderr.
fn load_corpus(path: &Path) -> Result<(Manifest, PathBuf)> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if meta.is_dir() {
        let (manifest, warnings) = scan_corpus(path)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        Ok((manifest, path.to_path_buf()))
    } else {
        let manifest = Manifest::load(path)?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((manifest, base))
    }
}

fn load_model(path: &Path) -> Result<DiscriminantModel> {
    DiscriminantModel::load(path)
}

fn cmd_estimate(input: &Option<PathBuf>, config: &ProbeConfig) -> Result<()> {
    let data = read_input(input)?;
    if data.len() > MAX_WINDOW_SIZE {
        return Err(Error::InvalidConfig(format!(
            "input is {} bytes; estimate handles whole inputs up to {MAX_WINDOW_SIZE}, \
             use the map command for longer streams",
            data.len()
        )));
    }
    let registry = EstimatorRegistry::standard();
    let window = ByteWindow::new(0, &data);
    let mut lines = String::new();
    for &id in &config.estimators {
        let est = registry.run(id, &window)?;
        lines.push_str(&format!(
            "{id} {:.6} {} {:.1}us\n",
            est.value, est.raw_output_bits, est.elapsed_us
        ));
    }
    print!("{lines}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_map(
    input: &Option<PathBuf>,
    model_path: Option<&Path>,
    passthrough: bool,
    include_timings: bool,
    config: &ProbeConfig,
    format: Format,
    output: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let model = model_path.map(load_model).transpose()?;
    let registry = EstimatorRegistry::standard();
    let map = if passthrough {
        if output.is_none() {
            return Err(Error::InvalidConfig(
                "--passthrough sends the input bytes to stdout; write the map with --output"
                    .to_string(),
            ));
        }
        let stdout = io::stdout();
        match input {
            Some(p) if p.as_os_str() != "-" => {
                let file =
                    File::open(p).map_err(|e| Error::io(p.display().to_string(), e))?;
                probe_reader(file, Some(stdout.lock()), config, &registry, model.as_ref(), jobs)?
            }
            _ => probe_reader(
                io::stdin().lock(),
                Some(stdout.lock()),
                config,
                &registry,
                model.as_ref(),
                jobs,
            )?,
        }
    } else {
        let data = read_input(input)?;
        build_map_with(&data, config, &registry, model.as_ref(), jobs)?
    };
    if config.output_mode == OutputMode::SingleType {
        if let Some(label) = map.records.first().and_then(|r| r.predicted_type.as_ref()) {
            eprintln!("predicted type: {label}");
        }
    }
    write_output(output, |w| match format {
        Format::Csv => write_csv(&map, w),
        Format::Json => write_json(&map, w, include_timings),
    })
}

fn manifest_features(
    manifest: &Manifest,
    base: &Path,
    schema: &FeatureSchema,
    config: &ProbeConfig,
    jobs: Option<usize>,
) -> Result<Vec<(crate::classifier::FeatureVector, SemanticType)>> {
    let registry = EstimatorRegistry::standard();
    let probe = ProbeConfig {
        estimators: schema.estimators.clone(),
        output_mode: OutputMode::PerWindowVector,
        ..config.clone()
    };
    let mut out = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let data = entry.read_bytes(base)?;
        let map = build_map_with(&data, &probe, &registry, None, jobs)?;
        out.push((features_from_map(&map, schema)?, entry.label.clone()));
    }
    Ok(out)
}

fn cmd_train(
    corpus: Option<&Path>,
    model_out: Option<&Path>,
    config: &ProbeConfig,
    output: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let corpus = require(&corpus.map(Path::to_path_buf), "--corpus")?.clone();
    let model_out = require(&model_out.map(Path::to_path_buf), "--model-out")?.clone();
    let (manifest, base) = load_corpus(&corpus)?;
    let schema = FeatureSchema::new(config.estimators.clone());
    let samples = manifest_features(&manifest, &base, &schema, config, jobs)?;
    let model = train(&schema, &samples, None)?;
    model.save(&model_out)?;
    let matrix = model.squared_distance_matrix()?;
    write_output(output, |w| {
        writeln!(w, "type,samples")?;
        for group in &model.groups {
            let n = samples.iter().filter(|(_, t)| t == group).count();
            writeln!(w, "{group},{n}")?;
        }
        writeln!(w)?;
        write!(w, "{matrix}")
    })
}

fn cmd_classify(
    input: &Option<PathBuf>,
    model_path: Option<&Path>,
    config: &ProbeConfig,
    jobs: Option<usize>,
) -> Result<()> {
    let model_path = require(&model_path.map(Path::to_path_buf), "--model")?.clone();
    let model = load_model(&model_path)?;
    let data = read_input(input)?;
    let registry = EstimatorRegistry::standard();
    let probe = ProbeConfig {
        estimators: model.schema.estimators.clone(),
        output_mode: OutputMode::PerWindowVector,
        ..config.clone()
    };
    let map = build_map_with(&data, &probe, &registry, None, jobs)?;
    let label = model.classify_file(&map)?;
    println!("{label}");
    Ok(())
}

fn cmd_eval(
    corpus: Option<&Path>,
    model_path: Option<&Path>,
    config: &ProbeConfig,
    format: Format,
    output: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let corpus = require(&corpus.map(Path::to_path_buf), "--corpus")?.clone();
    let model_path = require(&model_path.map(Path::to_path_buf), "--model")?.clone();
    let model = load_model(&model_path)?;
    let (manifest, base) = load_corpus(&corpus)?;
    let samples = manifest_features(&manifest, &base, &model.schema, config, jobs)?;
    let eval = evaluate(&model, &samples)?;
    write_output(output, |w| match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &eval)?;
            writeln!(w)
        }
        Format::Csv => {
            writeln!(w, "actual,predicted,count")?;
            for (i, row) in eval.confusion.iter().enumerate() {
                for (j, &count) in row.iter().enumerate() {
                    if count > 0 {
                        writeln!(w, "{},{},{count}", eval.groups[i], eval.groups[j])?;
                    }
                }
            }
            writeln!(w)?;
            writeln!(w, "group,accuracy")?;
            for (group, acc) in eval.groups.iter().zip(&eval.per_group) {
                writeln!(w, "{group},{acc:.6}")?;
            }
            writeln!(w, "overall,{:.6}", eval.overall)
        }
    })
}

fn cmd_merge_suggest(
    model_path: Option<&Path>,
    matrix_path: Option<&Path>,
    threshold: f64,
    output: Option<&Path>,
) -> Result<()> {
    let matrix: SquaredDistanceMatrix = match (model_path, matrix_path) {
        (Some(model), None) => load_model(model)?.squared_distance_matrix()?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidFile {
                path: path.display().to_string(),
                reason: format!("not a distance matrix: {e}"),
            })?
        }
        _ => {
            return Err(Error::InvalidConfig(
                "pass exactly one of --model or --matrix".to_string(),
            ))
        }
    };
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let suggestions = suggest_merges(&matrix, threshold);
    write_output(output, |w| {
        writeln!(w, "a,b,squared_distance")?;
        for s in &suggestions {
            writeln!(w, "{},{},{:.4}", s.a, s.b, s.d2)?;
        }
        Ok(())
    })
}

fn cmd_bench(
    corpus: Option<&Path>,
    figure: &str,
    plot_data: Option<&Path>,
    reps: usize,
    config: &ProbeConfig,
    output: Option<&Path>,
) -> Result<()> {
    let known = [
        "fig09", "fig10", "fig11", "fig12", "fig13", "fig14", "fig15", "all",
    ];
    if !known.contains(&figure) {
        return Err(Error::InvalidConfig(format!(
            "unknown figure selector {figure:?}; expected fig09..fig15 or all"
        )));
    }
    let corpus = require(&corpus.map(Path::to_path_buf), "--corpus")?.clone();
    let (manifest, base) = load_corpus(&corpus)?;

    let figures: Vec<&str> = if figure == "all" {
        known[..7].to_vec()
    } else {
        vec![figure]
    };
    let estimators = &config.estimators;
    // Timing runs stay uncontended: everything below is single-threaded.
    for fig in figures {
        let mut buf: Vec<u8> = Vec::new();
        match fig {
            "fig09" => {
                let profile = bench::mean_complexity_profile(estimators, &manifest, &base)?;
                bench::write_fig09(&profile, &mut buf)
            }
            "fig10" => {
                let report = bench::profile_time_vs_window(
                    estimators,
                    &BENCH_WINDOW_SIZES,
                    &manifest,
                    &base,
                    reps,
                )?;
                bench::write_fig10(&report, &mut buf)
            }
            "fig11" => {
                let report = bench::profile_time_vs_complexity(
                    estimators,
                    config.window_size,
                    &manifest,
                    &base,
                    reps,
                )?;
                for c in &report.correlations {
                    match c.rho {
                        Some(rho) => eprintln!("{}: rho {rho:+.3}", c.name),
                        None => eprintln!("{}: rho undefined", c.name),
                    }
                }
                bench::write_fig11(&report, &mut buf)
            }
            "fig12" => {
                let ladder = vec![
                    vec![EstimatorId::Zip],
                    vec![EstimatorId::H],
                    vec![EstimatorId::Lz],
                    vec![EstimatorId::Lz, EstimatorId::H],
                    vec![EstimatorId::Lz, EstimatorId::H, EstimatorId::Zip],
                ];
                let rows = bench::tradeoff_time_vs_accuracy(
                    &ladder,
                    &manifest,
                    &base,
                    config.window_size,
                    0.3,
                    manifest.seed,
                )?;
                bench::write_fig12(&rows, &mut buf)
            }
            "fig13" => {
                let rows = bench::accuracy_vs_compression(
                    EstimatorId::Zip,
                    &[1, 2, 3, 4, 5, 6, 7, 8, 9],
                    &manifest,
                    &base,
                    config.window_size,
                    0.3,
                    manifest.seed,
                )?;
                bench::write_fig13(&rows, &mut buf)
            }
            "fig14" | "fig15" => {
                let report = bench::throughput_per_type(
                    estimators,
                    config.window_size,
                    &manifest,
                    &base,
                    reps,
                )?;
                if fig == "fig14" {
                    bench::write_fig14(&report, &mut buf)
                } else {
                    bench::write_fig15(&report, &mut buf)
                }
            }
            _ => unreachable!(),
        }
        .map_err(|e| Error::io(format!("{fig} data"), e))?;

        match plot_data {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .map_err(|e| Error::io(dir.display().to_string(), e))?;
                let path = dir.join(format!("{fig}.csv"));
                std::fs::write(&path, &buf)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                eprintln!("wrote {}", path.display());
            }
            None => write_output(output, |w| w.write_all(&buf))?,
        }
    }
    Ok(())
}

fn cmd_synth(out: Option<&Path>, per_kind: usize, length: u64, seed: u64) -> Result<()> {
    let out = require(&out.map(Path::to_path_buf), "--out")?.clone();
    if per_kind == 0 {
        return Err(Error::InvalidSpec(
            "per_kind must be positive".to_string(),
        ));
    }
    let manifest = crate::corpus::synthetic_manifest(per_kind, length, seed);
    let mut written = Manifest::new(seed);
    for entry in &manifest.entries {
        let crate::corpus::SampleSource::Synthetic { synthetic } = &entry.source else {
            unreachable!("synthetic_manifest only emits synthetic sources");
        };
        let dir = out.join(entry.label.as_str());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let index = written
            .entries
            .iter()
            .filter(|e| e.label == entry.label)
            .count();
        let rel = format!("{}/sample_{index:02}.bin", entry.label);
        let path = out.join(&rel);
        let data = generate_synthetic(synthetic)?;
        std::fs::write(&path, &data).map_err(|e| Error::io(path.display().to_string(), e))?;
        written.entries.push(crate::corpus::ManifestEntry {
            source: crate::corpus::SampleSource::Path { path: rel },
            ..entry.clone()
        });
    }
    let manifest_path = out.join("manifest.jsonl");
    written.save(&manifest_path)?;
    eprintln!(
        "wrote {} samples ({} kinds) and {}",
        written.entries.len(),
        SyntheticKind::ALL.len(),
        manifest_path.display()
    );
    Ok(())
}
