//! Measurement studies over the estimators: timing profiles, throughput per
//! semantic type, and the time/accuracy and compression/accuracy tradeoffs.
//!
//! Timing loops are strictly single-threaded so elapsed numbers are never
//! contended. Every derived statistic can be recomputed from the raw
//! records; the per-figure CSV emitters (`write_fig09` .. `write_fig15`)
//! produce plot-ready data.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::classifier::{evaluate, features_from_map, train, FeatureSchema, SemanticType};
use crate::corpus::{split, Manifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::estimators::{
    BzEstimator, ByteWindow, ComplexityEstimator, EstimatorId, EstimatorRegistry, ZipEstimator,
};
use crate::probe::{build_map_with, ProbeConfig};

/// One timed estimation: estimator, sample label, window geometry, the
/// complexity it produced, and how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRecord {
    pub estimator: EstimatorId,
    pub type_label: SemanticType,
    pub window_size: usize,
    pub complexity: f64,
    /// Median elapsed over the repetitions, microseconds.
    pub elapsed_us: f64,
    /// window_size divided by elapsed, bytes per second.
    pub throughput: f64,
}

/// Mean/median/stddev over the records sharing one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub estimator: EstimatorId,
    pub type_label: SemanticType,
    pub window_size: usize,
    pub count: usize,
    pub mean_elapsed_us: f64,
    pub median_elapsed_us: f64,
    pub stddev_elapsed_us: f64,
    pub mean_complexity: f64,
    pub mean_throughput: f64,
}

/// A named rank correlation; `rho` is absent when either variable is
/// constant.
#[derive(Debug, Clone, Serialize)]
pub struct Correlation {
    pub name: String,
    pub rho: Option<f64>,
}

/// Raw records plus everything derived from them.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub records: Vec<TimingRecord>,
    pub aggregates: Vec<Aggregate>,
    pub correlations: Vec<Correlation>,
    pub environment: String,
    pub repetitions: usize,
    pub seed: u64,
}

/// One row of the time versus discrimination study.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffRow {
    pub combination: Vec<EstimatorId>,
    pub total_elapsed_us: f64,
    pub accuracy: f64,
}

/// One row of the compression versus discrimination study.
#[derive(Debug, Clone, Serialize)]
pub struct CompressionRow {
    pub effort: u8,
    pub mean_ratio: f64,
    pub accuracy: f64,
}

fn environment() -> String {
    format!("{} {}", std::env::consts::OS, std::env::consts::ARCH)
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

// Times one estimator on one window: a warm-up pass, then the median of
// `reps` measured passes.
fn timed_run(
    registry: &EstimatorRegistry,
    id: EstimatorId,
    window: &ByteWindow<'_>,
    reps: usize,
) -> Result<(f64, f64)> {
    registry.run(id, window)?;
    let mut elapsed = Vec::with_capacity(reps);
    let mut complexity = 0.0;
    for _ in 0..reps {
        let est = registry.run(id, window)?;
        elapsed.push(est.elapsed_us);
        complexity = est.value;
    }
    Ok((complexity, median(&mut elapsed)))
}

fn make_record(
    id: EstimatorId,
    label: &SemanticType,
    window_size: usize,
    complexity: f64,
    elapsed_us: f64,
) -> TimingRecord {
    TimingRecord {
        estimator: id,
        type_label: label.clone(),
        window_size,
        complexity,
        elapsed_us,
        throughput: window_size as f64 / (elapsed_us / 1e6),
    }
}

/// Groups records by (estimator, type, window size) and summarizes each
/// cell. Kept as a free function so reports can be checked against it.
pub fn aggregate(records: &[TimingRecord]) -> Vec<Aggregate> {
    let mut cells: BTreeMap<(EstimatorId, &SemanticType, usize), Vec<&TimingRecord>> =
        BTreeMap::new();
    for r in records {
        cells
            .entry((r.estimator, &r.type_label, r.window_size))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((estimator, type_label, window_size), rs)| {
            let n = rs.len() as f64;
            let mean = |f: fn(&TimingRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_elapsed = mean(|r| r.elapsed_us);
            let var = rs
                .iter()
                .map(|r| (r.elapsed_us - mean_elapsed).powi(2))
                .sum::<f64>()
                / n;
            let mut elapsed: Vec<f64> = rs.iter().map(|r| r.elapsed_us).collect();
            Aggregate {
                estimator,
                type_label: type_label.clone(),
                window_size,
                count: rs.len(),
                mean_elapsed_us: mean_elapsed,
                median_elapsed_us: median(&mut elapsed),
                stddev_elapsed_us: var.sqrt(),
                mean_complexity: mean(|r| r.complexity),
                mean_throughput: mean(|r| r.throughput),
            }
        })
        .collect()
}

/// Spearman rank correlation with tie-averaged ranks. `None` when fewer
/// than two points or either variable is constant.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn read_all<'m>(manifest: &'m Manifest, base: &Path) -> Result<Vec<(Vec<u8>, &'m ManifestEntry)>> {
    if manifest.entries.is_empty() {
        return Err(Error::EmptyInput("empty corpus manifest".to_string()));
    }
    manifest
        .entries
        .iter()
        .map(|e| Ok((e.read_bytes(base)?, e)))
        .collect()
}

/// Times every estimator over a ladder of window sizes, one prefix window
/// per sample. Correlations report Spearman rho of window size against
/// elapsed time per estimator.
pub fn profile_time_vs_window(
    estimators: &[EstimatorId],
    window_sizes: &[usize],
    manifest: &Manifest,
    base: &Path,
    repetitions: usize,
) -> Result<BenchReport> {
    if window_sizes.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 window sizes, got {}",
            window_sizes.len()
        )));
    }
    if repetitions < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 repetitions, got {repetitions}"
        )));
    }
    let samples = read_all(manifest, base)?;
    let registry = EstimatorRegistry::standard();
    let mut records = Vec::new();
    for (data, entry) in &samples {
        for &size in window_sizes {
            let window = ByteWindow::new(0, &data[..size.min(data.len())]);
            for &id in estimators {
                let (complexity, elapsed) = timed_run(&registry, id, &window, repetitions)?;
                records.push(make_record(
                    id,
                    &entry.label,
                    window.payload.len(),
                    complexity,
                    elapsed,
                ));
            }
        }
    }
    let correlations = estimators
        .iter()
        .map(|&id| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.estimator == id)
                .map(|r| (r.window_size as f64, r.elapsed_us))
                .unzip();
            Correlation {
                name: format!("{id} elapsed vs window_size"),
                rho: spearman_rho(&xs, &ys),
            }
        })
        .collect();
    Ok(BenchReport {
        aggregates: aggregate(&records),
        records,
        correlations,
        environment: environment(),
        repetitions,
        seed: manifest.seed,
    })
}

/// Times every estimator at one window size across the corpus and reports
/// Spearman rho of complexity against elapsed time per estimator. The sign
/// is reported, never asserted: it depends on codec internals.
pub fn profile_time_vs_complexity(
    estimators: &[EstimatorId],
    window_size: usize,
    manifest: &Manifest,
    base: &Path,
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 repetitions, got {repetitions}"
        )));
    }
    let samples = read_all(manifest, base)?;
    let registry = EstimatorRegistry::standard();
    let mut records = Vec::new();
    for (data, entry) in &samples {
        let window = ByteWindow::new(0, &data[..window_size.min(data.len())]);
        for &id in estimators {
            let (complexity, elapsed) = timed_run(&registry, id, &window, repetitions)?;
            records.push(make_record(
                id,
                &entry.label,
                window.payload.len(),
                complexity,
                elapsed,
            ));
        }
    }
    let correlations = estimators
        .iter()
        .map(|&id| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.estimator == id)
                .map(|r| (r.complexity, r.elapsed_us))
                .unzip();
            Correlation {
                name: format!("{id} elapsed vs complexity"),
                rho: spearman_rho(&xs, &ys),
            }
        })
        .collect();
    Ok(BenchReport {
        aggregates: aggregate(&records),
        records,
        correlations,
        environment: environment(),
        repetitions,
        seed: manifest.seed,
    })
}

/// Measures bytes-per-second throughput for every (estimator, type) cell at
/// one window size.
pub fn throughput_per_type(
    estimators: &[EstimatorId],
    window_size: usize,
    manifest: &Manifest,
    base: &Path,
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 repetitions, got {repetitions}"
        )));
    }
    let samples = read_all(manifest, base)?;
    let registry = EstimatorRegistry::standard();
    let mut records = Vec::new();
    for (data, entry) in &samples {
        let window = ByteWindow::new(0, &data[..window_size.min(data.len())]);
        for &id in estimators {
            let (complexity, elapsed) = timed_run(&registry, id, &window, repetitions)?;
            records.push(make_record(
                id,
                &entry.label,
                window.payload.len(),
                complexity,
                elapsed,
            ));
        }
    }
    Ok(BenchReport {
        aggregates: aggregate(&records),
        records,
        correlations: Vec::new(),
        environment: environment(),
        repetitions,
        seed: manifest.seed,
    })
}

// Computes classifier features for every entry, returning the summed
// estimation time across all windows.
fn manifest_features(
    entries: &[ManifestEntry],
    base: &Path,
    schema: &FeatureSchema,
    registry: &EstimatorRegistry,
    window_size: usize,
) -> Result<(Vec<(crate::classifier::FeatureVector, SemanticType)>, f64)> {
    let config = ProbeConfig {
        estimators: schema.estimators.clone(),
        window_size,
        ..ProbeConfig::default()
    };
    let mut out = Vec::with_capacity(entries.len());
    let mut total_us = 0.0;
    for entry in entries {
        let data = entry.read_bytes(base)?;
        let map = build_map_with(&data, &config, registry, None, Some(1))?;
        total_us += map
            .records
            .iter()
            .flat_map(|r| &r.estimates)
            .map(|e| e.elapsed_us)
            .sum::<f64>();
        out.push((features_from_map(&map, schema)?, entry.label.clone()));
    }
    Ok((out, total_us))
}

/// For each estimator combination: trains on a stratified split, evaluates
/// on the held-out side, and records the total estimation time spent.
pub fn tradeoff_time_vs_accuracy(
    combinations: &[Vec<EstimatorId>],
    manifest: &Manifest,
    base: &Path,
    window_size: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<TradeoffRow>> {
    if combinations.is_empty() {
        return Err(Error::InvalidConfig(
            "no estimator combinations given".to_string(),
        ));
    }
    let (train_manifest, test_manifest) = split(manifest, test_fraction, seed)?;
    let registry = EstimatorRegistry::standard();
    let mut rows = Vec::with_capacity(combinations.len());
    for combo in combinations {
        let schema = FeatureSchema::new(combo.clone());
        let (train_set, train_us) =
            manifest_features(&train_manifest.entries, base, &schema, &registry, window_size)?;
        let (test_set, test_us) =
            manifest_features(&test_manifest.entries, base, &schema, &registry, window_size)?;
        let model = train(&schema, &train_set, None)?;
        let eval = evaluate(&model, &test_set)?;
        rows.push(TradeoffRow {
            combination: combo.clone(),
            total_elapsed_us: train_us + test_us,
            accuracy: eval.overall,
        });
    }
    Ok(rows)
}

/// Sweeps an estimator's effort knob: ZIP varies match-search depth 1..=9,
/// BZ toggles the block transform (0 = off, 1 = on). Each row pairs the
/// mean achieved compression ratio with held-out accuracy.
pub fn accuracy_vs_compression(
    estimator: EstimatorId,
    efforts: &[u8],
    manifest: &Manifest,
    base: &Path,
    window_size: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<CompressionRow>> {
    if efforts.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 effort levels, got {}",
            efforts.len()
        )));
    }
    let build: fn(u8) -> Result<Box<dyn ComplexityEstimator>> = match estimator {
        EstimatorId::Zip => |e| {
            if !(1..=9).contains(&e) {
                return Err(Error::InvalidConfig(format!(
                    "ZIP effort must be 1..=9, got {e}"
                )));
            }
            Ok(Box::new(ZipEstimator { effort: e }))
        },
        EstimatorId::Bz => |e| {
            if e > 1 {
                return Err(Error::InvalidConfig(format!(
                    "BZ effort must be 0 (transform off) or 1 (on), got {e}"
                )));
            }
            Ok(Box::new(BzEstimator { transform: e == 1 }))
        },
        other => {
            return Err(Error::Unsupported(format!(
                "estimator {other} has no effort levels; only ZIP and BZ do"
            )))
        }
    };
    let (train_manifest, test_manifest) = split(manifest, test_fraction, seed)?;
    let schema = FeatureSchema::new(vec![estimator]);
    let mut rows = Vec::with_capacity(efforts.len());
    for &effort in efforts {
        let mut registry = EstimatorRegistry::empty();
        registry.register(build(effort)?);
        let (train_set, _) =
            manifest_features(&train_manifest.entries, base, &schema, &registry, window_size)?;
        let (test_set, _) =
            manifest_features(&test_manifest.entries, base, &schema, &registry, window_size)?;
        let model = train(&schema, &train_set, None)?;
        let eval = evaluate(&model, &test_set)?;
        let all: Vec<f64> = train_set
            .iter()
            .chain(&test_set)
            .map(|(fv, _)| fv.complexity[0])
            .collect();
        rows.push(CompressionRow {
            effort,
            mean_ratio: all.iter().sum::<f64>() / all.len() as f64,
            accuracy: eval.overall,
        });
    }
    Ok(rows)
}

/// Mean normalized complexity per estimator over whole samples. Averaging
/// is per manifest entry, so duplicate entries shift the mean.
pub fn mean_complexity_profile(
    estimators: &[EstimatorId],
    manifest: &Manifest,
    base: &Path,
) -> Result<Vec<(EstimatorId, f64)>> {
    let samples = read_all(manifest, base)?;
    let registry = EstimatorRegistry::standard();
    let mut out = Vec::with_capacity(estimators.len());
    for &id in estimators {
        let mut total = 0.0;
        for (data, _) in &samples {
            total += registry.run(id, &ByteWindow::new(0, data))?.value;
        }
        out.push((id, total / samples.len() as f64));
    }
    Ok(out)
}

/// Mean complexity per estimator: `estimator,mean_complexity`.
pub fn write_fig09<W: Write>(
    profile: &[(EstimatorId, f64)],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "estimator,mean_complexity")?;
    for (id, mean) in profile {
        writeln!(out, "{id},{mean:.6}")?;
    }
    Ok(())
}

/// Elapsed time per window size: `window_size,estimator,median_elapsed_us`.
pub fn write_fig10<W: Write>(report: &BenchReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "window_size,estimator,median_elapsed_us")?;
    let mut cells: BTreeMap<(usize, EstimatorId), Vec<f64>> = BTreeMap::new();
    for r in &report.records {
        cells
            .entry((r.window_size, r.estimator))
            .or_default()
            .push(r.elapsed_us);
    }
    for ((size, id), mut elapsed) in cells {
        writeln!(out, "{size},{id},{:.3}", median(&mut elapsed))?;
    }
    Ok(())
}

/// Per-window scatter: `estimator,complexity,elapsed_us`.
pub fn write_fig11<W: Write>(report: &BenchReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "estimator,complexity,elapsed_us")?;
    for r in &report.records {
        writeln!(out, "{},{:.6},{:.3}", r.estimator, r.complexity, r.elapsed_us)?;
    }
    Ok(())
}

/// Time versus discrimination: `combination,total_elapsed_us,accuracy`.
pub fn write_fig12<W: Write>(rows: &[TradeoffRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "combination,total_elapsed_us,accuracy")?;
    for row in rows {
        let combo = row
            .combination
            .iter()
            .map(|id| id.as_str())
            .collect::<Vec<_>>()
            .join("+");
        writeln!(out, "{combo},{:.3},{:.6}", row.total_elapsed_us, row.accuracy)?;
    }
    Ok(())
}

/// Compression versus discrimination: `effort,mean_ratio,accuracy`.
pub fn write_fig13<W: Write>(rows: &[CompressionRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "effort,mean_ratio,accuracy")?;
    for row in rows {
        writeln!(out, "{},{:.6},{:.6}", row.effort, row.mean_ratio, row.accuracy)?;
    }
    Ok(())
}

fn write_throughput_family<W: Write>(
    report: &BenchReport,
    family: &[EstimatorId],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "type,estimator,mean_throughput_bytes_per_s")?;
    for agg in &report.aggregates {
        if family.contains(&agg.estimator) {
            writeln!(
                out,
                "{},{},{:.1}",
                agg.type_label, agg.estimator, agg.mean_throughput
            )?;
        }
    }
    Ok(())
}

/// Throughput for the ZIP and H family: `type,estimator,mean_throughput_bytes_per_s`.
pub fn write_fig14<W: Write>(report: &BenchReport, out: W) -> std::io::Result<()> {
    write_throughput_family(report, &[EstimatorId::Zip, EstimatorId::H], out)
}

/// Throughput for the PSI, LZ, and BZ family: same columns as fig14.
pub fn write_fig15<W: Write>(report: &BenchReport, out: W) -> std::io::Result<()> {
    write_throughput_family(
        report,
        &[EstimatorId::Psi, EstimatorId::Lz, EstimatorId::Bz],
        out,
    )
}
