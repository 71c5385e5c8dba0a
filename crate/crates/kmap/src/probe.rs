//! Windowed probing of byte streams.
//!
//! A probe slices a stream into fixed-size windows, runs a set of
//! estimators over each, and collects the results into a [`ComplexityMap`].
//! Optional preprocessing narrows the stream to record headers or payloads
//! and subsamples it for speed; an optional model attaches a predicted
//! semantic type to the output.

use std::borrow::Cow;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{features_from_map, DiscriminantModel, FeatureVector, SemanticType};
use crate::error::{Error, Result};
use crate::estimators::{ByteWindow, ComplexityEstimate, EstimatorId, EstimatorRegistry};

pub const DEFAULT_WINDOW_SIZE: usize = 4096;
pub const MIN_WINDOW_SIZE: usize = 16;
pub const MAX_WINDOW_SIZE: usize = 262_144;

// Subsampling keeps a prefix of every block this large.
const SAMPLE_BLOCK: usize = 4096;

/// Which part of each fixed-length record survives filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    None,
    HeaderOnly,
    PayloadOnly,
}

/// Structural filter for streams made of fixed-length records, each a
/// `header_len`-byte header followed by payload up to `record_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub mode: FilterMode,
    pub header_len: usize,
    pub record_len: usize,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            mode: FilterMode::None,
            header_len: 0,
            record_len: 0,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mode == FilterMode::None {
            return Ok(());
        }
        if self.header_len == 0 || self.header_len >= self.record_len {
            return Err(Error::InvalidConfig(format!(
                "filter needs 0 < header_len < record_len, got {} and {}",
                self.header_len, self.record_len
            )));
        }
        Ok(())
    }
}

/// Whether predictions are attached per window or once for the whole stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    PerWindowVector,
    SingleType,
}

/// Everything a probe run depends on besides the bytes themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub filter: FilterSpec,
    /// Fraction of each block kept when subsampling, in (0, 1].
    pub sampling_rate: f64,
    pub window_size: usize,
    pub estimators: Vec<EstimatorId>,
    pub output_mode: OutputMode,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            filter: FilterSpec::default(),
            sampling_rate: 1.0,
            window_size: DEFAULT_WINDOW_SIZE,
            estimators: EstimatorId::IMPLEMENTED.to_vec(),
            output_mode: OutputMode::PerWindowVector,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling_rate must be in (0, 1], got {}",
                self.sampling_rate
            )));
        }
        if self.window_size < MIN_WINDOW_SIZE || self.window_size > MAX_WINDOW_SIZE {
            return Err(Error::InvalidConfig(format!(
                "window_size must be in {MIN_WINDOW_SIZE}..={MAX_WINDOW_SIZE}, got {}",
                self.window_size
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one estimator is required".to_string(),
            ));
        }
        for (i, id) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(id) {
                return Err(Error::InvalidConfig(format!(
                    "estimator {id} listed more than once"
                )));
            }
        }
        Ok(())
    }
}

/// One window's worth of results. The offset is relative to the analyzed
/// stream, which equals the source stream when no filter or subsampling is
/// active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub window_index: usize,
    pub offset: u64,
    pub length: usize,
    pub estimates: Vec<ComplexityEstimate>,
    pub predicted_type: Option<SemanticType>,
}

/// The full result of probing one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityMap {
    pub config: ProbeConfig,
    pub records: Vec<MapRecord>,
    /// Wall time of the whole probe, in microseconds.
    pub total_elapsed_us: u64,
}

/// Splits data into consecutive windows; the final window keeps whatever
/// remains and may be short.
pub fn partition(data: &[u8], window_size: usize) -> Vec<ByteWindow<'_>> {
    data.chunks(window_size)
        .enumerate()
        .map(|(i, chunk)| ByteWindow::new((i * window_size) as u64, chunk))
        .collect()
}

/// Keeps the header or payload part of each fixed-length record. A trailing
/// partial record splits under the same rule: its first `header_len` bytes
/// (or all of it, if shorter) count as header, the rest as payload.
pub fn apply_filter<'a>(data: &'a [u8], filter: &FilterSpec) -> Cow<'a, [u8]> {
    if filter.mode == FilterMode::None {
        return Cow::Borrowed(data);
    }
    let mut out = Vec::new();
    for record in data.chunks(filter.record_len) {
        let split = filter.header_len.min(record.len());
        match filter.mode {
            FilterMode::HeaderOnly => out.extend_from_slice(&record[..split]),
            FilterMode::PayloadOnly => out.extend_from_slice(&record[split..]),
            FilterMode::None => unreachable!(),
        }
    }
    Cow::Owned(out)
}

/// Keeps the first `ceil(rate * len)` bytes of every 4096-byte block, so
/// coverage stays spread across the stream instead of clustering at the
/// front. A rate of 1 keeps everything.
pub fn sample(data: &[u8], rate: f64) -> Cow<'_, [u8]> {
    if rate >= 1.0 {
        return Cow::Borrowed(data);
    }
    let mut out = Vec::new();
    for block in data.chunks(SAMPLE_BLOCK) {
        let keep = (rate * block.len() as f64).ceil() as usize;
        out.extend_from_slice(&block[..keep.min(block.len())]);
    }
    Cow::Owned(out)
}

/// Probes a byte slice with the default thread pool and no classifier.
pub fn build_map(
    data: &[u8],
    config: &ProbeConfig,
    registry: &EstimatorRegistry,
) -> Result<ComplexityMap> {
    build_map_with(data, config, registry, None, None)
}

/// Probes a byte slice. `model` attaches predicted types according to the
/// configured output mode. `jobs` picks the worker count: `Some(1)` runs
/// serially, `Some(n)` uses a dedicated pool of n threads, `None` uses the
/// global pool.
pub fn build_map_with(
    data: &[u8],
    config: &ProbeConfig,
    registry: &EstimatorRegistry,
    model: Option<&DiscriminantModel>,
    jobs: Option<usize>,
) -> Result<ComplexityMap> {
    config.validate()?;
    if let Some(m) = model {
        for id in &m.schema.estimators {
            if !config.estimators.contains(id) {
                return Err(Error::ModelMismatch(format!(
                    "model needs estimator {id} but the probe does not compute it"
                )));
            }
        }
    }
    let start = Instant::now();
    let filtered = apply_filter(data, &config.filter);
    let sampled = sample(&filtered, config.sampling_rate);
    if sampled.is_empty() {
        return Err(Error::EmptyInput(
            "no bytes left to analyze after filtering and sampling".to_string(),
        ));
    }
    let windows = partition(&sampled, config.window_size);

    let estimate_all = || -> Result<Vec<MapRecord>> {
        windows
            .par_iter()
            .enumerate()
            .map(|(i, window)| {
                let mut estimates = Vec::with_capacity(config.estimators.len());
                for id in &config.estimators {
                    estimates.push(registry.run(*id, window)?);
                }
                Ok(MapRecord {
                    window_index: i,
                    offset: window.offset,
                    length: window.payload.len(),
                    estimates,
                    predicted_type: None,
                })
            })
            .collect()
    };
    let mut records = match jobs {
        Some(1) => windows
            .iter()
            .enumerate()
            .map(|(i, window)| {
                let mut estimates = Vec::with_capacity(config.estimators.len());
                for id in &config.estimators {
                    estimates.push(registry.run(*id, window)?);
                }
                Ok(MapRecord {
                    window_index: i,
                    offset: window.offset,
                    length: window.payload.len(),
                    estimates,
                    predicted_type: None,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            pool.install(estimate_all)?
        }
        None => estimate_all()?,
    };

    if let Some(m) = model {
        match config.output_mode {
            OutputMode::PerWindowVector => {
                for rec in &mut records {
                    let features = record_features(rec, m)?;
                    rec.predicted_type = Some(m.classify(&features)?.clone());
                }
            }
            OutputMode::SingleType => {
                let draft = ComplexityMap {
                    config: config.clone(),
                    records,
                    total_elapsed_us: 0,
                };
                let features = features_from_map(&draft, &m.schema)?;
                let label = m.classify(&features)?.clone();
                records = draft.records;
                for rec in &mut records {
                    rec.predicted_type = Some(label.clone());
                }
            }
        }
    }

    Ok(ComplexityMap {
        config: config.clone(),
        records,
        total_elapsed_us: start.elapsed().as_micros() as u64,
    })
}

// Feature vector for classifying one window on its own.
fn record_features(rec: &MapRecord, model: &DiscriminantModel) -> Result<FeatureVector> {
    let mut complexity = Vec::with_capacity(model.schema.estimators.len());
    for id in &model.schema.estimators {
        let est = rec
            .estimates
            .iter()
            .find(|e| e.estimator == *id)
            .ok_or_else(|| {
                Error::ModelMismatch(format!(
                    "model needs estimator {id} but the record does not carry it"
                ))
            })?;
        complexity.push(est.value);
    }
    Ok(FeatureVector::new(complexity, rec.length as f64))
}

/// Reads a stream to the end and probes it. When `passthrough` is given,
/// every byte read is copied to it unchanged before any analysis, so the
/// probe can sit inside a pipeline without disturbing it.
pub fn probe_reader<R: Read, W: Write>(
    mut reader: R,
    mut passthrough: Option<W>,
    config: &ProbeConfig,
    registry: &EstimatorRegistry,
    model: Option<&DiscriminantModel>,
    jobs: Option<usize>,
) -> Result<ComplexityMap> {
    let err = |e| Error::io("<stream>", e);
    let mut data = Vec::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = reader.read(&mut buf).map_err(err)?;
        if n == 0 {
            break;
        }
        if let Some(w) = passthrough.as_mut() {
            w.write_all(&buf[..n]).map_err(err)?;
        }
        data.extend_from_slice(&buf[..n]);
    }
    if let Some(w) = passthrough.as_mut() {
        w.flush().map_err(err)?;
    }
    build_map_with(&data, config, registry, model, jobs)
}

/// Writes a map as CSV: one row per window, one value column per estimator
/// in config order, plus a predicted_type column when predictions exist.
pub fn write_csv<W: Write>(map: &ComplexityMap, mut out: W) -> std::io::Result<()> {
    let with_predictions = map.records.iter().any(|r| r.predicted_type.is_some());
    write!(out, "window_index,offset,length")?;
    for id in &map.config.estimators {
        write!(out, ",{id}")?;
    }
    if with_predictions {
        write!(out, ",predicted_type")?;
    }
    writeln!(out)?;
    for rec in &map.records {
        write!(out, "{},{},{}", rec.window_index, rec.offset, rec.length)?;
        for id in &map.config.estimators {
            let est = rec
                .estimates
                .iter()
                .find(|e| e.estimator == *id)
                .expect("map records carry every configured estimator");
            write!(out, ",{:.6}", est.value)?;
        }
        if with_predictions {
            match &rec.predicted_type {
                Some(t) => write!(out, ",{t}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

// JSON shadows so timing fields can be dropped for reproducible output.
#[derive(Serialize)]
struct JsonEstimate<'a> {
    estimator: &'a EstimatorId,
    value: f64,
    raw_output_bits: u64,
    input_bits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_us: Option<f64>,
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    window_index: usize,
    offset: u64,
    length: usize,
    estimates: Vec<JsonEstimate<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_type: &'a Option<SemanticType>,
}

#[derive(Serialize)]
struct JsonMap<'a> {
    config: &'a ProbeConfig,
    records: Vec<JsonRecord<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_elapsed_us: Option<u64>,
}

/// Writes a map as pretty JSON. Timings are included only on request
/// because they vary run to run and would break byte-for-byte comparisons.
pub fn write_json<W: Write>(
    map: &ComplexityMap,
    mut out: W,
    include_timings: bool,
) -> std::io::Result<()> {
    let shadow = JsonMap {
        config: &map.config,
        records: map
            .records
            .iter()
            .map(|r| JsonRecord {
                window_index: r.window_index,
                offset: r.offset,
                length: r.length,
                estimates: r
                    .estimates
                    .iter()
                    .map(|e| JsonEstimate {
                        estimator: &e.estimator,
                        value: e.value,
                        raw_output_bits: e.raw_output_bits,
                        input_bits: e.input_bits,
                        elapsed_us: include_timings.then_some(e.elapsed_us),
                    })
                    .collect(),
                predicted_type: &r.predicted_type,
            })
            .collect(),
        total_elapsed_us: include_timings.then_some(map.total_elapsed_us),
    };
    serde_json::to_writer_pretty(&mut out, &shadow)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, FeatureSchema};
    use proptest::prelude::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256StarStar;

    fn registry() -> EstimatorRegistry {
        EstimatorRegistry::standard()
    }

    fn config(window: usize, estimators: Vec<EstimatorId>) -> ProbeConfig {
        ProbeConfig {
            window_size: window,
            estimators,
            ..ProbeConfig::default()
        }
    }

    #[test]
    fn partition_offsets_and_lengths() {
        let data: Vec<u8> = (0..10).collect();
        let windows = partition(&data, 4);
        let got: Vec<(u64, usize)> = windows.iter().map(|w| (w.offset, w.payload.len())).collect();
        assert_eq!(got, vec![(0, 4), (4, 4), (8, 2)]);
        assert!(partition(&[], 4).is_empty());
        assert_eq!(partition(&data, 100).len(), 1);
        assert_eq!(partition(&data, 100)[0].payload.len(), 10);
    }

    #[test]
    fn filter_splits_headers_from_payloads() {
        let data: Vec<u8> = (0..10).collect();
        let spec = FilterSpec {
            mode: FilterMode::HeaderOnly,
            header_len: 1,
            record_len: 4,
        };
        assert_eq!(apply_filter(&data, &spec).as_ref(), &[0, 4, 8]);
        let spec = FilterSpec {
            mode: FilterMode::PayloadOnly,
            ..spec
        };
        assert_eq!(apply_filter(&data, &spec).as_ref(), &[1, 2, 3, 5, 6, 7, 9]);
    }

    #[test]
    fn filter_none_borrows() {
        let data = vec![1u8, 2, 3];
        assert!(matches!(
            apply_filter(&data, &FilterSpec::default()),
            Cow::Borrowed(_)
        ));
    }

    #[test]
    fn sample_keeps_block_prefixes() {
        let data = vec![7u8; 10000];
        let kept = sample(&data, 0.5);
        // Blocks of 4096, 4096, 1808 keep 2048, 2048, 904 bytes.
        assert_eq!(kept.len(), 2048 + 2048 + 904);
        assert!(matches!(sample(&data, 1.0), Cow::Borrowed(_)));
        // A tiny rate still keeps at least one byte per block.
        assert_eq!(sample(&data, 1e-9).len(), 3);
    }

    #[test]
    fn map_over_zeros_has_expected_shape() {
        let data = vec![0u8; 16384];
        let cfg = config(4096, vec![EstimatorId::H, EstimatorId::Zip]);
        let map = build_map(&data, &cfg, &registry()).unwrap();
        assert_eq!(map.records.len(), 4);
        for (i, rec) in map.records.iter().enumerate() {
            assert_eq!(rec.window_index, i);
            assert_eq!(rec.offset, (i * 4096) as u64);
            assert_eq!(rec.length, 4096);
            assert_eq!(rec.estimates.len(), 2);
            assert_eq!(rec.estimates[0].estimator, EstimatorId::H);
            assert_eq!(rec.estimates[0].value, 0.0);
            assert!(rec.estimates[1].value < 0.05);
            assert!(rec.predicted_type.is_none());
        }
        let covered: usize = map.records.iter().map(|r| r.length).sum();
        assert_eq!(covered, data.len());
    }

    #[test]
    fn serial_and_parallel_runs_agree() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x9A11);
        let mut data = vec![0u8; 40000];
        rng.fill_bytes(&mut data);
        let cfg = config(4096, vec![EstimatorId::H, EstimatorId::Lz, EstimatorId::Zip]);
        let reg = registry();
        let serial = build_map_with(&data, &cfg, &reg, None, Some(1)).unwrap();
        let pooled = build_map_with(&data, &cfg, &reg, None, Some(3)).unwrap();
        let global = build_map(&data, &cfg, &reg).unwrap();
        for other in [&pooled, &global] {
            assert_eq!(serial.records.len(), other.records.len());
            for (a, b) in serial.records.iter().zip(&other.records) {
                assert_eq!(a.window_index, b.window_index);
                assert_eq!(a.offset, b.offset);
                for (ea, eb) in a.estimates.iter().zip(&b.estimates) {
                    assert_eq!(ea.estimator, eb.estimator);
                    assert_eq!(ea.value, eb.value);
                    assert_eq!(ea.raw_output_bits, eb.raw_output_bits);
                }
            }
        }
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let reg = registry();
        let data = vec![0u8; 64];
        let bad_window = config(8, vec![EstimatorId::H]);
        assert!(matches!(
            build_map(&data, &bad_window, &reg),
            Err(Error::InvalidConfig(_))
        ));
        let no_estimators = config(4096, vec![]);
        assert!(matches!(
            build_map(&data, &no_estimators, &reg),
            Err(Error::InvalidConfig(_))
        ));
        let dup = config(4096, vec![EstimatorId::H, EstimatorId::H]);
        assert!(matches!(
            build_map(&data, &dup, &reg),
            Err(Error::InvalidConfig(_))
        ));
        let mut bad_rate = config(4096, vec![EstimatorId::H]);
        bad_rate.sampling_rate = 0.0;
        assert!(matches!(
            build_map(&data, &bad_rate, &reg),
            Err(Error::InvalidConfig(_))
        ));
        let mut bad_filter = config(4096, vec![EstimatorId::H]);
        bad_filter.filter = FilterSpec {
            mode: FilterMode::HeaderOnly,
            header_len: 4,
            record_len: 4,
        };
        assert!(matches!(
            build_map(&data, &bad_filter, &reg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn empty_stream_is_rejected() {
        let cfg = config(4096, vec![EstimatorId::H]);
        assert!(matches!(
            build_map(&[], &cfg, &registry()),
            Err(Error::EmptyInput(_))
        ));
    }

    // A model over H alone, trained so constant windows read as "flat" and
    // noisy windows as "busy".
    fn toy_model() -> DiscriminantModel {
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x70D0);
        let mut samples = Vec::new();
        for _ in 0..50 {
            samples.push((
                FeatureVector::new(vec![rng.gen_range(0.0..0.1)], rng.gen_range(1000.0..5000.0)),
                SemanticType::new("flat").unwrap(),
            ));
            samples.push((
                FeatureVector::new(vec![rng.gen_range(0.9..1.0)], rng.gen_range(1000.0..5000.0)),
                SemanticType::new("busy").unwrap(),
            ));
        }
        train(
            &FeatureSchema::new(vec![EstimatorId::H]),
            &samples,
            None,
        )
        .unwrap()
    }

    #[test]
    fn per_window_predictions_follow_content() {
        let model = toy_model();
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x70D1);
        let mut data = vec![0u8; 8192];
        rng.fill_bytes(&mut data[4096..]);
        let cfg = config(4096, vec![EstimatorId::H]);
        let map = build_map_with(&data, &cfg, &registry(), Some(&model), Some(1)).unwrap();
        assert_eq!(map.records[0].predicted_type.as_ref().unwrap().as_str(), "flat");
        assert_eq!(map.records[1].predicted_type.as_ref().unwrap().as_str(), "busy");
    }

    #[test]
    fn single_type_stamps_every_record() {
        let model = toy_model();
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x70D2);
        let mut data = vec![0u8; 12288];
        rng.fill_bytes(&mut data);
        let mut cfg = config(4096, vec![EstimatorId::H]);
        cfg.output_mode = OutputMode::SingleType;
        let map = build_map_with(&data, &cfg, &registry(), Some(&model), Some(1)).unwrap();
        let labels: Vec<&str> = map
            .records
            .iter()
            .map(|r| r.predicted_type.as_ref().unwrap().as_str())
            .collect();
        assert_eq!(labels, vec!["busy"; 3]);
    }

    #[test]
    fn model_estimators_must_be_probed() {
        let model = toy_model();
        let cfg = config(4096, vec![EstimatorId::Zip]);
        let data = vec![0u8; 4096];
        assert!(matches!(
            build_map_with(&data, &cfg, &registry(), Some(&model), Some(1)),
            Err(Error::ModelMismatch(_))
        ));
    }

    #[test]
    fn passthrough_copies_stream_exactly() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x7EE7);
        let cfg = config(1024, vec![EstimatorId::H]);
        let reg = registry();
        for _ in 0..20 {
            let len = rng.gen_range(1..100_000);
            let mut data = vec![0u8; len];
            rng.fill_bytes(&mut data);
            let mut copied = Vec::new();
            probe_reader(&data[..], Some(&mut copied), &cfg, &reg, None, Some(1)).unwrap();
            assert_eq!(copied, data);
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let data = vec![0u8; 32];
        let cfg = ProbeConfig {
            window_size: 16,
            estimators: vec![EstimatorId::H, EstimatorId::Lz],
            ..ProbeConfig::default()
        };
        let map = build_map_with(&data, &cfg, &registry(), None, Some(1)).unwrap();
        let mut out = Vec::new();
        write_csv(&map, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        // 128 zero bits parse into 2 phrases: 2 * log2(128) / 128.
        let expected = "window_index,offset,length,H,LZ\n\
                        0,0,16,0.000000,0.109375\n\
                        1,16,16,0.000000,0.109375\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn csv_gains_prediction_column_with_model() {
        let model = toy_model();
        let data = vec![0u8; 4096];
        let cfg = config(4096, vec![EstimatorId::H]);
        let map = build_map_with(&data, &cfg, &registry(), Some(&model), Some(1)).unwrap();
        let mut out = Vec::new();
        write_csv(&map, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("window_index,offset,length,H,predicted_type\n"));
        assert!(text.contains(",flat\n"));
    }

    #[test]
    fn json_omits_timings_by_default() {
        let data = vec![0u8; 64];
        let cfg = config(16, vec![EstimatorId::H]);
        let map = build_map_with(&data, &cfg, &registry(), None, Some(1)).unwrap();
        let mut plain = Vec::new();
        write_json(&map, &mut plain, false).unwrap();
        let text = String::from_utf8(plain).unwrap();
        assert!(!text.contains("elapsed_us"));
        let mut timed = Vec::new();
        write_json(&map, &mut timed, true).unwrap();
        assert!(String::from_utf8(timed).unwrap().contains("elapsed_us"));
    }

    #[test]
    fn json_output_is_reproducible() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(0x3333);
        let mut data = vec![0u8; 20000];
        rng.fill_bytes(&mut data);
        let cfg = config(4096, vec![EstimatorId::H, EstimatorId::Zip]);
        let reg = registry();
        let mut runs = Vec::new();
        for _ in 0..2 {
            let map = build_map(&data, &cfg, &reg).unwrap();
            let mut out = Vec::new();
            write_json(&map, &mut out, false).unwrap();
            runs.push(out);
        }
        assert_eq!(runs[0], runs[1]);
    }

    proptest! {
        #[test]
        fn partition_covers_exactly(data in proptest::collection::vec(any::<u8>(), 0..4096), window in 16usize..128) {
            let windows = partition(&data, window);
            let total: usize = windows.iter().map(|w| w.payload.len()).sum();
            prop_assert_eq!(total, data.len());
            let mut expect = 0u64;
            for w in &windows {
                prop_assert_eq!(w.offset, expect);
                expect += w.payload.len() as u64;
            }
            for w in windows.iter().take(windows.len().saturating_sub(1)) {
                prop_assert_eq!(w.payload.len(), window);
            }
        }

        #[test]
        fn filter_parts_sum_to_whole(data in proptest::collection::vec(any::<u8>(), 0..2048), header in 1usize..8, extra in 1usize..16) {
            let record = header + extra;
            let heads = apply_filter(&data, &FilterSpec { mode: FilterMode::HeaderOnly, header_len: header, record_len: record });
            let tails = apply_filter(&data, &FilterSpec { mode: FilterMode::PayloadOnly, header_len: header, record_len: record });
            prop_assert_eq!(heads.len() + tails.len(), data.len());
            // Re-interleaving the two parts reconstructs the stream.
            let mut rebuilt = Vec::with_capacity(data.len());
            let (mut h, mut t) = (0, 0);
            while rebuilt.len() < data.len() {
                let take_h = header.min(heads.len() - h);
                rebuilt.extend_from_slice(&heads[h..h + take_h]);
                h += take_h;
                let take_t = extra.min(tails.len() - t).min(data.len() - rebuilt.len());
                rebuilt.extend_from_slice(&tails[t..t + take_t]);
                t += take_t;
                if take_h == 0 && take_t == 0 { break; }
            }
            prop_assert_eq!(rebuilt, data);
        }

        #[test]
        fn sample_length_matches_oracle(len in 0usize..20000, rate in 0.01f64..1.0) {
            let data = vec![0u8; len];
            let kept = sample(&data, rate);
            let mut expect = 0usize;
            let mut rest = len;
            while rest > 0 {
                let block = rest.min(SAMPLE_BLOCK);
                expect += (rate * block as f64).ceil() as usize;
                rest -= block;
            }
            prop_assert_eq!(kept.len(), expect);
        }
    }
}
