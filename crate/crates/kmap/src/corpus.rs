//! Labeled corpora: directory ingestion, train/test splitting, deterministic
//! synthetic generators, and payload splicing for embedded-type experiments.
//!
//! Generators are byte-reproducible across runs and platforms: they draw
//! from an explicitly seeded xoshiro generator and avoid platform libm.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::classifier::SemanticType;
use crate::error::{Error, Result};

/// How many samples per type the experiments assume as a minimum.
pub const RECOMMENDED_MIN_SAMPLES: usize = 10;

/// Which side of a train/test split an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Test,
}

/// The synthetic sample families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    RandomBytes,
    RepeatedPattern,
    MarkovText,
    PcmSineMix,
    StructuredBinary,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 5] = [
        SyntheticKind::RandomBytes,
        SyntheticKind::RepeatedPattern,
        SyntheticKind::MarkovText,
        SyntheticKind::PcmSineMix,
        SyntheticKind::StructuredBinary,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SyntheticKind::RandomBytes => "random_bytes",
            SyntheticKind::RepeatedPattern => "repeated_pattern",
            SyntheticKind::MarkovText => "markov_text",
            SyntheticKind::PcmSineMix => "pcm_sine_mix",
            SyntheticKind::StructuredBinary => "structured_binary",
        }
    }
}

impl std::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "unknown synthetic kind {s:?}; known kinds: random_bytes, \
                     repeated_pattern, markov_text, pcm_sine_mix, structured_binary"
                ))
            })
    }
}

/// A fully determined synthetic sample: identical specs generate identical
/// bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub length: u64,
    pub seed: u64,
}

/// Where a sample's bytes come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSource {
    /// A file path relative to the manifest location.
    Path { path: String },
    /// A generator invocation.
    Synthetic { synthetic: SyntheticSpec },
}

/// One labeled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: SampleSource,
    pub label: SemanticType,
    pub split: SplitTag,
    pub length: u64,
}

impl ManifestEntry {
    /// Materializes the sample's bytes. `base` anchors relative paths and
    /// is usually the manifest's directory.
    pub fn read_bytes(&self, base: &Path) -> Result<Vec<u8>> {
        match &self.source {
            SampleSource::Path { path } => {
                let full = base.join(path);
                std::fs::read(&full).map_err(|e| Error::io(full.display().to_string(), e))
            }
            SampleSource::Synthetic { synthetic } => generate_synthetic(synthetic),
        }
    }
}

/// A labeled sample collection, stored on disk as JSON lines: a meta line
/// carrying the split seed, then one entry per line.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    seed: u64,
}

impl Manifest {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            entries: Vec::new(),
        }
    }

    /// Entries carrying a given split tag.
    pub fn with_tag(&self, tag: SplitTag) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == tag)
    }

    /// Distinct labels in entry order of first appearance.
    pub fn labels(&self) -> Vec<SemanticType> {
        let mut out: Vec<SemanticType> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.label) {
                out.push(e.label.clone());
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string(&MetaLine { seed: self.seed })
            .expect("meta line always serializes");
        text.push('\n');
        for entry in &self.entries {
            text.push_str(&serde_json::to_string(entry).map_err(|e| {
                Error::InvalidConfig(format!("manifest entry serialization failed: {e}"))
            })?);
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let invalid = |reason: String| Error::InvalidFile {
            path: path.display().to_string(),
            reason,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let meta: MetaLine = match lines.next() {
            Some(first) => serde_json::from_str(first)
                .map_err(|e| invalid(format!("bad meta line: {e}")))?,
            None => return Err(invalid("empty manifest".to_string())),
        };
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let entry: ManifestEntry = serde_json::from_str(line)
                .map_err(|e| invalid(format!("bad entry on line {}: {e}", i + 2)))?;
            entries.push(entry);
        }
        Ok(Self {
            seed: meta.seed,
            entries,
        })
    }
}

/// Walks a directory with one subdirectory per semantic type and collects
/// every regular file into a manifest. Paths are stored relative to `root`.
/// Returns warnings (unreadable or empty files, under-populated types)
/// rather than failing on them; an unparseable type directory name is a
/// hard error.
pub fn scan_corpus(root: &Path) -> Result<(Manifest, Vec<String>)> {
    let read_dir = |p: &Path| -> Result<Vec<std::fs::DirEntry>> {
        let iter = std::fs::read_dir(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        let mut out = Vec::new();
        for entry in iter {
            out.push(entry.map_err(|e| Error::io(p.display().to_string(), e))?);
        }
        out.sort_by_key(|e| e.file_name());
        Ok(out)
    };

    let mut manifest = Manifest::new(0);
    let mut warnings = Vec::new();
    for dir in read_dir(root)? {
        let is_dir = dir.file_type().map(|t| t.is_dir()).unwrap_or(false);
        if !is_dir {
            continue;
        }
        let name = dir.file_name();
        let label = SemanticType::new(&name.to_string_lossy())?;
        let mut count = 0usize;
        for file in read_dir(&dir.path())? {
            let rel = format!("{}/{}", name.to_string_lossy(), file.file_name().to_string_lossy());
            let meta = match file.metadata() {
                Ok(m) => m,
                Err(e) => {
                    warnings.push(format!("skipping {rel}: {e}"));
                    continue;
                }
            };
            if !meta.is_file() {
                continue;
            }
            if meta.len() == 0 {
                warnings.push(format!("skipping {rel}: empty file"));
                continue;
            }
            manifest.entries.push(ManifestEntry {
                source: SampleSource::Path { path: rel },
                label: label.clone(),
                split: SplitTag::Train,
                length: meta.len(),
            });
            count += 1;
        }
        if count < RECOMMENDED_MIN_SAMPLES {
            warnings.push(format!(
                "type {label} has {count} sample(s); experiments assume at least \
                 {RECOMMENDED_MIN_SAMPLES} per type"
            ));
        }
    }
    Ok((manifest, warnings))
}

/// Stratified train/test split. Every type lands at least one entry on each
/// side; entry order within each output follows the input manifest.
pub fn split(manifest: &Manifest, test_fraction: f64, seed: u64) -> Result<(Manifest, Manifest)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_label: BTreeMap<&SemanticType, Vec<usize>> = BTreeMap::new();
    for (i, entry) in manifest.entries.iter().enumerate() {
        by_label.entry(&entry.label).or_default().push(i);
    }
    for (label, idxs) in &by_label {
        if idxs.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "type {label} has {} sample(s); splitting needs at least 2",
                idxs.len()
            )));
        }
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut is_test = vec![false; manifest.entries.len()];
    for idxs in by_label.values() {
        let mut shuffled = idxs.clone();
        shuffled.shuffle(&mut rng);
        let want = (test_fraction * idxs.len() as f64).round() as usize;
        let n_test = want.clamp(1, idxs.len() - 1);
        for &i in &shuffled[..n_test] {
            is_test[i] = true;
        }
    }
    let mut train = Manifest::new(seed);
    let mut test = Manifest::new(seed);
    for (i, entry) in manifest.entries.iter().enumerate() {
        let (dest, tag) = if is_test[i] {
            (&mut test, SplitTag::Test)
        } else {
            (&mut train, SplitTag::Train)
        };
        dest.entries.push(ManifestEntry {
            split: tag,
            ..entry.clone()
        });
    }
    Ok((train, test))
}

// Salt mixed into the seed so different kinds with the same seed draw
// unrelated streams.
fn kind_rng(spec: &SyntheticSpec) -> Xoshiro256StarStar {
    let salt = (spec.kind as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    Xoshiro256StarStar::seed_from_u64(spec.seed ^ salt)
}

/// Generates a synthetic sample. Identical specs give identical bytes.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<u8>> {
    if spec.length == 0 {
        return Err(Error::InvalidSpec(
            "synthetic sample length must be positive".to_string(),
        ));
    }
    let len = spec.length as usize;
    let mut rng = kind_rng(spec);
    let out = match spec.kind {
        SyntheticKind::RandomBytes => {
            let mut out = vec![0u8; len];
            rng.fill_bytes(&mut out);
            out
        }
        SyntheticKind::RepeatedPattern => {
            let motif_len = rng.gen_range(2..=16);
            let mut motif = vec![0u8; motif_len];
            rng.fill_bytes(&mut motif);
            motif.iter().cycle().take(len).copied().collect()
        }
        SyntheticKind::MarkovText => markov_text(len, &mut rng),
        SyntheticKind::PcmSineMix => pcm_sine_mix(len, &mut rng),
        SyntheticKind::StructuredBinary => structured_binary(len, &mut rng),
    };
    debug_assert_eq!(out.len(), len);
    Ok(out)
}

// Public-domain English used to seed the character model: the openings of
// the Declaration of Independence, the Constitution, and the Gettysburg
// Address.
const EXCERPT: &str = "When in the course of human events, it becomes necessary for one \
people to dissolve the political bands which have connected them with another, and to \
assume among the powers of the earth, the separate and equal station to which the laws \
of nature and of nature's God entitle them, a decent respect to the opinions of mankind \
requires that they should declare the causes which impel them to the separation. We hold \
these truths to be self-evident, that all men are created equal, that they are endowed \
by their Creator with certain unalienable rights, that among these are life, liberty and \
the pursuit of happiness. That to secure these rights, governments are instituted among \
men, deriving their just powers from the consent of the governed. That whenever any form \
of government becomes destructive of these ends, it is the right of the people to alter \
or to abolish it, and to institute new government, laying its foundation on such \
principles and organizing its powers in such form, as to them shall seem most likely to \
effect their safety and happiness. We the people of the United States, in order to form \
a more perfect union, establish justice, insure domestic tranquility, provide for the \
common defence, promote the general welfare, and secure the blessings of liberty to \
ourselves and our posterity, do ordain and establish this Constitution for the United \
States of America. Four score and seven years ago our fathers brought forth on this \
continent a new nation, conceived in liberty, and dedicated to the proposition that all \
men are created equal. Now we are engaged in a great civil war, testing whether that \
nation, or any nation so conceived and so dedicated, can long endure. We are met on a \
great battlefield of that war. We have come to dedicate a portion of that field, as a \
final resting place for those who here gave their lives that that nation might live. It \
is altogether fitting and proper that we should do this.";

// Order-2 character model over the excerpt. The transition table wraps
// around so every observed state has at least one successor.
fn markov_text(len: usize, rng: &mut Xoshiro256StarStar) -> Vec<u8> {
    let bytes = EXCERPT.as_bytes();
    let mut table: HashMap<(u8, u8), Vec<u8>> = HashMap::new();
    for i in 0..bytes.len() {
        let a = bytes[i];
        let b = bytes[(i + 1) % bytes.len()];
        let c = bytes[(i + 2) % bytes.len()];
        table.entry((a, b)).or_default().push(c);
    }
    let mut state = (bytes[0], bytes[1]);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let successors = &table[&state];
        let c = successors[rng.gen_range(0..successors.len())];
        out.push(c);
        state = (state.1, c);
    }
    out
}

// sin(2*pi*u) by quadrant folding and an odd Taylor polynomial on [0, pi/2].
// Every operation is basic IEEE arithmetic, so output bytes match across
// platforms, which libm's sin does not guarantee.
fn sin_turns(u: f64) -> f64 {
    let u = u - u.floor();
    let (sign, q) = if u < 0.25 {
        (1.0, u)
    } else if u < 0.5 {
        (1.0, 0.5 - u)
    } else if u < 0.75 {
        (-1.0, u - 0.5)
    } else {
        (-1.0, 1.0 - u)
    };
    let x = 2.0 * std::f64::consts::PI * q;
    let x2 = x * x;
    let p = x * (1.0
        + x2 * (-1.0 / 6.0
            + x2 * (1.0 / 120.0
                + x2 * (-1.0 / 5040.0
                    + x2 * (1.0 / 362_880.0
                        + x2 * (-1.0 / 39_916_800.0 + x2 / 6_227_020_800.0))))));
    sign * p
}

// Three seeded sinusoids summed, normalized, and quantized to bytes. The
// frequency range stays well below Nyquist so the waveform is smooth at
// byte scale, the way oversampled program audio is.
fn pcm_sine_mix(len: usize, rng: &mut Xoshiro256StarStar) -> Vec<u8> {
    let mut freqs = [0.0f64; 3];
    let mut amps = [0.0f64; 3];
    let mut phases = [0.0f64; 3];
    for i in 0..3 {
        freqs[i] = rng.gen_range(0.002..0.02);
        amps[i] = rng.gen_range(0.25..1.0);
        phases[i] = rng.gen_range(0.0..1.0);
    }
    let total: f64 = amps.iter().sum();
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let mut v = 0.0;
        for i in 0..3 {
            v += amps[i] * sin_turns(freqs[i] * t as f64 + phases[i]);
        }
        out.push((127.5 + 127.0 * (v / total)).round() as u8);
    }
    out
}

// Alternating zero runs and random runs, shaped like sectioned binaries.
fn structured_binary(len: usize, rng: &mut Xoshiro256StarStar) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    loop {
        let zeros = rng.gen_range(32..=512).min(len - out.len());
        out.resize(out.len() + zeros, 0);
        if out.len() == len {
            return out;
        }
        let data = rng.gen_range(64..=1024).min(len - out.len());
        let start = out.len();
        out.resize(start + data, 0);
        rng.fill_bytes(&mut out[start..]);
        if out.len() == len {
            return out;
        }
    }
}

/// Overwrites `container[offset..offset+payload.len()]` with the payload
/// and returns the new sequence plus the ground-truth span for scoring
/// embedded-type detection.
pub fn splice(container: &[u8], payload: &[u8], offset: usize) -> Result<(Vec<u8>, Range<usize>)> {
    let end = offset.checked_add(payload.len()).ok_or_else(|| {
        Error::InvalidSpan(format!(
            "span start {offset} plus length {} overflows",
            payload.len()
        ))
    })?;
    if end > container.len() {
        return Err(Error::InvalidSpan(format!(
            "span {offset}..{end} exceeds container length {}",
            container.len()
        )));
    }
    let mut out = container.to_vec();
    out[offset..end].copy_from_slice(payload);
    Ok((out, offset..end))
}

/// Builds an all-synthetic manifest: `per_kind` samples of each generator
/// kind, labeled by kind name, each with its own derived seed.
pub fn synthetic_manifest(per_kind: usize, length: u64, seed: u64) -> Manifest {
    let mut manifest = Manifest::new(seed);
    for (k, kind) in SyntheticKind::ALL.iter().enumerate() {
        let label = SemanticType::new(kind.as_str()).expect("kind names are valid types");
        for i in 0..per_kind {
            let sample_seed = seed
                .wrapping_add((k as u64) << 32)
                .wrapping_add(i as u64);
            manifest.entries.push(ManifestEntry {
                source: SampleSource::Synthetic {
                    synthetic: SyntheticSpec {
                        kind: *kind,
                        length,
                        seed: sample_seed,
                    },
                },
                label: label.clone(),
                split: SplitTag::Train,
                length,
            });
        }
    }
    manifest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{estimate_zip, ByteWindow};
    use std::io::Write;

    fn spec(kind: SyntheticKind, length: u64, seed: u64) -> SyntheticSpec {
        SyntheticSpec { kind, length, seed }
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in SyntheticKind::ALL {
            let s = spec(kind, 4096, 7);
            let a = generate_synthetic(&s).unwrap();
            let b = generate_synthetic(&s).unwrap();
            assert_eq!(a, b, "kind {kind} not reproducible");
            assert_eq!(a.len(), 4096);
            let c = generate_synthetic(&spec(kind, 4096, 8)).unwrap();
            assert_ne!(a, c, "kind {kind} ignores its seed");
        }
    }

    #[test]
    fn zero_length_is_rejected() {
        let s = spec(SyntheticKind::RandomBytes, 0, 1);
        assert!(matches!(
            generate_synthetic(&s),
            Err(Error::InvalidSpec(_))
        ));
    }

    fn zip_value(data: &[u8]) -> f64 {
        estimate_zip(&ByteWindow::new(0, data)).unwrap().value
    }

    // Reference compressor ratio, independent of our own deflate.
    fn flate2_ratio(data: &[u8]) -> f64 {
        let mut enc =
            flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::best());
        enc.write_all(data).unwrap();
        enc.finish().unwrap().len() as f64 / data.len() as f64
    }

    #[test]
    fn random_bytes_are_incompressible() {
        let data = generate_synthetic(&spec(SyntheticKind::RandomBytes, 8192, 1)).unwrap();
        assert!(zip_value(&data) >= 0.95, "got {}", zip_value(&data));
        assert!(flate2_ratio(&data) >= 0.95);
    }

    #[test]
    fn markov_text_compresses_better_than_noise() {
        let text = generate_synthetic(&spec(SyntheticKind::MarkovText, 8192, 1)).unwrap();
        let noise = generate_synthetic(&spec(SyntheticKind::RandomBytes, 8192, 1)).unwrap();
        assert!(zip_value(&text) < zip_value(&noise));
        assert!(flate2_ratio(&text) < flate2_ratio(&noise));
        assert!(text.iter().all(|b| b.is_ascii()), "model left the excerpt alphabet");
    }

    #[test]
    fn repeated_pattern_is_highly_compressible() {
        let data = generate_synthetic(&spec(SyntheticKind::RepeatedPattern, 8192, 3)).unwrap();
        assert!(zip_value(&data) < 0.2, "got {}", zip_value(&data));
    }

    #[test]
    fn sine_mix_has_concentrated_spectrum() {
        use crate::estimators::estimate_psi;
        let tone = generate_synthetic(&spec(SyntheticKind::PcmSineMix, 8192, 5)).unwrap();
        let noise = generate_synthetic(&spec(SyntheticKind::RandomBytes, 8192, 5)).unwrap();
        let psi = |d: &[u8]| estimate_psi(&ByteWindow::new(0, d)).unwrap().value;
        assert!(psi(&tone) < psi(&noise), "{} vs {}", psi(&tone), psi(&noise));
    }

    #[test]
    fn structured_binary_sits_between_pattern_and_noise() {
        let s = generate_synthetic(&spec(SyntheticKind::StructuredBinary, 16384, 9)).unwrap();
        let v = zip_value(&s);
        assert!(v > 0.1 && v < 0.95, "got {v}");
        assert!(s.contains(&0));
    }

    #[test]
    fn portable_sine_matches_libm_closely() {
        for i in 0..1000 {
            let u = i as f64 / 999.0 * 3.0 - 1.0;
            let want = (2.0 * std::f64::consts::PI * u).sin();
            assert!((sin_turns(u) - want).abs() < 1e-9, "at {u}");
        }
    }

    #[test]
    fn splice_replaces_exact_span() {
        let container = vec![0u8; 100];
        let payload = vec![9u8; 10];
        let (out, span) = splice(&container, &payload, 40).unwrap();
        assert_eq!(span, 40..50);
        assert_eq!(out.len(), container.len());
        assert!(out[40..50].iter().all(|&b| b == 9));
        assert!(out[..40].iter().chain(&out[50..]).all(|&b| b == 0));

        let (all, span) = splice(&container, &[1u8; 100], 0).unwrap();
        assert_eq!(span, 0..100);
        assert!(all.iter().all(|&b| b == 1));

        let (same, span) = splice(&container, &[], 30).unwrap();
        assert_eq!(span, 30..30);
        assert_eq!(same, container);

        assert!(matches!(
            splice(&container, &payload, 95),
            Err(Error::InvalidSpan(_))
        ));
    }

    #[test]
    fn scan_finds_labeled_files() {
        let dir = tempfile::tempdir().unwrap();
        let txt = dir.path().join("Txt");
        std::fs::create_dir(&txt).unwrap();
        for i in 0..3 {
            std::fs::write(txt.join(format!("s{i}.txt")), b"hello world").unwrap();
        }
        std::fs::write(dir.path().join("stray.bin"), b"ignored").unwrap();
        let (manifest, warnings) = scan_corpus(dir.path()).unwrap();
        assert_eq!(manifest.entries.len(), 3);
        for e in &manifest.entries {
            assert_eq!(e.label.as_str(), "Txt");
            assert_eq!(e.length, 11);
            assert!(matches!(&e.source, SampleSource::Path { path } if path.starts_with("Txt/")));
            assert_eq!(e.read_bytes(dir.path()).unwrap(), b"hello world");
        }
        assert!(warnings.iter().any(|w| w.contains("at least 10")));
    }

    #[test]
    fn scan_empty_root_is_fine() {
        let dir = tempfile::tempdir().unwrap();
        let (manifest, warnings) = scan_corpus(dir.path()).unwrap();
        assert!(manifest.entries.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn scan_rejects_unparseable_type_dirs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("not a type")).unwrap();
        assert!(matches!(
            scan_corpus(dir.path()),
            Err(Error::UnknownType(_))
        ));
    }

    #[test]
    fn scan_skips_empty_files_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let txt = dir.path().join("Txt");
        std::fs::create_dir(&txt).unwrap();
        std::fs::write(txt.join("empty"), b"").unwrap();
        std::fs::write(txt.join("full"), b"data").unwrap();
        let (manifest, warnings) = scan_corpus(dir.path()).unwrap();
        assert_eq!(manifest.entries.len(), 1);
        assert!(warnings.iter().any(|w| w.contains("empty file")));
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let manifest = synthetic_manifest(10, 1024, 42);
        let (train, test) = split(&manifest, 0.3, 99).unwrap();
        let (train2, test2) = split(&manifest, 0.3, 99).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        assert_eq!(train.entries.len() + test.entries.len(), manifest.entries.len());
        for label in manifest.labels() {
            let n_train = train.entries.iter().filter(|e| e.label == label).count();
            let n_test = test.entries.iter().filter(|e| e.label == label).count();
            assert_eq!(n_train, 7, "label {label}");
            assert_eq!(n_test, 3, "label {label}");
        }
        assert!(train.entries.iter().all(|e| e.split == SplitTag::Train));
        assert!(test.entries.iter().all(|e| e.split == SplitTag::Test));

        // Disjointness over the sample identities.
        for e in &test.entries {
            assert!(!train.entries.iter().any(|t| t.source == e.source));
        }

        let (_, other) = split(&manifest, 0.3, 100).unwrap();
        assert_ne!(test, other, "different seeds should shuffle differently");
    }

    #[test]
    fn split_always_populates_both_sides() {
        let mut manifest = synthetic_manifest(2, 512, 1);
        let (train, test) = split(&manifest, 0.05, 7).unwrap();
        for label in manifest.labels() {
            assert!(train.entries.iter().any(|e| e.label == label));
            assert!(test.entries.iter().any(|e| e.label == label));
        }
        manifest.entries.truncate(1);
        assert!(matches!(
            split(&manifest, 0.3, 7),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn manifest_roundtrips_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let mut manifest = synthetic_manifest(2, 256, 5);
        manifest.entries.push(ManifestEntry {
            source: SampleSource::Path {
                path: "Txt/sample.txt".to_string(),
            },
            label: SemanticType::new("Txt").unwrap(),
            split: SplitTag::Test,
            length: 99,
        });
        manifest.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"seed\":5"));
        assert_eq!(text.lines().count(), 1 + manifest.entries.len());
        let loaded = Manifest::load(&path).unwrap();
        assert_eq!(loaded, manifest);
    }

    #[test]
    fn corrupt_manifest_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        std::fs::write(&path, "{\"seed\":1}\nnot json\n").unwrap();
        assert!(matches!(
            Manifest::load(&path),
            Err(Error::InvalidFile { .. })
        ));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            Manifest::load(&path),
            Err(Error::InvalidFile { .. })
        ));
    }

    #[test]
    fn synthetic_manifest_reads_back_deterministically() {
        let manifest = synthetic_manifest(3, 2048, 11);
        assert_eq!(manifest.entries.len(), 15);
        let base = Path::new(".");
        for e in &manifest.entries {
            let a = e.read_bytes(base).unwrap();
            let b = e.read_bytes(base).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len() as u64, e.length);
        }
        // Distinct samples within a kind really differ.
        let a = manifest.entries[0].read_bytes(base).unwrap();
        let b = manifest.entries[1].read_bytes(base).unwrap();
        assert_ne!(a, b);
    }
}
