//! Hides high-entropy bytes inside a text stream and finds them again from
//! the per-window type predictions of a complexity map.
//!
//! Run with: cargo run --example detect_embedded

use std::path::Path;

use kmap::classifier::{features_from_map, train, FeatureVector};
use kmap::corpus::{generate_synthetic, splice, synthetic_manifest, SyntheticKind, SyntheticSpec};
use kmap::probe::build_map_with;
use kmap::{build_map, EstimatorRegistry, FeatureSchema, ProbeConfig, Result, SemanticType};

fn main() -> Result<()> {
    let config = ProbeConfig::default();
    let registry = EstimatorRegistry::standard();
    let schema = FeatureSchema::new(config.estimators.clone());

    // Train on the synthetic kinds so the model knows what text and noise
    // windows look like.
    let manifest = synthetic_manifest(12, 16384, 42);
    let mut samples: Vec<(FeatureVector, SemanticType)> = Vec::new();
    for entry in &manifest.entries {
        let data = entry.read_bytes(Path::new("."))?;
        let map = build_map(&data, &config, &registry)?;
        samples.push((features_from_map(&map, &schema)?, entry.label.clone()));
    }
    let model = train(&schema, &samples, None)?;

    // Bury 4 KiB of random bytes a quarter of the way into 64 KiB of text.
    let text = generate_synthetic(&SyntheticSpec {
        kind: SyntheticKind::MarkovText,
        length: 65536,
        seed: 7,
    })?;
    let payload = generate_synthetic(&SyntheticSpec {
        kind: SyntheticKind::RandomBytes,
        length: 4096,
        seed: 8,
    })?;
    let (stream, span) = splice(&text, &payload, 16384)?;
    println!(
        "spliced {} noise bytes into text at {}..{}",
        payload.len(),
        span.start,
        span.end
    );

    let map = build_map_with(&stream, &config, &registry, Some(&model), None)?;
    let text_label: SemanticType = "markov_text".parse()?;
    for record in &map.records {
        let Some(predicted) = &record.predicted_type else {
            continue;
        };
        if *predicted != text_label {
            let start = record.offset as usize;
            let end = start + record.length;
            let overlaps = start < span.end && span.start < end;
            println!(
                "window {:2} at {start:6}..{end:6} looks like {predicted}{}",
                record.window_index,
                if overlaps { "  <- the hidden span" } else { "" }
            );
        }
    }
    Ok(())
}
