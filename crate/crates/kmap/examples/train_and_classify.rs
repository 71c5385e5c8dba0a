//! Trains a discriminant model on a synthetic corpus, evaluates it on a
//! held-out split, and classifies one fresh stream.
//!
//! Run with: cargo run --example train_and_classify

use std::path::Path;

use kmap::classifier::{evaluate, features_from_map, train, FeatureVector};
use kmap::corpus::{generate_synthetic, split, synthetic_manifest, Manifest, SyntheticKind, SyntheticSpec};
use kmap::{build_map, EstimatorRegistry, FeatureSchema, ProbeConfig, Result, SemanticType};

fn features(
    manifest: &Manifest,
    schema: &FeatureSchema,
    config: &ProbeConfig,
    registry: &EstimatorRegistry,
) -> Result<Vec<(FeatureVector, SemanticType)>> {
    let mut out = Vec::new();
    for entry in &manifest.entries {
        let data = entry.read_bytes(Path::new("."))?;
        let map = build_map(&data, config, registry)?;
        out.push((features_from_map(&map, schema)?, entry.label.clone()));
    }
    Ok(out)
}

fn main() -> Result<()> {
    let manifest = synthetic_manifest(12, 16384, 42);
    let (train_set, test_set) = split(&manifest, 0.3, manifest.seed)?;

    let config = ProbeConfig::default();
    let registry = EstimatorRegistry::standard();
    let schema = FeatureSchema::new(config.estimators.clone());

    let model = train(&schema, &features(&train_set, &schema, &config, &registry)?, None)?;
    let eval = evaluate(&model, &features(&test_set, &schema, &config, &registry)?)?;

    println!(
        "trained on {} samples, tested on {}",
        train_set.entries.len(),
        test_set.entries.len()
    );
    for (group, acc) in eval.groups.iter().zip(&eval.per_group) {
        println!("  {:18} accuracy {acc:.3}", group.as_str());
    }
    println!("overall accuracy {:.3}", eval.overall);

    // Classify a stream the corpus has never seen.
    let fresh = generate_synthetic(&SyntheticSpec {
        kind: SyntheticKind::PcmSineMix,
        length: 16384,
        seed: 9999,
    })?;
    let map = build_map(&fresh, &config, &registry)?;
    println!("fresh sine mix classified as {}", model.classify_file(&map)?);
    Ok(())
}
