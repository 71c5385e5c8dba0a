//! Shows the squared-distance matrix catching two labels that are really
//! the same thing, and the merge-retrain loop that fixes it.
//!
//! Run with: cargo run --example merge_suggestions

use std::path::Path;

use kmap::classifier::{
    features_from_map, merge_types, suggest_merges, train, FeatureVector,
};
use kmap::corpus::{Manifest, ManifestEntry, SampleSource, SplitTag, SyntheticKind, SyntheticSpec};
use kmap::{build_map, EstimatorRegistry, FeatureSchema, ProbeConfig, Result, SemanticType};

fn entry(label: &str, kind: SyntheticKind, seed: u64) -> Result<ManifestEntry> {
    Ok(ManifestEntry {
        source: SampleSource::Synthetic {
            synthetic: SyntheticSpec {
                kind,
                length: 16384,
                seed,
            },
        },
        label: label.parse()?,
        split: SplitTag::Train,
        length: 16384,
    })
}

fn main() -> Result<()> {
    // NoiseA and NoiseB come from the same generator under different
    // labels; the other two kinds are genuinely distinct.
    let mut manifest = Manifest::new(0);
    for i in 0..10u64 {
        manifest.entries.push(entry("NoiseA", SyntheticKind::RandomBytes, i)?);
        manifest.entries.push(entry("NoiseB", SyntheticKind::RandomBytes, 100 + i)?);
        manifest.entries.push(entry("Prose", SyntheticKind::MarkovText, i)?);
        manifest.entries.push(entry("Tone", SyntheticKind::PcmSineMix, i)?);
    }

    let config = ProbeConfig::default();
    let registry = EstimatorRegistry::standard();
    let schema = FeatureSchema::new(config.estimators.clone());
    let mut samples: Vec<(FeatureVector, SemanticType)> = Vec::new();
    for entry in &manifest.entries {
        let data = entry.read_bytes(Path::new("."))?;
        let map = build_map(&data, &config, &registry)?;
        samples.push((features_from_map(&map, &schema)?, entry.label.clone()));
    }

    let model = train(&schema, &samples, None)?;
    let matrix = model.squared_distance_matrix()?;
    println!("{matrix}");

    let threshold = 1.0;
    let suggestions = suggest_merges(&matrix, threshold);
    if suggestions.is_empty() {
        println!("no pairs fall below squared distance {threshold}");
        return Ok(());
    }
    for s in &suggestions {
        println!("suggest merging {} and {} (d2 = {:.4})", s.a, s.b, s.d2);
    }

    let pairs: Vec<(SemanticType, SemanticType)> = suggestions
        .iter()
        .map(|s| (s.a.clone(), s.b.clone()))
        .collect();
    let merged = merge_types(&samples, &pairs);
    let remodel = train(&schema, &merged, None)?;
    println!("\nafter merging, groups are:");
    for group in &remodel.groups {
        println!("  {group}");
    }
    Ok(())
}
