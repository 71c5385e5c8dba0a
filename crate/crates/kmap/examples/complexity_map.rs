//! Builds a windowed complexity map over a stream that changes character
//! partway through, and prints it as CSV.
//!
//! Run with: cargo run --example complexity_map

use kmap::corpus::{generate_synthetic, SyntheticKind, SyntheticSpec};
use kmap::probe::write_csv;
use kmap::{build_map, EstimatorRegistry, ProbeConfig, Result};

fn main() -> Result<()> {
    // Text, then compressed-looking noise, then text again: the map should
    // show a complexity plateau in the middle third.
    let text = generate_synthetic(&SyntheticSpec {
        kind: SyntheticKind::MarkovText,
        length: 16384,
        seed: 5,
    })?;
    let noise = generate_synthetic(&SyntheticSpec {
        kind: SyntheticKind::RandomBytes,
        length: 16384,
        seed: 5,
    })?;
    let mut stream = text.clone();
    stream.extend_from_slice(&noise);
    stream.extend_from_slice(&text);

    let config = ProbeConfig::default();
    let registry = EstimatorRegistry::standard();
    let map = build_map(&stream, &config, &registry)?;

    let stdout = std::io::stdout();
    write_csv(&map, stdout.lock()).expect("stdout write");
    eprintln!(
        "{} windows of {} bytes in {}us",
        map.records.len(),
        config.window_size,
        map.total_elapsed_us
    );
    Ok(())
}
