//! Runs every estimator over a few contrasting inputs and prints the
//! normalized complexity each one reports.
//!
//! Run with: cargo run --example estimate_bytes

use kmap::corpus::{generate_synthetic, SyntheticKind, SyntheticSpec};
use kmap::{ByteWindow, EstimatorRegistry, Result};

fn main() -> Result<()> {
    let registry = EstimatorRegistry::standard();

    let mut inputs: Vec<(&str, Vec<u8>)> = vec![
        ("all zeros", vec![0u8; 4096]),
        ("alternating", (0..4096).map(|i| (i % 2 * 255) as u8).collect()),
    ];
    for kind in [
        SyntheticKind::MarkovText,
        SyntheticKind::PcmSineMix,
        SyntheticKind::RandomBytes,
    ] {
        let spec = SyntheticSpec {
            kind,
            length: 4096,
            seed: 11,
        };
        inputs.push((kind.as_str(), generate_synthetic(&spec)?));
    }

    let ids = registry.ids();
    print!("{:18}", "input");
    for id in &ids {
        print!(" {:>8}", id.as_str());
    }
    println!();

    for (name, data) in &inputs {
        let window = ByteWindow::new(0, data);
        print!("{name:18}");
        for &id in &ids {
            let est = registry.run(id, &window)?;
            print!(" {:>8.4}", est.value);
        }
        println!();
    }
    Ok(())
}
