//! Measures estimator cost against window size and reports throughput per
//! synthetic type, the same studies the bench subcommand writes as figure
//! data.
//!
//! Run with: cargo run --release --example bench_profiles

use std::path::Path;

use kmap::bench::{profile_time_vs_window, throughput_per_type, write_fig10};
use kmap::corpus::synthetic_manifest;
use kmap::{EstimatorId, Result};

fn main() -> Result<()> {
    let manifest = synthetic_manifest(3, 65536, 1);
    let base = Path::new(".");
    let estimators = [EstimatorId::H, EstimatorId::Lz, EstimatorId::Zip];

    let report = profile_time_vs_window(&estimators, &[256, 1024, 4096, 16384], &manifest, base, 5)?;
    println!("median time per window (us), by window size:");
    let stdout = std::io::stdout();
    write_fig10(&report, stdout.lock()).expect("stdout write");

    let throughput = throughput_per_type(&estimators, 4096, &manifest, base, 5)?;
    println!("\nthroughput at 4096-byte windows (MB/s):");
    for agg in &throughput.aggregates {
        println!(
            "  {:4} on {:18} {:8.2}",
            agg.estimator.as_str(),
            agg.type_label.as_str(),
            agg.mean_throughput / 1e6
        );
    }
    Ok(())
}
