//! Windowed complexity maps and semantic-type discrimination for byte
//! streams.
//!
//! The crate estimates how compressible, repetitive, or noisy a stream is
//! using five cheap approximations of its information content, then turns
//! those estimates into features for a linear discriminant over broad
//! semantic types (text, audio, executables, and so on).
//!
//! The pieces compose as a pipeline:
//!
//! - [`estimators`] scores a byte window by entropy, dictionary structure,
//!   compressed size, block-sorted size, or spectral entropy.
//! - [`probe`] slides those estimators over a stream (with optional record
//!   filtering and sampling) to build a [`probe::ComplexityMap`].
//! - [`classifier`] trains and applies discriminant models over map
//!   features, and suggests merging types the features cannot separate.
//! - [`corpus`] manages labeled sample sets, deterministic synthetic
//!   generators, and train/test splits.
//! - [`bench`] measures estimator cost against window size, complexity,
//!   and accuracy, and writes the figure datasets.
//!
//! The `kmap` binary exposes the same pipeline as subcommands; the
//! `examples/` directory shows each library entry point in isolation.

pub mod bench;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod estimators;
pub mod probe;

pub use classifier::{DiscriminantModel, FeatureSchema, FeatureVector, SemanticType};
pub use error::{Error, Result};
pub use estimators::{ByteWindow, ComplexityEstimate, EstimatorId, EstimatorRegistry};
pub use probe::{build_map, ComplexityMap, ProbeConfig};
