//! Heavy-hitter identification over network streams with invertible hashes.
//!
//! Keys are mangled by a multiplicative permutation of the 32-bit keyspace
//! and split into digits that index small counter arrays. Because the
//! permutation is invertible, the bins a heavy key lands in decode straight
//! back to the key. Four sketches build on this:
//!
//! - [`ShpSketch`]: one counter row per digit.
//! - [`MaxCountSketch`]: the same rows split further into thinned substreams.
//! - [`BoyerMooreSketch`]: a weighted majority vote per thinned substream.
//! - [`MaxStableSketch`]: Fréchet max-sketches for distinct-element signals.
//!
//! [`oracle`] and [`metrics`] give exact ground truth and scoring,
//! [`bounds`] the analytic recovery guarantees and their Monte-Carlo check,
//! and [`stream`] flow-record parsing, signal extraction, synthetic traces
//! and windowing.

pub mod bounds;
pub mod error;
pub mod keyspace;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod sketch;
pub mod stream;

pub use error::{Error, ParseError, Result};
pub use keyspace::{HashConfig, Key, PermutationParams};
pub use metrics::{score, Footprint, MemoryFootprint, MetricResult};
pub use oracle::{ScalarTruth, SetTruth, TruthEntry};
pub use report::{Algorithm, ElementKind, HeavyHitterReport, ReportEntry, Unit};
pub use sketch::{
    BoyerMooreSketch, Estimator, MaxCountSketch, MaxStableSketch, ScalarSketch, SetElement,
    ShpSketch,
};
