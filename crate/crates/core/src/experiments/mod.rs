//! Seeded experiments: the synthetic frequency-recovery benchmark, the band
//! importance demo, and data generators shared with tests and examples.

mod band_demo;
mod fixture;
mod synthetic;

pub use band_demo::{band_demo, band_demo_with, band_signal, BandDemoConfig, BandDemoOutcome};
pub use fixture::{sparse_fixture, SparseFixture};
pub use synthetic::{
    generate_dataset, oracle_model, run_benchmark, run_trial, Aggregate, BenchmarkReport,
    MethodOutcome, MethodSummary, ModelSource, ScoringSet, SyntheticConfig, SyntheticDataset,
    TrialOutcome, REPORT_FORMAT_VERSION,
};
