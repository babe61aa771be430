//! Window-size sweep, reporting and the synthetic corpus.

mod cache;
mod report;
mod sweep;
mod synth;

pub use cache::FeatureCache;
pub use report::{
    band_mean, emit_report, parse_sweep_csv, peak, render_svg, summarize_sweep, sweep_csv,
    sweep_k_csv, CurveSummary, Summary, SweepCsvRow, LATE_BAND, PLATEAU_BAND, SUMMARY_JSON,
    SWEEP_CSV, SWEEP_CSV_HEADER, SWEEP_K_CSV, SWEEP_SVG,
};
pub use sweep::{
    default_window_sizes, extract_window_features, run_sweep, run_sweep_with, InputDigest,
    KAccuracy, SweepConfig, SweepOptions, SweepRecord, SweepResult, WindowFeatures,
};
pub use synth::{
    generate_synthetic_corpus, synth_clip, MANIFEST_NAME, SYNTH_SAMPLE_RATE, SYNTH_SECONDS,
};
