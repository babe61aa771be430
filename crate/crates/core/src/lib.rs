//! Normal/abnormal respiratory-sound classification from MFCC summary
//! statistics with a leave-one-out KNN, and a sweep of analysis-window
//! sizes over a labeled corpus.
//!
//! Pipeline per recording and window size:
//! leading window → 50%-overlap frames → taper → FFT power spectrum →
//! mel filterbank → log → DCT-II → 14 coefficients → 6 statistics per
//! coefficient → z-score → KNN under leave-one-out cross-validation.

pub mod audio;
pub mod classifier;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod features;
pub mod fsutil;
pub mod par;

pub use audio::{extract_window, load_wav, AudioClip, WindowSpec};
pub use classifier::{knn_predict, loocv_evaluate, EvalResult, KnnConfig, Metric, ZScoreMode};
pub use dataset::{load_manifest, ClassLabel, LabeledDataset};
pub use dsp::{compute_mfcc, MfccConfig, MfccMatrix};
pub use error::{Error, Result};
pub use experiment::{run_sweep, SweepConfig, SweepResult};
pub use features::{summarize, FeatureVector, Standardizer};
pub use par::Execution;
