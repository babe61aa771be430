use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cache::FeatureCache;
use crate::audio::{extract_window, load_wav_with_digest, WindowSpec};
use crate::classifier::{loocv_evaluate_with, EvalResult, KnnConfig, ZScoreMode};
use crate::dataset::LabeledDataset;
use crate::dsp::{frame_count, MfccConfig, MfccExtractor};
use crate::error::{Error, Result};
use crate::features::{summarize_values, FeatureVector};
use crate::par::{self, Execution};

/// `0.5, 1, 2, ..., 20` seconds.
pub fn default_window_sizes() -> Vec<f64> {
    std::iter::once(0.5)
        .chain((1..=20).map(f64::from))
        .collect()
}

fn default_k_values() -> Vec<usize> {
    vec![1, 3, 5, 7]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub window_sizes: Vec<f64>,
    /// Window start, seconds from the beginning of each clip.
    pub offset: f64,
    pub mfcc: MfccConfig,
    pub knn: KnnConfig,
    /// Additional neighbor counts evaluated on the same features and
    /// reported next to the main `knn.k` result.
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    pub zscore_mode: ZScoreMode,
    /// Seed for the synthetic corpus generator; the analysis itself is
    /// deterministic.
    pub seed: u64,
    /// When false, elapsed times are recorded as 0 so reports are
    /// byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            window_sizes: default_window_sizes(),
            offset: 0.0,
            mfcc: MfccConfig::default(),
            knn: KnnConfig::default(),
            k_values: default_k_values(),
            zscore_mode: ZScoreMode::Global,
            seed: 7,
            record_timings: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_sizes.is_empty() {
            return Err(Error::Config("window_sizes is empty".into()));
        }
        if self
            .window_sizes
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::Config("window sizes must be positive".into()));
        }
        if self.window_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "window sizes must be strictly increasing".into(),
            ));
        }
        if !(self.offset.is_finite() && self.offset >= 0.0) {
            return Err(Error::Config("offset must be non-negative".into()));
        }
        if self.knn.k == 0 || self.k_values.contains(&0) {
            return Err(Error::Config("k must be positive".into()));
        }
        self.mfcc.validate()
    }

    /// `knn.k` followed by the other entries of `k_values`, deduplicated.
    pub fn all_k(&self) -> Vec<usize> {
        let mut ks = vec![self.knn.k];
        for &k in &self.k_values {
            if !ks.contains(&k) {
                ks.push(k);
            }
        }
        ks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KAccuracy {
    pub k: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub window_seconds: f64,
    /// Evaluation with the configured `knn.k`.
    pub eval: EvalResult,
    /// Accuracy for every k in [`SweepConfig::all_k`].
    pub k_accuracies: Vec<KAccuracy>,
    /// Time spent summarizing and evaluating this size; decoding and MFCC
    /// computation are shared across sizes and not attributed.
    pub seconds_elapsed: f64,
    pub samples_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub config: SweepConfig,
    pub inputs: Vec<InputDigest>,
}

impl SweepResult {
    pub fn record(&self, window_seconds: f64) -> Option<&SweepRecord> {
        self.records
            .iter()
            .find(|r| r.window_seconds == window_seconds)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions<'a> {
    pub cache: Option<&'a FeatureCache>,
    pub exec: Execution,
}

/// Feature vectors of every dataset entry, one list per window size.
pub struct WindowFeatures {
    pub per_window: Vec<Vec<FeatureVector>>,
    pub inputs: Vec<InputDigest>,
}

/// Decodes every clip and summarizes its leading windows.
///
/// Each clip's MFCC matrix is computed once for the longest window; a
/// shorter window starting at the same offset covers a frame prefix of it.
pub fn extract_window_features(
    dataset: &LabeledDataset,
    window_sizes: &[f64],
    offset: f64,
    mfcc: &MfccConfig,
    opts: SweepOptions<'_>,
) -> Result<WindowFeatures> {
    if dataset.is_empty() {
        return Err(Error::Domain("dataset is empty".into()));
    }
    let longest = window_sizes
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let outer = WindowSpec::new(longest, offset)?;
    let specs = window_sizes
        .iter()
        .map(|&w| WindowSpec::new(w, offset))
        .collect::<Result<Vec<_>>>()?;

    let entries = dataset.entries();
    let decoded = par::try_map_indexed(entries.len(), opts.exec, |i| {
        load_wav_with_digest(&entries[i].resolved)
    })?;

    let too_short: Vec<String> = entries
        .iter()
        .zip(&decoded)
        .filter(|(_, (clip, _))| outer.sample_range(clip.sample_rate()).1 > clip.len())
        .map(|(e, (clip, _))| {
            format!(
                "{} ({:.3} s available, {:.3} s needed)",
                e.path,
                clip.duration_seconds(),
                offset + longest
            )
        })
        .collect();
    if !too_short.is_empty() {
        return Err(Error::ClipsTooShort(too_short));
    }

    let mut extractors: BTreeMap<u32, MfccExtractor> = BTreeMap::new();
    for (clip, _) in &decoded {
        if let std::collections::btree_map::Entry::Vacant(slot) =
            extractors.entry(clip.sample_rate())
        {
            slot.insert(MfccExtractor::new(mfcc, clip.sample_rate())?);
        }
    }

    let per_clip: Vec<Vec<Vec<f64>>> = par::try_map_indexed(entries.len(), opts.exec, |i| {
        let (clip, digest) = &decoded[i];
        let keys: Vec<String> = specs
            .iter()
            .map(|s| FeatureCache::key(digest, s.duration, s.offset, mfcc))
            .collect();
        if let Some(cache) = opts.cache {
            let hits: Option<Vec<Vec<f64>>> = keys.iter().map(|k| cache.get(k)).collect();
            if let Some(hits) = hits {
                return Ok(hits);
            }
        }

        let window = extract_window(clip, &outer)?;
        let matrix = extractors[&clip.sample_rate()].compute(&window)?;
        let mut out = Vec::with_capacity(specs.len());
        for (spec, key) in specs.iter().zip(&keys) {
            let (start, end) = spec.sample_range(clip.sample_rate());
            let frames = frame_count(end - start, mfcc.frame_length, mfcc.hop_length);
            if frames == 0 {
                return Err(Error::InsufficientSamples {
                    len: end - start,
                    frame_length: mfcc.frame_length,
                });
            }
            let values = summarize_values(&matrix.prefix(frames))?;
            if let Some(cache) = opts.cache {
                cache.put(key, &values)?;
            }
            out.push(values);
        }
        Ok(out)
    })?;

    let per_window = (0..specs.len())
        .map(|w| {
            entries
                .iter()
                .zip(&per_clip)
                .map(|(e, feats)| FeatureVector::new(feats[w].clone(), e.label, &e.path))
                .collect()
        })
        .collect();
    let inputs = entries
        .iter()
        .zip(&decoded)
        .map(|(e, (_, digest))| InputDigest {
            path: e.path.clone(),
            sha256: digest.clone(),
        })
        .collect();
    Ok(WindowFeatures { per_window, inputs })
}

pub fn run_sweep(dataset: &LabeledDataset, config: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with(dataset, config, SweepOptions::default())
}

/// For every window size: leading window per clip, MFCC, summary
/// statistics, z-score, leave-one-out KNN accuracy.
pub fn run_sweep_with(
    dataset: &LabeledDataset,
    config: &SweepConfig,
    opts: SweepOptions<'_>,
) -> Result<SweepResult> {
    config.validate()?;
    let features = extract_window_features(
        dataset,
        &config.window_sizes,
        config.offset,
        &config.mfcc,
        opts,
    )?;

    let ks = config.all_k();
    let mut records = Vec::with_capacity(config.window_sizes.len());
    for (&window, vectors) in config.window_sizes.iter().zip(&features.per_window) {
        let started = Instant::now();
        let mut eval = None;
        let mut k_accuracies = Vec::with_capacity(ks.len());
        for &k in &ks {
            // supplementary k values that do not fit a leave-one-out fold are skipped
            if k != config.knn.k && k >= vectors.len() {
                continue;
            }
            let knn = KnnConfig { k, ..config.knn };
            let result = loocv_evaluate_with(vectors, &knn, config.zscore_mode, opts.exec)?;
            k_accuracies.push(KAccuracy {
                k,
                accuracy: result.accuracy,
            });
            if k == config.knn.k {
                eval = Some(result);
            }
        }
        let seconds_elapsed = if config.record_timings {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        records.push(SweepRecord {
            window_seconds: window,
            eval: eval.expect("configured k is evaluated first"),
            k_accuracies,
            seconds_elapsed,
            samples_evaluated: vectors.len(),
        });
    }
    Ok(SweepResult {
        records,
        config: config.clone(),
        inputs: features.inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let w = default_window_sizes();
        assert_eq!(w.len(), 21);
        assert_eq!(w[0], 0.5);
        assert_eq!(w[1], 1.0);
        assert_eq!(w[20], 20.0);
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let bad = [
            SweepConfig {
                window_sizes: vec![],
                ..Default::default()
            },
            SweepConfig {
                window_sizes: vec![2.0, 1.0],
                ..Default::default()
            },
            SweepConfig {
                window_sizes: vec![1.0, 1.0],
                ..Default::default()
            },
            SweepConfig {
                window_sizes: vec![-1.0],
                ..Default::default()
            },
            SweepConfig {
                offset: -1.0,
                ..Default::default()
            },
            SweepConfig {
                k_values: vec![0],
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn all_k_puts_configured_k_first() {
        let c = SweepConfig {
            knn: KnnConfig {
                k: 5,
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(c.all_k(), vec![5, 1, 3, 7]);
    }

    #[test]
    fn empty_dataset() {
        let ds = LabeledDataset::default();
        assert!(matches!(
            run_sweep(&ds, &SweepConfig::default()),
            Err(Error::Domain(_))
        ));
    }
}
