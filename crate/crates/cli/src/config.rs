use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use respwin::classifier::{KnnConfig, Metric, ZScoreMode};
use respwin::dsp::{MfccConfig, Taper};
use respwin::experiment::{default_window_sizes, SweepConfig};
use serde::{Deserialize, Serialize};

/// Everything a run needs, as read from a TOML config file. Unknown keys
/// are rejected. Defaults reproduce the reference pipeline: 14
/// coefficients, 50% frame overlap, 21 window sizes from 0.5 s to 20 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub window_sizes: Vec<f64>,
    pub offset: f64,
    pub zscore_mode: ZScoreMode,
    pub k_values: Vec<usize>,
    pub seed: u64,
    pub record_timings: bool,
    pub cache_dir: Option<PathBuf>,
    pub mfcc: MfccConfig,
    pub knn: KnnConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sweep = SweepConfig::default();
        RunConfig {
            window_sizes: default_window_sizes(),
            offset: sweep.offset,
            zscore_mode: sweep.zscore_mode,
            k_values: sweep.k_values,
            seed: sweep.seed,
            record_timings: true,
            cache_dir: None,
            mfcc: sweep.mfcc,
            knn: sweep.knn,
        }
    }
}

impl RunConfig {
    /// Reads a TOML config, or the `config` object of a `run.json`
    /// provenance record.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| respwin::Error::io(path, e))?;
        let is_json = path.extension().map(|e| e == "json").unwrap_or(false);
        if is_json {
            #[derive(Deserialize)]
            struct Provenance {
                config: RunConfig,
            }
            let p: Provenance = serde_json::from_str(&text)
                .map_err(|e| respwin::Error::Config(format!("{}: {e}", path.display())))?;
            Ok(p.config)
        } else {
            toml::from_str(&text)
                .map_err(|e| respwin::Error::Config(format!("{}: {e}", path.display())).into())
        }
    }

    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match file {
            Some(p) => Self::load(p).with_context(|| format!("loading config {}", p.display()))?,
            None => RunConfig::default(),
        };
        overrides.apply(&mut config);
        Ok(config)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            window_sizes: self.window_sizes.clone(),
            offset: self.offset,
            mfcc: self.mfcc.clone(),
            knn: self.knn,
            k_values: self.k_values.clone(),
            zscore_mode: self.zscore_mode,
            seed: self.seed,
            record_timings: self.record_timings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ZScoreArg {
    Global,
    PerFold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TaperArg {
    Hamming,
    Hann,
    Rectangular,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Neighbors used for the main result
    #[arg(long)]
    pub k: Option<usize>,
    /// Extra neighbor counts reported alongside, comma separated
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    /// Distance metric
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Fit z-score statistics on all vectors (global) or per training fold
    #[arg(long, value_enum)]
    pub zscore_mode: Option<ZScoreArg>,
    /// Window start in seconds
    #[arg(long)]
    pub offset: Option<f64>,
    /// Frame length in samples
    #[arg(long)]
    pub frame_length: Option<usize>,
    /// Hop between frames in samples
    #[arg(long)]
    pub hop_length: Option<usize>,
    /// FFT size (power of two, at least the frame length)
    #[arg(long)]
    pub fft_size: Option<usize>,
    /// Frame taper
    #[arg(long, value_enum)]
    pub taper: Option<TaperArg>,
    /// Number of mel filters
    #[arg(long)]
    pub num_filters: Option<usize>,
    /// Lower band edge in Hz
    #[arg(long)]
    pub band_low: Option<f64>,
    /// Upper band edge in Hz (default: Nyquist)
    #[arg(long)]
    pub band_high: Option<f64>,
    /// Cepstral coefficients kept per frame
    #[arg(long)]
    pub num_coefficients: Option<usize>,
    /// Keep c0 instead of starting at c1
    #[arg(long)]
    pub include_c0: bool,
    /// Directory for the per-clip feature cache
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Record elapsed times as 0 so outputs are byte-reproducible
    #[arg(long)]
    pub no_timings: bool,
}

impl Overrides {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(k) = self.k {
            c.knn.k = k;
        }
        if let Some(ks) = &self.k_values {
            c.k_values = ks.clone();
        }
        if let Some(m) = self.metric {
            c.knn.metric = match m {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Manhattan => Metric::Manhattan,
            };
        }
        if let Some(z) = self.zscore_mode {
            c.zscore_mode = match z {
                ZScoreArg::Global => ZScoreMode::Global,
                ZScoreArg::PerFold => ZScoreMode::PerFold,
            };
        }
        if let Some(v) = self.offset {
            c.offset = v;
        }
        if let Some(v) = self.frame_length {
            c.mfcc.frame_length = v;
        }
        if let Some(v) = self.hop_length {
            c.mfcc.hop_length = v;
        }
        if let Some(v) = self.fft_size {
            c.mfcc.fft_size = Some(v);
        }
        if let Some(t) = self.taper {
            c.mfcc.taper = match t {
                TaperArg::Hamming => Taper::Hamming,
                TaperArg::Hann => Taper::Hann,
                TaperArg::Rectangular => Taper::Rectangular,
            };
        }
        if let Some(v) = self.num_filters {
            c.mfcc.num_filters = v;
        }
        if let Some(v) = self.band_low {
            c.mfcc.band_low = v;
        }
        if let Some(v) = self.band_high {
            c.mfcc.band_high = Some(v);
        }
        if let Some(v) = self.num_coefficients {
            c.mfcc.num_coefficients = v;
        }
        if self.include_c0 {
            c.mfcc.include_c0 = true;
        }
        if let Some(d) = &self.cache_dir {
            c.cache_dir = Some(d.clone());
        }
        if self.no_timings {
            c.record_timings = false;
        }
    }
}
