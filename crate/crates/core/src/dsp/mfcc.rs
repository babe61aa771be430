use super::{
    build_mel_filterbank, frame_count, taper_window, DctTable, FftPlan, MelFilterBank, MfccConfig,
};
use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Frames x coefficients matrix of cepstral coefficients, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    data: Vec<f64>,
    num_frames: usize,
    num_coefficients: usize,
    config: MfccConfig,
}

impl MfccMatrix {
    pub fn from_rows(rows: &[Vec<f64>], config: MfccConfig) -> Result<Self> {
        let num_coefficients = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != num_coefficients) {
            return Err(Error::Domain("ragged MFCC rows".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite MFCC value".into()));
        }
        Ok(MfccMatrix {
            data: rows.concat(),
            num_frames: rows.len(),
            num_coefficients,
            config,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_coefficients(&self) -> usize {
        self.num_coefficients
    }

    pub fn config(&self) -> &MfccConfig {
        &self.config
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_coefficients..(i + 1) * self.num_coefficients]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.num_coefficients.max(1))
    }

    /// Values of coefficient `c` across frames.
    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[c])
    }

    /// The first `n` frames. Frames depend only on their own samples, so
    /// this equals the matrix of the correspondingly shorter leading window.
    pub fn prefix(&self, n: usize) -> MfccMatrix {
        let n = n.min(self.num_frames);
        MfccMatrix {
            data: self.data[..n * self.num_coefficients].to_vec(),
            num_frames: n,
            num_coefficients: self.num_coefficients,
            config: self.config.clone(),
        }
    }

    /// Debug dump: one frame per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.num_coefficients)
            .map(|c| format!("c{:02}", c + self.config.first_coefficient()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// MFCC pipeline bound to one configuration and sample rate, with the
/// FFT plan, taper, filterbank and DCT table precomputed.
#[derive(Debug, Clone)]
pub struct MfccExtractor {
    config: MfccConfig,
    sample_rate: u32,
    taper: Vec<f64>,
    fft: FftPlan,
    filterbank: MelFilterBank,
    dct: DctTable,
}

impl MfccExtractor {
    pub fn new(config: &MfccConfig, sample_rate: u32) -> Result<Self> {
        let filterbank = build_mel_filterbank(config, sample_rate)?;
        Ok(MfccExtractor {
            taper: taper_window(config.taper, config.frame_length),
            fft: FftPlan::new(config.fft_size())?,
            dct: DctTable::new(
                config.num_filters,
                config.first_coefficient(),
                config.num_coefficients,
            )?,
            filterbank,
            sample_rate,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filterbank(&self) -> &MelFilterBank {
        &self.filterbank
    }

    pub fn compute(&self, clip: &AudioClip) -> Result<MfccMatrix> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::Domain(format!(
                "extractor built for {} Hz, clip is {} Hz",
                self.sample_rate,
                clip.sample_rate()
            )));
        }
        self.compute_samples(clip.samples())
    }

    pub fn compute_samples(&self, samples: &[f64]) -> Result<MfccMatrix> {
        let fl = self.config.frame_length;
        let hop = self.config.hop_length;
        let n = frame_count(samples.len(), fl, hop);
        if n == 0 {
            return Err(Error::InsufficientSamples {
                len: samples.len(),
                frame_length: fl,
            });
        }

        let nc = self.config.num_coefficients;
        let mut data = Vec::with_capacity(n * nc);
        let mut tapered = Vec::with_capacity(fl);
        let (mut re, mut im, mut power) = (Vec::new(), Vec::new(), Vec::new());
        let mut energies = Vec::with_capacity(self.config.num_filters);
        let mut cepstrum = Vec::with_capacity(nc);
        for i in 0..n {
            let frame = &samples[i * hop..i * hop + fl];
            tapered.clear();
            tapered.extend(frame.iter().zip(&self.taper).map(|(x, w)| x * w));
            self.fft
                .power_spectrum_into(&tapered, &mut re, &mut im, &mut power);
            self.filterbank.apply_into(&power, &mut energies);
            for e in energies.iter_mut() {
                *e = e.max(self.config.log_floor).ln();
            }
            self.dct.apply_into(&energies, &mut cepstrum);
            data.extend_from_slice(&cepstrum);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "MFCC computation produced a non-finite value".into(),
            ));
        }
        Ok(MfccMatrix {
            data,
            num_frames: n,
            num_coefficients: nc,
            config: self.config.clone(),
        })
    }
}

pub fn compute_mfcc(clip: &AudioClip, config: &MfccConfig) -> Result<MfccMatrix> {
    MfccExtractor::new(config, clip.sample_rate())?.compute(clip)
}
