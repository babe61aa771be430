use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    Hamming,
    Hann,
    Rectangular,
}

/// Every knob of the MFCC pipeline. Defaults: 1024-sample frames with 50%
/// overlap, Hamming taper, 26 mel filters over the full band, 14
/// coefficients excluding c0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccConfig {
    pub frame_length: usize,
    pub hop_length: usize,
    /// `None` means `frame_length`.
    pub fft_size: Option<usize>,
    pub taper: Taper,
    pub num_filters: usize,
    pub band_low: f64,
    /// `None` means the Nyquist frequency of the clip being analyzed.
    pub band_high: Option<f64>,
    pub num_coefficients: usize,
    pub include_c0: bool,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            frame_length: 1024,
            hop_length: 512,
            fft_size: None,
            taper: Taper::Hamming,
            num_filters: 26,
            band_low: 0.0,
            band_high: None,
            num_coefficients: 14,
            include_c0: false,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn fft_size(&self) -> usize {
        self.fft_size.unwrap_or(self.frame_length)
    }

    pub fn band_high_for(&self, sample_rate: u32) -> f64 {
        self.band_high.unwrap_or(sample_rate as f64 / 2.0)
    }

    /// Index of the first DCT output kept.
    pub fn first_coefficient(&self) -> usize {
        if self.include_c0 {
            0
        } else {
            1
        }
    }

    /// Checks the sample-rate independent invariants.
    pub fn validate(&self) -> Result<()> {
        let fft = self.fft_size();
        if self.hop_length == 0 || self.hop_length > self.frame_length {
            return Err(Error::Config(format!(
                "hop_length must be in 1..=frame_length ({}), got {}",
                self.frame_length, self.hop_length
            )));
        }
        if fft < self.frame_length {
            return Err(Error::Config(format!(
                "fft_size {fft} is smaller than frame_length {}",
                self.frame_length
            )));
        }
        if !fft.is_power_of_two() {
            return Err(Error::Config(format!(
                "fft_size {fft} is not a power of two"
            )));
        }
        if self.num_filters == 0 || self.num_coefficients == 0 {
            return Err(Error::Config(
                "num_filters and num_coefficients must be positive".into(),
            ));
        }
        if self.first_coefficient() + self.num_coefficients > self.num_filters {
            return Err(Error::Config(format!(
                "{} coefficients starting at c{} need at least that many filters, have {}",
                self.num_coefficients,
                self.first_coefficient(),
                self.num_filters
            )));
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return Err(Error::Config(
                "log_floor must be a small positive number".into(),
            ));
        }
        Ok(())
    }

    /// Checks all invariants, including the band against `sample_rate`.
    pub fn validate_for(&self, sample_rate: u32) -> Result<()> {
        self.validate()?;
        let nyquist = sample_rate as f64 / 2.0;
        let high = self.band_high_for(sample_rate);
        if !(self.band_low >= 0.0 && self.band_low < high && high <= nyquist) {
            return Err(Error::Config(format!(
                "band must satisfy 0 <= low < high <= {nyquist} Hz, got {}..{high}",
                self.band_low
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = MfccConfig::default();
        c.validate_for(44100).unwrap();
        assert_eq!(c.fft_size(), 1024);
        assert_eq!(c.band_high_for(44100), 22050.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        let bad = [
            MfccConfig {
                hop_length: 0,
                ..Default::default()
            },
            MfccConfig {
                hop_length: 2048,
                ..Default::default()
            },
            MfccConfig {
                fft_size: Some(1000),
                frame_length: 1000,
                hop_length: 500,
                ..Default::default()
            },
            MfccConfig {
                fft_size: Some(512),
                ..Default::default()
            },
            MfccConfig {
                num_filters: 14,
                ..Default::default()
            },
            MfccConfig {
                log_floor: 0.0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
        let c = MfccConfig {
            num_filters: 14,
            include_c0: true,
            ..Default::default()
        };
        c.validate().unwrap();
        let c = MfccConfig {
            band_high: Some(30000.0),
            ..Default::default()
        };
        assert!(c.validate_for(44100).is_err());
    }
}
