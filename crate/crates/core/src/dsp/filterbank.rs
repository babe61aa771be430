use super::{hz_to_mel, mel_to_hz, MfccConfig};
use crate::error::{Error, Result};

/// Triangular filters with centers equally spaced on the mel axis.
///
/// Rows are stored sparsely: row `m` has non-zero weights on FFT bins
/// strictly between boundary bins `m` and `m + 2`, peaking at 1 on bin `m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterBank {
    num_bins: usize,
    boundary_hz: Vec<f64>,
    boundary_bins: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl MelFilterBank {
    pub fn num_filters(&self) -> usize {
        self.weights.len()
    }

    /// Number of FFT bins each row spans (`fft_size / 2 + 1`).
    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn center_frequencies(&self) -> &[f64] {
        &self.boundary_hz[1..self.boundary_hz.len() - 1]
    }

    /// `num_filters + 2` band edges in Hz.
    pub fn boundary_frequencies(&self) -> &[f64] {
        &self.boundary_hz
    }

    pub fn boundary_bins(&self) -> &[usize] {
        &self.boundary_bins
    }

    /// Dense row `m` over all bins.
    pub fn row(&self, m: usize) -> Vec<f64> {
        let mut dense = vec![0.0; self.num_bins];
        let start = self.boundary_bins[m] + 1;
        dense[start..start + self.weights[m].len()].copy_from_slice(&self.weights[m]);
        dense
    }

    /// Filter energies `sum_k w[m][k] * power[k]` for every row.
    pub fn apply_into(&self, power: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(power.len(), self.num_bins);
        out.clear();
        for (m, w) in self.weights.iter().enumerate() {
            let start = self.boundary_bins[m] + 1;
            let bins = &power[start..start + w.len()];
            out.push(w.iter().zip(bins).map(|(a, b)| a * b).sum());
        }
    }
}

pub fn build_mel_filterbank(config: &MfccConfig, sample_rate: u32) -> Result<MelFilterBank> {
    config.validate_for(sample_rate)?;
    let fft_size = config.fft_size();
    let num_bins = fft_size / 2 + 1;
    let m = config.num_filters;
    let low = hz_to_mel(config.band_low)?;
    let high = hz_to_mel(config.band_high_for(sample_rate))?;

    let boundary_hz = (0..m + 2)
        .map(|i| mel_to_hz(low + (high - low) * i as f64 / (m + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    let boundary_bins: Vec<usize> = boundary_hz
        .iter()
        .map(|&f| ((f * fft_size as f64 / sample_rate as f64).round() as usize).min(num_bins - 1))
        .collect();

    if let Some(i) = boundary_bins.windows(2).position(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFilterbank(format!(
            "band edges {:.2} Hz and {:.2} Hz both map to FFT bin {}; \
             use fewer filters, a wider band or a larger fft_size",
            boundary_hz[i],
            boundary_hz[i + 1],
            boundary_bins[i]
        )));
    }

    let weights = (0..m)
        .map(|row| {
            let (l, c, r) = (
                boundary_bins[row],
                boundary_bins[row + 1],
                boundary_bins[row + 2],
            );
            (l + 1..r)
                .map(|k| {
                    if k <= c {
                        (k - l) as f64 / (c - l) as f64
                    } else {
                        (r - k) as f64 / (r - c) as f64
                    }
                })
                .collect()
        })
        .collect();

    Ok(MelFilterBank {
        num_bins,
        boundary_hz,
        boundary_bins,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_shape_and_peaks() {
        let fb = build_mel_filterbank(&MfccConfig::default(), 44100).unwrap();
        assert_eq!(fb.num_filters(), 26);
        assert_eq!(fb.num_bins(), 513);
        for m in 0..26 {
            let row = fb.row(m);
            assert_eq!(row.len(), 513);
            assert_eq!(row.iter().cloned().fold(0.0, f64::max), 1.0);
            assert_eq!(row[fb.boundary_bins()[m + 1]], 1.0);
        }
        let c = fb.center_frequencies();
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c[0] > 0.0 && c[25] < 22050.0);
    }

    #[test]
    fn boundaries_equally_spaced_in_mel() {
        let fb = build_mel_filterbank(&MfccConfig::default(), 44100).unwrap();
        let top = 2595.0 * (1.0 + 22050.0f64 / 700.0).log10();
        for (k, &f) in fb.boundary_frequencies().iter().enumerate() {
            let mel = hz_to_mel(f).unwrap();
            assert!((mel - k as f64 * top / 27.0).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn narrow_band_is_degenerate() {
        let c = MfccConfig {
            band_low: 100.0,
            band_high: Some(200.0),
            ..Default::default()
        };
        assert!(matches!(
            build_mel_filterbank(&c, 44100),
            Err(Error::DegenerateFilterbank(_))
        ));
    }

    proptest! {
        #[test]
        fn row_geometry(filters in 15usize..40, fft_exp in 9u32..12, rate in prop::sample::select(vec![4000u32, 8000, 16000, 22050, 44100])) {
            let c = MfccConfig {
                frame_length: 1 << fft_exp,
                hop_length: 1 << (fft_exp - 1),
                num_filters: filters,
                ..Default::default()
            };
            let Ok(fb) = build_mel_filterbank(&c, rate) else { return Ok(()); };
            let b = fb.boundary_bins();
            for m in 0..filters {
                let row = fb.row(m);
                let (l, c, r) = (b[m], b[m + 1], b[m + 2]);
                for (k, &w) in row.iter().enumerate() {
                    prop_assert!(w >= 0.0);
                    prop_assert_eq!(w > 0.0, k > l && k < r);
                }
                prop_assert_eq!(row[c], 1.0);
                // rises to the peak, then falls
                prop_assert!(row[l..=c].windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(row[c..=r].windows(2).all(|w| w[0] >= w[1]));
                if m + 1 < filters && b[m + 2] - b[m + 1] >= 2 {
                    let next = fb.row(m + 1);
                    prop_assert!(row.iter().zip(&next).any(|(a, b)| *a > 0.0 && *b > 0.0));
                }
            }
        }
    }
}
