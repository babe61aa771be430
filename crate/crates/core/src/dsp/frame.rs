use std::f64::consts::PI;

use super::Taper;
use crate::error::{Error, Result};

/// Overlapping frames cut from a signal. Trailing samples that do not fill
/// a whole frame are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    data: Vec<f64>,
    frame_length: usize,
    hop_length: usize,
}

impl FrameMatrix {
    pub fn num_frames(&self) -> usize {
        self.data.len() / self.frame_length
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn hop_length(&self) -> usize {
        self.hop_length
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.frame_length..(i + 1) * self.frame_length]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.frame_length)
    }
}

/// `floor((len - frame_length) / hop_length) + 1`, or 0 if no frame fits.
pub fn frame_count(len: usize, frame_length: usize, hop_length: usize) -> usize {
    if len < frame_length || frame_length == 0 || hop_length == 0 {
        0
    } else {
        (len - frame_length) / hop_length + 1
    }
}

pub fn frame_signal(
    samples: &[f64],
    frame_length: usize,
    hop_length: usize,
) -> Result<FrameMatrix> {
    if frame_length == 0 || hop_length == 0 {
        return Err(Error::Config(
            "frame and hop lengths must be positive".into(),
        ));
    }
    if samples.len() < frame_length {
        return Err(Error::InsufficientSamples {
            len: samples.len(),
            frame_length,
        });
    }
    let n = frame_count(samples.len(), frame_length, hop_length);
    let mut data = Vec::with_capacity(n * frame_length);
    for i in 0..n {
        let start = i * hop_length;
        data.extend_from_slice(&samples[start..start + frame_length]);
    }
    Ok(FrameMatrix {
        data,
        frame_length,
        hop_length,
    })
}

/// Taper coefficients of length `n` (symmetric form, denominator `n - 1`).
pub fn taper_window(kind: Taper, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let c = (2.0 * PI * i as f64 / denom).cos();
            match kind {
                Taper::Hamming => 0.54 - 0.46 * c,
                Taper::Hann => 0.5 - 0.5 * c,
                Taper::Rectangular => 1.0,
            }
        })
        .collect()
}

pub fn apply_taper(frame: &[f64], kind: Taper) -> Result<Vec<f64>> {
    if frame.is_empty() {
        return Err(Error::Domain("cannot taper an empty frame".into()));
    }
    if kind == Taper::Rectangular {
        return Ok(frame.to_vec());
    }
    let w = taper_window(kind, frame.len());
    Ok(frame.iter().zip(&w).map(|(x, w)| x * w).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_counts() {
        let f = |len| {
            frame_signal(&vec![0.0; len], 1024, 512)
                .unwrap()
                .num_frames()
        };
        assert_eq!(f(1024), 1);
        assert_eq!(f(2048), 3);
        assert_eq!(f(22050), 42);
        assert_eq!(frame_count(882_000, 1024, 512), 1721);
        assert!(matches!(
            frame_signal(&[0.0; 10], 16, 8),
            Err(Error::InsufficientSamples {
                len: 10,
                frame_length: 16
            })
        ));
    }

    #[test]
    fn frames_start_at_multiples_of_hop() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let m = frame_signal(&x, 4, 3).unwrap();
        assert_eq!(m.num_frames(), 3);
        assert_eq!(m.frame(1), &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.frame(2), &[6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn tapers() {
        let x = [0.3, -0.2, 0.9, 0.1];
        assert_eq!(apply_taper(&x, Taper::Rectangular).unwrap(), x);
        let h = apply_taper(&[1.0, 1.0, 1.0], Taper::Hamming).unwrap();
        for (a, b) in h.iter().zip([0.08, 1.0, 0.08]) {
            assert!((a - b).abs() < 1e-15);
        }
        for n in 2..40 {
            let w = taper_window(Taper::Hamming, n);
            assert!((w[0] - 0.08).abs() < 1e-15);
            assert!((w[n - 1] - 0.08).abs() < 1e-15);
        }
        assert!(apply_taper(&[], Taper::Hann).is_err());
    }
}
