//! Iterative radix-2 FFT for power-of-two lengths.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Precomputed bit-reversal permutation and twiddle factors for one size.
#[derive(Debug, Clone)]
pub struct FftPlan {
    size: usize,
    bitrev: Vec<usize>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FftPlan {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::Config(format!(
                "fft_size {size} is not a power of two"
            )));
        }
        let bits = size.trailing_zeros();
        let bitrev = (0..size)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let half = size / 2;
        let (cos, sin) = (0..half)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / size as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        Ok(FftPlan {
            size,
            bitrev,
            cos,
            sin,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// In-place forward transform, `X_k = sum_n x_n exp(-2 pi i k n / N)`.
    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        assert_eq!(re.len(), self.size);
        assert_eq!(im.len(), self.size);
        for i in 0..self.size {
            let j = self.bitrev[i];
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= self.size {
            let half = len / 2;
            let stride = self.size / len;
            for start in (0..self.size).step_by(len) {
                for j in 0..half {
                    let (wr, wi) = (self.cos[j * stride], self.sin[j * stride]);
                    let a = start + j;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len *= 2;
        }
    }

    /// One-sided power spectrum `|X_k|^2`, `k = 0..=N/2`, of `frame`
    /// zero-padded to the plan size. `scratch` buffers are reused.
    pub fn power_spectrum_into(
        &self,
        frame: &[f64],
        re: &mut Vec<f64>,
        im: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) {
        assert!(frame.len() <= self.size);
        re.clear();
        re.extend_from_slice(frame);
        re.resize(self.size, 0.0);
        im.clear();
        im.resize(self.size, 0.0);
        self.forward(re, im);
        out.clear();
        out.extend((0..=self.size / 2).map(|k| re[k] * re[k] + im[k] * im[k]));
    }
}

pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    let plan = FftPlan::new(fft_size)?;
    if frame.len() > fft_size {
        return Err(Error::Config(format!(
            "frame of {} samples exceeds fft_size {fft_size}",
            frame.len()
        )));
    }
    let (mut re, mut im, mut out) = (Vec::new(), Vec::new(), Vec::new());
    plan.power_spectrum_into(frame, &mut re, &mut im, &mut out);
    Ok(out)
}
