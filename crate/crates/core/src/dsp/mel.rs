use crate::error::{Error, Result};

/// `2595 * log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> Result<f64> {
    if hz.is_nan() || hz < 0.0 {
        return Err(Error::Domain(format!(
            "frequency must be non-negative, got {hz}"
        )));
    }
    Ok(2595.0 * (1.0 + hz / 700.0).log10())
}

pub fn mel_to_hz(mel: f64) -> Result<f64> {
    if mel.is_nan() || mel < 0.0 {
        return Err(Error::Domain(format!(
            "mel value must be non-negative, got {mel}"
        )));
    }
    Ok(700.0 * (10f64.powf(mel / 2595.0) - 1.0))
}
