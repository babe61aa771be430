//! Short-time spectral analysis: framing, tapering, FFT power spectra,
//! mel filterbank, log compression and DCT, combined into MFCC matrices.

mod config;
mod dct;
mod fft;
mod filterbank;
mod frame;
mod mel;
mod mfcc;

pub use config::{MfccConfig, Taper};
pub use dct::{dct_ii, DctTable};
pub use fft::{power_spectrum, FftPlan};
pub use filterbank::{build_mel_filterbank, MelFilterBank};
pub use frame::{apply_taper, frame_count, frame_signal, taper_window, FrameMatrix};
pub use mel::{hz_to_mel, mel_to_hz};
pub use mfcc::{compute_mfcc, MfccExtractor, MfccMatrix};
