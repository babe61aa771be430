//! Deterministic stand-in corpus: breath-like band-limited noise for the
//! normal class, the same noise with intermittent narrowband tone bursts
//! (wheeze-like) for the abnormal class.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::{write_wav_pcm16, AudioClip};
use crate::dataset::{write_manifest, ClassLabel, DatasetEntry, LabeledDataset};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::par::{self, Execution};

pub const SYNTH_SAMPLE_RATE: u32 = 44100;
pub const SYNTH_SECONDS: f64 = 20.0;
pub const MANIFEST_NAME: &str = "manifest.csv";

/// One-pole low-pass coefficient for cutoff `fc`.
fn one_pole(fc: f64, fs: f64) -> f64 {
    1.0 - (-2.0 * PI * fc / fs).exp()
}

/// Band-limited noise (about 80 Hz up to a cutoff below 1 kHz) shaped by a
/// slow breathing envelope, scaled to the given RMS.
fn breath_noise(rng: &mut ChaCha8Rng, n: usize, fs: f64) -> Vec<f64> {
    let cutoff = rng.gen_range(350.0..900.0);
    let lp = one_pole(cutoff, fs);
    let hp = one_pole(80.0, fs);
    let period = rng.gen_range(3.0..5.0);
    let phase = rng.gen_range(0.0..PI);
    let rms_target = rng.gen_range(0.04..0.12);

    let (mut s1, mut s2, mut s3, mut slow) = (0.0, 0.0, 0.0, 0.0);
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let white: f64 = rng.gen_range(-1.0..1.0);
            s1 += lp * (white - s1);
            s2 += lp * (s1 - s2);
            s3 += lp * (s2 - s3);
            slow += hp * (s3 - slow);
            let t = i as f64 / fs;
            let env = 0.3 + 0.7 * (PI * t / period + phase).sin().powi(2);
            (s3 - slow) * env
        })
        .collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let gain = if rms > 0.0 { rms_target / rms } else { 0.0 };
    out.iter_mut().for_each(|v| *v *= gain);
    out
}

/// Adds tone bursts of 150-400 ms at 400-800 Hz separated by 0.2-0.45 s gaps,
/// the first starting within 0.3 s of the clip start.
fn add_wheezes(rng: &mut ChaCha8Rng, samples: &mut [f64], fs: f64) {
    let rms = (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt();
    let mut start = rng.gen_range(0.0..0.3);
    let total = samples.len() as f64 / fs;
    while start < total {
        let dur = rng.gen_range(0.15..0.4);
        let f0 = rng.gen_range(400.0..800.0);
        let glide = rng.gen_range(-0.1..0.1);
        let amp = rms * rng.gen_range(2.5..4.0);
        let i0 = (start * fs) as usize;
        let len = ((dur * fs) as usize).min(samples.len().saturating_sub(i0));
        let mut phase = 0.0;
        for j in 0..len {
            let u = j as f64 / len as f64;
            let env = (PI * u).sin().powi(2);
            let f = f0 * (1.0 + glide * u);
            phase += 2.0 * PI * f / fs;
            samples[i0 + j] += amp * env * (phase.sin() + 0.3 * (2.0 * phase).sin());
        }
        start += dur + rng.gen_range(0.2..0.45);
    }
}

/// Samples of synthetic clip `index` of the given class.
pub fn synth_clip(seed: u64, index: u64, label: ClassLabel) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let fs = SYNTH_SAMPLE_RATE as f64;
    let n = (SYNTH_SECONDS * fs) as usize;
    let mut samples = breath_noise(&mut rng, n, fs);
    if label == ClassLabel::Abnormal {
        add_wheezes(&mut rng, &mut samples, fs);
    }
    samples.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
    samples
}

/// Writes `n_normal + n_abnormal` 20 s, 44.1 kHz, 16-bit WAV files plus a
/// manifest into `out_dir` and returns the manifest path.
pub fn generate_synthetic_corpus(
    n_normal: usize,
    n_abnormal: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<PathBuf> {
    if n_normal == 0 || n_abnormal == 0 {
        return Err(Error::Domain(format!(
            "need at least one clip per class, got {n_normal} normal / {n_abnormal} abnormal"
        )));
    }
    fsutil::create_dir_all(out_dir)?;

    let specs: Vec<(ClassLabel, usize)> = (0..n_normal)
        .map(|i| (ClassLabel::Normal, i))
        .chain((0..n_abnormal).map(|i| (ClassLabel::Abnormal, i)))
        .collect();

    let entries = par::try_map_indexed(specs.len(), Execution::default(), |stream| {
        let (label, i) = specs[stream];
        let name = format!("{}_{i:03}.wav", label.as_str());
        let clip = AudioClip::new(
            synth_clip(seed, stream as u64, label),
            SYNTH_SAMPLE_RATE,
            &name,
        )?;
        let path = out_dir.join(&name);
        write_wav_pcm16(&path, &clip)?;
        Ok(DatasetEntry {
            subject_id: format!("syn-{}{i:03}", &label.as_str()[..1]),
            resolved: path,
            path: name,
            label,
        })
    })?;

    let manifest = out_dir.join(MANIFEST_NAME);
    write_manifest(&manifest, &LabeledDataset::new(entries)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_are_deterministic_and_bounded() {
        let a = synth_clip(42, 3, ClassLabel::Abnormal);
        let b = synth_clip(42, 3, ClassLabel::Abnormal);
        assert_eq!(a, b);
        assert_eq!(a.len(), 882_000);
        assert!(a.iter().all(|v| v.abs() <= 1.0));
        assert_ne!(a, synth_clip(43, 3, ClassLabel::Abnormal));
        assert_ne!(a, synth_clip(42, 4, ClassLabel::Abnormal));
    }

    #[test]
    fn normal_energy_sits_below_one_khz() {
        use crate::dsp::power_spectrum;
        let x = synth_clip(1, 0, ClassLabel::Normal);
        let mut low = 0.0;
        let mut high = 0.0;
        for frame in x.chunks_exact(4096).take(100) {
            let p = power_spectrum(frame, 4096).unwrap();
            for (k, v) in p.iter().enumerate() {
                if k as f64 * 44100.0 / 4096.0 < 1000.0 {
                    low += v;
                } else {
                    high += v;
                }
            }
        }
        assert!(low > 4.0 * high, "low {low} high {high}");
    }

    #[test]
    fn rejects_empty_class() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            generate_synthetic_corpus(0, 5, 1, dir.path()),
            Err(Error::Domain(_))
        ));
    }
}
