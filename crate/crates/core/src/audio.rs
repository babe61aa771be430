//! WAV decoding/encoding and fixed-duration window extraction.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil;

/// Decoded mono recording. Samples are normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source: String,
}

impl AudioClip {
    /// Builds a clip from in-memory samples. Samples must be finite and
    /// lie in `[-1, 1]`.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source: impl Into<String>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite() || x.abs() > 1.0) {
            return Err(Error::Domain(format!(
                "sample {i} = {} is outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(AudioClip {
            samples,
            sample_rate,
            source: source.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Returns a copy with every sample multiplied by `gain`, clamped to `[-1, 1]`.
    pub fn scaled(&self, gain: f64) -> AudioClip {
        AudioClip {
            samples: self
                .samples
                .iter()
                .map(|x| (x * gain).clamp(-1.0, 1.0))
                .collect(),
            sample_rate: self.sample_rate,
            source: self.source.clone(),
        }
    }
}

/// Portion of a clip to analyze, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub duration: f64,
    pub offset: f64,
}

impl WindowSpec {
    pub fn new(duration: f64, offset: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::Domain(format!(
                "window duration must be positive, got {duration}"
            )));
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::Domain(format!(
                "window offset must be non-negative, got {offset}"
            )));
        }
        Ok(WindowSpec { duration, offset })
    }

    /// Leading window of `duration` seconds.
    pub fn leading(duration: f64) -> Result<Self> {
        Self::new(duration, 0.0)
    }

    /// Sample range `[start, end)` this window covers at `sample_rate`.
    pub fn sample_range(&self, sample_rate: u32) -> (usize, usize) {
        let fs = sample_rate as f64;
        let start = (self.offset * fs).round() as usize;
        let len = (self.duration * fs).round() as usize;
        (start, start + len)
    }
}

/// Cuts `spec` out of `clip`. Fails when the window runs past the clip end.
pub fn extract_window(clip: &AudioClip, spec: &WindowSpec) -> Result<AudioClip> {
    let (start, end) = spec.sample_range(clip.sample_rate);
    if end > clip.samples.len() {
        return Err(Error::InsufficientDuration {
            available: clip.duration_seconds(),
            requested: spec.offset + spec.duration,
        });
    }
    Ok(AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate: clip.sample_rate,
        source: clip.source.clone(),
    })
}

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Reads a WAV file into a mono clip.
pub fn load_wav(path: &Path) -> Result<AudioClip> {
    Ok(load_wav_with_digest(path)?.0)
}

/// Like [`load_wav`], also returning the SHA-256 of the file bytes.
pub fn load_wav_with_digest(path: &Path) -> Result<(AudioClip, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let clip = decode_wav(&bytes, &path.display().to_string())?;
    Ok((clip, fsutil::sha256_hex(&bytes)))
}

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes([b[0], b[1]])
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

/// Decodes an in-memory RIFF/WAVE byte stream.
pub fn decode_wav(bytes: &[u8], source: &str) -> Result<AudioClip> {
    if bytes.len() < 12 {
        return Err(Error::decode("RIFF", "file shorter than the RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(Error::decode("RIFF", "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(Error::decode("RIFF", "form type is not WAVE"));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(&bytes[pos + 4..pos + 8]) as usize;
        let body_start = pos + 8;
        let name = String::from_utf8_lossy(id).into_owned();
        match id {
            b"fmt " => {
                if size < 16 || body_start + size > bytes.len() {
                    return Err(Error::decode(
                        "fmt ",
                        format!("chunk size {size} is invalid"),
                    ));
                }
                fmt = Some(parse_fmt(&bytes[body_start..body_start + size])?);
            }
            b"data" => {
                let fmt =
                    fmt.ok_or_else(|| Error::decode("data", "data chunk precedes fmt chunk"))?;
                if size == 0 {
                    return Err(Error::EmptyAudio);
                }
                if body_start + size > bytes.len() {
                    return Err(Error::decode(
                        "data",
                        format!(
                            "declares {size} bytes but only {} remain",
                            bytes.len() - body_start
                        ),
                    ));
                }
                return decode_samples(&bytes[body_start..body_start + size], fmt, source);
            }
            _ => {
                if body_start + size > bytes.len() {
                    return Err(Error::decode(&name, "chunk runs past end of file"));
                }
            }
        }
        // chunks are word aligned
        pos = body_start + size + (size & 1);
    }
    match fmt {
        None => Err(Error::decode("fmt ", "no fmt chunk found")),
        Some(_) => Err(Error::decode("data", "no data chunk found")),
    }
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk> {
    let mut format = le_u16(&body[0..2]);
    let channels = le_u16(&body[2..4]);
    let sample_rate = le_u32(&body[4..8]);
    let bits_per_sample = le_u16(&body[14..16]);
    if format == FORMAT_EXTENSIBLE {
        if body.len() < 26 {
            return Err(Error::decode(
                "fmt ",
                "extensible format without sub-format GUID",
            ));
        }
        format = le_u16(&body[24..26]);
    }
    if format != FORMAT_PCM && format != FORMAT_FLOAT {
        return Err(Error::UnsupportedFormat(format!(
            "format tag 0x{format:04x} (only PCM and IEEE float are decoded)"
        )));
    }
    let bits_ok = match format {
        FORMAT_PCM => matches!(bits_per_sample, 16 | 24 | 32),
        _ => bits_per_sample == 32,
    };
    if !bits_ok {
        return Err(Error::UnsupportedFormat(format!(
            "{bits_per_sample}-bit {}",
            if format == FORMAT_PCM { "PCM" } else { "float" }
        )));
    }
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedFormat(format!("{channels} channels")));
    }
    if sample_rate == 0 {
        return Err(Error::decode("fmt ", "sample rate is zero"));
    }
    Ok(FmtChunk {
        format,
        channels,
        sample_rate,
        bits_per_sample,
    })
}

fn decode_samples(data: &[u8], fmt: FmtChunk, source: &str) -> Result<AudioClip> {
    let width = (fmt.bits_per_sample / 8) as usize;
    let channels = fmt.channels as usize;
    let frame_bytes = width * channels;
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(Error::EmptyAudio);
    }

    let read_one = |b: &[u8]| -> f64 {
        match (fmt.format, width) {
            (FORMAT_PCM, 2) => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
            (FORMAT_PCM, 3) => {
                // sign-extend by placing the 24 bits in the top of an i32
                let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            (FORMAT_PCM, 4) => {
                i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
            }
            _ => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        }
    };

    let mut samples = Vec::with_capacity(frames);
    for frame in data.chunks_exact(frame_bytes) {
        let sum: f64 = frame.chunks_exact(width).map(read_one).sum();
        let v = sum / channels as f64;
        if !v.is_finite() {
            return Err(Error::decode("data", "non-finite float sample"));
        }
        samples.push(v.clamp(-1.0, 1.0));
    }
    Ok(AudioClip {
        samples,
        sample_rate: fmt.sample_rate,
        source: source.to_string(),
    })
}

/// Encodes a clip as a mono 16-bit PCM WAV byte stream.
pub fn encode_wav_pcm16(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &x in &clip.samples {
        let q = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn write_wav_pcm16(path: &Path, clip: &AudioClip) -> Result<()> {
    fsutil::write_atomic(path, &encode_wav_pcm16(clip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wav_bytes(format: u16, channels: u16, bits: u16, rate: u32, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&((36 + data.len()) as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        let block = channels * bits / 8;
        out.extend_from_slice(&(rate * block as u32).to_le_bytes());
        out.extend_from_slice(&block.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    fn pcm16(values: &[i16]) -> Vec<u8> {
        values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    #[test]
    fn pcm16_mono_full_scale() {
        let bytes = wav_bytes(1, 1, 16, 8000, &pcm16(&[0, 16384, -32768]));
        let clip = decode_wav(&bytes, "t").unwrap();
        assert_eq!(clip.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(clip.sample_rate(), 8000);
    }

    #[test]
    fn stereo_mixes_to_mean() {
        let mut data = Vec::new();
        data.extend_from_slice(&1.0f32.to_le_bytes());
        data.extend_from_slice(&0.0f32.to_le_bytes());
        let clip = decode_wav(&wav_bytes(3, 2, 32, 44100, &data), "t").unwrap();
        assert_eq!(clip.samples(), &[0.5]);
    }

    #[test]
    fn pcm24_and_pcm32_scale() {
        // 0x400000 = half of 24-bit full scale; 0x800000 = -full scale
        let data = [0x00, 0x00, 0x40, 0x00, 0x00, 0x80];
        let clip = decode_wav(&wav_bytes(1, 1, 24, 8000, &data), "t").unwrap();
        assert_eq!(clip.samples(), &[0.5, -1.0]);

        let data: Vec<u8> = [i32::MIN, 1 << 30]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let clip = decode_wav(&wav_bytes(1, 1, 32, 8000, &data), "t").unwrap();
        assert_eq!(clip.samples(), &[-1.0, 0.5]);
    }

    #[test]
    fn compressed_format_is_unsupported() {
        let bytes = wav_bytes(0x0055, 1, 16, 8000, &pcm16(&[1, 2]));
        assert!(matches!(
            decode_wav(&bytes, "t"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn empty_data_chunk() {
        let bytes = wav_bytes(1, 1, 16, 8000, &[]);
        assert!(matches!(decode_wav(&bytes, "t"), Err(Error::EmptyAudio)));
    }

    #[test]
    fn malformed_header_names_chunk() {
        let mut bytes = wav_bytes(1, 1, 16, 8000, &pcm16(&[1]));
        bytes[8..12].copy_from_slice(b"AVI ");
        match decode_wav(&bytes, "t") {
            Err(Error::Decode { chunk, .. }) => assert_eq!(chunk, "RIFF"),
            other => panic!("unexpected {other:?}"),
        }

        let mut bytes = wav_bytes(1, 1, 16, 8000, &pcm16(&[1, 2, 3]));
        bytes.truncate(bytes.len() - 2);
        match decode_wav(&bytes, "t") {
            Err(Error::Decode { chunk, .. }) => assert_eq!(chunk, "data"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn skips_unknown_chunks() {
        let plain = wav_bytes(1, 1, 16, 8000, &pcm16(&[100, -100]));
        let mut bytes = plain[..36].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]);
        bytes.extend_from_slice(&plain[36..]);
        let a = decode_wav(&plain, "t").unwrap();
        let b = decode_wav(&bytes, "t").unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn window_extraction() {
        let clip = AudioClip::new(vec![0.0; 20 * 44100], 44100, "t").unwrap();
        let full = extract_window(&clip, &WindowSpec::leading(20.0).unwrap()).unwrap();
        assert_eq!(full, clip);
        let half = extract_window(&clip, &WindowSpec::leading(0.5).unwrap()).unwrap();
        assert_eq!(half.len(), 22050);
        assert_eq!(half.sample_rate(), 44100);
        match extract_window(&clip, &WindowSpec::leading(21.0).unwrap()) {
            Err(Error::InsufficientDuration {
                available,
                requested,
            }) => {
                assert_eq!(available, 20.0);
                assert_eq!(requested, 21.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_offset_selects_later_samples() {
        let clip = AudioClip::new((0..10).map(|i| i as f64 / 10.0).collect(), 10, "t").unwrap();
        let w = extract_window(&clip, &WindowSpec::new(0.3, 0.5).unwrap()).unwrap();
        assert_eq!(w.samples(), &[0.5, 0.6, 0.7]);
    }

    #[test]
    fn window_spec_rejects_bad_values() {
        assert!(WindowSpec::new(0.0, 0.0).is_err());
        assert!(WindowSpec::new(1.0, -0.1).is_err());
        assert!(WindowSpec::new(f64::NAN, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn pcm16_round_trip(samples in prop::collection::vec(-1.0f64..=1.0, 1..300)) {
            let clip = AudioClip::new(samples, 16000, "p").unwrap();
            let back = decode_wav(&encode_wav_pcm16(&clip), "p").unwrap();
            prop_assert_eq!(back.len(), clip.len());
            for (a, b) in clip.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1.0 / 32768.0);
            }
        }

        #[test]
        fn window_prefix_consistency(len in 50usize..400, d1 in 1usize..40, d2 in 1usize..40) {
            let (d1, d2) = (d1.max(d2), d1.min(d2));
            let clip = AudioClip::new((0..len).map(|i| (i as f64 * 0.37).sin()).collect(), 10, "p").unwrap();
            let w1 = WindowSpec::leading(d1 as f64 / 10.0).unwrap();
            let w2 = WindowSpec::leading(d2 as f64 / 10.0).unwrap();
            if let Ok(outer) = extract_window(&clip, &w1) {
                let nested = extract_window(&outer, &w2).unwrap();
                prop_assert_eq!(nested, extract_window(&clip, &w2).unwrap());
            }
        }
    }
}
