//! On-disk cache of per-clip feature vectors.
//!
//! Entries are keyed by the clip's content digest, the window and the full
//! MFCC configuration. Concurrent writers of one key produce identical
//! bytes, and each write is a temp-file rename, so the last writer wins.

use std::path::{Path, PathBuf};

use crate::dsp::MfccConfig;
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    pub fn open(dir: &Path) -> Result<Self> {
        fsutil::create_dir_all(dir)?;
        Ok(FeatureCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(clip_digest: &str, window: f64, offset: f64, config: &MfccConfig) -> String {
        let config_json = serde_json::to_string(config).expect("config serializes");
        let material = format!(
            "{clip_digest}\n{:016x}\n{:016x}\n{config_json}",
            window.to_bits(),
            offset.to_bits()
        );
        fsutil::sha256_hex(material.as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }

    /// Cached values, or `None` on a miss or an unreadable entry.
    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        text.lines()
            .map(|l| l.parse::<f64>().ok())
            .collect::<Option<Vec<_>>>()
            .filter(|v| !v.is_empty())
    }

    pub fn put(&self, key: &str, values: &[f64]) -> Result<()> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "refusing to cache non-finite features".into(),
            ));
        }
        let mut body = String::new();
        for v in values {
            body.push_str(&format!("{v:.16e}\n"));
        }
        fsutil::write_atomic(&self.path(key), body.as_bytes())
    }
}
