//! Labeled datasets: manifest CSV files and ICBHI-style diagnosis ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;

pub const MANIFEST_HEADER: &str = "path,label,subject_id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Normal,
    Abnormal,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Abnormal => "abnormal",
        }
    }

    /// Maps an ICBHI diagnosis string: `Healthy` is normal, anything else abnormal.
    pub fn from_diagnosis(diagnosis: &str) -> Self {
        if diagnosis.trim().eq_ignore_ascii_case("healthy") {
            ClassLabel::Normal
        } else {
            ClassLabel::Abnormal
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(ClassLabel::Normal),
            "abnormal" => Ok(ClassLabel::Abnormal),
            other => Err(format!(
                "unknown label `{other}` (expected normal or abnormal)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    /// Path exactly as written in the manifest; doubles as the entry's id.
    pub path: String,
    /// `path` resolved against the manifest's directory.
    pub resolved: PathBuf,
    pub label: ClassLabel,
    pub subject_id: String,
}

/// Dataset entries sorted by path, so fold indices are reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDataset {
    entries: Vec<DatasetEntry>,
}

impl LabeledDataset {
    pub fn new(mut entries: Vec<DatasetEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        if let Some(w) = entries.windows(2).find(|w| w[0].path == w[1].path) {
            return Err(Error::Domain(format!(
                "duplicate dataset path `{}`",
                w[0].path
            )));
        }
        Ok(LabeledDataset { entries })
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }
}

/// Parses a manifest file. Clip paths are not checked here; a missing file
/// surfaces when that clip is loaded.
pub fn load_manifest(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::ManifestParse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let columns: Vec<&str> = header.iter().collect();
    if columns != ["path", "label", "subject_id"] {
        return Err(Error::ManifestParse {
            line: 1,
            message: format!(
                "expected header `{MANIFEST_HEADER}`, found `{}`",
                columns.join(",")
            ),
        });
    }

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::ManifestParse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let path = record[0].to_string();
        if path.is_empty() {
            return Err(Error::ManifestParse {
                line,
                message: "empty path".into(),
            });
        }
        let label = record[1]
            .parse::<ClassLabel>()
            .map_err(|message| Error::ManifestParse { line, message })?;
        entries.push(DatasetEntry {
            resolved: base.join(&path),
            path,
            label,
            subject_id: record[2].to_string(),
        });
    }
    LabeledDataset::new(entries)
}

/// Renders entries as manifest CSV (LF line endings, sorted by path).
pub fn render_manifest(dataset: &LabeledDataset) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Domain(format!("manifest encoding: {e}"));
    writer
        .write_record(["path", "label", "subject_id"])
        .map_err(csv_err)?;
    for e in dataset.entries() {
        writer
            .write_record([e.path.as_str(), e.label.as_str(), e.subject_id.as_str()])
            .map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Domain(format!("manifest encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_manifest(path: &Path, dataset: &LabeledDataset) -> Result<()> {
    fsutil::write_atomic(path, render_manifest(dataset)?.as_bytes())
}

/// Outcome of [`build_manifest_from_diagnosis`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub normal: usize,
    pub abnormal: usize,
    /// Files excluded from the manifest, with the reason.
    pub warnings: Vec<String>,
    pub warnings_path: Option<PathBuf>,
}

/// Parses a two-column `subject_id diagnosis` file (tab, comma or
/// whitespace separated).
pub fn parse_diagnosis(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == '\t' || c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Domain(format!(
                "diagnosis line {}: expected 2 columns, found {}",
                i + 1,
                fields.len()
            )));
        }
        map.insert(fields[0].to_string(), fields[1].to_string());
    }
    Ok(map)
}

/// Scans `audio_dir` for WAV files named `<subject>_*.wav`, labels each by
/// its subject's diagnosis and writes a manifest to `out`. Files whose
/// subject has no diagnosis are listed in `<out>.warnings.txt`.
pub fn build_manifest_from_diagnosis(
    audio_dir: &Path,
    diagnosis_file: &Path,
    out: &Path,
) -> Result<IngestSummary> {
    let text = std::fs::read_to_string(diagnosis_file).map_err(|cause| Error::Diagnosis {
        path: diagnosis_file.to_path_buf(),
        cause,
    })?;
    let diagnosis = parse_diagnosis(&text)?;

    let mut wavs = BTreeSet::new();
    for item in std::fs::read_dir(audio_dir).map_err(|e| Error::io(audio_dir, e))? {
        let item = item.map_err(|e| Error::io(audio_dir, e))?;
        let path = item.path();
        let is_wav = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("wav"))
            .unwrap_or(false);
        if is_wav && path.is_file() {
            wavs.insert(path);
        }
    }

    let manifest_dir = out.parent().filter(|p| !p.as_os_str().is_empty());
    let manifest_dir = match manifest_dir {
        Some(d) => d.canonicalize().map_err(|e| Error::io(d, e))?,
        None => std::env::current_dir().map_err(|e| Error::io(".", e))?,
    };

    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for wav in wavs {
        let name = wav.file_name().unwrap().to_string_lossy().into_owned();
        let subject = match name.split_once('_') {
            Some((s, _)) if !s.is_empty() => s.to_string(),
            _ => {
                warnings.push(format!("{name}: filename has no `<subject>_` prefix"));
                continue;
            }
        };
        let Some(diag) = diagnosis.get(&subject) else {
            warnings.push(format!("{name}: subject {subject} has no diagnosis entry"));
            continue;
        };
        let absolute = wav.canonicalize().map_err(|e| Error::io(&wav, e))?;
        let written = absolute
            .strip_prefix(&manifest_dir)
            .map(Path::to_path_buf)
            .unwrap_or_else(|_| absolute.clone());
        entries.push(DatasetEntry {
            path: written.to_string_lossy().into_owned(),
            resolved: absolute,
            label: ClassLabel::from_diagnosis(diag),
            subject_id: subject,
        });
    }

    let dataset = LabeledDataset::new(entries)?;
    write_manifest(out, &dataset)?;

    let warnings_path = if warnings.is_empty() {
        None
    } else {
        let mut p = out.as_os_str().to_owned();
        p.push(".warnings.txt");
        let p = PathBuf::from(p);
        let mut body = warnings.join("\n");
        body.push('\n');
        fsutil::write_atomic(&p, body.as_bytes())?;
        Some(p)
    };

    Ok(IngestSummary {
        normal: dataset.count(ClassLabel::Normal),
        abnormal: dataset.count(ClassLabel::Abnormal),
        warnings,
        warnings_path,
    })
}
