//! Per-coefficient summary statistics of an MFCC matrix and z-score
//! standardization of the resulting feature vectors.
//!
//! Feature layout is coefficient-major: the value at `6 * c + s` is
//! statistic `s` (see [`STATISTICS`]) of coefficient column `c`.

use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::dsp::MfccMatrix;
use crate::error::{Error, Result};

pub const STATISTICS: [&str; 6] = ["min", "max", "mean", "std", "skewness", "kurtosis"];
pub const STATS_PER_COEFFICIENT: usize = STATISTICS.len();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: ClassLabel,
    pub source: String,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: ClassLabel, source: impl Into<String>) -> Self {
        FeatureVector {
            values,
            label,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `[min, max, mean, std, skewness, kurtosis]` of a sequence, using
/// divisor-n central moments and Pearson (non-excess) kurtosis. A
/// constant sequence reports std, skewness and kurtosis of 0.
pub fn column_statistics(values: &[f64]) -> Result<[f64; 6]> {
    if values.is_empty() {
        return Err(Error::Domain("statistics of an empty sequence".into()));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok([min, max, min, 0.0, 0.0, 0.0]);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Ok([min, max, mean, 0.0, 0.0, 0.0]);
    }
    Ok([min, max, mean, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2)])
}

/// Summary statistics of every coefficient column of `matrix`.
pub fn summarize_values(matrix: &MfccMatrix) -> Result<Vec<f64>> {
    if matrix.num_frames() == 0 || matrix.num_coefficients() == 0 {
        return Err(Error::Domain(
            "cannot summarize an empty MFCC matrix".into(),
        ));
    }
    let mut out = Vec::with_capacity(matrix.num_coefficients() * STATS_PER_COEFFICIENT);
    let mut column = Vec::with_capacity(matrix.num_frames());
    for c in 0..matrix.num_coefficients() {
        column.clear();
        column.extend(matrix.column(c));
        out.extend_from_slice(&column_statistics(&column)?);
    }
    Ok(out)
}

pub fn summarize(matrix: &MfccMatrix, label: ClassLabel, source: &str) -> Result<FeatureVector> {
    Ok(FeatureVector::new(summarize_values(matrix)?, label, source))
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    /// Rounding error of each mean, so nearly constant columns with a large
    /// offset still center exactly.
    #[serde(default)]
    mean_residuals: Vec<f64>,
    stds: Vec<f64>,
    /// Columns whose values were all identical; they standardize to 0.
    degenerate: Vec<bool>,
}

impl Standardizer {
    pub fn fit<'a, I>(vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = vectors.into_iter().collect();
        if rows.len() < 2 {
            return Err(Error::Domain(format!(
                "standardizer needs at least 2 vectors, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Domain("feature vectors differ in length".into()));
        }
        let n = rows.len() as f64;
        let mut means = Vec::with_capacity(dim);
        let mut mean_residuals = Vec::with_capacity(dim);
        let mut stds = Vec::with_capacity(dim);
        let mut degenerate = Vec::with_capacity(dim);
        for c in 0..dim {
            let first = rows[0][c];
            if rows.iter().all(|r| r[c] == first) {
                means.push(first);
                mean_residuals.push(0.0);
                stds.push(0.0);
                degenerate.push(true);
                continue;
            }
            let rough = rows.iter().map(|r| r[c]).sum::<f64>() / n;
            let correction = rows.iter().map(|r| r[c] - rough).sum::<f64>() / n;
            let mean = rough + correction;
            let residual = correction - (mean - rough);
            let var = rows
                .iter()
                .map(|r| ((r[c] - mean) - residual).powi(2))
                .sum::<f64>()
                / n;
            means.push(mean);
            mean_residuals.push(residual);
            stds.push(var.sqrt());
            degenerate.push(var == 0.0);
        }
        Ok(Standardizer {
            means,
            mean_residuals,
            stds,
            degenerate,
        })
    }

    pub fn fit_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        Self::fit(vectors.iter().map(|v| v.values.as_slice()))
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn transform(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::Domain(format!(
                "vector has {} values, standardizer was fitted on {}",
                values.len(),
                self.dim()
            )));
        }
        Ok(values
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if self.degenerate[c] {
                    0.0
                } else {
                    let residual = self.mean_residuals.get(c).copied().unwrap_or(0.0);
                    ((v - self.means[c]) - residual) / self.stds[c]
                }
            })
            .collect())
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector> {
        Ok(FeatureVector {
            values: self.transform(&v.values)?,
            label: v.label,
            source: v.source.clone(),
        })
    }
}

pub fn fit_standardizer(vectors: &[FeatureVector]) -> Result<Standardizer> {
    Standardizer::fit_vectors(vectors)
}

pub fn apply_standardizer(s: &Standardizer, v: &FeatureVector) -> Result<FeatureVector> {
    s.apply(v)
}

/// Feature cache CSV: `source,label,f_00..f_NN` with 17 significant digits.
pub fn features_to_csv(vectors: &[FeatureVector]) -> Result<String> {
    let dim = vectors.first().map(FeatureVector::len).unwrap_or(0);
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Domain("feature vectors differ in length".into()));
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let enc = |e: csv::Error| Error::Domain(format!("feature CSV encoding: {e}"));
    let mut header = vec!["source".to_string(), "label".to_string()];
    header.extend((0..dim).map(|i| format!("f_{i:02}")));
    writer.write_record(&header).map_err(enc)?;
    for v in vectors {
        let mut row = vec![v.source.clone(), v.label.to_string()];
        row.extend(v.values.iter().map(|x| format!("{x:.16e}")));
        writer.write_record(&row).map_err(enc)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Domain(format!("feature CSV encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn features_from_csv(text: &str) -> Result<Vec<FeatureVector>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |line: u64, message: String| Error::FeatureParse { line, message };
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.len() < 2 || &header[0] != "source" || &header[1] != "label" {
        return Err(parse_err(
            1,
            "expected header `source,label,f_00,...`".into(),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(0, e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let label = record[1].parse().map_err(|m| parse_err(line, m))?;
        let values = record
            .iter()
            .skip(2)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(line, format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FeatureVector::new(values, label, &record[0]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::MfccConfig;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn statistics_of_one_two_three() {
        let s = column_statistics(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(&s[..3], &[1.0, 3.0, 2.0]);
        assert!(close(s[3], (2.0f64 / 3.0).sqrt(), 1e-15));
        assert_eq!(s[4], 0.0);
        assert!(close(s[5], 1.5, 1e-14));
    }

    #[test]
    fn constant_track() {
        assert_eq!(
            column_statistics(&[5.0; 3]).unwrap(),
            [5.0, 5.0, 5.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(column_statistics(&[0.1; 7]).unwrap()[3..], [0.0, 0.0, 0.0]);
        assert!(column_statistics(&[]).is_err());
    }

    #[test]
    fn summarize_layout_is_coefficient_major() {
        let rows = vec![vec![1.0, 10.0], vec![2.0, 10.0], vec![3.0, 10.0]];
        let m = MfccMatrix::from_rows(&rows, MfccConfig::default()).unwrap();
        let v = summarize(&m, ClassLabel::Normal, "x").unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(v.values[0], 1.0);
        assert_eq!(v.values[1], 3.0);
        assert_eq!(&v.values[6..], &[10.0, 10.0, 10.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardizer_basic_cases() {
        let col = [vec![1.0], vec![2.0], vec![3.0]];
        let s = Standardizer::fit(col.iter().map(|v| v.as_slice())).unwrap();
        assert_eq!(s.means(), &[2.0]);
        assert!(close(s.stds()[0], (2.0f64 / 3.0).sqrt(), 1e-15));
        let z: Vec<f64> = col.iter().map(|v| s.transform(v).unwrap()[0]).collect();
        let r = 1.5f64.sqrt();
        for (a, b) in z.iter().zip([-r, 0.0, r]) {
            assert!((a - b).abs() < 1e-12);
        }

        let two = [vec![0.0, 4.0], vec![2.0, 4.0]];
        let s = Standardizer::fit(two.iter().map(|v| v.as_slice())).unwrap();
        assert_eq!(s.means(), &[1.0, 4.0]);
        assert_eq!(s.stds(), &[1.0, 0.0]);
        assert_eq!(s.degenerate(), &[false, true]);
        assert_eq!(s.transform(&[7.0, 9.0]).unwrap(), vec![6.0, 0.0]);
    }

    #[test]
    fn identical_vectors_flag_every_column() {
        let rows = vec![vec![0.1, 0.2, 0.3]; 4];
        let s = Standardizer::fit(rows.iter().map(|v| v.as_slice())).unwrap();
        assert!(s.degenerate().iter().all(|&d| d));
        assert_eq!(s.transform(&rows[0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn standardizer_centers_offset_columns() {
        let rows = [vec![83.0 + 1e-9], vec![83.0 + 3e-9], vec![83.0 + 4e-9]];
        let s = Standardizer::fit(rows.iter().map(|v| v.as_slice())).unwrap();
        let z: Vec<f64> = rows.iter().map(|v| s.transform(v).unwrap()[0]).collect();
        let mean = z.iter().sum::<f64>() / 3.0;
        let sd = (z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!(mean.abs() < 1e-12, "{mean}");
        assert!((sd - 1.0).abs() < 1e-12, "{sd}");
    }

    #[test]
    fn standardizer_errors() {
        let one = [vec![1.0]];
        assert!(Standardizer::fit(one.iter().map(|v| v.as_slice())).is_err());
        let ragged = [vec![1.0], vec![1.0, 2.0]];
        assert!(Standardizer::fit(ragged.iter().map(|v| v.as_slice())).is_err());
        let rows = [vec![1.0], vec![2.0]];
        let s = Standardizer::fit(rows.iter().map(|v| v.as_slice())).unwrap();
        assert!(matches!(s.transform(&[1.0, 2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn feature_csv_round_trip() {
        let vs = vec![
            FeatureVector::new(
                vec![0.1, -1.0 / 3.0, 1e-300, 123456.789],
                ClassLabel::Normal,
                "a.wav",
            ),
            FeatureVector::new(
                vec![f64::MIN_POSITIVE, 2.5, -0.0, 7.0],
                ClassLabel::Abnormal,
                "dir/b,c.wav",
            ),
        ];
        let text = features_to_csv(&vs).unwrap();
        assert!(text.starts_with("source,label,f_00,f_01,f_02,f_03\n"));
        let back = features_from_csv(&text).unwrap();
        assert_eq!(back, vs);
        for (a, b) in back.iter().zip(&vs) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    proptest! {
        #[test]
        fn affine_covariance(track in prop::collection::vec(-50.0f64..50.0, 3..60), alpha in 0.1f64..10.0) {
            let base = column_statistics(&track).unwrap();
            prop_assume!(base[3] > 1e-6);
            let scaled: Vec<f64> = track.iter().map(|v| v * alpha).collect();
            let s = column_statistics(&scaled).unwrap();
            for i in 0..4 {
                prop_assert!(close(s[i], alpha * base[i], 1e-9));
            }
            prop_assert!(close(s[4], base[4], 1e-9));
            prop_assert!(close(s[5], base[5], 1e-9));
        }

        #[test]
        fn zscore_idempotent_on_fit_set(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..30)) {
            let s = Standardizer::fit(rows.iter().map(|v| v.as_slice())).unwrap();
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r).unwrap()).collect();
            let s2 = Standardizer::fit(z.iter().map(|v| v.as_slice())).unwrap();
            for c in 0..4 {
                if !s.degenerate()[c] {
                    prop_assert!(s2.means()[c].abs() < 1e-10);
                    prop_assert!((s2.stds()[c] - 1.0).abs() < 1e-10);
                }
            }
        }
    }
}
