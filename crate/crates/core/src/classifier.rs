//! k-nearest-neighbor classification and leave-one-out evaluation.
//!
//! Tie handling is fully deterministic:
//! - neighbors at equal distance are ordered by dataset index;
//! - a split vote is decided by the single nearest neighbor (which, under
//!   the ordering above, is the lowest-index one among equidistant points).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Standardizer};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
    pub metric: Metric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 1,
            metric: Metric::Euclidean,
        }
    }
}

/// Where the z-score statistics come from during leave-one-out evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZScoreMode {
    /// Fit once on every vector, including the held-out one.
    #[default]
    Global,
    /// Refit on each training fold; the held-out vector never contributes.
    PerFold,
}

/// Majority label among the `k` nearest of `candidates`, where each
/// candidate is `(distance, label)` listed in dataset-index order.
fn vote(mut candidates: Vec<(f64, ClassLabel)>, k: usize) -> ClassLabel {
    // stable: equal distances keep index order
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let nearest = &candidates[..k];
    let abnormal = nearest
        .iter()
        .filter(|c| c.1 == ClassLabel::Abnormal)
        .count();
    let normal = k - abnormal;
    match normal.cmp(&abnormal) {
        Ordering::Greater => ClassLabel::Normal,
        Ordering::Less => ClassLabel::Abnormal,
        Ordering::Equal => nearest[0].1,
    }
}

fn check_k(k: usize, train_len: usize) -> Result<()> {
    if k == 0 || k > train_len {
        return Err(Error::Config(format!(
            "k = {k} must be between 1 and the training set size {train_len}"
        )));
    }
    Ok(())
}

pub fn knn_predict(
    train: &[FeatureVector],
    query: &[f64],
    config: &KnnConfig,
) -> Result<ClassLabel> {
    if train.is_empty() {
        return Err(Error::Domain("empty training set".into()));
    }
    check_k(config.k, train.len())?;
    if let Some(v) = train.iter().find(|v| v.len() != query.len()) {
        return Err(Error::Domain(format!(
            "dimension mismatch: query has {}, training vector `{}` has {}",
            query.len(),
            v.source,
            v.len()
        )));
    }
    let candidates = train
        .iter()
        .map(|v| (config.metric.distance(&v.values, query), v.label))
        .collect();
    Ok(vote(candidates, config.k))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_normal: usize,
    pub false_abnormal: usize,
    pub false_normal: usize,
    pub true_abnormal: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: ClassLabel, prediction: ClassLabel) {
        match (truth, prediction) {
            (ClassLabel::Normal, ClassLabel::Normal) => self.true_normal += 1,
            (ClassLabel::Normal, ClassLabel::Abnormal) => self.false_abnormal += 1,
            (ClassLabel::Abnormal, ClassLabel::Normal) => self.false_normal += 1,
            (ClassLabel::Abnormal, ClassLabel::Abnormal) => self.true_abnormal += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_normal + self.false_abnormal + self.false_normal + self.true_abnormal
    }

    pub fn accuracy(&self) -> f64 {
        (self.true_normal + self.true_abnormal) as f64 / self.total() as f64
    }

    /// Recall on the abnormal class. Supplementary; not used for model selection.
    pub fn sensitivity(&self) -> Option<f64> {
        let d = self.true_abnormal + self.false_normal;
        (d > 0).then(|| self.true_abnormal as f64 / d as f64)
    }

    /// Recall on the normal class. Supplementary.
    pub fn specificity(&self) -> Option<f64> {
        let d = self.true_normal + self.false_abnormal;
        (d > 0).then(|| self.true_normal as f64 / d as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub source: String,
    pub truth: ClassLabel,
    pub prediction: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub accuracy: f64,
    pub confusion: Confusion,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub predictions: Vec<Prediction>,
}

impl EvalResult {
    pub fn from_predictions(predictions: Vec<Prediction>) -> Self {
        let mut confusion = Confusion::default();
        for p in &predictions {
            confusion.record(p.truth, p.prediction);
        }
        EvalResult {
            accuracy: confusion.accuracy(),
            sensitivity: confusion.sensitivity(),
            specificity: confusion.specificity(),
            confusion,
            predictions,
        }
    }
}

pub fn loocv_evaluate(
    dataset: &[FeatureVector],
    config: &KnnConfig,
    mode: ZScoreMode,
) -> Result<EvalResult> {
    loocv_evaluate_with(dataset, config, mode, Execution::default())
}

/// Leave-one-out accuracy: every vector is classified by a KNN trained on
/// all the others.
pub fn loocv_evaluate_with(
    dataset: &[FeatureVector],
    config: &KnnConfig,
    mode: ZScoreMode,
    exec: Execution,
) -> Result<EvalResult> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "leave-one-out needs at least 2 vectors, got {n}"
        )));
    }
    check_k(config.k, n - 1)?;
    let dim = dataset[0].len();
    if let Some(v) = dataset.iter().find(|v| v.len() != dim) {
        return Err(Error::Domain(format!(
            "dimension mismatch: `{}` has {} values, expected {dim}",
            v.source,
            v.len()
        )));
    }

    let global: Option<Vec<Vec<f64>>> = match mode {
        ZScoreMode::Global => {
            let s = Standardizer::fit_vectors(dataset)?;
            Some(
                dataset
                    .iter()
                    .map(|v| s.transform(&v.values))
                    .collect::<Result<_>>()?,
            )
        }
        ZScoreMode::PerFold => None,
    };

    let predictions = par::try_map_indexed(n, exec, |held_out| {
        let candidates = match &global {
            Some(rows) => (0..n)
                .filter(|&j| j != held_out)
                .map(|j| {
                    (
                        config.metric.distance(&rows[j], &rows[held_out]),
                        dataset[j].label,
                    )
                })
                .collect(),
            None => {
                let train = (0..n)
                    .filter(|&j| j != held_out)
                    .map(|j| dataset[j].values.as_slice());
                let s = Standardizer::fit(train)?;
                let query = s.transform(&dataset[held_out].values)?;
                (0..n)
                    .filter(|&j| j != held_out)
                    .map(|j| {
                        let row = s.transform(&dataset[j].values)?;
                        Ok((config.metric.distance(&row, &query), dataset[j].label))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Prediction {
            source: dataset[held_out].source.clone(),
            truth: dataset[held_out].label,
            prediction: vote(candidates, config.k),
        })
    })?;
    Ok(EvalResult::from_predictions(predictions))
}
