// SPDX-License-Identifier: Apache-2.0

//! Tabular classification data: min-max normalization and seeded splits.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::rng::Lcg64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

/// A labelled feature matrix with `m` features and `n` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    m: usize,
    n: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, m: usize, n: usize, samples: Vec<Sample>) -> Result<Self> {
        if m < 1 {
            return Err(invalid("a dataset needs at least one feature"));
        }
        if n < 2 {
            return Err(invalid("a dataset needs at least two classes"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != m {
                return Err(invalid(alloc::format!("sample {i} has {} features, expected {m}", s.features.len())));
            }
            if s.label >= n {
                return Err(invalid(alloc::format!("sample {i} has label {} outside [0, {n})", s.label)));
            }
        }
        Ok(Dataset { name: name.into(), m, n, samples })
    }

    /// Builds a dataset from parallel feature rows and labels.
    pub fn from_rows(name: impl Into<String>, n: usize, rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        check_dim(rows.len(), labels.len())?;
        let m = rows.first().map_or(0, Vec::len);
        let samples = rows.into_iter().zip(labels).map(|(features, label)| Sample { features, label }).collect();
        Dataset::new(name, m, n, samples)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of distinct labels that actually occur.
    pub fn classes_present(&self) -> usize {
        let mut seen = alloc::vec![false; self.n];
        for s in &self.samples {
            seen[s.label] = true;
        }
        seen.iter().filter(|&&b| b).count()
    }

    /// Same schema, different rows.
    pub fn with_samples(&self, samples: Vec<Sample>) -> Result<Self> {
        Dataset::new(self.name.clone(), self.m, self.n, samples)
    }

    /// Applies `f` to every feature value.
    pub fn map_features(&self, mut f: impl FnMut(usize, f64) -> f64) -> Dataset {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                features: s.features.iter().enumerate().map(|(j, &v)| f(j, v)).collect(),
                label: s.label,
            })
            .collect();
        Dataset { name: self.name.clone(), m: self.m, n: self.n, samples }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

/// Per-feature min/max fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<FeatureRange>,
}

impl NormalizationParams {
    pub fn m(&self) -> usize {
        self.ranges.len()
    }

    /// Maps one value of feature `j` into `[0, 1]`; constant features map to 0.
    pub fn normalize(&self, j: usize, v: f64) -> f64 {
        let FeatureRange { min, max } = self.ranges[j];
        if max <= min {
            return 0.0;
        }
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    }
}

pub fn fit_normalizer(train: &Dataset) -> Result<NormalizationParams> {
    if train.is_empty() {
        return Err(invalid("cannot fit a normalizer on an empty dataset"));
    }
    let mut ranges = alloc::vec![FeatureRange { min: f64::INFINITY, max: f64::NEG_INFINITY }; train.m];
    for s in &train.samples {
        for (r, &v) in ranges.iter_mut().zip(&s.features) {
            r.min = r.min.min(v);
            r.max = r.max.max(v);
        }
    }
    Ok(NormalizationParams { ranges })
}

pub fn apply_normalizer(params: &NormalizationParams, data: &Dataset) -> Result<Dataset> {
    check_dim(params.m(), data.m)?;
    Ok(data.map_features(|j, v| params.normalize(j, v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.8, seed: 42 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(invalid("train_fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn train_size(&self, total: usize) -> usize {
        (libm::round(self.train_fraction * total as f64) as usize).min(total)
    }
}

/// Unstratified shuffled split. The permutation is a Fisher-Yates shuffle driven
/// by [`Lcg64`] seeded with `spec.seed`; the first `round(fraction * len)`
/// shuffled samples form the training set.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    Lcg64::new(spec.seed).shuffle(&mut order);
    let cut = spec.train_size(data.len());
    let pick = |idx: &[usize]| idx.iter().map(|&i| data.samples[i].clone()).collect::<Vec<_>>();
    Ok((data.with_samples(pick(&order[..cut]))?, data.with_samples(pick(&order[cut..]))?))
}
