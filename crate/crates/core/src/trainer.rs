// SPDX-License-Identifier: Apache-2.0

//! One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient
//! descent on the L2-regularized hinge loss.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{check_dim, invalid, Result};
use crate::rng::Lcg64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    OneVsOne,
    OneVsRest,
}

/// Number of binary classifiers a multiclass scheme needs for `n` classes.
pub fn classifier_count(strategy: Strategy, n: usize) -> Result<usize> {
    if n < 2 {
        return Err(invalid("classifier count needs at least two classes"));
    }
    Ok(match strategy {
        Strategy::OneVsOne => n * (n - 1) / 2,
        Strategy::OneVsRest => n,
    })
}

pub const PEGASOS: &str = "pegasos";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Learning-rate schedule. Only `"pegasos"` (step `1/(lambda*t)`) is defined.
    pub schedule: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { lambda: 1e-3, epochs: 200, seed: 42, schedule: String::from(PEGASOS) }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda must be positive"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if self.schedule != PEGASOS {
            return Err(invalid(alloc::format!("unknown learning-rate schedule '{}'", self.schedule)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearClassifier {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

/// `n` one-vs-rest classifiers over `m` features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct SvmModel {
    m: usize,
    n: usize,
    classifiers: Vec<LinearClassifier>,
}

#[derive(Deserialize)]
struct RawModel {
    m: usize,
    n: usize,
    classifiers: Vec<LinearClassifier>,
}

impl TryFrom<RawModel> for SvmModel {
    type Error = crate::Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        let model = SvmModel::new(raw.classifiers)?;
        check_dim(raw.m, model.m)?;
        check_dim(raw.n, model.n)?;
        Ok(model)
    }
}

impl SvmModel {
    pub fn new(classifiers: Vec<LinearClassifier>) -> Result<Self> {
        let n = classifiers.len();
        if n < 2 {
            return Err(invalid("a one-vs-rest model needs at least two classifiers"));
        }
        let m = classifiers[0].weights.len();
        if m == 0 {
            return Err(invalid("classifiers need at least one weight"));
        }
        for c in &classifiers {
            check_dim(m, c.weights.len())?;
        }
        Ok(SvmModel { m, n, classifiers })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classifiers(&self) -> &[LinearClassifier] {
        &self.classifiers
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.classifiers.iter().flat_map(|c| c.weights.iter()).fold(0.0, |a, w| a.max(w.abs()))
    }

    pub fn max_abs_bias(&self) -> f64 {
        self.classifiers.iter().fold(0.0, |a, c| a.max(c.bias.abs()))
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.m, x.len())?;
        Ok(self.classifiers.iter().map(|c| c.decision(x)).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.decision_values(x)?))
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        check_dim(self.m, data.m())?;
        if data.is_empty() {
            return Err(invalid("accuracy of an empty dataset is undefined"));
        }
        let mut correct = 0usize;
        for s in data.samples() {
            if self.predict(&s.features)? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

/// Index of the maximum; ties resolve to the smallest index. This is the same
/// rule as the hardware voter, which replaces its stored score only on a
/// strictly greater value.
pub fn argmax_first<T: PartialOrd>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn train_ovr(train: &Dataset, cfg: &TrainConfig) -> Result<SvmModel> {
    cfg.validate()?;
    if train.classes_present() < 2 {
        return Err(invalid("training data must contain at least two classes"));
    }
    let classifiers = (0..train.n()).map(|c| train_binary(train, c, cfg)).collect();
    SvmModel::new(classifiers)
}

/// Trains class `positive` against the rest. The bias is carried as a weight on
/// a constant feature of 1, so it is regularized like the other weights.
pub fn train_binary(train: &Dataset, positive: usize, cfg: &TrainConfig) -> LinearClassifier {
    let m = train.m();
    let samples = train.samples();
    let mut w = alloc::vec![0.0f64; m + 1];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = Lcg64::derive(cfg.seed, positive as u64);
    let radius = 1.0 / libm::sqrt(cfg.lambda);
    let mut t = 0u64;

    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let s = &samples[i];
            let y = if s.label == positive { 1.0 } else { -1.0 };
            let eta = 1.0 / (cfg.lambda * t as f64);
            let margin = y * (dot(&w[..m], &s.features) + w[m]);
            let shrink = 1.0 - eta * cfg.lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                for (wj, &xj) in w[..m].iter_mut().zip(&s.features) {
                    *wj += eta * y * xj;
                }
                w[m] += eta * y;
            }
            let norm = libm::sqrt(dot(&w, &w));
            if norm > radius {
                let k = radius / norm;
                for wj in w.iter_mut() {
                    *wj *= k;
                }
            }
        }
    }
    let bias = w.pop().unwrap_or(0.0);
    LinearClassifier { weights: w, bias }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
