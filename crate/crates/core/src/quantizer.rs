// SPDX-License-Identifier: Apache-2.0

//! Post-training fixed-point quantization of a one-vs-rest model and the
//! integer golden model the generated circuit must reproduce bit for bit.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{check_dim, invalid, Result};
use crate::fixed::{ceil_log2, integer_bits_for, FixedFormat};
use crate::trainer::{argmax_first, SvmModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantPolicy {
    /// Largest tolerated absolute accuracy loss against the float model.
    pub max_accuracy_drop: f64,
    pub min_fraction_bits: u32,
    pub max_fraction_bits: u32,
    pub input_fraction_bits: u32,
}

impl Default for QuantPolicy {
    fn default() -> Self {
        QuantPolicy { max_accuracy_drop: 0.01, min_fraction_bits: 2, max_fraction_bits: 12, input_fraction_bits: 4 }
    }
}

impl QuantPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_accuracy_drop.is_nan() || self.max_accuracy_drop < 0.0 {
            return Err(invalid("max_accuracy_drop must be non-negative"));
        }
        if self.min_fraction_bits > self.max_fraction_bits {
            return Err(invalid("min_fraction_bits exceeds max_fraction_bits"));
        }
        self.input_format().validate()
    }

    /// Inputs are normalized to `[0, 1]`, so no integer bits are spent on them.
    pub fn input_format(&self) -> FixedFormat {
        FixedFormat::unsigned(0, self.input_fraction_bits)
    }
}

/// Width of a signed accumulator that holds the sum of `m` products plus the
/// aligned bias without overflow: the operand width (product or bias, whichever
/// is wider) plus `ceil(log2(m + 1))` growth bits.
pub fn accumulator_width(m: usize, input: &FixedFormat, weight: &FixedFormat, bias: &FixedFormat) -> u32 {
    let product = input.total_bits() + weight.total_bits();
    product.max(bias.total_bits()) + ceil_log2(m + 1)
}

/// Fixed-point one-vs-rest model. Biases are stored pre-aligned to the product
/// scale `2^(input.f + weight.f)` so the adder needs no shifter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawQuantized")]
pub struct QuantizedSvm {
    pub m: usize,
    pub n: usize,
    pub input_format: FixedFormat,
    pub weight_format: FixedFormat,
    pub bias_format: FixedFormat,
    pub accumulator_width: u32,
    pub weights: Vec<Vec<i64>>,
    pub biases: Vec<i64>,
}

#[derive(Deserialize)]
struct RawQuantized {
    m: usize,
    n: usize,
    input_format: FixedFormat,
    weight_format: FixedFormat,
    bias_format: FixedFormat,
    accumulator_width: u32,
    weights: Vec<Vec<i64>>,
    biases: Vec<i64>,
}

impl TryFrom<RawQuantized> for QuantizedSvm {
    type Error = crate::Error;

    fn try_from(r: RawQuantized) -> Result<Self> {
        let q = QuantizedSvm {
            m: r.m,
            n: r.n,
            input_format: r.input_format,
            weight_format: r.weight_format,
            bias_format: r.bias_format,
            accumulator_width: r.accumulator_width,
            weights: r.weights,
            biases: r.biases,
        };
        q.validate()?;
        Ok(q)
    }
}

impl QuantizedSvm {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.m < 1 {
            return Err(invalid("quantized model needs n >= 2 and m >= 1"));
        }
        for f in [&self.input_format, &self.weight_format, &self.bias_format] {
            f.validate()?;
        }
        if self.input_format.signed {
            return Err(invalid("input format must be unsigned"));
        }
        if !self.weight_format.signed || !self.bias_format.signed {
            return Err(invalid("weight and bias formats must be signed"));
        }
        if self.bias_format.fraction_bits != self.input_format.fraction_bits + self.weight_format.fraction_bits {
            return Err(invalid("bias is not aligned to the product scale"));
        }
        let need = accumulator_width(self.m, &self.input_format, &self.weight_format, &self.bias_format);
        if self.accumulator_width < need || self.accumulator_width > 62 {
            return Err(invalid(alloc::format!("accumulator width {} outside [{need}, 62]", self.accumulator_width)));
        }
        check_dim(self.n, self.weights.len())?;
        check_dim(self.n, self.biases.len())?;
        for row in &self.weights {
            check_dim(self.m, row.len())?;
            if let Some(w) = row.iter().find(|w| !self.weight_format.contains(**w)) {
                return Err(invalid(alloc::format!("raw weight {w} does not fit {}", self.weight_format)));
            }
        }
        if let Some(b) = self.biases.iter().find(|b| !self.bias_format.contains(**b)) {
            return Err(invalid(alloc::format!("raw bias {b} does not fit {}", self.bias_format)));
        }
        Ok(())
    }

    pub fn product_fraction_bits(&self) -> u32 {
        self.input_format.fraction_bits + self.weight_format.fraction_bits
    }

    pub fn quantize_input(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|&v| self.input_format.quantize(v).raw).collect()
    }

    /// Exact integer scores `sum_i w_ki * x_i + b_k` at the product scale.
    pub fn scores(&self, x_raw: &[i64]) -> Result<Vec<i64>> {
        check_dim(self.m, x_raw.len())?;
        if let Some(x) = x_raw.iter().find(|x| !self.input_format.contains(**x)) {
            return Err(invalid(alloc::format!("raw input {x} does not fit {}", self.input_format)));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(x_raw).map(|(w, x)| w * x).sum::<i64>() + b)
            .collect())
    }

    pub fn predict_raw(&self, x_raw: &[i64]) -> Result<usize> {
        Ok(argmax_first(&self.scores(x_raw)?))
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        check_dim(self.m, data.m())?;
        if data.is_empty() {
            return Err(invalid("accuracy of an empty dataset is undefined"));
        }
        let mut correct = 0usize;
        for s in data.samples() {
            if self.predict_raw(&self.quantize_input(&s.features))? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    pub fn dequantized_weight(&self, k: usize, i: usize) -> f64 {
        self.weights[k][i] as f64 / self.weight_format.scale()
    }
}

/// Rounds every feature to `fmt`, so a model can be trained on the same
/// low-precision inputs the circuit sees.
pub fn round_inputs(data: &Dataset, fmt: &FixedFormat) -> Dataset {
    data.map_features(|_, v| fmt.round_trip(v))
}

/// Golden-model scores; see [`QuantizedSvm::scores`].
pub fn quantized_scores(q: &QuantizedSvm, x_raw: &[i64]) -> Result<Vec<i64>> {
    q.scores(x_raw)
}

/// Quantizes every weight and bias with `fraction_bits` weight fraction bits.
/// Returns the model and the number of saturated parameters.
pub fn quantize_with(model: &SvmModel, input: FixedFormat, fraction_bits: u32) -> Result<(QuantizedSvm, usize)> {
    let weight_format = FixedFormat::signed(integer_bits_for(model.max_abs_weight()), fraction_bits);
    let bias_format = FixedFormat::signed(integer_bits_for(model.max_abs_bias()), input.fraction_bits + fraction_bits);
    let mut saturations = 0usize;
    let mut q = |fmt: &FixedFormat, v: f64| {
        let r = fmt.quantize(v);
        saturations += r.saturated as usize;
        r.raw
    };
    let weights: Vec<Vec<i64>> =
        model.classifiers().iter().map(|c| c.weights.iter().map(|&w| q(&weight_format, w)).collect()).collect();
    let biases: Vec<i64> = model.classifiers().iter().map(|c| q(&bias_format, c.bias)).collect();
    let qs = QuantizedSvm {
        m: model.m(),
        n: model.n(),
        input_format: input,
        weight_format,
        bias_format,
        accumulator_width: accumulator_width(model.m(), &input, &weight_format, &bias_format),
        weights,
        biases,
    };
    qs.validate()?;
    Ok((qs, saturations))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub fraction_bits: u32,
    pub accuracy: f64,
    pub meets_gate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantOutcome {
    pub model: QuantizedSvm,
    pub float_accuracy: f64,
    pub accuracy: f64,
    pub gate_met: bool,
    pub saturations: usize,
    /// Every evaluated candidate, in descending `fraction_bits` order.
    pub candidates: Vec<Candidate>,
}

/// Searches weight fraction bits from `policy.max_fraction_bits` down to
/// `policy.min_fraction_bits` and keeps the smallest one whose accuracy on `val`
/// is within `max_accuracy_drop` of the float model. Every candidate is
/// evaluated; accuracy need not be monotone in the precision. If no candidate
/// passes, the most accurate one is returned with `gate_met == false`.
pub fn quantize_model(model: &SvmModel, val: &Dataset, policy: &QuantPolicy) -> Result<QuantOutcome> {
    policy.validate()?;
    let float_accuracy = model.accuracy(val)?;
    let input = policy.input_format();
    // Compare in units of samples to keep the gate free of float noise.
    let required = (float_accuracy - policy.max_accuracy_drop) * val.len() as f64 - 1e-9;

    let mut evaluated = Vec::new();
    for f in (policy.min_fraction_bits..=policy.max_fraction_bits).rev() {
        let (q, sat) = quantize_with(model, input, f)?;
        let accuracy = q.accuracy(val)?;
        let meets_gate = accuracy * val.len() as f64 >= required;
        evaluated.push((Candidate { fraction_bits: f, accuracy, meets_gate }, q, sat));
    }

    let chosen = evaluated
        .iter()
        .filter(|(c, _, _)| c.meets_gate)
        .min_by_key(|(c, _, _)| c.fraction_bits)
        .or_else(|| {
            // Highest accuracy, ties to the narrower format.
            evaluated.iter().max_by(|a, b| {
                a.0.accuracy
                    .partial_cmp(&b.0.accuracy)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then(b.0.fraction_bits.cmp(&a.0.fraction_bits))
            })
        })
        .ok_or_else(|| invalid("empty fraction-bit search range"))?;

    let (cand, q, sat) = chosen.clone();
    Ok(QuantOutcome {
        model: q,
        float_accuracy,
        accuracy: cand.accuracy,
        gate_met: cand.meets_gate,
        saturations: sat,
        candidates: evaluated.into_iter().map(|(c, _, _)| c).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::LinearClassifier;
    use alloc::vec;

    fn toy_q() -> QuantizedSvm {
        let input = FixedFormat::unsigned(0, 4);
        let weight = FixedFormat::signed(2, 4);
        let bias = FixedFormat::signed(2, 8);
        QuantizedSvm {
            m: 2,
            n: 2,
            input_format: input,
            weight_format: weight,
            bias_format: bias,
            accumulator_width: accumulator_width(2, &input, &weight, &bias),
            weights: vec![vec![16, 32], vec![0, 0]],
            biases: vec![768, 0],
        }
    }

    #[test]
    fn accumulator_width_examples() {
        let u4 = FixedFormat::unsigned(0, 4);
        let s4 = FixedFormat::signed(0, 3);
        assert_eq!(accumulator_width(1, &u4, &s4, &FixedFormat::signed(0, 7)), 9);
        let s8 = FixedFormat::signed(2, 5);
        assert_eq!(accumulator_width(34, &u4, &s8, &FixedFormat::signed(2, 9)), 18);
        let u1 = FixedFormat::unsigned(0, 1);
        let s1 = FixedFormat::signed(0, 0);
        assert_eq!(accumulator_width(3, &u1, &s1, &FixedFormat::signed(0, 1)), 4);
    }

    #[test]
    fn scores_examples() {
        let q = toy_q();
        q.validate().unwrap();
        assert_eq!(q.scores(&[0, 0]).unwrap()[0], 768);
        assert_eq!(q.scores(&[8, 8]).unwrap()[0], 1152);
        assert_eq!(q.scores(&[15, 15]).unwrap()[0], 1488);
        assert!(q.scores(&[16]).is_err());
        assert!(q.scores(&[16, 16 * 16]).is_err());
    }

    #[test]
    fn validate_catches_out_of_range_weight() {
        let mut q = toy_q();
        q.weights[1][0] = 1 << 10;
        assert!(q.validate().is_err());
        let mut q = toy_q();
        q.accumulator_width = 3;
        assert!(q.validate().is_err());
    }

    #[test]
    fn integer_weights_take_the_narrowest_format() {
        let model = SvmModel::new(vec![
            LinearClassifier { weights: vec![1.0, -1.0], bias: 0.0 },
            LinearClassifier { weights: vec![-1.0, 1.0], bias: 0.0 },
        ])
        .unwrap();
        // Inputs are multiples of 1/16 so the input format is exact too.
        let rows = vec![vec![1.0 / 16.0, 0.0], vec![0.0, 1.0 / 16.0], vec![0.75, 0.25], vec![0.25, 0.5]];
        let data = Dataset::from_rows("ints", 2, rows, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(model.accuracy(&data).unwrap(), 1.0);
        let policy = QuantPolicy { max_accuracy_drop: 0.0, ..QuantPolicy::default() };
        let out = quantize_model(&model, &data, &policy).unwrap();
        assert!(out.gate_met);
        assert_eq!(out.model.weight_format.fraction_bits, policy.min_fraction_bits);
        assert_eq!(out.accuracy, 1.0);
        assert_eq!(out.candidates.len(), 11);
    }

    #[test]
    fn unreachable_gate_returns_best_candidate() {
        // Float model separates on a 2^-9 margin that no candidate can represent.
        let eps = 1.0 / 512.0;
        let model = SvmModel::new(vec![
            LinearClassifier { weights: vec![eps], bias: 0.0 },
            LinearClassifier { weights: vec![0.0], bias: eps / 4.0 },
        ])
        .unwrap();
        let data = Dataset::from_rows("tiny", 2, vec![vec![0.5], vec![0.0]], vec![0, 1]).unwrap();
        assert_eq!(model.accuracy(&data).unwrap(), 1.0);
        let policy =
            QuantPolicy { max_accuracy_drop: 0.0, min_fraction_bits: 2, max_fraction_bits: 4, ..Default::default() };
        let out = quantize_model(&model, &data, &policy).unwrap();
        assert!(!out.gate_met);
        assert!(out.candidates.iter().all(|c| !c.meets_gate));
        assert_eq!(out.accuracy, 0.5);
        assert_eq!(out.model.weight_format.fraction_bits, 2);
    }
}
