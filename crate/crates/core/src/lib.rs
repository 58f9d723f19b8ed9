// SPDX-License-Identifier: Apache-2.0

//! Sequential bespoke SVM classifiers as gate-level circuits.
//!
//! The flow is: [`dataset`] normalization and splitting, one-vs-rest training in
//! [`trainer`], fixed-point conversion in [`quantizer`], netlist generation in
//! [`circuit`], cycle simulation in [`sim`] and costing in [`cost`].
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod census;
pub mod circuit;
pub mod cost;
pub mod dataset;
mod error;
pub mod fixed;
pub mod netlist;
pub mod quantizer;
pub mod rng;
pub mod sim;
pub mod trainer;

pub use census::{gate_census, GateCensus};
pub use circuit::{build_parallel_baseline, build_sequential};
pub use cost::{battery_check, critical_path_ms, estimate, estimate_netlist, CostReport, TechFile};
pub use dataset::{apply_normalizer, fit_normalizer, split, Dataset, NormalizationParams, Sample, SplitSpec};
pub use error::{Error, Result};
pub use fixed::FixedFormat;
pub use netlist::{DesignInfo, DesignKind, GateKind, Netlist};
pub use quantizer::{quantize_model, quantized_scores, QuantOutcome, QuantPolicy, QuantizedSvm};
pub use sim::{equivalence_check, measured_latency_cycles, simulate, EquivalenceReport, SimTrace};
pub use trainer::{train_ovr, Strategy, SvmModel, TrainConfig};
