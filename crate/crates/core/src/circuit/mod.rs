// SPDX-License-Identifier: Apache-2.0

//! Netlist generators.

pub mod arith;
pub mod parallel;
pub mod sequential;
pub mod storage;

pub use parallel::build_parallel_baseline;
pub use sequential::{build_sequential, counter_width, design_info};
pub use storage::{fold_mux_constants, naive_gate_count, naive_mux_tree, MuxDag, MuxNode, StorageSpec};
