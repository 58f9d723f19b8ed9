// SPDX-License-Identifier: Apache-2.0

//! File formats, dataset registry, HDL text and the end-to-end pipeline around
//! [`seqsvm_core`].

pub mod data;
pub mod hdl;
pub mod io;
pub mod pipeline;
pub mod reference;
pub mod report;

pub use seqsvm_core as core;

use std::path::PathBuf;

/// Pipeline stage an error came from; each maps to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Data,
    Training,
    Equivalence,
    Cost,
    Output,
}

impl Stage {
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 2,
            Stage::Data => 3,
            Stage::Training => 4,
            Stage::Equivalence => 5,
            Stage::Cost => 6,
            Stage::Output => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Data => "data",
            Stage::Training => "training",
            Stage::Equivalence => "equivalence",
            Stage::Cost => "cost",
            Stage::Output => "output",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}, row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },
    #[error("hdl line {line}: {msg}")]
    Hdl { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] seqsvm_core::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("{stage} stage failed: {source}")]
    Stage { stage: &'static str, code: i32, source: Box<Error> },
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage: stage.name(), code: stage.exit_code(), source: Box::new(e) },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { code, .. } => *code,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
