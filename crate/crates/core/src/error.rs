// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace {0:.12} violates the normalisation constraint")]
    BadTrace(f64),

    #[error("map is not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("{steps} control steps but {intervals} intervals")]
    StepIntervalMismatch { steps: usize, intervals: usize },

    #[error("{got} slots supplied to a tensor with {expected} slots")]
    SlotMismatch { expected: usize, got: usize },

    #[error("basis spans rank {rank}, need at least {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("missing measurement for {0}")]
    MissingData(String),

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("environment is not a probe-able neighbour qubit")]
    NotProbeable,

    #[error("optimizer produced no feasible evaluation")]
    OptimizerFailed,

    #[error("unknown gate {0}")]
    UnknownGate(String),
}
