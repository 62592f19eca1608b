// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! States, channels, gate parametrisations and scalar metrics.

mod channel;
mod metrics;
mod pauli;
mod state;
mod unitary;

pub use channel::{process_fidelity, LinearMap, QuantumChannel, TraceClass};
pub use metrics::{
    entropy_bits, fidelity, fidelity_matrices, mutual_information_state, negativity, purity,
    trace_distance, trace_distance_matrices, unitarity,
};
pub use pauli::{pauli, pauli_transfer_matrix, Axis, PauliBasisSetting, AXES};
pub use state::DensityMatrix;
pub use unitary::{gates, rotation_axis_angle, UnitaryParams};

/// Hermiticity tolerance (max absolute element deviation).
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Smallest eigenvalue tolerated before a matrix is declared non-positive.
pub const PSD_TOL: f64 = 1e-9;
/// Trace tolerance for states and trace preservation of channels.
pub const TRACE_TOL: f64 = 1e-9;
/// Unitarity tolerance for generated gates.
pub const UNITARY_TOL: f64 = 1e-12;
