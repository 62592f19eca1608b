// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Restricted process tensor tomography for non-Markovian qubit dynamics.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`] and [`quantum`]: complex matrices, states, channels and the
//!   scalar metrics (fidelity, purity, trace distance, negativity, mutual
//!   information, unitarity).
//! - [`sim`]: an exact system–environment density-matrix simulator with
//!   interleaved control operations and binomial shot sampling.
//! - [`tomography`]: state tomography, control bases and their duals,
//!   process-tensor assembly and contraction, held-out evaluation and
//!   bootstrap intervals.
//! - [`memory`]: conditional-mutual-information lower bounds on memory using
//!   depolarizing barriers.
//! - [`markov`]: a composable-channel Markov baseline built from per-gate
//!   process tomography.
//! - [`control`]: decoupling search and non-unitary gate synthesis through a
//!   reconstructed tensor.
//!
//! Conventions used everywhere:
//!
//! - Choi matrices are `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` (input factor first). The
//!   trace-one "matrix form" used by process tensors is that Choi matrix
//!   divided by the input dimension.
//! - Superoperators act on row-major vectorisations, `vec(ρ)[i·d + j] = ρ_ij`.
//! - Joint system–environment states are ordered system ⊗ environment.
//! - Entropies and mutual informations are in bits.

pub mod control;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod memory;
pub mod optimize;
pub mod quantum;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod tomography;

pub use error::{Error, Result};
