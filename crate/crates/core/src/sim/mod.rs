// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact system–environment simulation with interleaved system controls,
//! and shot sampling of Pauli measurements.
//!
//! A run with controls `A_0 … A_{k−1}` and intervals `U_1 … U_k` produces
//! `tr_E[U_k A_{k−1} ⋯ U_1 A_0 (ρ_SE)]`: control `j` always precedes
//! interval `j + 1`.

mod model;
mod record;
mod sequence;
mod surrogate;

pub use model::{exchange_zz_hamiltonian, khz_to_rad_per_ns, pauli_string, EnvInit, SEModel};
pub use record::{
    exact_probe_record, exact_record, sample_counts, sample_setting, setting_probabilities,
    simulate_experiment, simulate_probe_experiment, ExperimentRecord, SettingRecord,
};
pub use sequence::{ControlSequence, ControlStep, StepSource};
pub use surrogate::Surrogate;
