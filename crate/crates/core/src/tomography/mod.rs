// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! From measured counts to a reconstructed restricted process tensor and its
//! predictions.

mod barrier;
mod basis;
mod dataset;
mod duals;
mod prep_check;
mod qpt;
mod qst;
mod tensor;

pub use barrier::{depolarizing_in_span, SpanDecomposition};
pub use basis::{
    generate_haar_basis, haar_unitary, mean_overlaps, order_by_overlap, overlap_order,
    preparation_states, preparations, ControlBasis,
};
pub use dataset::{
    bootstrap_ci, bootstrap_statistic, enumerate_sequences, evaluate_split, evaluate_split_states,
    reconstruction_fidelity, sequence_for_id, sequence_id, split_tensor, Dataset, SplitEvaluation,
    SplitPlan, N_PREP,
};
pub use duals::{build_duals, build_duals_in_frame, preparation_duals, DualMode, DualSet, Frame};
pub use qpt::{
    channel_from_io, channel_from_records, project_cptp, qpt_inputs, qpt_records, resample_records,
    CPTP_TOL,
};
pub use prep_check::{held_out_preparations, preparation_check, PreparationCheck};
pub use qst::{linear_inversion, pauli_expectation, qst_mle};
pub use tensor::{combine_states, flat_index, Predictor, ProcessTensor, Provenance, SlotBasis, SlotKind, SPAN_TOL};

/// Relative singular-value cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Size of a minimal complete restricted basis for a qubit, `d⁴ − 2d² + 2`.
pub const MIN_BASIS: usize = 10;
/// Pool of random unitaries the basis is drawn from.
pub const POOL_SIZE: usize = 28;
