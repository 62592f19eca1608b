// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Control through a reconstructed tensor: decoupling-gate search and
//! synthesis of non-unitary single-qubit operations.

mod decoupling;
mod synthesis;

pub use decoupling::{
    apply_periodic_decoupling, decoupling_model, decoupling_objective, decoupling_tensor, optimize_decoupling, xy4_pulses, DecouplingLayout,
    DecouplingResult, Trajectory,
};
pub use synthesis::{
    alpha_from_seed, eta_grid, non_increasing_below, synthesis_loss, synthesis_model, synthesis_tensor, synthesize_gate, synthesize_sweep, NonUnitaryTarget,
    SynthesisResult, SynthesisSweep, default_synthesis_surrogate,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::optimize::NelderMeadConfig;
use crate::quantum::{LinearMap, QuantumChannel};
use crate::sim::{exact_probe_record, exact_record, simulate_experiment, simulate_probe_experiment, ControlSequence, ControlStep, SEModel, StepSource};
use crate::tomography::{channel_from_records, flat_index, preparations, qst_mle, ProcessTensor, SlotBasis, SlotKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlOptions {
    pub restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self { restarts: 20, tolerance: 1e-8, seed: 0 }
    }
}

impl ControlOptions {
    fn nelder_mead(&self) -> NelderMeadConfig {
        NelderMeadConfig { tolerance: self.tolerance, max_iterations: 4000, initial_step: 0.6 }
    }
}

fn basis_step(slot: &SlotBasis, k: usize) -> ControlStep {
    let source = match slot.kind {
        SlotKind::Preparation => StepSource::Preparation(k),
        SlotKind::Unitary => StepSource::Basis(k),
    };
    ControlStep::unitary(&slot.ops[k], source)
}

/// Measures every basis multi-index of `slots` on `model` and assembles the
/// tensor. With `probe` the output is the joint state of system and
/// neighbour. `shots = None` gives exact outputs.
pub fn measure_tensor(model: &SEModel, slots: Vec<SlotBasis>, probe: bool, shots: Option<u64>, seed: u64) -> Result<ProcessTensor> {
    if slots.len() != model.steps() {
        return Err(Error::StepIntervalMismatch { steps: slots.len(), intervals: model.steps() });
    }
    let sizes: Vec<usize> = slots.iter().map(SlotBasis::len).collect();
    let total: usize = sizes.iter().product();
    let states = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut mu = vec![0; sizes.len()];
            for s in (0..sizes.len()).rev() {
                mu[s] = rem % sizes[s];
                rem /= sizes[s];
            }
            debug_assert_eq!(flat_index(&sizes, &mu), flat);
            let seq: ControlSequence = slots.iter().zip(&mu).map(|(slot, &k)| basis_step(slot, k)).collect();
            let id = flat as u64;
            let rec = match (probe, shots) {
                (false, Some(s)) => simulate_experiment(model, &seq, id, s, seed)?,
                (false, None) => exact_record(model, &seq, id, 1)?,
                (true, Some(s)) => simulate_probe_experiment(model, &seq, id, s, seed)?,
                (true, None) => exact_probe_record(model, &seq, id, 1)?,
            };
            Ok(qst_mle(&rec)?.into_matrix())
        })
        .collect::<Result<Vec<CMat>>>()?;
    ProcessTensor::assemble(slots, &states)
}

/// Process tomography of a fixed gate layout: each of the four input
/// preparations is followed by `layout`, one operation per remaining
/// interval of `model`. The estimate is projected onto CPTP maps.
pub fn qpt(model: &SEModel, layout: &[LinearMap], shots: Option<u64>, seed: u64) -> Result<QuantumChannel> {
    if model.steps() != layout.len() + 1 {
        return Err(Error::StepIntervalMismatch { steps: layout.len() + 1, intervals: model.steps() });
    }
    let records = preparations()
        .iter()
        .enumerate()
        .map(|(p, prep)| {
            let mut steps = vec![ControlStep::unitary(prep, StepSource::Preparation(p))];
            steps.extend(layout.iter().map(|op| ControlStep::map(op.clone())));
            let seq = ControlSequence::new(steps);
            match shots {
                Some(s) => simulate_experiment(model, &seq, p as u64, s, seed),
                None => exact_record(model, &seq, p as u64, 1),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    channel_from_records(&records)
}
