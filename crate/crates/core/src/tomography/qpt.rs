// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use super::basis::{preparation_states, preparations};
use super::qst::linear_inversion;
use crate::linalg::{self, CMat};
use crate::quantum::{LinearMap, QuantumChannel, TraceClass};
use crate::rng::Rng;
use crate::sim::{exact_record, simulate_experiment, ControlSequence, ControlStep, ExperimentRecord, SEModel, StepSource};
use crate::{Error, Result};

/// Tolerance of the CPTP projection.
pub const CPTP_TOL: f64 = 1e-10;

/// Nearest CPTP map in Frobenius distance of the Choi matrix, by Dykstra
/// alternating projections between the positive cone and the affine trace
/// preserving set. Already physical input is returned unchanged.
pub fn project_cptp(map: &LinearMap) -> Result<QuantumChannel> {
    let (din, dout) = (map.dim_in, map.dim_out);
    let id_in = linalg::identity(din);
    let id_out = linalg::identity(dout);
    let tp = |c: &CMat| -> CMat {
        let t = linalg::partial_trace(c, &[din, dout], &[0]);
        c - linalg::kron(&(t - &id_in), &id_out).unscale(dout as f64)
    };
    let cp = |c: &CMat| -> CMat {
        linalg::hermitian_fn(c, |l| linalg::r(l.max(0.0)))
    };
    let mut x = linalg::hermitian_part(&map.choi);
    let is_physical = |c: &CMat| {
        let m = LinearMap { dim_in: din, dim_out: dout, choi: c.clone() };
        m.tp_error() <= CPTP_TOL && m.min_choi_eigenvalue() >= -CPTP_TOL
    };
    if !is_physical(&x) {
        let n = x.nrows();
        let mut p = CMat::zeros(n, n);
        let mut q = CMat::zeros(n, n);
        for _ in 0..20_000 {
            let y = cp(&(&x + &p));
            p = &x + &p - &y;
            let x_new = tp(&(&y + &q));
            q = &y + &q - &x_new;
            let change = linalg::max_abs_diff(&x_new, &x);
            x = x_new;
            if change < 1e-13 && is_physical(&x) {
                break;
            }
        }
    }
    let out = LinearMap { dim_in: din, dim_out: dout, choi: x };
    QuantumChannel::from_map(out, TraceClass::Preserving)
}

/// Linear process tomography from known input states and estimated outputs
/// (`S · R = Σ`), without projection.
pub fn channel_from_io(inputs: &[CMat], outputs: &[CMat]) -> Result<LinearMap> {
    let din = inputs[0].nrows();
    let dout = outputs[0].nrows();
    if inputs.len() != outputs.len() || inputs.len() < din * din {
        return Err(Error::MissingData(format!("{} input/output pairs for a {din}-dimensional input", inputs.len())));
    }
    let vec = |m: &CMat| -> Vec<linalg::C64> { (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect() };
    let r = CMat::from_fn(din * din, inputs.len(), |row, col| vec(&inputs[col])[row]);
    let s_out = CMat::from_fn(dout * dout, outputs.len(), |row, col| vec(&outputs[col])[row]);
    let (rinv, rank) = linalg::pinv(&r, 1e-12);
    if rank < din * din {
        return Err(Error::RankDeficient { rank, required: din * din });
    }
    LinearMap::from_superop(din, dout, &(s_out * rinv))
}

/// Input states of single-qubit process tomography.
pub fn qpt_inputs() -> Vec<CMat> {
    preparation_states()
}

/// Records of single-qubit process tomography of `op` followed by the
/// model's (single) interval: one record per input preparation, random
/// stream `(seed, stream_base + p)`. `shots = None` gives exact records.
pub fn qpt_records(model: &SEModel, op: &LinearMap, shots: Option<u64>, seed: u64, stream_base: u64) -> Result<Vec<ExperimentRecord>> {
    if model.steps() != 1 {
        return Err(Error::StepIntervalMismatch { steps: 1, intervals: model.steps() });
    }
    preparations()
        .iter()
        .enumerate()
        .map(|(p, prep)| {
            let step = ControlStep { op: LinearMap::from_unitary(prep).then(op)?, source: StepSource::Other };
            let seq = ControlSequence::new(vec![step]);
            let id = stream_base + p as u64;
            match shots {
                Some(s) => simulate_experiment(model, &seq, id, s, seed),
                None => exact_record(model, &seq, id, 1),
            }
        })
        .collect()
}

/// CPTP estimate from process-tomography records.
pub fn channel_from_records(records: &[ExperimentRecord]) -> Result<QuantumChannel> {
    let outputs = records.iter().map(linear_inversion).collect::<Result<Vec<_>>>()?;
    project_cptp(&channel_from_io(&qpt_inputs(), &outputs)?)
}

/// Resamples process-tomography records.
pub fn resample_records(records: &[ExperimentRecord], rng: &mut Rng) -> Result<Vec<ExperimentRecord>> {
    records.iter().map(|r| r.resample(rng)).collect()
}
