// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Composable-channel Markov baseline: every gate and every idle interval is
//! characterised separately by process tomography and predictions multiply
//! the estimated channels out.
//!
//! Gates are instantaneous in the simulator, so they are characterised at
//! zero duration. The system–environment evolution of each distinct interval
//! is characterised as its own idle channel with the environment in its
//! configured initial state. Measurement effects are taken as ideal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::quantum::{DensityMatrix, LinearMap, QuantumChannel};
use crate::rng::{self, Rng};
use crate::sim::{exact_record, simulate_experiment, ControlSequence, ControlStep, ExperimentRecord, SEModel, StepSource};
use crate::stats::{self, BoxStats};
use crate::tomography::{
    bootstrap_statistic, channel_from_records, preparations, qpt_records, qst_mle, reconstruction_fidelity, resample_records, Dataset,
    SplitPlan, N_PREP,
};
use crate::{Error, Result};

/// Raw tomography data behind a Markov model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovData {
    /// State tomography of the system before any operation.
    pub initial: ExperimentRecord,
    /// Four process-tomography records per preparation gate.
    pub preparations: Vec<Vec<ExperimentRecord>>,
    /// Four process-tomography records per pool unitary.
    pub gates: Vec<Vec<ExperimentRecord>>,
    /// Four process-tomography records per distinct interval.
    pub idles: Vec<Vec<ExperimentRecord>>,
    /// Idle channel index of each time step.
    pub idle_index: Vec<usize>,
}

impl MarkovData {
    fn resample(&self, g: &mut Rng) -> Result<Self> {
        let many = |v: &Vec<Vec<ExperimentRecord>>, g: &mut Rng| v.iter().map(|r| resample_records(r, g)).collect::<Result<Vec<_>>>();
        Ok(Self {
            initial: self.initial.resample(g)?,
            preparations: many(&self.preparations, g)?,
            gates: many(&self.gates, g)?,
            idles: many(&self.idles, g)?,
            idle_index: self.idle_index.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    pub initial: DensityMatrix,
    pub preparations: Vec<QuantumChannel>,
    pub gates: Vec<QuantumChannel>,
    pub idles: Vec<QuantumChannel>,
    pub idle_index: Vec<usize>,
    pub data: MarkovData,
}

fn distinct_intervals(model: &SEModel) -> (Vec<CMat>, Vec<usize>) {
    let mut distinct: Vec<CMat> = Vec::new();
    let mut index = Vec::with_capacity(model.steps());
    for u in &model.intervals {
        match distinct.iter().position(|d| d == u) {
            Some(k) => index.push(k),
            None => {
                index.push(distinct.len());
                distinct.push(u.clone());
            }
        }
    }
    (distinct, index)
}

impl MarkovModel {
    pub fn from_data(data: MarkovData) -> Result<Self> {
        let fit = |v: &Vec<Vec<ExperimentRecord>>| v.iter().map(|r| channel_from_records(r)).collect::<Result<Vec<_>>>();
        Ok(Self {
            initial: qst_mle(&data.initial)?,
            preparations: fit(&data.preparations)?,
            gates: fit(&data.gates)?,
            idles: fit(&data.idles)?,
            idle_index: data.idle_index.clone(),
            data,
        })
    }

    fn gate_for(&self, step: &ControlStep) -> Result<&QuantumChannel> {
        let missing = || Error::UnknownGate(format!("{:?}", step.source));
        match step.source {
            StepSource::Preparation(i) => self.preparations.get(i).ok_or_else(missing),
            StepSource::Basis(j) => self.gates.get(j).ok_or_else(missing),
            _ => Err(missing()),
        }
    }

    /// Initial state, then gate and idle channel of each step in order.
    pub fn predict(&self, seq: &ControlSequence) -> Result<DensityMatrix> {
        if seq.len() != self.idle_index.len() {
            return Err(Error::StepIntervalMismatch { steps: seq.len(), intervals: self.idle_index.len() });
        }
        let mut rho = self.initial.matrix().clone();
        for (step, &k) in seq.steps.iter().zip(&self.idle_index) {
            rho = self.gate_for(step)?.apply_matrix(&rho);
            rho = self.idles[k].apply_matrix(&rho);
        }
        Ok(DensityMatrix::project_physical(&rho))
    }

    /// Resampled model: every tomography record redrawn from its own
    /// frequencies.
    pub fn resampled(&self, g: &mut Rng) -> Result<Self> {
        Self::from_data(self.data.resample(g)?)
    }
}

/// Process tomography of every preparation, every pool unitary and every
/// distinct interval of `model`. `shots = None` gives exact estimates.
pub fn characterize_gates(model: &SEModel, pool: &[CMat], shots: Option<u64>, seed: u64) -> Result<MarkovModel> {
    let instant = model.with_intervals(vec![linalg::identity(model.joint_dim())])?;
    let initial = {
        let seq = ControlSequence::new(vec![ControlStep::map(LinearMap::identity(2))]);
        match shots {
            Some(s) => simulate_experiment(&instant, &seq, 0, s, seed)?,
            None => exact_record(&instant, &seq, 0, 1)?,
        }
    };
    let preps = preparations();
    let stream = |block: u64, k: usize| 4 * (1 + block * 1000 + k as u64);
    let preparations = preps
        .par_iter()
        .enumerate()
        .map(|(k, u)| qpt_records(&instant, &LinearMap::from_unitary(u), shots, seed, stream(0, k)))
        .collect::<Result<Vec<_>>>()?;
    let gates = pool
        .par_iter()
        .enumerate()
        .map(|(k, u)| qpt_records(&instant, &LinearMap::from_unitary(u), shots, seed, stream(1, k)))
        .collect::<Result<Vec<_>>>()?;
    let (distinct, idle_index) = distinct_intervals(model);
    let idles = distinct
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let m = model.with_intervals(vec![u.clone()])?;
            qpt_records(&m, &LinearMap::identity(2), shots, seed, stream(2, k))
        })
        .collect::<Result<Vec<_>>>()?;
    MarkovModel::from_data(MarkovData { initial, preparations, gates, idles, idle_index })
}

/// Shots per measurement setting giving the gate characterisation the same
/// total budget as a full tensor dataset over a pool of `pool_size` with
/// `shots` per setting.
pub fn equal_budget_shots(model: &SEModel, pool_size: usize, shots: u64) -> u64 {
    let tensor_settings = (N_PREP * pool_size * pool_size * 3) as f64;
    let channels = N_PREP + pool_size + distinct_intervals(model).0.len();
    let markov_settings = (3 * (1 + N_PREP * channels)) as f64;
    (tensor_settings * shots as f64 / markov_settings).round().max(1.0) as u64
}

/// Paired comparison of tensor and Markov fidelities on the same sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tensor: BoxStats,
    pub markov: BoxStats,
    /// Per-sequence `tensor − markov`.
    pub deltas: Vec<f64>,
    pub delta: BoxStats,
}

pub fn compare(tensor_fidelities: &[f64], markov_fidelities: &[f64]) -> Result<Comparison> {
    if tensor_fidelities.len() != markov_fidelities.len() {
        return Err(Error::DimensionMismatch { expected: tensor_fidelities.len(), got: markov_fidelities.len() });
    }
    let deltas: Vec<f64> = tensor_fidelities.iter().zip(markov_fidelities).map(|(a, b)| a - b).collect();
    Ok(Comparison {
        tensor: BoxStats::new(tensor_fidelities)?,
        markov: BoxStats::new(markov_fidelities)?,
        delta: BoxStats::new(&deltas)?,
        deltas,
    })
}

/// Markov fidelities on held-out sequences against measured states.
pub fn markov_fidelities(mm: &MarkovModel, pool: &[CMat], ids: &[u64], measured: &dyn Fn(u64) -> CMat) -> Result<Vec<f64>> {
    ids.iter()
        .map(|&id| {
            let seq = crate::tomography::sequence_for_id(pool, id);
            let pred = mm.predict(&seq)?;
            reconstruction_fidelity(pred.matrix(), &measured(id))
        })
        .collect()
}

/// Bootstrap distribution of the median Markov fidelity: both the Markov
/// characterisation data and the measured held-out records are redrawn.
pub fn bootstrap_markov_median(
    mm: &MarkovModel,
    pool: &[CMat],
    heldout: &[ExperimentRecord],
    resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("at least two bootstrap resamples are required".into()));
    }
    (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let m = mm.resampled(&mut g)?;
            let fids = heldout
                .iter()
                .map(|rec| {
                    let measured = qst_mle(&rec.resample(&mut g)?)?;
                    let pred = m.predict(&crate::tomography::sequence_for_id(pool, rec.sequence_id))?;
                    reconstruction_fidelity(pred.matrix(), measured.matrix())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(stats::median(&fids))
        })
        .collect()
}

/// Paired comparison on a split's held-out set with 95% bias-corrected
/// bootstrap intervals on both medians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovGap {
    pub comparison: Comparison,
    pub heldout_ids: Vec<u64>,
    pub tensor_median_ci: (f64, f64),
    pub markov_median_ci: (f64, f64),
}

impl MarkovGap {
    /// Tensor median minus Markov median.
    pub fn median_gap(&self) -> f64 {
        self.comparison.tensor.median - self.comparison.markov.median
    }

    pub fn intervals_overlap(&self) -> bool {
        stats::intervals_overlap(self.tensor_median_ci, self.markov_median_ci)
    }
}

pub fn markov_gap(ds: &Dataset, plan: &SplitPlan, mm: &MarkovModel, resamples: usize, seed: u64) -> Result<MarkovGap> {
    let states = ds.states()?;
    let tensor = plan.fidelities(&|id| states[id as usize].clone())?;
    let markov = markov_fidelities(mm, &ds.pool, &plan.heldout_ids, &|id| states[id as usize].clone())?;
    let comparison = compare(&tensor, &markov)?;
    let td = bootstrap_statistic(ds, plan, resamples, rng::derive(seed, "tensor-median"), &|f| stats::median(f))?;
    let heldout: Vec<ExperimentRecord> = plan.heldout_ids.iter().map(|&id| ds.records[id as usize].clone()).collect();
    let md = bootstrap_markov_median(mm, &ds.pool, &heldout, resamples, rng::derive(seed, "markov-median"))?;
    Ok(MarkovGap {
        tensor_median_ci: stats::bias_corrected_interval(comparison.tensor.median, &td, 0.95),
        markov_median_ci: stats::bias_corrected_interval(comparison.markov.median, &md, 0.95),
        heldout_ids: plan.heldout_ids.clone(),
        comparison,
    })
}
