// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::preparations;
use super::qst::qst_mle;
use super::tensor::{Predictor, ProcessTensor, SlotBasis};
use crate::linalg::CMat;
use crate::quantum::{fidelity_matrices, DensityMatrix};
use crate::rng;
use crate::sim::{exact_record, simulate_experiment, ControlSequence, ControlStep, ExperimentRecord, SEModel, StepSource};
use crate::stats::{self, BoxStats};
use crate::{Error, Result};

/// Number of preparations.
pub const N_PREP: usize = 4;

/// Identifier of the sequence (preparation `i`, pool unitaries `j`, `k`).
pub fn sequence_id(pool: usize, i: usize, j: usize, k: usize) -> u64 {
    (i * pool * pool + j * pool + k) as u64
}

/// Sequence `[P_i, U_j, U_k]` for an identifier.
pub fn sequence_for_id(pool: &[CMat], id: u64) -> ControlSequence {
    let p = pool.len();
    let id = id as usize;
    let (i, j, k) = (id / (p * p), (id / p) % p, id % p);
    let preps = preparations();
    ControlSequence::new(vec![
        ControlStep::unitary(&preps[i], StepSource::Preparation(i)),
        ControlStep::unitary(&pool[j], StepSource::Basis(j)),
        ControlStep::unitary(&pool[k], StepSource::Basis(k)),
    ])
}

/// All `4 · p²` sequences in identifier order.
pub fn enumerate_sequences(pool: &[CMat]) -> Vec<ControlSequence> {
    let total = N_PREP * pool.len() * pool.len();
    (0..total as u64).map(|id| sequence_for_id(pool, id)).collect()
}

/// Measured records for every sequence built from a pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub pool: Vec<CMat>,
    /// Indexed by sequence identifier.
    pub records: Vec<ExperimentRecord>,
}

impl Dataset {
    /// Simulates every sequence; `shots = None` gives infinite-shot records.
    pub fn simulate(model: &SEModel, pool: &[CMat], shots: Option<u64>, seed: u64) -> Result<Self> {
        let total = (N_PREP * pool.len() * pool.len()) as u64;
        let records = (0..total)
            .into_par_iter()
            .map(|id| {
                let seq = sequence_for_id(pool, id);
                match shots {
                    Some(s) => simulate_experiment(model, &seq, id, s, seed),
                    None => exact_record(model, &seq, id, 1),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pool: pool.to_vec(), records })
    }

    pub fn from_records(pool: &[CMat], mut records: Vec<ExperimentRecord>) -> Result<Self> {
        records.sort_by_key(|r| r.sequence_id);
        let total = N_PREP * pool.len() * pool.len();
        if records.len() != total || records.iter().enumerate().any(|(k, r)| r.sequence_id != k as u64) {
            return Err(Error::MissingData(format!("dataset needs records 0..{total}, got {}", records.len())));
        }
        Ok(Self { pool: pool.to_vec(), records })
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    /// QST estimate of every record.
    pub fn states(&self) -> Result<Vec<CMat>> {
        self.records.par_iter().map(|r| qst_mle(r).map(DensityMatrix::into_matrix)).collect()
    }
}

/// Training and held-out index sets of one split together with the cached
/// predictor.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub n: usize,
    pub order: Vec<usize>,
    pub train_ids: Vec<u64>,
    pub heldout_ids: Vec<u64>,
    pub slots: Vec<SlotBasis>,
    predictor: Predictor,
}

impl SplitPlan {
    /// Basis from the first `n` pool elements in `order`; held-out
    /// sequences use only the remaining ones.
    pub fn new(pool: &[CMat], order: &[usize], n: usize) -> Result<Self> {
        let p = pool.len();
        if order.len() != p {
            return Err(Error::InvalidArgument("order must be a permutation of the pool".into()));
        }
        if n >= p {
            return Err(Error::InvalidArgument(format!("basis size {n} leaves no held-out elements in a pool of {p}")));
        }
        let basis_ops: Vec<CMat> = order[..n].iter().map(|&k| pool[k].clone()).collect();
        let slots = vec![
            SlotBasis::preparation(&preparations())?,
            SlotBasis::unitary(&basis_ops)?,
            SlotBasis::unitary(&basis_ops)?,
        ];
        let mut train_ids = Vec::with_capacity(N_PREP * n * n);
        for i in 0..N_PREP {
            for &a in &order[..n] {
                for &b in &order[..n] {
                    train_ids.push(sequence_id(p, i, a, b));
                }
            }
        }
        let mut heldout_ids = Vec::new();
        for i in 0..N_PREP {
            for &a in &order[n..] {
                for &b in &order[n..] {
                    heldout_ids.push(sequence_id(p, i, a, b));
                }
            }
        }
        let seqs: Vec<ControlSequence> = heldout_ids.iter().map(|&id| sequence_for_id(pool, id)).collect();
        let predictor = Predictor::new(&slots, &seqs)?;
        Ok(Self { n, order: order.to_vec(), train_ids, heldout_ids, slots, predictor })
    }

    /// Held-out fidelities given the state estimate of every identifier.
    pub fn fidelities(&self, state: &dyn Fn(u64) -> CMat) -> Result<Vec<f64>> {
        let train: Vec<CMat> = self.train_ids.iter().map(|&id| state(id)).collect();
        (0..self.heldout_ids.len())
            .map(|k| {
                let pred = self.predictor.predict(k, &train);
                reconstruction_fidelity(&pred, &state(self.heldout_ids[k]))
            })
            .collect()
    }

    /// Identifiers whose data the split uses.
    pub fn used_ids(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.train_ids.iter().chain(&self.heldout_ids).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Reconstruction fidelity of a raw prediction, projected to a
/// physical state first, against a measured state.
pub fn reconstruction_fidelity(pred: &CMat, measured: &CMat) -> Result<f64> {
    let p = DensityMatrix::project_physical(pred);
    fidelity_matrices(p.matrix(), measured)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub n: usize,
    pub heldout_ids: Vec<u64>,
    pub fidelities: Vec<f64>,
    pub summary: BoxStats,
    pub mean_infidelity: f64,
}

impl SplitEvaluation {
    fn new(plan: &SplitPlan, fidelities: Vec<f64>) -> Result<Self> {
        let summary = BoxStats::new(&fidelities)?;
        Ok(Self { n: plan.n, heldout_ids: plan.heldout_ids.clone(), mean_infidelity: 1.0 - summary.mean, fidelities, summary })
    }
}

/// Evaluation on pre-computed states indexed by sequence identifier.
pub fn evaluate_split_states(pool: &[CMat], states: &[CMat], order: &[usize], n: usize) -> Result<SplitEvaluation> {
    let plan = SplitPlan::new(pool, order, n)?;
    let f = plan.fidelities(&|id| states[id as usize].clone())?;
    SplitEvaluation::new(&plan, f)
}

pub fn evaluate_split(ds: &Dataset, order: &[usize], n: usize) -> Result<SplitEvaluation> {
    evaluate_split_states(&ds.pool, &ds.states()?, order, n)
}

/// Process tensor of a split.
pub fn split_tensor(pool: &[CMat], states: &[CMat], order: &[usize], n: usize) -> Result<ProcessTensor> {
    let plan = SplitPlan::new(pool, order, n)?;
    let train: Vec<CMat> = plan.train_ids.iter().map(|&id| states[id as usize].clone()).collect();
    ProcessTensor::assemble(plan.slots, &train)
}

/// Bootstrap distribution of a statistic of the held-out fidelities. Each
/// resample redraws every used record's counts from its own frequencies and
/// repeats tomography, assembly and evaluation. Resample `r` uses the random
/// stream `(seed, r)`.
pub fn bootstrap_statistic(
    ds: &Dataset,
    plan: &SplitPlan,
    resamples: usize,
    seed: u64,
    statistic: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<Vec<f64>> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("at least two bootstrap resamples are required".into()));
    }
    let ids = plan.used_ids();
    let p = ds.records.len();
    (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let mut states: Vec<Option<CMat>> = vec![None; p];
            for &id in &ids {
                let rec = ds.records[id as usize].resample(&mut g)?;
                states[id as usize] = Some(qst_mle(&rec)?.into_matrix());
            }
            let f = plan.fidelities(&|id| states[id as usize].clone().expect("resampled state"))?;
            Ok(statistic(&f))
        })
        .collect()
}

/// 95% bias-corrected percentile interval on the mean held-out infidelity,
/// with the point estimate: `(lower, upper, estimate)`.
pub fn bootstrap_ci(ds: &Dataset, order: &[usize], n: usize, resamples: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let plan = SplitPlan::new(&ds.pool, order, n)?;
    let states = ds.states()?;
    let point = 1.0 - stats::mean(&plan.fidelities(&|id| states[id as usize].clone())?);
    let dist = bootstrap_statistic(ds, &plan, resamples, seed, &|f| 1.0 - stats::mean(f))?;
    let (lo, hi) = stats::bias_corrected_interval(point, &dist, 0.95);
    Ok((lo, hi, point))
}
