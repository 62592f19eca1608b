// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Predictions for preparations outside the preparation basis, compared
//! with the usual held-out sequences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::haar_unitary;
use super::dataset::{reconstruction_fidelity, Dataset, SplitPlan};
use super::qst::qst_mle;
use super::tensor::Predictor;
use crate::linalg::CMat;
use crate::rng;
use crate::sim::{exact_record, simulate_experiment, ControlSequence, ControlStep, ExperimentRecord, SEModel, StepSource};
use crate::stats;
use crate::{Error, Result};

/// Four Haar-random preparation gates drawn from `seed`.
pub fn held_out_preparations(seed: u64) -> Vec<CMat> {
    let mut g = rng::stream(rng::derive(seed, "held-out-preparations"), 0);
    (0..4).map(|_| haar_unitary(2, &mut g)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparationCheck {
    pub n: usize,
    pub in_basis_fidelities: Vec<f64>,
    pub out_of_basis_fidelities: Vec<f64>,
    /// 95% bias-corrected percentile intervals of the mean fidelity.
    pub in_basis_ci: (f64, f64),
    pub out_of_basis_ci: (f64, f64),
}

impl PreparationCheck {
    pub fn overlap(&self) -> bool {
        stats::intervals_overlap(self.in_basis_ci, self.out_of_basis_ci)
    }
}

fn out_of_basis_sequences(pool: &[CMat], order: &[usize], n: usize, preps: &[CMat]) -> Vec<ControlSequence> {
    let mut seqs = Vec::new();
    for p in preps {
        for &a in &order[n..] {
            for &b in &order[n..] {
                seqs.push(ControlSequence::new(vec![
                    ControlStep::unitary(p, StepSource::Other),
                    ControlStep::unitary(&pool[a], StepSource::Basis(a)),
                    ControlStep::unitary(&pool[b], StepSource::Basis(b)),
                ]));
            }
        }
    }
    seqs
}

/// Simulates the out-of-basis sequences (identifiers continue after the
/// dataset's) and compares both groups with bootstrap intervals.
#[allow(clippy::too_many_arguments)]
pub fn preparation_check(
    model: &SEModel,
    ds: &Dataset,
    order: &[usize],
    n: usize,
    preps: &[CMat],
    shots: Option<u64>,
    seed: u64,
    resamples: usize,
) -> Result<PreparationCheck> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("at least two bootstrap resamples are required".into()));
    }
    let plan = SplitPlan::new(&ds.pool, order, n)?;
    let seqs = out_of_basis_sequences(&ds.pool, order, n, preps);
    let base = ds.records.len() as u64;
    let extra: Vec<ExperimentRecord> = seqs
        .par_iter()
        .enumerate()
        .map(|(k, seq)| match shots {
            Some(s) => simulate_experiment(model, seq, base + k as u64, s, seed),
            None => exact_record(model, seq, base + k as u64, 1),
        })
        .collect::<Result<_>>()?;
    let predictor = Predictor::new(&plan.slots, &seqs)?;

    let evaluate = |state: &dyn Fn(u64) -> CMat, extra_states: &[CMat]| -> Result<(Vec<f64>, Vec<f64>)> {
        let inside = plan.fidelities(state)?;
        let train: Vec<CMat> = plan.train_ids.iter().map(|&id| state(id)).collect();
        let outside = extra_states
            .iter()
            .enumerate()
            .map(|(k, m)| reconstruction_fidelity(&predictor.predict(k, &train), m))
            .collect::<Result<Vec<_>>>()?;
        Ok((inside, outside))
    };

    let states = ds.states()?;
    let extra_states = extra.iter().map(|r| Ok(qst_mle(r)?.into_matrix())).collect::<Result<Vec<_>>>()?;
    let (inside, outside) = evaluate(&|id| states[id as usize].clone(), &extra_states)?;

    let ids = plan.used_ids();
    let dist = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(rng::derive(seed, "preparation-check"), r);
            let mut resampled: Vec<Option<CMat>> = vec![None; ds.records.len()];
            for &id in &ids {
                resampled[id as usize] = Some(qst_mle(&ds.records[id as usize].resample(&mut g)?)?.into_matrix());
            }
            let ex = extra.iter().map(|rec| Ok(qst_mle(&rec.resample(&mut g)?)?.into_matrix())).collect::<Result<Vec<_>>>()?;
            let (a, b) = evaluate(&|id| resampled[id as usize].clone().expect("resampled state"), &ex)?;
            Ok((stats::mean(&a), stats::mean(&b)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (da, db): (Vec<f64>, Vec<f64>) = dist.into_iter().unzip();
    Ok(PreparationCheck {
        n,
        in_basis_ci: stats::bias_corrected_interval(stats::mean(&inside), &da, 0.95),
        out_of_basis_ci: stats::bias_corrected_interval(stats::mean(&outside), &db, 0.95),
        in_basis_fidelities: inside,
        out_of_basis_fidelities: outside,
    })
}
