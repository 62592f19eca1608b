// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lower bounds on non-Markovian memory from the conditional mutual
//! information between an encoded bit and a decoded bit, with depolarizing
//! barriers contracted into one or both later time steps.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::optimize::{minimize_with_restarts, NelderMeadConfig};
use crate::quantum::{DensityMatrix, UnitaryParams};
use crate::rng;
use crate::sim::{ControlSequence, ControlStep, StepSource};
use crate::stats;
use crate::tomography::{depolarizing_in_span, qst_mle, Dataset, ProcessTensor, SplitPlan};
use crate::{Error, Result};

/// Probability floor applied before logarithms.
pub const PROB_FLOOR: f64 = 1e-12;
pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Encoder, optional free unitary and decoder of one memory probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryProbeConfig {
    /// Slots (1-based after the encoder slot 0) holding a barrier.
    pub barrier_slots: Vec<usize>,
    pub encoder: [UnitaryParams; 2],
    pub encoder_probs: [f64; 2],
    /// Fills the non-barrier slot when only one barrier is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free: Option<UnitaryParams>,
    /// Rotation applied before the computational-basis measurement.
    pub decoder: UnitaryParams,
}

impl MemoryProbeConfig {
    /// Parameter count of the optimisation over this placement.
    pub fn parameter_count(barrier_slots: &[usize]) -> usize {
        if barrier_slots.len() == 1 {
            12
        } else {
            9
        }
    }

    /// Unpacks `[𝓔⁰, 𝓔¹, (V), 𝓓]` Euler angles.
    pub fn from_params(barrier_slots: &[usize], x: &[f64]) -> Self {
        let p = |k: usize| UnitaryParams::from_slice(&x[3 * k..3 * k + 3]);
        let single = barrier_slots.len() == 1;
        Self {
            barrier_slots: barrier_slots.to_vec(),
            encoder: [p(0), p(1)],
            encoder_probs: [0.5, 0.5],
            free: single.then(|| p(2)),
            decoder: if single { p(3) } else { p(2) },
        }
    }

    pub fn to_params(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.encoder.iter().flat_map(|u| u.to_array()).collect();
        if let Some(f) = self.free {
            v.extend(f.to_array());
        }
        v.extend(self.decoder.to_array());
        v
    }

    fn validate(&self, steps: usize) -> Result<()> {
        let sum: f64 = self.encoder_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || self.encoder_probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidArgument(format!("encoder probabilities {:?} must sum to one", self.encoder_probs)));
        }
        if steps < 2 {
            return Err(Error::InvalidArgument("memory probes need at least two time steps".into()));
        }
        if self.barrier_slots.is_empty() || self.barrier_slots.iter().any(|&s| s == 0 || s >= steps) {
            return Err(Error::InvalidArgument(format!("barrier slots {:?} must lie in 1..{steps}", self.barrier_slots)));
        }
        let non_barrier = (1..steps).filter(|s| !self.barrier_slots.contains(s)).count();
        if non_barrier > 0 && self.free.is_none() {
            return Err(Error::InvalidArgument("a free unitary is needed for the non-barrier slot".into()));
        }
        Ok(())
    }

    /// Control sequence for encoder element `i`.
    pub fn sequence(&self, i: usize, steps: usize) -> ControlSequence {
        let (barrier, _) = depolarizing_in_span();
        let mut v = vec![ControlStep::free(self.encoder[i])];
        for s in 1..steps {
            if self.barrier_slots.contains(&s) {
                v.push(barrier.clone());
            } else {
                let f = self.free.unwrap_or_default();
                v.push(ControlStep::unitary(&f.matrix(), StepSource::Free(f)));
            }
        }
        ControlSequence::new(v)
    }
}

/// Mutual information in bits of a joint distribution `p[e][d]`.
pub fn mutual_information(joint: &[[f64; 2]; 2]) -> f64 {
    let pe = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let pd = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut acc = 0.0;
    for e in 0..2 {
        for d in 0..2 {
            let p = joint[e][d].clamp(0.0, 1.0);
            if p == 0.0 {
                continue;
            }
            let num = p.max(PROB_FLOOR);
            let den = (pe[e] * pd[d]).clamp(PROB_FLOOR, 1.0);
            acc += p * (num / den).log2();
        }
    }
    acc.max(0.0)
}

/// Joint distribution of encoder and decoder outcomes from the two
/// conditional output states.
pub fn joint_distribution(states: &[CMat; 2], cfg: &MemoryProbeConfig) -> [[f64; 2]; 2] {
    let dm = cfg.decoder.matrix();
    let mut joint = [[0.0; 2]; 2];
    for (i, rho) in states.iter().enumerate() {
        let rotated = &dm * rho * dm.adjoint();
        joint[i][0] = cfg.encoder_probs[i] * rotated[(0, 0)].re.clamp(0.0, 1.0);
        joint[i][1] = cfg.encoder_probs[i] * rotated[(1, 1)].re.clamp(0.0, 1.0);
    }
    joint
}

/// Conditional mutual information of one probe through the tensor.
pub fn cmi(pt: &ProcessTensor, cfg: &MemoryProbeConfig) -> Result<f64> {
    cmi_with(&|seq| pt.contract(seq), pt.steps(), cfg)
}

/// Same as [`cmi`] with an arbitrary predictor of output states, e.g. the
/// exact simulator.
pub fn cmi_with(predict: &dyn Fn(&ControlSequence) -> Result<CMat>, steps: usize, cfg: &MemoryProbeConfig) -> Result<f64> {
    cfg.validate(steps)?;
    let mut states = [CMat::zeros(2, 2), CMat::zeros(2, 2)];
    for (i, s) in states.iter_mut().enumerate() {
        *s = DensityMatrix::project_physical(&predict(&cfg.sequence(i, steps))?).into_matrix();
    }
    Ok(mutual_information(&joint_distribution(&states, cfg)))
}

/// Optimised bound for one barrier placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryBound {
    pub barrier_slots: Vec<usize>,
    pub cmi_bits: f64,
    pub config: MemoryProbeConfig,
    pub restarts: usize,
    pub iterations: usize,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<(f64, f64)>,
}

impl MemoryBound {
    /// Memory is significant when the lower end of the interval is positive.
    pub fn significant(&self) -> bool {
        self.ci.is_some_and(|(lo, _)| lo > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizeOptions {
    pub restarts: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, tolerance: DEFAULT_TOLERANCE, seed: 0 }
    }
}

/// Nelder–Mead maximisation of the CMI over encoder, free unitary and
/// decoder angles.
pub fn maximize_cmi(pt: &ProcessTensor, barrier_slots: &[usize], opts: &MaximizeOptions) -> Result<MemoryBound> {
    maximize_cmi_with(&|seq| pt.contract(seq), pt.steps(), barrier_slots, opts, &[])
}

pub fn maximize_cmi_with(
    predict: &(dyn Fn(&ControlSequence) -> Result<CMat> + Sync),
    steps: usize,
    barrier_slots: &[usize],
    opts: &MaximizeOptions,
    warm_starts: &[Vec<f64>],
) -> Result<MemoryBound> {
    let dim = MemoryProbeConfig::parameter_count(barrier_slots);
    // reject bad placements before optimising
    MemoryProbeConfig::from_params(barrier_slots, &vec![0.0; dim]).validate(steps)?;
    let mut objective = |x: &[f64]| match cmi_with(predict, steps, &MemoryProbeConfig::from_params(barrier_slots, x)) {
        Ok(v) => -v,
        Err(_) => f64::NAN,
    };
    let cfg = NelderMeadConfig { tolerance: opts.tolerance, max_iterations: 3000, initial_step: 0.6 };
    let summary = minimize_with_restarts(&mut objective, dim, (0.0, TAU), opts.restarts, warm_starts, opts.seed, &cfg)?;
    let config = MemoryProbeConfig::from_params(barrier_slots, &summary.best.x);
    Ok(MemoryBound {
        barrier_slots: barrier_slots.to_vec(),
        cmi_bits: (-summary.best.value).clamp(0.0, 1.0),
        config,
        restarts: summary.restarts,
        iterations: summary.total_iterations,
        evaluations: summary.total_evaluations,
        ci: None,
    })
}

/// The three barrier placements: slot 1, slot 2, both.
pub const PLACEMENTS: [&[usize]; 3] = [&[1], &[2], &[1, 2]];

/// 95% basic bootstrap interval of the optimised bound: each resample
/// redraws the records, rebuilds the tensor and re-optimises (with a warm
/// start at the point optimum). The basic interval `[2θ̂ − q₉₇.₅, 2θ̂ − q₂.₅]`
/// corrects the upward bias a maximum acquires from noise.
pub fn bootstrap_bound(
    ds: &Dataset,
    plan: &SplitPlan,
    bound: &MemoryBound,
    resamples: usize,
    restarts: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("at least two bootstrap resamples are required".into()));
    }
    let warm = vec![bound.config.to_params()];
    let dist = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let train = plan
                .train_ids
                .iter()
                .map(|&id| {
                    Ok(qst_mle(&ds.records[id as usize].resample(&mut g)?)?.into_matrix())
                })
                .collect::<Result<Vec<_>>>()?;
            let pt = ProcessTensor::assemble(plan.slots.clone(), &train)?;
            let opts = MaximizeOptions { restarts, tolerance: DEFAULT_TOLERANCE, seed: rng::derive(seed, &format!("restart-{r}")) };
            Ok(maximize_cmi_with(&|s| pt.contract(s), pt.steps(), &bound.barrier_slots, &opts, &warm)?.cmi_bits)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(stats::basic_interval(bound.cmi_bits, &dist, 0.95))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_distribution_has_zero_information() {
        let j = [[0.5 * 0.3, 0.5 * 0.7], [0.5 * 0.3, 0.5 * 0.7]];
        assert_eq!(mutual_information(&j), 0.0);
    }

    #[test]
    fn perfect_correlation_is_one_bit() {
        let j = [[0.5, 0.0], [0.0, 0.5]];
        assert!((mutual_information(&j) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relabelling_invariance() {
        let j = [[0.31, 0.19], [0.12, 0.38]];
        let swapped_e = [j[1], j[0]];
        let swapped_d = [[j[0][1], j[0][0]], [j[1][1], j[1][0]]];
        let m = mutual_information(&j);
        assert!((mutual_information(&swapped_e) - m).abs() < 1e-15);
        assert!((mutual_information(&swapped_d) - m).abs() < 1e-15);
    }

    #[test]
    fn params_round_trip() {
        let x: Vec<f64> = (0..12).map(|k| k as f64 * 0.1).collect();
        let c = MemoryProbeConfig::from_params(&[1], &x);
        assert_eq!(c.to_params(), x);
        let x9: Vec<f64> = (0..9).map(|k| k as f64 * 0.2).collect();
        let c = MemoryProbeConfig::from_params(&[1, 2], &x9);
        assert!(c.free.is_none());
        assert_eq!(c.to_params(), x9);
    }
}
