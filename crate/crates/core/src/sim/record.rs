// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::model::SEModel;
use super::sequence::ControlSequence;
use crate::linalg::{self, CMat};
use crate::quantum::{Axis, DensityMatrix, PauliBasisSetting, AXES};
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Counts for one measurement setting. `axes[q]` is the Pauli axis measured
/// on qubit `q`; `counts[b]` is the number of shots with outcome bits `b`,
/// the first qubit being the most significant bit and bit value 0 the +1
/// eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingRecord {
    pub axes: Vec<Axis>,
    pub counts: Vec<u64>,
    /// Exact outcome probabilities for records standing in for the
    /// infinite-shot limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl SettingRecord {
    /// Outcome frequencies, or the exact probabilities when present.
    pub fn frequencies(&self) -> Vec<f64> {
        if let Some(p) = &self.probabilities {
            return p.clone();
        }
        let total: u64 = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

/// Measured data for one control sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub sequence_id: u64,
    pub shots: u64,
    pub seed: u64,
    pub settings: Vec<SettingRecord>,
}

impl ExperimentRecord {
    pub fn is_exact(&self) -> bool {
        self.settings.iter().all(|s| s.probabilities.is_some())
    }

    pub fn qubits(&self) -> usize {
        self.settings.first().map_or(0, |s| s.axes.len())
    }

    /// Checks that every setting's counts sum to the shot number.
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::ZeroShots);
        }
        for s in &self.settings {
            let total: u64 = s.counts.iter().sum();
            if total != self.shots || s.counts.len() != 1 << s.axes.len() {
                return Err(Error::InvalidArgument(format!(
                    "record {} setting {:?}: counts {:?} do not match {} shots",
                    self.sequence_id, s.axes, s.counts, self.shots
                )));
            }
        }
        Ok(())
    }

    /// Redraws every setting's counts from its own empirical frequencies.
    /// Exact records are returned unchanged.
    pub fn resample(&self, rng: &mut Rng) -> Result<Self> {
        let mut out = self.clone();
        for s in &mut out.settings {
            if s.probabilities.is_some() {
                continue;
            }
            let p = s.frequencies();
            s.counts = multinomial(self.shots, &p, rng)?;
        }
        Ok(out)
    }
}

/// All `3^q` Pauli settings on `q` qubits in lexicographic order.
pub fn all_settings(qubits: usize) -> Vec<Vec<Axis>> {
    let mut out = vec![vec![]];
    for _ in 0..qubits {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                AXES.iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

/// Outcome probabilities of measuring `axes` on the qubits of `rho`.
pub fn setting_probabilities(rho: &CMat, axes: &[Axis]) -> Vec<f64> {
    let q = axes.len();
    assert_eq!(rho.nrows(), 1 << q, "setting does not match state dimension");
    let settings: Vec<PauliBasisSetting> = axes.iter().map(|&a| PauliBasisSetting::new(a)).collect();
    let mut probs = Vec::with_capacity(1 << q);
    for b in 0..(1usize << q) {
        let proj = linalg::kron_all((0..q).map(|k| {
            let bit = (b >> (q - 1 - k)) & 1;
            if bit == 0 {
                settings[k].plus.matrix()
            } else {
                settings[k].minus.matrix()
            }
        }));
        probs.push(linalg::trace_prod(&proj, rho).re.clamp(0.0, 1.0));
    }
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    probs
}

fn multinomial(shots: u64, probs: &[f64], rng: &mut Rng) -> Result<Vec<u64>> {
    let mut left = shots;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            out.push(left);
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q)
            .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
            .sample(rng);
        out.push(draw);
        left -= draw;
        mass -= p;
    }
    Ok(out)
}

/// Binomial draw of `(n₊, n₋)` for a single-qubit Pauli measurement.
pub fn sample_counts(state: &DensityMatrix, setting: &PauliBasisSetting, shots: u64, rng: &mut Rng) -> Result<(u64, u64)> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: state.dim() });
    }
    let p = setting.prob_plus(state.matrix());
    let plus = Binomial::new(shots, p)
        .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
        .sample(rng);
    Ok((plus, shots - plus))
}

/// Samples one multi-qubit setting.
pub fn sample_setting(rho: &CMat, axes: &[Axis], shots: u64, rng: &mut Rng) -> Result<SettingRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let p = setting_probabilities(rho, axes);
    Ok(SettingRecord { axes: axes.to_vec(), counts: multinomial(shots, &p, rng)?, probabilities: None })
}

fn sampled_record(rho: &CMat, qubits: usize, sequence_id: u64, shots: u64, seed: u64) -> Result<ExperimentRecord> {
    let mut g = rng::stream(seed, sequence_id);
    let settings = all_settings(qubits)
        .iter()
        .map(|axes| sample_setting(rho, axes, shots, &mut g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRecord { sequence_id, shots, seed, settings })
}

fn exact_from_state(rho: &CMat, qubits: usize, sequence_id: u64, shots: u64) -> ExperimentRecord {
    let settings = all_settings(qubits)
        .into_iter()
        .map(|axes| {
            let p = setting_probabilities(rho, &axes);
            let mut counts: Vec<u64> = p.iter().map(|x| (x * shots as f64).round() as u64).collect();
            // keep the shot total exact after rounding
            let total: u64 = counts.iter().sum();
            let imax = (0..counts.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
            counts[imax] = (counts[imax] + shots).saturating_sub(total);
            SettingRecord { axes, counts, probabilities: Some(p) }
        })
        .collect();
    ExperimentRecord { sequence_id, shots, seed: 0, settings }
}

/// Runs the sequence and samples X, Y and Z measurements on the system.
/// The random stream is `(seed, sequence_id)`.
pub fn simulate_experiment(model: &SEModel, seq: &ControlSequence, sequence_id: u64, shots: u64, seed: u64) -> Result<ExperimentRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let rho = model.run_sequence(seq)?;
    sampled_record(rho.matrix(), 1, sequence_id, shots, seed)
}

/// Infinite-shot record carrying the exact probabilities.
pub fn exact_record(model: &SEModel, seq: &ControlSequence, sequence_id: u64, shots: u64) -> Result<ExperimentRecord> {
    let rho = model.run_sequence(seq)?;
    Ok(exact_from_state(rho.matrix(), 1, sequence_id, shots.max(1)))
}

/// Two-qubit Pauli tomography data (nine settings) of the joint state of
/// system and neighbour.
pub fn simulate_probe_experiment(model: &SEModel, seq: &ControlSequence, sequence_id: u64, shots: u64, seed: u64) -> Result<ExperimentRecord> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let rho = model.two_qubit_probe(seq)?;
    sampled_record(rho.matrix(), 2, sequence_id, shots, seed)
}

pub fn exact_probe_record(model: &SEModel, seq: &ControlSequence, sequence_id: u64, shots: u64) -> Result<ExperimentRecord> {
    let rho = model.two_qubit_probe(seq)?;
    Ok(exact_from_state(rho.matrix(), 2, sequence_id, shots.max(1)))
}
