// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{measure_tensor, qpt, ControlOptions};
use crate::linalg::CMat;
use crate::optimize::minimize_with_restarts;
use crate::quantum::{gates, process_fidelity, trace_distance_matrices, unitarity, LinearMap, QuantumChannel, UnitaryParams};
use crate::rng;
use crate::sim::{ControlSequence, ControlStep, EnvInit, SEModel, StepSource, Surrogate};
use crate::tomography::{preparation_states, preparations, ProcessTensor, SlotBasis};
use crate::{Error, Result};

/// `𝒩(α, η)`: Kraus operators `√η E(α)` and `√(1−η) Y E(α)` with
/// `E(α) = R_X(α) R_Y(α) R_Z(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonUnitaryTarget {
    pub alpha: f64,
    pub eta: f64,
}

impl NonUnitaryTarget {
    pub fn new(alpha: f64, eta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&eta) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("target needs finite α and η in [0, 0.5], got α={alpha}, η={eta}")));
        }
        Ok(Self { alpha, eta })
    }

    pub fn e(&self) -> CMat {
        gates::rx(self.alpha) * gates::ry(self.alpha) * gates::rz(self.alpha)
    }

    pub fn channel(&self) -> Result<QuantumChannel> {
        let e = self.e();
        QuantumChannel::from_kraus(&[e.scale(self.eta.sqrt()), (gates::y() * &e).scale((1.0 - self.eta).sqrt())])
    }

    pub fn unitarity(&self) -> Result<f64> {
        unitarity(&self.channel()?)
    }
}

/// `α` drawn uniformly from `[0, 2π)` by the experiment seed.
pub fn alpha_from_seed(seed: u64) -> f64 {
    rng::stream(rng::derive(seed, "synthesis-alpha"), 0).random_range(0.0..TAU)
}

/// `n` equally spaced values of `η` in `[0, 0.5]`.
pub fn eta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| 0.5 * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Preparation, idle, gate, idle: two intervals of `idle_ns` each.
pub fn synthesis_model(surrogate: &Surrogate, idle_ns: f64) -> Result<SEModel> {
    surrogate.model_with_durations(&[idle_ns, idle_ns])
}

/// Two-slot tensor (preparation, gate) measured on `model`.
pub fn synthesis_tensor(model: &SEModel, basis: &[CMat], shots: Option<u64>, seed: u64) -> Result<ProcessTensor> {
    let slots = vec![SlotBasis::preparation(&preparations())?, SlotBasis::unitary(basis)?];
    measure_tensor(model, slots, false, shots, seed)
}

fn prep_sequence(p: usize, gate: &CMat) -> ControlSequence {
    ControlSequence::new(vec![
        ControlStep::unitary(&preparations()[p], StepSource::Preparation(p)),
        ControlStep::map(LinearMap::from_unitary(gate)),
    ])
}

/// `½ Σ_j ‖τ_j − 𝒩(ρ_j)‖₁` over the four preparation states.
pub fn synthesis_loss(pt: &ProcessTensor, gate: &CMat, targets: &[CMat]) -> Result<f64> {
    if pt.steps() != 2 || targets.len() != 4 {
        return Err(Error::InvalidArgument("synthesis needs a two-slot tensor and four target outputs".into()));
    }
    let mut loss = 0.0;
    for (p, target) in targets.iter().enumerate() {
        loss += trace_distance_matrices(&pt.contract(&prep_sequence(p, gate))?, target)?;
    }
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub target: NonUnitaryTarget,
    pub target_unitarity: f64,
    pub gate: UnitaryParams,
    pub loss: f64,
    pub realized: QuantumChannel,
    pub realized_unitarity: f64,
    pub process_fidelity: f64,
}

/// Gate minimising the synthesis loss, followed by process tomography of
/// the realised operation on `model` (`shots = None` for exact tomography).
pub fn synthesize_gate(
    pt: &ProcessTensor,
    model: &SEModel,
    target: &NonUnitaryTarget,
    opts: &ControlOptions,
    warm_starts: &[Vec<f64>],
    qpt_shots: Option<u64>,
) -> Result<SynthesisResult> {
    let channel = target.channel()?;
    let targets: Vec<CMat> = preparation_states().iter().map(|rho| channel.apply_matrix(rho)).collect();
    let mut objective = |x: &[f64]| synthesis_loss(pt, &UnitaryParams::from_slice(x).matrix(), &targets).unwrap_or(f64::NAN);
    let summary = minimize_with_restarts(&mut objective, 3, (0.0, TAU), opts.restarts, warm_starts, opts.seed, &opts.nelder_mead())?;
    let gate = UnitaryParams::from_slice(&summary.best.x);
    let realized = qpt(model, &[LinearMap::from_unitary(&gate.matrix())], qpt_shots, opts.seed)?;
    Ok(SynthesisResult {
        target: *target,
        target_unitarity: unitarity(&channel)?,
        gate,
        loss: summary.best.value,
        realized_unitarity: unitarity(&realized)?,
        process_fidelity: process_fidelity(&realized, &channel)?,
        realized,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSweep {
    pub alpha: f64,
    pub points: Vec<SynthesisResult>,
    /// Lowest unitarity among the realised operations.
    pub achievable_unitarity: f64,
}

impl SynthesisSweep {
    pub fn peak_fidelity(&self) -> f64 {
        self.points.iter().map(|p| p.process_fidelity).fold(0.0, f64::max)
    }
}

/// Synthesis over a grid of `η` at fixed `α`. Each point is warm-started
/// from the previous optimum.
pub fn synthesize_sweep(pt: &ProcessTensor, model: &SEModel, alpha: f64, etas: &[f64], opts: &ControlOptions, qpt_shots: Option<u64>) -> Result<SynthesisSweep> {
    let mut points: Vec<SynthesisResult> = Vec::with_capacity(etas.len());
    for &eta in etas {
        let warm: Vec<Vec<f64>> = points.last().map(|p| p.gate.to_array().to_vec()).into_iter().collect();
        points.push(synthesize_gate(pt, model, &NonUnitaryTarget::new(alpha, eta)?, opts, &warm, qpt_shots)?);
    }
    let achievable_unitarity = points.iter().map(|p| p.realized_unitarity).fold(f64::INFINITY, f64::min);
    Ok(SynthesisSweep { alpha, points, achievable_unitarity })
}

/// Whether process fidelity does not increase as the target unitarity
/// decreases, over the points at or below `achievable` plus the last point
/// above it.
pub fn non_increasing_below(points: &[SynthesisResult], achievable: f64, tol: f64) -> bool {
    let mut sorted: Vec<&SynthesisResult> = points.iter().collect();
    sorted.sort_by(|a, b| b.target_unitarity.total_cmp(&a.target_unitarity));
    let start = sorted.iter().rposition(|p| p.target_unitarity > achievable).unwrap_or(0);
    sorted[start..].windows(2).all(|w| w[1].process_fidelity <= w[0].process_fidelity + tol)
}

/// Default synthesis device: the exchange surrogate with a coherent
/// neighbour.
pub fn default_synthesis_surrogate() -> Surrogate {
    Surrogate::exchange(EnvInit::Plus)
}
