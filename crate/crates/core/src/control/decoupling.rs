// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{measure_tensor, ControlOptions};
use crate::linalg::{self, CMat};
use crate::optimize::minimize_with_restarts;
use crate::quantum::{gates, mutual_information_state, negativity, purity, rotation_axis_angle, DensityMatrix, UnitaryParams};
use crate::rng;
use crate::sim::{ControlSequence, ControlStep, SEModel};
use crate::tomography::{ProcessTensor, SlotBasis};
use crate::{Error, Result};

/// Spread of the objective over random gates below which every gate is
/// reported as optimal.
const DEGENERACY_TOL: f64 = 1e-9;

/// Restart minima within this distance of the best are treated as tied.
const TIE_TOL: f64 = 1e-6;

/// Finite-difference step for the curvature used to break ties.
const CURVATURE_STEP: f64 = 0.05;

/// Sum of second differences along each parameter.
fn curvature(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64]) -> f64 {
    let f0 = f(x);
    let mut total = 0.0;
    for k in 0..x.len() {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[k] += CURVATURE_STEP;
        b[k] -= CURVATURE_STEP;
        total += (f(&a) + f(&b) - 2.0 * f0) / (CURVATURE_STEP * CURVATURE_STEP);
    }
    total
}

/// One gate between two idle periods, both qubits starting in `|+⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingLayout {
    pub idle_before_ns: f64,
    pub idle_after_ns: f64,
}

impl Default for DecouplingLayout {
    fn default() -> Self {
        Self { idle_before_ns: 256.0, idle_after_ns: 256.0 }
    }
}

impl DecouplingLayout {
    pub fn period_ns(&self) -> f64 {
        self.idle_before_ns + self.idle_after_ns
    }
}

fn plus_plus() -> CMat {
    let plus = DensityMatrix::from_bloch(1.0, 0.0, 0.0).expect("pure state").into_matrix();
    linalg::kron(&plus, &plus)
}

/// One-step probe model for the layout under the two-qubit Hamiltonian `h`.
pub fn decoupling_model(h: &CMat, layout: &DecouplingLayout) -> Result<SEModel> {
    if !(layout.idle_before_ns >= 0.0 && layout.idle_after_ns > 0.0) {
        return Err(Error::InvalidArgument("idle durations must be non-negative and the final one positive".into()));
    }
    let pre = linalg::expm_hermitian(h, layout.idle_before_ns);
    let post = linalg::expm_hermitian(h, layout.idle_after_ns);
    let init = &pre * plus_plus() * pre.adjoint();
    Ok(SEModel::new(2, vec![post], DensityMatrix::new(linalg::hermitian_part(&init))?)?.with_probeable(true))
}

/// Two-qubit one-step tensor over `basis` measured on `model`.
pub fn decoupling_tensor(model: &SEModel, basis: &[CMat], shots: Option<u64>, seed: u64) -> Result<ProcessTensor> {
    measure_tensor(model, vec![SlotBasis::unitary(basis)?], true, shots, seed)
}

/// `2 − γ₁ − γ₂` of the predicted (physical) two-qubit state.
pub fn decoupling_objective(pt: &ProcessTensor, gate: &CMat) -> Result<f64> {
    if pt.steps() != 1 || pt.out_dim != 4 {
        return Err(Error::InvalidArgument("decoupling needs a one-step tensor with a two-qubit output".into()));
    }
    let rho = pt.predict(&ControlSequence::new(vec![ControlStep::map(crate::quantum::LinearMap::from_unitary(gate))]))?;
    let g1 = purity(&rho.partial_trace(0, &[2, 2])?);
    let g2 = purity(&rho.partial_trace(1, &[2, 2])?);
    Ok(2.0 - g1 - g2)
}

/// Time series of two-qubit correlation measures.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times_ns: Vec<f64>,
    pub negativity: Vec<f64>,
    pub mutual_information: Vec<f64>,
    pub purity_system: Vec<f64>,
    pub purity_neighbor: Vec<f64>,
}

impl Trajectory {
    pub fn min_purity(&self) -> f64 {
        self.purity_system.iter().chain(&self.purity_neighbor).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn peak_negativity(&self) -> f64 {
        self.negativity.iter().copied().fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, rho: &CMat) -> Result<()> {
        let state = DensityMatrix::new(linalg::hermitian_part(rho))?;
        self.times_ns.push(t);
        self.negativity.push(negativity(&state)?);
        self.mutual_information.push(mutual_information_state(&state, 2, 2)?);
        self.purity_system.push(purity(&state.partial_trace(0, &[2, 2])?));
        self.purity_neighbor.push(purity(&state.partial_trace(1, &[2, 2])?));
        Ok(())
    }
}

/// XY4 pulse cycle on the system qubit.
pub fn xy4_pulses() -> Vec<CMat> {
    vec![gates::x(), gates::y(), gates::x(), gates::y()]
}

/// Evolution of `|+⟩|+⟩` under `h` for `horizon_ns`, with the system pulses
/// applied in turn at `period/2 + m·period`. An empty pulse list gives idle
/// evolution. States are sampled `samples_per_period` times per period
/// (rounded up to an even number).
pub fn apply_periodic_decoupling(h: &CMat, pulses: &[CMat], period_ns: f64, horizon_ns: f64, samples_per_period: usize) -> Result<Trajectory> {
    if !(period_ns > 0.0 && horizon_ns >= 0.0) {
        return Err(Error::InvalidArgument("period must be positive and horizon non-negative".into()));
    }
    let s = samples_per_period.max(2).div_ceil(2) * 2;
    let dt = period_ns / s as f64;
    let step = linalg::expm_hermitian(h, dt);
    let embedded: Vec<CMat> = pulses.iter().map(|p| linalg::kron(p, &linalg::identity(2))).collect();
    let count = (horizon_ns / dt).round() as usize;
    let mut rho = plus_plus();
    let mut traj = Trajectory::default();
    traj.push(0.0, &rho)?;
    for k in 1..=count {
        rho = &step * rho * step.adjoint();
        if !embedded.is_empty() && k % s == s / 2 {
            let p = &embedded[(k / s) % embedded.len()];
            rho = p * rho * p.adjoint();
        }
        traj.push(k as f64 * dt, &rho)?;
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingResult {
    pub gate: UnitaryParams,
    pub objective: f64,
    pub axis: [f64; 3],
    pub angle: f64,
    /// Objective flat over random gates: every gate is optimal.
    pub degenerate: bool,
    pub restarts: usize,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle: Option<Trajectory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoupled: Option<Trajectory>,
    /// XY4 reference, an extension beyond the optimised protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xy4: Option<Trajectory>,
}

impl DecouplingResult {
    /// Idle, optimised and XY4 trajectories under `h`.
    pub fn with_trajectories(mut self, h: &CMat, period_ns: f64, horizon_ns: f64, samples_per_period: usize) -> Result<Self> {
        self.idle = Some(apply_periodic_decoupling(h, &[], period_ns, horizon_ns, samples_per_period)?);
        self.decoupled = Some(apply_periodic_decoupling(h, &[self.gate.matrix()], period_ns, horizon_ns, samples_per_period)?);
        self.xy4 = Some(apply_periodic_decoupling(h, &xy4_pulses(), period_ns, horizon_ns, samples_per_period)?);
        Ok(self)
    }
}

/// Nelder–Mead search over `(θ, φ, λ)` for the gate minimising
/// `2 − γ₁ − γ₂`. Restarts that tie with the best are ranked by curvature
/// and the flattest minimum is returned.
pub fn optimize_decoupling(pt: &ProcessTensor, opts: &ControlOptions) -> Result<DecouplingResult> {
    let eval = |x: &[f64]| decoupling_objective(pt, &UnitaryParams::from_slice(x).matrix());
    let mut g = rng::stream(rng::derive(opts.seed, "decoupling-degeneracy"), 0);
    let probes = (0..opts.restarts.max(4))
        .map(|_| eval(&[g.random_range(0.0..TAU), g.random_range(0.0..TAU), g.random_range(0.0..TAU)]))
        .collect::<Result<Vec<_>>>()?;
    let spread = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max) - probes.iter().copied().fold(f64::INFINITY, f64::min);
    let mut objective = |x: &[f64]| eval(x).unwrap_or(f64::NAN);
    let summary = minimize_with_restarts(&mut objective, 3, (0.0, TAU), opts.restarts, &[], opts.seed, &opts.nelder_mead())?;
    let mut chosen = &summary.best;
    let mut flattest = f64::INFINITY;
    for m in summary.minima.iter().filter(|m| m.value <= summary.best.value + TIE_TOL) {
        let k = curvature(&mut objective, &m.x);
        if k < flattest {
            flattest = k;
            chosen = m;
        }
    }
    let gate = UnitaryParams::from_slice(&chosen.x);
    let (axis, angle) = rotation_axis_angle(&gate.matrix());
    Ok(DecouplingResult {
        gate,
        objective: chosen.value.max(0.0),
        axis,
        angle,
        degenerate: spread < DEGENERACY_TOL,
        restarts: summary.restarts,
        evaluations: summary.total_evaluations,
        idle: None,
        decoupled: None,
        xy4: None,
    })
}
