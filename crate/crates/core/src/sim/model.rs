// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::sequence::ControlSequence;
use crate::linalg::{self, r, CMat, ZERO};
use crate::quantum::{gates, pauli, DensityMatrix, QuantumChannel, UNITARY_TOL};
use crate::{Error, Result};

/// Angular frequency in rad/ns for a frequency in kHz.
pub fn khz_to_rad_per_ns(f_khz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_khz * 1e-6
}

/// Tensor product of Pauli matrices named by a string such as `"XZ"`.
pub fn pauli_string(s: &str) -> Result<CMat> {
    let mut out = linalg::identity(1);
    for ch in s.chars() {
        let k = match ch {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            'Z' => 3,
            _ => return Err(Error::InvalidArgument(format!("bad Pauli label {ch:?} in {s:?}"))),
        };
        out = linalg::kron(&out, &pauli(k));
    }
    Ok(out)
}

/// `H = g (XX + YY)/2 + ζ ZZ/2` in rad/ns, with both couplings given in kHz.
pub fn exchange_zz_hamiltonian(exchange_khz: f64, zz_khz: f64) -> CMat {
    let g = khz_to_rad_per_ns(exchange_khz);
    let z = khz_to_rad_per_ns(zz_khz);
    let xx = linalg::kron(&gates::x(), &gates::x());
    let yy = linalg::kron(&gates::y(), &gates::y());
    let zz = linalg::kron(&gates::z(), &gates::z());
    (xx + yy).scale(g / 2.0) + zz.scale(z / 2.0)
}

/// Initial state of the environment (system starts in `|0⟩`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvInit {
    /// Environment in `|0…0⟩`.
    Zero,
    /// Environment in `|+…+⟩`, a coherent neighbour.
    Plus,
    /// System and first environment qubit in `(|00⟩ + |11⟩)/√2`, the rest in `|0⟩`.
    Bell,
}

impl EnvInit {
    pub fn state(self, env_dim: usize) -> DensityMatrix {
        let zero = DensityMatrix::basis(2, 0);
        match self {
            EnvInit::Zero => zero.tensor(&DensityMatrix::basis(env_dim, 0)),
            EnvInit::Plus => {
                let amp = r(1.0 / (env_dim as f64).sqrt());
                let env = DensityMatrix::pure(&vec![amp; env_dim]).expect("uniform superposition");
                zero.tensor(&env)
            }
            EnvInit::Bell if env_dim == 1 => zero,
            EnvInit::Bell => {
                let d = 2 * env_dim;
                let mut psi = vec![ZERO; d];
                let s = std::f64::consts::FRAC_1_SQRT_2;
                psi[0] = r(s);
                // |1⟩_S ⊗ |1 0…0⟩_E
                psi[env_dim + env_dim / 2] = r(s);
                DensityMatrix::pure(&psi).expect("bell state")
            }
        }
    }
}

/// System qubit coupled to an environment of dimension `env_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SEModel {
    pub env_dim: usize,
    /// Joint unitaries `U_{j+1:j}` on system ⊗ environment.
    pub intervals: Vec<CMat>,
    pub initial_se: DensityMatrix,
    /// Replace the environment by its initial marginal before every interval
    /// after the first, which makes the process Markovian.
    pub env_reset: bool,
    /// Whether the environment is a single neighbouring qubit whose joint
    /// state with the system may be measured.
    pub probeable: bool,
    /// Optional channel applied to the system just before measurement.
    pub readout: Option<QuantumChannel>,
    env_marginal: CMat,
}

impl SEModel {
    pub const SYS_DIM: usize = 2;

    pub fn new(env_dim: usize, intervals: Vec<CMat>, initial_se: DensityMatrix) -> Result<Self> {
        if env_dim == 0 || !env_dim.is_power_of_two() || env_dim > 8 {
            return Err(Error::InvalidArgument(format!("environment dimension {env_dim} must be 1, 2, 4 or 8")));
        }
        let d = Self::SYS_DIM * env_dim;
        if initial_se.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: initial_se.dim() });
        }
        for u in &intervals {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
            }
            let err = linalg::unitarity_error(u);
            if err > UNITARY_TOL {
                return Err(Error::NotUnitary(err));
            }
        }
        let env_marginal = linalg::partial_trace(initial_se.matrix(), &[Self::SYS_DIM, env_dim], &[1]);
        Ok(Self { env_dim, intervals, initial_se, env_reset: false, probeable: env_dim == 2, readout: None, env_marginal })
    }

    /// Intervals `exp(−i H t_j)` for the given durations.
    pub fn from_hamiltonian(h: &CMat, env_dim: usize, durations_ns: &[f64], init: EnvInit) -> Result<Self> {
        let herm = linalg::hermiticity_error(h);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        if let Some(&bad) = durations_ns.iter().find(|&&t| t.is_nan() || t <= 0.0) {
            return Err(Error::InvalidArgument(format!("interval duration {bad} ns must be positive")));
        }
        let intervals = durations_ns.iter().map(|&t| linalg::expm_hermitian(h, t)).collect();
        Self::new(env_dim, intervals, init.state(env_dim))
    }

    /// System-only model with no environment.
    pub fn closed(intervals: Vec<CMat>) -> Result<Self> {
        Self::new(1, intervals, DensityMatrix::basis(2, 0))
    }

    /// Three steps whose first interval swaps system and neighbour and whose
    /// second swaps them back, so slot 0 reaches the output past slot 1.
    pub fn swap_memory() -> Result<Self> {
        Self::new(2, vec![gates::swap(), gates::swap(), linalg::identity(4)], EnvInit::Zero.state(2))
    }

    pub fn with_env_reset(mut self, reset: bool) -> Self {
        self.env_reset = reset;
        self
    }

    pub fn with_readout(mut self, ch: Option<QuantumChannel>) -> Self {
        self.readout = ch;
        self
    }

    pub fn with_probeable(mut self, probeable: bool) -> Self {
        self.probeable = probeable && self.env_dim == 2;
        self
    }

    pub fn steps(&self) -> usize {
        self.intervals.len()
    }

    pub fn joint_dim(&self) -> usize {
        Self::SYS_DIM * self.env_dim
    }

    pub fn env_marginal(&self) -> &CMat {
        &self.env_marginal
    }

    /// Same model restricted to the given intervals (sharing state and flags).
    pub fn with_intervals(&self, intervals: Vec<CMat>) -> Result<Self> {
        let mut m = Self::new(self.env_dim, intervals, self.initial_se.clone())?;
        m.env_reset = self.env_reset;
        m.probeable = self.probeable;
        m.readout = self.readout.clone();
        Ok(m)
    }

    fn check_len(&self, seq: &ControlSequence) -> Result<()> {
        if seq.len() != self.intervals.len() {
            return Err(Error::StepIntervalMismatch { steps: seq.len(), intervals: self.intervals.len() });
        }
        for s in &seq.steps {
            if s.op.dim_in != Self::SYS_DIM || s.op.dim_out != Self::SYS_DIM {
                return Err(Error::DimensionMismatch { expected: Self::SYS_DIM, got: s.op.dim_in });
            }
        }
        Ok(())
    }

    /// Joint system–environment operator after the sequence. No physicality
    /// check is made, so arbitrary linear maps may be used as controls.
    pub fn evolve_joint(&self, seq: &ControlSequence) -> Result<CMat> {
        self.check_len(seq)?;
        let de = self.env_dim;
        let mut rho = self.initial_se.matrix().clone();
        for (j, (step, u)) in seq.steps.iter().zip(&self.intervals).enumerate() {
            if self.env_reset && j > 0 {
                let sys = linalg::partial_trace(&rho, &[Self::SYS_DIM, de], &[0]);
                rho = linalg::kron(&sys, &self.env_marginal);
            }
            rho = step.op.apply_on_first(&rho, de);
            rho = u * rho * u.adjoint();
        }
        Ok(rho)
    }

    /// Reduced system operator after the sequence (readout included), with
    /// no physicality check.
    pub fn evolve(&self, seq: &ControlSequence) -> Result<CMat> {
        let joint = self.evolve_joint(seq)?;
        let sys = linalg::partial_trace(&joint, &[Self::SYS_DIM, self.env_dim], &[0]);
        Ok(match &self.readout {
            Some(ch) => ch.apply_matrix(&sys),
            None => sys,
        })
    }

    /// Exact reduced system state.
    pub fn run_sequence(&self, seq: &ControlSequence) -> Result<DensityMatrix> {
        DensityMatrix::new(linalg::hermitian_part(&self.evolve(seq)?))
    }

    /// Joint state of system and neighbour qubit.
    pub fn two_qubit_probe(&self, seq: &ControlSequence) -> Result<DensityMatrix> {
        if !self.probeable || self.env_dim != 2 {
            return Err(Error::NotProbeable);
        }
        DensityMatrix::new(linalg::hermitian_part(&self.evolve_joint(seq)?))
    }
}
