// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::model::{exchange_zz_hamiltonian, EnvInit, SEModel};
use crate::Result;

/// Two-qubit surrogate device: the system qubit and one neighbour coupled by
/// `g (XX + YY)/2 + ζ ZZ/2`. Each time step lasts one gate plus one idle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub exchange_khz: f64,
    pub zz_khz: f64,
    pub gate_duration_ns: f64,
    pub idle_duration_ns: f64,
    pub idle_scale: f64,
    pub env_init: EnvInit,
    pub env_reset: bool,
}

impl Surrogate {
    /// Neighbour with a dominant always-on ZZ term; used for tomography,
    /// memory and Markov comparisons.
    pub const fn coupled_neighbor(env_init: EnvInit) -> Self {
        Self {
            exchange_khz: 200.0,
            zz_khz: 500.0,
            gate_duration_ns: 72.0,
            idle_duration_ns: 72.0,
            idle_scale: 1.0,
            env_init,
            env_reset: false,
        }
    }

    /// Exchange-dominated neighbour; used for decoupling and gate synthesis.
    pub const fn exchange(env_init: EnvInit) -> Self {
        Self {
            exchange_khz: 50.0,
            zz_khz: 30.0,
            gate_duration_ns: 72.0,
            idle_duration_ns: 72.0,
            idle_scale: 1.0,
            env_init,
            env_reset: false,
        }
    }

    pub fn step_duration_ns(&self) -> f64 {
        self.gate_duration_ns + self.idle_duration_ns * self.idle_scale
    }

    pub fn with_reset(mut self, reset: bool) -> Self {
        self.env_reset = reset;
        self
    }

    /// Model with `steps` equal intervals.
    pub fn model(&self, steps: usize) -> Result<SEModel> {
        self.model_with_durations(&vec![self.step_duration_ns(); steps])
    }

    pub fn model_with_durations(&self, durations_ns: &[f64]) -> Result<SEModel> {
        let h = exchange_zz_hamiltonian(self.exchange_khz, self.zz_khz);
        Ok(SEModel::from_hamiltonian(&h, 2, durations_ns, self.env_init)?.with_env_reset(self.env_reset))
    }
}
