// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experiment plans: JSON documents with unit-suffixed fields.

use std::fmt;
use std::path::Path;

use ptomo_core::linalg::{self, CMat};
use ptomo_core::sim::{khz_to_rad_per_ns, pauli_string, EnvInit, SEModel};
use ptomo_core::tomography::{MIN_BASIS, POOL_SIZE};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Major version of the plan format this build reads.
pub const PLAN_MAJOR: u32 = 1;

/// Number of time steps in a tomography sequence.
pub const STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Characterize,
    Evaluate,
    Memory,
    Markov,
    Decouple,
    Synthesize,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Characterize, Stage::Evaluate, Stage::Memory, Stage::Markov, Stage::Decouple, Stage::Synthesize];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Characterize => "characterize",
            Stage::Evaluate => "evaluate",
            Stage::Memory => "memory",
            Stage::Markov => "markov",
            Stage::Decouple => "decouple",
            Stage::Synthesize => "synthesize",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }

    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Evaluate | Stage::Memory | Stage::Markov => &[Stage::Characterize],
            _ => &[],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One Hamiltonian term `ω/2 · P` with `ω = 2π · freq_khz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianTerm {
    pub pauli: String,
    pub freq_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Pauli terms on system ⊗ environment qubits (system first).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hamiltonian: Vec<HamiltonianTerm>,
    /// Explicit interval unitaries as rows of `[re, im]` pairs; one per
    /// step, or a single one repeated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_duration")]
    pub gate_duration_ns: f64,
    #[serde(default = "default_duration")]
    pub idle_duration_ns: f64,
    #[serde(default = "default_env_init")]
    pub env_init: EnvInit,
    #[serde(default)]
    pub env_reset: bool,
}

fn default_duration() -> f64 {
    72.0
}

fn default_env_init() -> EnvInit {
    EnvInit::Zero
}

impl ModelConfig {
    /// Exchange plus ZZ coupling to one neighbour, `g (XX + YY)/2 + ζ ZZ/2`.
    pub fn exchange_zz(exchange_khz: f64, zz_khz: f64, env_init: EnvInit) -> Self {
        let term = |p: &str, f: f64| HamiltonianTerm { pauli: p.into(), freq_khz: f };
        Self {
            hamiltonian: vec![term("XX", exchange_khz), term("YY", exchange_khz), term("ZZ", zz_khz)],
            intervals: Vec::new(),
            gate_duration_ns: default_duration(),
            idle_duration_ns: default_duration(),
            env_init,
            env_reset: false,
        }
    }

    /// Default tomography device: a neighbour with a dominant ZZ term.
    pub fn coupled_neighbor(env_init: EnvInit) -> Self {
        Self::exchange_zz(200.0, 500.0, env_init)
    }

    /// Default control device: an exchange-dominated neighbour.
    pub fn exchange(env_init: EnvInit) -> Self {
        Self::exchange_zz(50.0, 30.0, env_init)
    }

    fn validate(&self, path: &str) -> Result<()> {
        match (self.hamiltonian.is_empty(), self.intervals.is_empty()) {
            (true, true) => return Err(CliError::config(path, "needs either `hamiltonian` or `intervals`")),
            (false, false) => return Err(CliError::config(path, "`hamiltonian` and `intervals` are mutually exclusive")),
            _ => {}
        }
        for (name, v) in [("gate_duration_ns", self.gate_duration_ns), ("idle_duration_ns", self.idle_duration_ns)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::config(format!("{path}.{name}"), format!("must be a non-negative duration, got {v}")));
            }
        }
        if !self.hamiltonian.is_empty() {
            let len = self.hamiltonian[0].pauli.len();
            for (k, t) in self.hamiltonian.iter().enumerate() {
                let p = format!("{path}.hamiltonian[{k}]");
                if t.pauli.len() != len || !(2..=4).contains(&len) {
                    return Err(CliError::config(format!("{p}.pauli"), "terms need equal lengths of 2 to 4 qubits"));
                }
                pauli_string(&t.pauli).map_err(|e| CliError::config(format!("{p}.pauli"), e.to_string()))?;
                if !t.freq_khz.is_finite() {
                    return Err(CliError::config(format!("{p}.freq_khz"), "must be finite"));
                }
            }
        }
        if !(self.intervals.is_empty() || self.intervals.len() == 1 || self.intervals.len() == STEPS) {
            return Err(CliError::config(format!("{path}.intervals"), format!("give 1 or {STEPS} interval unitaries")));
        }
        Ok(())
    }

    /// Hamiltonian in rad/ns.
    pub fn hamiltonian_matrix(&self) -> Result<CMat> {
        let mut h: Option<CMat> = None;
        for t in &self.hamiltonian {
            let p = pauli_string(&t.pauli)?.scale(khz_to_rad_per_ns(t.freq_khz) / 2.0);
            h = Some(match h {
                Some(acc) => acc + p,
                None => p,
            });
        }
        h.ok_or_else(|| CliError::config("model.hamiltonian", "no terms"))
    }

    fn env_dim(&self) -> usize {
        match self.hamiltonian.first() {
            Some(t) => 1 << (t.pauli.len() - 1),
            None => self.intervals[0].len() / 2,
        }
    }

    /// Model with one interval per entry of `durations_ns` (Hamiltonian
    /// form) or with the explicit intervals.
    pub fn build_with_durations(&self, durations_ns: &[f64]) -> Result<SEModel> {
        let env_dim = self.env_dim();
        let model = if self.hamiltonian.is_empty() {
            let mats = self
                .intervals
                .iter()
                .map(|rows| linalg::serde_cmat::from_rows(rows).map_err(|e| CliError::config("model.intervals", e)))
                .collect::<Result<Vec<_>>>()?;
            let intervals = if mats.len() == 1 { vec![mats[0].clone(); durations_ns.len()] } else { mats };
            SEModel::new(env_dim, intervals, self.env_init.state(env_dim))?
        } else {
            SEModel::from_hamiltonian(&self.hamiltonian_matrix()?, env_dim, durations_ns, self.env_init)?
        };
        Ok(model.with_env_reset(self.env_reset))
    }

    /// Tomography model: `STEPS` intervals of one gate plus a scaled idle.
    pub fn build(&self, idle_scale: f64) -> Result<SEModel> {
        let step = self.gate_duration_ns + self.idle_duration_ns * idle_scale;
        if self.hamiltonian.is_empty() || step > 0.0 {
            self.build_with_durations(&[step; STEPS])
        } else {
            Err(CliError::config("model", "step duration must be positive"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Ascending mean overlap of the normalised Choi states.
    Overlap,
    /// Pool order as drawn.
    Pool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateConfig {
    /// Basis sizes for the infidelity curve; empty means every even size
    /// from 10 up to the plan's basis size.
    pub basis_sizes: Vec<usize>,
    pub ordering: Ordering,
    pub bootstrap_resamples: usize,
    /// Also evaluate four Haar-random preparations outside the basis.
    pub preparation_check: bool,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self { basis_sizes: Vec::new(), ordering: Ordering::Overlap, bootstrap_resamples: 1000, preparation_check: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryConfig {
    pub restarts: usize,
    pub bootstrap_resamples: usize,
    pub bootstrap_restarts: usize,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self { restarts: 20, bootstrap_resamples: 200, bootstrap_restarts: 4 }
    }
}

/// Neighbour setting for a Markov comparison run on its own dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub env_init: EnvInit,
    #[serde(default)]
    pub env_reset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarkovConfig {
    /// Shots per characterisation setting; `null` means the same total
    /// budget as the tensor dataset.
    pub shots_per_setting: Option<u64>,
    pub bootstrap_resamples: usize,
    /// Extra neighbour settings; the plan's own model is always compared.
    pub scenarios: Vec<Scenario>,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self { shots_per_setting: None, bootstrap_resamples: 1000, scenarios: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecouplingConfig {
    pub idle_before_ns: f64,
    pub idle_after_ns: f64,
    pub horizon_ns: f64,
    pub samples_per_period: usize,
}

impl Default for DecouplingConfig {
    fn default() -> Self {
        Self { idle_before_ns: 256.0, idle_after_ns: 256.0, horizon_ns: 30_000.0, samples_per_period: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisConfig {
    pub idle_ns: f64,
    pub eta_points: usize,
    /// Fixed `α`; `null` draws it from the plan seed.
    pub alpha: Option<f64>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self { idle_ns: 800.0, eta_points: 11, alpha: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    /// Two-qubit device; only the Hamiltonian and `env_init` are used.
    pub model: ModelConfig,
    pub basis_size: usize,
    /// Shots for the control tensors and process tomography; `null` is exact.
    pub shots: Option<u64>,
    pub restarts: usize,
    pub decoupling: DecouplingConfig,
    pub synthesis: SynthesisConfig,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::exchange(EnvInit::Plus),
            basis_size: 24,
            shots: None,
            restarts: 20,
            decoupling: DecouplingConfig::default(),
            synthesis: SynthesisConfig::default(),
        }
    }
}

fn default_pool_size() -> usize {
    POOL_SIZE
}

fn default_shots() -> Option<u64> {
    Some(1600)
}

fn default_idle_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub schema_version: String,
    pub name: String,
    pub seed: u64,
    pub pool_seed: u64,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    pub basis_size: usize,
    /// Shots per measurement setting; `null` gives exact outcome
    /// probabilities.
    #[serde(default = "default_shots")]
    pub shots: Option<u64>,
    #[serde(default = "default_idle_scale")]
    pub idle_scale: f64,
    pub stages: Vec<Stage>,
    pub model: ModelConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub memory: MemoryConfig,
    #[serde(default)]
    pub markov: MarkovConfig,
    #[serde(default)]
    pub control: ControlConfig,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let plan: ExperimentPlan = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { String::from("(root)") } else { path }, e.into_inner().to_string())
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let major = self.schema_version.split('.').next().and_then(|m| m.parse::<u32>().ok());
        if major != Some(PLAN_MAJOR) {
            return Err(CliError::config("schema_version", format!("unsupported version {:?}, expected {PLAN_MAJOR}.x", self.schema_version)));
        }
        if self.name.is_empty() {
            return Err(CliError::config("name", "must not be empty"));
        }
        if self.pool_size <= MIN_BASIS || self.pool_size > POOL_SIZE {
            return Err(CliError::config("pool_size", format!("must lie in [{}, {POOL_SIZE}]", MIN_BASIS + 1)));
        }
        let check_n = |path: &str, n: usize| {
            if n < MIN_BASIS || n >= self.pool_size {
                Err(CliError::config(path, format!("basis size {n} must lie in [{MIN_BASIS}, {}]", self.pool_size - 1)))
            } else {
                Ok(())
            }
        };
        check_n("basis_size", self.basis_size)?;
        for (k, &n) in self.evaluate.basis_sizes.iter().enumerate() {
            check_n(&format!("evaluate.basis_sizes[{k}]"), n)?;
        }
        if self.shots == Some(0) {
            return Err(CliError::config("shots", "must be positive or null"));
        }
        if !(self.idle_scale.is_finite() && self.idle_scale > 0.0) {
            return Err(CliError::config("idle_scale", "must be positive"));
        }
        if self.stages.is_empty() {
            return Err(CliError::config("stages", "no stages requested"));
        }
        self.model.validate("model")?;
        if self.model.gate_duration_ns + self.model.idle_duration_ns * self.idle_scale <= 0.0 && !self.model.hamiltonian.is_empty() {
            return Err(CliError::config("model", "step duration must be positive"));
        }
        if self.evaluate.bootstrap_resamples < 2 {
            return Err(CliError::config("evaluate.bootstrap_resamples", "need at least 2"));
        }
        if self.memory.restarts == 0 {
            return Err(CliError::config("memory.restarts", "need at least 1"));
        }
        if self.markov.bootstrap_resamples < 2 {
            return Err(CliError::config("markov.bootstrap_resamples", "need at least 2"));
        }
        if self.markov.shots_per_setting == Some(0) {
            return Err(CliError::config("markov.shots_per_setting", "must be positive or null"));
        }
        let c = &self.control;
        c.model.validate("control.model")?;
        if c.model.hamiltonian.first().is_none_or(|t| t.pauli.len() != 2) {
            return Err(CliError::config("control.model.hamiltonian", "control needs a two-qubit Hamiltonian"));
        }
        if c.basis_size < MIN_BASIS {
            return Err(CliError::config("control.basis_size", format!("must be at least {MIN_BASIS}")));
        }
        if c.shots == Some(0) {
            return Err(CliError::config("control.shots", "must be positive or null"));
        }
        if c.restarts == 0 {
            return Err(CliError::config("control.restarts", "need at least 1"));
        }
        let d = &c.decoupling;
        if !(d.idle_before_ns >= 0.0 && d.idle_after_ns > 0.0 && d.horizon_ns >= 0.0) {
            return Err(CliError::config("control.decoupling", "idle durations must be non-negative (the second positive) and the horizon non-negative"));
        }
        if c.synthesis.idle_ns.is_nan() || c.synthesis.idle_ns <= 0.0 {
            return Err(CliError::config("control.synthesis.idle_ns", "must be positive"));
        }
        if c.synthesis.eta_points == 0 {
            return Err(CliError::config("control.synthesis.eta_points", "need at least 1"));
        }
        Ok(())
    }

    /// Basis sizes evaluated for the infidelity curve, ascending, always
    /// including the plan's basis size.
    pub fn evaluate_sizes(&self) -> Vec<usize> {
        let mut sizes = if self.evaluate.basis_sizes.is_empty() {
            (MIN_BASIS..=self.basis_size).step_by(2).collect()
        } else {
            self.evaluate.basis_sizes.clone()
        };
        sizes.push(self.basis_size);
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    /// Requested stages plus their prerequisites, in execution order.
    pub fn stage_closure(stages: &[Stage]) -> Vec<Stage> {
        let mut all: Vec<Stage> = stages.iter().flat_map(|s| s.prerequisites().iter().copied().chain([*s])).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// The default plan: the coupled-neighbour device with a coherent
    /// neighbour, 1600 shots, the full pool and every stage. The Markov
    /// stage also runs with the neighbour reset every step.
    pub fn default_plan(name: &str, seed: u64) -> Self {
        Self {
            schema_version: "1.0".into(),
            name: name.into(),
            seed,
            pool_seed: seed,
            pool_size: POOL_SIZE,
            basis_size: 24,
            shots: default_shots(),
            idle_scale: 1.0,
            stages: Stage::ALL.to_vec(),
            model: ModelConfig::coupled_neighbor(EnvInit::Plus),
            evaluate: EvaluateConfig::default(),
            memory: MemoryConfig::default(),
            markov: MarkovConfig {
                scenarios: vec![Scenario { label: "plus_reset".into(), env_init: EnvInit::Plus, env_reset: true }],
                ..MarkovConfig::default()
            },
            control: ControlConfig::default(),
        }
    }
}
