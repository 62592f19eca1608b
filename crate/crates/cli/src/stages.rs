// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Stage execution. Every stage appends deterministic records; a stage that
//! already has its completion marker in the store is skipped.

use std::collections::BTreeMap;

use log::info;
use ptomo_core::control::{
    alpha_from_seed, decoupling_model, decoupling_tensor, eta_grid, non_increasing_below, optimize_decoupling, synthesis_tensor, synthesize_sweep,
    ControlOptions, DecouplingLayout, DecouplingResult, SynthesisSweep,
};
use ptomo_core::linalg::{self, CMat};
use ptomo_core::markov::{characterize_gates, equal_budget_shots, markov_gap, MarkovGap};
use ptomo_core::memory::{bootstrap_bound, maximize_cmi, MaximizeOptions, MemoryBound};
use ptomo_core::rng;
use ptomo_core::sim::{EnvInit, ExperimentRecord, SettingRecord};
use ptomo_core::stats::BoxStats;
use ptomo_core::tomography::{
    bootstrap_ci, evaluate_split_states, generate_haar_basis, held_out_preparations, mean_overlaps, overlap_order, preparation_check, split_tensor,
    Dataset, PreparationCheck, ProcessTensor, SplitPlan,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::plan::{ExperimentPlan, ModelConfig, Ordering, Stage};
use crate::store::{Record, ResultsStore, SidecarRef};

pub const KIND_PLAN: &str = "plan";
pub const KIND_STAGE_COMPLETE: &str = "stage_complete";
pub const KIND_BASIS: &str = "basis";
pub const KIND_CIRCUIT: &str = "circuit";
pub const KIND_STATE: &str = "state";
pub const KIND_TENSOR: &str = "tensor";
pub const KIND_FIDELITY_TABLE: &str = "fidelity_table";
pub const KIND_PREPARATION_CHECK: &str = "preparation_check";
pub const KIND_MEMORY_BOUND: &str = "memory_bound";
pub const KIND_MARKOV: &str = "markov_comparison";
pub const KIND_DECOUPLING: &str = "decoupling";
pub const KIND_SYNTHESIS: &str = "synthesis_sweep";

/// Memory-bound placements in report order: label and barrier slots.
pub const PLACEMENTS: [(&str, &[usize]); 3] = [("slot 1", &[1]), ("slot 2", &[2]), ("both", &[1, 2])];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisPayload {
    pub seed: u64,
    #[serde(with = "linalg::serde_cmat_vec")]
    pub unitaries: Vec<CMat>,
    pub mean_overlaps: Vec<f64>,
    pub overlap_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPayload {
    pub sequence_id: u64,
    pub setting: usize,
    pub shots: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub record: SettingRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePayload {
    pub sequence_id: u64,
    #[serde(with = "linalg::serde_cmat")]
    pub rho: CMat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorPayload {
    pub n: usize,
    pub out_dim: usize,
    pub sidecar: SidecarRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityTable {
    pub n: usize,
    pub ordering: Ordering,
    pub heldout_ids: Vec<u64>,
    pub fidelities: Vec<f64>,
    pub summary: BoxStats,
    pub mean_infidelity: f64,
    /// 95% bootstrap interval of the mean infidelity.
    pub ci: (f64, f64),
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryPayload {
    pub placement: String,
    pub bound: MemoryBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovPayload {
    pub scenario: String,
    pub env_init: EnvInit,
    pub env_reset: bool,
    pub shots_per_setting: Option<u64>,
    pub median_gap: f64,
    pub intervals_overlap: bool,
    pub gap: MarkovGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingPayload {
    pub layout: DecouplingLayout,
    pub period_ns: f64,
    pub horizon_ns: f64,
    pub shots: Option<u64>,
    pub result: DecouplingResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPayload {
    pub idle_ns: f64,
    pub shots: Option<u64>,
    pub non_increasing: bool,
    pub sweep: SynthesisSweep,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload serialises")
}

/// Seed of a stage, derived from the plan seed.
pub fn stage_seed(plan: &ExperimentPlan, stage: Stage) -> u64 {
    rng::derive(plan.seed, stage.name())
}

fn plan_payload(plan: &ExperimentPlan) -> Value {
    let mut v = to_value(plan);
    // staging does not change the results
    v.as_object_mut().expect("plan is an object").remove("stages");
    v
}

/// Records the plan in the store, or checks it against the stored one.
pub fn register_plan(plan: &ExperimentPlan, store: &mut ResultsStore) -> Result<()> {
    let payload = plan_payload(plan);
    if let Some(existing) = store.get(&plan.name, KIND_PLAN, &plan.name) {
        if existing.payload != payload {
            return Err(CliError::config(
                "name",
                format!("store {} already holds a different plan named {:?}; use a fresh --out directory", store.root().display(), plan.name),
            ));
        }
        return Ok(());
    }
    store.append(vec![Record::new(&plan.name, KIND_PLAN, plan.seed, KIND_PLAN, plan.name.clone(), payload)])?;
    Ok(())
}

pub fn stage_done(plan: &ExperimentPlan, store: &ResultsStore, stage: Stage) -> bool {
    store.contains(&plan.name, KIND_STAGE_COMPLETE, stage.name())
}

pub fn require_stage(plan: &ExperimentPlan, store: &ResultsStore, stage: Stage, needed_by: &str) -> Result<()> {
    if stage_done(plan, store, stage) {
        Ok(())
    } else {
        Err(CliError::MissingStage { stage: stage.name().into(), needed_by: needed_by.into() })
    }
}

/// Runs `stages` and their prerequisites in dependency order.
pub fn run_plan(plan: &ExperimentPlan, store: &mut ResultsStore, stages: &[Stage]) -> Result<()> {
    register_plan(plan, store)?;
    for stage in ExperimentPlan::stage_closure(stages) {
        if stage_done(plan, store, stage) {
            info!("{}: already complete, skipping", stage);
            continue;
        }
        info!("{}: running", stage);
        let records = match stage {
            Stage::Characterize => characterize(plan, store)?,
            Stage::Evaluate => evaluate(plan, store)?,
            Stage::Memory => memory(plan, store)?,
            Stage::Markov => markov(plan, store)?,
            Stage::Decouple => decouple(plan, store)?,
            Stage::Synthesize => synthesize(plan, store)?,
        };
        let n = store.append(records)?;
        store.append(vec![Record::new(&plan.name, stage.name(), stage_seed(plan, stage), KIND_STAGE_COMPLETE, stage.name(), json!({}))])?;
        info!("{}: {} records written", stage, n);
    }
    Ok(())
}

fn record(plan: &ExperimentPlan, stage: Stage, kind: &str, key: impl Into<String>, payload: Value) -> Record {
    Record::new(&plan.name, stage.name(), stage_seed(plan, stage), kind, key, payload)
}

fn order_for(plan: &ExperimentPlan, basis: &BasisPayload) -> Vec<usize> {
    match plan.evaluate.ordering {
        Ordering::Overlap => basis.overlap_order.clone(),
        Ordering::Pool => (0..basis.unitaries.len()).collect(),
    }
}

fn tensor_record(plan: &ExperimentPlan, store: &ResultsStore, stage: Stage, key: &str, n: usize, pt: &ProcessTensor) -> Result<Record> {
    let sidecar = store.write_sidecar(pt)?;
    Ok(record(plan, stage, KIND_TENSOR, key, to_value(&TensorPayload { n, out_dim: pt.out_dim, sidecar })))
}

fn characterize(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Characterize;
    let seed = stage_seed(plan, stage);
    let pool = generate_haar_basis(plan.pool_size, plan.pool_seed)?.unitaries;
    let basis = BasisPayload { seed: plan.pool_seed, mean_overlaps: mean_overlaps(&pool), overlap_order: overlap_order(&pool), unitaries: pool };
    let mut out = vec![record(plan, stage, KIND_BASIS, "pool", to_value(&basis))];

    let model = plan.model.build(plan.idle_scale)?;
    let ds = Dataset::simulate(&model, &basis.unitaries, plan.shots, seed)?;
    for r in &ds.records {
        for (k, s) in r.settings.iter().enumerate() {
            let axes: String = s.axes.iter().map(|a| format!("{a:?}")).collect();
            let payload = CircuitPayload { sequence_id: r.sequence_id, setting: k, shots: r.shots, seed: r.seed, record: s.clone() };
            out.push(record(plan, stage, KIND_CIRCUIT, format!("{}/{axes}", r.sequence_id), to_value(&payload)));
        }
    }
    let states = ds.states()?;
    for (id, rho) in states.iter().enumerate() {
        out.push(record(plan, stage, KIND_STATE, id.to_string(), to_value(&StatePayload { sequence_id: id as u64, rho: rho.clone() })));
    }
    let order = order_for(plan, &basis);
    let pt = split_tensor(&basis.unitaries, &states, &order, plan.basis_size)?;
    out.push(tensor_record(plan, store, stage, &format!("n={}", plan.basis_size), plan.basis_size, &pt)?);
    Ok(out)
}

pub fn load_basis(plan: &ExperimentPlan, store: &ResultsStore) -> Result<BasisPayload> {
    store
        .get(&plan.name, KIND_BASIS, "pool")
        .ok_or_else(|| CliError::MissingStage { stage: Stage::Characterize.name().into(), needed_by: "basis lookup".into() })?
        .decode()
}

/// Rebuilds the measured dataset from the stored circuit records.
pub fn load_dataset(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Dataset> {
    let basis = load_basis(plan, store)?;
    let mut by_id: BTreeMap<u64, Vec<CircuitPayload>> = BTreeMap::new();
    for r in store.find(&plan.name, KIND_CIRCUIT) {
        let c: CircuitPayload = r.decode()?;
        by_id.entry(c.sequence_id).or_default().push(c);
    }
    let records = by_id
        .into_iter()
        .map(|(id, mut settings)| {
            settings.sort_by_key(|c| c.setting);
            ExperimentRecord { sequence_id: id, shots: settings[0].shots, seed: settings[0].seed, settings: settings.into_iter().map(|c| c.record).collect() }
        })
        .collect();
    Ok(Dataset::from_records(&basis.unitaries, records)?)
}

/// Stored tensor under `key`.
pub fn load_tensor(plan: &ExperimentPlan, store: &ResultsStore, key: &str) -> Result<ProcessTensor> {
    let rec = store
        .get(&plan.name, KIND_TENSOR, key)
        .ok_or_else(|| CliError::MissingStage { stage: Stage::Characterize.name().into(), needed_by: format!("tensor {key}") })?;
    let payload: TensorPayload = rec.decode()?;
    store.read_sidecar(&payload.sidecar)
}

fn evaluate(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Evaluate;
    let seed = stage_seed(plan, stage);
    let basis = load_basis(plan, store)?;
    let ds = load_dataset(plan, store)?;
    let states = ds.states()?;
    let order = order_for(plan, &basis);
    let resamples = plan.evaluate.bootstrap_resamples;
    let mut out = Vec::new();
    for n in plan.evaluate_sizes() {
        let eval = evaluate_split_states(&basis.unitaries, &states, &order, n)?;
        let (lo, hi, _) = bootstrap_ci(&ds, &order, n, resamples, rng::derive(seed, &format!("n={n}")))?;
        let table = FidelityTable {
            n,
            ordering: plan.evaluate.ordering,
            heldout_ids: eval.heldout_ids,
            fidelities: eval.fidelities,
            summary: eval.summary,
            mean_infidelity: eval.mean_infidelity,
            ci: (lo, hi),
            resamples,
        };
        out.push(record(plan, stage, KIND_FIDELITY_TABLE, format!("n={n}"), to_value(&table)));
    }
    if plan.evaluate.preparation_check {
        let model = plan.model.build(plan.idle_scale)?;
        let preps = held_out_preparations(seed);
        let check = preparation_check(&model, &ds, &order, plan.basis_size, &preps, plan.shots, seed, resamples)?;
        out.push(record(plan, stage, KIND_PREPARATION_CHECK, format!("n={}", plan.basis_size), to_value(&check)));
    }
    Ok(out)
}

fn memory(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Memory;
    let seed = stage_seed(plan, stage);
    let basis = load_basis(plan, store)?;
    let ds = load_dataset(plan, store)?;
    let order = order_for(plan, &basis);
    let split = SplitPlan::new(&basis.unitaries, &order, plan.basis_size)?;
    let pt = load_tensor(plan, store, &format!("n={}", plan.basis_size))?;
    let exact = ds.records.iter().all(ExperimentRecord::is_exact);
    let mut out = Vec::new();
    for (label, slots) in PLACEMENTS {
        let opts = MaximizeOptions { restarts: plan.memory.restarts, seed: rng::derive(seed, label), ..MaximizeOptions::default() };
        let mut bound = maximize_cmi(&pt, slots, &opts)?;
        bound.ci = Some(if exact {
            (bound.cmi_bits, bound.cmi_bits)
        } else {
            bootstrap_bound(&ds, &split, &bound, plan.memory.bootstrap_resamples, plan.memory.bootstrap_restarts, rng::derive(seed, &format!("{label}/bootstrap")))?
        });
        out.push(record(plan, stage, KIND_MEMORY_BOUND, label, to_value(&MemoryPayload { placement: label.into(), bound })));
    }
    Ok(out)
}

fn scenario_label(init: EnvInit, reset: bool) -> String {
    let base = match init {
        EnvInit::Zero => "zero",
        EnvInit::Plus => "plus",
        EnvInit::Bell => "bell",
    };
    if reset {
        format!("{base}_reset")
    } else {
        base.into()
    }
}

fn markov(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Markov;
    let seed = stage_seed(plan, stage);
    let basis = load_basis(plan, store)?;
    let order = order_for(plan, &basis);
    let split = SplitPlan::new(&basis.unitaries, &order, plan.basis_size)?;
    let mut scenarios: Vec<(String, ModelConfig)> = vec![("plan".into(), plan.model.clone())];
    for s in &plan.markov.scenarios {
        let cfg = ModelConfig { env_init: s.env_init, env_reset: s.env_reset, ..plan.model.clone() };
        scenarios.push((s.label.clone(), cfg));
    }
    let mut out = Vec::new();
    for (label, cfg) in scenarios {
        let model = cfg.build(plan.idle_scale)?;
        let ds = if cfg == plan.model {
            load_dataset(plan, store)?
        } else {
            Dataset::simulate(&model, &basis.unitaries, plan.shots, stage_seed(plan, Stage::Characterize))?
        };
        let shots = match (plan.markov.shots_per_setting, plan.shots) {
            (Some(s), _) => Some(s),
            (None, Some(s)) => Some(equal_budget_shots(&model, plan.pool_size, s)),
            (None, None) => None,
        };
        let mm = characterize_gates(&model, &basis.unitaries, shots, rng::derive(seed, &format!("{label}/gates")))?;
        let gap = markov_gap(&ds, &split, &mm, plan.markov.bootstrap_resamples, rng::derive(seed, &label))?;
        let payload = MarkovPayload {
            scenario: if label == "plan" { scenario_label(cfg.env_init, cfg.env_reset) } else { label.clone() },
            env_init: cfg.env_init,
            env_reset: cfg.env_reset,
            shots_per_setting: shots,
            median_gap: gap.median_gap(),
            intervals_overlap: gap.intervals_overlap(),
            gap,
        };
        out.push(record(plan, stage, KIND_MARKOV, payload.scenario.clone(), to_value(&payload)));
    }
    Ok(out)
}

fn control_options(plan: &ExperimentPlan, seed: u64) -> ControlOptions {
    ControlOptions { restarts: plan.control.restarts, seed, ..ControlOptions::default() }
}

fn decouple(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Decouple;
    let seed = stage_seed(plan, stage);
    let c = &plan.control;
    let h = c.model.hamiltonian_matrix()?;
    let layout = DecouplingLayout { idle_before_ns: c.decoupling.idle_before_ns, idle_after_ns: c.decoupling.idle_after_ns };
    let model = decoupling_model(&h, &layout)?;
    let basis = generate_haar_basis(c.basis_size, plan.pool_seed)?.unitaries;
    let pt = decoupling_tensor(&model, &basis, c.shots, seed)?;
    let result = optimize_decoupling(&pt, &control_options(plan, seed))?.with_trajectories(
        &h,
        layout.period_ns(),
        c.decoupling.horizon_ns,
        c.decoupling.samples_per_period,
    )?;
    let payload = DecouplingPayload { layout, period_ns: layout.period_ns(), horizon_ns: c.decoupling.horizon_ns, shots: c.shots, result };
    Ok(vec![tensor_record(plan, store, stage, "decouple", c.basis_size, &pt)?, record(plan, stage, KIND_DECOUPLING, "result", to_value(&payload))])
}

fn synthesize(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Vec<Record>> {
    let stage = Stage::Synthesize;
    let seed = stage_seed(plan, stage);
    let c = &plan.control;
    let idle = c.synthesis.idle_ns;
    let model = c.model.build_with_durations(&[idle, idle])?;
    let basis = generate_haar_basis(c.basis_size, plan.pool_seed)?.unitaries;
    let pt = synthesis_tensor(&model, &basis, c.shots, seed)?;
    let alpha = c.synthesis.alpha.unwrap_or_else(|| alpha_from_seed(plan.seed));
    let sweep = synthesize_sweep(&pt, &model, alpha, &eta_grid(c.synthesis.eta_points), &control_options(plan, seed), c.shots)?;
    let payload = SynthesisPayload {
        idle_ns: idle,
        shots: c.shots,
        non_increasing: non_increasing_below(&sweep.points, sweep.achievable_unitarity, 1e-3),
        sweep,
    };
    Ok(vec![tensor_record(plan, store, stage, "synthesize", c.basis_size, &pt)?, record(plan, stage, KIND_SYNTHESIS, "sweep", to_value(&payload))])
}

/// Typed view of the stored results of one plan.
pub struct StoredResults {
    pub fidelity_tables: Vec<FidelityTable>,
    pub preparation_check: Option<PreparationCheck>,
    pub memory: Vec<MemoryPayload>,
    pub markov: Vec<MarkovPayload>,
    pub decoupling: Option<DecouplingPayload>,
    pub synthesis: Option<SynthesisPayload>,
}

impl StoredResults {
    pub fn load(plan: &ExperimentPlan, store: &ResultsStore) -> Result<Self> {
        let all = |kind: &'static str| -> Vec<&Record> { store.find(&plan.name, kind).collect() };
        let mut fidelity_tables = all(KIND_FIDELITY_TABLE).into_iter().map(Record::decode).collect::<Result<Vec<FidelityTable>>>()?;
        fidelity_tables.sort_by_key(|t| t.n);
        let mut memory = all(KIND_MEMORY_BOUND).into_iter().map(Record::decode).collect::<Result<Vec<MemoryPayload>>>()?;
        memory.sort_by_key(|m| PLACEMENTS.iter().position(|(l, _)| *l == m.placement));
        Ok(Self {
            fidelity_tables,
            preparation_check: all(KIND_PREPARATION_CHECK).first().map(|r| r.decode()).transpose()?,
            memory,
            markov: all(KIND_MARKOV).into_iter().map(Record::decode).collect::<Result<_>>()?,
            decoupling: all(KIND_DECOUPLING).first().map(|r| r.decode()).transpose()?,
            synthesis: all(KIND_SYNTHESIS).first().map(|r| r.decode()).transpose()?,
        })
    }
}
