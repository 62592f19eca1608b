// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ptomo_core::tomography::{generate_haar_basis, mean_overlaps, overlap_order, POOL_SIZE};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::plan::{ExperimentPlan, Stage};
use crate::report::write_report;
use crate::stages::{run_plan, BasisPayload, KIND_PLAN};
use crate::store::ResultsStore;

#[derive(Debug, Parser)]
#[command(name = "ptomo", version, about = "Process tensor tomography experiments on a simulated qubit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Experiment plan (JSON).
    #[arg(long)]
    pub plan: PathBuf,
    /// Output directory holding the results store.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the plan seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the shots per measurement setting.
    #[arg(long)]
    pub shots: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a Haar-random pool and write it with its overlap ordering.
    GenerateBasis {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = POOL_SIZE)]
        pool_size: usize,
    },
    /// Write the default plan as JSON.
    InitPlan {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the plan's stages (or the `--stage` ones) with prerequisites.
    RunPlan {
        #[command(flatten)]
        args: PlanArgs,
        /// Stage to run; repeatable. Defaults to the plan's list.
        #[arg(long = "stage")]
        stages: Vec<String>,
    },
    /// Held-out fidelities and bootstrap intervals per basis size.
    Evaluate(PlanArgs),
    /// Conditional-mutual-information memory bounds.
    MemoryBound(PlanArgs),
    /// Process tensor against the composable-channel Markov model.
    CompareMarkov(PlanArgs),
    /// Search for a decoupling gate and simulate its periodic application.
    OptimizeDecoupling(PlanArgs),
    /// Synthesise non-unitary targets over the η grid.
    SynthesizeGate(PlanArgs),
    /// Write CSV tables and a text summary from the store.
    Report {
        #[arg(long)]
        out: PathBuf,
        /// Plan file; defaults to the plan recorded in the store.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Report directory; defaults to `<out>/report`.
        #[arg(long)]
        report_dir: Option<PathBuf>,
    },
}

fn load_plan(args: &PlanArgs) -> Result<ExperimentPlan> {
    if !args.plan.exists() {
        return Err(CliError::io(&args.plan, std::io::Error::new(std::io::ErrorKind::NotFound, "plan file not found")));
    }
    let mut plan = ExperimentPlan::load(&args.plan)?;
    if let Some(s) = args.seed {
        plan.seed = s;
    }
    if let Some(s) = args.shots {
        plan.shots = Some(s);
    }
    plan.validate()?;
    Ok(plan)
}

fn run_stages(args: &PlanArgs, stages: &[Stage]) -> Result<()> {
    let plan = load_plan(args)?;
    let mut store = ResultsStore::open(&args.out)?;
    run_plan(&plan, &mut store, stages)
}

/// Plan stored in `store`; fails when there is none or several.
fn stored_plan(store: &ResultsStore) -> Result<ExperimentPlan> {
    let plans: Vec<_> = store.records().iter().filter(|r| r.kind == KIND_PLAN).collect();
    match plans.as_slice() {
        [] => Err(CliError::MissingStage { stage: Stage::Characterize.name().into(), needed_by: "report".into() }),
        [one] => {
            let mut v = one.payload.clone();
            v["stages"] = serde_json::json!([]);
            one.decode_value(v)
        }
        _ => Err(CliError::config("plan", "store holds several plans; pass --plan")),
    }
}

/// Writes the pool for `seed` to `<out>/basis.json` and returns the path and
/// its SHA-256.
pub fn generate_basis(seed: u64, pool_size: usize, out: &Path) -> Result<(PathBuf, String)> {
    let pool = generate_haar_basis(pool_size, seed)?.unitaries;
    let basis = BasisPayload { seed, mean_overlaps: mean_overlaps(&pool), overlap_order: overlap_order(&pool), unitaries: pool };
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("basis.json");
    let text = serde_json::to_string_pretty(&basis).expect("basis serialises") + "\n";
    fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
    Ok((path, hex::encode(Sha256::digest(text.as_bytes()))))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateBasis { seed, out, pool_size } => {
            let (path, sha) = generate_basis(seed, pool_size, &out)?;
            println!("{sha}  {}", path.display());
            Ok(())
        }
        Command::InitPlan { name, seed, out } => {
            let text = ExperimentPlan::default_plan(&name, seed).to_json() + "\n";
            fs::write(&out, text).map_err(|e| CliError::io(&out, e))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::RunPlan { args, stages } => {
            let plan = load_plan(&args)?;
            let stages = if stages.is_empty() {
                plan.stages.clone()
            } else {
                stages
                    .iter()
                    .map(|s| Stage::parse(s).ok_or_else(|| CliError::config("--stage", format!("unknown stage {s:?}"))))
                    .collect::<Result<Vec<_>>>()?
            };
            let mut store = ResultsStore::open(&args.out)?;
            run_plan(&plan, &mut store, &stages)
        }
        Command::Evaluate(args) => run_stages(&args, &[Stage::Evaluate]),
        Command::MemoryBound(args) => run_stages(&args, &[Stage::Memory]),
        Command::CompareMarkov(args) => run_stages(&args, &[Stage::Markov]),
        Command::OptimizeDecoupling(args) => run_stages(&args, &[Stage::Decouple]),
        Command::SynthesizeGate(args) => run_stages(&args, &[Stage::Synthesize]),
        Command::Report { out, plan, report_dir } => {
            if !out.join("store.jsonl").exists() {
                return Err(CliError::MissingStage { stage: Stage::Evaluate.name().into(), needed_by: "report".into() });
            }
            let store = ResultsStore::open(&out)?;
            let plan = match plan {
                Some(p) => ExperimentPlan::load(&p)?,
                None => stored_plan(&store)?,
            };
            let dir = report_dir.unwrap_or_else(|| out.join("report"));
            for p in write_report(&plan, &store, &dir)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}
