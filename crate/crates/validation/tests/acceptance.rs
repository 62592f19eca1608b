// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. Pass a criterion number (or several)
//! to run a subset.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ptomo_cli::plan::ExperimentPlan;
use ptomo_cli::report::{write_report, REPORT_FILES};
use ptomo_cli::stages::run_plan;
use ptomo_cli::store::ResultsStore;
use ptomo_core::control::{
    alpha_from_seed, decoupling_model, decoupling_tensor, default_synthesis_surrogate, eta_grid, non_increasing_below, optimize_decoupling,
    synthesis_model, synthesis_tensor, synthesize_sweep, ControlOptions, DecouplingLayout,
};
use ptomo_core::linalg::{self, CMat};
use ptomo_core::markov::{characterize_gates, equal_budget_shots, markov_gap};
use ptomo_core::memory::{bootstrap_bound, maximize_cmi, MaximizeOptions, PLACEMENTS};
use ptomo_core::quantum::LinearMap;
use ptomo_core::rng;
use ptomo_core::sim::{exchange_zz_hamiltonian, EnvInit, SEModel, Surrogate};
use ptomo_core::stats::{self, sign_test_p_greater};
use ptomo_core::tomography::{
    build_duals, evaluate_split_states, generate_haar_basis, held_out_preparations, overlap_order, preparation_check, sequence_for_id,
    split_tensor, Dataset, DualMode, SplitPlan, POOL_SIZE,
};
use ptomo_validation::{Checklist, Outcome};

const SHOTS: u64 = 1600;
const N_DEFAULT: usize = 24;
const N_MIN: usize = 10;
const STEPS: usize = 3;
/// Bootstrap resamples for intervals of held-out statistics.
const RESAMPLES: usize = 1000;
/// Bootstrap resamples (and optimiser restarts per resample) for memory
/// bounds, each of which re-runs the optimisation.
const MEMORY_RESAMPLES: usize = 200;
const MEMORY_RESAMPLE_RESTARTS: usize = 4;
const MEMORY_RESTARTS: usize = 20;

fn coupled(env: EnvInit) -> SEModel {
    Surrogate::coupled_neighbor(env).model(STEPS).expect("surrogate builds")
}

fn pool(seed: u64) -> Vec<CMat> {
    generate_haar_basis(POOL_SIZE, seed).expect("pool").unitaries
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn exact_interpolation() -> Outcome {
    let model = coupled(EnvInit::Plus);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for seed in 1..=3 {
        let pool = pool(seed);
        let ds = Dataset::simulate(&model, &pool, None, seed).map_err(e)?;
        let states = ds.states().map_err(e)?;
        for order in [(0..POOL_SIZE).collect::<Vec<_>>(), overlap_order(&pool)] {
            let ev = evaluate_split_states(&pool, &states, &order, N_MIN).map_err(e)?;
            count += ev.fidelities.len();
            worst = ev.fidelities.iter().copied().fold(worst, f64::min);
        }
    }
    Ok((worst >= 1.0 - 1e-9, format!("min held-out fidelity {worst:.12} over {count} predictions (3 pools, both orderings), need >= 1-1e-9")))
}

fn shot_noise() -> Outcome {
    let model = coupled(EnvInit::Plus);
    let (mut med, mut mean24, mut mean10) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 1..=5u64 {
        let pool = pool(seed);
        let order = overlap_order(&pool);
        let ds = Dataset::simulate(&model, &pool, Some(SHOTS), rng::derive(seed, "data")).map_err(e)?;
        let states = ds.states().map_err(e)?;
        let a = evaluate_split_states(&pool, &states, &order, N_DEFAULT).map_err(e)?;
        let b = evaluate_split_states(&pool, &states, &order, N_MIN).map_err(e)?;
        med.push(1.0 - a.summary.median);
        mean24.push(a.mean_infidelity);
        mean10.push(b.mean_infidelity);
    }
    let (m, a, b) = (stats::mean(&med), stats::mean(&mean24), stats::mean(&mean10));
    let per_seed = mean24.iter().zip(&mean10).filter(|(x, y)| x < y).count();
    Ok((
        m <= 5e-3 && a < b,
        format!("5 seeds: median infidelity n=24 {m:.2e} (<= 5e-3); mean infidelity n=24 {a:.2e} vs n=10 {b:.2e} (lower in {per_seed}/5 seeds)"),
    ))
}

fn ordering_benefit() -> Outcome {
    let model = coupled(EnvInit::Plus);
    let pools = 40u64;
    let mut wins = 0;
    let (mut ordered, mut raw) = (Vec::new(), Vec::new());
    for p in 0..pools {
        let pool = pool(100 + p);
        let ds = Dataset::simulate(&model, &pool, Some(SHOTS), p).map_err(e)?;
        let states = ds.states().map_err(e)?;
        let a = evaluate_split_states(&pool, &states, &(0..POOL_SIZE).collect::<Vec<_>>(), N_MIN).map_err(e)?;
        let b = evaluate_split_states(&pool, &states, &overlap_order(&pool), N_MIN).map_err(e)?;
        wins += usize::from(b.summary.mean >= a.summary.mean);
        ordered.push(b.summary.mean);
        raw.push(a.summary.mean);
    }
    let p = sign_test_p_greater(wins, pools as usize);
    let (mo, mr) = (stats::mean(&ordered), stats::mean(&raw));
    Ok((
        p < 0.05 && mo >= mr,
        format!("{pools} pools, n=10: ordered wins {wins}/{pools}, one-sided sign test p = {p:.3}; mean fidelity ordered {mo:.4} vs unordered {mr:.4}"),
    ))
}

fn duality() -> Outcome {
    let choi = |us: &[CMat]| us.iter().map(|u| LinearMap::from_unitary(u).choi_state()).collect::<Vec<_>>();
    let mut biorth: f64 = 0.0;
    let mut sum_dev: f64 = 0.0;
    for seed in 0..5 {
        let el = choi(&generate_haar_basis(N_MIN, seed).map_err(e)?.unitaries);
        let ds = build_duals(&el).map_err(e)?;
        if ds.mode != DualMode::Exact {
            return Ok((false, format!("seed {seed}: minimal basis gave {:?} duals", ds.mode)));
        }
        for (i, b) in el.iter().enumerate() {
            for (j, d) in ds.duals.iter().enumerate() {
                biorth = biorth.max((linalg::trace_prod(b, d).re - f64::from(u8::from(i == j))).abs());
            }
        }
        for n in [N_DEFAULT, POOL_SIZE] {
            let ds = build_duals(&choi(&generate_haar_basis(n, seed).map_err(e)?.unitaries)).map_err(e)?;
            if ds.mode != DualMode::Relaxed {
                return Ok((false, format!("seed {seed}, n={n}: overcomplete basis gave {:?} duals", ds.mode)));
            }
            let mut sum = CMat::zeros(4, 4);
            for d in &ds.duals {
                sum += d;
            }
            sum_dev = sum_dev.max(linalg::max_abs_diff(&sum, &linalg::identity(4)));
        }
    }
    let model = coupled(EnvInit::Plus);
    let pool = pool(4);
    let order = overlap_order(&pool);
    let ds = Dataset::simulate(&model, &pool, None, 4).map_err(e)?;
    let states = ds.states().map_err(e)?;
    let pt = split_tensor(&pool, &states, &order, N_MIN).map_err(e)?;
    let plan = SplitPlan::new(&pool, &order, N_MIN).map_err(e)?;
    let mut contract: f64 = 0.0;
    for &id in &plan.train_ids {
        let got = pt.contract(&sequence_for_id(&pool, id)).map_err(e)?;
        contract = contract.max(linalg::max_abs_diff(&got, &states[id as usize]));
    }
    Ok((
        biorth <= 1e-8 && sum_dev <= 1e-8 && contract <= 1e-9,
        format!(
            "max |tr[B^i D^j] - d_ij| {biorth:.1e}; max |sum D - I| {sum_dev:.1e}; max contraction error over {} basis sequences {contract:.1e}",
            plan.train_ids.len()
        ),
    ))
}

/// Bound in bits with its 95% basic bootstrap interval.
type Bound = (f64, (f64, f64));

/// Bounds for the three placements.
fn memory_bounds(model: &SEModel, pool: &[CMat], shots: Option<u64>, seed: u64) -> Result<Vec<Bound>, String> {
    let order = overlap_order(pool);
    let ds = Dataset::simulate(model, pool, shots, seed).map_err(e)?;
    let states = ds.states().map_err(e)?;
    let pt = split_tensor(pool, &states, &order, N_DEFAULT).map_err(e)?;
    let split = SplitPlan::new(pool, &order, N_DEFAULT).map_err(e)?;
    let mut out = Vec::new();
    for (k, slots) in PLACEMENTS.iter().enumerate() {
        let opts = MaximizeOptions { restarts: MEMORY_RESTARTS, seed: rng::derive(seed, &format!("placement {k}")), ..MaximizeOptions::default() };
        let b = maximize_cmi(&pt, slots, &opts).map_err(e)?;
        let ci = match shots {
            Some(_) => bootstrap_bound(&ds, &split, &b, MEMORY_RESAMPLES, MEMORY_RESAMPLE_RESTARTS, rng::derive(seed, &format!("bootstrap {k}"))).map_err(e)?,
            None => (b.cmi_bits, b.cmi_bits),
        };
        out.push((b.cmi_bits, ci));
    }
    Ok(out)
}

fn memory_detection() -> Outcome {
    let pool = pool(7);
    let fmt = |v: &[Bound]| v.iter().map(|(b, (l, h))| format!("{b:.2e} [{l:.1e}, {h:.1e}]")).collect::<Vec<_>>().join(", ");

    let reset = Surrogate::coupled_neighbor(EnvInit::Plus).with_reset(true).model(STEPS).map_err(e)?;
    let markovian = memory_bounds(&reset, &pool, Some(SHOTS), 11)?;
    let a = markovian.iter().all(|(b, (l, h))| *b <= 2e-2 && *l <= 0.0 && 0.0 <= *h);

    let swap = memory_bounds(&SEModel::swap_memory().map_err(e)?, &pool, None, 12)?;
    let b = swap[0].0 >= 0.9;

    let plus = memory_bounds(&coupled(EnvInit::Plus), &pool, Some(SHOTS), 13)?;
    let zero = memory_bounds(&coupled(EnvInit::Zero), &pool, Some(SHOTS), 13)?;
    let best = |v: &[Bound]| v.iter().map(|x| x.0).fold(0.0, f64::max);
    let c = best(&plus) >= best(&zero);
    Ok((
        a && b && c,
        format!(
            "(a) reset, slots 1/2/both: {} [{}]; (b) SWAP single barrier {:.4} bits [{}]; (c) best bound plus {:.2e} vs zero {:.2e} [{}]",
            fmt(&markovian),
            if a { "ok" } else { "fail" },
            swap[0].0,
            if b { "ok" } else { "fail" },
            best(&plus),
            best(&zero),
            if c { "ok" } else { "fail" }
        ),
    ))
}

fn markov_gap_check() -> Outcome {
    let pool = pool(7);
    let order = overlap_order(&pool);
    let split = SplitPlan::new(&pool, &order, N_DEFAULT).map_err(e)?;
    let mut parts = Vec::new();
    let mut results = Vec::new();
    for (label, model) in [("plus", coupled(EnvInit::Plus)), ("reset", Surrogate::coupled_neighbor(EnvInit::Plus).with_reset(true).model(STEPS).map_err(e)?)] {
        let seed = rng::derive(21, label);
        let ds = Dataset::simulate(&model, &pool, Some(SHOTS), seed).map_err(e)?;
        let shots = equal_budget_shots(&model, POOL_SIZE, SHOTS);
        let mm = characterize_gates(&model, &pool, Some(shots), rng::derive(seed, "gates")).map_err(e)?;
        let gap = markov_gap(&ds, &split, &mm, RESAMPLES, seed).map_err(e)?;
        parts.push(format!(
            "{label}: tensor {:.4} [{:.4}, {:.4}] markov {:.4} [{:.4}, {:.4}] gap {:.2} pp",
            gap.comparison.tensor.median,
            gap.tensor_median_ci.0,
            gap.tensor_median_ci.1,
            gap.comparison.markov.median,
            gap.markov_median_ci.0,
            gap.markov_median_ci.1,
            100.0 * gap.median_gap()
        ));
        results.push((gap.median_gap(), gap.intervals_overlap()));
    }
    let pass = results[0].0 >= 0.005 && !results[0].1 && results[1].1;
    Ok((pass, parts.join("; ")))
}

fn decoupling() -> Outcome {
    let s = Surrogate::exchange(EnvInit::Plus);
    let h = exchange_zz_hamiltonian(s.exchange_khz, s.zz_khz);
    let layout = DecouplingLayout::default();
    let model = decoupling_model(&h, &layout).map_err(e)?;
    let basis = generate_haar_basis(N_DEFAULT, 7).map_err(e)?.unitaries;
    let pt = decoupling_tensor(&model, &basis, None, 7).map_err(e)?;
    let res = optimize_decoupling(&pt, &ControlOptions { seed: 7, ..ControlOptions::default() })
        .and_then(|r| r.with_trajectories(&h, layout.period_ns(), 30_000.0, 16))
        .map_err(e)?;
    let (idle, dec) = (res.idle.as_ref().ok_or("no idle trajectory")?, res.decoupled.as_ref().ok_or("no decoupled trajectory")?);
    let gain = dec.min_purity() - idle.min_purity();
    let ratio = dec.peak_negativity() / idle.peak_negativity();
    Ok((
        gain >= 0.1 && ratio <= 0.5,
        format!(
            "period {} ns, 30 us horizon: min purity {:.4} -> {:.4} (gain {gain:.3}, need >= 0.1); peak negativity {:.4} -> {:.4} (ratio {ratio:.3}, need <= 0.5)",
            layout.period_ns(),
            idle.min_purity(),
            dec.min_purity(),
            idle.peak_negativity(),
            dec.peak_negativity()
        ),
    ))
}

fn synthesis() -> Outcome {
    let model = synthesis_model(&default_synthesis_surrogate(), 800.0).map_err(e)?;
    let basis = generate_haar_basis(N_DEFAULT, 7).map_err(e)?.unitaries;
    let pt = synthesis_tensor(&model, &basis, None, 7).map_err(e)?;
    let alpha = alpha_from_seed(7);
    let sweep = synthesize_sweep(&pt, &model, alpha, &eta_grid(11), &ControlOptions { seed: 7, ..ControlOptions::default() }, None).map_err(e)?;
    let peak = sweep.peak_fidelity();
    let monotone = non_increasing_below(&sweep.points, sweep.achievable_unitarity, 0.0);
    let curve: Vec<String> = sweep.points.iter().map(|p| format!("{:.3}:{:.4}", p.target_unitarity, p.process_fidelity)).collect();
    Ok((
        peak >= 0.97 && monotone,
        format!(
            "alpha {alpha:.3}: peak fidelity {peak:.4} (need >= 0.97), achievable unitarity {:.4}, non-increasing below it: {monotone}; unitarity:fidelity {}",
            sweep.achievable_unitarity,
            curve.join(" ")
        ),
    ))
}

fn out_of_basis_preparations() -> Outcome {
    let model = coupled(EnvInit::Plus);
    let pool = pool(7);
    let order = overlap_order(&pool);
    let seed = 31;
    let ds = Dataset::simulate(&model, &pool, Some(SHOTS), seed).map_err(e)?;
    let preps = held_out_preparations(seed);
    let check = preparation_check(&model, &ds, &order, N_DEFAULT, &preps, Some(SHOTS), seed, RESAMPLES).map_err(e)?;
    Ok((
        check.overlap(),
        format!(
            "{} preparations: in-basis mean fidelity CI [{:.4}, {:.4}], out-of-basis [{:.4}, {:.4}]",
            preps.len(),
            check.in_basis_ci.0,
            check.in_basis_ci.1,
            check.out_of_basis_ci.0,
            check.out_of_basis_ci.1
        ),
    ))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/tests/golden")
}

fn run_golden(dir: &Path) -> Result<(), String> {
    let plan = ExperimentPlan::load(&golden_dir().join("plan.json")).map_err(e)?;
    let mut store = ResultsStore::open(dir).map_err(e)?;
    run_plan(&plan, &mut store, &plan.stages).map_err(e)?;
    write_report(&plan, &store, &dir.join("report")).map_err(e)?;
    Ok(())
}

fn dir_contents(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(e)? {
        let path = entry.map_err(e)?.path();
        if path.is_file() {
            files.push((path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).map_err(e)?));
        }
    }
    files.sort();
    Ok(files)
}

fn determinism_and_formats() -> Outcome {
    let tmp = tempfile::tempdir().map_err(e)?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_golden(&a)?;
    run_golden(&b)?;
    let mut problems = Vec::new();
    for sub in ["", "tensors", "report"] {
        if dir_contents(&a.join(sub))? != dir_contents(&b.join(sub))? {
            problems.push(format!("rerun differs in {}/", if sub.is_empty() { "." } else { sub }));
        }
    }
    let text = fs::read_to_string(a.join("store.jsonl")).map_err(e)?;
    let mut records = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(e)?;
        let keys = ["schema", "plan", "stage", "seed", "kind", "key", "payload"];
        if v["schema"] != "1.0" || !keys.iter().all(|k| v.get(k).is_some()) || v.as_object().is_none_or(|o| o.len() != keys.len()) {
            problems.push(format!("record {records} breaks the store schema"));
            break;
        }
        records += 1;
    }
    for name in REPORT_FILES {
        let want = fs::read_to_string(golden_dir().join(name)).map_err(e)?;
        if fs::read_to_string(a.join("report").join(name)).map_err(e)? != want {
            problems.push(format!("{name} differs from golden"));
        }
    }
    let head: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    if head != fs::read_to_string(golden_dir().join("store_head.jsonl")).map_err(e)? {
        problems.push("store head differs from golden".into());
    }
    let detail = if problems.is_empty() {
        format!("two runs of the golden plan byte-identical ({records} records, sidecars, report); store schema and {} golden files match", REPORT_FILES.len() + 1)
    } else {
        problems.join("; ")
    };
    Ok((problems.is_empty(), detail))
}

type Criterion = (u32, &'static str, Option<u64>, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "exact interpolation (noiseless, n=10)", Some(60), exact_interpolation),
    (2, "shot-noise characterisation (1600 shots, n=24)", Some(600), shot_noise),
    (3, "overlap-ordering benefit at n=10", None, ordering_benefit),
    (4, "duality properties", None, duality),
    (5, "memory detection", Some(900), memory_detection),
    (6, "Markov-model gap", None, markov_gap_check),
    (7, "decoupling", None, decoupling),
    (8, "non-unitary synthesis", None, synthesis),
    (9, "out-of-basis preparation check", None, out_of_basis_preparations),
    (10, "determinism and formats", None, determinism_and_formats),
];

fn main() {
    // `cargo test` forwards harness flags such as --nocapture; only bare
    // numbers select criteria.
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut list = Checklist::default();
    for (id, title, budget, body) in CRITERIA {
        if selected.is_empty() || selected.contains(&id) {
            list.run(id, title, budget.map(Duration::from_secs), body);
        }
    }
    std::process::exit(list.finish());
}
