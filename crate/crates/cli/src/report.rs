// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV tables and a plain-text summary of the stored results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ptomo_core::control::Trajectory;
use ptomo_core::stats::BoxStats;

use crate::error::{CliError, Result};
use crate::plan::{ExperimentPlan, Stage};
use crate::stages::{require_stage, StoredResults};
use crate::store::ResultsStore;

pub const INFIDELITY_CSV: &str = "infidelity_vs_n.csv";
pub const BOX_STATS_CSV: &str = "box_stats.csv";
pub const MEMORY_CSV: &str = "memory_bounds.csv";
pub const MARKOV_CSV: &str = "markov_comparison.csv";
pub const DECOUPLING_CSV: &str = "decoupling_trajectories.csv";
pub const SYNTHESIS_CSV: &str = "synthesis_sweep.csv";
pub const SUMMARY_TXT: &str = "summary.txt";

/// Every file a report over all stages contains.
pub const REPORT_FILES: [&str; 7] = [INFIDELITY_CSV, BOX_STATS_CSV, MEMORY_CSV, MARKOV_CSV, DECOUPLING_CSV, SYNTHESIS_CSV, SUMMARY_TXT];

/// Fidelity-scale statistics use four decimals.
fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Small quantities (infidelities, bits) keep full precision.
fn g(x: f64) -> String {
    format!("{:e}", x + 0.0)
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

fn box_row(s: &BoxStats) -> Vec<String> {
    vec![s.n.to_string(), f4(s.mean), f4(s.median), f4(s.q1), f4(s.q3), f4(s.whisker_low), f4(s.whisker_high), f4(s.min), f4(s.max)]
}

const BOX_HEADER: [&str; 9] = ["count", "mean", "median", "q1", "q3", "whisker_low", "whisker_high", "min", "max"];

fn trajectory_rows(t: &mut Table, series: &str, tr: &Trajectory) {
    for k in 0..tr.times_ns.len() {
        t.push(vec![
            series.into(),
            tr.times_ns[k].to_string(),
            g(tr.negativity[k]),
            g(tr.mutual_information[k]),
            g(tr.purity_system[k]),
            g(tr.purity_neighbor[k]),
        ]);
    }
}

/// Writes every table the stored stages support into `dir` and returns
/// the files written. The evaluate stage is required.
pub fn write_report(plan: &ExperimentPlan, store: &ResultsStore, dir: &Path) -> Result<Vec<PathBuf>> {
    require_stage(plan, store, Stage::Evaluate, "report")?;
    let res = StoredResults::load(plan, store)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let mut summary = String::new();
    let _ = writeln!(summary, "plan: {}", plan.name);
    let _ = writeln!(summary, "seed: {}  pool seed: {}  pool size: {}  basis size: {}", plan.seed, plan.pool_seed, plan.pool_size, plan.basis_size);
    let _ = writeln!(summary, "shots: {}", plan.shots.map_or("exact".into(), |s| s.to_string()));

    let mut t = Table::new(&["n", "mean_infidelity", "ci_low", "ci_high", "median_fidelity", "heldout"]);
    for ft in &res.fidelity_tables {
        t.push(vec![ft.n.to_string(), g(ft.mean_infidelity), g(ft.ci.0), g(ft.ci.1), f4(ft.summary.median), ft.summary.n.to_string()]);
    }
    let path = dir.join(INFIDELITY_CSV);
    t.write(&path)?;
    written.push(path);
    let _ = writeln!(summary, "\nmean held-out infidelity (95% bootstrap interval)");
    for ft in &res.fidelity_tables {
        let _ = writeln!(summary, "  n={:>2}: {:.3e} [{:.3e}, {:.3e}]", ft.n, ft.mean_infidelity, ft.ci.0, ft.ci.1);
    }

    let mut header = vec!["n"];
    header.extend(BOX_HEADER);
    let mut t = Table::new(&header);
    for ft in &res.fidelity_tables {
        let mut row = vec![ft.n.to_string()];
        row.extend(box_row(&ft.summary));
        t.push(row);
    }
    let path = dir.join(BOX_STATS_CSV);
    t.write(&path)?;
    written.push(path);
    if let Some(ft) = res.fidelity_tables.iter().find(|t| t.n == plan.basis_size) {
        let s = &ft.summary;
        let _ = writeln!(summary, "\nheld-out fidelity at n={}: median {} (IQR {} to {}, whiskers {} to {})", ft.n, f4(s.median), f4(s.q1), f4(s.q3), f4(s.whisker_low), f4(s.whisker_high));
    }
    if let Some(pc) = &res.preparation_check {
        let _ = writeln!(
            summary,
            "out-of-basis preparations: in-basis interval [{:.4}, {:.4}], out-of-basis [{:.4}, {:.4}], overlap: {}",
            pc.in_basis_ci.0,
            pc.in_basis_ci.1,
            pc.out_of_basis_ci.0,
            pc.out_of_basis_ci.1,
            pc.overlap()
        );
    }

    if !res.memory.is_empty() {
        let mut t = Table::new(&["placement", "barrier_slots", "cmi_bits", "ci_low", "ci_high", "significant"]);
        let _ = writeln!(summary, "\nmemory bounds (bits, 95% interval)");
        for m in &res.memory {
            let slots: Vec<String> = m.bound.barrier_slots.iter().map(usize::to_string).collect();
            let (lo, hi) = m.bound.ci.unwrap_or((f64::NAN, f64::NAN));
            t.push(vec![m.placement.clone(), slots.join(" "), g(m.bound.cmi_bits), g(lo), g(hi), m.bound.significant().to_string()]);
            let _ = writeln!(summary, "  {:<6}: {:.3e} [{:.3e}, {:.3e}]", m.placement, m.bound.cmi_bits, lo, hi);
        }
        let path = dir.join(MEMORY_CSV);
        t.write(&path)?;
        written.push(path);
    }

    if !res.markov.is_empty() {
        let mut header = vec!["scenario", "series"];
        header.extend(BOX_HEADER);
        header.extend(["median_ci_low", "median_ci_high"]);
        let mut t = Table::new(&header);
        let _ = writeln!(summary, "\nprocess tensor vs Markov model (median held-out fidelity)");
        for m in &res.markov {
            let c = &m.gap.comparison;
            for (series, s, ci) in [
                ("tensor", &c.tensor, Some(m.gap.tensor_median_ci)),
                ("markov", &c.markov, Some(m.gap.markov_median_ci)),
                ("delta", &c.delta, None),
            ] {
                let mut row = vec![m.scenario.clone(), series.to_string()];
                row.extend(box_row(s));
                row.extend(ci.map_or([String::new(), String::new()], |(a, b)| [f4(a), f4(b)]));
                t.push(row);
            }
            let _ = writeln!(
                summary,
                "  {}: tensor {} [{}, {}], markov {} [{}, {}], gap {:.2} pp, intervals overlap: {}",
                m.scenario,
                f4(c.tensor.median),
                f4(m.gap.tensor_median_ci.0),
                f4(m.gap.tensor_median_ci.1),
                f4(c.markov.median),
                f4(m.gap.markov_median_ci.0),
                f4(m.gap.markov_median_ci.1),
                100.0 * m.median_gap,
                m.intervals_overlap
            );
        }
        let path = dir.join(MARKOV_CSV);
        t.write(&path)?;
        written.push(path);
    }

    if let Some(d) = &res.decoupling {
        let mut t = Table::new(&["series", "time_ns", "negativity", "mutual_info_bits", "purity_q1", "purity_q2"]);
        let r = &d.result;
        for (series, tr) in [("idle", &r.idle), ("decoupled", &r.decoupled), ("xy4_reference", &r.xy4)] {
            if let Some(tr) = tr {
                trajectory_rows(&mut t, series, tr);
            }
        }
        let path = dir.join(DECOUPLING_CSV);
        t.write(&path)?;
        written.push(path);
        let _ = writeln!(
            summary,
            "\ndecoupling gate: rotation by {:.4} rad about ({:.3}, {:.3}, {:.3}), objective {:.3e}{}",
            r.angle,
            r.axis[0],
            r.axis[1],
            r.axis[2],
            r.objective,
            if r.degenerate { " (degenerate: every gate is optimal)" } else { "" }
        );
        for (series, tr) in [("idle", &r.idle), ("decoupled", &r.decoupled), ("XY4 reference", &r.xy4)] {
            if let Some(tr) = tr {
                let _ = writeln!(summary, "  {series}: min purity {:.4}, peak negativity {:.4}", tr.min_purity(), tr.peak_negativity());
            }
        }
    }

    if let Some(s) = &res.synthesis {
        let mut t = Table::new(&["alpha", "eta", "unitarity", "realized_unitarity", "loss", "process_fidelity"]);
        for p in &s.sweep.points {
            t.push(vec![
                s.sweep.alpha.to_string(),
                p.target.eta.to_string(),
                f4(p.target_unitarity),
                f4(p.realized_unitarity),
                g(p.loss),
                f4(p.process_fidelity),
            ]);
        }
        let path = dir.join(SYNTHESIS_CSV);
        t.write(&path)?;
        written.push(path);
        let _ = writeln!(
            summary,
            "\nnon-unitary synthesis at alpha = {:.4}: peak process fidelity {}, achievable unitarity {}, non-increasing below it: {}",
            s.sweep.alpha,
            f4(s.sweep.peak_fidelity()),
            f4(s.sweep.achievable_unitarity),
            s.non_increasing
        );
    }

    let missing: Vec<&str> = Stage::ALL.iter().filter(|st| !crate::stages::stage_done(plan, store, **st)).map(|st| st.name()).collect();
    if !missing.is_empty() {
        let _ = writeln!(summary, "\nstages not run: {}", missing.join(", "));
    }
    let path = dir.join(SUMMARY_TXT);
    fs::write(&path, summary).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
