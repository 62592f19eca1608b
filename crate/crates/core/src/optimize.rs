// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Derivative-free minimisation: Nelder–Mead with deterministic restarts.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    /// Standard deviation of the simplex values at convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 2000, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Objective values at or above this are infeasible.
const INFEASIBLE: f64 = 1e100;

struct Objective<'a> {
    f: RefCell<&'a mut dyn FnMut(&[f64]) -> f64>,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let v = (self.f.borrow_mut())(p);
        Ok(if v.is_finite() { v.min(INFEASIBLE) } else { INFEASIBLE })
    }
}

/// Minimises `f` from `x0` with argmin's Nelder–Mead on an axis-aligned
/// initial simplex. Non-finite objective values are treated as `+∞`, i.e.
/// infeasible.
pub fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], cfg: &NelderMeadConfig) -> Minimum {
    let mut simplex = vec![x0.to_vec()];
    for k in 0..x0.len() {
        let mut p = x0.to_vec();
        p[k] += cfg.initial_step;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(cfg.tolerance).expect("non-negative tolerance");
    let problem = Objective { f: RefCell::new(f) };
    let max_iters = cfg.max_iterations as u64;
    let infeasible = || Minimum { x: x0.to_vec(), value: f64::INFINITY, iterations: 0, evaluations: 0, converged: false };
    let Ok(res) = Executor::new(problem, solver).configure(|st| st.max_iters(max_iters)).run() else {
        return infeasible();
    };
    let state = res.state();
    let evaluations = state.get_func_counts().get("cost_count").copied().unwrap_or(0) as usize;
    let value = state.get_best_cost();
    Minimum {
        x: state.get_best_param().cloned().unwrap_or_else(|| x0.to_vec()),
        value: if value >= INFEASIBLE { f64::INFINITY } else { value },
        iterations: state.get_iter() as usize,
        evaluations,
        converged: state.get_termination_reason() == Some(&TerminationReason::SolverConverged),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub best: Minimum,
    pub restarts: usize,
    pub total_iterations: usize,
    pub total_evaluations: usize,
    /// Result of each restart, in order.
    pub minima: Vec<Minimum>,
}

/// Nelder–Mead from `restarts` deterministic starting points drawn uniformly
/// from `[lo, hi)` per coordinate, plus optional explicit starts tried first.
#[allow(clippy::too_many_arguments)]
pub fn minimize_with_restarts(
    f: &mut dyn FnMut(&[f64]) -> f64,
    dim: usize,
    bounds: (f64, f64),
    restarts: usize,
    extra_starts: &[Vec<f64>],
    seed: u64,
    cfg: &NelderMeadConfig,
) -> Result<RestartSummary> {
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();
    for r in 0..restarts {
        let mut g = rng::stream(seed, r as u64);
        starts.push((0..dim).map(|_| g.random_range(bounds.0..bounds.1)).collect());
    }
    let mut best: Option<Minimum> = None;
    let mut total_iterations = 0;
    let mut total_evaluations = 0;
    let mut minima = Vec::with_capacity(starts.len());
    for x0 in &starts {
        let m = nelder_mead(f, x0, cfg);
        total_iterations += m.iterations;
        total_evaluations += m.evaluations;
        if m.value.is_finite() && best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m.clone());
        }
        minima.push(m);
    }
    let best = best.ok_or(Error::OptimizerFailed)?;
    Ok(RestartSummary { best, restarts: starts.len(), total_iterations, total_evaluations, minima })
}
