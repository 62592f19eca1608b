// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::linalg::CMat;
use crate::quantum::{pauli, LinearMap};
use crate::sim::{ControlStep, StepSource};

/// A map written as `Σ_k w_k U_k(·)U_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanDecomposition {
    pub terms: Vec<(f64, CMat)>,
}

impl SpanDecomposition {
    pub fn map(&self) -> LinearMap {
        let maps: Vec<LinearMap> = self.terms.iter().map(|(_, u)| LinearMap::from_unitary(u)).collect();
        let weighted: Vec<(f64, &LinearMap)> = self.terms.iter().map(|(w, _)| *w).zip(&maps).collect();
        LinearMap::combination(&weighted).expect("terms share dimensions")
    }
}

/// The completely depolarizing channel `ℛ(ρ) = I/2`, written as the uniform
/// mixture of the four Pauli conjugations.
pub fn depolarizing_in_span() -> (ControlStep, SpanDecomposition) {
    let span = SpanDecomposition { terms: (0..4).map(|k| (0.25, pauli(k))).collect() };
    let step = ControlStep { op: span.map(), source: StepSource::Barrier };
    (step, span)
}
