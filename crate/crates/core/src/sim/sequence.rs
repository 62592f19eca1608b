// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::quantum::{LinearMap, QuantumChannel, UnitaryParams};

/// Where a control operation came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum StepSource {
    /// Element of the preparation set, by index.
    Preparation(usize),
    /// Element of the unitary basis or pool, by index.
    Basis(usize),
    /// Free parametrised gate.
    Free(UnitaryParams),
    /// Depolarizing barrier expressed in the unitary span.
    Barrier,
    /// Any other operation, e.g. a linear combination used in tests.
    Other,
}

/// One system-only operation.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlStep {
    pub op: LinearMap,
    pub source: StepSource,
}

impl ControlStep {
    pub fn unitary(u: &CMat, source: StepSource) -> Self {
        Self { op: LinearMap::from_unitary(u), source }
    }

    pub fn channel(ch: &QuantumChannel, source: StepSource) -> Self {
        Self { op: ch.as_map().clone(), source }
    }

    pub fn free(p: UnitaryParams) -> Self {
        Self::unitary(&p.matrix(), StepSource::Free(p))
    }

    pub fn map(op: LinearMap) -> Self {
        Self { op, source: StepSource::Other }
    }
}

/// Ordered control operations, one per time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSequence {
    pub steps: Vec<ControlStep>,
}

impl ControlSequence {
    pub fn new(steps: Vec<ControlStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Copy with step `slot` replaced.
    pub fn with_step(&self, slot: usize, step: ControlStep) -> Self {
        let mut out = self.clone();
        out.steps[slot] = step;
        out
    }
}

impl FromIterator<ControlStep> for ControlSequence {
    fn from_iter<T: IntoIterator<Item = ControlStep>>(iter: T) -> Self {
        Self { steps: iter.into_iter().collect() }
    }
}
