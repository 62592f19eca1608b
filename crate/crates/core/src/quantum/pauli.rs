// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::channel::LinearMap;
use super::{gates, DensityMatrix};
use crate::linalg::{self, CMat};

/// Measurement axis of a single-qubit Pauli measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

impl Axis {
    pub fn matrix(self) -> CMat {
        match self {
            Axis::X => gates::x(),
            Axis::Y => gates::y(),
            Axis::Z => gates::z(),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: usize) -> CMat {
    match k {
        0 => gates::id(),
        1 => gates::x(),
        2 => gates::y(),
        3 => gates::z(),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// Two-outcome projective measurement along a Pauli axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliBasisSetting {
    pub axis: Axis,
    /// Projector on the +1 eigenspace.
    pub plus: DensityMatrix,
    /// Projector on the −1 eigenspace.
    pub minus: DensityMatrix,
}

impl PauliBasisSetting {
    pub fn new(axis: Axis) -> Self {
        let p = axis.matrix();
        let id = linalg::identity(2);
        Self {
            axis,
            plus: DensityMatrix::from_trusted((&id + &p).scale(0.5)),
            minus: DensityMatrix::from_trusted((&id - &p).scale(0.5)),
        }
    }

    /// Born probability of the +1 outcome, clamped to `[0, 1]`.
    pub fn prob_plus(&self, rho: &CMat) -> f64 {
        linalg::trace_prod(self.plus.matrix(), rho).re.clamp(0.0, 1.0)
    }
}

/// Pauli transfer matrix `R_ab = tr[P_a E(P_b)] / d` of a qubit map.
pub fn pauli_transfer_matrix(map: &LinearMap) -> [[f64; 4]; 4] {
    assert!(map.dim_in == 2 && map.dim_out == 2, "transfer matrix needs a qubit map");
    let mut out = [[0.0; 4]; 4];
    for b in 0..4 {
        let img = map.apply_matrix(&pauli(b));
        for (a, row) in out.iter_mut().enumerate() {
            row[b] = linalg::trace_prod(&pauli(a), &img).re / 2.0;
        }
    }
    out
}
