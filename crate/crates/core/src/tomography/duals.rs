// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{MIN_BASIS, PINV_CUTOFF};
use crate::linalg::{self, c, r, CMat};
use crate::quantum::pauli;
use crate::{Error, Result};

/// Orthonormal Hermitian operator frame, `tr[Γ_j Γ_k] = δ_jk`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub elements: Vec<CMat>,
}

impl Frame {
    /// Frame derived from matrix units: `E_ii`, `(E_ij + E_ji)/√2` and
    /// `(−iE_ij + iE_ji)/√2` for `i < j`.
    pub fn matrix_units(d: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d);
        for i in 0..d {
            elements.push(linalg::unit(d, i, i));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let mut m = CMat::zeros(d, d);
                m[(i, j)] = r(s);
                m[(j, i)] = r(s);
                elements.push(m);
                let mut m = CMat::zeros(d, d);
                m[(i, j)] = c(0.0, -s);
                m[(j, i)] = c(0.0, s);
                elements.push(m);
            }
        }
        Self { elements }
    }

    /// Normalised Pauli products `P_a ⊗ P_b / 2` for `d = 4`, or `P / √2`
    /// for `d = 2`.
    pub fn pauli(d: usize) -> Self {
        let elements = match d {
            2 => (0..4).map(|a| pauli(a).scale(std::f64::consts::FRAC_1_SQRT_2)).collect(),
            4 => (0..16).map(|k| linalg::kron(&pauli(k / 4), &pauli(k % 4)).scale(0.5)).collect(),
            _ => panic!("Pauli frame only for d = 2 or 4"),
        };
        Self { elements }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Coordinates `tr[m Γ_l]` (real for Hermitian `m`).
    pub fn coordinates(&self, m: &CMat) -> Vec<f64> {
        self.elements.iter().map(|g| linalg::trace_prod(m, g).re).collect()
    }

    pub fn operator(&self, coords: &[f64]) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (g, &x) in self.elements.iter().zip(coords) {
            if x != 0.0 {
                out += g.scale(x);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMode {
    /// Linearly independent basis: `tr[B̂^i Δ^j] = δ_ij`.
    Exact,
    /// Overcomplete basis: only `Σ_i Δ^i = I` (and the projector property)
    /// is retained.
    Relaxed,
}

/// Dual operators `Δ^μ` matching a basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSet {
    #[serde(with = "linalg::serde_cmat_vec")]
    pub duals: Vec<CMat>,
    pub mode: DualMode,
    pub rank: usize,
}

fn pinv_duals(elements: &[CMat], frame: &Frame) -> (Vec<CMat>, usize) {
    let n = elements.len();
    let m = frame.elements.len();
    let mut b = CMat::zeros(n, m);
    for (i, e) in elements.iter().enumerate() {
        for (l, x) in frame.coordinates(e).into_iter().enumerate() {
            b[(i, l)] = r(x);
        }
    }
    let (f, rank) = linalg::pinv(&b, PINV_CUTOFF);
    let duals = (0..n)
        .map(|j| {
            let coords: Vec<f64> = (0..m).map(|l| f[(l, j)].re).collect();
            frame.operator(&coords)
        })
        .collect();
    (duals, rank)
}

/// Duals of the normalised Choi states `elements` of a unitary basis in the
/// matrix-unit frame.
pub fn build_duals(elements: &[CMat]) -> Result<DualSet> {
    let d = elements.first().map_or(4, |e| e.nrows());
    build_duals_in_frame(elements, &Frame::matrix_units(d))
}

pub fn build_duals_in_frame(elements: &[CMat], frame: &Frame) -> Result<DualSet> {
    let (duals, rank) = pinv_duals(elements, frame);
    if rank < MIN_BASIS {
        return Err(Error::RankDeficient { rank, required: MIN_BASIS });
    }
    let mode = if rank == elements.len() { DualMode::Exact } else { DualMode::Relaxed };
    Ok(DualSet { duals, mode, rank })
}

/// Duals for a preparation slot acting on `|0⟩`: `D^i = d·|0⟩⟨0| ⊗ σ̃^i`,
/// where the `σ̃^i` are the duals of the prepared states. Contracting any
/// preparation map `P` gives `tr[Â_P D^i] = tr[σ̃^i P(|0⟩⟨0|)]`.
pub fn preparation_duals(prepared_states: &[CMat]) -> Result<DualSet> {
    let d = prepared_states[0].nrows();
    let (state_duals, rank) = pinv_duals(prepared_states, &Frame::matrix_units(d));
    if rank < d * d {
        return Err(Error::RankDeficient { rank, required: d * d });
    }
    let mut zero = CMat::zeros(d, d);
    zero[(0, 0)] = r(d as f64);
    let duals = state_duals.iter().map(|s| linalg::kron(&zero, s)).collect();
    let mode = if rank == prepared_states.len() { DualMode::Exact } else { DualMode::Relaxed };
    Ok(DualSet { duals, mode, rank })
}
