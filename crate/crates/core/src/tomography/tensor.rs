// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::duals::{build_duals, preparation_duals, DualSet};
use crate::linalg::{self, CMat, ZERO};
use crate::quantum::{DensityMatrix, LinearMap};
use crate::sim::ControlSequence;
use crate::{Error, Result};

/// Tolerance on the distance of a unitary-slot operation from the span of
/// the slot basis.
pub const SPAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    /// First slot acting on the fixed initial system state `|0⟩`.
    Preparation,
    /// Slot spanned by unitary operations.
    Unitary,
}

/// Basis and duals of one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotBasis {
    pub kind: SlotKind,
    /// Unitary matrices of the basis operations.
    #[serde(with = "linalg::serde_cmat_vec")]
    pub ops: Vec<CMat>,
    /// Normalised Choi states `B̂^μ`.
    #[serde(with = "linalg::serde_cmat_vec")]
    pub elements: Vec<CMat>,
    pub duals: DualSet,
}

impl SlotBasis {
    pub fn unitary(ops: &[CMat]) -> Result<Self> {
        let elements: Vec<CMat> = ops.iter().map(|u| LinearMap::from_unitary(u).choi_state()).collect();
        let duals = build_duals(&elements)?;
        Ok(Self { kind: SlotKind::Unitary, ops: ops.to_vec(), elements, duals })
    }

    /// Preparation slot for gates acting on `|0⟩`.
    pub fn preparation(ops: &[CMat]) -> Result<Self> {
        let zero = linalg::unit(2, 0, 0);
        let states: Vec<CMat> = ops.iter().map(|u| u * &zero * u.adjoint()).collect();
        let elements = ops.iter().map(|u| LinearMap::from_unitary(u).choi_state()).collect();
        let duals = preparation_duals(&states)?;
        Ok(Self { kind: SlotKind::Preparation, ops: ops.to_vec(), elements, duals })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Expansion coefficients `α^μ = tr[Â Δ^μ]` of an operation.
    pub fn coefficients(&self, op: &LinearMap) -> Result<Vec<f64>> {
        if op.dim_in != 2 || op.dim_out != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: op.dim_in });
        }
        let a = op.choi_state();
        let alpha: Vec<f64> = self.duals.duals.iter().map(|d| linalg::trace_prod(&a, d).re).collect();
        if self.kind == SlotKind::Unitary {
            let mut proj = CMat::zeros(4, 4);
            for (w, b) in alpha.iter().zip(&self.elements) {
                proj += b.scale(*w);
            }
            let resid = (proj - &a).norm();
            if resid > SPAN_TOL * a.norm().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "operation lies outside the spanned subspace (residual {resid:.3e})"
                )));
            }
        }
        Ok(alpha)
    }
}

/// Where a tensor came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Restricted process tensor in matrix form
/// `T̂ = Σ_μ (Δ_0^{μ_0} ⊗ ⋯ ⊗ Δ_{k−1}^{μ_{k−1}})ᵀ ⊗ ρ^μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessTensor {
    pub slots: Vec<SlotBasis>,
    pub out_dim: usize,
    #[serde(with = "linalg::serde_cmat")]
    pub matrix: CMat,
    #[serde(default)]
    pub provenance: Provenance,
}

/// Flat index of the basis multi-index `mu` (row-major, slot 0 slowest).
pub fn flat_index(sizes: &[usize], mu: &[usize]) -> usize {
    mu.iter().zip(sizes).fold(0, |acc, (&m, &n)| acc * n + m)
}

impl ProcessTensor {
    /// Builds the matrix form from one measured output per basis
    /// multi-index, `states[flat_index(sizes, μ)]`.
    pub fn assemble(slots: Vec<SlotBasis>, states: &[CMat]) -> Result<Self> {
        let sizes: Vec<usize> = slots.iter().map(SlotBasis::len).collect();
        let total: usize = sizes.iter().product();
        if states.len() != total {
            return Err(Error::MissingData(format!("{} of {total} basis outputs supplied", states.len())));
        }
        let out_dim = states[0].nrows();
        if states.iter().any(|s| s.nrows() != out_dim || s.ncols() != out_dim) {
            return Err(Error::DimensionMismatch { expected: out_dim, got: 0 });
        }
        let transposed: Vec<Vec<CMat>> = slots.iter().map(|s| s.duals.duals.iter().map(|d| d.transpose()).collect()).collect();
        fn build(level: usize, base: usize, sizes: &[usize], dt: &[Vec<CMat>], states: &[CMat]) -> CMat {
            if level == sizes.len() {
                return states[base].clone();
            }
            let mut acc: Option<CMat> = None;
            for (i, d) in dt[level].iter().enumerate() {
                let inner = build(level + 1, base * sizes[level] + i, sizes, dt, states);
                let term = linalg::kron(d, &inner);
                match acc.as_mut() {
                    Some(a) => *a += term,
                    None => acc = Some(term),
                }
            }
            acc.expect("non-empty slot")
        }
        let matrix = build(0, 0, &sizes, &transposed, states);
        Ok(Self { slots, out_dim, matrix, provenance: Provenance::default() })
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn steps(&self) -> usize {
        self.slots.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.slots.iter().map(SlotBasis::len).collect()
    }

    fn check_len(&self, seq: &ControlSequence) -> Result<()> {
        if seq.len() != self.slots.len() {
            return Err(Error::SlotMismatch { expected: self.slots.len(), got: seq.len() });
        }
        Ok(())
    }

    /// `tr_in[(Â ⊗ I)ᵀ T̂]` with `Â` the product of the steps' normalised
    /// Choi states. The result is not projected.
    pub fn contract(&self, seq: &ControlSequence) -> Result<CMat> {
        self.check_len(seq)?;
        for (slot, step) in self.slots.iter().zip(&seq.steps) {
            // span check
            slot.coefficients(&step.op)?;
        }
        let a = linalg::kron_all(seq.steps.iter().map(|s| s.op.choi_state()).collect::<Vec<_>>().iter());
        let din = a.nrows();
        let dout = self.out_dim;
        let mut out = CMat::zeros(dout, dout);
        for y in 0..din {
            for x in 0..din {
                let ayx = a[(y, x)];
                if ayx == ZERO {
                    continue;
                }
                for p in 0..dout {
                    for q in 0..dout {
                        out[(p, q)] += ayx * self.matrix[(y * dout + p, x * dout + q)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Contraction projected onto physical states.
    pub fn predict(&self, seq: &ControlSequence) -> Result<DensityMatrix> {
        Ok(DensityMatrix::project_physical(&self.contract(seq)?))
    }

    /// Per-slot expansion coefficients of a sequence.
    pub fn expansion_coefficients(&self, seq: &ControlSequence) -> Result<Vec<Vec<f64>>> {
        self.check_len(seq)?;
        self.slots.iter().zip(&seq.steps).map(|(s, st)| s.coefficients(&st.op)).collect()
    }
}

/// `Σ_μ Π_s α_s^{μ_s} ρ^μ`: the prediction written directly in the measured
/// basis outputs.
pub fn combine_states(coeffs: &[Vec<f64>], states: &[CMat]) -> CMat {
    let sizes: Vec<usize> = coeffs.iter().map(Vec::len).collect();
    let d = states[0].nrows();
    let mut out = CMat::zeros(d, d);
    let mut weights = vec![1.0f64];
    for c in coeffs {
        weights = weights.iter().flat_map(|w| c.iter().map(move |a| w * a)).collect();
    }
    debug_assert_eq!(weights.len(), sizes.iter().product::<usize>());
    for (w, s) in weights.iter().zip(states) {
        if *w != 0.0 {
            out += s.scale(*w);
        }
    }
    out
}

/// Caches expansion coefficients for repeated predictions of a fixed set of
/// sequences from varying basis outputs (bootstrap resamples).
#[derive(Debug, Clone)]
pub struct Predictor {
    weights: Vec<Vec<(usize, f64)>>,
}

impl Predictor {
    pub fn new(slots: &[SlotBasis], seqs: &[ControlSequence]) -> Result<Self> {
        let mut weights = Vec::with_capacity(seqs.len());
        for seq in seqs {
            if seq.len() != slots.len() {
                return Err(Error::SlotMismatch { expected: slots.len(), got: seq.len() });
            }
            let coeffs: Vec<Vec<f64>> = slots.iter().zip(&seq.steps).map(|(s, st)| s.coefficients(&st.op)).collect::<Result<_>>()?;
            let mut w = vec![1.0f64];
            for c in &coeffs {
                w = w.iter().flat_map(|x| c.iter().map(move |a| x * a)).collect();
            }
            weights.push(w.into_iter().enumerate().filter(|(_, x)| *x != 0.0).collect());
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Raw prediction for sequence `k` from basis outputs `states`.
    pub fn predict(&self, k: usize, states: &[CMat]) -> CMat {
        let d = states[0].nrows();
        let mut out = CMat::zeros(d, d);
        for &(mu, w) in &self.weights[k] {
            let s = &states[mu];
            for (o, v) in out.iter_mut().zip(s.iter()) {
                *o += v * w;
            }
        }
        out
    }
}
