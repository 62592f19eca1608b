// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::metrics::fidelity_matrices;
use super::{DensityMatrix, PSD_TOL, TRACE_TOL};
use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result};

/// An arbitrary linear map on operators, stored by its Choi matrix
/// `C = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` with entries `C[(i·d_out + a), (j·d_out + b)]`.
///
/// Linear combinations of channels (duals, depolarizing decompositions,
/// differences) live here; [`QuantumChannel`] adds the physical checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(with = "linalg::serde_cmat")]
    pub choi: CMat,
}

impl LinearMap {
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: CMat) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.nrows() != n || choi.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: choi.nrows() });
        }
        Ok(Self { dim_in, dim_out, choi })
    }

    /// `ρ ↦ U ρ U†`.
    pub fn from_unitary(u: &CMat) -> Self {
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// `ρ ↦ Σ_k K_k ρ K_k†`; every operator is `d_out × d_in`.
    pub fn from_kraus(ops: &[CMat]) -> Self {
        let dout = ops[0].nrows();
        let din = ops[0].ncols();
        let mut choi = CMat::zeros(din * dout, din * dout);
        for k in ops {
            for i in 0..din {
                for a in 0..dout {
                    let kai = k[(a, i)];
                    if kai == ZERO {
                        continue;
                    }
                    for j in 0..din {
                        for b in 0..dout {
                            choi[(i * dout + a, j * dout + b)] += kai * k[(b, j)].conj();
                        }
                    }
                }
            }
        }
        Self { dim_in: din, dim_out: dout, choi }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_unitary(&linalg::identity(d))
    }

    /// Row-major superoperator `S[(a·d_out + b), (i·d_in + j)]`.
    pub fn superop(&self) -> CMat {
        let (din, dout) = (self.dim_in, self.dim_out);
        CMat::from_fn(dout * dout, din * din, |row, col| {
            let (a, b) = (row / dout, row % dout);
            let (i, j) = (col / din, col % din);
            self.choi[(i * dout + a, j * dout + b)]
        })
    }

    pub fn from_superop(dim_in: usize, dim_out: usize, s: &CMat) -> Result<Self> {
        if s.nrows() != dim_out * dim_out || s.ncols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_out, got: s.nrows() });
        }
        let choi = CMat::from_fn(dim_in * dim_out, dim_in * dim_out, |row, col| {
            let (i, a) = (row / dim_out, row % dim_out);
            let (j, b) = (col / dim_out, col % dim_out);
            s[(a * dim_out + b, i * dim_in + j)]
        });
        Ok(Self { dim_in, dim_out, choi })
    }

    /// Normalised Choi state `C / d_in`; this is the matrix form `Â` used by
    /// process tensors.
    pub fn choi_state(&self) -> CMat {
        self.choi.unscale(self.dim_in as f64)
    }

    /// `E(ρ)_ab = Σ_ij ρ_ij C[(i,a),(j,b)]`.
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        let (din, dout) = (self.dim_in, self.dim_out);
        assert_eq!(rho.nrows(), din, "apply: input dimension mismatch");
        let mut out = CMat::zeros(dout, dout);
        for i in 0..din {
            for j in 0..din {
                let rij = rho[(i, j)];
                if rij == ZERO {
                    continue;
                }
                for a in 0..dout {
                    for b in 0..dout {
                        out[(a, b)] += rij * self.choi[(i * dout + a, j * dout + b)];
                    }
                }
            }
        }
        out
    }

    /// Applies the map to the first factor of a `(d_in · d_env)` operator,
    /// leaving the second factor untouched.
    pub fn apply_on_first(&self, rho: &CMat, d_env: usize) -> CMat {
        let (din, dout) = (self.dim_in, self.dim_out);
        assert_eq!(rho.nrows(), din * d_env, "apply_on_first: dimension mismatch");
        let mut out = CMat::zeros(dout * d_env, dout * d_env);
        for i in 0..din {
            for j in 0..din {
                for a in 0..dout {
                    for b in 0..dout {
                        let cv = self.choi[(i * dout + a, j * dout + b)];
                        if cv == ZERO {
                            continue;
                        }
                        for e in 0..d_env {
                            for f in 0..d_env {
                                out[(a * d_env + e, b * d_env + f)] +=
                                    cv * rho[(i * d_env + e, j * d_env + f)];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `g ∘ f`: applies `f` (self) first, then `g`.
    pub fn then(&self, g: &LinearMap) -> Result<LinearMap> {
        compose(g, self)
    }

    pub fn scale(&self, k: f64) -> LinearMap {
        Self { dim_in: self.dim_in, dim_out: self.dim_out, choi: self.choi.scale(k) }
    }

    /// `Σ_k w_k E_k` over maps with matching dimensions.
    pub fn combination(terms: &[(f64, &LinearMap)]) -> Result<LinearMap> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?
            .1;
        let mut choi = CMat::zeros(first.choi.nrows(), first.choi.ncols());
        for (w, m) in terms {
            if m.dim_in != first.dim_in || m.dim_out != first.dim_out {
                return Err(Error::DimensionMismatch { expected: first.dim_in, got: m.dim_in });
            }
            choi += m.choi.scale(*w);
        }
        Ok(Self { dim_in: first.dim_in, dim_out: first.dim_out, choi })
    }

    /// `tr_out C`, which equals the identity for trace-preserving maps.
    pub fn output_trace(&self) -> CMat {
        linalg::partial_trace(&self.choi, &[self.dim_in, self.dim_out], &[0])
    }

    pub fn tp_error(&self) -> f64 {
        linalg::max_abs_diff(&self.output_trace(), &linalg::identity(self.dim_in))
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        linalg::eigvalsh(&self.choi)[0]
    }
}

/// `g ∘ f`: `f` acts first.
pub fn compose(g: &LinearMap, f: &LinearMap) -> Result<LinearMap> {
    if g.dim_in != f.dim_out {
        return Err(Error::DimensionMismatch { expected: f.dim_out, got: g.dim_in });
    }
    LinearMap::from_superop(f.dim_in, g.dim_out, &(g.superop() * f.superop()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceClass {
    Preserving,
    NonIncreasing,
}

/// A completely positive map, trace preserving or trace non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    #[serde(flatten)]
    map: LinearMap,
    pub trace_class: TraceClass,
}

impl Deref for QuantumChannel {
    type Target = LinearMap;
    fn deref(&self) -> &LinearMap {
        &self.map
    }
}

impl QuantumChannel {
    /// Validates a Choi matrix against the CP and trace conditions.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: CMat, trace_class: TraceClass) -> Result<Self> {
        Self::from_map(LinearMap::from_choi(dim_in, dim_out, choi)?, trace_class)
    }

    pub fn from_map(map: LinearMap, trace_class: TraceClass) -> Result<Self> {
        let herm = linalg::hermiticity_error(&map.choi);
        if herm > super::HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let min = map.min_choi_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotCompletelyPositive(min));
        }
        match trace_class {
            TraceClass::Preserving => {
                let err = map.tp_error();
                if err > TRACE_TOL {
                    return Err(Error::NotTracePreserving(err));
                }
            }
            TraceClass::NonIncreasing => {
                let gap = linalg::identity(map.dim_in) - map.output_trace();
                let min = linalg::eigvalsh(&gap)[0];
                if min < -TRACE_TOL {
                    return Err(Error::NotTracePreserving(-min));
                }
            }
        }
        Ok(Self { map, trace_class })
    }

    pub(crate) fn from_trusted(map: LinearMap) -> Self {
        Self { map, trace_class: TraceClass::Preserving }
    }

    pub fn from_unitary(u: &CMat) -> Self {
        Self::from_trusted(LinearMap::from_unitary(u))
    }

    pub fn from_kraus(ops: &[CMat]) -> Result<Self> {
        Self::from_map(LinearMap::from_kraus(ops), TraceClass::Preserving)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_trusted(LinearMap::identity(d))
    }

    pub fn as_map(&self) -> &LinearMap {
        &self.map
    }

    pub fn into_map(self) -> LinearMap {
        self.map
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: rho.dim() });
        }
        let out = self.apply_matrix(rho.matrix());
        match self.trace_class {
            TraceClass::Preserving => Ok(DensityMatrix::from_trusted(out)),
            TraceClass::NonIncreasing => DensityMatrix::new_subnormalized(out),
        }
    }

    /// `g ∘ f` with `f = self` acting first.
    pub fn compose(g: &QuantumChannel, f: &QuantumChannel) -> Result<QuantumChannel> {
        let map = compose(&g.map, &f.map)?;
        let class = if g.trace_class == TraceClass::Preserving && f.trace_class == TraceClass::Preserving {
            TraceClass::Preserving
        } else {
            TraceClass::NonIncreasing
        };
        Ok(Self { map, trace_class: class })
    }

    /// Normalised Choi state as a density matrix.
    pub fn choi_density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.choi_state())
    }
}

/// Uhlmann fidelity between the normalised Choi states of two trace
/// preserving maps.
pub fn process_fidelity(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(Error::DimensionMismatch { expected: a.dim_in * a.dim_out, got: b.dim_in * b.dim_out });
    }
    fidelity_matrices(&a.choi_state(), &b.choi_state())
}
