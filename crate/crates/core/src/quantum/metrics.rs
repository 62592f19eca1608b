// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use super::channel::QuantumChannel;
use super::pauli::pauli_transfer_matrix;
use super::{DensityMatrix, PSD_TOL};
use crate::linalg::{self, CMat};
use crate::{Error, Result};

fn same_dim(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

/// Uhlmann fidelity `[tr √(√a b √a)]²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    fidelity_matrices(a.matrix(), b.matrix())
}

/// Fidelity on raw positive matrices. For qubits the closed form
/// `tr(ab) + 2√(det a · det b)` is used.
pub fn fidelity_matrices(a: &CMat, b: &CMat) -> Result<f64> {
    same_dim(a, b)?;
    if a.nrows() == 2 {
        let det = |m: &CMat| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let (da, db) = (det(a), det(b));
        for d in [da, db] {
            if d < -PSD_TOL {
                return Err(Error::NotPositive(d));
            }
        }
        let f = linalg::trace_prod(a, b).re + 2.0 * (da.max(0.0) * db.max(0.0)).sqrt();
        return Ok(f.clamp(0.0, 1.0));
    }
    let sa = linalg::psd_sqrt(a);
    let inner = &sa * b * &sa;
    let vals = linalg::eigvalsh(&inner);
    if vals[0] < -PSD_TOL {
        return Err(Error::NotPositive(vals[0]));
    }
    let root: f64 = vals.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    linalg::trace_prod(rho.matrix(), rho.matrix()).re
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(a.matrix(), b.matrix())
}

/// `½‖a − b‖₁` via singular values.
pub fn trace_distance_matrices(a: &CMat, b: &CMat) -> Result<f64> {
    same_dim(a, b)?;
    Ok(0.5 * linalg::trace_norm(&(a - b)))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose of a two-qubit state.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    let pt = linalg::partial_transpose_second(rho.matrix(), 2, 2);
    Ok(linalg::eigvalsh(&pt).iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// Von Neumann entropy in bits.
pub fn entropy_bits(rho: &CMat) -> Result<f64> {
    let vals = linalg::eigvalsh(rho);
    if vals[0] < -PSD_TOL {
        return Err(Error::NotPositive(vals[0]));
    }
    Ok(vals.iter().filter(|&&v| v > 1e-12).map(|&v| -v * v.log2()).sum())
}

/// `S(A) + S(B) − S(AB)` in bits for a bipartite state of dims `(da, db)`.
pub fn mutual_information_state(rho: &DensityMatrix, da: usize, db: usize) -> Result<f64> {
    if da * db != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: da * db });
    }
    let m = rho.matrix();
    let ra = linalg::partial_trace(m, &[da, db], &[0]);
    let rb = linalg::partial_trace(m, &[da, db], &[1]);
    Ok((entropy_bits(&ra)? + entropy_bits(&rb)? - entropy_bits(m)?).max(0.0))
}

/// Unitarity `Σ_{a,b≥1} R_ab² / (d² − 1)` from the unital block of the
/// Pauli transfer matrix of a qubit channel.
pub fn unitarity(ch: &QuantumChannel) -> Result<f64> {
    if ch.dim_in != 2 || ch.dim_out != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: ch.dim_in.max(ch.dim_out) });
    }
    let min = ch.min_choi_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotCompletelyPositive(min));
    }
    let r = pauli_transfer_matrix(ch);
    let mut acc = 0.0;
    for row in r.iter().skip(1) {
        for v in row.iter().skip(1) {
            acc += v * v;
        }
    }
    Ok(acc / 3.0)
}
