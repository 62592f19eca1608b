// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::linalg::{self, CMat, C64};
use crate::{Error, Result};

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(with = "linalg::serde_cmat")]
    mat: CMat,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    subnormalized: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(mat: CMat) -> Result<Self> {
        Self::check(&mat, false)?;
        Ok(Self { mat, subnormalized: false })
    }

    /// Like [`DensityMatrix::new`] but allows trace in `[0, 1]`.
    pub fn new_subnormalized(mat: CMat) -> Result<Self> {
        Self::check(&mat, true)?;
        Ok(Self { mat, subnormalized: true })
    }

    fn check(mat: &CMat, sub: bool) -> Result<()> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let herm = linalg::hermiticity_error(mat);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace().re;
        if sub {
            if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
                return Err(Error::BadTrace(tr));
            }
        } else if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        let min = linalg::eigvalsh(mat)[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// Wraps a matrix produced by a trusted physical computation; only the
    /// Hermitian part is kept.
    pub(crate) fn from_trusted(mat: CMat) -> Self {
        Self { mat: linalg::hermitian_part(&mat), subnormalized: false }
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let scaled: Vec<C64> = psi.iter().map(|x| x / norm.sqrt()).collect();
        Ok(Self::from_trusted(linalg::outer(&scaled, &scaled)))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self::from_trusted(linalg::unit(dim, k, k))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(linalg::identity(dim).unscale(dim as f64))
    }

    /// Qubit state from a Bloch vector of norm at most one.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let m = linalg::from_rows(
            2,
            &[
                linalg::r((1.0 + z) / 2.0),
                linalg::c(x / 2.0, -y / 2.0),
                linalg::c(x / 2.0, y / 2.0),
                linalg::r((1.0 - z) / 2.0),
            ],
        );
        Self::new(m)
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> [f64; 3] {
        assert_eq!(self.dim(), 2, "bloch vector needs a qubit");
        let m = &self.mat;
        [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_trusted(linalg::kron(&self.mat, &other.mat))
    }

    /// Reduced state on factor `keep` of a multipartite state.
    pub fn partial_trace(&self, keep: usize, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: total });
        }
        if keep >= dims.len() {
            return Err(Error::InvalidArgument(format!("subsystem {keep} out of range")));
        }
        let mut out = Self::from_trusted(linalg::partial_trace(&self.mat, dims, &[keep]));
        out.subnormalized = self.subnormalized;
        Ok(out)
    }

    /// Projection onto the closest physical state in the sense of the
    /// eigenvalue-truncation maximum-likelihood estimator: eigenvalues are
    /// shifted and clamped so that they are non-negative and sum to one.
    pub fn project_physical(m: &CMat) -> Self {
        if m.nrows() == 2 {
            return Self::project_qubit(m);
        }
        let (vals, vecs) = linalg::eigh(m);
        let lam = simplex_project(&vals, 1.0);
        let n = m.nrows();
        let mut scaled = vecs.clone();
        for k in 0..n {
            for i in 0..n {
                scaled[(i, k)] *= lam[k];
            }
        }
        Self::from_trusted(scaled * vecs.adjoint())
    }
}

impl DensityMatrix {
    // closed form of the same rule for qubits: the Bloch vector is kept if it
    // lies in the unit ball and normalised otherwise
    fn project_qubit(m: &CMat) -> Self {
        let x = (m[(0, 1)].re + m[(1, 0)].re) / 2.0;
        let y = (m[(1, 0)].im - m[(0, 1)].im) / 2.0;
        let z = (m[(0, 0)].re - m[(1, 1)].re) / 2.0;
        let (mut bx, mut by, mut bz) = (2.0 * x, 2.0 * y, 2.0 * z);
        let norm = (bx * bx + by * by + bz * bz).sqrt();
        if norm > 1.0 {
            bx /= norm;
            by /= norm;
            bz /= norm;
        }
        let mat = linalg::from_rows(
            2,
            &[
                linalg::r((1.0 + bz) / 2.0),
                linalg::c(bx / 2.0, -by / 2.0),
                linalg::c(bx / 2.0, by / 2.0),
                linalg::r((1.0 - bz) / 2.0),
            ],
        );
        Self { mat, subnormalized: false }
    }
}

/// Euclidean projection of `vals` onto `{λ ≥ 0, Σλ = total}`. Implements the
/// shift-and-clamp rule: working from the smallest value, negative weight is
/// zeroed and its deficit spread evenly over the remaining values.
pub fn simplex_project(vals: &[f64], total: f64) -> Vec<f64> {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let sorted: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    // largest k with sorted[k-1] - (Σ_{<k} - total)/k > 0
    let mut cum = 0.0;
    let mut shift = 0.0;
    for k in 0..n {
        cum += sorted[k];
        let t = (cum - total) / (k + 1) as f64;
        if sorted[k] - t > 0.0 {
            shift = t;
        }
    }
    vals.iter().map(|&v| (v - shift).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_negative() {
        let m = linalg::identity(2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::BadTrace(_))));
        let m = linalg::from_rows(2, &[linalg::r(1.5), linalg::r(0.0), linalg::r(0.0), linalg::r(-0.5)]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn subnormalized_allows_small_trace() {
        let m = linalg::unit(2, 0, 0).scale(0.4);
        assert!(DensityMatrix::new(m.clone()).is_err());
        assert!(DensityMatrix::new_subnormalized(m).unwrap().is_subnormalized());
    }

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(simplex_project(&[0.7, 0.3], 1.0), vec![0.7, 0.3]);
        let p = simplex_project(&[1.2, -0.2], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let p = simplex_project(&[0.6, 0.5, -0.1], 1.0);
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12 && p[2] == 0.0);
    }

    #[test]
    fn qubit_projection_matches_eigen_route() {
        let cases = [[0.3, -0.2, 0.4, 1.0], [1.1, 0.5, -0.3, 1.0], [0.2, 0.1, 0.0, 0.9], [0.0, 0.0, 2.0, 1.2]];
        for [x, y, z, t] in cases {
            let m = linalg::from_rows(
                2,
                &[linalg::r((t + z) / 2.0), linalg::c(x / 2.0, -y / 2.0), linalg::c(x / 2.0, y / 2.0), linalg::r((t - z) / 2.0)],
            );
            let fast = DensityMatrix::project_physical(&m);
            let (vals, vecs) = linalg::eigh(&m);
            let lam = simplex_project(&vals, 1.0);
            let d = nalgebra::DVector::from_iterator(2, lam.iter().map(|&l| linalg::r(l)));
            let slow = &vecs * CMat::from_diagonal(&d) * vecs.adjoint();
            assert!(linalg::max_abs_diff(fast.matrix(), &slow) < 1e-12);
        }
    }

    #[test]
    fn bloch_round_trip() {
        let s = DensityMatrix::from_bloch(0.3, -0.4, 0.5).unwrap();
        let b = s.bloch();
        assert!((b[0] - 0.3).abs() < 1e-15 && (b[1] + 0.4).abs() < 1e-15 && (b[2] - 0.5).abs() < 1e-15);
    }
}
