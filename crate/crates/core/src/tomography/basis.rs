// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::POOL_SIZE;
use crate::linalg::{self, c, CMat, C64};
use crate::quantum::{gates, LinearMap};
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Preparation gates `{H, S·H, I, X}` applied to `|0⟩`, giving the `+X`,
/// `+Y`, `+Z` and `−Z` eigenstates.
pub fn preparations() -> Vec<CMat> {
    vec![gates::h(), gates::s() * gates::h(), gates::id(), gates::x()]
}

/// States produced by [`preparations`] acting on `|0⟩`.
pub fn preparation_states() -> Vec<CMat> {
    let zero = linalg::unit(2, 0, 0);
    preparations().iter().map(|u| u * &zero * u.adjoint()).collect()
}

/// Haar-random `d × d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * s, im * s)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let rm = qr.r();
    for k in 0..d {
        let rkk = rm[(k, k)];
        let ph = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// Ordered set of control operations defining a restricted basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlBasis {
    #[serde(with = "linalg::serde_cmat_vec")]
    pub preparations: Vec<CMat>,
    #[serde(with = "linalg::serde_cmat_vec")]
    pub unitaries: Vec<CMat>,
    /// Position of each unitary in the originally drawn pool.
    pub pool_indices: Vec<usize>,
    pub seed: u64,
}

impl ControlBasis {
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// The first `n` unitaries.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!("cannot take {n} of {} elements", self.len())));
        }
        Ok(Self {
            preparations: self.preparations.clone(),
            unitaries: self.unitaries[..n].to_vec(),
            pool_indices: self.pool_indices[..n].to_vec(),
            seed: self.seed,
        })
    }

    /// Normalised Choi states of the unitaries.
    pub fn choi_states(&self) -> Vec<CMat> {
        self.unitaries.iter().map(|u| LinearMap::from_unitary(u).choi_state()).collect()
    }
}

/// Draws `n` Haar-random single-qubit unitaries from the stream `(seed, 0)`.
pub fn generate_haar_basis(n: usize, seed: u64) -> Result<ControlBasis> {
    if n < 1 {
        return Err(Error::InvalidArgument("basis size must be at least 1".into()));
    }
    if n > POOL_SIZE {
        return Err(Error::InvalidArgument(format!("basis size {n} exceeds the pool of {POOL_SIZE}")));
    }
    let mut g = rng::stream(seed, 0);
    let unitaries = (0..n).map(|_| haar_unitary(2, &mut g)).collect();
    Ok(ControlBasis { preparations: preparations(), unitaries, pool_indices: (0..n).collect(), seed })
}

/// Mean Hilbert–Schmidt overlap `tr[Â_i Â_j]` of each normalised Choi state
/// with the rest of the set.
pub fn mean_overlaps(unitaries: &[CMat]) -> Vec<f64> {
    let states: Vec<CMat> = unitaries.iter().map(|u| LinearMap::from_unitary(u).choi_state()).collect();
    let n = states.len();
    (0..n)
        .map(|i| {
            let total: f64 = (0..n).filter(|&j| j != i).map(|j| linalg::trace_prod(&states[i], &states[j]).re).sum();
            total / (n - 1).max(1) as f64
        })
        .collect()
}

/// Permutation sorting the unitaries from least to most mean overlap, ties
/// kept in original order.
pub fn overlap_order(unitaries: &[CMat]) -> Vec<usize> {
    let ov = mean_overlaps(unitaries);
    let mut idx: Vec<usize> = (0..unitaries.len()).collect();
    idx.sort_by(|&a, &b| ov[a].total_cmp(&ov[b]));
    idx
}

/// Reorders the basis by ascending mean overlap.
pub fn order_by_overlap(basis: &ControlBasis) -> ControlBasis {
    let perm = overlap_order(&basis.unitaries);
    ControlBasis {
        preparations: basis.preparations.clone(),
        unitaries: perm.iter().map(|&k| basis.unitaries[k].clone()).collect(),
        pool_indices: perm.iter().map(|&k| basis.pool_indices[k]).collect(),
        seed: basis.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preparations_give_pauli_eigenstates() {
        let st = preparation_states();
        let bl = |m: &CMat| [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re];
        let want = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
        for (s, w) in st.iter().zip(want) {
            let b = bl(s);
            for k in 0..3 {
                assert!((b[k] - w[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn draws_are_unitary_and_deterministic() {
        let a = generate_haar_basis(28, 11).unwrap();
        let b = generate_haar_basis(28, 11).unwrap();
        assert_eq!(a, b);
        for u in &a.unitaries {
            assert!(linalg::unitarity_error(u) < 1e-12);
        }
        assert!(generate_haar_basis(0, 1).is_err());
        assert!(generate_haar_basis(29, 1).is_err());
    }

    #[test]
    fn ordering_is_a_stable_permutation() {
        let b = generate_haar_basis(28, 5).unwrap();
        let o = order_by_overlap(&b);
        let mut idx = o.pool_indices.clone();
        idx.sort();
        assert_eq!(idx, (0..28).collect::<Vec<_>>());
        let ov = mean_overlaps(&o.unitaries);
        assert!(ov.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}
