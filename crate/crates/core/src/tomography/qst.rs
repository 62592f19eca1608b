// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::linalg::{self, CMat};
use crate::quantum::{pauli, Axis, DensityMatrix};
use crate::sim::ExperimentRecord;
use crate::{Error, Result};

/// Expectation of the Pauli string `labels` (0 = I, 1 = X, 2 = Y, 3 = Z per
/// qubit), averaged over every setting compatible with it.
pub fn pauli_expectation(record: &ExperimentRecord, labels: &[usize]) -> Result<f64> {
    let q = labels.len();
    if labels.iter().all(|&l| l == 0) {
        return Ok(1.0);
    }
    let axis_of = |l: usize| match l {
        1 => Axis::X,
        2 => Axis::Y,
        _ => Axis::Z,
    };
    let mut acc = 0.0;
    let mut hits = 0;
    for s in &record.settings {
        if s.axes.len() != q {
            return Err(Error::DimensionMismatch { expected: q, got: s.axes.len() });
        }
        let compatible = labels.iter().zip(&s.axes).all(|(&l, &a)| l == 0 || axis_of(l) == a);
        if !compatible {
            continue;
        }
        let f = s.frequencies();
        let mut e = 0.0;
        for (b, fb) in f.iter().enumerate() {
            let parity = (0..q).filter(|&k| labels[k] != 0 && (b >> (q - 1 - k)) & 1 == 1).count();
            e += if parity % 2 == 0 { *fb } else { -*fb };
        }
        acc += e;
        hits += 1;
    }
    if hits == 0 {
        return Err(Error::MissingData(format!("Pauli string {labels:?} in record {}", record.sequence_id)));
    }
    Ok(acc / hits as f64)
}

/// Linear-inversion estimate `2^{−q} Σ_P ⟨P⟩ P`.
pub fn linear_inversion(record: &ExperimentRecord) -> Result<CMat> {
    if record.shots == 0 {
        return Err(Error::ZeroShots);
    }
    let q = record.qubits();
    if q == 0 {
        return Err(Error::MissingData(format!("settings of record {}", record.sequence_id)));
    }
    if q == 1 {
        // X, Y and Z must all be present
        let e = |l| pauli_expectation(record, &[l]);
        let (x, y, z) = (e(1)?, e(2)?, e(3)?);
        return Ok(linalg::from_rows(
            2,
            &[linalg::r((1.0 + z) / 2.0), linalg::c(x / 2.0, -y / 2.0), linalg::c(x / 2.0, y / 2.0), linalg::r((1.0 - z) / 2.0)],
        ));
    }
    let d = 1usize << q;
    let mut rho = CMat::zeros(d, d);
    for code in 0..(1usize << (2 * q)) {
        let labels: Vec<usize> = (0..q).map(|k| (code >> (2 * (q - 1 - k))) & 3).collect();
        let e = pauli_expectation(record, &labels)?;
        let p = linalg::kron_all(labels.iter().map(|&l| pauli(l)).collect::<Vec<_>>().iter());
        rho += p.scale(e);
    }
    Ok(rho.unscale(d as f64))
}

/// Linear inversion followed by the eigenvalue-truncation projection onto
/// physical states.
pub fn qst_mle(record: &ExperimentRecord) -> Result<DensityMatrix> {
    let lin = linear_inversion(record)?;
    Ok(DensityMatrix::project_physical(&lin))
}
