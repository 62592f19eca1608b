// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::channel::QuantumChannel;
use crate::linalg::{self, c, r, CMat, C64, I, ONE, ZERO};

/// Euler-angle parametrisation of a single-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct UnitaryParams {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl UnitaryParams {
    pub const fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        Self { theta, phi, lambda }
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self::new(p[0], p[1], p[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.theta, self.phi, self.lambda]
    }

    /// `[[cos(θ/2), −e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`
    pub fn matrix(&self) -> CMat {
        let (s, co) = (self.theta / 2.0).sin_cos();
        linalg::from_rows(
            2,
            &[
                r(co),
                -C64::from_polar(s, self.lambda),
                C64::from_polar(s, self.phi),
                C64::from_polar(co, self.phi + self.lambda),
            ],
        )
    }

    pub fn channel(&self) -> QuantumChannel {
        QuantumChannel::from_unitary(&self.matrix())
    }
}

/// Standard single-qubit gate matrices.
pub mod gates {
    use super::*;

    pub fn id() -> CMat {
        linalg::identity(2)
    }
    pub fn x() -> CMat {
        linalg::from_rows(2, &[ZERO, ONE, ONE, ZERO])
    }
    pub fn y() -> CMat {
        linalg::from_rows(2, &[ZERO, -I, I, ZERO])
    }
    pub fn z() -> CMat {
        linalg::from_rows(2, &[ONE, ZERO, ZERO, -ONE])
    }
    pub fn h() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        linalg::from_rows(2, &[r(s), r(s), r(s), r(-s)])
    }
    pub fn s() -> CMat {
        linalg::from_rows(2, &[ONE, ZERO, ZERO, I])
    }
    /// `exp(−iαP/2)` for a Pauli matrix `P`.
    pub fn rot(p: &CMat, alpha: f64) -> CMat {
        let (sn, co) = (alpha / 2.0).sin_cos();
        linalg::identity(2).scale(co) - p.map(|v| v * c(0.0, sn))
    }
    pub fn rx(alpha: f64) -> CMat {
        rot(&x(), alpha)
    }
    pub fn ry(alpha: f64) -> CMat {
        rot(&y(), alpha)
    }
    pub fn rz(alpha: f64) -> CMat {
        rot(&z(), alpha)
    }
    pub fn swap() -> CMat {
        let mut m = linalg::zeros(4);
        m[(0, 0)] = ONE;
        m[(1, 2)] = ONE;
        m[(2, 1)] = ONE;
        m[(3, 3)] = ONE;
        m
    }
}

/// Rotation axis `(n_x, n_y, n_z)` and angle in `[0, 2π]` of a single-qubit
/// unitary, up to global phase.
pub fn rotation_axis_angle(u: &CMat) -> ([f64; 3], f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u.map(|x| x * C64::from_polar(1.0, -det.arg() / 2.0));
    // v = c·I − i s (n·σ); choose the sign with c ≥ 0
    let mut co = (v[(0, 0)].re + v[(1, 1)].re) / 2.0;
    let mut n = [
        -(v[(0, 1)].im + v[(1, 0)].im) / 2.0,
        (v[(1, 0)].re - v[(0, 1)].re) / 2.0,
        (v[(1, 1)].im - v[(0, 0)].im) / 2.0,
    ];
    if co < 0.0 {
        co = -co;
        n.iter_mut().for_each(|x| *x = -*x);
    }
    let s = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let angle = 2.0 * s.atan2(co);
    if s < 1e-12 {
        return ([0.0, 0.0, 1.0], angle);
    }
    ([n[0] / s, n[1] / s, n[2] / s], angle)
}
