//! Mixed-strategy equilibria M1–M3.
//!
//! Equilibrium CDFs are assembled from two kernel families:
//!
//! ```text
//! g0(p; b) = 1 + 2/K(b) · e^{−λ(b−p)},          K(b) = 3 − z1 − 2z2 − b
//! gπ(p; b) = 2λ/(p+δ) − 2λ/(b+δ) · (1−z1−b)/K(b) · e^{−λ(b−p)}
//!            − 2λ² e^{λ(p+δ)} (Ei(−λ(b+δ)) − Ei(−λ(p+δ)))
//! g(p; b, π) = g0(p; b) − π gπ(p; b)
//! h(p; a)  = 4λ e^{−λ(p−a)} − 4λ(a−δ)/(p−δ)
//!            + 4λ²(a−δ) e^{−λ(p−δ)} (Ei(λ(p−δ)) − Ei(λ(a−δ)))
//! ```
//!
//! with `δ = z2 − z1` and `λ = 1/(2(1 − z2))`. `g` solves
//! `g − g'/λ = 1 − 2π/(p+δ)²` and `h` solves `h + h'/λ = 4(a−δ)/(p−δ)²`,
//! which gives the densities without differentiating `Ei`.

mod cdf;
mod solve;

pub use cdf::{Atom, CdfSpec, Piece, Segment};
pub use solve::{
    build_mixed, side_conditions, side_margins, solve_w, solve_w_with, width_residual, MixedEquilibrium,
    WidthRoot, PRESCAN_SAMPLES,
};

use crate::error::{Error, Result};
use crate::market::LocationPair;
use crate::specfun::{ei_delta_scaled, QuadTolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixedKind {
    M1,
    M2,
    M3,
}

impl MixedKind {
    pub const ALL: [MixedKind; 3] = [MixedKind::M1, MixedKind::M2, MixedKind::M3];

    pub fn name(self) -> &'static str {
        match self {
            MixedKind::M1 => "M1",
            MixedKind::M2 => "M2",
            MixedKind::M3 => "M3",
        }
    }

    /// Upper end of the open search interval for the support width.
    pub fn width_bound(self, z: &LocationPair) -> f64 {
        match self {
            MixedKind::M1 => z.z1(),
            MixedKind::M2 | MixedKind::M3 => 1.0 - z.z1(),
        }
    }
}

/// M1 requires firm 1 left of centre and the pair straddling it, with the
/// P1 undercut condition failing.
pub fn gate_m1(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    z1 < z2 && z2 < 1.0 && z1 <= 0.5 && z1 + z2 >= 1.0 && (1.0 - z1) * (0.5 + z1 + z2) < 2.0 * z1
}

/// Shared gate of M2 and M3.
pub fn gate_m23(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    0.5 <= z1 && z1 < z2 && z2 < 1.0 && (1.0 - 2.0 * z1 + z2) * (2.0 - z2) > z2
}

pub fn in_gate(z: &LocationPair, kind: MixedKind) -> bool {
    match kind {
        MixedKind::M1 => gate_m1(z),
        MixedKind::M2 | MixedKind::M3 => gate_m23(z),
    }
}

/// Location-dependent constants shared by every kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedContext {
    z: LocationPair,
    delta: f64,
    lambda: f64,
    quad: QuadTolerance,
}

impl MixedContext {
    pub fn new(z: LocationPair) -> Result<Self> {
        Self::with_tolerance(z, QuadTolerance::default())
    }

    pub fn with_tolerance(z: LocationPair, quad: QuadTolerance) -> Result<Self> {
        let delta = z.delta();
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mixed kernels need z1 < z2, got ({}, {})",
                z.z1(),
                z.z2()
            )));
        }
        if !(z.z2() < 1.0) {
            return Err(Error::InvalidInput(format!("mixed kernels need z2 < 1, got {}", z.z2())));
        }
        Ok(Self {
            z,
            delta,
            lambda: 1.0 / (2.0 * (1.0 - z.z2())),
            quad,
        })
    }

    pub fn z(&self) -> &LocationPair {
        &self.z
    }

    pub fn z1(&self) -> f64 {
        self.z.z1()
    }

    pub fn z2(&self) -> f64 {
        self.z.z2()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn quad(&self) -> &QuadTolerance {
        &self.quad
    }

    fn k(&self, b: f64) -> Result<f64> {
        let k = 3.0 - self.z1() - 2.0 * self.z2() - b;
        if k == 0.0 {
            return Err(Error::Domain(format!("g kernel denominator vanishes at b = {b}")));
        }
        Ok(k)
    }

    pub fn eval_g0(&self, p: f64, b: f64) -> Result<f64> {
        let k = self.k(b)?;
        Ok(1.0 + 2.0 / k * (-self.lambda * (b - p)).exp())
    }

    pub fn eval_gpi(&self, p: f64, b: f64) -> Result<f64> {
        let (l, d) = (self.lambda, self.delta);
        if !(p + d > 0.0 && b + d > 0.0) {
            return Err(Error::Domain(format!("gπ needs p + δ > 0 and b + δ > 0, got p = {p}, b = {b}")));
        }
        let k = self.k(b)?;
        let bracket = ei_delta_scaled(-l * (p + d), -l * (b + d), -l * (p + d), &self.quad)?;
        Ok(2.0 * l / (p + d)
            - 2.0 * l / (b + d) * (1.0 - self.z1() - b) / k * (-l * (b - p)).exp()
            - 2.0 * l * l * bracket)
    }

    pub fn eval_g(&self, p: f64, b: f64, pi2: f64) -> Result<f64> {
        Ok(self.eval_g0(p, b)? - pi2 * self.eval_gpi(p, b)?)
    }

    /// Closed form of `g(b; b, π)`.
    pub fn g_at_top(&self, b: f64, pi2: f64) -> Result<f64> {
        let k = self.k(b)?;
        Ok(((5.0 - self.z1() - 2.0 * self.z2() - b) - 2.0 * pi2 / (b + self.delta)) / k)
    }

    pub fn eval_h(&self, p: f64, a: f64) -> Result<f64> {
        let (l, d) = (self.lambda, self.delta);
        if !(p - d > 0.0 && a - d > 0.0) {
            return Err(Error::Domain(format!("h needs p − δ > 0 and a − δ > 0, got p = {p}, a = {a}")));
        }
        let bracket = ei_delta_scaled(l * (a - d), l * (p - d), l * (p - d), &self.quad)?;
        Ok(4.0 * l * (-l * (p - a)).exp() - 4.0 * l * (a - d) / (p - d) + 4.0 * l * l * (a - d) * bracket)
    }

    pub fn density_g(&self, p: f64, b: f64, pi2: f64) -> Result<f64> {
        let g = self.eval_g(p, b, pi2)?;
        Ok(self.density_g_from(p, g, pi2))
    }

    /// `g'` given an already evaluated `g(p)`.
    pub fn density_g_from(&self, p: f64, g: f64, pi2: f64) -> f64 {
        let s = p + self.delta;
        self.lambda * (g - 1.0 + 2.0 * pi2 / (s * s))
    }

    pub fn density_h(&self, p: f64, a: f64) -> Result<f64> {
        let h = self.eval_h(p, a)?;
        Ok(self.density_h_from(p, h, a))
    }

    pub fn density_h_from(&self, p: f64, h: f64, a: f64) -> f64 {
        let s = p - self.delta;
        self.lambda * (4.0 * (a - self.delta) / (s * s) - h)
    }
}
