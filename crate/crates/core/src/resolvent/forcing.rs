//! Single-mode forcing fields f_n = f_r e^{inθ} e_r + f_θ e^{inθ} e_θ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::C64;

/// A mode-n forcing known pointwise.
pub trait Forcing: Sync {
    fn mode(&self) -> i32;
    fn f_r(&self, r: f64) -> C64;
    fn f_theta(&self, r: f64) -> C64;
    /// (rot f_n)_n.
    fn rot(&self, r: f64) -> C64;
    /// Interval outside which the forcing vanishes (or is negligible).
    fn support(&self) -> (f64, f64);
    /// Panel width that resolves the forcing near r.
    fn resolution(&self, r: f64) -> f64;
}

/// f = ∇^⊥(χ e^{inθ}) with χ the standard mollifier on [a, b], so that
/// div f = 0, f_r = (in/r)χ, f_θ = −χ′ and rot f = −χ″ − χ′/r + n²χ/r².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpForcing {
    pub n: i32,
    pub a: f64,
    pub b: f64,
    pub amplitude: C64,
}

/// Standard test supports.
pub const STANDARD_SUPPORTS: [(f64, f64); 3] = [(1.5, 3.0), (2.0, 6.0), (1.1, 1.6)];

impl BumpForcing {
    /// Bump with unit L² norm over the exterior disk.
    pub fn new(n: i32, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("bump forcing needs n ≠ 0".into()));
        }
        if !(1.0 <= a && a < b && b.is_finite()) {
            return Err(Error::Domain(format!("bump support [{a}, {b}] must lie in [1, ∞)")));
        }
        let raw = BumpForcing { n, a, b, amplitude: C64::new(1.0, 0.0) };
        let norm = raw.l2_norm();
        Ok(BumpForcing { amplitude: C64::new(1.0 / norm, 0.0), ..raw })
    }

    pub fn standard(n: i32) -> [BumpForcing; 3] {
        STANDARD_SUPPORTS.map(|(a, b)| BumpForcing::new(n, a, b).unwrap())
    }

    pub fn scaled(self, c: C64) -> Self {
        BumpForcing { amplitude: self.amplitude * c, ..self }
    }

    /// The complex-conjugate field, which lives in mode −n.
    pub fn conj(&self) -> Self {
        BumpForcing { n: -self.n, amplitude: self.amplitude.conj(), ..*self }
    }

    /// (χ, χ′, χ″) at r.
    pub fn profile(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.a || r >= self.b {
            return (0.0, 0.0, 0.0);
        }
        let s = 2.0 / (self.b - self.a);
        let t = s * r - (self.a + self.b) / (self.b - self.a);
        let q = 1.0 - t * t;
        let chi = (1.0 - 1.0 / q).exp();
        let p1 = -2.0 * t / (q * q);
        let p2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
        (chi, s * p1 * chi, s * s * (p2 + p1 * p1) * chi)
    }

    /// (2π ∫ (|f_r|² + |f_θ|²) r dr)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        let m = 4000;
        let h = (self.b - self.a) / m as f64;
        let mut acc = 0.0;
        for i in 1..m {
            let r = self.a + h * i as f64;
            acc += (self.f_r(r).norm_sqr() + self.f_theta(r).norm_sqr()) * r;
        }
        (2.0 * PI * acc * h).sqrt()
    }
}

impl Forcing for BumpForcing {
    fn mode(&self) -> i32 {
        self.n
    }

    fn f_r(&self, r: f64) -> C64 {
        let (chi, _, _) = self.profile(r);
        C64::new(0.0, self.n as f64 / r) * chi * self.amplitude
    }

    fn f_theta(&self, r: f64) -> C64 {
        let (_, d1, _) = self.profile(r);
        -self.amplitude * d1
    }

    fn rot(&self, r: f64) -> C64 {
        let (chi, d1, d2) = self.profile(r);
        let n2 = (self.n * self.n) as f64;
        self.amplitude * (-d2 - d1 / r + n2 * chi / (r * r))
    }

    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn resolution(&self, r: f64) -> f64 {
        if r >= self.a && r <= self.b {
            let len = self.b - self.a;
            let d = (r - self.a).min(self.b - r);
            len / 24.0 * (4.0 * d / len).clamp(0.25, 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Forcing given by samples on a Chebyshev grid, e.g. a semigroup state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledForcing {
    pub n: i32,
    pub grid: RadialGrid,
    pub f_r: Vec<C64>,
    pub f_theta: Vec<C64>,
    pub rot: Vec<C64>,
    /// Radius beyond which the samples are treated as zero.
    pub extent: f64,
}

impl SampledForcing {
    pub fn new(n: i32, grid: RadialGrid, f_r: Vec<C64>, f_theta: Vec<C64>, rot: Vec<C64>) -> Result<Self> {
        if f_r.len() != grid.len() || f_theta.len() != grid.len() || rot.len() != grid.len() {
            return Err(Error::Grid("sample counts differ from the grid".into()));
        }
        let peak = rot.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let extent = grid
            .nodes
            .iter()
            .zip(&rot)
            .rev()
            .find(|(_, v)| v.norm() > 1e-14 * peak)
            .map(|(&x, _)| x)
            .unwrap_or(1.0);
        let extent = grid.breaks[grid.breaks.partition_point(|&b| b < extent).min(grid.panels())];
        Ok(SampledForcing { n, grid, f_r, f_theta, rot, extent })
    }

    fn sample(&self, v: &[C64], r: f64) -> C64 {
        if r > self.extent {
            return C64::new(0.0, 0.0);
        }
        self.grid.interpolate(v, r).unwrap_or(C64::new(0.0, 0.0))
    }
}

impl Forcing for SampledForcing {
    fn mode(&self) -> i32 {
        self.n
    }
    fn f_r(&self, r: f64) -> C64 {
        self.sample(&self.f_r, r)
    }
    fn f_theta(&self, r: f64) -> C64 {
        self.sample(&self.f_theta, r)
    }
    fn rot(&self, r: f64) -> C64 {
        self.sample(&self.rot, r)
    }
    fn support(&self) -> (f64, f64) {
        (1.0, self.extent)
    }
    fn resolution(&self, r: f64) -> f64 {
        if r <= self.extent {
            self.grid.width_at(r).unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        }
    }
}

/// The zero field in mode n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroForcing(pub i32);

impl Forcing for ZeroForcing {
    fn mode(&self) -> i32 {
        self.0
    }
    fn f_r(&self, _: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn f_theta(&self, _: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn rot(&self, _: f64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn support(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
    fn resolution(&self, _: f64) -> f64 {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_and_divergence_free() {
        for f in BumpForcing::standard(1) {
            assert!((f.l2_norm() - 1.0).abs() < 1e-12);
            let h = 1e-5;
            for &r in &[f.a + 0.3 * (f.b - f.a), 0.5 * (f.a + f.b)] {
                // (1/r)(d/dr(r f_r) + in f_θ)
                let d = ((r + h) * f.f_r(r + h) - (r - h) * f.f_r(r - h)) / (2.0 * h);
                let div = (d + C64::new(0.0, 1.0) * f.f_theta(r)) / r;
                assert!(div.norm() < 1e-6 * f.f_r(r).norm().max(1.0));
                let rot = (((r + h) * f.f_theta(r + h) - (r - h) * f.f_theta(r - h)) / (2.0 * h)
                    - C64::new(0.0, 1.0) * f.f_r(r))
                    / r;
                assert!((rot - f.rot(r)).norm() < 1e-5 * f.rot(r).norm().max(1.0));
            }
        }
    }

    #[test]
    fn conj_flips_mode() {
        let f = BumpForcing::new(1, 1.5, 3.0).unwrap().scaled(C64::new(0.3, 0.7));
        let g = f.conj();
        assert_eq!(g.n, -1);
        assert!((g.f_r(2.0) - f.f_r(2.0).conj()).norm() < 1e-15);
        assert!((g.rot(2.2) - f.rot(2.2).conj()).norm() < 1e-13);
    }
}
