//! Second-order finite-difference solve of the single-mode vorticity equation,
//! used as an oracle for the explicit resolvent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::forcing::Forcing;
use super::grid::{RadialQuadrature, TrapezoidGrid};
use super::{biot_savart, check_mode, GridKind, Quantity, RadialProfile, ResolventOptions, ResolventOutput};
use crate::error::{Error, Result};
use crate::spectral::{mode_constants, FlowParams, SpectralPoint};
use crate::C64;

/// Mapped grid r = 1 + s0 (e^{βx} − 1), x uniform on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub intervals: usize,
    pub s0: f64,
    /// Outer radius; `None` uses the resolvent truncation rule.
    pub r_max: Option<f64>,
}

impl Default for FdGrid {
    fn default() -> Self {
        FdGrid { intervals: 20_000, s0: 0.5, r_max: None }
    }
}

impl FdGrid {
    pub fn refined(&self, factor: usize) -> Self {
        FdGrid { intervals: self.intervals * factor, ..*self }
    }

    pub fn nodes(&self, r_max: f64) -> Result<Vec<f64>> {
        if self.intervals < 8 || !(self.s0 > 0.0) || !(r_max > 1.0) {
            return Err(Error::Grid(format!(
                "FD grid needs ≥ 8 intervals, s0 > 0 and R > 1 (got {}, {}, {r_max})",
                self.intervals, self.s0
            )));
        }
        let beta = ((r_max - 1.0) / self.s0).ln_1p();
        let n = self.intervals;
        let mut r: Vec<f64> = (0..=n).map(|i| 1.0 + self.s0 * (beta * i as f64 / n as f64).exp_m1()).collect();
        r[0] = 1.0;
        r[n] = r_max;
        Ok(r)
    }
}

fn thomas(lower: &[C64], diag: &[C64], upper: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    let n = diag.len();
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    let mut piv = diag[0];
    if piv.norm() == 0.0 {
        return Err(Error::Grid("singular FD system".into()));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if !(piv.norm() > 0.0) {
            return Err(Error::Grid(format!("singular FD system at row {i}")));
        }
        c[i] = upper[i] / piv;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solves the vorticity equation with ω(1) = `wall`, ω′ + √λ ω = 0 at R.
fn solve_bvp(params: &FlowParams, n: i32, k: C64, r: &[f64], rho: &[C64], wall: C64) -> Result<Vec<C64>> {
    let len = r.len();
    let lambda = k * k;
    let q = C64::new((n * n) as f64, params.alpha * n as f64);
    let c1 = 1.0 + params.delta;
    let zero = C64::new(0.0, 0.0);
    let mut lo = vec![zero; len];
    let mut di = vec![zero; len];
    let mut up = vec![zero; len];
    let mut rhs = vec![zero; len];
    di[0] = C64::new(1.0, 0.0);
    rhs[0] = wall;
    for i in 1..len - 1 {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        let s = hm + hp;
        let (a2, b2, c2) = (2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s));
        let (a1, b1, c1d) = (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s));
        let w = c1 / r[i];
        lo[i] = C64::new(-a2 - w * a1, 0.0);
        di[i] = lambda + q / (r[i] * r[i]) - b2 - w * b1;
        up[i] = C64::new(-c2 - w * c1d, 0.0);
        rhs[i] = rho[i];
    }
    let h = r[len - 1] - r[len - 2];
    lo[len - 1] = C64::new(-1.0 / h, 0.0);
    di[len - 1] = 1.0 / h + k;
    thomas(&lo, &di, &up, &rhs)
}

/// FD vorticity on the mapped grid, closed by the trapezoid constraint d_n[ω] = 0.
pub fn fd_vorticity(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    grid: &FdGrid,
) -> Result<RadialProfile> {
    check_mode(n, forcing)?;
    mode_constants(params, n)?;
    let k = point.sqrt_lambda;
    let r_max = grid.r_max.unwrap_or_else(|| ResolventOptions::default().truncation_radius(k, forcing.support().1));
    let r = grid.nodes(r_max)?;
    let rho: Vec<C64> = r.iter().map(|&x| forcing.rot(x)).collect();
    let zero = vec![C64::new(0.0, 0.0); r.len()];
    let wp = solve_bvp(params, n, k, &r, &rho, C64::new(0.0, 0.0))?;
    let wh = solve_bvp(params, n, k, &r, &zero, C64::new(1.0, 0.0))?;
    let q = TrapezoidGrid(r.clone());
    let m = n.unsigned_abs() as i32;
    let weight = |w: &[C64]| -> C64 {
        let f: Vec<C64> = r.iter().zip(w).map(|(&x, &v)| v * x.powi(1 - m)).collect();
        *q.cumulative(&f).last().unwrap()
    };
    let dh = weight(&wh);
    if dh.norm() == 0.0 {
        return Err(Error::Grid("homogeneous FD solution has zero constraint weight".into()));
    }
    let t = -weight(&wp) / dh;
    let omega = wp.iter().zip(&wh).map(|(&a, &b)| a + t * b).collect();
    RadialProfile::new(r, omega, Quantity::Vorticity, GridKind::Trapezoid)
}

fn central(r: &[f64], f: &[C64]) -> Vec<C64> {
    let n = r.len();
    let mut d = vec![C64::new(0.0, 0.0); n];
    d[0] = (f[1] - f[0]) / (r[1] - r[0]);
    d[n - 1] = (f[n - 1] - f[n - 2]) / (r[n - 1] - r[n - 2]);
    for i in 1..n - 1 {
        let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
        d[i] = (f[i + 1] * (hm * hm) - f[i - 1] * (hp * hp) + f[i] * (hp * hp - hm * hm)) / (hm * hp * (hm + hp));
    }
    d
}

/// FD counterpart of [`super::resolvent_apply`]; velocity via [`biot_savart`]
/// with the trapezoid rule, norms without far-field tails.
pub fn resolvent_oracle_fd(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    grid: &FdGrid,
) -> Result<ResolventOutput> {
    params.require_stable_regime()?;
    let omega = fd_vorticity(params, n, point, forcing, grid)?;
    let ((vr, vt), d) = biot_savart(n, &omega)?;
    let r = &omega.grid;
    let inn = C64::new(0.0, n as f64);
    let (dvr, dvt) = (central(r, &vr.values), central(r, &vt.values));
    let mut v2 = Vec::with_capacity(r.len());
    let mut g2 = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let x = r[i];
        let (a, b) = (vr.values[i], vt.values[i]);
        v2.push(C64::new((a.norm_sqr() + b.norm_sqr()) * x, 0.0));
        let ang = (inn * a - b).norm_sqr() + (a + inn * b).norm_sqr();
        g2.push(C64::new((dvr[i].norm_sqr() + dvt[i].norm_sqr() + ang / (x * x)) * x, 0.0));
    }
    let q = TrapezoidGrid(r.clone());
    let total = |f: &[C64]| q.cumulative(f).last().unwrap().re;
    let noslip_defect = vr.values[0].norm() + vt.values[0].norm();
    let far: Vec<C64> = r.iter().zip(&omega.values).map(|(&x, &w)| w * x * x).collect();
    Ok(ResolventOutput {
        n,
        lambda: point.lambda,
        norm_v: (2.0 * PI * total(&v2)).sqrt(),
        norm_grad: (2.0 * PI * total(&g2)).sqrt(),
        velocity: (vr, vt),
        vorticity: omega,
        c_coeff: None,
        f_value: None,
        d_defect: d.norm(),
        noslip_defect,
        far_field: *q.cumulative(&far).last().unwrap(),
    })
}

/// Observed order log₂(‖ω_N − ω_{2N}‖ / ‖ω_{2N} − ω_{4N}‖) on the coarse nodes.
pub fn fd_convergence_order(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    base: &FdGrid,
) -> Result<f64> {
    let k = point.sqrt_lambda;
    let r_max = base.r_max.unwrap_or_else(|| ResolventOptions::default().truncation_radius(k, forcing.support().1));
    let fixed = FdGrid { r_max: Some(r_max), ..*base };
    let w1 = fd_vorticity(params, n, point, forcing, &fixed)?;
    let w2 = fd_vorticity(params, n, point, forcing, &fixed.refined(2))?;
    let w4 = fd_vorticity(params, n, point, forcing, &fixed.refined(4))?;
    let q = TrapezoidGrid(w1.grid.clone());
    let dist = |a: &RadialProfile, b: &RadialProfile, sa: usize, sb: usize| -> f64 {
        let f: Vec<C64> = w1
            .grid
            .iter()
            .enumerate()
            .map(|(i, &x)| C64::new((a.values[i * sa] - b.values[i * sb]).norm_sqr() * x, 0.0))
            .collect();
        q.cumulative(&f).last().unwrap().re.sqrt()
    };
    Ok((dist(&w1, &w2, 1, 2) / dist(&w2, &w4, 2, 4)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::ZeroForcing;

    #[test]
    fn zero_forcing_gives_zero() {
        let p = FlowParams::new(0.05, 0.02).unwrap();
        let pt = SpectralPoint::new(C64::new(0.02, 0.0)).unwrap();
        let g = FdGrid { intervals: 200, ..FdGrid::default() };
        let out = resolvent_oracle_fd(&p, 1, &pt, &ZeroForcing(1), &g).unwrap();
        assert_eq!(out.vorticity.max_abs(), 0.0);
    }

    #[test]
    fn mapped_grid_ends_exactly() {
        let r = FdGrid { intervals: 100, s0: 0.1, r_max: None }.nodes(50.0).unwrap();
        assert_eq!((r[0], r[100]), (1.0, 50.0));
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert!(r[1] - r[0] < r[100] - r[99]);
    }
}
