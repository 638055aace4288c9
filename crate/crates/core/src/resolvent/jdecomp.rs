//! The seventeen-term decomposition of the two Φ moments entering ψ_n, checked
//! against direct quadrature of Φ.

use serde::{Deserialize, Serialize};

use super::forcing::Forcing;
use super::grid::RadialGrid;
use super::{check_mode, phi_on_grid, PhiForm, ResolventOptions};
use crate::error::{Error, Result};
use crate::special::{bessel_i_scaled, bessel_k_scaled};
use crate::spectral::{mode_constants, FlowParams, SpectralPoint};
use crate::C64;

pub const J_COUNT: usize = 17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JSample {
    pub r: f64,
    /// J_1 … J_17 at r.
    pub j: Vec<C64>,
    /// (1/r)∫₁^r s²Φ ds.
    pub inner: C64,
    /// r∫_r^∞ Φ ds.
    pub outer: C64,
    pub residual_inner: f64,
    pub residual_outer: f64,
    pub residual_716: f64,
    pub residual_817: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JReport {
    pub samples: Vec<JSample>,
    pub c_coeff: C64,
    pub c_from_j: C64,
    pub residual_c: f64,
    pub max_residual: f64,
    /// Identities above `tol`: "inner", "outer", "c", "J7+J16", "J8+J17".
    pub violations: Vec<String>,
}

impl JReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn rel(a: C64, b: C64, scale: f64) -> f64 {
    if scale == 0.0 {
        (a - b).norm()
    } else {
        (a - b).norm() / scale
    }
}

struct Tables {
    a: [Vec<C64>; 4],
    b: [Vec<C64>; 4],
    c: [Vec<C64>; 4],
    k_minus: Vec<C64>,
    i_plus: Vec<C64>,
}

fn tables(params: &FlowParams, n: i32, k: C64, grid: &RadialGrid, forcing: &dyn Forcing) -> Result<(Tables, C64)> {
    let m = mode_constants(params, n)?;
    let h = 0.5 * params.delta;
    let inn = C64::new(0.0, n as f64);
    let len = grid.len();
    let z = C64::new(0.0, 0.0);
    let mut t = Tables {
        a: std::array::from_fn(|_| vec![z; len]),
        b: std::array::from_fn(|_| vec![z; len]),
        c: std::array::from_fn(|_| vec![z; len]),
        k_minus: vec![z; len],
        i_plus: vec![z; len],
    };
    for (i, &x) in grid.nodes.iter().enumerate() {
        let kz = k * x;
        let kx = bessel_k(m.xi, kz)?;
        let ix = bessel_i(m.xi, kz)?;
        let km = bessel_k(m.xi - 1.0, kz)?;
        let ip = bessel_i(m.xi + 1.0, kz)?;
        let (fr, ft) = (forcing.f_r(x), forcing.f_theta(x));
        let g1 = (m.xi + h) * ft + inn * fr;
        let g2 = (m.xi - h) * ft - inn * fr;
        let (xp, xm) = (x.powf(h), x.powf(-h));
        t.a[0][i] = xp * ix * g1;
        t.a[1][i] = x * xp * ip * ft;
        t.a[2][i] = xp * kx * g2;
        t.a[3][i] = x * xp * km * ft;
        t.b[0][i] = x * x * xm * kx;
        t.b[1][i] = x * xm * km;
        t.b[2][i] = x * x * xm * ix;
        t.b[3][i] = x * xm * ip;
        t.c[0][i] = xm * kx;
        t.c[1][i] = xm * km / x;
        t.c[2][i] = xm * ix;
        t.c[3][i] = xm * ip / x;
        t.k_minus[i] = km;
        t.i_plus[i] = ip;
    }
    Ok((t, m.xi))
}

fn bessel_k(mu: C64, z: C64) -> Result<C64> {
    Ok(bessel_k_scaled(mu, z)?.value * (-z).exp())
}

fn bessel_i(mu: C64, z: C64) -> Result<C64> {
    Ok(bessel_i_scaled(mu, z)?.value * z.exp())
}

fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Evaluates J_1 … J_17 on the grid nodes listed in `at`.
fn j_values(
    params: &FlowParams,
    n: i32,
    k: C64,
    grid: &RadialGrid,
    forcing: &dyn Forcing,
    at: &[usize],
) -> Result<Vec<Vec<C64>>> {
    let (t, xi) = tables(params, n, k, grid, forcing)?;
    let m = mode_constants(params, n)?;
    let h = 0.5 * params.delta;
    let cum = |f: &[C64]| grid.cumulative(f);
    let tail = |f: &[C64]| grid.tail(f);
    let ca: Vec<Vec<C64>> = t.a.iter().map(|f| cum(f)).collect();
    let ta: Vec<Vec<C64>> = t.a.iter().map(|f| tail(f)).collect();
    let cb: Vec<Vec<C64>> = t.b.iter().map(|f| cum(f)).collect();
    let tc: [Vec<C64>; 2] = [tail(&t.c[0]), tail(&t.c[1])];
    let cc: [Vec<C64>; 2] = [cum(&t.c[2]), cum(&t.c[3])];
    let a1b1 = cum(&mul(&t.a[0], &cb[0]));
    let a2b2 = cum(&mul(&t.a[1], &cb[1]));
    let a3b3 = cum(&mul(&t.a[2], &cb[2]));
    let a4b4 = cum(&mul(&t.a[3], &cb[3]));
    let a1c1 = tail(&mul(&t.a[0], &tc[0]));
    let a2c2 = tail(&mul(&t.a[1], &tc[1]));
    let a3c3 = tail(&mul(&t.a[2], &cc[0]));
    let a4c4 = tail(&mul(&t.a[3], &cc[1]));
    let total4 = ta[3][0];
    let i_plus_one = bessel_i(m.xi + 1.0, k)?;
    Ok(at
        .iter()
        .map(|&i| {
            let r = grid.nodes[i];
            let rh = r.powf(-h);
            let j7 = r * rh * t.k_minus[i] * ca[1][i];
            let j8 = r * rh * t.i_plus[i] * ta[3][i];
            vec![
                -(cb[0][i] * ca[0][i] - a1b1[i]) / r,
                -(xi + 1.0 - h) * (cb[1][i] * ca[1][i] - a2b2[i]) / r,
                a3b3[i] / r,
                (xi - 1.0 + h) * a4b4[i] / r,
                ta[2][i] * cb[2][i] / r,
                (xi - 1.0 + h) * ta[3][i] * cb[3][i] / r,
                j7,
                j8,
                -i_plus_one * total4 / r,
                -r * ca[0][i] * tc[0][i],
                -r * a1c1[i],
                -(xi - 1.0 - h) * r * ca[1][i] * tc[1][i],
                -(xi - 1.0 - h) * r * a2c2[i],
                r * (a3c3[i] - cc[0][i] * ta[2][i]),
                (xi + 1.0 + h) * r * (a4c4[i] - cc[1][i] * ta[3][i]),
                -j7,
                -j8,
            ]
        })
        .collect())
}

/// Direct-quadrature check of the decomposition at the given radii.
pub fn j_decomposition_check(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    r_samples: &[f64],
    tol: f64,
) -> Result<JReport> {
    params.require_stable_regime()?;
    check_mode(n, forcing)?;
    if r_samples.iter().any(|&r| !(r >= 1.0)) {
        return Err(Error::Domain("sample radii must be ≥ 1".into()));
    }
    let opts = ResolventOptions::default().with_breaks(r_samples);
    let grid = opts.plan(point, forcing)?;
    if r_samples.iter().any(|&r| r > grid.r_max()) {
        return Err(Error::Domain(format!("sample radii must not exceed R = {}", grid.r_max())));
    }
    let k = point.sqrt_lambda;
    let phi = phi_on_grid(params, point, forcing, &grid, PhiForm::Rot)?;
    let s2phi: Vec<C64> = grid.nodes.iter().zip(&phi).map(|(&x, &p)| p * x * x).collect();
    let inner = grid.cumulative(&s2phi);
    let outer = grid.tail(&phi);
    let c_coeff = outer[0];
    let mut at: Vec<usize> = r_samples
        .iter()
        .map(|&r| grid.nodes.iter().position(|&x| (x - r).abs() <= 1e-12 * r).unwrap())
        .collect();
    at.push(0);
    let js = j_values(params, n, k, &grid, forcing, &at)?;
    let c_from_j = [10, 12, 13, 14, 16].iter().map(|&l| js[at.len() - 1][l]).sum::<C64>();
    let c_scale = [10, 12, 13, 14, 16].iter().map(|&l| js[at.len() - 1][l].norm()).fold(c_coeff.norm(), f64::max);
    let residual_c = rel(c_from_j, c_coeff, c_scale);
    let mut samples = Vec::with_capacity(r_samples.len());
    for (s, &i) in at[..at.len() - 1].iter().enumerate() {
        let j = &js[s];
        let r = grid.nodes[i];
        let lhs1 = inner[i] / r;
        let lhs2 = r * outer[i];
        let sum1: C64 = j[..9].iter().sum();
        let sum2: C64 = j[9..].iter().sum();
        let sc1 = j[..9].iter().map(|v| v.norm()).fold(lhs1.norm(), f64::max);
        let sc2 = j[9..].iter().map(|v| v.norm()).fold(lhs2.norm(), f64::max);
        samples.push(JSample {
            r,
            inner: lhs1,
            outer: lhs2,
            residual_inner: rel(sum1, lhs1, sc1),
            residual_outer: rel(sum2, lhs2, sc2),
            residual_716: rel(j[6], -j[15], j[6].norm()),
            residual_817: rel(j[7], -j[16], j[7].norm()),
            j: j.clone(),
        });
    }
    let worst = |f: fn(&JSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let checks = [
        ("inner", worst(|s| s.residual_inner)),
        ("outer", worst(|s| s.residual_outer)),
        ("c", residual_c),
        ("J7+J16", worst(|s| s.residual_716)),
        ("J8+J17", worst(|s| s.residual_817)),
    ];
    let max_residual = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    let violations = checks.iter().filter(|c| !(c.1 <= tol)).map(|c| c.0.to_string()).collect();
    Ok(JReport { samples, c_coeff, c_from_j, residual_c, max_residual, violations })
}
