//! Empirical constants for the Bessel envelope inequalities: every bound is
//! evaluated with C = 1 and the observed sup of |LHS| / RHS is reported.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bessel_i_scaled, bessel_k_scaled};
use crate::error::{Error, Result};
use crate::numerics::{quad_finite_opts, quad_semi_infinite_from, CVec, Decay, QuadOptions};
use crate::spectral::{mode_constants, FlowParams};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundMarginReport {
    pub lemma_id: String,
    pub region: String,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    /// Sample attaining the sup (the inf for floor reports).
    pub worst_point: C64,
    pub samples: usize,
}

impl BoundMarginReport {
    pub fn from_samples(id: &str, region: String, ratios: &[(f64, C64)], floor: bool) -> Self {
        let mut sup = (f64::NEG_INFINITY, C64::new(0.0, 0.0));
        let mut inf = (f64::INFINITY, C64::new(0.0, 0.0));
        for &(r, z) in ratios {
            if r > sup.0 {
                sup = (r, z);
            }
            if r < inf.0 {
                inf = (r, z);
            }
        }
        BoundMarginReport {
            lemma_id: id.to_string(),
            region,
            sup_ratio: sup.0,
            inf_ratio: inf.0,
            worst_point: if floor { inf.1 } else { sup.1 },
            samples: ratios.len(),
        }
    }
}

/// Which family of envelope inequalities to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundFamily {
    /// Pointwise small/large-|z| envelopes of K_μ and I_μ.
    BesselEnvelope,
    /// Weighted integrals of |K_{ξ−k}(√λ s)| entering the velocity.
    VelocityK,
    /// Weighted integrals of |I_{ξ+k}(√λ s)| entering the velocity.
    VelocityI,
    /// Weighted integrals of |I_ξ|, |K_ξ| entering the vorticity.
    Vorticity,
}

impl std::str::FromStr for BoundFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "envelope" => Ok(BoundFamily::BesselEnvelope),
            "velocity-k" => Ok(BoundFamily::VelocityK),
            "velocity-i" => Ok(BoundFamily::VelocityI),
            "vorticity" => Ok(BoundFamily::Vorticity),
            other => Err(Error::Domain(format!("unknown bound family {other:?}"))),
        }
    }
}

/// Sample description. For the envelope family `moduli`/`args` describe z;
/// otherwise they describe λ and `positions` radii are placed per λ on
/// [1, 8/Re√λ] with 1/Re√λ always included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub moduli: Vec<f64>,
    pub args: Vec<f64>,
    pub positions: usize,
    /// Small/large split M of the pointwise envelopes.
    pub split: f64,
}

impl SampleGrid {
    pub fn geometric(lo: f64, hi: f64, n_mod: usize, arg_max: f64, n_arg: usize, positions: usize) -> Self {
        let moduli = (0..n_mod)
            .map(|i| {
                let t = if n_mod == 1 { 0.0 } else { i as f64 / (n_mod - 1) as f64 };
                lo * (hi / lo).powf(t)
            })
            .collect();
        let args = (0..n_arg)
            .map(|j| {
                let u = if n_arg == 1 { 0.5 } else { j as f64 / (n_arg - 1) as f64 };
                arg_max * (2.0 * u - 1.0)
            })
            .collect();
        SampleGrid { moduli, args, positions, split: 1.0 }
    }

    /// Same ranges with twice the density.
    pub fn refined(&self) -> Self {
        let dense = |v: &[f64], geometric: bool| {
            let mut out = Vec::with_capacity(2 * v.len());
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(if geometric { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) });
            }
            out.extend(v.last());
            out
        };
        SampleGrid {
            moduli: dense(&self.moduli, true),
            args: dense(&self.args, false),
            positions: 2 * self.positions,
            split: self.split,
        }
    }

    fn points(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.moduli.len() * self.args.len());
        for &m in &self.moduli {
            for &a in &self.args {
                out.push(C64::from_polar(m, a));
            }
        }
        out
    }
}

fn abs_k(mu: C64, z: C64) -> Result<f64> {
    Ok(bessel_k_scaled(mu, z)?.value.norm() * (-z.re).exp())
}

fn abs_i(mu: C64, z: C64) -> Result<f64> {
    Ok(bessel_i_scaled(mu, z)?.value.norm() * z.re.exp())
}

/// Pointwise envelopes of K_μ, I_μ on Σ_{π/2} split at |z| = M.
pub fn bessel_envelope_margin(mu: C64, eps: f64, grid: &SampleGrid) -> Result<Vec<BoundMarginReport>> {
    if !(mu.re > 0.0) {
        return Err(Error::Precondition(format!("Re μ > 0 required, got μ = {mu}")));
    }
    check_eps(eps, 0.5 * PI)?;
    let pts = grid.points();
    if pts.is_empty() {
        return Err(Error::Precondition("empty sample grid".into()));
    }
    if pts.iter().any(|z| !(z.re > 0.0)) {
        return Err(Error::Precondition("samples must lie in Σ_{π/2}".into()));
    }
    let m = grid.split;
    let rows: Vec<[Option<(f64, C64)>; 4]> = pts
        .par_iter()
        .map(|&z| {
            let r = z.norm();
            let k = abs_k(mu, z)?;
            let i = abs_i(mu, z)?;
            let mut row = [None; 4];
            if r < m {
                row[0] = Some((k / r.powf(-mu.re), z));
                row[2] = Some((i / r.powf(mu.re), z));
            } else {
                let env = r.powf(-0.5);
                row[1] = Some((k / (env * (-z.re).exp()), z));
                if z.arg().abs() < 0.5 * PI - eps {
                    row[3] = Some((i / (env * z.re.exp()), z));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let names = ["envelope K small-|z|", "envelope K large-|z|", "envelope I small-|z|", "envelope I large-|z|"];
    let mut out = Vec::new();
    for (c, name) in names.iter().enumerate() {
        let ratios: Vec<(f64, C64)> = rows.iter().filter_map(|row| row[c]).collect();
        if !ratios.is_empty() {
            let region = format!("μ = {mu}, M = {m}, {} points", ratios.len());
            out.push(BoundMarginReport::from_samples(name, region, &ratios, false));
        }
    }
    Ok(out)
}

fn check_eps(eps: f64, max: f64) -> Result<()> {
    if !(eps > 0.0 && eps < max) {
        return Err(Error::Precondition(format!("ε = {eps} must lie in (0, {max})")));
    }
    Ok(())
}

/// Sample all inequalities of one family; the envelope family uses μ = ξ_1.
pub fn bessel_bound_margin(
    family: BoundFamily,
    params: &FlowParams,
    eps: f64,
    grid: &SampleGrid,
) -> Result<Vec<BoundMarginReport>> {
    let mc = mode_constants(params, 1)?;
    if family == BoundFamily::BesselEnvelope {
        return bessel_envelope_margin(mc.xi, eps, grid);
    }
    if params.alpha == 0.0 || params.delta < 0.0 {
        return Err(Error::Precondition(format!(
            "(α, δ) = ({}, {}) must satisfy α ≠ 0 and δ ≥ 0",
            params.alpha, params.delta
        )));
    }
    check_eps(eps, PI)?;
    if grid.positions < 2 {
        return Err(Error::Precondition("at least two radial positions are required".into()));
    }
    let lambdas = grid.points();
    if lambdas.is_empty() {
        return Err(Error::Precondition("empty sample grid".into()));
    }
    for l in &lambdas {
        if l.norm() >= 1.0 || l.arg().abs() >= PI - eps {
            return Err(Error::Precondition(format!("λ = {l} outside Σ_{{π−ε}} ∩ {{|λ| < 1}}")));
        }
    }
    let per_lambda: Vec<Vec<Vec<f64>>> = lambdas
        .par_iter()
        .map(|&l| family_ratios(family, params, mc.xi, l, grid.positions))
        .collect::<Result<_>>()?;
    let n_items = per_lambda[0].len();
    let names = item_names(family);
    let mut out = Vec::with_capacity(n_items);
    for (c, name) in names.iter().enumerate().take(n_items) {
        let ratios: Vec<(f64, C64)> = per_lambda
            .iter()
            .zip(&lambdas)
            .flat_map(|(rows, &l)| rows[c].iter().map(move |&r| (r, l)))
            .collect();
        if !ratios.is_empty() {
            let region = format!(
                "α = {}, δ = {}, ε = {eps}, {} λ-samples × {} radii",
                params.alpha,
                params.delta,
                lambdas.len(),
                grid.positions
            );
            out.push(BoundMarginReport::from_samples(name, region, &ratios, false));
        }
    }
    Ok(out)
}

fn item_names(family: BoundFamily) -> Vec<String> {
    let (tag, items) = match family {
        BoundFamily::VelocityK => ("velocity-K", 5),
        BoundFamily::VelocityI => ("velocity-I", 5),
        BoundFamily::Vorticity => ("vorticity", 4),
        BoundFamily::BesselEnvelope => ("envelope", 0),
    };
    if family == BoundFamily::Vorticity {
        return (1..=items).map(|i| format!("{tag}({i})")).collect();
    }
    (1..=items).flat_map(|i| (0..2).map(move |k| format!("{tag}({i}) k={k}"))).collect()
}

/// Radii 1 = x_0 < … < x_{P-1} = 8ρ, ρ = 1/Re√λ, with ρ itself among them.
fn positions(rho: f64, count: usize) -> (Vec<f64>, usize) {
    let top = 8.0 * rho;
    let mut xs: Vec<f64> = (0..count)
        .map(|i| top.powf(i as f64 / (count - 1) as f64))
        .collect();
    xs.push(rho.max(1.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let irho = xs.iter().position(|&x| x >= rho.max(1.0) * (1.0 - 1e-12)).unwrap_or(0);
    (xs, irho)
}

/// Cumulative ∫_1^{x_j} and tails ∫_{x_j}^∞ of N non-negative integrands.
struct Cumulative<const N: usize> {
    head: Vec<[f64; N]>,
    tail: Vec<[f64; N]>,
}

impl<const N: usize> Cumulative<N> {
    fn build<F: Fn(f64) -> Result<[f64; N]> + Sync>(xs: &[f64], rate: Option<f64>, f: F) -> Result<Self> {
        let opts = QuadOptions::relative(1e-9).with_max_intervals(2000);
        let mut failure = None;
        let mut g = |s: f64| match f(s) {
            Ok(v) => CVec(v.map(|x| C64::new(x, 0.0))),
            Err(e) => {
                failure.get_or_insert(e);
                CVec([C64::new(0.0, 0.0); N])
            }
        };
        let mut head = vec![[0.0; N]];
        for w in xs.windows(2) {
            let r = quad_finite_opts(&mut g, w[0], w[1], &opts)?;
            let prev = *head.last().expect("nonempty");
            let mut next = prev;
            for k in 0..N {
                next[k] += r.value.0[k].re;
            }
            head.push(next);
        }
        let mut tail = vec![[0.0; N]; xs.len()];
        if let Some(rate) = rate {
            let last = *xs.last().expect("nonempty");
            let r = quad_semi_infinite_from(&mut g, last, Decay::Exponential(rate), &opts, 1.0 / rate)?;
            let total_tail: [f64; N] = std::array::from_fn(|k| r.value.0[k].re);
            let h_last = *head.last().expect("nonempty");
            for (j, t) in tail.iter_mut().enumerate() {
                for k in 0..N {
                    t[k] = h_last[k] - head[j][k] + total_tail[k];
                }
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Cumulative { head, tail })
    }

    fn between(&self, i: usize, j: usize, k: usize) -> f64 {
        self.head[j][k] - self.head[i][k]
    }
}

fn family_ratios(family: BoundFamily, params: &FlowParams, xi: C64, lambda: C64, count: usize) -> Result<Vec<Vec<f64>>> {
    let z = lambda.sqrt();
    let rho = 1.0 / z.re;
    let (xs, ir) = positions(rho, count);
    let d2 = 0.5 * params.delta;
    let la = lambda.norm();
    let rx = xi.re;
    let ez = |t: f64| (z.re * t).exp();
    let p = xs.len();
    match family {
        BoundFamily::VelocityK => {
            let c = Cumulative::<4>::build(&xs, Some(z.re), |s| {
                let k0 = abs_k(xi, z * s)?;
                let k1 = abs_k(xi - 1.0, z * s)?;
                let b = s.powf(-d2);
                Ok([s * s * b * k0, s * b * k1, b * k0, b * k1 / s])
            })?;
            let mut rows = vec![Vec::new(); 10];
            for k in 0..2 {
                let kf = k as f64;
                for i in 0..p {
                    for j in i..p {
                        let (tau, r) = (xs[i], xs[j]);
                        if j <= ir {
                            let rhs = la.powf(-rx / 2.0 + kf / 2.0) * r.powf(3.0 - rx - d2);
                            rows[k].push(c.between(i, j, k) / rhs);
                        }
                        if i <= ir && j >= ir {
                            let rhs = la.powf(-1.5 + kf / 2.0 + params.delta / 4.0);
                            rows[2 + k].push(c.between(i, j, k) / rhs);
                        }
                        if i >= ir {
                            let rhs = la.powf(-0.75) * tau.powf(1.5 - kf - d2) / ez(tau);
                            rows[4 + k].push(c.between(i, j, k) / rhs);
                        }
                    }
                    let tau = xs[i];
                    if i <= ir {
                        let rhs = la.powf(-rx / 2.0 + kf / 2.0) * tau.powf(1.0 - rx - d2);
                        rows[6 + k].push(c.tail[i][2 + k] / rhs);
                    }
                    if i >= ir {
                        let rhs = la.powf(-0.75) * tau.powf(-0.5 - kf - d2) / ez(tau);
                        rows[8 + k].push(c.tail[i][2 + k] / rhs);
                    }
                }
            }
            Ok(rows)
        }
        BoundFamily::VelocityI => {
            let c = Cumulative::<4>::build(&xs, None, |s| {
                let i0 = abs_i(xi, z * s)?;
                let i1 = abs_i(xi + 1.0, z * s)?;
                let b = s.powf(-d2);
                Ok([s * s * b * i0, s * b * i1, b * i0, b * i1 / s])
            })?;
            let mut rows = vec![Vec::new(); 10];
            for k in 0..2 {
                let kf = k as f64;
                for j in 0..p {
                    let tau = xs[j];
                    if j <= ir {
                        let rhs = la.powf(rx / 2.0 + kf / 2.0) * tau.powf(3.0 + rx - d2);
                        rows[k].push(c.between(0, j, k) / rhs);
                    }
                    if j >= ir {
                        let rhs = la.powf(-0.75) * tau.powf(1.5 - kf - d2) * ez(tau);
                        rows[2 + k].push(c.between(0, j, k) / rhs);
                    }
                    for i in 0..=j {
                        let v = c.between(i, j, 2 + k);
                        if j <= ir {
                            let rhs = la.powf(rx / 2.0 + kf / 2.0) * tau.powf(1.0 + rx - d2);
                            rows[4 + k].push(v / rhs);
                        }
                        let rhs = la.powf(-0.75) * tau.powf(-0.5 - kf - d2) * ez(tau);
                        if i <= ir && j >= ir {
                            rows[6 + k].push(v / rhs);
                        }
                        if i >= ir {
                            rows[8 + k].push(v / rhs);
                        }
                    }
                }
            }
            Ok(rows)
        }
        BoundFamily::Vorticity => {
            let c = Cumulative::<2>::build(&xs, Some(z.re), |s| {
                let w = s.powf(1.0 - d2);
                Ok([w * abs_i(xi, z * s)?, w * abs_k(xi, z * s)?])
            })?;
            let mut rows = vec![Vec::new(); 4];
            for j in 0..p {
                let tau = xs[j];
                if j <= ir {
                    rows[0].push(c.between(0, j, 0) / (la.powf(rx / 2.0) * tau.powf(2.0 + rx - d2)));
                    let rhs = la.powf(-rx / 2.0 - 0.5) * tau.powf(1.0 - rx - d2) + la.powf(-1.0 + params.delta / 4.0);
                    rows[2].push(c.tail[j][1] / rhs);
                }
                if j >= ir {
                    rows[1].push(c.between(0, j, 0) / (la.powf(-0.75) * tau.powf(0.5 - d2) * ez(tau)));
                    rows[3].push(c.tail[j][1] / (la.powf(-0.75) * tau.powf(0.5 - d2) / ez(tau)));
                }
            }
            Ok(rows)
        }
        BoundFamily::BesselEnvelope => unreachable!("handled pointwise"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_rejected() {
        let g = SampleGrid { moduli: vec![], args: vec![], positions: 4, split: 1.0 };
        assert!(matches!(bessel_envelope_margin(C64::new(1.0, 0.05), 0.1, &g), Err(Error::Precondition(_))));
    }

    #[test]
    fn envelope_small_window_stable() {
        let g = SampleGrid::geometric(1e-3, 0.9, 6, 1.4, 5, 0);
        let mu = C64::new(1.0, 0.05);
        let a = bessel_envelope_margin(mu, 0.1, &g).unwrap();
        let b = bessel_envelope_margin(mu, 0.1, &g.refined()).unwrap();
        let ka = a.iter().find(|r| r.lemma_id == "envelope K small-|z|").unwrap();
        let kb = b.iter().find(|r| r.lemma_id == "envelope K small-|z|").unwrap();
        assert!(ka.sup_ratio.is_finite() && ka.sup_ratio > 0.0);
        assert!((ka.sup_ratio / kb.sup_ratio - 1.0).abs() < 0.1);
    }

    #[test]
    fn sign_preconditions() {
        let g = SampleGrid::geometric(1e-3, 1e-2, 2, 1.0, 2, 4);
        let p = FlowParams::new(0.05, -0.01).unwrap();
        assert!(matches!(bessel_bound_margin(BoundFamily::VelocityK, &p, 0.1, &g), Err(Error::Precondition(_))));
    }
}
