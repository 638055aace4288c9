//! Explicit resolvent of the single-mode linearized operator: Biot–Savart
//! reconstruction, the particular solution Φ_{λ,n}, the constraint
//! coefficient c_{n,λ} and the collected vorticity/velocity formulas.

pub mod fd;
pub mod forcing;
pub mod grid;
pub mod jdecomp;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fd::{resolvent_oracle_fd, FdGrid};
pub use forcing::{BumpForcing, Forcing, SampledForcing, ZeroForcing, STANDARD_SUPPORTS};
pub use grid::{GridPlan, RadialGrid, RadialQuadrature, TrapezoidGrid, CHEB_ORDER};
pub use jdecomp::{j_decomposition_check, JReport};

use crate::error::{Error, Result};
use crate::report::csv_err;
use crate::special::{bessel_i_scaled, bessel_k_scaled};
use crate::spectral::{f_n_series, mode_constants, FlowParams, ModeConstants, SpectralPoint};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Vorticity,
    VelocityR,
    VelocityTheta,
    ForcingR,
    ForcingTheta,
    RotForcing,
    Phi,
    G1,
    G2,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Vorticity => "omega",
            Quantity::VelocityR => "v_r",
            Quantity::VelocityTheta => "v_theta",
            Quantity::ForcingR => "f_r",
            Quantity::ForcingTheta => "f_theta",
            Quantity::RotForcing => "rot_f",
            Quantity::Phi => "phi",
            Quantity::G1 => "g1",
            Quantity::G2 => "g2",
        }
    }

    pub fn decays_exponentially(&self) -> bool {
        matches!(self, Quantity::Vorticity | Quantity::Phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Composite Chebyshev–Lobatto panels (see [`RadialGrid`]).
    Chebyshev,
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<C64>,
    pub tag: Quantity,
    pub kind: GridKind,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<C64>, tag: Quantity, kind: GridKind) -> Result<Self> {
        if grid.len() != values.len() || grid.is_empty() {
            return Err(Error::Grid("profile needs one value per grid point".into()));
        }
        if (grid[0] - 1.0).abs() > 1e-14 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("profile grid must start at r = 1 and increase strictly".into()));
        }
        Ok(RadialProfile { grid, values, tag, kind })
    }

    pub fn on(grid: &RadialGrid, values: Vec<C64>, tag: Quantity) -> Self {
        RadialProfile { grid: grid.nodes.clone(), values, tag, kind: GridKind::Chebyshev }
    }

    pub fn quadrature(&self) -> Result<Box<dyn RadialQuadrature>> {
        Ok(match self.kind {
            GridKind::Chebyshev => Box::new(RadialGrid::from_nodes(&self.grid)?),
            GridKind::Trapezoid => Box::new(TrapezoidGrid(self.grid.clone())),
        })
    }

    pub fn value_at(&self, r: f64) -> Option<C64> {
        match self.kind {
            GridKind::Chebyshev => RadialGrid::from_nodes(&self.grid).ok()?.interpolate(&self.values, r),
            GridKind::Trapezoid => {
                let i = self.grid.partition_point(|&x| x <= r);
                if i == 0 || i > self.grid.len() || r > *self.grid.last()? {
                    return None;
                }
                if i == self.grid.len() {
                    return self.values.last().copied();
                }
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let t = (r - x0) / (x1 - x0);
                Some(self.values[i - 1] * (1.0 - t) + self.values[i] * t)
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Columns r, re(tag), im(tag).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let t = self.tag.as_str();
        w.write_record(["r".to_string(), format!("re({t})"), format!("im({t})")]).map_err(csv_err)?;
        for (r, v) in self.grid.iter().zip(&self.values) {
            w.write_record([format!("{r:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Domain(format!("csv output: {e}")))
    }
}

/// g⁽¹⁾ = (ξ + δ/2) f_θ + in f_r and g⁽²⁾ = (ξ − δ/2) f_θ − in f_r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingPair {
    pub g1: RadialProfile,
    pub g2: RadialProfile,
}

pub fn forcing_pair(params: &FlowParams, forcing: &dyn Forcing, grid: &RadialGrid) -> Result<ForcingPair> {
    let n = forcing.mode();
    let m = mode_constants(params, n)?;
    let h = 0.5 * params.delta;
    let inn = C64::new(0.0, n as f64);
    let (g1, g2): (Vec<C64>, Vec<C64>) = grid
        .nodes
        .iter()
        .map(|&r| {
            let (fr, ft) = (forcing.f_r(r), forcing.f_theta(r));
            ((m.xi + h) * ft + inn * fr, (m.xi - h) * ft - inn * fr)
        })
        .unzip();
    Ok(ForcingPair { g1: RadialProfile::on(grid, g1, Quantity::G1), g2: RadialProfile::on(grid, g2, Quantity::G2) })
}

/// Streamfunction data of a Biot–Savart reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
    pub d_n: C64,
    /// ∫₁^∞ s^{|n|+1} ω ds, the coefficient of the r^{−|n|} far field of ψ.
    pub far_field: C64,
}

fn stream_on(n: i32, q: &dyn RadialQuadrature, omega: &[C64]) -> Stream {
    let m = n.unsigned_abs() as i32;
    let x = q.points();
    let pw: Vec<C64> = x.iter().zip(omega).map(|(&r, &w)| w * r.powi(m + 1)).collect();
    let qw: Vec<C64> = x.iter().zip(omega).map(|(&r, &w)| w * r.powi(1 - m)).collect();
    let p = q.cumulative(&pw);
    let qc = q.cumulative(&qw);
    let d = *qc.last().unwrap();
    let mf = m as f64;
    let mut psi = Vec::with_capacity(x.len());
    let mut dpsi = Vec::with_capacity(x.len());
    for (i, &r) in x.iter().enumerate() {
        let tail = d - qc[i];
        let rm = r.powi(-m);
        psi.push((-d * rm + p[i] * rm + tail / rm) / (2.0 * mf));
        dpsi.push((d * rm / r - p[i] * rm / r + tail * r.powi(m - 1)) * 0.5);
    }
    Stream { psi, dpsi, d_n: d, far_field: *p.last().unwrap() }
}

fn velocity_from_stream(n: i32, x: &[f64], s: &Stream) -> (Vec<C64>, Vec<C64>) {
    let inn = C64::new(0.0, n as f64);
    let vr = x.iter().zip(&s.psi).map(|(&r, &p)| inn * p / r).collect();
    let vt = s.dpsi.iter().map(|&d| -d).collect();
    (vr, vt)
}

/// 𝒱_n[ω]: velocity components and d_n[ω] from the two-integral streamfunction.
pub fn biot_savart(n: i32, omega: &RadialProfile) -> Result<((RadialProfile, RadialProfile), C64)> {
    if n == 0 {
        return Err(Error::Domain("Biot–Savart reconstruction needs |n| ≥ 1".into()));
    }
    check_decay(n, omega)?;
    let q = omega.quadrature()?;
    let s = stream_on(n, q.as_ref(), &omega.values);
    let (vr, vt) = velocity_from_stream(n, &omega.grid, &s);
    let mk = |v, tag| RadialProfile { grid: omega.grid.clone(), values: v, tag, kind: omega.kind };
    Ok(((mk(vr, Quantity::VelocityR), mk(vt, Quantity::VelocityTheta)), s.d_n))
}

/// Rejects profiles whose end behaviour makes s^{1−|n|}ω or s^{|n|+1}ω·r^{−|n|}
/// non-integrable at infinity.
fn check_decay(n: i32, omega: &RadialProfile) -> Result<()> {
    let len = omega.values.len();
    let peak = omega.max_abs();
    if len < 3 || peak == 0.0 {
        return Ok(());
    }
    let last = omega.values[len - 1].norm();
    if last <= 1e-12 * peak {
        return Ok(());
    }
    let j = len - 1 - (len / 10).max(1);
    let (r0, r1) = (omega.grid[j], omega.grid[len - 1]);
    let (w0, w1) = (omega.values[j].norm(), last);
    if w0 == 0.0 || r1 <= r0 {
        return Ok(());
    }
    let slope = (w1 / w0).ln() / (r1 / r0).ln();
    let m = n.unsigned_abs() as f64;
    if 1.0 - m + slope >= -1.0 || slope >= -2.0 {
        return Err(Error::Decay(format!(
            "vorticity decays like r^{slope:.2} at the end of the grid (|ω(R)| / max = {:.2e}); d_n and ψ_n need faster decay",
            last / peak
        )));
    }
    Ok(())
}

/// Grid and cutoff controls of the explicit resolvent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOptions {
    pub tol: f64,
    /// R = max(r_floor, support end + r_decay / Re √λ).
    pub r_floor: f64,
    pub r_decay: f64,
    pub relative_width: f64,
    pub k_width: f64,
    /// Relative |F_n| floor below which λ is treated as spectrum.
    pub near_spectrum: f64,
    pub extra_breaks: Vec<f64>,
    /// Largest admissible truncation radius.
    pub r_cap: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        ResolventOptions {
            tol: 1e-10,
            r_floor: 20.0,
            r_decay: 36.0,
            relative_width: 0.3,
            k_width: 3.0,
            near_spectrum: 1e-9,
            extra_breaks: Vec::new(),
            r_cap: 1e6,
        }
    }
}

impl ResolventOptions {
    pub fn with_breaks(mut self, extra: &[f64]) -> Self {
        self.extra_breaks.extend_from_slice(extra);
        self
    }

    pub fn truncation_radius(&self, k: C64, support_end: f64) -> f64 {
        self.r_floor.max(support_end.max(1.0) + self.r_decay / k.re)
    }

    pub fn plan(&self, point: &SpectralPoint, forcing: &dyn Forcing) -> Result<RadialGrid> {
        let k = point.sqrt_lambda;
        let (a, b) = forcing.support();
        let r_max = self.truncation_radius(k, b);
        if r_max > self.r_cap {
            return Err(Error::Grid(format!("truncation radius {r_max:.3e} exceeds the cap {:.3e}", self.r_cap)));
        }
        let mut plan = GridPlan::new(r_max, k.norm()).with_breaks(&self.extra_breaks);
        plan.relative = self.relative_width;
        plan.k_width = self.k_width;
        if b > a {
            // follow the forcing's own resolution across its support
            let mut x = a.max(1.0);
            while x < b {
                let w = forcing.resolution(x).min(b - a);
                let end = if x + 1.5 * w >= b { b } else { x + w };
                plan = plan.window(x, end, w);
                x = end;
            }
        }
        plan.build()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiForm {
    /// Kernel form with (rot f_n)_n.
    Rot,
    /// Integrated-by-parts form with g⁽¹⁾, g⁽²⁾ and f_θ.
    Parts,
}

struct Tables {
    ks: Vec<C64>,
    is: Vec<C64>,
}

fn tables(m: &ModeConstants, k: C64, grid: &RadialGrid) -> Result<Tables> {
    let mut ks = Vec::with_capacity(grid.len());
    let mut is = Vec::with_capacity(grid.len());
    for &x in &grid.nodes {
        ks.push(bessel_k_scaled(m.xi, k * x)?.value);
        is.push(bessel_i_scaled(m.xi, k * x)?.value);
    }
    Ok(Tables { ks, is })
}

fn phi_with(
    params: &FlowParams,
    m: &ModeConstants,
    k: C64,
    grid: &RadialGrid,
    t: &Tables,
    forcing: &dyn Forcing,
    form: PhiForm,
) -> Result<Vec<C64>> {
    let h = 0.5 * params.delta;
    let n = forcing.mode();
    let inn = C64::new(0.0, n as f64);
    let (a, b) = forcing.support();
    let len = grid.len();
    let mut u = vec![C64::new(0.0, 0.0); len];
    let mut v = vec![C64::new(0.0, 0.0); len];
    for (i, &x) in grid.nodes.iter().enumerate() {
        if x < a || x > b {
            continue;
        }
        match form {
            PhiForm::Rot => {
                let rho = forcing.rot(x) * x.powf(1.0 + h);
                u[i] = t.is[i] * rho;
                v[i] = t.ks[i] * rho;
            }
            PhiForm::Parts => {
                let (fr, ft) = (forcing.f_r(x), forcing.f_theta(x));
                if fr == C64::new(0.0, 0.0) && ft == C64::new(0.0, 0.0) {
                    continue;
                }
                let g1 = (m.xi + h) * ft + inn * fr;
                let g2 = (m.xi - h) * ft - inn * fr;
                let ip = bessel_i_scaled(m.xi + 1.0, k * x)?.value;
                let km = bessel_k_scaled(m.xi - 1.0, k * x)?.value;
                let xh = x.powf(h);
                u[i] = -(xh * t.is[i] * g1) - k * x * xh * ip * ft;
                v[i] = xh * t.ks[i] * g2 + k * x * xh * km * ft;
            }
        }
    }
    let fwd = grid.damped_forward(k, &u);
    let bwd = grid.damped_backward(k, &v);
    Ok(grid
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| x.powf(-h) * (t.ks[i] * fwd[i] + t.is[i] * bwd[i]))
        .collect())
}

/// Φ_{λ,n}[f_n] on a grid, in either of the two equivalent forms.
pub fn phi_on_grid(
    params: &FlowParams,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    grid: &RadialGrid,
    form: PhiForm,
) -> Result<Vec<C64>> {
    let n = forcing.mode();
    let m = mode_constants(params, n)?;
    let k = point.sqrt_lambda;
    let t = tables(&m, k, grid)?;
    phi_with(params, &m, k, grid, &t, forcing, form)
}

/// Φ_{λ,n}[f_n] by the integrated-by-parts four-integral form on the default grid.
pub fn phi_particular(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    tol: f64,
) -> Result<RadialProfile> {
    check_mode(n, forcing)?;
    let opts = ResolventOptions { tol, ..ResolventOptions::default() };
    let grid = opts.plan(point, forcing)?;
    let phi = phi_on_grid(params, point, forcing, &grid, PhiForm::Parts)?;
    Ok(RadialProfile::on(&grid, phi, Quantity::Phi))
}

fn check_mode(n: i32, forcing: &dyn Forcing) -> Result<()> {
    if n.abs() != 1 {
        return Err(Error::Domain(format!("the explicit resolvent covers |n| = 1 only, got n = {n}")));
    }
    if forcing.mode() != n {
        return Err(Error::Domain(format!("forcing lives in mode {} but n = {n}", forcing.mode())));
    }
    Ok(())
}

/// Full single-mode solution on a Chebyshev grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub n: i32,
    pub lambda: C64,
    pub grid: RadialGrid,
    pub omega: Vec<C64>,
    pub phi: Vec<C64>,
    pub stream: Stream,
    pub c_coeff: C64,
    pub f_value: C64,
    /// |F_n| relative to |K_ξ(√λ)|/|√λ|.
    pub f_margin: f64,
}

impl ModeSolution {
    pub fn velocity(&self) -> (Vec<C64>, Vec<C64>) {
        velocity_from_stream(self.n, &self.grid.nodes, &self.stream)
    }

    /// (‖v‖_{L²(Ω)}, ‖∇v‖_{L²(Ω)}) including the analytic far-field tails.
    pub fn norms(&self) -> (f64, f64) {
        mode_norms(self.n, &self.grid, &self.stream, &self.omega)
    }

    /// (ω, v_r, v_θ) at r; beyond the grid only the far field of ψ remains.
    pub fn sample(&self, r: f64) -> (C64, C64, C64) {
        if r > self.grid.r_max() {
            let m = self.n.unsigned_abs() as i32;
            let a = self.stream.far_field / (2.0 * m as f64);
            let vr = C64::new(0.0, self.n as f64) * a * r.powi(-m - 1);
            let vt = a * m as f64 * r.powi(-m - 1);
            return (C64::new(0.0, 0.0), vr, vt);
        }
        let (vr, vt) = self.velocity();
        let g = &self.grid;
        (g.interpolate(&self.omega, r).unwrap(), g.interpolate(&vr, r).unwrap(), g.interpolate(&vt, r).unwrap())
    }
}

pub(crate) fn mode_norms(n: i32, grid: &RadialGrid, s: &Stream, omega: &[C64]) -> (f64, f64) {
    let inn = C64::new(0.0, n as f64);
    let n2 = (n * n) as f64;
    let mut v2 = Vec::with_capacity(grid.len());
    let mut g2 = Vec::with_capacity(grid.len());
    for (i, &x) in grid.nodes.iter().enumerate() {
        let (p, dp, w) = (s.psi[i], s.dpsi[i], omega[i]);
        let vr = inn * p / x;
        let vt = -dp;
        let dvr = inn * (dp / x - p / (x * x));
        let dvt = w + dp / x - n2 * p / (x * x);
        v2.push((vr.norm_sqr() + vt.norm_sqr()) * x);
        let ang = (inn * vr - vt).norm_sqr() + (vr + inn * vt).norm_sqr();
        g2.push((dvr.norm_sqr() + dvt.norm_sqr() + ang / (x * x)) * x);
    }
    let m = n.unsigned_abs() as f64;
    let a2 = (s.far_field / (2.0 * m)).norm_sqr();
    let r = grid.r_max();
    let tail_v = m * a2 * r.powf(-2.0 * m);
    let tail_g = 2.0 * m * m * (m + 1.0) * a2 * r.powf(-2.0 * m - 2.0);
    let nv = (2.0 * PI * (grid.integral_re(&v2) + tail_v)).sqrt();
    let ng = (2.0 * PI * (grid.integral_re(&g2) + tail_g)).sqrt();
    (nv, ng)
}

/// Solves for ω on the planned grid with no regime restriction on (α, δ).
pub fn solve_mode(
    params: &FlowParams,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    opts: &ResolventOptions,
) -> Result<ModeSolution> {
    let grid = opts.plan(point, forcing)?;
    solve_on(params, point, forcing, &grid, opts)
}

pub fn solve_on(
    params: &FlowParams,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    grid: &RadialGrid,
    opts: &ResolventOptions,
) -> Result<ModeSolution> {
    let n = forcing.mode();
    check_mode(n, forcing)?;
    let m = mode_constants(params, n)?;
    let k = point.sqrt_lambda;
    let h = 0.5 * params.delta;
    let t = tables(&m, k, grid)?;
    let phi = phi_with(params, &m, k, grid, &t, forcing, PhiForm::Rot)?;
    // e^{√λ} r^{−δ/2} K_ξ(√λ r), so that neither factor underflows
    let hom: Vec<C64> = grid.nodes.iter().zip(&t.ks).map(|(&x, &kv)| x.powf(-h) * (-k * (x - 1.0)).exp() * kv).collect();
    let f_scaled = if k.norm() <= 1.0 { f_n_series(params, n, k)?.value * k.exp() } else { grid.integral(&hom) };
    let f_margin = f_scaled.norm() * k.norm() / t.ks[0].norm();
    if !(f_margin >= opts.near_spectrum) {
        return Err(Error::NearSpectrum(format!(
            "|F_n(√λ)| is {f_margin:.3e} of its natural size at λ = {}, below {:.1e}",
            point.lambda, opts.near_spectrum
        )));
    }
    let f_value = f_scaled * (-k).exp();
    let c_coeff = grid.integral(&phi);
    let ratio = c_coeff / f_scaled;
    let omega: Vec<C64> = hom.iter().zip(&phi).map(|(&hv, &p)| p - ratio * hv).collect();
    let stream = stream_on(n, grid, &omega);
    Ok(ModeSolution { n, lambda: point.lambda, grid: grid.clone(), omega, phi, stream, c_coeff, f_value, f_margin })
}

/// Limit on the constraint and boundary defects, relative to the size of ω.
pub const DEFECT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOutput {
    pub n: i32,
    pub lambda: C64,
    pub velocity: (RadialProfile, RadialProfile),
    pub vorticity: RadialProfile,
    /// c_{n,λ}; absent for outputs not built from the explicit formula.
    pub c_coeff: Option<C64>,
    pub f_value: Option<C64>,
    /// |d_n[ω]|.
    pub d_defect: f64,
    /// |v_r(1)| + |v_θ(1)|.
    pub noslip_defect: f64,
    pub far_field: C64,
    pub norm_v: f64,
    pub norm_grad: f64,
}

impl ResolventOutput {
    fn from_solution(s: &ModeSolution) -> Self {
        let (vr, vt) = s.velocity();
        let d_defect = s.stream.d_n.norm();
        let noslip_defect = vr[0].norm() + vt[0].norm();
        let (norm_v, norm_grad) = s.norms();
        ResolventOutput {
            n: s.n,
            lambda: s.lambda,
            velocity: (
                RadialProfile::on(&s.grid, vr, Quantity::VelocityR),
                RadialProfile::on(&s.grid, vt, Quantity::VelocityTheta),
            ),
            vorticity: RadialProfile::on(&s.grid, s.omega.clone(), Quantity::Vorticity),
            c_coeff: Some(s.c_coeff),
            f_value: Some(s.f_value),
            d_defect,
            noslip_defect,
            far_field: s.stream.far_field,
            norm_v,
            norm_grad,
        }
    }

    pub fn enforce(self) -> Result<Self> {
        if !(self.d_defect < DEFECT_LIMIT) || !(self.noslip_defect < DEFECT_LIMIT) {
            return Err(Error::Consistency(format!(
                "d_n defect {:.3e}, no-slip defect {:.3e} (limit {DEFECT_LIMIT:.0e})",
                self.d_defect, self.noslip_defect
            )));
        }
        Ok(self)
    }
}

/// (λ + A_{V,n})^{-1} f_n by the collected Bessel formulas.
pub fn resolvent_apply(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    tol: f64,
) -> Result<ResolventOutput> {
    params.require_stable_regime()?;
    check_mode(n, forcing)?;
    let opts = ResolventOptions { tol, ..ResolventOptions::default() };
    let s = solve_mode(params, point, forcing, &opts)?;
    ResolventOutput::from_solution(&s).enforce()
}

pub fn resolvent_apply_opts(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    forcing: &dyn Forcing,
    opts: &ResolventOptions,
) -> Result<(ResolventOutput, ModeSolution)> {
    params.require_stable_regime()?;
    check_mode(n, forcing)?;
    let s = solve_mode(params, point, forcing, opts)?;
    Ok((ResolventOutput::from_solution(&s).enforce()?, s))
}

/// ‖−ω″ − (1+δ)ω′/r + (λ + (n²+iαn)/r²)ω − rot f‖ / ‖rot f‖ in L²(r dr),
/// derivatives by panelwise spectral differentiation.
pub fn ode_residual(params: &FlowParams, s: &ModeSolution, forcing: &dyn Forcing) -> f64 {
    let n = s.n as f64;
    let coef = C64::new(n * n, params.alpha * n);
    let mut res = vec![0.0; s.grid.len()];
    let mut rhs = vec![0.0; s.grid.len()];
    for (i, d1, d2) in s.grid.second_derivative_panels(&s.omega) {
        let x = s.grid.nodes[i];
        let rho = forcing.rot(x);
        let r = -d2 - d1 * ((1.0 + params.delta) / x) + (s.lambda + coef / (x * x)) * s.omega[i] - rho;
        res[i] = r.norm_sqr() * x;
        rhs[i] = rho.norm_sqr() * x;
    }
    (s.grid.integral_re(&res) / s.grid.integral_re(&rhs)).sqrt()
}

/// max |(d/dr)(r v_r) + in v_θ| / max |v|.
pub fn divergence_defect(s: &ModeSolution) -> f64 {
    let (vr, vt) = s.velocity();
    let rv: Vec<C64> = s.grid.nodes.iter().zip(&vr).map(|(&x, &v)| v * x).collect();
    let d = s.grid.derivative(&rv);
    let inn = C64::new(0.0, s.n as f64);
    let vmax = vr.iter().chain(&vt).map(|v| v.norm()).fold(0.0, f64::max);
    d.iter().zip(&vt).map(|(&a, &b)| (a + inn * b).norm()).fold(0.0, f64::max) / vmax
}

/// Relative L²(r dr) distance between two vorticity profiles, the second
/// sampled on the first's grid.
pub fn relative_l2_distance(reference: &ModeSolution, other: &RadialProfile) -> Result<f64> {
    let x = &other.grid;
    let q = other.quadrature()?;
    let mut num = Vec::with_capacity(x.len());
    let mut den = Vec::with_capacity(x.len());
    for (&r, &v) in x.iter().zip(&other.values) {
        let w = if r <= reference.grid.r_max() { reference.grid.interpolate(&reference.omega, r).unwrap() } else { C64::new(0.0, 0.0) };
        num.push(C64::new((v - w).norm_sqr() * r, 0.0));
        den.push(C64::new(w.norm_sqr() * r, 0.0));
    }
    let a = q.cumulative(&num);
    let b = q.cumulative(&den);
    Ok((a.last().unwrap().re / b.last().unwrap().re).sqrt())
}

/// The standard λ test set, inside Σ_{3π/4−0.1} with |λ| ≤ 0.05.
pub fn standard_lambdas() -> [C64; 3] {
    [C64::new(0.02, 0.0), C64::new(0.01, 0.005), C64::from_polar(0.03, 2.0)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub modulus: f64,
    pub lambda: C64,
    pub norm_v: f64,
    pub norm_grad: f64,
    pub c_coeff: C64,
    pub f_value: C64,
    /// max over the sample radii of |J_l|, l = 1 … 17.
    pub j_sup: Vec<f64>,
    /// Set when the row failed, e.g. near the spectrum.
    pub flag: Option<String>,
}

/// Forcing used at each |λ| of a norm scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanForcing {
    /// The same field for every λ.
    Fixed(BumpForcing),
    /// Unit bump on [max(1, a L), b L] with L = |λ|^{−1/2}.
    Diffusive { a: f64, b: f64 },
}

impl ScanForcing {
    pub fn at(&self, n: i32, modulus: f64) -> Result<BumpForcing> {
        match *self {
            ScanForcing::Fixed(f) => {
                if f.n != n {
                    return Err(Error::Domain(format!("forcing lives in mode {} but n = {n}", f.n)));
                }
                Ok(f)
            }
            ScanForcing::Diffusive { a, b } => {
                let l = modulus.powf(-0.5);
                BumpForcing::new(n, (a * l).max(1.0), b * l)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScan {
    pub arg: f64,
    pub rows: Vec<NormRow>,
    pub slope_v: f64,
    pub slope_grad: f64,
    /// max/min of norm·|λ|^{−slope} along the ray.
    pub spread_v: f64,
    pub spread_grad: f64,
    /// Log–log slope of max_r |J_l| for l = 1 … 17.
    pub term_slopes: Vec<f64>,
}

/// Least-squares slope, intercept and r² of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

fn spread(rows: &[(f64, f64)], slope: f64) -> f64 {
    let v: Vec<f64> = rows.iter().map(|(m, y)| y * m.powf(-slope)).collect();
    v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn scan_row(params: &FlowParams, n: i32, lambda: C64, forcing: &BumpForcing) -> Result<NormRow> {
    let point = SpectralPoint::new(lambda)?;
    let opts = ResolventOptions::default();
    let (o, s) = resolvent_apply_opts(params, n, &point, forcing, &opts)?;
    let (a, b) = (forcing.a, forcing.b);
    let radii: Vec<f64> = [1.0, a, 0.5 * (a + b), b, 2.0 * b].into_iter().filter(|&r| r <= s.grid.r_max()).collect();
    let j = j_decomposition_check(params, n, &point, forcing, &radii, f64::INFINITY)?;
    let j_sup = (0..jdecomp::J_COUNT)
        .map(|l| j.samples.iter().map(|smp| smp.j[l].norm()).fold(0.0, f64::max))
        .collect();
    Ok(NormRow {
        modulus: lambda.norm(),
        lambda,
        norm_v: o.norm_v,
        norm_grad: o.norm_grad,
        c_coeff: s.c_coeff,
        f_value: s.f_value,
        j_sup,
        flag: None,
    })
}

/// Norms of (λ + A)^{-1} f along arg λ = `arg` and their log–log slopes.
pub fn resolvent_norm_scan(
    params: &FlowParams,
    n: i32,
    arg: f64,
    magnitudes: &[f64],
    forcing: &ScanForcing,
) -> Result<NormScan> {
    params.require_stable_regime()?;
    if n.abs() != 1 {
        return Err(Error::Domain(format!("the explicit resolvent covers |n| = 1 only, got n = {n}")));
    }
    if !(arg.abs() < 0.75 * PI) {
        return Err(Error::Precondition(format!("ray arg λ = {arg} lies outside Σ_{{3π/4}}")));
    }
    if magnitudes.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::Domain("scan magnitudes must be positive".into()));
    }
    let rows: Vec<NormRow> = magnitudes
        .par_iter()
        .map(|&r| {
            let lambda = C64::from_polar(r, arg);
            forcing.at(n, r).and_then(|f| scan_row(params, n, lambda, &f)).unwrap_or_else(|e| NormRow {
                modulus: r,
                lambda,
                norm_v: f64::NAN,
                norm_grad: f64::NAN,
                c_coeff: C64::new(f64::NAN, f64::NAN),
                f_value: C64::new(f64::NAN, f64::NAN),
                j_sup: vec![f64::NAN; jdecomp::J_COUNT],
                flag: Some(e.to_string()),
            })
        })
        .collect();
    let ok: Vec<&NormRow> = rows.iter().filter(|r| r.flag.is_none()).collect();
    if ok.len() < 2 {
        return Err(Error::NoConvergence("fewer than two valid rows in the norm scan".into()));
    }
    let lx: Vec<f64> = ok.iter().map(|r| r.modulus.ln()).collect();
    let fit = |y: Vec<f64>| linear_fit(&lx, &y).0;
    let slope_v = fit(ok.iter().map(|r| r.norm_v.ln()).collect());
    let slope_grad = fit(ok.iter().map(|r| r.norm_grad.ln()).collect());
    let term_slopes = (0..jdecomp::J_COUNT).map(|l| fit(ok.iter().map(|r| r.j_sup[l].ln()).collect())).collect();
    let pv: Vec<(f64, f64)> = ok.iter().map(|r| (r.modulus, r.norm_v)).collect();
    let pg: Vec<(f64, f64)> = ok.iter().map(|r| (r.modulus, r.norm_grad)).collect();
    Ok(NormScan {
        arg,
        slope_v,
        slope_grad,
        spread_v: spread(&pv, slope_v),
        spread_grad: spread(&pg, slope_grad),
        term_slopes,
        rows,
    })
}
