//! e^{−tA_V} on single-mode data by the Dunford integral
//! (1/2πi)∫_{γ_b} e^{tλ}(λ + A_V)^{-1} f dλ, and decay-rate fits.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gk21_rule, ContourSpec, Segment};
use crate::report::csv_err;
use crate::resolvent::{
    linear_fit, mode_norms, solve_mode, BumpForcing, Forcing, GridPlan, ModeSolution, Quantity, RadialGrid,
    RadialProfile, ResolventOptions, ResolventOutput, SampledForcing, Stream,
};
use crate::spectral::{FlowParams, SpectralPoint};
use crate::zeros::{certify_zero_free, CertStatus, SectorRegion};
use crate::C64;

/// Relative size of e^{tλ} at the outer end of the rays.
pub const TRUNCATION_DIGITS: f64 = 14.0;
pub const DEFAULT_DUNFORD_PHI: f64 = 0.62 * PI;
pub const DEFAULT_B: f64 = 0.02;
/// Largest |λ| checked by zero-free certification before each apply.
pub const CERTIFY_LIMIT: f64 = 4.0;

/// γ_b = {|arg λ| = φ, b ≤ |λ| ≤ truncation} ∪ {|λ| = b, |arg λ| ≤ φ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DunfordContour {
    pub b: f64,
    pub phi: f64,
    pub truncation: f64,
    /// Largest phase change of e^{tλ} across one panel.
    pub phase_per_panel: f64,
    /// Largest log-radius (ray) or angle (arc) span of one panel.
    pub max_span: f64,
}

impl DunfordContour {
    pub fn new(b: f64, phi: f64, truncation: f64) -> Result<Self> {
        let c = DunfordContour { b, phi, truncation, phase_per_panel: 10.0, max_span: 1.5 };
        c.validate()?;
        Ok(c)
    }

    /// Truncation where |e^{tλ}| falls to 10^{−14}.
    pub fn for_time(t: f64, b: f64, phi: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        let cut = TRUNCATION_DIGITS * std::f64::consts::LN_10 / (t * phi.cos().abs());
        Self::new(b, phi, cut.max(2.0 * b))
    }

    /// φ = 0.62π, b = min(0.02, 1/t).
    pub fn default_for(t: f64) -> Result<Self> {
        Self::for_time(t, DEFAULT_B.min(1.0 / t), DEFAULT_DUNFORD_PHI)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::MalformedContour(format!("inner radius b = {} outside (0, 1)", self.b)));
        }
        if !(self.phi > 0.5 * PI && self.phi < 0.75 * PI) {
            return Err(Error::MalformedContour(format!("ray angle φ = {} outside (π/2, 3π/4)", self.phi)));
        }
        if !(self.truncation > self.b && self.truncation.is_finite()) {
            return Err(Error::MalformedContour(format!("truncation {} must exceed b", self.truncation)));
        }
        if !(self.phase_per_panel > 0.0 && self.max_span > 0.0) {
            return Err(Error::MalformedContour("panel density must be positive".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> ContourSpec {
        ContourSpec::dunford(self.b, self.phi, self.truncation)
    }

    /// |e^{tλ}| at the ray ends.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        (t * self.phi.cos() * self.truncation).exp()
    }

    /// Bound on the discarded ray tails for ‖(λ + A)^{-1}‖ ≤ 1/|λ|.
    pub fn tail_bound(&self, t: f64, data_norm: f64) -> f64 {
        let c = t * self.phi.cos().abs();
        data_norm * (-c * self.truncation).exp() / (PI * c * self.truncation)
    }

    /// Panels (segment, u0, u1) sized by the phase of e^{tλ} and `max_span`.
    pub fn panels(&self, t: f64) -> Vec<(Segment, f64, f64)> {
        let mut out = Vec::new();
        let s = self.phi.sin().abs();
        for seg in self.spec().segments {
            let (a, b) = seg.range();
            let (lo, hi) = (a.min(b), a.max(b));
            let mut cuts = vec![lo];
            let mut u = lo;
            while u < hi {
                let step = match seg {
                    Segment::Ray { .. } => (self.phase_per_panel / (t * s * u.exp())).ln_1p(),
                    _ => self.phase_per_panel / (t * self.b),
                };
                let step = self.max_span.min(step);
                u = if u + 1.2 * step >= hi { hi } else { u + step };
                cuts.push(u);
            }
            if b < a {
                cuts.reverse();
            }
            out.extend(cuts.windows(2).map(|w| (seg, w[0], w[1])));
        }
        out
    }
}

/// Initial data of a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Fixed(BumpForcing),
    /// Unit bump on [max(1, a√t), b√t].
    Diffusive { a: f64, b: f64 },
}

impl InitialData {
    pub fn at(&self, n: i32, t: f64) -> Result<BumpForcing> {
        match *self {
            InitialData::Fixed(f) => {
                if f.n != n {
                    return Err(Error::Domain(format!("initial data lives in mode {} but n = {n}", f.n)));
                }
                Ok(f)
            }
            InitialData::Diffusive { a, b } => {
                let l = t.sqrt();
                BumpForcing::new(n, (a * l).max(1.0), b * l)
            }
        }
    }
}

/// A single-mode field given by ω and its streamfunction on a Chebyshev grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub n: i32,
    pub grid: RadialGrid,
    pub omega: Vec<C64>,
    pub stream: Stream,
}

fn far_stream(n: i32, far: C64, r: f64) -> (C64, C64) {
    let m = n.unsigned_abs() as i32;
    let a = far / (2.0 * m as f64);
    (a * r.powi(-m), -a * m as f64 * r.powi(-m - 1))
}

impl ModeState {
    fn from_solution(s: &ModeSolution) -> Self {
        ModeState { n: s.n, grid: s.grid.clone(), omega: s.omega.clone(), stream: s.stream.clone() }
    }

    /// (ω, ψ, ψ′) at r; beyond the grid ω = 0 and ψ is the r^{−|n|} far field.
    pub fn sample(&self, r: f64) -> (C64, C64, C64) {
        if r > self.grid.r_max() {
            let (p, dp) = far_stream(self.n, self.stream.far_field, r);
            return (C64::new(0.0, 0.0), p, dp);
        }
        let g = &self.grid;
        (
            g.interpolate(&self.omega, r).unwrap(),
            g.interpolate(&self.stream.psi, r).unwrap(),
            g.interpolate(&self.stream.dpsi, r).unwrap(),
        )
    }

    pub fn velocity(&self) -> (Vec<C64>, Vec<C64>) {
        let inn = C64::new(0.0, self.n as f64);
        let vr = self.grid.nodes.iter().zip(&self.stream.psi).map(|(&r, &p)| inn * p / r).collect();
        let vt = self.stream.dpsi.iter().map(|&d| -d).collect();
        (vr, vt)
    }

    pub fn norms(&self) -> (f64, f64) {
        mode_norms(self.n, &self.grid, &self.stream, &self.omega)
    }

    /// `self − other` on whichever grid reaches further.
    pub fn difference(&self, other: &ModeState) -> ModeState {
        if self.grid == other.grid {
            let sub = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
            let stream = Stream {
                psi: sub(&self.stream.psi, &other.stream.psi),
                dpsi: sub(&self.stream.dpsi, &other.stream.dpsi),
                d_n: self.stream.d_n - other.stream.d_n,
                far_field: self.stream.far_field - other.stream.far_field,
            };
            return ModeState { n: self.n, grid: self.grid.clone(), omega: sub(&self.omega, &other.omega), stream };
        }
        let (base, rest, sign) = if self.grid.r_max() >= other.grid.r_max() { (self, other, 1.0) } else { (other, self, -1.0) };
        let len = base.grid.len();
        let mut omega = Vec::with_capacity(len);
        let mut psi = Vec::with_capacity(len);
        let mut dpsi = Vec::with_capacity(len);
        for (i, &r) in base.grid.nodes.iter().enumerate() {
            let (w, p, dp) = rest.sample(r);
            omega.push((base.omega[i] - w) * sign);
            psi.push((base.stream.psi[i] - p) * sign);
            dpsi.push((base.stream.dpsi[i] - dp) * sign);
        }
        let stream = Stream {
            psi,
            dpsi,
            d_n: (base.stream.d_n - rest.stream.d_n) * sign,
            far_field: (base.stream.far_field - rest.stream.far_field) * sign,
        };
        ModeState { n: self.n, grid: base.grid.clone(), omega, stream }
    }

    /// ‖v − g‖_{L²(Ω)} for a field g vanishing beyond the grid.
    pub fn distance_to(&self, g: &dyn Forcing) -> f64 {
        let (vr, vt) = self.velocity();
        let d: Vec<f64> = self
            .grid
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| ((vr[i] - g.f_r(r)).norm_sqr() + (vt[i] - g.f_theta(r)).norm_sqr()) * r)
            .collect();
        let m = self.n.unsigned_abs() as f64;
        let a2 = (self.stream.far_field / (2.0 * m)).norm_sqr();
        let tail = m * a2 * self.grid.r_max().powf(-2.0 * m);
        (2.0 * PI * (self.grid.integral_re(&d) + tail)).sqrt()
    }

    /// The state as data for a further evolution step.
    pub fn as_forcing(&self) -> Result<SampledForcing> {
        let (vr, vt) = self.velocity();
        SampledForcing::new(self.n, self.grid.clone(), vr, vt, self.omega.clone())
    }

    pub fn to_output(&self, lambda: C64) -> ResolventOutput {
        let (vr, vt) = self.velocity();
        let (norm_v, norm_grad) = self.norms();
        let noslip_defect = vr[0].norm() + vt[0].norm();
        ResolventOutput {
            n: self.n,
            lambda,
            velocity: (
                RadialProfile::on(&self.grid, vr, Quantity::VelocityR),
                RadialProfile::on(&self.grid, vt, Quantity::VelocityTheta),
            ),
            vorticity: RadialProfile::on(&self.grid, self.omega.clone(), Quantity::Vorticity),
            c_coeff: None,
            f_value: None,
            d_defect: self.stream.d_n.norm(),
            noslip_defect,
            far_field: self.stream.far_field,
            norm_v,
            norm_grad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupOutput {
    pub t: f64,
    pub contour: DunfordContour,
    pub state: ModeState,
    pub norm_v: f64,
    pub norm_grad: f64,
    /// Kronrod–Gauss panel differences (velocity L² norm) plus the ray-tail bound.
    pub abs_err: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
    pub certified: bool,
}

impl SemigroupOutput {
    /// Velocity and vorticity profiles; `lambda` holds t for bookkeeping.
    pub fn output(&self) -> ResolventOutput {
        self.state.to_output(C64::new(self.t, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunfordOptions {
    pub resolvent: ResolventOptions,
    /// Certify the contour's sector before integrating.
    pub certify: bool,
}

impl Default for DunfordOptions {
    fn default() -> Self {
        DunfordOptions { resolvent: ResolventOptions { r_floor: 1.0, ..ResolventOptions::default() }, certify: true }
    }
}

fn check_contour(params: &FlowParams, n: i32, c: &DunfordContour) -> Result<()> {
    let region = SectorRegion::new((c.phi + 0.01).min(0.75 * PI), 0.9 * c.b, c.truncation.min(CERTIFY_LIMIT).max(c.b))?;
    let rep = certify_zero_free(params, n, &region)?;
    if rep.status != CertStatus::Certified {
        return Err(Error::Safety(format!(
            "Dunford contour region {} is not certified zero-free (status {}, winding {})",
            region.describe(),
            rep.status.as_str(),
            rep.winding_total
        )));
    }
    Ok(())
}

/// Output grid fine enough for every node solution on the part of [1, R] it occupies.
fn output_grid(nodes: &[(C64, f64)], data: &dyn Forcing, opts: &ResolventOptions) -> Result<RadialGrid> {
    let (a, b) = data.support();
    let mut r_max: f64 = 1.0;
    let mut plan = GridPlan::new(1.0, 0.0);
    plan.relative = opts.relative_width;
    let mut spans: Vec<(f64, f64)> = nodes
        .iter()
        .map(|(k, _)| (opts.truncation_radius(*k, b), opts.k_width / k.norm()))
        .collect();
    spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for (r, w) in spans.into_iter().rev() {
        r_max = r_max.max(r);
        if kept.last().map_or(true, |&(_, wl)| w < wl) {
            kept.push((r, w));
        }
    }
    for (r, w) in kept {
        plan = plan.window(1.0, r, w);
    }
    let mut x = a.max(1.0);
    while b > a && x < b {
        let w = data.resolution(x).min(b - a);
        let end = if x + 1.5 * w >= b { b } else { x + w };
        plan = plan.window(x, end, w);
        x = end;
    }
    plan.r_max = r_max;
    plan.build()
}

/// e^{−tA_V} f along `contour`.
pub fn dunford_apply(
    params: &FlowParams,
    n: i32,
    t: f64,
    initial: &dyn Forcing,
    contour: &DunfordContour,
) -> Result<SemigroupOutput> {
    dunford_apply_opts(params, n, t, initial, contour, &DunfordOptions::default())
}

pub fn dunford_apply_opts(
    params: &FlowParams,
    n: i32,
    t: f64,
    initial: &dyn Forcing,
    contour: &DunfordContour,
    opts: &DunfordOptions,
) -> Result<SemigroupOutput> {
    params.require_stable_regime()?;
    if n.abs() != 1 || initial.mode() != n {
        return Err(Error::Domain(format!("need |n| = 1 and data in mode n, got n = {n}, data mode {}", initial.mode())));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    contour.validate()?;
    if opts.certify {
        check_contour(params, n, contour)?;
    }
    let rule = gk21_rule();
    let panels = contour.panels(t);
    let ks: Vec<(C64, f64)> = panels
        .iter()
        .flat_map(|&(seg, u0, u1)| [seg.eval(u0).0.sqrt(), seg.eval(u1).0.sqrt()])
        .map(|k| (k, 0.0))
        .collect();
    let grid = output_grid(&ks, initial, &opts.resolvent)?;
    let len = grid.len();
    let zero = C64::new(0.0, 0.0);
    let blank = || ModeState {
        n,
        grid: grid.clone(),
        omega: vec![zero; len],
        stream: Stream { psi: vec![zero; len], dpsi: vec![zero; len], d_n: zero, far_field: zero },
    };
    let mut total = blank();
    let mut quad_err = 0.0;
    let mut evaluations = 0;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for &(seg, u0, u1) in &panels {
        let (c, h) = (0.5 * (u0 + u1), 0.5 * (u1 - u0));
        let samples: Vec<(ModeState, C64, f64, f64)> = rule
            .par_iter()
            .map(|&(x, wk, wg)| {
                let (z, dz) = seg.eval(c + h * x);
                let pt = SpectralPoint::new(z)?;
                let s = solve_mode(params, &pt, initial, &opts.resolvent)?;
                let st = ModeState::from_solution(&s);
                let mut out = blank();
                for (i, &r) in grid.nodes.iter().enumerate() {
                    let (a, b, d) = st.sample(r);
                    out.omega[i] = a;
                    out.stream.psi[i] = b;
                    out.stream.dpsi[i] = d;
                }
                out.stream.far_field = s.stream.far_field;
                Ok((out, (t * z).exp() * dz * h / two_pi_i, wk, wg))
            })
            .collect::<Result<_>>()?;
        evaluations += samples.len();
        let mut kron = blank();
        let mut gauss = blank();
        for (st, base, wk, wg) in &samples {
            for (acc, wt) in [(&mut kron, *wk), (&mut gauss, *wg)] {
                if wt == 0.0 {
                    continue;
                }
                let c = base * wt;
                for i in 0..len {
                    acc.omega[i] += c * st.omega[i];
                    acc.stream.psi[i] += c * st.stream.psi[i];
                    acc.stream.dpsi[i] += c * st.stream.dpsi[i];
                }
                acc.stream.far_field += c * st.stream.far_field;
            }
        }
        quad_err += kron.difference(&gauss).norms().0;
        for i in 0..len {
            total.omega[i] += kron.omega[i];
            total.stream.psi[i] += kron.stream.psi[i];
            total.stream.dpsi[i] += kron.stream.dpsi[i];
        }
        total.stream.far_field += kron.stream.far_field;
    }
    let m = n.unsigned_abs() as i32;
    let weighted: Vec<C64> = grid.nodes.iter().zip(&total.omega).map(|(&r, &w)| w * r.powi(1 - m)).collect();
    total.stream.d_n = grid.integral(&weighted);
    let data_norm = data_l2(initial, &grid);
    let tail_bound = contour.tail_bound(t, data_norm);
    let (norm_v, norm_grad) = total.norms();
    Ok(SemigroupOutput {
        t,
        contour: *contour,
        state: total,
        norm_v,
        norm_grad,
        abs_err: quad_err + tail_bound,
        tail_bound,
        evaluations,
        certified: opts.certify,
    })
}

/// (2π∫(|f_r|² + |f_θ|²) r dr)^{1/2} on the grid.
pub fn data_l2(f: &dyn Forcing, grid: &RadialGrid) -> f64 {
    let v: Vec<f64> = grid.nodes.iter().map(|&r| (f.f_r(r).norm_sqr() + f.f_theta(r).norm_sqr()) * r).collect();
    (2.0 * PI * grid.integral_re(&v)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm_v: f64,
    pub norm_grad: f64,
    pub abs_err: f64,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// e^{intercept}, the constant C in C·t^{slope}.
    pub prefactor: f64,
}

impl LogFit {
    fn of(x: &[f64], y: &[f64]) -> Self {
        let (slope, intercept, r2) = linear_fit(x, y);
        LogFit { slope, intercept, r2, prefactor: intercept.exp() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rows: Vec<DecayRow>,
    pub velocity: LogFit,
    pub gradient: LogFit,
}

pub const MIN_FIT_POINTS: usize = 6;
pub const DECAY_COLUMNS: [&str; 4] = ["t", "norm_v", "norm_grad", "abs_err"];

/// Log–log fits of ‖v(t)‖ and ‖∇v(t)‖ with default contours.
pub fn decay_fit(params: &FlowParams, n: i32, initial: &InitialData, t_grid: &[f64]) -> Result<DecayFit> {
    decay_fit_with(params, n, initial, t_grid, DunfordContour::default_for)
}

/// [`decay_fit`] with the contour for each t chosen by `contour`.
pub fn decay_fit_with<C: Fn(f64) -> Result<DunfordContour>>(
    params: &FlowParams,
    n: i32,
    initial: &InitialData,
    t_grid: &[f64],
    contour: C,
) -> Result<DecayFit> {
    params.require_stable_regime()?;
    let rows: Vec<DecayRow> = t_grid
        .iter()
        .map(|&t| {
            let run = || -> Result<SemigroupOutput> {
                let f = initial.at(n, t)?;
                dunford_apply(params, n, t, &f, &contour(t)?)
            };
            match run() {
                Ok(o) => DecayRow { t, norm_v: o.norm_v, norm_grad: o.norm_grad, abs_err: o.abs_err, flag: None },
                Err(e) => DecayRow { t, norm_v: f64::NAN, norm_grad: f64::NAN, abs_err: f64::NAN, flag: Some(e.to_string()) },
            }
        })
        .collect();
    let ok: Vec<&DecayRow> = rows.iter().filter(|r| r.flag.is_none()).collect();
    if ok.len() < MIN_FIT_POINTS {
        return Err(Error::NoConvergence(format!("{} valid t-points, the fit needs {MIN_FIT_POINTS}", ok.len())));
    }
    let lt: Vec<f64> = ok.iter().map(|r| r.t.ln()).collect();
    let velocity = LogFit::of(&lt, &ok.iter().map(|r| r.norm_v.ln()).collect::<Vec<_>>());
    let gradient = LogFit::of(&lt, &ok.iter().map(|r| r.norm_grad.ln()).collect::<Vec<_>>());
    Ok(DecayFit { rows, velocity, gradient })
}

pub fn write_decay_csv<W: Write>(out: W, fit: &DecayFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DECAY_COLUMNS).map_err(csv_err)?;
    for r in &fit.rows {
        w.write_record([r.t, r.norm_v, r.norm_grad, r.abs_err].map(|v| format!("{v:.12e}"))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv output: {e}")))
}

/// Geometric grid of `count` points from `start` to `stop`.
pub fn geometric(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![start];
    }
    let q = (stop / start).ln() / (count - 1) as f64;
    (0..count).map(|i| start * (q * i as f64).exp()).collect()
}
