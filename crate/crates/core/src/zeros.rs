//! Argument-principle certification that F_n(√λ) has no zeros in sectors of
//! the λ-plane, Newton refinement of isolated zeros and (α, δ) sweeps.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::csv_err;
use crate::numerics::{quad_contour_opts, ContourSpec, QuadOptions, Segment};
use crate::special::bessel_k_scaled;
use crate::spectral::{f_n_eval, f_n_with_derivative, lambda_dfn_from_fn, mode_constants, FlowParams, FnMethod, SpectralPoint};
use crate::C64;

/// Analytic function of λ with its derivative, plus a natural size used to
/// decide when |f| is numerically zero.
pub trait Analytic: Sync {
    fn eval(&self, lambda: C64) -> Result<(C64, C64)>;
    fn scale(&self, lambda: C64) -> f64;
}

/// λ ↦ F_n(√λ).
#[derive(Debug, Clone, Copy)]
pub struct SpectralFunction {
    pub params: FlowParams,
    pub n: i32,
    pub tol: f64,
    pub method: FnMethod,
}

impl SpectralFunction {
    pub fn new(params: FlowParams, n: i32) -> Result<Self> {
        if n.abs() != 1 {
            return Err(Error::Domain(format!("only |n| = 1 is supported, got n = {n}")));
        }
        Ok(SpectralFunction { params, n, tol: 1e-10, method: FnMethod::Auto })
    }

    pub fn with_method(mut self, method: FnMethod) -> Self {
        self.method = method;
        self
    }
}

impl Analytic for SpectralFunction {
    fn eval(&self, lambda: C64) -> Result<(C64, C64)> {
        let pt = SpectralPoint::new(lambda)?;
        if self.method == FnMethod::Quadrature {
            let (f, lf) = f_n_with_derivative(&self.params, self.n, &pt, self.tol)?;
            return Ok((f.value, lf.value / lambda));
        }
        let f = f_n_eval(&self.params, self.n, &pt, self.tol, self.method)?.value;
        let lf = lambda_dfn_from_fn(&self.params, self.n, &pt, f)?;
        Ok((f, lf / lambda))
    }

    /// |K_ξ(√λ)| / |√λ|, the size of each of the two leading terms of F_n.
    fn scale(&self, lambda: C64) -> f64 {
        let z = lambda.sqrt();
        mode_constants(&self.params, self.n)
            .and_then(|m| bessel_k_scaled(m.xi, z))
            .map(|k| k.value.norm() * (-z.re).exp() / z.norm())
            .unwrap_or(1.0)
    }
}

/// Relative size below which |f| counts as a zero on the contour.
pub const ON_CONTOUR_FLOOR: f64 = 1e-9;
/// Largest admissible distance of the winding integral from an integer.
pub const INTEGRALITY_LIMIT: f64 = 0.1;

fn check_cut(path: &ContourSpec) -> Result<()> {
    for (k, seg) in path.segments.iter().enumerate() {
        for j in 0..=64 {
            let z = point_on(seg, j as f64 / 64.0);
            if z.norm() == 0.0 || (z.im.abs() <= 1e-9 * z.norm() && z.re < 0.0) {
                return Err(Error::MalformedContour(format!("segment {k} meets ℝ_{{≤0}} near {z}")));
            }
        }
        if let Segment::Arc { center, theta0, theta1, .. } = *seg {
            let (lo, hi) = if theta0 < theta1 { (theta0, theta1) } else { (theta1, theta0) };
            let crosses = (-3..=3).any(|m| {
                let t = PI + 2.0 * PI * m as f64;
                lo <= t && t <= hi
            });
            if center.norm() < 1e-300 && crosses {
                return Err(Error::MalformedContour(format!("arc {k} crosses the negative real axis")));
            }
        }
    }
    Ok(())
}

fn point_on(seg: &Segment, u: f64) -> C64 {
    let (a, b) = match *seg {
        Segment::Line { .. } => (0.0, 1.0),
        Segment::Arc { theta0, theta1, .. } => (theta0, theta1),
        Segment::Ray { r0, r1, .. } => (r0.ln(), r1.ln()),
    };
    seg.eval(a + (b - a) * u).0
}

/// Winding of f around a closed contour with the minimal |f|/scale seen on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub count: i64,
    pub value: C64,
    pub min_margin: f64,
}

/// (1/2πi)∮ f′/f dλ rounded to an integer.
pub fn winding_of<A: Analytic + ?Sized>(f: &A, contour: &ContourSpec, tol: f64) -> Result<Winding> {
    if !contour.closed {
        return Err(Error::MalformedContour("winding needs a closed contour".into()));
    }
    contour.validate()?;
    let mut failure = None;
    let mut margin = f64::INFINITY;
    let mut g = |l: C64| match f.eval(l) {
        Ok((v, d)) => {
            let m = v.norm() / f.scale(l);
            margin = margin.min(m);
            if m < ON_CONTOUR_FLOOR {
                failure.get_or_insert(Error::OnContourZero { modulus: v.norm(), at: l.to_string() });
            }
            d / v
        }
        Err(e) => {
            failure.get_or_insert(e);
            C64::new(0.0, 0.0)
        }
    };
    let opts = QuadOptions::absolute(tol * 2.0 * PI).with_max_intervals(400);
    let r = quad_contour_opts(&mut g, contour, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    let sign = if contour.counterclockwise { 1.0 } else { -1.0 };
    let value = r.value / C64::new(0.0, 2.0 * PI) * sign;
    let count = value.re.round();
    let defect = (value - count).norm();
    if defect >= INTEGRALITY_LIMIT {
        return Err(Error::Inconclusive { value: value.re, defect });
    }
    Ok(Winding { count: count as i64, value, min_margin: margin })
}

/// Winding number of F_n(√·) around `contour` in the λ-plane.
pub fn winding_number(params: &FlowParams, n: i32, contour: &ContourSpec, tol: f64) -> Result<i64> {
    check_cut(contour)?;
    let f = SpectralFunction::new(*params, n)?;
    Ok(winding_of(&f, contour, tol)?.count)
}

/// Σ_φ ∩ {r_min ≤ |λ| ≤ r_max}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorRegion {
    pub phi: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Keep the closed region away from ℝ_{≤0} by at least [`CUT_CLEARANCE`].
    pub excluded: bool,
}

pub const CUT_CLEARANCE: f64 = 1e-9;
pub const DEFAULT_PHI: f64 = 0.75 * PI - 0.1;

impl SectorRegion {
    pub fn new(phi: f64, r_min: f64, r_max: f64) -> Result<Self> {
        let r = SectorRegion { phi, r_min, r_max, excluded: true };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::MalformedContour(format!(
                "region radii must satisfy 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if !(self.phi > 0.0 && self.phi < PI) {
            return Err(Error::MalformedContour(format!("sector half-angle {} outside (0, π)", self.phi)));
        }
        if self.excluded && self.r_min * (PI - self.phi).sin() < CUT_CLEARANCE {
            return Err(Error::MalformedContour(format!(
                "region with φ = {} touches ℝ_{{≤0}} (clearance below {CUT_CLEARANCE})",
                self.phi
            )));
        }
        Ok(())
    }

    /// Σ_φ with the outer radius capped by e^{−1/(4|α|)}; `None` when the cap
    /// falls below `r_min`.
    pub fn capped(phi: f64, r_min: f64, r_max: f64, alpha: f64) -> Result<Option<Self>> {
        let cap = if alpha != 0.0 { (-1.0 / (4.0 * alpha.abs())).exp() } else { r_max };
        let r_max = r_max.min(cap);
        if r_max <= r_min {
            return Ok(None);
        }
        Self::new(phi, r_min, r_max).map(Some)
    }

    /// [`SectorRegion::capped`] with φ = 3π/4 − 0.1.
    pub fn sweep_default(alpha: f64, r_min: f64, r_max: f64) -> Result<Option<Self>> {
        Self::capped(DEFAULT_PHI, r_min, r_max, alpha)
    }

    pub fn contour(&self) -> ContourSpec {
        ContourSpec::annular_sector(self.r_min, self.r_max, -self.phi, self.phi)
    }

    pub fn contains(&self, lambda: C64) -> bool {
        let r = lambda.norm();
        r >= self.r_min && r <= self.r_max && lambda.arg().abs() <= self.phi
    }

    pub fn describe(&self) -> String {
        format!("Σ_{:.6} ∩ {{{:.3e} ≤ |λ| ≤ {:.3e}}}", self.phi, self.r_min, self.r_max)
    }
}

/// Closed annular-sector cell {r0 ≤ |λ| ≤ r1, θ0 ≤ arg λ ≤ θ1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub r0: f64,
    pub r1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub depth: u32,
}

impl Cell {
    pub fn contour(&self) -> ContourSpec {
        ContourSpec::annular_sector(self.r0, self.r1, self.theta0, self.theta1)
    }

    pub fn center(&self) -> C64 {
        C64::from_polar((self.r0 * self.r1).sqrt(), 0.5 * (self.theta0 + self.theta1))
    }

    pub fn contains(&self, l: C64) -> bool {
        let r = l.norm();
        let a = l.arg();
        r >= self.r0 && r <= self.r1 && a >= self.theta0 && a <= self.theta1
    }

    pub fn conj(&self) -> Cell {
        Cell { theta0: -self.theta1, theta1: -self.theta0, ..*self }
    }

    pub fn split(&self) -> [Cell; 4] {
        let rm = (self.r0 * self.r1).sqrt();
        let tm = 0.5 * (self.theta0 + self.theta1);
        let d = self.depth + 1;
        [
            Cell { r0: self.r0, r1: rm, theta0: self.theta0, theta1: tm, depth: d },
            Cell { r0: rm, r1: self.r1, theta0: self.theta0, theta1: tm, depth: d },
            Cell { r0: self.r0, r1: rm, theta0: tm, theta1: self.theta1, depth: d },
            Cell { r0: rm, r1: self.r1, theta0: tm, theta1: self.theta1, depth: d },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertStatus {
    Certified,
    ZerosFound,
    Partial,
}

impl CertStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertStatus::Certified => "certified",
            CertStatus::ZerosFound => "zeros-found",
            CertStatus::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedZero {
    pub lambda: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: Cell,
    pub winding: Option<i64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub params: FlowParams,
    pub n: i32,
    pub region: SectorRegion,
    pub winding_total: i64,
    pub subdivisions: usize,
    pub refined_zeros: Vec<RefinedZero>,
    pub status: CertStatus,
    pub min_margin: f64,
    /// Cells left undecided at the depth limit, or whose zero could not be refined.
    pub unresolved: Vec<CellReport>,
}

/// Subdivision limits and tolerances for certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub max_depth: u32,
    pub tol: f64,
    /// Initial cells per decade of |λ|.
    pub radial_per_decade: usize,
    pub angular: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { max_depth: 8, tol: 1e-3, radial_per_decade: 1, angular: 4 }
    }
}

fn initial_cells(region: &SectorRegion, opts: &CertifyOptions) -> Vec<Cell> {
    let decades = (region.r_max / region.r_min).log10();
    let nr = ((decades * opts.radial_per_decade as f64).ceil() as usize).max(1);
    let na = opts.angular.max(1);
    let mut cells = Vec::with_capacity(nr * na);
    for i in 0..nr {
        let r0 = region.r_min * (region.r_max / region.r_min).powf(i as f64 / nr as f64);
        let r1 = region.r_min * (region.r_max / region.r_min).powf((i + 1) as f64 / nr as f64);
        for j in 0..na {
            let t0 = -region.phi + 2.0 * region.phi * j as f64 / na as f64;
            let t1 = -region.phi + 2.0 * region.phi * (j + 1) as f64 / na as f64;
            cells.push(Cell { r0, r1, theta0: t0, theta1: t1, depth: 0 });
        }
    }
    cells
}

enum CellOutcome {
    Count(i64, f64),
    Undecided(String),
}

fn cell_winding<A: Analytic + ?Sized>(f: &A, cell: &Cell, tol: f64) -> CellOutcome {
    match winding_of(f, &cell.contour(), tol) {
        Ok(w) if w.count >= 0 => CellOutcome::Count(w.count, w.min_margin),
        Ok(w) => CellOutcome::Undecided(format!("negative winding {}", w.count)),
        Err(e) => CellOutcome::Undecided(e.to_string()),
    }
}

/// Certify a region for any analytic function.
pub fn certify_with<A: Analytic + ?Sized>(
    f: &A,
    region: &SectorRegion,
    opts: &CertifyOptions,
) -> Result<(i64, usize, Vec<RefinedZero>, Vec<CellReport>, f64)> {
    region.validate()?;
    let mut pending = initial_cells(region, opts);
    let mut total = 0i64;
    let mut subdivisions = 0usize;
    let mut zeros = Vec::new();
    let mut unresolved = Vec::new();
    let mut margin = f64::INFINITY;
    while !pending.is_empty() {
        let outcomes: Vec<CellOutcome> = pending.par_iter().map(|c| cell_winding(f, c, opts.tol)).collect();
        let mut next = Vec::new();
        for (cell, out) in pending.iter().zip(outcomes) {
            match out {
                CellOutcome::Count(0, m) => margin = margin.min(m),
                CellOutcome::Count(w, m) => {
                    margin = margin.min(m);
                    total += w;
                    match refine_in(f, cell.center(), Some(cell)) {
                        Ok(z) => zeros.push(z),
                        Err(e) => unresolved.push(CellReport {
                            cell: *cell,
                            winding: Some(w),
                            note: format!("zero not refined: {e}"),
                        }),
                    }
                }
                CellOutcome::Undecided(note) => {
                    if cell.depth < opts.max_depth {
                        subdivisions += 1;
                        next.extend(cell.split());
                    } else {
                        unresolved.push(CellReport { cell: *cell, winding: None, note });
                    }
                }
            }
        }
        pending = next;
    }
    Ok((total, subdivisions, zeros, unresolved, margin))
}

/// Winding-number certification of F_n over `region`, subdividing undecided cells.
pub fn certify_zero_free(params: &FlowParams, n: i32, region: &SectorRegion) -> Result<ZeroReport> {
    certify_zero_free_opts(params, n, region, &CertifyOptions::default())
}

pub fn certify_zero_free_opts(
    params: &FlowParams,
    n: i32,
    region: &SectorRegion,
    opts: &CertifyOptions,
) -> Result<ZeroReport> {
    let f = SpectralFunction::new(*params, n)?;
    let (total, subdivisions, zeros, unresolved, margin) = certify_with(&f, region, opts)?;
    let status = if !unresolved.is_empty() {
        CertStatus::Partial
    } else if total > 0 {
        CertStatus::ZerosFound
    } else {
        CertStatus::Certified
    };
    Ok(ZeroReport {
        params: *params,
        n,
        region: *region,
        winding_total: total,
        subdivisions,
        refined_zeros: zeros,
        status,
        min_margin: margin,
        unresolved,
    })
}

/// |f| below which a Newton iterate counts as a zero.
pub const ZERO_RESIDUAL: f64 = 1e-10;
const NEWTON_MAX: usize = 60;

/// Newton iteration λ ← λ − f/f′, confined to `cell` when given.
pub fn refine_in<A: Analytic + ?Sized>(f: &A, seed: C64, cell: Option<&Cell>) -> Result<RefinedZero> {
    let mut l = seed;
    let mut history = Vec::new();
    for _ in 0..NEWTON_MAX {
        let (v, d) = f.eval(l)?;
        let res = v.norm();
        history.push(res);
        if res < ZERO_RESIDUAL {
            return Ok(RefinedZero { lambda: l, residual: res });
        }
        if d.norm() == 0.0 {
            return Err(Error::NoConvergence(format!("vanishing derivative at λ = {l}")));
        }
        let mut step = v / d;
        // damp steps that would leave the cell or cross the cut
        for _ in 0..30 {
            let cand = l - step;
            let inside = cell.map_or(true, |c| c.contains(cand));
            if inside && !(cand.im == 0.0 && cand.re <= 0.0) {
                break;
            }
            step *= 0.5;
        }
        let cand = l - step;
        if let Some(c) = cell {
            if !c.contains(cand) {
                return Err(Error::NoConvergence(format!("Newton iterate escaped the cell from λ = {l}")));
            }
        }
        l = cand;
    }
    Err(Error::NoConvergence(format!(
        "no zero after {NEWTON_MAX} Newton steps from λ = {seed} (last residual {:.3e})",
        history.last().copied().unwrap_or(f64::NAN)
    )))
}

/// Newton polish of a zero of F_n seeded at `seed`.
pub fn refine_zero(params: &FlowParams, n: i32, seed: &SpectralPoint) -> Result<(SpectralPoint, f64)> {
    let f = SpectralFunction::new(*params, n)?;
    let z = refine_in(&f, seed.lambda, None)?;
    Ok((SpectralPoint::new(z.lambda)?, z.residual))
}

/// [`refine_zero`] with iterates confined to the isolating cell.
pub fn refine_zero_in(params: &FlowParams, n: i32, seed: &SpectralPoint, cell: &Cell) -> Result<(SpectralPoint, f64)> {
    let f = SpectralFunction::new(*params, n)?;
    let z = refine_in(&f, seed.lambda, Some(cell))?;
    Ok((SpectralPoint::new(z.lambda)?, z.residual))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub delta: f64,
    pub n: i32,
    pub region: String,
    pub zero_count: i64,
    pub zeros: Vec<(f64, f64, f64)>,
    pub min_margin: f64,
    pub status: String,
    pub exploratory: bool,
}

impl SweepRecord {
    fn from_report(alpha: f64, delta: f64, n: i32, r: Result<ZeroReport>, region: &SectorRegion) -> Self {
        let exploratory = delta < 0.0;
        match r {
            Ok(rep) => SweepRecord {
                alpha,
                delta,
                n,
                region: rep.region.describe(),
                zero_count: rep.winding_total,
                zeros: rep.refined_zeros.iter().map(|z| (z.lambda.re, z.lambda.im, z.residual)).collect(),
                min_margin: rep.min_margin,
                status: rep.status.as_str().to_string(),
                exploratory,
            },
            Err(e) => SweepRecord {
                alpha,
                delta,
                n,
                region: region.describe(),
                zero_count: 0,
                zeros: Vec::new(),
                min_margin: f64::NAN,
                status: format!("error: {e}"),
                exploratory,
            },
        }
    }
}

/// One certification per (α, δ, n) in input order; the outer radius is capped
/// at e^{−1/(4|α|)} when that is smaller.
pub fn stability_sweep(
    alpha_grid: &[f64],
    delta_grid: &[f64],
    region: &SectorRegion,
    n_set: &[i32],
) -> Vec<SweepRecord> {
    stability_sweep_opts(alpha_grid, delta_grid, region, n_set, &CertifyOptions::default())
}

pub fn stability_sweep_opts(
    alpha_grid: &[f64],
    delta_grid: &[f64],
    region: &SectorRegion,
    n_set: &[i32],
    opts: &CertifyOptions,
) -> Vec<SweepRecord> {
    let mut jobs = Vec::new();
    for &a in alpha_grid {
        for &d in delta_grid {
            for &n in n_set {
                jobs.push((a, d, n));
            }
        }
    }
    jobs.par_iter()
        .map(|&(a, d, n)| match SectorRegion::capped(region.phi, region.r_min, region.r_max, a) {
            Ok(Some(reg)) => {
                let rep = FlowParams::new(a, d)
                    .and_then(|p| SpectralFunction::new(p, n).map(|_| p))
                    .and_then(|p| certify_zero_free_opts(&p, n, &reg, opts));
                SweepRecord::from_report(a, d, n, rep, &reg)
            }
            Ok(None) => SweepRecord {
                alpha: a,
                delta: d,
                n,
                region: format!("empty: e^(-1/(4|α|)) ≤ {:.3e}", region.r_min),
                zero_count: 0,
                zeros: Vec::new(),
                min_margin: f64::NAN,
                status: "empty-region".to_string(),
                exploratory: d < 0.0,
            },
            Err(e) => SweepRecord::from_report(a, d, n, Err(e), region),
        })
        .collect()
}

/// Largest |λ| up to which shells of Σ_φ certify zero-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub alpha: f64,
    pub delta: f64,
    pub radius: f64,
    pub reached_limit: bool,
    pub shells: usize,
}

/// Certifies the shells r_min·q^k ≤ |λ| ≤ r_min·q^{k+1}, with `shells_per_decade`
/// shells per decade, outward until one fails or `r_limit` is reached.
pub fn zero_free_radius(
    params: &FlowParams,
    n: i32,
    phi: f64,
    r_min: f64,
    r_limit: f64,
    shells_per_decade: usize,
    opts: &CertifyOptions,
) -> Result<RadiusReport> {
    SectorRegion::new(phi, r_min, r_limit)?;
    let count = ((r_limit / r_min).log10() * shells_per_decade.max(1) as f64).ceil() as usize;
    let q = (r_limit / r_min).powf(1.0 / count as f64);
    let mut radius = r_min;
    for k in 0..count {
        let hi = if k + 1 == count { r_limit } else { r_min * q.powi(k as i32 + 1) };
        let shell = SectorRegion::new(phi, radius, hi)?;
        let rep = certify_zero_free_opts(params, n, &shell, opts)?;
        if rep.status != CertStatus::Certified {
            return Ok(RadiusReport { alpha: params.alpha, delta: params.delta, radius, reached_limit: false, shells: k });
        }
        radius = hi;
    }
    Ok(RadiusReport { alpha: params.alpha, delta: params.delta, radius, reached_limit: true, shells: count })
}

pub const SWEEP_COLUMNS: [&str; 9] =
    ["alpha", "delta", "n", "region", "zero_count", "zeros", "min_margin", "status", "exploratory"];

/// CSV with the zeros column as `re:im:residual` items joined by `;`.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = csv_err;
    w.write_record(SWEEP_COLUMNS).map_err(io)?;
    for r in records {
        let zeros: Vec<String> = r.zeros.iter().map(|(a, b, c)| format!("{a:e}:{b:e}:{c:e}")).collect();
        w.write_record([
            r.alpha.to_string(),
            r.delta.to_string(),
            r.n.to_string(),
            r.region.clone(),
            r.zero_count.to_string(),
            zeros.join(";"),
            format!("{:e}", r.min_margin),
            r.status.clone(),
            r.exploratory.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv output: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_csv_has_stable_header() {
        let rec = SweepRecord {
            alpha: 0.05,
            delta: -0.01,
            n: 1,
            region: "r".into(),
            zero_count: 1,
            zeros: vec![(1e-3, 2e-3, 1e-12)],
            min_margin: 0.1,
            status: "zeros-found".into(),
            exploratory: true,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS.join(","));
        assert!(lines.next().unwrap().contains("1e-3:2e-3:1e-12"));
    }

    struct Poly {
        roots: Vec<C64>,
    }

    impl Analytic for Poly {
        fn eval(&self, l: C64) -> Result<(C64, C64)> {
            let mut v = C64::new(1.0, 0.0);
            let mut d = C64::new(0.0, 0.0);
            for r in &self.roots {
                d = d * (l - r) + v;
                v *= l - r;
            }
            Ok((v, d))
        }
        fn scale(&self, _: C64) -> f64 {
            1.0
        }
    }

    #[test]
    fn identity_winds_once() {
        let f = Poly { roots: vec![C64::new(0.0, 0.0)] };
        let w = winding_of(&f, &ContourSpec::circle(C64::new(0.0, 0.0), 1.0), 1e-6).unwrap();
        assert_eq!(w.count, 1);
    }

    #[test]
    fn synthetic_zero_is_found_not_certified() {
        let root = C64::from_polar(3e-3, 0.7);
        let f = Poly { roots: vec![root] };
        let region = SectorRegion::new(2.0, 1e-4, 1e-2).unwrap();
        let (total, _, zeros, unresolved, _) = certify_with(&f, &region, &CertifyOptions::default()).unwrap();
        assert_eq!(total, 1);
        assert!(unresolved.is_empty());
        assert!((zeros[0].lambda - root).norm() < 1e-12);
    }

    #[test]
    fn zero_on_cell_edge_stays_unresolved() {
        let f = Poly { roots: vec![C64::from_polar(3e-3, 1.0)] };
        let region = SectorRegion::new(2.0, 1e-4, 1e-2).unwrap();
        let opts = CertifyOptions { max_depth: 2, ..CertifyOptions::default() };
        let (_, subdivisions, _, unresolved, _) = certify_with(&f, &region, &opts).unwrap();
        assert!(subdivisions > 0);
        assert!(!unresolved.is_empty());
    }

    #[test]
    fn additivity() {
        let f = Poly { roots: vec![C64::from_polar(3e-3, 1.0), C64::from_polar(5e-4, -0.3)] };
        let cell = Cell { r0: 1e-4, r1: 1e-2, theta0: -2.0, theta1: 2.0, depth: 0 };
        let outer = winding_of(&f, &cell.contour(), 1e-6).unwrap().count;
        let sum: i64 = cell.split().iter().map(|c| winding_of(&f, &c.contour(), 1e-6).unwrap().count).sum();
        assert_eq!(outer, 2);
        assert_eq!(sum, outer);
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let f = Poly { roots: vec![C64::new(0.5, 0.0)] };
        let c = ContourSpec::circle(C64::new(0.0, 0.0), 0.5);
        assert!(matches!(winding_of(&f, &c, 1e-6), Err(Error::OnContourZero { .. })));
    }

    #[test]
    fn spectral_rectangle_winds_zero() {
        let p = FlowParams::new(0.05, 0.02).unwrap();
        let c = ContourSpec::rectangle(C64::new(1e-5, -5e-4), C64::new(7e-4, 5e-4));
        assert_eq!(winding_number(&p, 1, &c, 1e-3).unwrap(), 0);
        assert_eq!(winding_number(&p, -1, &c.conj(), 1e-3).unwrap(), 0);
    }

    #[test]
    fn newton_converges_quadratically() {
        let root = C64::new(2e-3, 1e-3);
        let f = Poly { roots: vec![root, C64::new(-0.5, 0.1)] };
        let z = refine_in(&f, root * C64::new(1.2, 0.1), None).unwrap();
        assert!(z.residual < ZERO_RESIDUAL);
        assert!((z.lambda - root).norm() < 1e-12);
    }

    #[test]
    fn newton_without_zero_fails_in_cell() {
        let f = Poly { roots: vec![C64::new(0.5, 0.0)] };
        let cell = Cell { r0: 1e-4, r1: 1e-3, theta0: -1.0, theta1: 1.0, depth: 0 };
        assert!(matches!(refine_in(&f, cell.center(), Some(&cell)), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn cap_can_empty_the_region() {
        assert!(SectorRegion::sweep_default(0.02, 1e-5, 1e-2).unwrap().is_none());
        let r = SectorRegion::sweep_default(0.05, 1e-5, 1e-2).unwrap().unwrap();
        assert!((r.r_max - (-5.0f64).exp()).abs() < 1e-15);
        let r = SectorRegion::sweep_default(0.1, 1e-5, 1e-2).unwrap().unwrap();
        assert_eq!(r.r_max, 1e-2);
    }

    #[test]
    fn region_touching_cut_rejected() {
        assert!(matches!(SectorRegion::new(PI, 1e-3, 1e-2), Err(Error::MalformedContour(_))));
        assert!(matches!(SectorRegion::new(1.0, 1e-2, 1e-3), Err(Error::MalformedContour(_))));
    }

    #[test]
    fn contour_through_cut_rejected() {
        let p = FlowParams::new(0.05, 0.02).unwrap();
        let c = ContourSpec::circle(C64::new(0.0, 0.0), 1e-3);
        assert!(matches!(winding_number(&p, 1, &c, 1e-3), Err(Error::MalformedContour(_))));
    }
}
