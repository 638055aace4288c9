//! Mode constants, the spectral function F_n and its small-|z| expansion, and
//! the lower-bound machinery built on K(ζ).

use std::f64::consts::PI;

const EPS: f64 = f64::EPSILON;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{quad_semi_infinite_from, CVec, Decay, QuadOptions};
use crate::special::{bessel_k_scaled, gamma_c, rgamma, sin_pi, BoundMarginReport, EULER_GAMMA};
use crate::{ComplexResult, C64};

/// Default bound on |α| + |δ| for the small regime.
pub const SMALL_WINDOW: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub alpha: f64,
    pub delta: f64,
    /// Smallness window on |α| + |δ|.
    pub window: f64,
}

impl FlowParams {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() || !delta.is_finite() {
            return Err(Error::Domain(format!("non-finite parameters α = {alpha}, δ = {delta}")));
        }
        Ok(FlowParams { alpha, delta, window: SMALL_WINDOW })
    }

    pub fn with_window(mut self, window: f64) -> Self {
        self.window = window;
        self
    }

    pub fn small_regime(&self) -> bool {
        self.alpha.abs() + self.delta.abs() <= self.window
    }

    pub fn one_delta(&self) -> f64 {
        (1.0 + 0.25 * self.delta * self.delta).sqrt()
    }

    pub(crate) fn require_small(&self) -> Result<()> {
        if self.small_regime() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "|α| + |δ| = {} exceeds the small-regime window {}",
                self.alpha.abs() + self.delta.abs(),
                self.window
            )))
        }
    }

    pub(crate) fn require_stable_regime(&self) -> Result<()> {
        if self.alpha == 0.0 {
            return Err(Error::Precondition("α ≠ 0 required".into()));
        }
        if self.delta < 0.0 {
            return Err(Error::Precondition(format!(
                "δ = {} < 0: the injection case is an open problem, only δ ≥ 0 is covered",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeConstants {
    pub n: i32,
    pub xi: C64,
    pub eta: C64,
    pub one_delta: f64,
    pub zeta: C64,
    pub re_xi: f64,
    pub im_xi: f64,
}

/// ξ_n = (n² + δ²/4 + iαn)^{1/2} with Re ξ_n > 0.
pub fn mode_constants(params: &FlowParams, n: i32) -> Result<ModeConstants> {
    if n == 0 {
        return Err(Error::Domain("mode n = 0 has no Bessel order".into()));
    }
    let nf = n as f64;
    let a = nf * nf + 0.25 * params.delta * params.delta;
    let b = params.alpha * nf;
    let re_xi = (0.5 * (a.hypot(b) + a)).sqrt();
    let im_xi = b / (2.0 * re_xi);
    let xi = C64::new(re_xi, im_xi);
    let eta = xi - 1.0;
    Ok(ModeConstants {
        n,
        xi,
        eta,
        one_delta: params.one_delta(),
        zeta: eta + 0.5 * params.delta,
        re_xi,
        im_xi,
    })
}

fn require_unit_mode(n: i32) -> Result<()> {
    if n.abs() != 1 {
        return Err(Error::Domain(format!("only |n| = 1 is supported, got n = {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: C64,
    pub sqrt_lambda: C64,
}

impl SpectralPoint {
    pub fn new(lambda: C64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) || (lambda.im == 0.0 && lambda.re <= 0.0) {
            return Err(Error::Domain("λ must avoid ℝ_{≤0}".into()));
        }
        Ok(SpectralPoint { lambda, sqrt_lambda: lambda.sqrt() })
    }

    /// Point with √λ = z.
    pub fn from_sqrt(z: C64) -> Result<Self> {
        if !(z.re > 0.0) {
            return Err(Error::Domain(format!("√λ = {z} must have positive real part")));
        }
        Ok(SpectralPoint { lambda: z * z, sqrt_lambda: z })
    }

    pub fn polar(modulus: f64, arg: f64) -> Result<Self> {
        Self::new(C64::from_polar(modulus, arg))
    }

    pub fn conj(&self) -> Self {
        SpectralPoint { lambda: self.lambda.conj(), sqrt_lambda: self.sqrt_lambda.conj() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub leading: C64,
    pub remainder_bound: f64,
    pub observed_defect: f64,
}

impl ExpansionReport {
    pub fn ratio(&self) -> f64 {
        if self.observed_defect == 0.0 {
            0.0
        } else {
            self.observed_defect / self.remainder_bound
        }
    }
}

/// Defects of Re η ≈ (α²+δ²)/8 and Im η ≈ sgn(αn)|α|/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaExpansion {
    pub re: ExpansionReport,
    pub im: ExpansionReport,
}

pub fn eta_expansion_defect(params: &FlowParams, n: i32) -> Result<EtaExpansion> {
    require_unit_mode(n)?;
    params.require_small()?;
    let m = mode_constants(params, n)?;
    let (a, d) = (params.alpha, params.delta);
    let re_lead = (a * a + d * d) / 8.0;
    let im_lead = (a * n as f64).signum() * a.abs() / 2.0;
    let im_lead = if a == 0.0 { 0.0 } else { im_lead };
    Ok(EtaExpansion {
        re: ExpansionReport {
            leading: C64::new(re_lead, 0.0),
            remainder_bound: a.powi(4) + d.powi(4),
            observed_defect: (m.eta.re - re_lead).abs(),
        },
        im: ExpansionReport {
            leading: C64::new(0.0, im_lead),
            remainder_bound: a.abs() * (a * a + d * d),
            observed_defect: (m.eta.im - im_lead).abs(),
        },
    })
}

fn f_options(tol: f64) -> Result<QuadOptions> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(QuadOptions::relative(tol).with_max_intervals(2000))
}

fn budget_to_range(e: Error, z: C64) -> Error {
    match e {
        Error::BudgetExhausted { .. } => Error::Range(format!(
            "F_n quadrature did not converge at √λ = {z}; use the small-|z| expansion instead"
        )),
        other => other,
    }
}

fn kernel_exponent(params: &FlowParams, n: i32) -> f64 {
    1.0 - n.abs() as f64 - 0.5 * params.delta
}

/// F_n(√λ) = ∫_1^∞ s^{1-|n|-δ/2} K_{ξ_n}(√λ s) ds; `tol` is relative.
pub fn f_n_direct(params: &FlowParams, n: i32, point: &SpectralPoint, tol: f64) -> Result<ComplexResult> {
    let m = mode_constants(params, n)?;
    let z = point.sqrt_lambda;
    let p = kernel_exponent(params, n);
    let opts = f_options(tol)?;
    let mut failure = None;
    let mut f = |s: f64| {
        let x = z * s;
        match bessel_k_scaled(m.xi, x) {
            Ok(k) => k.value * (-x).exp() * s.powf(p),
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let r = quad_semi_infinite_from(&mut f, 1.0, Decay::Exponential(z.re), &opts, first_width(z))
        .map_err(|e| budget_to_range(e, z))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ComplexResult { value: r.value, abs_err: r.abs_err })
}

fn first_width(z: C64) -> f64 {
    (0.5 / z.norm()).clamp(0.05, 1.0)
}

/// F_n and λ·dF_n/dλ from one quadrature, differentiating the kernel in λ.
pub fn f_n_with_derivative(
    params: &FlowParams,
    n: i32,
    point: &SpectralPoint,
    tol: f64,
) -> Result<(ComplexResult, ComplexResult)> {
    let m = mode_constants(params, n)?;
    let z = point.sqrt_lambda;
    let p = kernel_exponent(params, n);
    let opts = f_options(tol)?;
    let mut failure = None;
    let mut f = |s: f64| {
        let x = z * s;
        let k = bessel_k_scaled(m.xi, x).and_then(|k| Ok((k.value, bessel_k_scaled(m.xi - 1.0, x)?.value)));
        match k {
            Ok((k, km1)) => {
                let e = (-x).exp() * s.powf(p);
                let dk = -km1 - m.xi / x * k;
                CVec([k * e, dk * e * s * z * 0.5])
            }
            Err(err) => {
                failure.get_or_insert(err);
                CVec([C64::new(0.0, 0.0); 2])
            }
        }
    };
    let r = quad_semi_infinite_from(&mut f, 1.0, Decay::Exponential(z.re), &opts, first_width(z))
        .map_err(|e| budget_to_range(e, z))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let scale = r.value.0[0].norm().max(r.value.0[1].norm()).max(f64::MIN_POSITIVE);
    let rel = r.abs_err / scale;
    Ok((
        ComplexResult { value: r.value.0[0], abs_err: rel * r.value.0[0].norm() },
        ComplexResult { value: r.value.0[1], abs_err: rel * scale },
    ))
}

/// F_n(z) from the Mellin moment ∫_0^∞ t^p K_ξ(t) dt = 2^{p−1}Γ((1+p−ξ)/2)Γ((1+p+ξ)/2),
/// continued in p, minus the termwise integral of the power series of K_ξ over [0, z].
pub fn f_n_series(params: &FlowParams, n: i32, z: C64) -> Result<ComplexResult> {
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("z = {z} must lie in the right half-plane")));
    }
    if z.norm() > SERIES_MAX {
        return Err(Error::Range(format!("|z| = {} beyond the series window {SERIES_MAX}", z.norm())));
    }
    let m = mode_constants(params, n)?;
    let xi = m.xi;
    let p = kernel_exponent(params, n);
    let s = sin_pi(xi);
    if s.norm() < 1e-12 {
        return Err(Error::Precondition(format!("integer order ξ = {xi}")));
    }
    let moment = gamma_c((1.0 + p - xi) * 0.5)? * gamma_c((1.0 + p + xi) * 0.5)? * 2f64.powf(p - 1.0);
    let head = z.powf(-1.0 - p) * moment;
    let mut sum = C64::new(0.0, 0.0);
    let mut biggest = 0.0f64;
    for sign in [-1.0, 1.0] {
        let nu = xi * sign;
        let mut c = (z * 0.5).powc(nu) * rgamma(nu + 1.0);
        let q = z * z * 0.25;
        for k in 0..200 {
            let kf = k as f64;
            if k > 0 {
                c = c * q / (kf * (nu + kf));
            }
            let denom = nu + 2.0 * kf + p + 1.0;
            if denom.norm() < 1e-14 {
                return Err(Error::Precondition("degenerate exponent in the Mellin series".into()));
            }
            let t = c / denom * (-sign);
            sum += t;
            biggest = biggest.max(t.norm());
            if k > 2 && t.norm() <= EPS * sum.norm() {
                break;
            }
        }
    }
    let f = PI * 0.5 / s;
    let value = head - f * sum;
    let abs_err = 16.0 * EPS * (head.norm() + f.norm() * biggest);
    Ok(ComplexResult { value, abs_err })
}

/// Largest |z| accepted by [`f_n_series`].
pub const SERIES_MAX: f64 = 2.0;

/// Evaluation route for F_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FnMethod {
    Quadrature,
    Series,
    /// Series for |√λ| ≤ 1, quadrature beyond.
    #[default]
    Auto,
}

/// F_n(√λ) by the chosen route; `tol` is relative and applies to quadrature.
pub fn f_n_eval(params: &FlowParams, n: i32, point: &SpectralPoint, tol: f64, method: FnMethod) -> Result<ComplexResult> {
    match method {
        FnMethod::Quadrature => f_n_direct(params, n, point, tol),
        FnMethod::Series => f_n_series(params, n, point.sqrt_lambda),
        FnMethod::Auto if point.sqrt_lambda.norm() <= 1.0 => f_n_series(params, n, point.sqrt_lambda),
        FnMethod::Auto => f_n_direct(params, n, point, tol),
    }
}

/// λ·dF_n/dλ from F_n after integrating the differentiated kernel by parts:
/// λF′ = −(K_ξ(√λ) + (2−|n|−δ/2)·F) / 2.
pub fn lambda_dfn_from_fn(params: &FlowParams, n: i32, point: &SpectralPoint, f: C64) -> Result<C64> {
    let m = mode_constants(params, n)?;
    let z = point.sqrt_lambda;
    let k = bessel_k_scaled(m.xi, z)?.value * (-z).exp();
    Ok(-(k + (kernel_exponent(params, n) + 1.0) * f) * 0.5)
}

/// F_n(z) from (δ/2+η_n)F_n(z) = K_{1+η_n}(z) − z∫_1^∞ s^{1-δ/2} K_{η_n}(zs) ds.
pub fn f_n_reduced(params: &FlowParams, n: i32, z: C64, tol: f64) -> Result<ComplexResult> {
    require_unit_mode(n)?;
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("z = {z} must lie in the right half-plane")));
    }
    let m = mode_constants(params, n)?;
    if m.zeta.norm() < 1e-14 {
        return Err(Error::Precondition("δ/2 + η_n vanishes; the reduction is degenerate".into()));
    }
    let opts = f_options(tol)?;
    let p = 1.0 - 0.5 * params.delta;
    let mut failure = None;
    let mut f = |s: f64| {
        let x = z * s;
        match bessel_k_scaled(m.eta, x) {
            Ok(k) => k.value * (-x).exp() * s.powf(p),
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let r = quad_semi_infinite_from(&mut f, 1.0, Decay::Exponential(z.re), &opts, first_width(z))
        .map_err(|e| budget_to_range(e, z))?;
    if let Some(e) = failure {
        return Err(e);
    }
    let k1 = bessel_k_scaled(m.xi, z)?;
    let ez = (-z).exp();
    let rhs = k1.value * ez - z * r.value;
    let err = k1.abs_err * ez.norm() + z.norm() * r.abs_err;
    Ok(ComplexResult { value: rhs / m.zeta, abs_err: err / m.zeta.norm() })
}

/// Δ(δ, η) = Γ(1 − δ/4 − η/2) Γ(1 − δ/4 + η/2).
pub fn delta_coeff(delta: f64, eta: C64) -> Result<C64> {
    let base = C64::new(1.0 - 0.25 * delta, 0.0);
    Ok(gamma_c(base - 0.5 * eta)? * gamma_c(base + 0.5 * eta)?)
}

/// Leading terms of (δ/2+η_n)F_n(z) for small |z|.
pub fn expansion_leading(params: &FlowParams, n: i32, z: C64) -> Result<C64> {
    require_unit_mode(n)?;
    let m = mode_constants(params, n)?;
    let half = z * 0.5;
    let first = gamma_c(1.0 + m.eta)? * 0.5 * half.powc(-1.0 - m.eta);
    let second = delta_coeff(params.delta, m.eta)? * 0.5 * half.powf(-1.0 + 0.5 * params.delta);
    Ok(first - second)
}

pub fn f_n_expansion(params: &FlowParams, n: i32, z: C64, tol: f64) -> Result<ExpansionReport> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} must be < 1", z.norm())));
    }
    let point = SpectralPoint::from_sqrt(z)?;
    let leading = expansion_leading(params, n, z)?;
    let m = mode_constants(params, n)?;
    let f = f_n_direct(params, n, &point, tol)?;
    let lz = z.norm().ln().abs();
    Ok(ExpansionReport {
        leading,
        remainder_bound: z.norm().powf(1.0 - m.eta.re) * (1.0 + lz),
        observed_defect: (m.zeta * f.value - leading).norm(),
    })
}

/// Remainder of K_{1+η}(z) ≈ Γ(1+η)/2·(z/2)^{-1-η} against |z|^{1-Re η}(1+|log|z||).
pub fn bessel_leading_defect(params: &FlowParams, n: i32, z: C64) -> Result<ExpansionReport> {
    require_unit_mode(n)?;
    if z.norm() >= 1.0 || !(z.re > 0.0) {
        return Err(Error::Domain(format!("z = {z} must satisfy |z| < 1, Re z > 0")));
    }
    let m = mode_constants(params, n)?;
    let leading = gamma_c(1.0 + m.eta)? * 0.5 * (z * 0.5).powc(-1.0 - m.eta);
    let k = bessel_k_scaled(m.xi, z)?.value * (-z).exp();
    Ok(ExpansionReport {
        leading,
        remainder_bound: z.norm().powf(1.0 - m.eta.re) * (1.0 + z.norm().ln().abs()),
        observed_defect: (k - leading).norm(),
    })
}

/// h(T) = ∫_0^T τ^{-1} e^{-1/τ} dτ = ∫_{1/T}^∞ u^{-1} e^{-u} du.
pub fn h_function(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("h(T) needs T > 0, got {t}")));
    }
    let a = 1.0 / t;
    let opts = QuadOptions::absolute(1e-13).with_max_intervals(4000);
    let mut f = |u: f64| C64::new((-u).exp() / u, 0.0);
    let r = quad_semi_infinite_from(&mut f, a, Decay::Exponential(1.0), &opts, a.max(1e-3))?;
    Ok(r.value.re)
}

/// K(ζ) = min{(Re ζ)²/|Im ζ| + |Im ζ|, Re ζ}.
pub fn k_floor(zeta: C64) -> Result<f64> {
    if !(zeta.re > 0.0) || zeta.im == 0.0 {
        return Err(Error::Domain(format!("K(ζ) needs Re ζ > 0 and Im ζ ≠ 0, got ζ = {zeta}")));
    }
    let b = zeta.im.abs();
    Ok((zeta.re * zeta.re / b + b).min(zeta.re))
}

/// Checks the hypotheses on (ζ, κ, ε) under which |1 − w^ζ| ≳ min{1, K(ζ)|log|w||}.
pub fn power_gap_conditions(zeta: C64, kappa: f64, eps: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::Precondition(format!("κ = {kappa} must lie in (0, 1/2)")));
    }
    if !(eps > 0.0 && eps < 0.5 * PI) {
        return Err(Error::Precondition(format!("ε = {eps} must lie in (0, π/2)")));
    }
    k_floor(zeta).map_err(|_| Error::Precondition(format!("Re ζ > 0 and |Im ζ| > 0 fail for ζ = {zeta}")))?;
    let lhs = (zeta.re + (1.0 + kappa) * zeta.im * zeta.im / zeta.re) * (0.5 * PI - eps);
    if !(lhs < PI) {
        return Err(Error::Precondition(format!(
            "{{Re ζ + (1+κ)(Im ζ)²/Re ζ}}(π/2 − ε) = {lhs} is not < π"
        )));
    }
    Ok(())
}

/// |1 − w^ζ| / min{1, K(ζ)|log|w||}.
pub fn power_gap_check(zeta: C64, w: C64, kappa: f64, eps: f64) -> Result<f64> {
    power_gap_conditions(zeta, kappa, eps)?;
    if !(w.norm() < 1.0) || w.norm() == 0.0 || w.arg().abs() >= 0.5 * PI - eps {
        return Err(Error::Domain(format!("w = {w} must satisfy |w| < 1 and |arg w| < π/2 − ε")));
    }
    let gap = (1.0 - (zeta * w.ln()).exp()).norm();
    let floor = 1f64.min(k_floor(zeta)? * w.norm().ln().abs());
    Ok(gap / floor)
}

/// Points z = √λ of Σ_{π/2−ε} ∩ {|z| < K(δ/2+η_n)}: `radial` moduli geometric
/// over two decades below the radius, `angular` arguments uniform.
pub fn floor_region_samples(
    params: &FlowParams,
    n: i32,
    eps: f64,
    radial: usize,
    angular: usize,
) -> Result<Vec<SpectralPoint>> {
    let m = mode_constants(params, n)?;
    let kz = k_floor(m.zeta)?;
    if radial == 0 || angular == 0 {
        return Err(Error::Precondition("empty sample grid".into()));
    }
    let theta_max = 0.5 * PI - eps;
    let mut out = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let t = if radial == 1 { 0.5 } else { i as f64 / (radial - 1) as f64 };
        let r = kz * 10f64.powf(-2.0 + 1.9 * t);
        for j in 0..angular {
            let u = if angular == 1 { 0.5 } else { j as f64 / (angular - 1) as f64 };
            let th = theta_max * 0.98 * (2.0 * u - 1.0);
            out.push(SpectralPoint::from_sqrt(C64::from_polar(r, th))?);
        }
    }
    Ok(out)
}

/// inf over samples of |ζ_n F_n(z)| / (|z|^{-1-Re η_n} min{1, K(ζ_n)|log|z||}).
pub fn fn_floor_margin(
    params: &FlowParams,
    n: i32,
    eps: f64,
    samples: &[SpectralPoint],
) -> Result<BoundMarginReport> {
    require_unit_mode(n)?;
    params.require_stable_regime()?;
    params.require_small()?;
    if samples.is_empty() {
        return Err(Error::Precondition("empty sample grid".into()));
    }
    if !(eps > 0.0 && eps < 0.5 * PI) {
        return Err(Error::Precondition(format!("ε = {eps} must lie in (0, π/2)")));
    }
    let m = mode_constants(params, n)?;
    let kz = k_floor(m.zeta)?;
    for p in samples {
        let z = p.sqrt_lambda;
        if z.norm() >= kz || z.arg().abs() >= 0.5 * PI - eps {
            return Err(Error::Precondition(format!(
                "sample √λ = {z} lies outside Σ_{{π/2−ε}} ∩ {{|z| < K = {kz:.4e}}}"
            )));
        }
    }
    let ratios: Vec<(f64, C64)> = samples
        .par_iter()
        .map(|p| {
            let z = p.sqrt_lambda;
            let f = f_n_reduced(params, n, z, 1e-11)?;
            let lz = z.norm().ln().abs();
            let bound = z.norm().powf(-1.0 - m.eta.re) * 1f64.min(kz * lz);
            Ok(((m.zeta * f.value).norm() / bound, z))
        })
        .collect::<Result<_>>()?;
    Ok(BoundMarginReport::from_samples(
        "F-floor",
        format!("Σ_{{π/2−{eps}}} ∩ {{|√λ| < {kz:.4e}}}, {} samples", samples.len()),
        &ratios,
        true,
    ))
}

/// Euler's constant times δ/2, the first-order value of Log Δ(δ, η).
pub fn log_delta_first_order(delta: f64) -> f64 {
    EULER_GAMMA * 0.5 * delta
}

/// Outer radius of the zero-free λ-disk from K(δ/2+η_n), i.e. K².
pub fn floor_lambda_radius(params: &FlowParams, n: i32) -> Result<f64> {
    let m = mode_constants(params, n)?;
    Ok(k_floor(m.zeta)?.powi(2))
}

/// e^{-1/(4|α|)}, the small-|λ| cap used for the simplified floor.
pub fn simplified_lambda_radius(params: &FlowParams) -> Result<f64> {
    if params.alpha == 0.0 {
        return Err(Error::Precondition("α ≠ 0 required".into()));
    }
    Ok((-1.0 / (4.0 * params.alpha.abs())).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, d: f64) -> FlowParams {
        FlowParams::new(a, d).unwrap()
    }

    #[test]
    fn xi_examples() {
        let m = mode_constants(&p(0.0, 0.0), 1).unwrap();
        assert_eq!(m.xi, C64::new(1.0, 0.0));
        assert_eq!(m.eta, C64::new(0.0, 0.0));
        assert_eq!(m.one_delta, 1.0);
        let m = mode_constants(&p(0.1, 0.0), 1).unwrap();
        let frozen = C64::new(1.001_246_114_127_812_5, 0.049_937_771_837_002_44);
        assert!((m.xi - frozen).norm() < 1e-14, "{}", m.xi);
        let m = mode_constants(&p(0.0, 2.0), 1).unwrap();
        assert!((m.xi.re - 2f64.sqrt()).abs() < 1e-15);
        assert!(mode_constants(&p(0.1, 0.0), 0).is_err());
    }

    #[test]
    fn xi_branch_and_sign() {
        for &(a, d, n) in &[(0.07, 0.03, 1), (-0.07, 0.03, 1), (0.07, -0.04, -1), (0.5, 1.0, 2)] {
            let m = mode_constants(&p(a, d), n).unwrap();
            let nf = n as f64;
            let sq = C64::new(nf * nf + d * d / 4.0, a * nf);
            assert!((m.xi * m.xi - sq).norm() < 1e-12);
            assert!((m.xi - sq.sqrt()).norm() < 1e-14);
            assert_eq!(m.im_xi.signum(), (a * nf).signum());
        }
    }

    #[test]
    fn eta_expansion_examples() {
        let e = eta_expansion_defect(&p(0.1, 0.0), 1).unwrap();
        assert!((e.re.observed_defect - 3.885_872_187_51e-6).abs() < 1e-15, "{}", e.re.observed_defect);
        assert!((e.re.ratio() - 0.038_858_7).abs() < 1e-6);
        let e = eta_expansion_defect(&p(0.0, 0.1), 1).unwrap();
        assert_eq!(e.im.observed_defect, 0.0);
        assert!(eta_expansion_defect(&p(0.2, 0.1), 1).is_err());
    }

    #[test]
    fn spectral_point_rejects_cut() {
        let e = SpectralPoint::new(C64::new(-1.0, 0.0)).unwrap_err();
        assert!(e.to_string().contains("λ must avoid ℝ_{≤0}"));
        assert!(SpectralPoint::new(C64::new(0.0, 0.0)).is_err());
        let s = SpectralPoint::new(C64::new(-1.0, 1e-3)).unwrap();
        assert!(s.sqrt_lambda.re > 0.0);
    }

    #[test]
    fn h_examples() {
        assert!((h_function(10.0).unwrap() - 1.822_923_958_419_39).abs() < 1e-9);
        let h = h_function(100.0).unwrap();
        let l = 100f64.ln();
        assert!((-1f64).exp() * l <= h && h <= l);
        assert!(h_function(1e-3).unwrap() < 1e-3);
        assert!(h_function(0.0).is_err());
    }

    #[test]
    fn k_floor_examples() {
        assert_eq!(k_floor(C64::new(1.0, 1.0)).unwrap(), 1.0);
        assert!((k_floor(C64::new(0.1, 0.5)).unwrap() - 0.1).abs() < 1e-15);
        assert!((k_floor(C64::new(0.1, 0.001)).unwrap() - 0.1).abs() < 1e-15);
        assert!(k_floor(C64::new(0.1, 0.0)).is_err());
        assert!(k_floor(C64::new(-0.1, 0.2)).is_err());
    }

    #[test]
    fn power_gap_examples() {
        let r = power_gap_check(C64::new(0.1, 0.001), C64::new((-1f64).exp(), 0.0), 0.25, 0.1).unwrap();
        assert!((r - 0.952).abs() < 1e-3, "{r}");
        let z = C64::new(0.01, 0.05);
        for k in 2..=6 {
            let w = C64::new(1.0 - 10f64.powi(-k), 0.0);
            let r = power_gap_check(z, w, 0.25, 0.1).unwrap();
            assert!((r - 5.099).abs() < 2e-3, "{k} {r}");
        }
        assert!(matches!(power_gap_check(z, C64::new(0.5, 0.0), 0.6, 0.1), Err(Error::Precondition(_))));
        let e = power_gap_check(C64::new(3.0, 1.0), C64::new(0.5, 0.0), 0.25, 0.1).unwrap_err();
        assert!(e.to_string().contains("is not < π"));
    }

    #[test]
    fn delta_coeff_examples() {
        assert!((delta_coeff(0.0, C64::new(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        let eta = C64::new(0.001, 0.05);
        let a = delta_coeff(0.1, eta).unwrap();
        let b = delta_coeff(0.1, -eta).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn f_three_ways() {
        let q = p(0.05, 0.02);
        let z = C64::new(0.1, 0.0);
        let pt = SpectralPoint::from_sqrt(z).unwrap();
        let d = f_n_direct(&q, 1, &pt, 1e-12).unwrap();
        let r = f_n_reduced(&q, 1, z, 1e-12).unwrap();
        assert!((d.value - r.value).norm() < 1e-8 * d.value.norm(), "{} {}", d.value, r.value);
        let (f, lf) = f_n_with_derivative(&q, 1, &pt, 1e-12).unwrap();
        assert!((f.value - d.value).norm() < 1e-10 * d.value.norm());
        let lf2 = lambda_dfn_from_fn(&q, 1, &pt, d.value).unwrap();
        assert!((lf.value - lf2).norm() < 1e-9 * lf2.norm(), "{} {}", lf.value, lf2);
    }

    #[test]
    fn series_matches_quadrature() {
        for &(a, d) in &[(0.05, 0.02), (-0.08, 0.0), (0.1, -0.03), (0.02, 0.05)] {
            let q = p(a, d);
            for &(m, arg) in &[(1e-5, 2.2), (1e-3, -1.0), (0.04, 0.3), (0.5, 2.0), (1.5, -0.2)] {
                let pt = SpectralPoint::polar(m, arg).unwrap();
                for n in [1, -1] {
                    let d = f_n_direct(&q, n, &pt, 1e-12).unwrap();
                    let s = f_n_series(&q, n, pt.sqrt_lambda).unwrap();
                    let rel = (d.value - s.value).norm() / d.value.norm();
                    assert!(rel < 1e-10, "{a} {d:?} {m} {arg} {rel:e}");
                }
            }
        }
    }

    #[test]
    fn f_conjugation() {
        let q = p(0.1, 0.05);
        let pt = SpectralPoint::new(C64::new(0.01, 0.01)).unwrap();
        let a = f_n_direct(&q, 1, &pt, 1e-12).unwrap().value;
        let b = f_n_direct(&q, -1, &pt.conj(), 1e-12).unwrap().value;
        assert!((a.conj() - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn reduced_rejects_degenerate() {
        let e = f_n_reduced(&p(0.0, 0.0), 1, C64::new(0.1, 0.0), 1e-10).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn floor_margin_preconditions() {
        let e = fn_floor_margin(&p(0.05, -0.01), 1, 0.1, &[]).unwrap_err();
        assert!(e.to_string().contains("open problem"));
    }
}
