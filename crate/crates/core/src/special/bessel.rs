use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gamma::{rgamma, sin_pi};
use crate::error::{Error, Result};
use crate::numerics::{quad_partition, QuadOptions};
use crate::ComplexResult;

const EPS: f64 = f64::EPSILON;
/// Largest |z| for the unscaled evaluators.
pub const UNSCALED_LIMIT: f64 = 200.0;
const ASYMPTOTIC_FROM: f64 = 18.0;
const CONNECTION_UP_TO: f64 = 2.0;
const NEAR_INTEGER_SIN: f64 = 1e-3;

/// A Bessel order μ with Re μ ≥ 0; integer orders are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselOrder {
    pub mu: C64,
    pub integer_distance: f64,
    pub integer: bool,
}

impl BesselOrder {
    pub fn new(mu: C64) -> Result<Self> {
        if !(mu.re >= 0.0) || !mu.im.is_finite() {
            return Err(Error::Domain(format!("Bessel order needs Re mu >= 0, got {mu}")));
        }
        let d = (mu - mu.re.round()).norm();
        Ok(BesselOrder { mu, integer_distance: d, integer: d == 0.0 })
    }

    pub fn real(mu: f64) -> Result<Self> {
        Self::new(C64::new(mu, 0.0))
    }

    pub fn near_integer(&self) -> bool {
        sin_pi(self.mu).norm() <= NEAR_INTEGER_SIN
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KMethod {
    Auto,
    Connection,
    Integral,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IMethod {
    Auto,
    Series,
    Integral,
    Asymptotic,
}

fn check_arg(z: C64) -> Result<()> {
    if !(z.re > 0.0) || !z.im.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must lie in the right half-plane, got {z}")));
    }
    Ok(())
}

fn is_negative_integer(mu: C64) -> bool {
    mu.im == 0.0 && mu.re < 0.0 && mu.re == mu.re.round()
}

/// Power series of I_μ(z), unscaled; any order, z off the negative axis.
pub fn i_series(mu: C64, z: C64) -> ComplexResult {
    if is_negative_integer(mu) {
        return i_series(-mu, z);
    }
    let q = z * z * 0.25;
    let mut term = (mu * (z * 0.5).ln()).exp() * rgamma(mu + 1.0);
    let mut sum = term;
    let mut sabs = term.norm();
    let mut tail = 0.0;
    for m in 0..2000usize {
        let mf = m as f64;
        term = term * q / ((mf + 1.0) * (mu + mf + 1.0));
        sum += term;
        sabs += term.norm();
        let ratio = q.norm() / ((mf + 2.0) * (mu + mf + 2.0).norm());
        if mf + 1.0 > -mu.re && ratio < 0.5 && term.norm() <= 1e-17 * sum.norm() {
            tail = term.norm() * ratio / (1.0 - ratio);
            break;
        }
    }
    ComplexResult { value: sum, abs_err: 4.0 * EPS * sabs + tail }
}

/// Σ a_k(μ)/z^k and Σ (−1)^k a_k(μ)/z^k, optimally truncated.
fn hankel_sums(mu: C64, z: C64) -> (C64, C64, f64) {
    let m4 = mu * mu * 4.0;
    let inv = 1.0 / z;
    let mut term = C64::new(1.0, 0.0);
    let mut plus = term;
    let mut minus = term;
    let mut last = f64::INFINITY;
    let mut err = 0.0;
    for k in 1..400usize {
        let kf = k as f64;
        let next = term * (m4 - (2.0 * kf - 1.0).powi(2)) * inv / (8.0 * kf);
        let nn = next.norm();
        if nn > last && kf > mu.norm() + 1.0 {
            err = last;
            break;
        }
        term = next;
        plus += term;
        minus += if k % 2 == 0 { term } else { -term };
        last = nn;
        if nn <= 1e-17 * plus.norm().min(minus.norm()) {
            err = nn;
            break;
        }
    }
    (plus, minus, err)
}

/// e^{z} K_μ(z) from the Hankel expansion.
fn k_asymptotic_scaled(mu: C64, z: C64) -> ComplexResult {
    let (plus, _, err) = hankel_sums(mu, z);
    let pre = (C64::new(PI, 0.0) / (2.0 * z)).sqrt();
    ComplexResult { value: pre * plus, abs_err: pre.norm() * (err + 4.0 * EPS * plus.norm()) }
}

/// e^{-z} I_μ(z) from the Hankel expansion, subdominant term included.
fn i_asymptotic_scaled(mu: C64, z: C64) -> ComplexResult {
    let (plus, minus, err) = hankel_sums(mu, z);
    let pre = 1.0 / (2.0 * PI * z).sqrt();
    let i = C64::i();
    let up = i * (i * PI * mu).exp();
    let down = -i * (-i * PI * mu).exp();
    let c = if z.im > 0.0 {
        up
    } else if z.im < 0.0 {
        down
    } else {
        0.5 * (up + down)
    };
    let value = pre * (minus + c * (-2.0 * z).exp() * plus);
    ComplexResult { value, abs_err: pre.norm() * (err + 4.0 * EPS * minus.norm()) }
}

/// e^{z} K_μ(z) from π/2 (I_{−μ} − I_μ)/sin(μπ).
fn k_connection_scaled(mu: C64, z: C64) -> Result<ComplexResult> {
    let s = sin_pi(mu);
    if s.norm() <= NEAR_INTEGER_SIN {
        return Err(Error::MethodFailure(format!("connection formula at near-integer order {mu}")));
    }
    let a = i_series(-mu, z);
    let b = i_series(mu, z);
    let f = z.exp() * (PI * 0.5) / s;
    let value = (a.value - b.value) * f;
    let abs_err = f.norm() * (a.abs_err + b.abs_err + 2.0 * EPS * (a.value.norm() + b.value.norm()));
    Ok(ComplexResult { value, abs_err })
}

fn upper_limit(re_z: f64, re_mu: f64, target: f64) -> f64 {
    let mut u = 1.0f64;
    for _ in 0..60 {
        let nu = 2.0 * ((target + re_mu * u) / (2.0 * re_z)).sqrt().asinh();
        if (nu - u).abs() < 1e-12 * u.max(1.0) {
            return nu;
        }
        u = nu;
    }
    u
}

fn adaptive<F: FnMut(f64) -> C64>(f: &mut F, b: f64, pieces: usize) -> Result<ComplexResult> {
    let breaks: Vec<f64> = (0..=pieces).map(|k| b * k as f64 / pieces as f64).collect();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 600 };
    match quad_partition(f, &breaks, &opts) {
        Ok(r) => Ok(ComplexResult { value: r.value, abs_err: r.abs_err }),
        Err(Error::BudgetExhausted { best, .. }) if best.abs_err <= 1e-9 * best.value.norm() => {
            Ok(ComplexResult { value: best.value, abs_err: best.abs_err })
        }
        Err(e) => Err(Error::MethodFailure(format!("integral representation: {e}"))),
    }
}

/// e^{z} K_μ(z) = ∫_0^∞ e^{−z(cosh u − 1)} cosh(μu) du, the t = e^u form of
/// K_μ(z) = ½∫_0^∞ e^{−(z/2)(t+1/t)} t^{−μ−1} dt folded at t = 1.
fn k_integral_scaled(mu: C64, z: C64) -> Result<ComplexResult> {
    check_arg(z)?;
    let target = 45.0 + 0.5 * (1.0 + z.norm()).ln();
    let u_max = upper_limit(z.re, mu.re.abs(), target);
    let mut f = |u: f64| {
        let h = (u * 0.5).sinh();
        let e = -z * (2.0 * h * h);
        0.5 * ((e + mu * u).exp() + (e - mu * u).exp())
    };
    let strip = 0.5 * PI - z.arg().abs();
    if strip >= TRAPEZOID_STRIP {
        if let Some(r) = trapezoid_even(&mut f, u_max, strip) {
            return Ok(r);
        }
    }
    let pieces = (2.0 + z.im.abs() * 2.0 * (u_max * 0.5).sinh().powi(2) / 12.0).ceil().min(64.0) as usize;
    adaptive(&mut f, u_max, pieces)
}

const TRAPEZOID_STRIP: f64 = 0.25;

/// ∫_0^b of an even integrand analytic in |Im u| < strip and negligible at b.
fn trapezoid_even<F: FnMut(f64) -> C64>(f: &mut F, b: f64, strip: f64) -> Option<ComplexResult> {
    let h = 2.0 * PI * strip.min(1.2) / 64.0;
    let n = (b / h).ceil() as usize;
    if n > 4000 {
        return None;
    }
    let mut even = f(0.0) * 0.5;
    let mut odd = C64::new(0.0, 0.0);
    let mut mass = even.norm();
    for j in 1..=n {
        let v = f(j as f64 * h);
        mass += v.norm();
        if j % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    let fine = (even + odd) * h;
    let coarse = even * (2.0 * h);
    let scale = fine.norm().max(f64::MIN_POSITIVE);
    let rel = (fine - coarse).norm() / scale;
    let abs_err = rel * rel * scale + 4.0 * EPS * mass * h;
    if abs_err > 1e-13 * scale {
        return None;
    }
    Some(ComplexResult { value: fine, abs_err })
}

/// e^{−z} I_μ(z) from
/// I_μ(z) = (1/π)∫_0^π e^{z cos θ} cos(μθ) dθ − (sin μπ/π)∫_0^∞ e^{−z cosh t − μt} dt.
fn i_integral_scaled(mu: C64, z: C64) -> Result<ComplexResult> {
    check_arg(z)?;
    let pieces = (2.0 + z.im.abs() * 2.0 / 6.0).ceil().min(64.0) as usize;
    let mut f = |t: f64| {
        let h = (t * 0.5).sin();
        (-z * (2.0 * h * h)).exp() * (mu * t).cos()
    };
    let first = adaptive(&mut f, PI, pieces)?;
    let s = sin_pi(mu);
    let mut value = first.value / PI;
    let mut abs_err = first.abs_err / PI;
    if s.norm() > 0.0 {
        let u_max = upper_limit(z.re, mu.re.abs(), 45.0);
        let mut g = |t: f64| {
            let h = (t * 0.5).sinh();
            (-z * (2.0 + 2.0 * h * h) - mu * t).exp()
        };
        let second = adaptive(&mut g, u_max, 2)?;
        value -= s / PI * second.value;
        abs_err += s.norm() / PI * second.abs_err;
    }
    Ok(ComplexResult { value, abs_err })
}

/// e^{z} K_μ(z) with explicit method choice; any complex order.
pub fn bessel_k_scaled_with(mu: C64, z: C64, method: KMethod) -> Result<ComplexResult> {
    check_arg(z)?;
    let mu = if mu.re < 0.0 { -mu } else { mu };
    let az = z.norm();
    match method {
        KMethod::Connection => k_connection_scaled(mu, z),
        KMethod::Integral => k_integral_scaled(mu, z),
        KMethod::Asymptotic => Ok(k_asymptotic_scaled(mu, z)),
        KMethod::Auto => {
            if az >= ASYMPTOTIC_FROM {
                Ok(k_asymptotic_scaled(mu, z))
            } else if az <= CONNECTION_UP_TO && sin_pi(mu).norm() > NEAR_INTEGER_SIN {
                k_connection_scaled(mu, z)
            } else {
                k_integral_scaled(mu, z)
            }
        }
    }
}

/// e^{−z} I_μ(z) with explicit method choice; any complex order.
pub fn bessel_i_scaled_with(mu: C64, z: C64, method: IMethod) -> Result<ComplexResult> {
    check_arg(z)?;
    let az = z.norm();
    let series = || {
        let r = i_series(mu, z);
        let e = (-z).exp();
        ComplexResult { value: r.value * e, abs_err: r.abs_err * e.norm() }
    };
    match method {
        IMethod::Series => Ok(series()),
        IMethod::Integral => i_integral_scaled(mu, z),
        IMethod::Asymptotic => Ok(i_asymptotic_scaled(mu, z)),
        IMethod::Auto => {
            if az >= ASYMPTOTIC_FROM {
                Ok(i_asymptotic_scaled(mu, z))
            } else if az <= 9.0 || az - z.re <= 4.0 {
                Ok(series())
            } else {
                i_integral_scaled(mu, z)
            }
        }
    }
}

/// e^{z} K_μ(z).
pub fn bessel_k_scaled(mu: C64, z: C64) -> Result<ComplexResult> {
    bessel_k_scaled_with(mu, z, KMethod::Auto)
}

/// e^{−z} I_μ(z).
pub fn bessel_i_scaled(mu: C64, z: C64) -> Result<ComplexResult> {
    bessel_i_scaled_with(mu, z, IMethod::Auto)
}

fn unscale(r: ComplexResult, factor: C64) -> ComplexResult {
    ComplexResult { value: r.value * factor, abs_err: r.abs_err * factor.norm() }
}

fn check_tol(r: ComplexResult, tol: f64) -> Result<ComplexResult> {
    if r.abs_err > tol.max(1e-15) * r.value.norm().max(f64::MIN_POSITIVE) && r.abs_err > tol {
        return Err(Error::MethodFailure(format!(
            "error estimate {:.3e} exceeds tolerance {tol:.1e} for value {}",
            r.abs_err, r.value
        )));
    }
    Ok(r)
}

/// I_μ(z) for z ∈ Σ_{π/2}, |z| ≤ 200.
pub fn bessel_i(order: &BesselOrder, z: C64, tol: f64) -> Result<ComplexResult> {
    if z.norm() > UNSCALED_LIMIT {
        return Err(Error::Range(format!("|z| = {} beyond {UNSCALED_LIMIT}; use bessel_i_scaled", z.norm())));
    }
    check_tol(unscale(bessel_i_scaled(order.mu, z)?, z.exp()), tol)
}

/// K_μ(z) for z ∈ Σ_{π/2}, |z| ≤ 200.
pub fn bessel_k(order: &BesselOrder, z: C64, tol: f64) -> Result<ComplexResult> {
    if z.norm() > UNSCALED_LIMIT {
        return Err(Error::Range(format!("|z| = {} beyond {UNSCALED_LIMIT}; use bessel_k_scaled", z.norm())));
    }
    check_tol(unscale(bessel_k_scaled(order.mu, z)?, (-z).exp()), tol)
}

/// e^{z} K_μ′(z) via K_μ′ = −K_{μ−1} − (μ/z) K_μ.
pub fn bessel_k_deriv_scaled(mu: C64, z: C64) -> Result<C64> {
    let k = bessel_k_scaled(mu, z)?.value;
    let km = bessel_k_scaled(mu - 1.0, z)?.value;
    Ok(-km - mu / z * k)
}

/// e^{−z} I_μ′(z) via I_μ′ = I_{μ−1} − (μ/z) I_μ.
pub fn bessel_i_deriv_scaled(mu: C64, z: C64) -> Result<C64> {
    let i = bessel_i_scaled(mu, z)?.value;
    let im = bessel_i_scaled(mu - 1.0, z)?.value;
    Ok(im - mu / z * i)
}

/// |z (K_μ I_μ′ − K_μ′ I_μ) − 1| with derivatives from the recurrences
/// z K_{μ+1} = μ K_μ − z K_μ′ and z I_{μ−1} = μ I_μ + z I_μ′.
pub fn wronskian_defect(order: &BesselOrder, z: C64) -> Result<f64> {
    let mu = order.mu;
    let k = bessel_k_scaled(mu, z)?.value;
    let kp1 = bessel_k_scaled(mu + 1.0, z)?.value;
    let i = bessel_i_scaled(mu, z)?.value;
    let im1 = bessel_i_scaled(mu - 1.0, z)?.value;
    let dk = mu / z * k - kp1;
    let di = im1 - mu / z * i;
    Ok((z * (k * di - dk * i) - 1.0).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn half_order_closed_forms() {
        let o = BesselOrder::real(0.5).unwrap();
        let i = bessel_i(&o, c(1.0, 0.0), 1e-14).unwrap().value;
        let k = bessel_k(&o, c(1.0, 0.0), 1e-14).unwrap().value;
        let ie = (2.0 / PI).sqrt() * 1f64.sinh();
        let ke = (PI / 2.0).sqrt() * (-1f64).exp();
        assert!((i.re - ie).abs() < 1e-14 && i.im.abs() < 1e-15);
        assert!((k.re - ke).abs() < 1e-14 && k.im.abs() < 1e-15);
    }

    #[test]
    fn k_methods_agree() {
        for &(mu, z) in &[
            (c(1.02, 0.03), c(0.3, 0.2)),
            (c(0.4, -0.3), c(1.5, -0.7)),
            (c(0.001, 0.025), c(0.8, 0.5)),
            (c(2.0, 0.5), c(1.9, 0.1)),
        ] {
            let a = bessel_k_scaled_with(mu, z, KMethod::Connection).unwrap();
            let b = bessel_k_scaled_with(mu, z, KMethod::Integral).unwrap();
            assert!((a.value - b.value).norm() <= a.abs_err + b.abs_err + 1e-14, "{mu} {z}: {a:?} {b:?}");
        }
        for &(mu, z) in &[(c(1.02, 0.03), c(18.0, 12.0)), (c(0.02, 0.02), c(20.0, -25.0)), (c(2.0, 0.0), c(30.0, 0.0))] {
            let a = bessel_k_scaled_with(mu, z, KMethod::Asymptotic).unwrap();
            let b = bessel_k_scaled_with(mu, z, KMethod::Integral).unwrap();
            assert!((a.value - b.value).norm() <= 1e-13 * a.value.norm(), "{mu} {z}: {a:?} {b:?}");
        }
    }

    #[test]
    fn i_methods_agree() {
        for &(mu, z) in &[
            (c(1.02, 0.03), c(9.0, 8.0)),
            (c(2.05, -0.03), c(12.0, 3.0)),
            (c(0.001, 0.02), c(7.0, -12.0)),
        ] {
            let a = bessel_i_scaled_with(mu, z, IMethod::Series).unwrap();
            let b = bessel_i_scaled_with(mu, z, IMethod::Integral).unwrap();
            assert!((a.value - b.value).norm() <= 1e-11 * b.value.norm(), "{mu} {z}: {a:?} {b:?}");
        }
        for &(mu, z) in &[(c(1.02, 0.03), c(18.0, 12.0)), (c(2.0, 0.4), c(25.0, -10.0)), (c(1.0, 0.0), c(20.0, 0.0))] {
            let a = bessel_i_scaled_with(mu, z, IMethod::Asymptotic).unwrap();
            let b = bessel_i_scaled_with(mu, z, IMethod::Integral).unwrap();
            assert!((a.value - b.value).norm() <= 1e-12 * b.value.norm(), "{mu} {z}: {a:?} {b:?}");
        }
    }

    #[test]
    fn integer_order_uses_integral() {
        let o = BesselOrder::real(0.0).unwrap();
        assert!(o.integer && o.near_integer());
        let k0 = bessel_k(&o, c(1.0, 0.0), 1e-12).unwrap().value;
        assert!((k0.re - 0.42102443824070833).abs() < 1e-14);
        assert!(matches!(
            bessel_k_scaled_with(c(1.0, 0.0), c(1.0, 0.0), KMethod::Connection),
            Err(Error::MethodFailure(_))
        ));
    }

    #[test]
    fn range_and_domain() {
        let o = BesselOrder::real(1.5).unwrap();
        assert!(matches!(bessel_i(&o, c(250.0, 0.0), 1e-10), Err(Error::Range(_))));
        assert!(bessel_k(&o, c(-1.0, 0.0), 1e-10).is_err());
        assert!(BesselOrder::real(-0.5).is_err());
    }
}
