//! Adaptive Gauss–Kronrod quadrature on finite intervals, half-lines and
//! piecewise-smooth paths in the complex plane.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Values a quadrature rule can accumulate.
pub trait QuadValue:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn size(&self) -> f64;
    fn finite(&self) -> bool;
    /// First component, reported in errors.
    fn lead(&self) -> C64;
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn size(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn lead(&self) -> C64 {
        *self
    }
}

/// Fixed-length complex vector integrated component-wise; its size is the max modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVec<const N: usize>(#[serde(with = "serde_arrays")] pub [C64; N]);

mod serde_arrays {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(v: &[C64; N], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[C64; N], D::Error> {
        let v: Vec<C64> = Vec::deserialize(d)?;
        v.try_into().map_err(|_| serde::de::Error::custom("wrong length"))
    }
}

impl<const N: usize> std::ops::Add for CVec<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] += o.0[k];
        }
        self
    }
}

impl<const N: usize> std::ops::Sub for CVec<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for k in 0..N {
            self.0[k] -= o.0[k];
        }
        self
    }
}

impl<const N: usize> std::ops::Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(mut self, c: f64) -> Self {
        for k in 0..N {
            self.0[k] *= c;
        }
        self
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([C64::new(0.0, 0.0); N])
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
    fn finite(&self) -> bool {
        self.0.iter().all(|v| v.finite())
    }
    fn lead(&self) -> C64 {
        self.0.first().copied().unwrap_or_default()
    }
}

/// Value of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult<V = C64> {
    pub value: V,
    pub abs_err: f64,
    pub evaluations: usize,
}

impl<V: QuadValue> QuadResult<V> {
    pub fn zero() -> Self {
        QuadResult { value: V::zero(), abs_err: 0.0, evaluations: 0 }
    }

    pub fn add(self, other: QuadResult<V>) -> QuadResult<V> {
        QuadResult {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

impl QuadResult<C64> {
    pub fn scale(self, c: C64) -> QuadResult<C64> {
        QuadResult { value: self.value * c, abs_err: self.abs_err * c.norm(), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: DEFAULT_TOL, rel_tol: 0.0, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, ..Default::default() }
    }

    pub fn relative(tol: f64) -> Self {
        QuadOptions { abs_tol: 0.0, rel_tol: tol, ..Default::default() }
    }

    pub fn with_abs(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn target<V: QuadValue>(&self, value: V) -> f64 {
        self.abs_tol.max(self.rel_tol * value.size())
    }
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980914195,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// (node, Kronrod weight, embedded Gauss weight) of the 21-point rule on [−1, 1].
pub fn gk21_rule() -> [(f64, f64, f64); 21] {
    let mut out = [(0.0, 0.0, 0.0); 21];
    out[10] = (0.0, WGK[10], 0.0);
    for j in 0..10 {
        let g = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        out[j] = (-XGK[j], WGK[j], g);
        out[20 - j] = (XGK[j], WGK[j], g);
    }
    out
}

/// 21-point Kronrod rule with embedded 10-point Gauss rule on `[a, b]`.
pub fn gk21<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [V::zero(); 21];
    fv[10] = f(c);
    for j in 0..10 {
        let dx = h * XGK[j];
        fv[j] = f(c - dx);
        fv[20 - j] = f(c + dx);
    }
    let mut rk = fv[10] * WGK[10];
    let mut rg = V::zero();
    let mut rabs = fv[10].size() * WGK[10];
    for j in 0..10 {
        let pair = fv[j] + fv[20 - j];
        rk = rk + pair * WGK[j];
        rabs += WGK[j] * (fv[j].size() + fv[20 - j].size());
        if j % 2 == 1 {
            rg = rg + pair * WG[j / 2];
        }
    }
    let mean = rk * 0.5;
    let mut rasc = WGK[10] * (fv[10] - mean).size();
    for j in 0..10 {
        rasc += WGK[j] * ((fv[j] - mean).size() + (fv[20 - j] - mean).size());
    }
    let value = rk * h;
    let rabs = rabs * h.abs();
    let rasc = rasc * h.abs();
    let mut err = ((rk - rg) * h).size();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * rabs);
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Global adaptive refinement starting from the partition given by `breaks`.
pub fn quad_partition<V: QuadValue, F: FnMut(f64) -> V>(
    f: &mut F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<V>> {
    if breaks.len() < 2 {
        return Ok(QuadResult::zero());
    }
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel<V>> = Vec::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain(format!("partition not increasing at {}", w[0])));
        }
        let (value, err) = gk21(f, w[0], w[1]);
        evals += 21;
        heap.push(Panel { a: w[0], b: w[1], value, err });
    }
    let sum = |heap: &BinaryHeap<Panel<V>>, frozen: &[Panel<V>]| {
        let mut v = V::zero();
        let mut e = 0.0;
        for p in heap.iter().chain(frozen.iter()) {
            v = v + p.value;
            e += p.err;
        }
        (v, e)
    };
    let (mut total, mut total_err) = sum(&heap, &frozen);
    let mut steps = 0usize;
    while total_err > opts.target(total) {
        let Some(p) = heap.pop() else { break };
        if heap.len() + frozen.len() + 2 > opts.max_intervals {
            heap.push(p);
            let (v, e) = sum(&heap, &frozen);
            return Err(Error::BudgetExhausted {
                intervals: heap.len() + frozen.len(),
                best: QuadResult { value: v.lead(), abs_err: e, evaluations: evals },
            });
        }
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b || (p.b - p.a) < 1e-14 * p.a.abs().max(p.b.abs()).max(1e-300) {
            frozen.push(p);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(f, p.a, m);
        let (v2, e2) = gk21(f, m, p.b);
        evals += 42;
        total = total + v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
        steps += 1;
        if steps % 64 == 0 {
            (total, total_err) = sum(&heap, &frozen);
        }
    }
    let (v, e) = sum(&heap, &frozen);
    if !v.finite() {
        return Err(Error::Domain("integrand produced a non-finite value".into()));
    }
    Ok(QuadResult { value: v, abs_err: e, evaluations: evals })
}

/// ∫_a^b f with absolute tolerance `tol`.
pub fn quad_finite<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    quad_finite_opts(&mut f, a, b, &QuadOptions::absolute(tol))
}

pub fn quad_finite_opts<V: QuadValue, F: FnMut(f64) -> V>(
    f: &mut F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<V>> {
    if !(a < b) {
        return Err(Error::Domain(format!("quad_finite needs a < b, got [{a}, {b}]")));
    }
    quad_partition(f, &[a, b], opts)
}

/// Decay model for an integrand on a half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    /// |f(s)| ≲ e^{-rate s}
    Exponential(f64),
    /// |f(s)| ≲ s^{-p}, p > 1
    Algebraic(f64),
}

/// ∫_a^∞ f with absolute tolerance `tol` and exponential envelope rate `decay_rate_hint`.
pub fn quad_semi_infinite<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    tol: f64,
    decay_rate_hint: f64,
) -> Result<QuadResult> {
    quad_semi_infinite_opts(&mut f, a, Decay::Exponential(decay_rate_hint), &QuadOptions::absolute(tol))
}

pub fn quad_semi_infinite_opts<V: QuadValue, F: FnMut(f64) -> V>(
    f: &mut F,
    a: f64,
    decay: Decay,
    opts: &QuadOptions,
) -> Result<QuadResult<V>> {
    quad_semi_infinite_from(f, a, decay, opts, 1.0)
}

/// Like [`quad_semi_infinite_opts`] with an explicit first panel width.
pub fn quad_semi_infinite_from<V: QuadValue, F: FnMut(f64) -> V>(
    f: &mut F,
    a: f64,
    decay: Decay,
    opts: &QuadOptions,
    first_width: f64,
) -> Result<QuadResult<V>> {
    let (sigma, p) = match decay {
        Decay::Exponential(r) if r > 0.0 && r.is_finite() => (1.0 / r, 0.0),
        Decay::Algebraic(p) if p > 1.0 => (f64::INFINITY, p),
        other => return Err(Error::Domain(format!("invalid decay model {other:?}"))),
    };
    let mut breaks = vec![a];
    let mut running = V::zero();
    let mut evals = 0usize;
    let mut width = first_width.min(sigma).max(1e-300);
    let mut x = a;
    let tail;
    loop {
        let next = x + width;
        let (v, _) = gk21(f, x, next);
        evals += 21;
        running = running + v;
        breaks.push(next);
        let fx = f(next).size().max(f(next - 0.5 * width).size() * 0.5);
        evals += 2;
        x = next;
        let t = if sigma.is_finite() {
            fx * sigma * 1.5
        } else {
            fx * 2.0 * x.abs().max(1.0) / (p - 1.0)
        };
        if t <= 0.5 * opts.target(running) && (width >= sigma.min(1e300) || t == 0.0 || !sigma.is_finite()) {
            tail = t;
            break;
        }
        if sigma.is_finite() && x - a > 800.0 * sigma + 2.0 * first_width.max(1.0) * 64.0 {
            return Err(Error::Decay(format!(
                "integrand still of size {fx:.3e} at s = {x:.3e}, inconsistent with decay rate {:.3e}",
                1.0 / sigma
            )));
        }
        if !x.is_finite() || x > 1e250 {
            return Err(Error::Decay(format!("no decay detected up to s = {x:.3e}")));
        }
        width = (2.0 * width).min(sigma);
    }
    let mut inner = *opts;
    inner.abs_tol = (opts.abs_tol - tail).max(0.5 * opts.abs_tol);
    let r = quad_partition(f, &breaks, &inner)?;
    Ok(QuadResult { value: r.value, abs_err: r.abs_err + tail, evaluations: r.evaluations + evals })
}

/// One smooth piece of a path in ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line { a: C64, b: C64 },
    /// Counterclockwise when `theta1 > theta0`.
    Arc { center: C64, radius: f64, theta0: f64, theta1: f64 },
    /// Radial segment on arg z = angle, parametrized by log-radius from r0 to r1.
    Ray { angle: f64, r0: f64, r1: f64 },
}

impl Segment {
    /// Parameter interval of [`Segment::eval`].
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Segment::Line { .. } => (0.0, 1.0),
            Segment::Arc { theta0, theta1, .. } => (theta0, theta1),
            Segment::Ray { r0, r1, .. } => (r0.ln(), r1.ln()),
        }
    }

    /// Point and derivative at parameter t.
    pub fn eval(&self, t: f64) -> (C64, C64) {
        match *self {
            Segment::Line { a, b } => (a + (b - a) * t, b - a),
            Segment::Arc { center, radius, .. } => {
                let e = C64::from_polar(radius, t);
                (center + e, C64::i() * e)
            }
            Segment::Ray { angle, .. } => {
                let z = C64::from_polar(t.exp(), angle);
                (z, z)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.eval(self.range().0).0
    }

    pub fn end(&self) -> C64 {
        self.eval(self.range().1).0
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: b, b: a },
            Segment::Arc { center, radius, theta0, theta1 } => {
                Segment::Arc { center, radius, theta0: theta1, theta1: theta0 }
            }
            Segment::Ray { angle, r0, r1 } => Segment::Ray { angle, r0: r1, r1: r0 },
        }
    }

    pub fn conj(&self) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: a.conj(), b: b.conj() },
            Segment::Arc { center, radius, theta0, theta1 } => {
                Segment::Arc { center: center.conj(), radius, theta0: -theta0, theta1: -theta1 }
            }
            Segment::Ray { angle, r0, r1 } => Segment::Ray { angle: -angle, r0, r1 },
        }
    }

    /// ∫ f(z) dz along the segment.
    pub fn integrate<F: FnMut(C64) -> C64>(&self, f: &mut F, opts: &QuadOptions) -> Result<QuadResult> {
        self.integrate_vec(&mut |z| CVec([f(z)]), opts)
            .map(|r| QuadResult { value: r.value.0[0], abs_err: r.abs_err, evaluations: r.evaluations })
    }

    /// ∫ f(z) dz along the segment for a vector of integrands sharing evaluations.
    pub fn integrate_vec<const N: usize, F: FnMut(C64) -> CVec<N>>(
        &self,
        f: &mut F,
        opts: &QuadOptions,
    ) -> Result<QuadResult<CVec<N>>> {
        let (t0, t1) = self.range();
        if t0 == t1 {
            return Ok(QuadResult::zero());
        }
        let (lo, hi, sign) = if t0 < t1 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
        let mut g = |t: f64| {
            let (z, dz) = self.eval(t);
            let mut v = f(z);
            for c in v.0.iter_mut() {
                *c *= dz * sign;
            }
            v
        };
        quad_finite_opts(&mut g, lo, hi, opts)
    }
}

/// Piecewise-smooth path; consecutive segments join within 1e-12.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub segments: Vec<Segment>,
    pub closed: bool,
    pub counterclockwise: bool,
}

const JOIN_TOL: f64 = 1e-12;

impl ContourSpec {
    pub fn new(segments: Vec<Segment>, closed: bool, counterclockwise: bool) -> Result<Self> {
        let c = ContourSpec { segments, closed, counterclockwise };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::MalformedContour("no segments".into()));
        }
        let close = |a: C64, b: C64| (a - b).norm() <= JOIN_TOL * (1.0 + a.norm().max(b.norm()));
        for (k, w) in self.segments.windows(2).enumerate() {
            if !close(w[0].end(), w[1].start()) {
                return Err(Error::MalformedContour(format!(
                    "segment {k} ends at {} but segment {} starts at {}",
                    w[0].end(),
                    k + 1,
                    w[1].start()
                )));
            }
        }
        if self.closed {
            let first = self.segments[0].start();
            let last = self.segments[self.segments.len() - 1].end();
            if !close(first, last) {
                return Err(Error::MalformedContour(format!("closed contour ends at {last}, starts at {first}")));
            }
        }
        Ok(())
    }

    pub fn circle(center: C64, radius: f64) -> Self {
        ContourSpec {
            segments: vec![Segment::Arc { center, radius, theta0: -PI, theta1: PI }],
            closed: true,
            counterclockwise: true,
        }
    }

    /// Boundary of {r_min ≤ |z| ≤ r_max, theta0 ≤ arg z ≤ theta1}, counterclockwise.
    pub fn annular_sector(r_min: f64, r_max: f64, theta0: f64, theta1: f64) -> Self {
        let o = C64::new(0.0, 0.0);
        ContourSpec {
            segments: vec![
                Segment::Ray { angle: theta0, r0: r_min, r1: r_max },
                Segment::Arc { center: o, radius: r_max, theta0, theta1 },
                Segment::Ray { angle: theta1, r0: r_max, r1: r_min },
                Segment::Arc { center: o, radius: r_min, theta0: theta1, theta1: theta0 },
            ],
            closed: true,
            counterclockwise: true,
        }
    }

    /// Axis-aligned rectangle with opposite corners `lo` and `hi`, counterclockwise.
    pub fn rectangle(lo: C64, hi: C64) -> Self {
        let c1 = lo;
        let c2 = C64::new(hi.re, lo.im);
        let c3 = hi;
        let c4 = C64::new(lo.re, hi.im);
        ContourSpec {
            segments: vec![
                Segment::Line { a: c1, b: c2 },
                Segment::Line { a: c2, b: c3 },
                Segment::Line { a: c3, b: c4 },
                Segment::Line { a: c4, b: c1 },
            ],
            closed: true,
            counterclockwise: true,
        }
    }

    /// The open path γ_b: in along arg = −φ, around |z| = b, out along arg = φ.
    pub fn dunford(b: f64, phi: f64, truncation: f64) -> Self {
        ContourSpec {
            segments: vec![
                Segment::Ray { angle: -phi, r0: truncation, r1: b },
                Segment::Arc { center: C64::new(0.0, 0.0), radius: b, theta0: -phi, theta1: phi },
                Segment::Ray { angle: phi, r0: b, r1: truncation },
            ],
            closed: false,
            counterclockwise: true,
        }
    }

    pub fn reversed(&self) -> Self {
        ContourSpec {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
            closed: self.closed,
            counterclockwise: !self.counterclockwise,
        }
    }

    /// Mirror image under complex conjugation (orientation flips).
    pub fn conj(&self) -> Self {
        ContourSpec {
            segments: self.segments.iter().map(|s| s.conj()).collect(),
            closed: self.closed,
            counterclockwise: !self.counterclockwise,
        }
    }
}

/// ∮ f(z) dz along `path` with absolute tolerance `tol`.
pub fn quad_contour<F: FnMut(C64) -> C64>(mut f: F, path: &ContourSpec, tol: f64) -> Result<QuadResult> {
    quad_contour_opts(&mut f, path, &QuadOptions::absolute(tol))
}

pub fn quad_contour_opts<F: FnMut(C64) -> C64>(
    f: &mut F,
    path: &ContourSpec,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    path.validate()?;
    let n = path.segments.len() as f64;
    let seg_opts = QuadOptions { abs_tol: opts.abs_tol / n, ..*opts };
    let mut total = QuadResult::zero();
    for s in &path.segments {
        total = total.add(s.integrate(f, &seg_opts)?);
    }
    Ok(total)
}

/// Vector-valued variant of [`quad_contour_opts`].
pub fn quad_contour_vec<const N: usize, F: FnMut(C64) -> CVec<N>>(
    f: &mut F,
    path: &ContourSpec,
    opts: &QuadOptions,
) -> Result<QuadResult<CVec<N>>> {
    path.validate()?;
    let n = path.segments.len() as f64;
    let seg_opts = QuadOptions { abs_tol: opts.abs_tol / n, ..*opts };
    let mut total = QuadResult::zero();
    for s in &path.segments {
        total = total.add(s.integrate_vec(f, &seg_opts)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn polynomial_and_sine() {
        let r = quad_finite(|s| re(s), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-14);
        let r = quad_finite(|s| re(s.sin()), 0.0, PI, 1e-12).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-12);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn endpoint_singularity() {
        let r = quad_finite(|s| re(s.powf(-0.5)), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn half_lines() {
        let r = quad_semi_infinite(|s| re((-s).exp()), 0.0, 1e-12, 1.0).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-11);
        let mut g = |s: f64| re(s.powi(-2));
        let r = quad_semi_infinite_opts(&mut g, 1.0, Decay::Algebraic(2.0), &QuadOptions::absolute(1e-10)).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn inconsistent_hint_is_reported() {
        let r = quad_semi_infinite(|s| re(1.0 / (1.0 + s)), 0.0, 1e-10, 1.0);
        assert!(matches!(r, Err(Error::Decay(_))));
    }

    #[test]
    fn budget() {
        let mut f = |s: f64| re((1.0 / s).sin());
        let r = quad_finite_opts(&mut f, 1e-6, 1.0, &QuadOptions::absolute(1e-14).with_max_intervals(10));
        assert!(matches!(r, Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn residues() {
        let c = ContourSpec::circle(C64::new(0.0, 0.0), 1.0);
        let r = quad_contour(|z| 1.0 / z, &c, 1e-12).unwrap();
        assert!((r.value - C64::new(0.0, 2.0 * PI)).norm() < 1e-11);
        let r = quad_contour(|z| 1.0 / (z * z), &c, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-11);
        let r = quad_contour(|z| 1.0 / (z - 2.0), &c, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-11);
    }

    #[test]
    fn vector_integrands_share_nodes() {
        let mut calls = 0;
        let mut f = |s: f64| {
            calls += 1;
            CVec([re(s), re(s * s), C64::new(0.0, s.exp())])
        };
        let r = quad_finite_opts(&mut f, 0.0, 1.0, &QuadOptions::absolute(1e-13)).unwrap();
        assert!((r.value.0[0].re - 0.5).abs() < 1e-14);
        assert!((r.value.0[1].re - 1.0 / 3.0).abs() < 1e-14);
        assert!((r.value.0[2].im - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert_eq!(calls, r.evaluations);
        let c = ContourSpec::circle(C64::new(0.0, 0.0), 1.0);
        let r = quad_contour_vec(&mut |z| CVec([1.0 / z, z]), &c, &QuadOptions::absolute(1e-12)).unwrap();
        assert!((r.value.0[0] - C64::new(0.0, 2.0 * PI)).norm() < 1e-11);
        assert!(r.value.0[1].norm() < 1e-11);
    }

    #[test]
    fn malformed() {
        let segs = vec![
            Segment::Line { a: re(0.0), b: re(1.0) },
            Segment::Line { a: re(1.5), b: re(2.0) },
        ];
        assert!(matches!(ContourSpec::new(segs, false, true), Err(Error::MalformedContour(_))));
        let segs = vec![Segment::Line { a: re(0.0), b: re(1.0) }];
        assert!(ContourSpec::new(segs, true, true).is_err());
    }

    #[test]
    fn annular_sector_encloses() {
        let c = ContourSpec::annular_sector(0.5, 2.0, -1.0, 1.0);
        c.validate().unwrap();
        let r = quad_contour(|z| 1.0 / (z - 1.0), &c, 1e-12).unwrap();
        assert!((r.value - C64::new(0.0, 2.0 * PI)).norm() < 1e-10);
        let r = quad_contour(|z| 1.0 / (z + 1.0), &c, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-10);
    }
}
