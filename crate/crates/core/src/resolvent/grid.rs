//! Composite Chebyshev–Lobatto panels on [1, R] with spectral integration,
//! differentiation and interpolation, plus the trapezoid fallback for
//! arbitrary grids.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Polynomial degree on each panel.
pub const CHEB_ORDER: usize = 16;

struct Rule {
    x: Vec<f64>,
    bary: Vec<f64>,
    /// s[i][j] = ∫_{-1}^{x_i} ℓ_j
    s: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
}

fn cheb_t(k: usize, x: f64) -> f64 {
    (k as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

impl Rule {
    fn new(n: usize) -> Rule {
        let x: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect();
        let bary: Vec<f64> = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let mut d = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..=n {
            let mut diag = 0.0;
            for j in 0..=n {
                if i != j {
                    d[i][j] = bary[j] / bary[i] / (x[i] - x[j]);
                    diag -= d[i][j];
                }
            }
            d[i][i] = diag;
        }
        let mut s = vec![vec![0.0; n + 1]; n + 1];
        for j in 0..=n {
            // Chebyshev coefficients of the j-th Lagrange basis polynomial
            let mut a = vec![0.0; n + 1];
            for (k, ak) in a.iter_mut().enumerate() {
                let c = if j == 0 || j == n { 0.5 } else { 1.0 };
                *ak = 2.0 / n as f64 * c * cheb_t(k, x[j]);
            }
            a[0] *= 0.5;
            a[n] *= 0.5;
            let mut b = vec![0.0; n + 2];
            for k in 0..=n {
                match k {
                    0 => b[1] += a[0],
                    1 => b[2] += 0.25 * a[1],
                    _ => {
                        b[k + 1] += a[k] / (2.0 * (k + 1) as f64);
                        b[k - 1] -= a[k] / (2.0 * (k - 1) as f64);
                    }
                }
            }
            let anti = |t: f64| b.iter().enumerate().map(|(k, bk)| bk * cheb_t(k, t)).sum::<f64>();
            let base = anti(-1.0);
            for i in 0..=n {
                s[i][j] = anti(x[i]) - base;
            }
        }
        Rule { x, bary, s, d }
    }
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::new(CHEB_ORDER))
}

/// Panels [b_p, b_{p+1}] each carrying CHEB_ORDER+1 Lobatto nodes; adjacent
/// panels share their endpoint node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub breaks: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn from_breaks(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) || !breaks.iter().all(|b| b.is_finite()) {
            return Err(Error::Grid("panel breaks must be finite and strictly increasing".into()));
        }
        let r = rule();
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * CHEB_ORDER + 1);
        nodes.push(breaks[0]);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for &t in &r.x[1..] {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * t);
            }
            *nodes.last_mut().unwrap() = b;
        }
        Ok(RadialGrid { breaks, nodes })
    }

    /// Rebuild from node positions produced by [`RadialGrid::from_breaks`].
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < CHEB_ORDER + 1 || (nodes.len() - 1) % CHEB_ORDER != 0 {
            return Err(Error::Grid(format!("{} nodes do not form Chebyshev panels", nodes.len())));
        }
        let breaks = nodes.iter().step_by(CHEB_ORDER).copied().collect();
        let g = Self::from_breaks(breaks)?;
        let ok = g.nodes.iter().zip(nodes).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
        if !ok {
            return Err(Error::Grid("node positions are not Chebyshev–Lobatto points".into()));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    fn half(&self, p: usize) -> f64 {
        0.5 * (self.breaks[p + 1] - self.breaks[p])
    }

    /// ∫_{r_0}^{x_i} f for every node.
    pub fn cumulative(&self, f: &[C64]) -> Vec<C64> {
        let r = rule();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut base = C64::new(0.0, 0.0);
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let h = self.half(p);
            for i in 1..=CHEB_ORDER {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..=CHEB_ORDER {
                    acc += f[o + j] * r.s[i][j];
                }
                out[o + i] = base + acc * h;
            }
            base = out[o + CHEB_ORDER];
        }
        out
    }

    /// ∫_{x_i}^{R} f for every node.
    pub fn tail(&self, f: &[C64]) -> Vec<C64> {
        let c = self.cumulative(f);
        let total = *c.last().unwrap();
        c.into_iter().map(|v| total - v).collect()
    }

    pub fn integral(&self, f: &[C64]) -> C64 {
        let r = rule();
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=CHEB_ORDER {
                s += f[o + j] * r.s[CHEB_ORDER][j];
            }
            acc += s * self.half(p);
        }
        acc
    }

    /// ∫_{r_0}^{R} f for real f.
    pub fn integral_re(&self, f: &[f64]) -> f64 {
        let r = rule();
        let mut acc = 0.0;
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let s: f64 = (0..=CHEB_ORDER).map(|j| f[o + j] * r.s[CHEB_ORDER][j]).sum();
            acc += s * self.half(p);
        }
        acc
    }

    /// A(x_i) = ∫_{r_0}^{x_i} e^{−k(x_i−s)} u(s) ds, stable for Re k > 0.
    pub fn damped_forward(&self, k: C64, u: &[C64]) -> Vec<C64> {
        let r = rule();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut w = vec![C64::new(0.0, 0.0); CHEB_ORDER + 1];
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let t = self.breaks[p];
            let h = self.half(p);
            for j in 0..=CHEB_ORDER {
                w[j] = (k * (self.nodes[o + j] - t)).exp() * u[o + j];
            }
            let start = out[o];
            for i in 1..=CHEB_ORDER {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..=CHEB_ORDER {
                    acc += w[j] * r.s[i][j];
                }
                out[o + i] = (-k * (self.nodes[o + i] - t)).exp() * (start + acc * h);
            }
        }
        out
    }

    /// B(x_i) = ∫_{x_i}^{R} e^{−k(s−x_i)} v(s) ds, stable for Re k > 0.
    pub fn damped_backward(&self, k: C64, v: &[C64]) -> Vec<C64> {
        let r = rule();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut w = vec![C64::new(0.0, 0.0); CHEB_ORDER + 1];
        for p in (0..self.panels()).rev() {
            let o = p * CHEB_ORDER;
            let t = self.breaks[p + 1];
            let h = self.half(p);
            for j in 0..=CHEB_ORDER {
                w[j] = (k * (t - self.nodes[o + j])).exp() * v[o + j];
            }
            let mut total = C64::new(0.0, 0.0);
            for j in 0..=CHEB_ORDER {
                total += w[j] * r.s[CHEB_ORDER][j];
            }
            let end = out[o + CHEB_ORDER];
            for i in 0..CHEB_ORDER {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..=CHEB_ORDER {
                    acc += w[j] * r.s[i][j];
                }
                out[o + i] = (-k * (t - self.nodes[o + i])).exp() * (end + (total - acc) * h);
            }
        }
        out
    }

    /// Derivative per panel; shared nodes take the mean of both sides.
    pub fn derivative(&self, f: &[C64]) -> Vec<C64> {
        let r = rule();
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        let mut count = vec![0u8; self.len()];
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let h = self.half(p);
            for i in 0..=CHEB_ORDER {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..=CHEB_ORDER {
                    acc += f[o + j] * r.d[i][j];
                }
                out[o + i] += acc / h;
                count[o + i] += 1;
            }
        }
        out.iter().zip(count).map(|(v, c)| v / c as f64).collect()
    }

    /// Second derivative evaluated panel by panel, one value per (panel, node).
    pub fn second_derivative_panels(&self, f: &[C64]) -> Vec<(usize, C64, C64)> {
        let r = rule();
        let mut out = Vec::with_capacity(self.panels() * (CHEB_ORDER + 1));
        let mut d1 = vec![C64::new(0.0, 0.0); CHEB_ORDER + 1];
        for p in 0..self.panels() {
            let o = p * CHEB_ORDER;
            let h = self.half(p);
            for i in 0..=CHEB_ORDER {
                d1[i] = (0..=CHEB_ORDER).map(|j| f[o + j] * r.d[i][j]).sum::<C64>() / h;
            }
            for i in 0..=CHEB_ORDER {
                let d2 = (0..=CHEB_ORDER).map(|j| d1[j] * r.d[i][j]).sum::<C64>() / h;
                out.push((o + i, d1[i], d2));
            }
        }
        out
    }

    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.breaks[0] || x > self.r_max() {
            return None;
        }
        let p = self.breaks.partition_point(|&b| b <= x).saturating_sub(1);
        Some(p.min(self.panels() - 1))
    }

    /// Barycentric interpolation inside the panel containing x.
    pub fn interpolate(&self, f: &[C64], x: f64) -> Option<C64> {
        let p = self.locate(x)?;
        let r = rule();
        let o = p * CHEB_ORDER;
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let t = (2.0 * x - a - b) / (b - a);
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..=CHEB_ORDER {
            let dx = t - r.x[j];
            if dx == 0.0 {
                return Some(f[o + j]);
            }
            let w = r.bary[j] / dx;
            num += f[o + j] * w;
            den += w;
        }
        Some(num / den)
    }

    /// Local panel width at x, or `None` outside the grid.
    pub fn width_at(&self, x: f64) -> Option<f64> {
        self.locate(x).map(|p| self.breaks[p + 1] - self.breaks[p])
    }
}

/// Panel-break placement: widths limited by the radius, by 1/|k| and by
/// optional windows, with mandatory break points kept exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub r_max: f64,
    /// Width cap relative to the radius.
    pub relative: f64,
    /// Width cap in units of 1/|k|.
    pub k_width: f64,
    pub k_modulus: f64,
    /// (start, end, width cap) windows, e.g. a forcing support.
    pub windows: Vec<(f64, f64, f64)>,
    pub breaks: Vec<f64>,
}

impl GridPlan {
    pub fn new(r_max: f64, k_modulus: f64) -> Self {
        GridPlan { r_max, relative: 0.3, k_width: 3.0, k_modulus, windows: Vec::new(), breaks: Vec::new() }
    }

    pub fn window(mut self, a: f64, b: f64, width: f64) -> Self {
        self.windows.push((a, b, width));
        self
    }

    pub fn with_breaks(mut self, extra: &[f64]) -> Self {
        self.breaks.extend_from_slice(extra);
        self
    }

    fn width(&self, x: f64) -> f64 {
        let mut w = self.relative * x;
        if self.k_modulus > 0.0 {
            w = w.min(self.k_width / self.k_modulus);
        }
        for &(a, b, cap) in &self.windows {
            if x >= a - cap && x < b {
                w = w.min(cap);
            }
        }
        w
    }

    pub fn build(&self) -> Result<RadialGrid> {
        if !(self.r_max > 1.0) {
            return Err(Error::Grid(format!("grid end R = {} must exceed 1", self.r_max)));
        }
        let mut fixed: Vec<f64> = vec![1.0, self.r_max];
        for &(a, b, _) in &self.windows {
            fixed.extend([a, b]);
        }
        fixed.extend(self.breaks.iter().copied());
        fixed.retain(|&x| x >= 1.0 && x <= self.r_max);
        fixed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fixed.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut breaks = vec![1.0];
        for w in fixed.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut x = lo;
            while x < hi {
                let step = self.width(x);
                let next = if x + 1.2 * step >= hi { hi } else { x + step };
                breaks.push(next);
                x = next;
            }
        }
        RadialGrid::from_breaks(breaks)
    }
}

/// Cumulative rules shared by spectral and trapezoid grids.
pub trait RadialQuadrature {
    fn points(&self) -> &[f64];
    fn cumulative(&self, f: &[C64]) -> Vec<C64>;
}

impl RadialQuadrature for RadialGrid {
    fn points(&self) -> &[f64] {
        &self.nodes
    }
    fn cumulative(&self, f: &[C64]) -> Vec<C64> {
        RadialGrid::cumulative(self, f)
    }
}

/// Trapezoid rule on an arbitrary increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapezoidGrid(pub Vec<f64>);

impl RadialQuadrature for TrapezoidGrid {
    fn points(&self) -> &[f64] {
        &self.0
    }
    fn cumulative(&self, f: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); f.len()];
        for i in 1..f.len() {
            out[i] = out[i - 1] + (f[i] + f[i - 1]) * (0.5 * (self.0[i] - self.0[i - 1]));
        }
        out
    }
}
