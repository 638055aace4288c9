use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ComplexResult;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_5;

/// ζ(k) for k = 2..=60; index k-2.
pub const ZETA: [f64; 59] = [
    1.6449340668482264365,
    1.2020569031595942854,
    1.0823232337111381915,
    1.0369277551433699263,
    1.0173430619844491397,
    1.0083492773819228268,
    1.0040773561979443394,
    1.0020083928260822144,
    1.0009945751278180853,
    1.0004941886041194646,
    1.0002460865533080483,
    1.0001227133475784891,
    1.0000612481350587048,
    1.0000305882363070205,
    1.0000152822594086519,
    1.0000076371976378998,
    1.0000038172932649998,
    1.0000019082127165539,
    1.0000009539620338728,
    1.0000004769329867878,
    1.0000002384505027277,
    1.0000001192199259653,
    1.0000000596081890513,
    1.0000000298035035147,
    1.0000000149015548284,
    1.0000000074507117898,
    1.0000000037253340248,
    1.0000000018626597235,
    1.0000000009313274324,
    1.0000000004656629065,
    1.0000000002328311834,
    1.0000000001164155017,
    1.0000000000582077209,
    1.0000000000291038504,
    1.0000000000145519219,
    1.0000000000072759598,
    1.0000000000036379795,
    1.0000000000018189897,
    1.0000000000009094948,
    1.0000000000004547474,
    1.0000000000002273737,
    1.0000000000001136868,
    1.0000000000000568434,
    1.0000000000000284217,
    1.0000000000000142109,
    1.0000000000000071054,
    1.0000000000000035527,
    1.0000000000000017764,
    1.0000000000000008882,
    1.0000000000000004441,
    1.000000000000000222,
    1.000000000000000111,
    1.0000000000000000555,
    1.0000000000000000278,
    1.0000000000000000139,
    1.0000000000000000069,
    1.0000000000000000035,
    1.0000000000000000017,
    1.0000000000000000009,
];

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πz) with exact reduction of the real part.
pub fn sin_pi(z: C64) -> C64 {
    let m = z.re.round();
    let f = C64::new(z.re - m, z.im);
    let s = (f * PI).sin();
    if (m as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log Γ(z) for Re z ≥ 1/2 (Lanczos, g = 7).
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Γ(z); reflection for Re z < 1/2.
pub fn gamma_c(z: C64) -> Result<C64> {
    if is_pole(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    if z.re < 0.5 {
        let s = sin_pi(z);
        if s.norm() == 0.0 {
            return Err(Error::Pole(format!("{z}")));
        }
        Ok(PI / (s * ln_gamma_right(1.0 - z).exp()))
    } else {
        Ok(ln_gamma_right(z).exp())
    }
}

/// 1/Γ(z), entire; zero at the poles of Γ.
pub fn rgamma(z: C64) -> C64 {
    if is_pole(z) {
        return C64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        sin_pi(z) * ln_gamma_right(1.0 - z).exp() / PI
    } else {
        (-ln_gamma_right(z)).exp()
    }
}

/// Log Γ(1+z) = −γz + Σ_{k=2}^{terms} ζ(k)/k (−z)^k for |z| ≤ 1/2.
/// `abs_err` is the truncation bound |z|^{terms+1}/(1−|z|).
pub fn log_gamma_taylor(z: C64, terms: usize) -> Result<ComplexResult> {
    let r = z.norm();
    if r > 0.5 {
        return Err(Error::Domain(format!("log_gamma_taylor needs |z| <= 0.5, got {r}")));
    }
    if terms < 1 || terms > 60 {
        return Err(Error::Domain(format!("terms must lie in 1..=60, got {terms}")));
    }
    let mut sum = -EULER_GAMMA * z;
    let mut p = -z;
    for k in 2..=terms {
        p *= -z;
        sum += ZETA[k - 2] / k as f64 * p;
    }
    let bound = if r == 0.0 { 0.0 } else { r.powi(terms as i32 + 1) / (1.0 - r) };
    Ok(ComplexResult { value: sum, abs_err: bound })
}
