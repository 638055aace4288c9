//! Invariant suites behind `diskflow verify`.

use std::f64::consts::PI;

use diskflow::resolvent::{
    ode_residual, relative_l2_distance, resolvent_apply_opts, resolvent_oracle_fd, BumpForcing, FdGrid,
    ResolventOptions,
};
use diskflow::special::{bessel_i, bessel_k, gamma_c, wronskian_defect, BesselOrder};
use diskflow::spectral::{f_n_direct, f_n_reduced, mode_constants, FlowParams, SpectralPoint};
use diskflow::zeros::{certify_zero_free, CertStatus, SectorRegion};
use diskflow::{Result, C64};
use serde::Serialize;

use crate::config::Suite;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub failures: usize,
    pub checks: Vec<Check>,
}

fn check(suite: &'static str, name: impl Into<String>, r: Result<f64>, limit: f64) -> Check {
    let name = name.into();
    match r {
        Ok(v) => Check { suite, name, value: v, limit, passed: v < limit, note: None },
        Err(e) => Check { suite, name, value: f64::NAN, limit, passed: false, note: Some(e.to_string()) },
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// 5 α × 5 δ values and 8 arguments spread over the right half-plane.
pub const WRONSKIAN_ALPHA: [f64; 5] = [-0.1, -0.02, 0.02, 0.05, 0.1];
pub const WRONSKIAN_DELTA: [f64; 5] = [0.0, 0.02, 0.05, 0.1, 0.2];

pub fn wronskian_points() -> [C64; 8] {
    [
        C64::from_polar(1e-3, 0.3),
        C64::from_polar(1e-2, -1.2),
        C64::from_polar(0.1, 0.7),
        C64::from_polar(0.5, -0.4),
        c(1.0, 0.0),
        C64::from_polar(2.0, 1.4),
        C64::from_polar(5.0, -0.9),
        C64::from_polar(20.0, 0.2),
    ]
}

fn bessel() -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst: Result<f64> = Ok(0.0);
    for &a in &WRONSKIAN_ALPHA {
        for &d in &WRONSKIAN_DELTA {
            let p = FlowParams::new(a, d).unwrap();
            let xi = mode_constants(&p, 1).unwrap().xi;
            for z in wronskian_points() {
                worst = worst.and_then(|w| Ok(w.max(wronskian_defect(&BesselOrder::new(xi)?, z)?)));
            }
        }
    }
    out.push(check("bessel", "wronskian defect, 5x5x8 grid", worst, 1e-8));
    let half = BesselOrder::real(0.5).unwrap();
    let i = bessel_i(&half, c(1.0, 0.0), 1e-14).map(|r| (r.value - (2.0 / PI).sqrt() * 1f64.sinh()).norm());
    let k = bessel_k(&half, c(1.0, 0.0), 1e-14).map(|r| (r.value - (PI / 2.0).sqrt() * (-1f64).exp()).norm());
    out.push(check("bessel", "I_1/2(1) closed form", i, 1e-10));
    out.push(check("bessel", "K_1/2(1) closed form", k, 1e-10));
    let k0 = bessel_k(&BesselOrder::real(0.0).unwrap(), c(1.0, 0.0), 1e-12).map(|r| (r.value.re - 0.42102443824070833).abs());
    out.push(check("bessel", "K_0(1)", k0, 1e-12));
    out
}

fn gamma() -> Vec<Check> {
    let g = gamma_c(c(1.0, 1.0)).map(|v| (v - c(0.49801566811835604, -0.15494982830181069)).norm());
    let half = gamma_c(c(0.5, 0.0)).map(|v| (v - PI.sqrt()).norm());
    let z = c(-2.6, 1.1);
    let rec = gamma_c(z + 1.0).and_then(|a| Ok((a - z * gamma_c(z)?).norm() / a.norm()));
    vec![
        check("gamma", "Γ(1+i)", g, 1e-10),
        check("gamma", "Γ(1/2) = √π", half, 1e-13),
        check("gamma", "Γ(z+1) = zΓ(z) across the reflection", rec, 1e-12),
    ]
}

fn spectral() -> Vec<Check> {
    let mut out = Vec::new();
    let mut branch = 0.0f64;
    for &a in &WRONSKIAN_ALPHA {
        for &d in &WRONSKIAN_DELTA {
            for n in [1, -1] {
                let p = FlowParams::new(a, d).unwrap();
                let xi = mode_constants(&p, n).unwrap().xi;
                branch = branch.max((xi * xi - c(1.0 + 0.25 * d * d, a * n as f64)).norm());
            }
        }
    }
    out.push(check("spectral", "ξ² = n² + δ²/4 + iαn", Ok(branch), 1e-12));
    let p = FlowParams::new(0.05, 0.02).unwrap();
    for lambda in [c(0.02, 0.0), c(0.01, 0.005), C64::from_polar(1e-3, 2.0)] {
        let pt = SpectralPoint::new(lambda).unwrap();
        let direct = f_n_direct(&p, 1, &pt, 1e-12);
        let reduced = f_n_reduced(&p, 1, pt.sqrt_lambda, 1e-12);
        let agree = direct.clone().and_then(|a| Ok((a.value - reduced?.value).norm() / a.value.norm()));
        out.push(check("spectral", format!("direct vs reduced F_1 at λ = {lambda}"), agree, 1e-8));
        let conj = direct.and_then(|a| Ok((f_n_direct(&p, -1, &pt.conj(), 1e-12)?.value - a.value.conj()).norm() / a.value.norm()));
        out.push(check("spectral", format!("F_-1(conj) = conj F_1 at λ = {lambda}"), conj, 1e-10));
    }
    out
}

fn zeros() -> Vec<Check> {
    let p = FlowParams::new(0.05, 0.02).unwrap();
    let rep = SectorRegion::new(0.75 * PI - 0.1, 1e-5, 1e-2).and_then(|r| certify_zero_free(&p, 1, &r));
    let v = rep.map(|r| if r.status == CertStatus::Certified && r.winding_total == 0 { 0.0 } else { 1.0 + r.winding_total as f64 });
    vec![check("zeros", "α=0.05, δ=0.02 sector certified zero-free", v, 0.5)]
}

fn resolvent() -> Vec<Check> {
    let p = FlowParams::new(0.05, 0.02).unwrap();
    let f = BumpForcing::new(1, 1.5, 3.0).unwrap();
    let pt = SpectralPoint::new(c(0.02, 0.0)).unwrap();
    let mut out = Vec::new();
    match resolvent_apply_opts(&p, 1, &pt, &f, &ResolventOptions::default()) {
        Ok((o, sol)) => {
            out.push(check("resolvent", "d_n defect", Ok(o.d_defect), 1e-8));
            out.push(check("resolvent", "no-slip defect", Ok(o.noslip_defect), 1e-8));
            out.push(check("resolvent", "ODE residual", Ok(ode_residual(&p, &sol, &f)), 1e-6));
            let fd = resolvent_oracle_fd(&p, 1, &pt, &f, &FdGrid::default());
            out.push(check("resolvent", "FD oracle agreement", fd.and_then(|fd| relative_l2_distance(&sol, &fd.vorticity)), 1e-4));
        }
        Err(e) => out.push(check("resolvent", "resolvent solve", Err(e), 0.0)),
    }
    out
}

pub fn run(suite: Suite) -> SuiteReport {
    let checks: Vec<Check> = match suite {
        Suite::Bessel => bessel(),
        Suite::Gamma => gamma(),
        Suite::Spectral => spectral(),
        Suite::Zeros => zeros(),
        Suite::Resolvent => resolvent(),
        Suite::All => [bessel(), gamma(), spectral(), zeros(), resolvent()].concat(),
    };
    let failures = checks.iter().filter(|c| !c.passed).count();
    SuiteReport { suite, passed: failures == 0, failures, checks }
}
