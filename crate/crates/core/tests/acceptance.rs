//! Acceptance criteria 1–9, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use diskflow::numerics::{quad_finite, quad_semi_infinite};
use diskflow::resolvent::*;
use diskflow::semigroup::*;
use diskflow::special::*;
use diskflow::spectral::*;
use diskflow::zeros::*;
use diskflow::C64;

const WRONSKIAN_TOL: f64 = 1e-8;
const HALF_ORDER_TOL: f64 = 1e-10;
const GAMMA_TOL: f64 = 1e-10;
const REDUCTION_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-6;
const ENVELOPE_SLOPE_TOL: f64 = 0.15;
const FD_TOL: f64 = 1e-4;
const ODE_TOL: f64 = 1e-6;
const DEFECT_TOL: f64 = 1e-8;
const J_TOL: f64 = 1e-7;
const VELOCITY_SLOPE: f64 = -1.0;
const GRADIENT_SLOPE: f64 = -0.5;
const SCAN_SLOPE_TOL: f64 = 0.1;
const INVARIANCE_TOL: f64 = 1e-6;
const RECOVERY_TOL: f64 = 0.05;
const DECAY_SLOPE_TOL: f64 = 0.07;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn p(a: f64, d: f64) -> FlowParams {
    FlowParams::new(a, d).unwrap()
}

fn verdict(n: u32, passed: bool, budget: Option<Duration>, start: Instant, detail: &str) -> bool {
    let took = start.elapsed();
    let in_time = budget.map_or(true, |b| took <= b);
    let ok = passed && in_time;
    let budget = budget.map_or(String::new(), |b| format!(" (budget {:.0} s)", b.as_secs_f64()));
    println!("criterion {n}: {} [{:.1} s{budget}] {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    linear_fit(x, y).0
}

/// 1/Γ(z) = z e^{γz} ∏_{k≤N} (1 + z/k) e^{−z/k}, tail via ζ_N(2), ζ_N(3).
fn gamma_product(z: C64) -> C64 {
    let n = 200_000usize;
    let mut log = z.ln() + EULER_GAMMA * z;
    for k in 1..=n {
        let q = z / k as f64;
        log += (1.0 + q).ln() - q;
    }
    let nf = n as f64;
    let z2 = 1.0 / nf - 0.5 / (nf * nf) + 1.0 / (6.0 * nf.powi(3));
    let z3 = 0.5 / (nf * nf) - 0.5 / nf.powi(3);
    log += -z * z * 0.5 * z2 + z * z * z / 3.0 * z3;
    (-log).exp()
}

#[test]
fn criterion_1_special_functions() {
    let start = Instant::now();
    let alphas = [-0.1, -0.02, 0.02, 0.05, 0.1];
    let deltas = [0.0, 0.02, 0.05, 0.1, 0.2];
    let points = [
        C64::from_polar(1e-3, 0.3),
        C64::from_polar(1e-2, -1.2),
        C64::from_polar(0.1, 0.7),
        C64::from_polar(0.5, -0.4),
        c(1.0, 0.0),
        C64::from_polar(2.0, 1.4),
        C64::from_polar(5.0, -0.9),
        C64::from_polar(20.0, 0.2),
    ];
    let mut wronskian: f64 = 0.0;
    for a in alphas {
        for d in deltas {
            let order = BesselOrder::new(mode_constants(&p(a, d), 1).unwrap().xi).unwrap();
            for z in points {
                wronskian = wronskian.max(wronskian_defect(&order, z).unwrap());
            }
        }
    }
    let half = BesselOrder::real(0.5).unwrap();
    let i = bessel_i(&half, c(1.0, 0.0), 1e-14).unwrap().value;
    let k = bessel_k(&half, c(1.0, 0.0), 1e-14).unwrap().value;
    let half_err = (i - (2.0 / PI).sqrt() * 1f64.sinh()).norm().max((k - (PI / 2.0).sqrt() * (-1f64).exp()).norm());
    let gamma_err = (gamma_c(c(1.0, 1.0)).unwrap() - gamma_product(c(1.0, 1.0))).norm();
    let passed = wronskian < WRONSKIAN_TOL && half_err < HALF_ORDER_TOL && gamma_err < GAMMA_TOL;
    let detail = format!("wronskian {wronskian:.2e} (< {WRONSKIAN_TOL:e}), half-order {half_err:.2e}, Γ(1+i) {gamma_err:.2e} (< {GAMMA_TOL:e})");
    assert!(verdict(1, passed, Some(Duration::from_secs(10)), start, &detail));
}

#[test]
fn criterion_2_identities() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let samples = [(0.02, 0.0), (0.05, 0.02), (0.1, 0.05), (-0.05, 0.1), (0.1, 0.2)];
    let points = [
        C64::from_polar(0.01, 0.2),
        C64::from_polar(0.1, -0.8),
        C64::from_polar(0.5, 1.1),
        C64::from_polar(1.5, -0.3),
    ];
    for (a, d) in samples {
        for z in points {
            let pt = SpectralPoint::from_sqrt(z).unwrap();
            let direct = f_n_direct(&p(a, d), 1, &pt, 1e-12).unwrap().value;
            let reduced = f_n_reduced(&p(a, d), 1, z, 1e-12).unwrap().value;
            worst = worst.max((direct - reduced).norm() / direct.norm());
        }
    }
    let pairs = [(0.0, c(0.0, 0.0)), (0.02, mode_constants(&p(0.05, 0.02), 1).unwrap().eta), (0.05, mode_constants(&p(0.1, 0.05), 1).unwrap().eta)];
    let mut closed: f64 = 0.0;
    for (d, eta) in pairs {
        let order = BesselOrder::new(eta).unwrap();
        let z = C64::from_polar(0.7, 0.3);
        let mut f = |s: f64| if s == 0.0 { c(0.0, 0.0) } else { s.powf(1.0 - d / 2.0) * bessel_k(&order, z * s, 1e-12).unwrap().value };
        let total = quad_finite(&mut f, 0.0, 1.0, 1e-12).unwrap().value + quad_semi_infinite(&mut f, 1.0, 1e-12, z.re).unwrap().value;
        let rhs = delta_coeff(d, eta).unwrap() * 0.5 * (z * 0.5).powf(-1.0 + d / 2.0);
        closed = closed.max((z * total - rhs).norm() / rhs.norm());
    }
    let passed = worst < REDUCTION_TOL && closed < CLOSED_FORM_TOL;
    let detail = format!("reduction {worst:.2e} on 20 samples (< {REDUCTION_TOL:e}), closed-form integral {closed:.2e} (< {CLOSED_FORM_TOL:e})");
    assert!(verdict(2, passed, Some(Duration::from_secs(30)), start, &detail));
}

#[test]
fn criterion_3_expansion_envelopes() {
    let start = Instant::now();
    let mods: Vec<f64> = (0..9).map(|i| 1e-4 * 10f64.powf(i as f64 * 0.25)).collect();
    let lx: Vec<f64> = mods.iter().map(|r| r.ln()).collect();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (a, d) in [(0.05, 0.02), (0.1, 0.0), (0.02, 0.05)] {
        let q = p(a, d);
        let exponent = 1.0 - mode_constants(&q, 1).unwrap().eta.re;
        for arg in [0.0, 0.7, -1.2] {
            let (mut cor, mut lead, mut env) = (Vec::new(), Vec::new(), Vec::new());
            for &r in &mods {
                let z = C64::from_polar(r, arg);
                let e = f_n_expansion(&q, 1, z, 1e-13).unwrap();
                cor.push(e.observed_defect.ln());
                env.push(e.remainder_bound.ln());
                lead.push(bessel_leading_defect(&q, 1, z).unwrap().observed_defect.ln());
            }
            let envelope = slope(&lx, &env);
            let (s1, s2) = (slope(&lx, &cor), slope(&lx, &lead));
            for s in [s1, s2] {
                worst = worst.max((s - envelope).abs()).max((s - exponent).abs());
            }
            lines.push(format!("({a},{d},{arg}) F {s1:.3} K {s2:.3} env {envelope:.3} 1−Reη {exponent:.4}"));
        }
    }
    let detail = format!("worst slope gap {worst:.3} (< {ENVELOPE_SLOPE_TOL}); {}", lines.join("; "));
    assert!(verdict(3, worst < ENVELOPE_SLOPE_TOL, Some(Duration::from_secs(60)), start, &detail));
}

#[test]
fn criterion_4_zero_free_certification() {
    let start = Instant::now();
    let mut passed = true;
    let mut lines = Vec::new();
    for a in [0.02, 0.05, 0.1] {
        for d in [0.0, 0.02, 0.05] {
            match SectorRegion::capped(DEFAULT_PHI, 1e-5, 1e-2, a).unwrap() {
                None => lines.push(format!("({a},{d}) empty region, vacuously zero-free")),
                Some(region) => {
                    let rep = certify_zero_free(&p(a, d), 1, &region).unwrap();
                    let ok = rep.winding_total == 0 && rep.status == CertStatus::Certified;
                    passed &= ok;
                    lines.push(format!("({a},{d}) winding {} {} on {}", rep.winding_total, rep.status.as_str(), region.describe()));
                }
            }
        }
    }
    assert!(verdict(4, passed, Some(Duration::from_secs(300)), start, &lines.join("; ")));
}

#[test]
fn criterion_5_resolvent_oracles() {
    let start = Instant::now();
    let q = p(0.05, 0.02);
    let (mut fd, mut ode, mut defect, mut j): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for f in BumpForcing::standard(1) {
        for l in standard_lambdas() {
            let pt = SpectralPoint::new(l).unwrap();
            let (out, sol) = resolvent_apply_opts(&q, 1, &pt, &f, &ResolventOptions::default()).unwrap();
            let oracle = resolvent_oracle_fd(&q, 1, &pt, &f, &FdGrid::default()).unwrap();
            fd = fd.max(relative_l2_distance(&sol, &oracle.vorticity).unwrap());
            ode = ode.max(ode_residual(&q, &sol, &f));
            defect = defect.max(out.noslip_defect).max(out.d_defect);
            let radii = [1.0, f.a, 0.5 * (f.a + f.b), f.b, 2.0 * f.b, 12.0];
            j = j.max(j_decomposition_check(&q, 1, &pt, &f, &radii, J_TOL).unwrap().max_residual);
        }
    }
    let passed = fd < FD_TOL && ode < ODE_TOL && defect < DEFECT_TOL && j < J_TOL;
    let detail = format!("FD {fd:.2e} (< {FD_TOL:e}), ODE {ode:.2e} (< {ODE_TOL:e}), defects {defect:.2e} (< {DEFECT_TOL:e}), J {j:.2e} (< {J_TOL:e})");
    assert!(verdict(5, passed, Some(Duration::from_secs(120)), start, &detail));
}

#[test]
fn criterion_6_norm_scaling() {
    let start = Instant::now();
    let q = p(0.05, 0.02);
    let mods = geometric(1e-4, 1e-2, 9);
    let scan = resolvent_norm_scan(&q, 1, 1.0, &mods, &ScanForcing::Diffusive { a: 1.5, b: 3.0 }).unwrap();
    let fixed = resolvent_norm_scan(&q, 1, 1.0, &mods, &ScanForcing::Fixed(BumpForcing::new(1, 1.5, 3.0).unwrap())).unwrap();
    let resolved = scan.rows.iter().all(|r| r.flag.is_none());
    let passed = resolved
        && (scan.slope_v - VELOCITY_SLOPE).abs() < SCAN_SLOPE_TOL
        && (scan.slope_grad - GRADIENT_SLOPE).abs() < SCAN_SLOPE_TOL;
    let detail = format!(
        "diffusive-scale data on arg λ = 1: velocity {:.3} (target {VELOCITY_SLOPE} ± {SCAN_SLOPE_TOL}), gradient {:.3} (target {GRADIENT_SLOPE} ± {SCAN_SLOPE_TOL}); fixed [1.5,3] bump: {:.3}, {:.3}",
        scan.slope_v, scan.slope_grad, fixed.slope_v, fixed.slope_grad
    );
    assert!(verdict(6, passed, Some(Duration::from_secs(120)), start, &detail));
}

#[test]
fn criterion_7_semigroup() {
    let start = Instant::now();
    let q = p(0.05, 0.02);
    let f = BumpForcing::new(1, 1.5, 3.0).unwrap();
    let t = 50.0;
    let a = dunford_apply(&q, 1, t, &f, &DunfordContour::for_time(t, 0.01, 0.6 * PI).unwrap()).unwrap();
    let b = dunford_apply(&q, 1, t, &f, &DunfordContour::for_time(t, 0.03, 0.65 * PI).unwrap()).unwrap();
    let (dv, dg) = a.state.difference(&b.state).norms();
    let invariance = (dv / a.norm_v).max(dg / a.norm_grad);

    let t0 = 1e-3;
    let mut recovery = Vec::new();
    for g in BumpForcing::standard(1) {
        let out = dunford_apply(&q, 1, t0, &g, &DunfordContour::default_for(t0).unwrap()).unwrap();
        recovery.push(out.state.distance_to(&g));
    }

    let ts = geometric(10.0, 1000.0, 7);
    let diffusive = decay_fit(&q, 1, &InitialData::Diffusive { a: 1.5, b: 3.0 }, &ts).unwrap();
    let fixed = decay_fit(&q, 1, &InitialData::Fixed(f), &ts).unwrap();
    let slope = diffusive.gradient.slope;

    let passed = invariance < INVARIANCE_TOL
        && recovery[0] < RECOVERY_TOL
        && (slope - GRADIENT_SLOPE).abs() < DECAY_SLOPE_TOL;
    let detail = format!(
        "invariance {invariance:.2e} (< {INVARIANCE_TOL:e}); t→0 at t = {t0:e}: [1.5,3] {:.4} (< {RECOVERY_TOL}), [2,6] {:.4}, [1.1,1.6] {:.4}; \
         ‖∇v‖ slope {slope:.3} for diffusive-scale data (target {GRADIENT_SLOPE} ± {DECAY_SLOPE_TOL}); fixed [1.5,3] data: ‖v‖ {:.3}, ‖∇v‖ {:.3}",
        recovery[0], recovery[1], recovery[2], fixed.velocity.slope, fixed.gradient.slope
    );
    assert!(verdict(7, passed, Some(Duration::from_secs(300)), start, &detail));
}

#[test]
fn criterion_8_stabilizing_effect() {
    let start = Instant::now();
    let deltas = [0.0, 0.02, 0.05];
    let mut floors = Vec::new();
    let mut radii = Vec::new();
    for d in deltas {
        let q = p(0.05, d);
        floors.push(floor_lambda_radius(&q, 1).unwrap());
        let rep = zero_free_radius(&q, 1, DEFAULT_PHI, 1e-5, 1.0, 2, &CertifyOptions::default()).unwrap();
        radii.push((rep.radius, rep.reached_limit));
    }
    let floor_increasing = floors.windows(2).all(|w| w[1] > w[0]);
    let radius_monotone = radii.windows(2).all(|w| w[1].0 >= w[0].0);
    let detail = format!(
        "K(δ/2+η₁)² at δ = {deltas:?}: {:.3e}, {:.3e}, {:.3e} (strictly increasing: {floor_increasing}); certified radii {:?} (non-decreasing: {radius_monotone})",
        floors[0], floors[1], floors[2], radii
    );
    assert!(verdict(8, floor_increasing && radius_monotone, None, start, &detail));
}

#[test]
fn criterion_9_injection_exploration() {
    let start = Instant::now();
    let region = SectorRegion::new(DEFAULT_PHI, 1e-5, 1e-2).unwrap();
    let rows = stability_sweep(&[0.02, 0.05, 0.1], &[-0.05, -0.02, -0.01], &region, &[1]);
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
    let ok = rows.len() == 9 && rows.iter().all(|r| r.exploratory);
    let counts: Vec<i64> = rows.iter().map(|r| r.zero_count).collect();
    let detail = format!("exploratory δ < 0 map, {} rows, zero counts {counts:?} (report only)", rows.len());
    assert!(verdict(9, ok, None, start, &detail));
}
