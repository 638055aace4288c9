use std::f64::consts::PI;

use diskflow::special::*;
use diskflow::spectral::{mode_constants, FlowParams};
use diskflow::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// 1/Γ(z) = z e^{γz} ∏_{k≤N} (1 + z/k) e^{−z/k}, with the log of the tail
/// ∏_{k>N} summed as −z²/2·ζ_N(2) + z³/3·ζ_N(3).
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
fn gamma_examples() {
    assert!((gamma_c(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
    assert!((gamma_c(c(5.0, 0.0)).unwrap() - 24.0).norm() < 1e-12);
    let oracle = gamma_product(c(1.0, 1.0));
    assert!((oracle - c(0.49801566811835604, -0.15494982830181069)).norm() < 1e-11, "{oracle}");
    assert!((gamma_c(c(1.0, 1.0)).unwrap() - oracle).norm() < 1e-10);
    assert!(matches!(gamma_c(c(-3.0, 0.0)), Err(Error::Pole(_))));
    assert!(matches!(gamma_c(c(0.0, 0.0)), Err(Error::Pole(_))));
}

#[test]
fn gamma_matches_product_across_the_strip() {
    for z in [c(0.3, 2.0), c(-1.7, 0.4), c(4.5, -3.0), c(0.5, 0.0)] {
        let g = gamma_c(z).unwrap();
        let o = gamma_product(z);
        assert!((g - o).norm() < 1e-9 * o.norm(), "{z}: {g} vs {o}");
    }
}

#[test]
fn log_gamma_taylor_examples() {
    assert_eq!(log_gamma_taylor(c(0.0, 0.0), 30).unwrap().value, c(0.0, 0.0));
    let v = log_gamma_taylor(c(0.1, 0.0), 40).unwrap();
    let oracle = gamma_c(c(1.1, 0.0)).unwrap().ln();
    assert!((v.value - oracle).norm() < 1e-14);
    assert!((v.value.re + 0.0498724).abs() < 1e-7);
    let z = c(0.0, 0.2);
    let v = log_gamma_taylor(z, 40).unwrap();
    assert!((v.value.exp() - gamma_c(1.0 + z).unwrap()).norm() < 1e-10);
    assert!(v.abs_err <= 0.2f64.powi(41) / 0.8 * (1.0 + 1e-12));
    assert!(matches!(log_gamma_taylor(c(0.6, 0.0), 20), Err(Error::Domain(_))));
}

#[test]
fn half_order_closed_forms() {
    let half = BesselOrder::real(0.5).unwrap();
    let i = bessel_i(&half, c(1.0, 0.0), 1e-14).unwrap().value;
    let k = bessel_k(&half, c(1.0, 0.0), 1e-14).unwrap().value;
    assert!((i - (2.0 / PI).sqrt() * 1f64.sinh()).norm() < 1e-12);
    assert!((k - (PI / 2.0).sqrt() * (-1f64).exp()).norm() < 1e-12);
    assert!((i.re - 0.9376748).abs() < 1e-7 && (k.re - 0.4610685).abs() < 1e-7);
    assert!(wronskian_defect(&half, c(1.0, 0.0)).unwrap() < 1e-10);
}

#[test]
fn i_leading_term_at_small_argument() {
    let mu = c(1.05, 0.03);
    let order = BesselOrder::new(mu).unwrap();
    let mut last = f64::INFINITY;
    for z in [c(1e-2, 1e-2), c(1e-4, 1e-4), c(1e-6, 1e-6)] {
        let lead = (z * 0.5).powc(mu) / gamma_c(mu + 1.0).unwrap();
        let dev = (bessel_i(&order, z, 1e-14).unwrap().value / lead - 1.0).norm();
        assert!(dev < last);
        last = dev;
    }
    assert!(last < 1e-11);
}

#[test]
fn conjugation_examples() {
    let (mu, z) = (c(1.2, 0.3), c(0.5, 0.5));
    let a = bessel_i(&BesselOrder::new(mu).unwrap(), z, 1e-14).unwrap().value;
    let b = bessel_i(&BesselOrder::new(mu.conj()).unwrap(), z.conj(), 1e-14).unwrap().value;
    assert!((a.conj() - b).norm() < 1e-10 * a.norm());
    let xi = mode_constants(&FlowParams::new(0.1, 0.05).unwrap(), 1).unwrap().xi;
    let z = c(0.3, 0.2);
    let a = bessel_k(&BesselOrder::new(xi).unwrap(), z, 1e-14).unwrap().value;
    let b = bessel_k(&BesselOrder::new(xi.conj()).unwrap(), z.conj(), 1e-14).unwrap().value;
    assert!((a.conj() - b).norm() < 1e-10 * a.norm());
}

#[test]
fn wronskian_examples() {
    let xi = mode_constants(&FlowParams::new(0.1, 0.0).unwrap(), 1).unwrap().xi;
    assert!(wronskian_defect(&BesselOrder::new(xi).unwrap(), c(0.7, 0.3)).unwrap() < 1e-8);
    assert!(wronskian_defect(&BesselOrder::new(c(1.5, 0.5)).unwrap(), c(2.0, 0.0)).unwrap() < 1e-8);
}

#[test]
fn k_small_argument_leading_term() {
    let p = FlowParams::new(0.05, 0.02).unwrap();
    let eta = mode_constants(&p, 1).unwrap().eta;
    let order = BesselOrder::new(1.0 + eta).unwrap();
    for r in [1e-2, 1e-3, 1e-4] {
        let z = C64::from_polar(r, 0.6);
        let k = bessel_k(&order, z, 1e-14).unwrap().value;
        let lead = gamma_c(1.0 + eta).unwrap() * 0.5 * (z * 0.5).powc(-1.0 - eta);
        let envelope = r.powf(1.0 - eta.re) * (1.0 + r.ln().abs());
        assert!((k - lead).norm() < envelope, "{r}");
    }
}

#[test]
fn bound_margins() {
    let g = SampleGrid::geometric(1e-3, 0.9, 6, 1.4, 5, 0);
    let mu = c(1.0, 0.05);
    let coarse = bessel_envelope_margin(mu, 0.1, &g).unwrap();
    let fine = bessel_envelope_margin(mu, 0.1, &g.refined()).unwrap();
    for (a, b) in coarse.iter().zip(&fine) {
        assert!(a.sup_ratio.is_finite() && a.sup_ratio > 0.0, "{}", a.lemma_id);
        if a.lemma_id.contains("small") {
            assert!((a.sup_ratio / b.sup_ratio - 1.0).abs() < 0.1, "{}", a.lemma_id);
        }
    }
    let p = FlowParams::new(0.05, 0.02).unwrap();
    let g = SampleGrid::geometric(1e-4, 1e-2, 3, 2.0, 3, 6);
    let reports = bessel_bound_margin(BoundFamily::VelocityK, &p, 0.1, &g).unwrap();
    let item = reports.iter().find(|r| r.lemma_id == "velocity-K(1) k=0").unwrap();
    assert!(item.sup_ratio.is_finite() && item.sup_ratio > 0.0);
    let empty = SampleGrid { moduli: vec![], args: vec![], positions: 4, split: 1.0 };
    assert!(matches!(bessel_bound_margin(BoundFamily::VelocityK, &p, 0.1, &empty), Err(Error::Precondition(_))));
}

fn order_strategy() -> impl Strategy<Value = C64> {
    (0.55f64..2.5, -0.6f64..0.6).prop_map(|(a, b)| c(a, b))
}

fn arg_strategy() -> impl Strategy<Value = C64> {
    (-4.0f64..1.3, -1.45f64..1.45).prop_map(|(l, t)| C64::from_polar(10f64.powf(l), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wronskian_holds(mu in order_strategy(), z in arg_strategy()) {
        prop_assert!(wronskian_defect(&BesselOrder::new(mu).unwrap(), z).unwrap() < 1e-8);
    }

    #[test]
    fn conjugation_symmetry(mu in order_strategy(), z in arg_strategy()) {
        let (a, b) = (BesselOrder::new(mu).unwrap(), BesselOrder::new(mu.conj()).unwrap());
        let k = bessel_k_scaled(mu, z).unwrap().value;
        let kc = bessel_k_scaled(b.mu, z.conj()).unwrap().value;
        prop_assert!((k.conj() - kc).norm() <= 1e-10 * k.norm());
        let i = bessel_i_scaled(a.mu, z).unwrap().value;
        let ic = bessel_i_scaled(b.mu, z.conj()).unwrap().value;
        prop_assert!((i.conj() - ic).norm() <= 1e-10 * i.norm());
    }

    #[test]
    fn k_recurrence_closes(mu in order_strategy(), z in arg_strategy()) {
        // z K_μ − (μ−1) K_{μ−1} + z K′_{μ−1} = 0, all scaled by e^{z}
        let k = bessel_k_scaled(mu, z).unwrap().value;
        let km = bessel_k_scaled(mu - 1.0, z).unwrap().value;
        let dkm = bessel_k_deriv_scaled(mu - 1.0, z).unwrap();
        let scale = (z * k).norm().max(((mu - 1.0) * km).norm());
        prop_assert!((z * k - (mu - 1.0) * km + z * dkm).norm() < 1e-8 * scale);
    }

    #[test]
    fn i_recurrence_closes(mu in order_strategy(), z in arg_strategy()) {
        let i = bessel_i_scaled(mu, z).unwrap().value;
        let im = bessel_i_scaled(mu - 1.0, z).unwrap().value;
        let ip = bessel_i_scaled(mu + 1.0, z).unwrap().value;
        let scale = im.norm().max(ip.norm()).max((2.0 * mu / z * i).norm());
        prop_assert!((im - ip - 2.0 * mu / z * i).norm() < 1e-8 * scale);
    }

    #[test]
    fn k_methods_agree(mu in (0.55f64..1.45, -0.3f64..0.3).prop_map(|(a, b)| c(a, b)),
                       z in (-2.0f64..0.5, -1.2f64..1.2).prop_map(|(l, t)| C64::from_polar(10f64.powf(l), t))) {
        let conn = bessel_k_scaled_with(mu, z, KMethod::Connection).unwrap();
        let int = bessel_k_scaled_with(mu, z, KMethod::Integral).unwrap();
        let tol = (conn.abs_err + int.abs_err).max(1e-11 * conn.value.norm());
        prop_assert!((conn.value - int.value).norm() <= tol, "{} vs {}", conn.value, int.value);
    }
}
