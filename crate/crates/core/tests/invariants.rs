use std::f64::consts::PI;

use proptest::prelude::*;

use bosonband::cli::config::{parse_angle, parse_config_text, RunConfig};
use bosonband::oracle;
use bosonband::threebody;
use bosonband::torus::{dispersion, three_body_symbol, TorusPoint};
use bosonband::twobody;

fn coupling() -> impl Strategy<Value = f64> {
    prop_oneof![-5.0..-0.05f64, 0.05..5.0f64]
}

fn point(dim: usize) -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec(-PI..PI, dim).prop_map(|c| TorusPoint::new(&c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_body_root_on_the_bound_side(mu in coupling(), k in point(1)) {
        let s = twobody::bound_state_energy(mu, &k).unwrap();
        prop_assert!(s.residual < 1e-10);
        prop_assert!(s.binding > 0.0);
        if mu < 0.0 {
            prop_assert!(s.energy < s.ess.lo);
        } else {
            prop_assert!(s.energy > s.ess.hi);
        }
    }

    #[test]
    fn two_body_duality_and_evenness(mu in 0.3..5.0f64, d in 1usize..=2, c in prop::collection::vec(-PI..PI, 2)) {
        let k = TorusPoint::new(&c[..d]).unwrap();
        let a = twobody::bound_state_energy(-mu, &k).unwrap().energy;
        let b = twobody::bound_state_energy(mu, &k).unwrap().energy;
        prop_assert!((a + b - 8.0 * d as f64).abs() < 1e-9);
        let m = twobody::bound_state_energy(-mu, &-k).unwrap().energy;
        prop_assert!((a - m).abs() < 1e-12);
    }

    #[test]
    fn three_body_symbol_symmetries(k in point(2), p in point(2), q in point(2)) {
        let e = three_body_symbol(&k, &p, &q);
        prop_assert!((0.0..=24.0).contains(&e));
        prop_assert!((e - three_body_symbol(&k, &q, &p)).abs() < 1e-12);
        let r = k - p - q;
        prop_assert!((e - three_body_symbol(&k, &p, &r)).abs() < 1e-12);
        prop_assert!((e - dispersion(&p) - dispersion(&q) - dispersion(&r)).abs() < 1e-12);
    }

    #[test]
    fn essential_spectrum_brackets_the_band(mu in coupling(), k in point(1)) {
        let s = threebody::essential_spectrum(mu, &k).unwrap();
        let band = s.three_particle_band;
        prop_assert!(s.tau_bottom <= band.lo && band.hi <= s.tau_top);
        prop_assert_eq!(s.tau_bottom, s.two_particle_branch.lo.min(band.lo));
        prop_assert_eq!(s.tau_top, s.two_particle_branch.hi.max(band.hi));
        if mu < 0.0 {
            prop_assert!(s.tau_bottom < band.lo);
        } else {
            prop_assert!(s.tau_top > band.hi);
        }
    }

    #[test]
    fn richardson_is_exact_for_quadratic_decay(a in -10.0..10.0f64, b in -50.0..50.0f64) {
        prop_assume!(b.abs() > 1e-3);
        let e: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|l: &f64| a + b / (l * l)).collect();
        let x = oracle::extrapolate(&e).unwrap();
        prop_assert!((x.energy - a).abs() < 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn flags_take_precedence_over_the_file(file_mu in -5.0..5.0f64, flag_mu in -5.0..5.0f64, n in 2usize..600) {
        let file = parse_config_text(&format!("mu = {file_mu}\nn = {n}\n")).unwrap();
        let mut flags = std::collections::BTreeMap::new();
        let cfg = RunConfig::resolve("twobody", &file, &flags).unwrap();
        prop_assert_eq!(cfg.mu, file_mu);
        prop_assert_eq!(cfg.n, n);
        flags.insert("mu".to_string(), flag_mu.to_string());
        let cfg = RunConfig::resolve("twobody", &file, &flags).unwrap();
        prop_assert_eq!(cfg.mu, flag_mu);
        prop_assert_eq!(cfg.n, n);
    }

    #[test]
    fn angles_parse_in_pi_notation(num in -8i32..8, den in 1i32..9) {
        let v = parse_angle(&format!("{num}pi/{den}")).unwrap();
        prop_assert!((v - num as f64 * PI / den as f64).abs() < 1e-14);
        let plain = parse_angle(&format!("{}", num as f64 / den as f64)).unwrap();
        prop_assert!((plain - num as f64 / den as f64).abs() < 1e-15);
    }
}
