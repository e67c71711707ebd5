use std::f64::consts::PI;

use heckelab::arith::{gcd, mod_inverse};
use heckelab::spectral::bessel::{bessel_j_imag, bessel_k_imag};
use heckelab::spectral::{
    bessel_h, eta_t, kloosterman, kuznetsov_geometric_side, weil_bound, weil_bound_check, BesselTransformConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn kloosterman_direct(m: u64, n: u64, c: u64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for d in 1..=c {
        if gcd(d, c) != 1 {
            continue;
        }
        let dbar = mod_inverse(d, c).unwrap_or(0);
        let phase = 2.0 * PI * ((m * d + n * dbar) % c) as f64 / c as f64;
        acc += Complex64::from_polar(1.0, phase);
    }
    acc.re
}

#[test]
fn kloosterman_known_values() {
    assert_eq!(kloosterman(1, 1, 1).unwrap().value, 1.0);
    assert!((kloosterman(1, 1, 2).unwrap().value - 1.0).abs() < 1e-15);
    // S(1, 1, 5) = (3 − √5)/2, not an integer
    let s5 = kloosterman(1, 1, 5).unwrap().value;
    assert!((s5 - kloosterman_direct(1, 1, 5)).abs() < 1e-12);
    assert!((s5 - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
    assert!(kloosterman(1, 1, 0).is_err());
}

#[test]
fn weil_grid_and_csv() {
    let r = weil_bound_check(6, 40, true).unwrap();
    assert_eq!(r.checked, 6 * 6 * 40);
    assert_eq!(r.rows.len(), r.checked);
    assert!(r.worst.ratio <= 1.0 + 1e-12);
    assert!(r.to_csv().lines().count() == r.checked + 1);
    assert!((weil_bound(1, 1, 101) - 2.0 * 101f64.sqrt()).abs() < 1e-12);
}

#[test]
fn bessel_against_reference_values() {
    // values from an independent arbitrary-precision library
    let j = bessel_j_imag(1.5, 2.0, 192).unwrap();
    assert!((j.real().to_f64() - 17.039_662_021_083_878).abs() < 1e-12);
    assert!((j.imag().to_f64() + 16.155_498_415_573_007).abs() < 1e-12);
    let j = bessel_j_imag(5.0, 7.5, 192).unwrap();
    assert!((j.real().to_f64() - 558_556.314_570_389_7).abs() < 1e-8);
    assert!((j.imag().to_f64() - 498_997.742_752_124_85).abs() < 1e-8);
    let k = bessel_k_imag(1.5, 2.0, 192).unwrap().to_f64();
    assert!((k - 0.014_238_040_755_583_181).abs() < 1e-16);
    let k = bessel_k_imag(5.0, 7.5, 192).unwrap().to_f64();
    assert!((k - 1.266_881_574_476_722_5e-7).abs() < 1e-20);
}

#[test]
fn bessel_h_closed_form() {
    // H = (1/2π²) ∫₀^∞ e^{−t²/T²} t tanh(πt) dt sits just below T²/4π²
    let t = 20.0;
    let h = bessel_h(&BesselTransformConfig::new(t).unwrap()).unwrap();
    let main = t * t / (4.0 * PI * PI);
    assert!((h.value - main).abs() / main < 1e-2);
    assert!(h.value < main);
    assert!(BesselTransformConfig::new(-1.0).is_err());
}

#[test]
fn kuznetsov_structure() {
    let k = kuznetsov_geometric_side(1, 1, 10.0, 6).unwrap();
    assert!((k.value - k.diagonal - k.off_diagonal).abs() < 1e-12);
    assert!(k.diagonal > 0.0 && k.truncation_bound > 0.0);
    assert!(k.envelope_linear > 0.0);
    let off = kuznetsov_geometric_side(1, 2, 10.0, 6).unwrap();
    assert_eq!(off.diagonal, 0.0);
    assert!(kuznetsov_geometric_side(20, 20, 10.0, 6).is_err());
}

#[test]
fn eta_values() {
    assert!((eta_t(1, 3.0).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    // η_t(p) = p^{it} + p^{−it} = 2cos(t log p)
    let v = eta_t(7, 0.8).unwrap();
    assert!((v.re - 2.0 * (0.8 * 7f64.ln()).cos()).abs() < 1e-14 && v.im.abs() < 1e-14);
    assert!(eta_t(0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kloosterman_matches_direct_sum(m in 0u64..60, n in 0u64..60, c in 1u64..150) {
        let lib = kloosterman(m, n, c).unwrap().value;
        let direct = kloosterman_direct(m, n, c);
        prop_assert!((lib - direct).abs() <= 1e-9 * (c as f64));
        prop_assert!((lib - kloosterman(n, m, c).unwrap().value).abs() <= 1e-12 * (c as f64));
        prop_assert!(lib.abs() <= weil_bound(m.max(1), n.max(1), c) * (1.0 + 1e-12) || m == 0 || n == 0);
    }
}
