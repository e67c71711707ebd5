use std::f64::consts::PI;

use heckelab::geometry::{norm_of, FundamentalDomainMesh, InnerProductResult};
use heckelab::hecke::eigenforms;
use heckelab::lfunctions::{
    analyzed_eigenforms, norm_from_sym2, rankin_selberg_factor, stirling_csv, stirling_ratio, sym2_l_afe,
    sym2_l_critical_line, triple_product_central, watson_extract, zeta, AfeConfig, LMethod, LVALUE_SCHEMA,
};
use heckelab::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rug::{Complex, Float};

const L1_SYM2_DELTA: f64 = 0.631_792_945_727_883_2;
const DELTA_NORM: f64 = 1.035_362_056_804_321e-6;

#[test]
fn zeta_against_reference_values() {
    // ζ(3) and ζ(1/2 + 10i) to 40 digits from an independent arbitrary-precision library
    let z3 = zeta(&Complex::with_val(192, (3, 0)), 192).unwrap();
    let want = Float::parse("1.202056903159594285399738161511449990765").unwrap();
    assert!(Float::with_val(192, z3.value.real() - Float::with_val(192, want)).abs() < 1e-35);
    let zc = zeta(&Complex::with_val(192, (0.5, 10.0)), 192).unwrap();
    assert!((zc.value.real().to_f64() - 1.544_895_220_296_752_8).abs() < 1e-14);
    assert!((zc.value.imag().to_f64() + 0.115_336_465_271_273_38).abs() < 1e-14);
    assert!(zeta(&Complex::with_val(64, (1, 0)), 64).is_err());
}

#[test]
fn sym2_delta_at_one_by_both_methods() {
    let delta = &eigenforms(12, 200).unwrap()[0];
    let cfg = AfeConfig::default();
    let series = sym2_l_afe(delta, &Complex::with_val(cfg.prec, (1, 0)), &cfg).unwrap();
    assert!((series.to_f64() - L1_SYM2_DELTA).abs() < 1e-15);
    let quad = norm_of(delta, &FundamentalDomainMesh::default()).unwrap();
    assert!((quad.value.re - DELTA_NORM).abs() / DELTA_NORM < 1e-12);
    let factor = rankin_selberg_factor(12, 192).to_f64();
    assert!((L1_SYM2_DELTA * factor - DELTA_NORM).abs() / DELTA_NORM < 1e-14);
    let back = norm_from_sym2(12, &series);
    assert!((back.value.re - DELTA_NORM).abs() / DELTA_NORM < 1e-14);
}

#[test]
fn sym2_values_sit_in_sanity_window() {
    let mesh = FundamentalDomainMesh::default();
    for k in [12u32, 20, 28, 36] {
        for f in analyzed_eigenforms(k, &mesh).unwrap() {
            let l = f.sym2_at_1.as_ref().unwrap();
            let ll = (k as f64).ln().ln();
            let v = l.to_f64();
            assert!(v > 0.1 / ll && v < 10.0 * ll.powi(3), "{} {v}", f.id());
            assert!(l.precision_estimate < 1e-10 * v);
        }
    }
}

#[test]
fn critical_line_window() {
    let delta = &eigenforms(12, 200).unwrap()[0];
    let a = sym2_l_critical_line(delta, 7.0).unwrap();
    let b = sym2_l_critical_line(delta, -7.0).unwrap();
    let d = Complex::with_val(128, &a.value - Complex::with_val(128, b.value.conj_ref()));
    assert!(Float::with_val(64, d.abs_ref()) < 1e-12);
    assert!(a.precision_estimate <= 1e-6);
    let zero = sym2_l_critical_line(delta, 0.0).unwrap();
    assert!(zero.value.imag().to_f64().abs() < 1e-12);
    assert!(matches!(sym2_l_critical_line(delta, 60.0), Err(Error::UnsupportedRange(_))));
    let json = a.to_json();
    assert_eq!(json.schema, LVALUE_SCHEMA);
}

#[test]
fn stirling_half_integer_oracle() {
    // Γ(k − 1/2)/Γ(k) = (2k−2)! √π / (4^{k−1} (k−1)! (k−1)!)
    for k in [12u32, 20, 30] {
        let n = (k - 1) as u64;
        let mut v = PI.sqrt();
        for i in 1..=2 * n {
            v *= i as f64;
        }
        for i in 1..=n {
            v /= 4.0 * (i * i) as f64;
        }
        let got = stirling_ratio(k, 0.0, 192).unwrap().to_f64();
        assert!((got - v).abs() < 1e-13 * v, "k={k}");
    }
    assert!(stirling_csv(&[]).starts_with("k,t,regime,ratio,bound,margin"));
}

#[test]
fn watson_on_delta_squared() {
    let mesh = FundamentalDomainMesh::default();
    let delta = analyzed_eigenforms(12, &mesh).unwrap().remove(0);
    let hs = analyzed_eigenforms(24, &mesh).unwrap();
    let basis = hs.clone();
    let dec = heckelab::moments::decompose_product(&delta, &delta, &basis).unwrap();
    let nd = delta.petersson_norm.clone().unwrap();
    for (c, h) in dec.coefficients.iter().zip(&hs) {
        let nh = h.petersson_norm.clone().unwrap();
        let mut inner = nh.clone();
        inner.value *= c.to_f64();
        let v = triple_product_central(&delta, &delta, h, &inner, [&nd, &nd, &nh]).unwrap();
        assert_eq!(v.method, LMethod::WatsonExtraction);
        assert!(v.to_f64() > 0.0);
    }
    let wrong = triple_product_central(&delta, &delta, &delta, &nd, [&nd, &nd, &nd]);
    assert!(matches!(wrong, Err(Error::InvalidInput(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn watson_scale_invariance(c in 0.1f64..10.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let norm = |v: f64| InnerProductResult::exact(Complex64::new(v, 0.0));
        let inner = InnerProductResult::exact(Complex64::new(re, im));
        let ls = [(0.7, 0.0), (0.9, 0.0), (1.1, 0.0)];
        let base = watson_extract(12, 16, &inner, [&norm(2.0), &norm(3.0), &norm(5.0)], ls).unwrap().to_f64();
        let scaled_inner = InnerProductResult::exact(Complex64::new(re * c, im * c));
        let scaled = watson_extract(12, 16, &scaled_inner, [&norm(2.0 * c * c), &norm(3.0), &norm(5.0)], ls).unwrap().to_f64();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.abs().max(1e-300));
        prop_assert!(base >= 0.0);
    }
}
