//! Kloosterman sums and the Weil bound, the divisor function `η_t`, the
//! Bessel transforms of the Kuznetsov formula with its geometric side, and
//! the Petersson delta check over a Hecke eigenbasis.

pub mod bessel;

pub use bessel::{bessel_h, bessel_h_minus, bessel_h_plus, BesselTransformConfig, BesselValue};

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, mod_inverse, tau};
use crate::error::{Error, Result};
use crate::hecke::HeckeEigenform;
use crate::lfunctions::zeta_real;

const KLOOSTERMAN_PREC: u32 = 128;

/// `S(m, n, c) = Σ_{d mod c, (d,c)=1} e((md + n d̄)/c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KloostermanValue {
    pub m: u64,
    pub n: u64,
    pub c: u64,
    /// `raw` rounded to double precision.
    pub value: f64,
    /// Extended-precision value of the cosine sum.
    #[serde(skip)]
    pub raw: Option<Float>,
    /// `counts[r] = #{d : md + n d̄ ≡ r (mod c)}`; the sum is `Σ counts[r] cos(2πr/c)`.
    pub counts: Vec<u64>,
}

impl KloostermanValue {
    /// Distance of the extended-precision sum to the nearest integer.
    pub fn rounding_defect(&self) -> f64 {
        let raw = self.raw.as_ref().expect("raw value present");
        let r = raw.clone().round();
        Float::with_val(64, raw - r).abs().to_f64()
    }

    pub fn weil_bound(&self) -> f64 {
        weil_bound(self.m, self.n, self.c)
    }
}

/// `τ(c) √(c · gcd(m, n, c))`.
pub fn weil_bound(m: u64, n: u64, c: u64) -> f64 {
    let g = gcd(gcd(m, n), c);
    tau(c) as f64 * ((c * g) as f64).sqrt()
}

/// Units modulo `c` with their inverses, and `cos(2πr/c)` for every residue.
struct Modulus {
    c: u64,
    units: Vec<(u64, u64)>,
    cosines: Vec<Float>,
}

impl Modulus {
    fn new(c: u64) -> Self {
        let units = (0..c)
            .filter(|&d| gcd(d, c) == 1)
            .map(|d| (d, mod_inverse(d, c).unwrap_or(0)))
            .collect();
        let two_pi = Float::with_val(KLOOSTERMAN_PREC, Constant::Pi) * 2u32;
        let cosines = (0..c)
            .map(|r| (Float::with_val(KLOOSTERMAN_PREC, &two_pi * r) / c).cos())
            .collect();
        Self { c, units, cosines }
    }

    fn sum(&self, m: u64, n: u64) -> KloostermanValue {
        let c = self.c;
        let mut counts = vec![0u64; c as usize];
        let (mr, nr) = ((m % c) as u128, (n % c) as u128);
        for &(d, e) in &self.units {
            let r = (mr * d as u128 + nr * e as u128) % c as u128;
            counts[r as usize] += 1;
        }
        let mut raw = Float::new(KLOOSTERMAN_PREC);
        for (r, &k) in counts.iter().enumerate() {
            if k > 0 {
                raw += Float::with_val(KLOOSTERMAN_PREC, &self.cosines[r] * k);
            }
        }
        KloostermanValue { m, n, c, value: raw.to_f64(), raw: Some(raw), counts }
    }
}

pub fn kloosterman(m: u64, n: u64, c: u64) -> Result<KloostermanValue> {
    if c == 0 {
        return Err(Error::InvalidInput("Kloosterman modulus must be positive".into()));
    }
    Ok(Modulus::new(c).sum(m, n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilRow {
    pub m: u64,
    pub n: u64,
    pub c: u64,
    pub abs_value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub rounding_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilReport {
    pub checked: usize,
    pub worst: WeilRow,
    pub max_rounding_defect: f64,
    /// Every triple, in `(c, m, n)` order, when requested.
    pub rows: Vec<WeilRow>,
}

impl WeilReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,c,abs_value,bound,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{:.12e},{:.12e},{:.12e}", r.m, r.n, r.c, r.abs_value, r.bound, r.ratio);
        }
        out
    }
}

/// Check `|S(m,n,c)| ≤ τ(c)√(c·(m,n,c))` for all `1 ≤ m, n ≤ mn_max`,
/// `1 ≤ c ≤ c_max`. A violation is a hard error.
pub fn weil_bound_check(mn_max: u64, c_max: u64, keep_rows: bool) -> Result<WeilReport> {
    if mn_max == 0 || c_max == 0 {
        return Err(Error::InvalidInput("empty Weil range".into()));
    }
    let per_c: Vec<Vec<WeilRow>> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let modulus = Modulus::new(c);
            let mut rows = Vec::with_capacity((mn_max * mn_max) as usize);
            for m in 1..=mn_max {
                for n in 1..=mn_max {
                    let s = modulus.sum(m, n);
                    let bound = s.weil_bound();
                    rows.push(WeilRow {
                        m,
                        n,
                        c,
                        abs_value: s.value.abs(),
                        bound,
                        ratio: s.value.abs() / bound,
                        rounding_defect: s.rounding_defect(),
                    });
                }
            }
            rows
        })
        .collect();
    let mut checked = 0;
    let mut worst: Option<WeilRow> = None;
    let mut max_defect: f64 = 0.0;
    let mut all = Vec::new();
    for rows in per_c {
        for r in rows {
            checked += 1;
            if r.abs_value > r.bound * (1.0 + 1e-12) {
                return Err(Error::BoundViolation(format!(
                    "|S({}, {}, {})| = {} exceeds the Weil bound {}",
                    r.m, r.n, r.c, r.abs_value, r.bound
                )));
            }
            max_defect = max_defect.max(r.rounding_defect);
            if worst.as_ref().map_or(true, |w| r.ratio > w.ratio) {
                worst = Some(r.clone());
            }
            if keep_rows {
                all.push(r);
            }
        }
    }
    Ok(WeilReport { checked, worst: worst.expect("nonempty range"), max_rounding_defect: max_defect, rows: all })
}

/// `η_t(n) = Σ_{ab=n} (a/b)^{it}`.
pub fn eta_t(n: u64, t: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidInput("eta_t needs n >= 1".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in divisors(n) {
        let b = n / a;
        acc += Complex64::from_polar(1.0, t * (a as f64 / b as f64).ln());
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KuznetsovGeometric {
    pub m: u64,
    pub n: u64,
    pub t_scale: f64,
    pub c_max: u64,
    /// `½ δ_{m,n} H`.
    pub diagonal: f64,
    /// `½ Σ_± Σ_{c ≤ c_max} S(n, ±m, c)/c · H^±(4π√(mn)/c)`.
    pub off_diagonal: f64,
    pub value: f64,
    /// Quadrature error plus the bound on the omitted moduli.
    pub truncation_bound: f64,
    /// `max |H⁺(x)| / (T x)` over the summed moduli.
    pub envelope_plus: f64,
    /// `max |H⁻(x)| / (T^{3/2} x^{1/2})` over the summed moduli.
    pub envelope_minus: f64,
    /// Constant of the linear envelope used for the omitted moduli.
    pub envelope_linear: f64,
}

/// Right side of the Kuznetsov formula for `h(t) = e^{−t²/T²}`, summed over
/// `c ≤ c_max`. Moduli beyond `c_max` are bounded with the Weil bound and a
/// linear envelope `|H^±(x)| ≤ C x`, whose constant is measured (with a
/// factor 2 margin) at the arguments of the summed moduli; the transforms
/// behave like `x/4π` for small `x`.
pub fn kuznetsov_geometric_side(m: u64, n: u64, t_scale: f64, c_max: u64) -> Result<KuznetsovGeometric> {
    if m == 0 || n == 0 || c_max == 0 {
        return Err(Error::InvalidInput("m, n and c_max must be positive".into()));
    }
    if (m * n) as f64 > t_scale * t_scale {
        return Err(Error::InvalidInput(format!("mn = {} exceeds T² = {}", m * n, t_scale * t_scale)));
    }
    let cfg = BesselTransformConfig::new(t_scale)?;
    let big_h = bessel_h(&cfg)?;
    let diagonal = if m == n { 0.5 * big_h.value } else { 0.0 };
    let mut err = if m == n { 0.5 * big_h.precision_estimate } else { 0.0 };
    let root = ((m * n) as f64).sqrt();
    let rows: Vec<Result<(f64, f64, f64, f64, f64)>> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let x = 4.0 * PI * root / c as f64;
            let plus = bessel_h_plus(x, &cfg)?;
            let minus = bessel_h_minus(x, &cfg)?;
            let s_plus = kloosterman(n, m, c)?.value;
            // S(n, −m, c) = S(n, c − m mod c, c)
            let s_minus = kloosterman(n, (c - m % c) % c, c)?.value;
            let v = (s_plus * plus.value + s_minus * minus.value) / c as f64;
            let e = (s_plus.abs() * plus.precision_estimate + s_minus.abs() * minus.precision_estimate) / c as f64;
            let cp = plus.value.abs() / (t_scale * x);
            let cm = minus.value.abs() / (t_scale.powf(1.5) * x.sqrt());
            let lin = plus.value.abs().max(minus.value.abs()) / x;
            Ok((v, e, cp, cm, lin))
        })
        .collect();
    let mut off = 0.0;
    let mut c_plus: f64 = 0.0;
    let mut c_minus: f64 = 0.0;
    let mut c_lin: f64 = 0.0;
    for r in rows {
        let (v, e, cp, cm, lin) = r?;
        off += v;
        err += 0.5 * e;
        c_plus = c_plus.max(cp);
        c_minus = c_minus.max(cm);
        c_lin = c_lin.max(lin);
    }
    c_lin *= 2.0;
    let off_diagonal = 0.5 * off;
    // ½ Σ_± Σ_{c > C} τ(c) √(c g) / c · C x_c with x_c = 4π√(mn)/c, using
    // Σ_{c > C} τ(c) c^{−3/2} = ζ(3/2)² − Σ_{c ≤ C} τ(c) c^{−3/2}.
    let g = (gcd(m, n) as f64).sqrt();
    let z = zeta_real(1.5, 64)?.to_f64();
    let head: f64 = (1..=c_max).map(|c| tau(c) as f64 * (c as f64).powf(-1.5)).sum();
    let tau_tail = (z * z - head).max(0.0);
    let truncation_bound = err + g * c_lin * 4.0 * PI * root * tau_tail;
    Ok(KuznetsovGeometric {
        m,
        n,
        t_scale,
        c_max,
        diagonal,
        off_diagonal,
        value: diagonal + off_diagonal,
        truncation_bound,
        envelope_plus: c_plus,
        envelope_minus: c_minus,
        envelope_linear: c_lin,
    })
}

/// Window `mn ≤ k²/10⁴` in which the Petersson sum is exponentially close to `δ(m,n)`.
pub fn in_delta_window(k: u32, m: u64, n: u64) -> bool {
    ((m * n) as f64) <= (k as f64).powi(2) / 1e4
}

/// `(2π²/(k−1)) Σ_f λ_f(m) λ_f(n) / L(1, sym²f) − δ_{m,n}` over the eigenbasis
/// `forms` of `S_k`, each carrying `L(1, sym²f)`.
pub fn petersson_delta_check(forms: &[HeckeEigenform], m: u64, n: u64) -> Result<f64> {
    let k = forms
        .first()
        .map(|f| f.weight)
        .ok_or_else(|| Error::InvalidInput("empty eigenbasis".into()))?;
    if m * n > 100 {
        return Err(Error::UnsupportedRange(format!("mn = {} exceeds 100", m * n)));
    }
    if !in_delta_window(k, m, n) {
        log::warn!("petersson delta check at k = {k}, (m, n) = ({m}, {n}) lies outside mn <= k^2/10^4");
    }
    let prec = 128;
    let mut acc = Float::new(prec);
    for f in forms {
        if f.weight != k {
            return Err(Error::InvalidInput("eigenbasis mixes weights".into()));
        }
        if (m.max(n)) as usize > f.truncation {
            return Err(Error::InvalidInput(format!("index exceeds truncation of {}", f.id())));
        }
        let l1 = f
            .sym2_at_1
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{} has no L(1, sym^2) attached", f.id())))?;
        let term = Float::with_val(prec, f.lambda(m as usize) * f.lambda(n as usize)) / l1.real();
        acc += term;
    }
    let pi2 = Float::with_val(prec, Constant::Pi).square();
    let lhs = acc * pi2 * 2u32 / (k - 1);
    let delta = if m == n { 1.0 } else { 0.0 };
    Ok(lhs.to_f64() - delta)
}

/// The full Petersson formula: `2π i^{−k} Σ_{c ≤ c_max} S(m,n,c)/c · J_{k−1}(4π√(mn)/c)`,
/// which the deviation returned by [`petersson_delta_check`] equals exactly in
/// the limit `c_max → ∞`. Returns the sum and a bound on the omitted moduli.
pub fn petersson_kloosterman_side(k: u32, m: u64, n: u64, c_max: u64) -> Result<(f64, f64)> {
    if k % 2 == 1 || k < 2 {
        return Err(Error::InvalidWeight(k as i64));
    }
    let prec = 128;
    let root = Float::with_val(prec, Integer::from(m * n)).sqrt();
    let four_pi_root = Float::with_val(prec, Constant::Pi) * 4u32 * &root;
    let mut acc = Float::new(prec);
    for c in 1..=c_max {
        let s = kloosterman(m, n, c)?;
        let x = Float::with_val(prec, &four_pi_root / c);
        let j = x.jn((k - 1) as i32);
        acc += Float::with_val(prec, s.raw.as_ref().expect("raw") * j) / c;
    }
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let value = sign * 2.0 * PI * acc.to_f64();
    // |J_{k−1}(x)| ≤ (x/2)^{k−1}/(k−1)!, |S| ≤ τ(c)√(c g) ≤ 2c
    let x1 = four_pi_root.to_f64() / (c_max + 1) as f64;
    let first = (x1 / 2.0).powi(k as i32 - 1) / Float::with_val(64, k - 1).gamma().to_f64();
    let tail = 2.0 * PI * 2.0 * first * (c_max + 1) as f64 / (k as f64 - 2.0).max(1.0);
    Ok((value, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(m: u64, n: u64, c: u64) -> f64 {
        let mut acc = 0.0;
        for d in 0..c {
            if gcd(d, c) == 1 {
                let e = mod_inverse(d, c).unwrap_or(0);
                acc += (2.0 * PI * ((m * d + n * e) % c) as f64 / c as f64).cos();
            }
        }
        acc
    }

    #[test]
    fn small_sums() {
        assert_eq!(kloosterman(1, 1, 2).unwrap().value, 1.0);
        assert!((kloosterman(1, 1, 3).unwrap().value + 1.0).abs() < 1e-15);
        for (m, n) in [(1, 1), (5, 7), (30, 2)] {
            assert_eq!(kloosterman(m, n, 1).unwrap().value, 1.0);
        }
        assert!(kloosterman(1, 1, 0).is_err());
    }

    #[test]
    fn weil_at_101() {
        let s = kloosterman(1, 1, 101).unwrap();
        assert!(s.value.abs() / s.weil_bound() < 1.0);
    }

    #[test]
    fn weil_grid_small() {
        let r = weil_bound_check(10, 60, true).unwrap();
        assert_eq!(r.checked, 6000);
        assert!(r.worst.ratio <= 1.0);
        assert!(r.to_csv().lines().count() == 6001);
    }

    #[test]
    fn eta_values() {
        assert!((eta_t(1, 3.7).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((eta_t(12, 0.0).unwrap().re - 6.0).abs() < 1e-15);
        let p = 13.0f64;
        let v = eta_t(13, 0.8).unwrap();
        assert!((v.re - 2.0 * (0.8 * p.ln()).cos()).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn coprime_multiplicativity() {
        // S(m, n, c₁c₂) = S(m c̄₂², n, c₁) S(m c̄₁², n, c₂)
        let mut checked = 0;
        for c1 in 2..40u64 {
            for c2 in (c1 + 1)..40u64 {
                if gcd(c1, c2) != 1 || checked >= 50 {
                    continue;
                }
                let (m, n) = (1 + (c1 * 7 + c2) % 13, 1 + (c1 + 3 * c2) % 11);
                let i2 = mod_inverse(c2 % c1, c1).unwrap();
                let i1 = mod_inverse(c1 % c2, c2).unwrap();
                let a = kloosterman(m * i2 * i2 % c1, n, c1).unwrap().value;
                let b = kloosterman(m * i1 * i1 % c2, n, c2).unwrap().value;
                let whole = kloosterman(m, n, c1 * c2).unwrap().value;
                assert!((whole - a * b).abs() < 1e-9, "{m} {n} {c1} {c2}");
                checked += 1;
            }
        }
        assert_eq!(checked, 50);
    }

    #[test]
    fn petersson_formula_for_delta() {
        // A single form: (2π²/11) λ(m)λ(n)/L(1, sym²Δ) − δ equals the Kloosterman side.
        let l1 = 0.631_792_945_727_883_2;
        let taus = [1.0f64, -24.0, 252.0];
        for (m, n) in [(1u64, 1u64), (1, 2), (2, 2), (1, 3)] {
            let lam = |j: u64| taus[(j - 1) as usize] / (j as f64).powf(5.5);
            let lhs = 2.0 * PI * PI / 11.0 * lam(m) * lam(n) / l1 - if m == n { 1.0 } else { 0.0 };
            let (rhs, tail) = petersson_kloosterman_side(12, m, n, 2000).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 + tail, "({m},{n}): {lhs} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn kloosterman_matches_brute_force_and_is_symmetric(m in 1u64..40, n in 1u64..40, c in 1u64..120) {
            let s = kloosterman(m, n, c).unwrap();
            prop_assert!((s.value - brute(m, n, c)).abs() < 1e-9);
            prop_assert_eq!(s.value, kloosterman(n, m, c).unwrap().value);
            prop_assert!(s.value.abs() <= s.weil_bound() * (1.0 + 1e-12));
            prop_assert_eq!(s.counts.iter().sum::<u64>(), (0..c).filter(|&d| gcd(d, c) == 1).count() as u64);
        }
    }
}
