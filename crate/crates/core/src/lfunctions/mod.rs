//! The Riemann zeta function, archimedean Gamma factors, the Stirling ratio
//! `|Γ(k−1/2+it)|/Γ(k)`, symmetric-square L-values and the extraction of
//! triple-product central values through Watson's formula.

pub mod afe;
pub mod stirling;

use rug::ops::Pow;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{petersson_inner, FundamentalDomainMesh, InnerProductResult};
use crate::hecke::HeckeEigenform;
use crate::precision::{complex_to_decimal, decimal_digits, pi};
use crate::special::{bernoulli, ln_gamma};
pub use afe::AfeConfig;
pub use stirling::{stirling_csv, stirling_suite, StirlingRegime, StirlingRow, STIRLING_CONSTANT};

pub const LVALUE_SCHEMA: &str = "heckelab.lvalue.v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LMethod {
    DirichletSeries,
    FunctionalEquation,
    NormRelation,
    WatsonExtraction,
}

#[derive(Clone, Debug)]
pub struct LValueResult {
    /// Complex in general; real on the real axis and for central values.
    pub value: Complex,
    pub method: LMethod,
    /// Claimed absolute error.
    pub precision_estimate: f64,
}

impl LValueResult {
    pub fn real(&self) -> &Float {
        self.value.real()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.real().to_f64()
    }

    pub fn to_json(&self) -> LValueJson {
        let digits = decimal_digits(self.value.prec().0).min(40);
        let (re, im) = complex_to_decimal(&self.value, digits);
        LValueJson {
            schema: LVALUE_SCHEMA.into(),
            re,
            im,
            method: self.method,
            precision_estimate: format!("{:e}", self.precision_estimate),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LValueJson {
    pub schema: String,
    pub re: String,
    pub im: String,
    pub method: LMethod,
    pub precision_estimate: String,
}

/// A complex zeta value with its certified Euler–Maclaurin remainder bound.
#[derive(Clone, Debug)]
pub struct ZetaValue {
    pub value: Complex,
    pub error_bound: f64,
}

/// `ζ(s)` by Euler–Maclaurin summation.
pub fn zeta(s: &Complex, prec: u32) -> Result<ZetaValue> {
    if *s.imag() == 0 && *s.real() == 1 {
        return Err(Error::Pole("zeta has a pole at s = 1".into()));
    }
    let work = prec + 32;
    let s = Complex::with_val(work, s);
    let sigma = s.real().to_f64();
    let abs_s = Float::with_val(53, s.abs_ref()).to_f64();
    let target = Float::with_val(64, -(prec as i32) - 4).exp2();
    let mut n = (abs_s + 10.0).ceil() as u64;
    loop {
        let nf = Float::with_val(work, n);
        let ln_n = Float::with_val(work, nf.ln_ref());
        // N^{-s}
        let n_pow = (-Complex::with_val(work, &s * &ln_n)).exp();
        let mut sum = Complex::new(work);
        for m in 1..n {
            let lm = Float::with_val(work, m).ln();
            sum += (-Complex::with_val(work, &s * lm)).exp();
        }
        sum += Complex::with_val(work, &n_pow * &nf) / Complex::with_val(work, &s - 1u32);
        sum += Complex::with_val(work, &n_pow / 2u32);
        // Σ_j B_{2j}/(2j)! · s(s+1)…(s+2j−2) N^{−s−2j+1}
        let mut rising = Complex::with_val(work, &s); // s(s+1)…(s+2j−2)
        let mut power = Complex::with_val(work, &n_pow / &nf); // N^{−s−2j+1}
        let inv_n2 = Float::with_val(work, nf.square_ref()).recip();
        let mut fact = Float::with_val(work, 2); // (2j)!
        let mut bound;
        let mut j = 1u32;
        loop {
            let b = Float::with_val(work, &bernoulli(2 * j as usize));
            sum += Complex::with_val(work, &rising * &power) * (b / &fact);
            // remainder after j terms
            let next = Complex::with_val(work, &rising * Complex::with_val(work, &s + (2 * j - 1)))
                * Complex::with_val(work, &s + 2 * j);
            let b_next = Float::with_val(work, &bernoulli(2 * j as usize + 2)).abs();
            let fact_next = Float::with_val(work, &fact * ((2 * j + 1) * (2 * j + 2)));
            let m = 2 * j as i32;
            let exponent = -sigma - m as f64 - 1.0;
            bound = Float::with_val(64, next.abs_ref()) * b_next / &fact_next
                * Float::with_val(64, exponent * ln_n.to_f64()).exp()
                / (sigma + m as f64 + 1.0);
            if bound < target {
                return Ok(ZetaValue { value: Complex::with_val(prec, sum), error_bound: bound.to_f64().max(f64::MIN_POSITIVE) });
            }
            if j > 4 * prec || (j > 8 && Float::with_val(64, next.abs_ref()).to_f64() > (2.0 * std::f64::consts::PI * n as f64).powi(2 * j as i32 + 2)) {
                break;
            }
            rising = next;
            power *= &inv_n2;
            fact = fact_next;
            j += 1;
        }
        n *= 2;
        if n > 1 << 20 {
            return Err(Error::InsufficientPrecision("Euler–Maclaurin did not converge".into()));
        }
    }
}

pub fn zeta_real(s: f64, prec: u32) -> Result<Float> {
    Ok(zeta(&Complex::with_val(prec, (s, 0)), prec)?.value.real().clone())
}

/// `log Γ_ℝ(s) = −(s/2) log π + log Γ(s/2)`.
pub fn ln_gamma_r(s: &Complex, prec: u32) -> Result<Complex> {
    let half = Complex::with_val(prec + 16, s / 2u32);
    let lg = ln_gamma(&half, prec + 16)
        .map_err(|_| Error::Pole(format!("Gamma_R has a pole at {}", s.real())))?;
    Ok(Complex::with_val(prec, lg - half * pi(prec + 16).ln()))
}

/// `log Γ_ℂ(s) = log 2 − s log 2π + log Γ(s)`.
pub fn ln_gamma_c(s: &Complex, prec: u32) -> Result<Complex> {
    let w = prec + 16;
    let lg = ln_gamma(&Complex::with_val(w, s), w)
        .map_err(|_| Error::Pole(format!("Gamma_C has a pole at {}", s.real())))?;
    let two_pi = Float::with_val(w, pi(w) * 2u32);
    Ok(Complex::with_val(prec, lg + Float::with_val(w, 2).ln() - Complex::with_val(w, s * two_pi.ln())))
}

pub fn gamma_r(s: &Complex, prec: u32) -> Result<Complex> {
    Ok(ln_gamma_r(s, prec)?.exp())
}

pub fn gamma_c(s: &Complex, prec: u32) -> Result<Complex> {
    Ok(ln_gamma_c(s, prec)?.exp())
}

/// `log γ(s)` for `γ(s) = Γ_ℝ(s+1) Γ_ℂ(s+k−1)`, the archimedean factor of
/// `L(s, sym²f)` in weight `k`.
pub fn ln_gamma_sym2(s: &Complex, k: u32, prec: u32) -> Result<Complex> {
    let a = Complex::with_val(prec, s + 1u32);
    let b = Complex::with_val(prec, s + (k - 1));
    Ok(ln_gamma_r(&a, prec)? + ln_gamma_c(&b, prec)?)
}

/// Archimedean factors of the completed symmetric-square and triple-product
/// L-functions for weights `(k, ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaFactorSet {
    pub k: u32,
    pub l: u32,
}

impl GammaFactorSet {
    pub fn new(k: u32, l: u32) -> Self {
        Self { k, l }
    }

    /// `log Γ_ℝ(s+1)Γ_ℂ(s+k−1)` for the form of weight `weight`.
    pub fn ln_sym2(&self, weight: u32, s: &Complex, prec: u32) -> Result<Complex> {
        ln_gamma_sym2(s, weight, prec)
    }

    /// `log Γ_ℂ(s+1/2) Γ_ℂ(s+k+ℓ−3/2) Γ_ℂ(s+k−1/2) Γ_ℂ(s+ℓ−1/2)`.
    pub fn ln_triple(&self, s: &Complex, prec: u32) -> Result<Complex> {
        let (k, l) = (self.k as f64, self.l as f64);
        let mut acc = Complex::new(prec);
        for shift in [0.5, k + l - 1.5, k - 0.5, l - 0.5] {
            acc += ln_gamma_c(&Complex::with_val(prec, s + Float::with_val(prec, shift)), prec)?;
        }
        Ok(acc)
    }
}

/// `|Γ(k − 1/2 + it)| / Γ(k)`.
pub fn stirling_ratio(k: u32, t: f64, prec: u32) -> Result<Float> {
    let z = Complex::with_val(prec, (Float::with_val(prec, k) - 0.5f64, t));
    let num = ln_gamma(&z, prec)?;
    let den = Float::with_val(prec, k).ln_gamma();
    Ok(Float::with_val(prec, num.real() - den).exp())
}

/// `L(s, sym²f)` by the smoothed approximate functional equation.
pub fn sym2_l_afe(f: &HeckeEigenform, s: &Complex, cfg: &AfeConfig) -> Result<LValueResult> {
    let (terms, tail) = afe::terms_needed(s, f.weight, cfg)?;
    let lambdas = f.prime_lambdas(terms as u64)?;
    let b = afe::sym2_coefficients(&lambdas, terms, cfg.prec);
    let v = afe::evaluate(s, f.weight, &b, tail, cfg)?;
    let diff = Float::with_val(64, Complex::with_val(cfg.prec, &v.per_width[0] - &v.per_width[1]).abs_ref()).to_f64();
    let mag = Float::with_val(64, v.value.abs_ref()).to_f64().max(1.0);
    let floor = mag * 2f64.powi(16 - cfg.prec as i32);
    Ok(LValueResult {
        value: v.value,
        method: LMethod::FunctionalEquation,
        precision_estimate: diff + tail + floor,
    })
}

/// The Rankin–Selberg relation `⟨f,f⟩ = Γ(k) L(1, sym²f) / (2π² (4π)^{k−1})`
/// for the measure `dx dy / y²`: the factor mapping `L(1, sym²f)` to
/// `⟨f,f⟩` in weight `k`, as a float.
pub fn rankin_selberg_factor(k: u32, prec: u32) -> Float {
    let four_pi = Float::with_val(prec, pi(prec) * 4u32);
    let denom = Float::with_val(prec, pi(prec).square_ref()) * 2u32 * four_pi.pow(k - 1);
    Float::with_val(prec, k).gamma() / denom
}

/// `L(1, sym²f)` recovered from the Petersson norm.
pub fn sym2_l_from_norm(k: u32, norm: &InnerProductResult, prec: u32) -> LValueResult {
    let factor = rankin_selberg_factor(k, prec);
    let value = Float::with_val(prec, norm.value.re) / &factor;
    let rel = norm.total_error() / norm.value.re.abs();
    let err = value.to_f64().abs() * rel;
    LValueResult {
        value: Complex::with_val(prec, (value, 0)),
        method: LMethod::NormRelation,
        precision_estimate: err.max(f64::MIN_POSITIVE),
    }
}

/// Relative tolerance for the agreement of the two `L(1, sym²f)` methods.
pub const SYM2_CROSS_TOLERANCE: f64 = 1e-8;

/// `L(1, sym²f)` by the functional-equation series, cross-validated against
/// the Petersson norm `norm = ⟨f, f⟩`.
pub fn sym2_l_at_1(f: &HeckeEigenform, norm: &InnerProductResult) -> Result<LValueResult> {
    let cfg = AfeConfig::default();
    let series = sym2_l_afe(f, &Complex::with_val(cfg.prec, (1, 0)), &cfg)?;
    let from_norm = sym2_l_from_norm(f.weight, norm, cfg.prec);
    let a = series.to_f64();
    let b = from_norm.to_f64();
    let rel = (a - b).abs() / a.abs();
    if rel > SYM2_CROSS_TOLERANCE {
        return Err(Error::CrossValidation(format!(
            "L(1, sym^2 f) for {}: series {a:.15e} vs norm relation {b:.15e} (relative {rel:.2e})",
            f.id()
        )));
    }
    let best = if series.precision_estimate <= from_norm.precision_estimate { series } else { from_norm };
    Ok(best)
}

/// Fill `petersson_norm` (quadrature) and `sym2_at_1` (cross-validated).
pub fn attach_analytics(f: &mut HeckeEigenform, mesh: &FundamentalDomainMesh) -> Result<()> {
    let norm = match &f.petersson_norm {
        Some(n) => n.clone(),
        None => petersson_inner(&*f, &*f, mesh)?,
    };
    let l1 = sym2_l_at_1(f, &norm)?;
    f.petersson_norm = Some(norm);
    f.sym2_at_1 = Some(l1);
    Ok(())
}

/// Eigenbasis of `S_k` with norms and `L(1, sym²)` attached.
pub fn analyzed_eigenforms(k: u32, mesh: &FundamentalDomainMesh) -> Result<Vec<HeckeEigenform>> {
    let mut hs = crate::hecke::eigenforms(k, crate::qseries::default_truncation(k))?;
    for h in &mut hs {
        attach_analytics(h, mesh)?;
    }
    Ok(hs)
}

/// `⟨f, f⟩` from `L(1, sym²f)` through the Rankin–Selberg relation; the
/// L-value error is carried as truncation error.
pub fn norm_from_sym2(k: u32, l1: &LValueResult) -> InnerProductResult {
    let factor = rankin_selberg_factor(k, 128).to_f64();
    let mut r = InnerProductResult::exact(num_complex::Complex64::new(l1.to_f64() * factor, 0.0));
    r.truncation_error = l1.precision_estimate * factor;
    r
}

/// Window of validity for critical-line evaluations.
pub const CRITICAL_LINE_MAX_WEIGHT: u32 = 40;
pub const CRITICAL_LINE_MAX_T: f64 = 50.0;

/// `L(1/2 + it, sym²f)`.
pub fn sym2_l_critical_line(f: &HeckeEigenform, t: f64) -> Result<LValueResult> {
    if f.weight > CRITICAL_LINE_MAX_WEIGHT || t.abs() > CRITICAL_LINE_MAX_T {
        return Err(Error::UnsupportedRange(format!(
            "critical-line values need k <= {CRITICAL_LINE_MAX_WEIGHT} and |t| <= {CRITICAL_LINE_MAX_T}"
        )));
    }
    let cfg = AfeConfig { tail_target: 1e-12, ..AfeConfig::default() };
    sym2_l_afe(f, &Complex::with_val(cfg.prec, (0.5, t)), &cfg)
}

fn require_l1(f: &HeckeEigenform) -> Result<&LValueResult> {
    f.sym2_at_1
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no L(1, sym^2) attached", f.id())))
}

/// `L(1/2, f×g×h)` from the period `inner = ⟨fg, h⟩` via
/// `|⟨fg,h⟩|² / (⟨f,f⟩⟨g,g⟩⟨h,h⟩) = π³/(2(k+ℓ−1)) · L(1/2, f×g×h) / (L_f L_g L_h)`
/// where `L_x = L(1, sym²x)`.
pub fn triple_product_central(
    f: &HeckeEigenform,
    g: &HeckeEigenform,
    h: &HeckeEigenform,
    inner: &InnerProductResult,
    norms: [&InnerProductResult; 3],
) -> Result<LValueResult> {
    if h.weight != f.weight + g.weight {
        return Err(Error::InvalidInput(format!(
            "weight of h is {} but k + l = {}",
            h.weight,
            f.weight + g.weight
        )));
    }
    let ls = [require_l1(f)?, require_l1(g)?, require_l1(h)?];
    watson_extract(f.weight, g.weight, inner, norms, ls.map(|l| (l.to_f64(), l.precision_estimate)))
}

/// Watson extraction on plain numbers: `ls` holds `(L(1, sym²x), error)`.
pub fn watson_extract(
    k: u32,
    l: u32,
    inner: &InnerProductResult,
    norms: [&InnerProductResult; 3],
    ls: [(f64, f64); 3],
) -> Result<LValueResult> {
    let prec = 128;
    let pi3 = std::f64::consts::PI.powi(3);
    let constant = 2.0 * (k + l - 1) as f64 / pi3;
    let mut denom = 1.0;
    let mut rel = 0.0;
    for n in norms {
        let v = n.value.re;
        if v <= 0.0 {
            return Err(Error::InvalidInput("Petersson norms must be positive".into()));
        }
        denom *= v;
        rel += n.total_error() / v;
    }
    let mut l_product = 1.0;
    for (v, e) in ls {
        l_product *= v;
        rel += e / v.abs();
    }
    let abs_i = inner.value.norm();
    let di = inner.total_error();
    let scale = constant * l_product / denom;
    let value = abs_i * abs_i * scale;
    let err = (2.0 * abs_i * di + di * di) * scale + value * rel;
    Ok(LValueResult {
        value: Complex::with_val(prec, (value, 0)),
        method: LMethod::WatsonExtraction,
        precision_estimate: err.max(f64::MIN_POSITIVE),
    })
}
