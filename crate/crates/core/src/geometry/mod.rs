//! Evaluation of forms on the upper half plane and numerical integration over
//! the fundamental domain `|x| ≤ 1/2, |z| ≥ 1` with `dμ = dx dy / y²`.
//!
//! Integrands are products of weighted forms `y^{k/2} f(z)` (or their
//! conjugates). Each result carries a quadrature, a q-expansion truncation
//! and a cusp-region error.

pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{HeckeEigenform, RawCoefficients};
use crate::precision::{pi, DEFAULT_PRECISION};
use crate::qseries::QSeries;
use quadrature::CellRules;

/// Volume of the modular surface.
pub const VOLUME: f64 = PI / 3.0;

/// Lowest point of the fundamental domain.
pub const Y_MIN: f64 = 0.866_025_403_784_438_6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerProductResult {
    pub value: Complex64,
    pub quadrature_error: f64,
    pub truncation_error: f64,
    pub tail_error: f64,
}

impl InnerProductResult {
    pub fn exact(value: Complex64) -> Self {
        Self { value, quadrature_error: 0.0, truncation_error: 0.0, tail_error: 0.0 }
    }

    pub fn total_error(&self) -> f64 {
        self.quadrature_error + self.truncation_error + self.tail_error
    }

    pub fn relative_error(&self) -> f64 {
        self.total_error() / self.value.norm()
    }

    /// Multiply the value and every error component by `c`.
    fn scaled(&self, c: f64) -> Self {
        Self {
            value: self.value * c,
            quadrature_error: self.quadrature_error * c.abs(),
            truncation_error: self.truncation_error * c.abs(),
            tail_error: self.tail_error * c.abs(),
        }
    }

    /// Divide by `others`, propagating relative errors componentwise.
    fn divided_by(&self, others: &[&InnerProductResult]) -> Self {
        let mut out = self.clone();
        let mut denom = 1.0;
        for o in others {
            denom *= o.value.re;
        }
        out.value = self.value / denom;
        let mag = out.value.norm();
        let rel = |pick: fn(&InnerProductResult) -> f64| {
            pick(self) / self.value.norm().max(f64::MIN_POSITIVE)
                + others.iter().map(|o| pick(o) / o.value.re.abs()).sum::<f64>()
        };
        out.quadrature_error = mag * rel(|r| r.quadrature_error);
        out.truncation_error = mag * rel(|r| r.truncation_error);
        out.tail_error = mag * rel(|r| r.tail_error);
        out
    }
}

/// Cell layout over the truncated fundamental domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomainMesh {
    /// Height cutoff `Y`.
    pub y_max: f64,
    pub x_cells: usize,
    pub y_cells: usize,
    /// Gauss–Legendre order per cell direction.
    pub order: usize,
    /// Raise `Y` to `w / 2π` for integrands of weight `w` when that is larger.
    pub auto_height: bool,
}

impl Default for FundamentalDomainMesh {
    fn default() -> Self {
        Self { y_max: 8.0, x_cells: 64, y_cells: 64, order: 8, auto_height: true }
    }
}

impl FundamentalDomainMesh {
    pub fn new(y_max: f64, x_cells: usize, y_cells: usize, order: usize) -> Result<Self> {
        if !(y_max >= 2.0) {
            return Err(Error::InvalidInput(format!("mesh height {y_max} must be at least 2")));
        }
        if x_cells == 0 || y_cells == 0 || order < 3 {
            return Err(Error::InvalidInput("mesh needs at least one cell and order >= 3".into()));
        }
        Ok(Self { y_max, x_cells, y_cells, order, auto_height: true })
    }

    /// Fixed cutoff `Y`, no automatic raise.
    pub fn with_height(mut self, y_max: f64) -> Self {
        self.y_max = y_max;
        self.auto_height = false;
        self
    }

    pub fn doubled(&self) -> Self {
        Self { x_cells: 2 * self.x_cells, y_cells: 2 * self.y_cells, ..self.clone() }
    }

    /// Cutoff used for an integrand `y^w |…|` of total weight `w`.
    pub fn height_for(&self, w: f64) -> f64 {
        if self.auto_height {
            self.y_max.max(w / (2.0 * PI))
        } else {
            self.y_max
        }
    }

    fn rules(&self, height: f64) -> CellRules {
        CellRules::new(height, self.x_cells, self.y_cells, self.order, self.order - 2)
    }

    /// Bound on `∫_{y > Y} |∏ y^{k_i/2} f_i| dμ` when each factor satisfies
    /// `|f_i(z)| ≤ A_i e^{−2π m_i y}` above the cutoff. Factors are
    /// `(weight, valuation, amplitude)`.
    pub fn tail_bound(&self, height: f64, factors: &[(u32, usize, f64)]) -> f64 {
        let half_w: f64 = factors.iter().map(|f| f.0 as f64).sum::<f64>() / 2.0;
        let m: f64 = factors.iter().map(|f| f.1 as f64).sum();
        let amp: f64 = factors.iter().map(|f| f.2).product();
        let prec = 128;
        let a = Float::with_val(prec, half_w - 1.0);
        let rate = Float::with_val(prec, 2.0 * m) * pi(prec);
        let x = Float::with_val(prec, &rate * height);
        let g = a.clone().gamma_inc(&x);
        let bound = g / rate.pow(&a) * amp;
        bound.to_f64()
    }
}

/// A form to evaluate: an eigenform or any q-series.
#[derive(Clone, Copy, Debug)]
pub enum FormRef<'a> {
    Eigen(&'a HeckeEigenform),
    Series(&'a QSeries),
}

impl<'a> From<&'a HeckeEigenform> for FormRef<'a> {
    fn from(f: &'a HeckeEigenform) -> Self {
        FormRef::Eigen(f)
    }
}

impl<'a> From<&'a QSeries> for FormRef<'a> {
    fn from(f: &'a QSeries) -> Self {
        FormRef::Series(f)
    }
}

impl FormRef<'_> {
    pub fn weight(&self) -> u32 {
        match self {
            FormRef::Eigen(f) => f.weight,
            FormRef::Series(f) => f.weight(),
        }
    }

    pub fn truncation(&self) -> usize {
        match self {
            FormRef::Eigen(f) => f.truncation,
            FormRef::Series(f) => f.truncation(),
        }
    }

    fn precision(&self) -> u32 {
        match self {
            FormRef::Eigen(f) => f.precision,
            FormRef::Series(_) => DEFAULT_PRECISION,
        }
    }

    fn coeff(&self, n: usize, prec: u32) -> Float {
        match self {
            FormRef::Eigen(f) => match &f.raw {
                RawCoefficients::Exact(c) => Float::with_val(prec, &c[n]),
                RawCoefficients::Approx(c) => Float::with_val(prec, &c[n]),
            },
            FormRef::Series(f) => Float::with_val(prec, f.coeff(n)),
        }
    }

    /// Constant `C` with `|a_n| ≤ C d(n) n^{(k−1)/2}` for `n` beyond the
    /// truncation. Deligne gives `C = 1` for eigenforms; for other series
    /// twice the largest ratio seen among the known coefficients is used.
    fn deligne_constant(&self) -> f64 {
        match self {
            FormRef::Eigen(_) => 1.0,
            FormRef::Series(f) => {
                let k = f.weight() as f64;
                let mut c: f64 = 0.0;
                for n in 1..=f.truncation() {
                    let a = f.coeff(n).to_f64().abs();
                    let d = crate::arith::tau(n as u64) as f64;
                    c = c.max(a / (d * (n as f64).powf((k - 1.0) / 2.0)));
                }
                2.0 * c
            }
        }
    }
}

/// `ln` of `Σ_{n>N} C·2√n·n^{(k−1)/2} e^{−2πny}`, bounded by its first term
/// times a geometric factor. Requires the term ratio to be below one.
fn ln_deligne_tail(k: u32, c: f64, n: usize, y: f64) -> f64 {
    let n1 = (n + 1) as f64;
    let half_k = k as f64 / 2.0;
    let ratio = ((n1 + 1.0) / n1).powf(half_k) * (-2.0 * PI * y).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    (2.0 * c).ln() + half_k * n1.ln() - 2.0 * PI * n1 * y - (1.0 - ratio).ln()
}

#[derive(Clone, Debug)]
pub struct FormValue {
    /// `f(z)` (not weighted by `y^{k/2}`).
    pub value: Complex,
    /// Certified bound on the omitted part of the q-expansion.
    pub tail_bound: f64,
}

/// `f(x + iy) = Σ_{n ≤ N} a_n e(nz)` at the form's working precision.
/// Fails when the tail bound exceeds `tolerance`.
pub fn evaluate_form<'a>(f: impl Into<FormRef<'a>>, x: f64, y: f64, tolerance: f64) -> Result<FormValue> {
    let f = f.into();
    if !(y >= 0.5) {
        return Err(Error::InvalidInput(format!("evaluation point y = {y} is below 1/2")));
    }
    let n = f.truncation();
    let tail = ln_deligne_tail(f.weight(), f.deligne_constant(), n, y).exp();
    if !(tail <= tolerance) {
        return Err(Error::InsufficientPrecision(format!(
            "q-expansion tail bound {tail:e} at y = {y} exceeds {tolerance:e} with {n} terms"
        )));
    }
    let prec = f.precision() + 32;
    let two_pi = pi(prec) * 2u32;
    let r = Float::with_val(prec, -(&two_pi * Float::with_val(prec, y))).exp();
    let angle = Float::with_val(prec, &two_pi * Float::with_val(prec, x));
    let (s, c) = angle.sin_cos(Float::new(prec));
    let q = Complex::with_val(prec, (Float::with_val(prec, &c * &r), Float::with_val(prec, &s * &r)));
    let mut acc = Complex::new(prec);
    for m in (1..=n).rev() {
        acc += f.coeff(m, prec);
        acc *= &q;
    }
    acc += f.coeff(0, prec);
    Ok(FormValue { value: Complex::with_val(f.precision(), acc), tail_bound: tail })
}

/// A form reduced to what the quadrature needs.
struct Prepared {
    weight: u32,
    valuation: usize,
    coeffs: Vec<f64>,
    /// Sup over `y ≥ √3/2` of `y^{k/2}` times the omitted q-expansion tail.
    truncation: f64,
    /// `A` with `|f(z)| ≤ A e^{−2π m y}` for `y ≥ Y`.
    amplitude: f64,
}

impl Prepared {
    fn new(f: FormRef<'_>, height: f64) -> Result<Self> {
        let k = f.weight();
        let n_max = f.truncation();
        let c = f.deligne_constant();
        let coeffs: Vec<f64> = (0..=n_max).map(|n| f.coeff(n, 64).to_f64()).collect();
        if coeffs[0] != 0.0 {
            return Err(Error::InvalidInput("integrands must be cuspidal".into()));
        }
        let valuation = (1..=n_max)
            .find(|&n| coeffs[n] != 0.0)
            .ok_or_else(|| Error::InvalidInput("zero form".into()))?;
        let half_k = k as f64 / 2.0;
        // Largest size of the leading term y^{k/2} e^{−2πy} on the domain.
        let y_peak = (half_k / (2.0 * PI)).max(Y_MIN);
        let ln_peak = half_k * y_peak.ln() - 2.0 * PI * y_peak;
        // Keep the tail monotone in y above √3/2 and drop terms far below the
        // working accuracy.
        let n_floor = ((half_k / (2.0 * PI * Y_MIN)).ceil() as usize + 1).min(n_max);
        let ln_tail = |n: usize| half_k * Y_MIN.ln() + ln_deligne_tail(k, c, n, Y_MIN);
        let mut n_eff = n_max;
        for n in n_floor.max(valuation)..n_max {
            if ln_tail(n) < ln_peak - 46.0 {
                n_eff = n;
                break;
            }
        }
        let truncation = ln_tail(n_eff).exp();
        let mut amplitude = 0.0;
        for (n, a) in coeffs.iter().enumerate().take(n_eff + 1).skip(valuation) {
            amplitude += a.abs() * (-2.0 * PI * (n - valuation) as f64 * height).exp();
        }
        amplitude += (ln_deligne_tail(k, c, n_eff, height) + 2.0 * PI * valuation as f64 * height).exp();
        let mut coeffs = coeffs;
        coeffs.truncate(n_eff + 1);
        Ok(Self { weight: k, valuation, coeffs, truncation, amplitude })
    }

    fn eval(&self, x: f64, y: f64) -> Complex64 {
        let q = Complex64::from_polar((-2.0 * PI * y).exp(), 2.0 * PI * x);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.coeffs[1..].iter().rev() {
            acc = (acc + a) * q;
        }
        acc * y.powf(self.weight as f64 / 2.0)
    }
}

/// Values of `y^{k/2} f` on both node sets.
struct NodeValues {
    high: Vec<Complex64>,
    low: Vec<Complex64>,
    sup: f64,
}

fn node_values(p: &Prepared, rules: &CellRules) -> NodeValues {
    let high: Vec<Complex64> = rules.high.par_iter().map(|n| p.eval(n.x, n.y)).collect();
    let low: Vec<Complex64> = rules.low.par_iter().map(|n| p.eval(n.x, n.y)).collect();
    let sup = high.iter().chain(&low).map(|v| v.norm()).fold(0.0, f64::max);
    NodeValues { high, low, sup }
}

/// `∫ ∏_i φ_i dμ` over the fundamental domain where `φ_i = y^{k_i/2} f_i`,
/// conjugated when the flag is set.
pub fn integrate_product(factors: &[(FormRef<'_>, bool)], mesh: &FundamentalDomainMesh) -> Result<InnerProductResult> {
    if factors.is_empty() {
        return Err(Error::InvalidInput("empty integrand".into()));
    }
    let w: f64 = factors.iter().map(|(f, _)| f.weight() as f64).sum::<f64>() / 2.0;
    let height = mesh.height_for(w);
    let rules = mesh.rules(height);
    let mut distinct: Vec<(FormRef<'_>, NodeValues, Prepared)> = Vec::new();
    let mut slots = Vec::with_capacity(factors.len());
    for (f, conj) in factors {
        let pos = distinct.iter().position(|(g, _, _)| same_form(g, f));
        let idx = match pos {
            Some(i) => i,
            None => {
                let p = Prepared::new(*f, height)?;
                let v = node_values(&p, &rules);
                distinct.push((*f, v, p));
                distinct.len() - 1
            }
        };
        slots.push((idx, *conj));
    }
    let product = |pick: fn(&NodeValues) -> &Vec<Complex64>, len: usize| -> Vec<Complex64> {
        (0..len)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::new(1.0, 0.0);
                for &(idx, conj) in &slots {
                    let v = pick(&distinct[idx].1)[i];
                    acc *= if conj { v.conj() } else { v };
                }
                acc
            })
            .collect()
    };
    let high = product(|v| &v.high, rules.high.len());
    let low = product(|v| &v.low, rules.low.len());
    let (value, discrepancy) = rules.integrate(&high, &low);
    let abs_mass: f64 = rules.high.iter().zip(&high).map(|(n, v)| n.w * v.norm()).sum();
    let rounding = 64.0 * f64::EPSILON * abs_mass;

    let area = VOLUME - 1.0 / height;
    // |∏(φ_i + δ_i) − ∏φ_i| ≤ Σ_i ε_i ∏_{j≠i} (S_j + ε_j) with S = sup|φ|, ε = sup|δ|
    let bounds: Vec<(f64, f64)> = slots
        .iter()
        .map(|&(idx, _)| (distinct[idx].1.sup * 1.01, distinct[idx].2.truncation))
        .collect();
    let mut spread = 0.0;
    for (i, (_, eps)) in bounds.iter().enumerate() {
        let mut term = *eps;
        for (j, (sup, e)) in bounds.iter().enumerate() {
            if j != i {
                term *= sup + e;
            }
        }
        spread += term;
    }
    let tail_factors: Vec<(u32, usize, f64)> = slots
        .iter()
        .map(|&(idx, _)| {
            let p = &distinct[idx].2;
            (p.weight, p.valuation, p.amplitude)
        })
        .collect();
    Ok(InnerProductResult {
        value,
        quadrature_error: discrepancy + rounding,
        truncation_error: area * spread,
        tail_error: mesh.tail_bound(height, &tail_factors),
    })
}

fn same_form(a: &FormRef<'_>, b: &FormRef<'_>) -> bool {
    match (a, b) {
        (FormRef::Eigen(x), FormRef::Eigen(y)) => std::ptr::eq(*x, *y),
        (FormRef::Series(x), FormRef::Series(y)) => std::ptr::eq(*x, *y),
        _ => false,
    }
}

/// `⟨f, g⟩ = ∫ y^k f ḡ dμ`.
pub fn petersson_inner<'a, 'b>(
    f: impl Into<FormRef<'a>>,
    g: impl Into<FormRef<'b>>,
    mesh: &FundamentalDomainMesh,
) -> Result<InnerProductResult> {
    let (f, g) = (f.into(), g.into());
    if f.weight() != g.weight() {
        return Err(Error::InvalidInput(format!(
            "inner product of weights {} and {}",
            f.weight(),
            g.weight()
        )));
    }
    let mut r = integrate_product(&[(f, false), (g, true)], mesh)?;
    if same_form(&f, &g) {
        r.value.im = 0.0;
    }
    Ok(r)
}

/// `⟨f, f⟩`, taken from the attached value when present.
pub fn norm_of(f: &HeckeEigenform, mesh: &FundamentalDomainMesh) -> Result<InnerProductResult> {
    match &f.petersson_norm {
        Some(n) => Ok(n.clone()),
        None => petersson_inner(f, f, mesh),
    }
}

/// `(1/vol) ∫ y^{k+ℓ} |f|² |g|² dμ` with `f, g` rescaled to `⟨f,f⟩ = ⟨g,g⟩ = vol`.
pub fn joint_mass_integral(f: &HeckeEigenform, g: &HeckeEigenform, mesh: &FundamentalDomainMesh) -> Result<InnerProductResult> {
    let raw = integrate_product(&[(f.into(), false), (f.into(), true), (g.into(), false), (g.into(), true)], mesh)?;
    let nf = norm_of(f, mesh)?;
    let ng = norm_of(g, mesh)?;
    let mut r = raw.divided_by(&[&nf, &ng]).scaled(VOLUME);
    r.value.im = 0.0;
    Ok(r)
}

/// `∫ y^{2k} f² ḡ² dμ` with `f, g` rescaled to `⟨f,f⟩ = ⟨g,g⟩ = vol`.
pub fn decorrelation_integral(f: &HeckeEigenform, g: &HeckeEigenform, mesh: &FundamentalDomainMesh) -> Result<InnerProductResult> {
    if f.weight != g.weight {
        return Err(Error::InvalidInput(format!(
            "decorrelation needs equal weights, got {} and {}",
            f.weight, g.weight
        )));
    }
    let raw = integrate_product(&[(f.into(), false), (f.into(), false), (g.into(), true), (g.into(), true)], mesh)?;
    let nf = norm_of(f, mesh)?;
    let ng = norm_of(g, mesh)?;
    Ok(raw.divided_by(&[&nf, &ng]).scaled(VOLUME * VOLUME))
}
