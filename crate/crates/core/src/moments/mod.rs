//! Experiment drivers: product decompositions over a Hecke eigenbasis, the
//! joint-mass and decorrelation quantities by quadrature and by Parseval,
//! the first moment of triple-product central values, prime sums of Hecke
//! eigenvalues, the local exterior-square identity and the combinatorial
//! moment bound.

pub mod combinatorics;
pub mod primes;

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    decorrelation_integral, integrate_product, joint_mass_integral, norm_of, FundamentalDomainMesh,
    InnerProductResult, VOLUME,
};
use crate::hecke::{eigenforms, HeckeEigenform, SatakeParameter};
use crate::lfunctions::{attach_analytics, norm_from_sym2, watson_extract, LValueResult};
use crate::qseries::default_truncation;
use crate::special::zeta_even_closed_form;

pub use combinatorics::{combinatorial_bound_check, CombinatorialReport};
pub use primes::{prime_sum_experiment, PrimeSumKind, PrimeSumTable};

pub const MOMENT_SCHEMA: &str = "heckelab.moment.v1";

/// Largest residual accepted from a product decomposition.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-20;

/// Analyzed eigenbases by weight, computed on demand.
pub struct Workspace {
    pub mesh: FundamentalDomainMesh,
    forms: HashMap<u32, Vec<HeckeEigenform>>,
}

impl Workspace {
    pub fn new(mesh: FundamentalDomainMesh) -> Self {
        Self { mesh, forms: HashMap::new() }
    }

    /// The eigenbasis of `S_k` with Petersson norms and `L(1, sym²)` attached.
    pub fn forms(&mut self, k: u32) -> Result<&[HeckeEigenform]> {
        if !self.forms.contains_key(&k) {
            let mut hs = eigenforms(k, default_truncation(k))?;
            for h in &mut hs {
                attach_analytics(h, &self.mesh)?;
            }
            self.forms.insert(k, hs);
        }
        Ok(&self.forms[&k])
    }

    pub fn form(&mut self, k: u32, index: usize) -> Result<HeckeEigenform> {
        let hs = self.forms(k)?;
        hs.get(index)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("S_{k} has no eigenform with index {index}")))
    }
}

/// Coefficients `c_h` with `F = Σ_h c_h h` over an eigenbasis.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub weight: u32,
    pub coefficients: Vec<Float>,
    /// Largest relative residual over all coefficients checked.
    pub residual: f64,
    /// Number of q-expansion coefficients compared.
    pub checked: usize,
}

fn coefficient(f: &HeckeEigenform, n: usize, prec: u32) -> Float {
    Float::with_val(prec, f.a(n))
}

/// `(fg)_n` for `1 ≤ n ≤ len`.
fn product_coefficients(f: &HeckeEigenform, g: &HeckeEigenform, len: usize, prec: u32) -> Vec<Float> {
    let a: Vec<Float> = (0..=len).map(|n| coefficient(f, n, prec)).collect();
    let b: Vec<Float> = (0..=len).map(|n| coefficient(g, n, prec)).collect();
    (0..=len)
        .map(|n| {
            let mut acc = Float::new(prec);
            for i in 1..n {
                acc += Float::with_val(prec, &a[i] * &b[n - i]);
            }
            acc
        })
        .collect()
}

/// Expand `fg` over `basis`, an eigenbasis of `S_{k+ℓ}`, by solving on the
/// first `dim` coefficients and checking the remaining known ones.
pub fn decompose_product(f: &HeckeEigenform, g: &HeckeEigenform, basis: &[HeckeEigenform]) -> Result<Decomposition> {
    let weight = f.weight + g.weight;
    if basis.iter().any(|h| h.weight != weight) {
        return Err(Error::InvalidInput(format!("basis is not of weight {weight}")));
    }
    let d = basis.len();
    if d == 0 {
        return Err(Error::DegenerateBasis(format!("S_{weight} is zero")));
    }
    let prec = f.precision.max(g.precision).max(basis[0].precision) + 64;
    let len = f.truncation.min(g.truncation).min(basis.iter().map(|h| h.truncation).min().unwrap_or(0));
    if len < d {
        return Err(Error::InsufficientPrecision(format!("need {d} coefficients, have {len}")));
    }
    let target = product_coefficients(f, g, len, prec);
    let mut a: Vec<Vec<Float>> = (1..=d).map(|n| basis.iter().map(|h| coefficient(h, n, prec)).collect()).collect();
    let mut rhs: Vec<Float> = (1..=d).map(|n| target[n].clone()).collect();
    let coefficients = solve(&mut a, &mut rhs, prec)?;
    let mut residual: f64 = 0.0;
    for n in 1..=len {
        let mut acc = Float::new(prec);
        let mut size = Float::with_val(prec, target[n].abs_ref());
        for (c, h) in coefficients.iter().zip(basis) {
            let term = Float::with_val(prec, c * coefficient(h, n, prec));
            size += Float::with_val(prec, term.abs_ref());
            acc += term;
        }
        if size.is_zero() {
            continue;
        }
        let r = Float::with_val(prec, acc - &target[n]).abs() / size;
        residual = residual.max(r.to_f64());
    }
    if residual > DECOMPOSITION_TOLERANCE {
        return Err(Error::CrossValidation(format!(
            "decomposition of {}·{} leaves relative residual {residual:e}",
            f.id(),
            g.id()
        )));
    }
    let coefficients = coefficients.into_iter().map(|c| Float::with_val(prec - 64, c)).collect();
    Ok(Decomposition { weight, coefficients, residual, checked: len })
}

/// Gaussian elimination with partial pivoting.
fn solve(a: &mut [Vec<Float>], b: &mut [Float], prec: u32) -> Result<Vec<Float>> {
    let d = b.len();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i][col].clone().abs().partial_cmp(&a[j][col].clone().abs()).unwrap())
            .unwrap();
        if a[pivot][col].is_zero() {
            return Err(Error::DegenerateBasis("singular coefficient matrix".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..d {
            let factor = Float::with_val(prec, &a[row][col] / &a[col][col]);
            for j in col..d {
                let sub = Float::with_val(prec, &factor * &a[col][j]);
                a[row][j] -= sub;
            }
            let sub = Float::with_val(prec, &factor * &b[col]);
            b[row] -= sub;
        }
    }
    let mut x = vec![Float::new(prec); d];
    for row in (0..d).rev() {
        let mut acc = b[row].clone();
        for j in (row + 1)..d {
            acc -= Float::with_val(prec, &a[row][j] * &x[j]);
        }
        x[row] = acc / &a[row][row];
    }
    Ok(x)
}

/// `⟨h, h⟩` through the Rankin–Selberg relation from the attached `L(1, sym²h)`.
fn series_norm(h: &HeckeEigenform) -> Result<InnerProductResult> {
    let l1 = h
        .sym2_at_1
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no L(1, sym^2) attached", h.id())))?;
    Ok(norm_from_sym2(h.weight, l1))
}

fn l1(f: &HeckeEigenform) -> Result<&LValueResult> {
    f.sym2_at_1
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no L(1, sym^2) attached", f.id())))
}

/// `Σ_h c_h conj(d_h) ⟨h,h⟩` with its absolute error.
fn parseval_sum(c: &[Float], d: &[Float], basis: &[HeckeEigenform]) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut err = 0.0;
    for ((ch, dh), h) in c.iter().zip(d).zip(basis) {
        let n = series_norm(h)?;
        let w = Float::with_val(128, ch * dh).to_f64();
        value += w * n.value.re;
        err += w.abs() * n.total_error();
    }
    Ok((value, err + 1e-30 * value.abs()))
}

/// `⟨fg, fg⟩` computed both ways.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalCheck {
    pub quadrature: InnerProductResult,
    pub parseval: f64,
    pub parseval_error: f64,
}

impl ParsevalCheck {
    pub fn gap(&self) -> f64 {
        (self.quadrature.value.re - self.parseval).abs()
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap() / self.parseval.abs()
    }

    pub fn allowed(&self) -> f64 {
        self.quadrature.total_error() + self.parseval_error
    }
}

pub fn parseval_check(
    f: &HeckeEigenform,
    g: &HeckeEigenform,
    basis: &[HeckeEigenform],
    mesh: &FundamentalDomainMesh,
) -> Result<ParsevalCheck> {
    let dec = decompose_product(f, g, basis)?;
    let (parseval, parseval_error) = parseval_sum(&dec.coefficients, &dec.coefficients, basis)?;
    let mut quadrature = integrate_product(&[(f.into(), false), (g.into(), false), (f.into(), true), (g.into(), true)], mesh)?;
    quadrature.value.im = 0.0;
    Ok(ParsevalCheck { quadrature, parseval, parseval_error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub h: String,
    pub c_h: f64,
    pub norm_h: f64,
    pub l_sym2_h: f64,
    /// `L(1/2, f×g×h)` by Watson extraction.
    pub central_value: f64,
    pub central_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub schema: String,
    pub f: String,
    pub g: String,
    pub rows: Vec<MomentRow>,
    /// `(2π²/(k+ℓ−1)) Σ_h L(1/2, f×g×h) / L(1, sym²h)` from the extracted values.
    pub lhs_parseval: f64,
    pub lhs_parseval_error: f64,
    /// The same quantity from the joint-mass quadrature.
    pub lhs_quadrature: f64,
    pub lhs_quadrature_error: f64,
    /// `2 L(1, sym²f) L(1, sym²g) / ζ(2)`.
    pub main_term: f64,
    pub ratio: f64,
    pub nonvanishing: usize,
}

impl MomentReport {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs_parseval - self.lhs_quadrature).abs() / self.lhs_parseval.abs()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,g,h,c_h,norm_h,l_sym2_h,central_value,central_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}",
                self.f, self.g, r.h, r.c_h, r.norm_h, r.l_sym2_h, r.central_value, r.central_error
            );
        }
        out
    }
}

/// Both sides of the first-moment identity for the pair `(f, g)`.
pub fn first_moment_triple(
    f: &HeckeEigenform,
    g: &HeckeEigenform,
    basis: &[HeckeEigenform],
    mesh: &FundamentalDomainMesh,
) -> Result<MomentReport> {
    if f.weight == g.weight && f.index == g.index {
        return Err(Error::InvalidInput("first moment needs f != g at equal weight".into()));
    }
    let (k, l) = (f.weight, g.weight);
    let (lf, lg) = (l1(f)?, l1(g)?);
    let nf = norm_of(f, mesh)?;
    let ng = norm_of(g, mesh)?;
    let dec = decompose_product(f, g, basis)?;
    let scale = 2.0 * std::f64::consts::PI.powi(2) / (k + l - 1) as f64;
    let mut rows = Vec::with_capacity(basis.len());
    let mut lhs = 0.0;
    let mut lhs_err = 0.0;
    let mut nonvanishing = 0;
    for (c, h) in dec.coefficients.iter().zip(basis) {
        let nh = series_norm(h)?;
        let lh = l1(h)?;
        let c64 = c.to_f64();
        let mut inner = nh.scaled_inner(c64);
        inner.value.im = 0.0;
        let central = watson_extract(
            k,
            l,
            &inner,
            [&nf, &ng, &nh],
            [(lf.to_f64(), lf.precision_estimate), (lg.to_f64(), lg.precision_estimate), (lh.to_f64(), lh.precision_estimate)],
        )?;
        let v = central.to_f64();
        if v > central.precision_estimate {
            nonvanishing += 1;
        }
        lhs += scale * v / lh.to_f64();
        lhs_err += scale * (central.precision_estimate / lh.to_f64() + v * lh.precision_estimate / lh.to_f64().powi(2));
        rows.push(MomentRow {
            h: h.id(),
            c_h: c64,
            norm_h: nh.value.re,
            l_sym2_h: lh.to_f64(),
            central_value: v,
            central_error: central.precision_estimate,
        });
    }
    let j = joint_mass_integral(f, g, mesh)?;
    let factor = 4.0 / std::f64::consts::PI * lf.to_f64() * lg.to_f64() / VOLUME;
    let lhs_quadrature = j.value.re * factor;
    let rel_l = lf.precision_estimate / lf.to_f64() + lg.precision_estimate / lg.to_f64();
    let lhs_quadrature_error = j.total_error() * factor + lhs_quadrature.abs() * rel_l;
    let zeta2 = zeta_even_closed_form(1, 128).to_f64();
    let main_term = 2.0 * lf.to_f64() * lg.to_f64() / zeta2;
    Ok(MomentReport {
        schema: MOMENT_SCHEMA.into(),
        f: f.id(),
        g: g.id(),
        rows,
        lhs_parseval: lhs,
        lhs_parseval_error: lhs_err,
        lhs_quadrature,
        lhs_quadrature_error,
        main_term,
        ratio: lhs / main_term,
        nonvanishing,
    })
}

trait ScaledInner {
    fn scaled_inner(&self, c: f64) -> InnerProductResult;
}

impl ScaledInner for InnerProductResult {
    /// `⟨fg, h⟩ = c_h ⟨h, h⟩`.
    fn scaled_inner(&self, c: f64) -> InnerProductResult {
        InnerProductResult {
            value: self.value * c,
            quadrature_error: self.quadrature_error * c.abs(),
            truncation_error: self.truncation_error * c.abs(),
            tail_error: self.tail_error * c.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointMassReport {
    pub f: String,
    pub g: String,
    /// `(1/vol) ∫ y^{k+ℓ}|f|²|g|² dμ` for L²-normalized `f, g`.
    pub quadrature: InnerProductResult,
    pub parseval: f64,
    pub parseval_error: f64,
}

impl JointMassReport {
    pub fn ratio(&self) -> f64 {
        self.quadrature.value.re
    }

    pub fn relative_gap(&self) -> f64 {
        (self.quadrature.value.re - self.parseval).abs() / self.parseval.abs()
    }
}

pub fn joint_mass_report(
    f: &HeckeEigenform,
    g: &HeckeEigenform,
    basis: &[HeckeEigenform],
    mesh: &FundamentalDomainMesh,
) -> Result<JointMassReport> {
    let quadrature = joint_mass_integral(f, g, mesh)?;
    let dec = decompose_product(f, g, basis)?;
    let (sum, err) = parseval_sum(&dec.coefficients, &dec.coefficients, basis)?;
    let nf = norm_of(f, mesh)?;
    let ng = norm_of(g, mesh)?;
    let scale = VOLUME / (nf.value.re * ng.value.re);
    let parseval = sum * scale;
    let parseval_error = err * scale + parseval.abs() * (nf.relative_error() + ng.relative_error());
    Ok(JointMassReport { f: f.id(), g: g.id(), quadrature, parseval, parseval_error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationReport {
    pub f: String,
    pub g: String,
    /// `∫ y^{2k} f² ḡ² dμ` for L²-normalized `f, g`.
    pub quadrature: InnerProductResult,
    /// `Σ_{h} ⟨f², h⟩⟨h, g²⟩ / ⟨h, h⟩`, same normalization.
    pub parseval: Complex64,
    pub parseval_error: f64,
    /// `∫ y^{2k} |f|⁴ dμ`, the diagonal comparison value.
    pub diagonal_quadrature: InnerProductResult,
    pub diagonal_parseval: f64,
}

impl DecorrelationReport {
    pub fn relative_gap(&self) -> f64 {
        (self.quadrature.value - self.parseval).norm() / self.parseval.norm().max(f64::MIN_POSITIVE)
    }
}

pub fn decorrelation_report(
    f: &HeckeEigenform,
    g: &HeckeEigenform,
    basis: &[HeckeEigenform],
    mesh: &FundamentalDomainMesh,
) -> Result<DecorrelationReport> {
    if f.weight != g.weight {
        return Err(Error::InvalidInput("decorrelation needs equal weights".into()));
    }
    if f.index == g.index {
        return Err(Error::InvalidInput("decorrelation needs f != g".into()));
    }
    let quadrature = decorrelation_integral(f, g, mesh)?;
    let diagonal_quadrature = decorrelation_integral(f, f, mesh)?;
    let cf = decompose_product(f, f, basis)?;
    let cg = decompose_product(g, g, basis)?;
    let nf = norm_of(f, mesh)?;
    let ng = norm_of(g, mesh)?;
    let (cross, cross_err) = parseval_sum(&cf.coefficients, &cg.coefficients, basis)?;
    let (diag, _) = parseval_sum(&cf.coefficients, &cf.coefficients, basis)?;
    let v2 = VOLUME * VOLUME;
    let scale = v2 / (nf.value.re * ng.value.re);
    let parseval = Complex64::new(cross * scale, 0.0);
    let parseval_error = cross_err * scale + (cross * scale).abs() * (nf.relative_error() + ng.relative_error());
    Ok(DecorrelationReport {
        f: f.id(),
        g: g.id(),
        quadrature,
        parseval,
        parseval_error,
        diagonal_quadrature,
        diagonal_parseval: diag * v2 / (nf.value.re * nf.value.re),
    })
}

/// Local factors `∏_{i<j}(1 − β_iβ_j X)^{−1}` over `β ∈ {α_f^{±1} α_g^{±1}}`
/// and `L_p(sym²f) L_p(sym²g)` at `X = p^{−s}`.
pub fn cfkrs_local_factors(alpha_f: &SatakeParameter, alpha_g: &SatakeParameter, s: &Complex) -> Result<(Complex, Complex)> {
    if alpha_f.p != alpha_g.p {
        return Err(Error::InvalidInput("Satake parameters at different primes".into()));
    }
    let prec = s.prec().0.max(alpha_f.theta.prec()).max(64) + 32;
    let x = (-Complex::with_val(prec, s * Float::with_val(prec, alpha_f.p).ln())).exp();
    let a = Complex::with_val(prec, &alpha_f.alpha);
    let b = Complex::with_val(prec, &alpha_g.alpha);
    let ai = Complex::with_val(prec, a.conj_ref());
    let bi = Complex::with_val(prec, b.conj_ref());
    let betas = [
        Complex::with_val(prec, &a * &b),
        Complex::with_val(prec, &a * &bi),
        Complex::with_val(prec, &ai * &b),
        Complex::with_val(prec, &ai * &bi),
    ];
    let one = Complex::with_val(prec, (1, 0));
    let factor = |gamma: Complex| -> Result<Complex> {
        let d = Complex::with_val(prec, &one - gamma * &x);
        if Float::with_val(64, d.abs_ref()) < 1e-30 {
            return Err(Error::Pole("local Euler factor vanishes".into()));
        }
        Ok(Complex::with_val(prec, d.recip_ref()))
    };
    let mut wedge = one.clone();
    for i in 0..4 {
        for j in (i + 1)..4 {
            wedge *= factor(Complex::with_val(prec, &betas[i] * &betas[j]))?;
        }
    }
    let sym2 = |al: &Complex, inv: &Complex| -> Result<Complex> {
        Ok(factor(Complex::with_val(prec, al.square_ref()))? * factor(one.clone())? * factor(Complex::with_val(prec, inv.square_ref()))?)
    };
    let rhs = sym2(&a, &ai)? * sym2(&b, &bi)?;
    Ok((wedge, rhs))
}

/// `|L_p(s, f×g, ∧²) − L_p(s, sym²f) L_p(s, sym²g)|`.
pub fn cfkrs_local_check(f: &HeckeEigenform, g: &HeckeEigenform, p: u64, s: &Complex) -> Result<f64> {
    let (lhs, rhs) = cfkrs_local_factors(&f.satake(p)?, &g.satake(p)?, s)?;
    let d = Complex::with_val(lhs.prec().0, &lhs - &rhs);
    Ok(Float::with_val(64, d.abs_ref()).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rug::ops::Pow;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delta_squared_expansion() {
        let d = &eigenforms(12, 60).unwrap()[0];
        let basis = eigenforms(24, 60).unwrap();
        let dec = decompose_product(d, d, &basis).unwrap();
        assert_eq!(dec.weight, 24);
        assert_eq!(dec.coefficients.len(), 2);
        assert!(dec.residual < 1e-25, "{}", dec.residual);
        // Δ² = q² − 48q³ + 1080q⁴ − …: rebuild the first ten coefficients exactly.
        let want: [i64; 10] = [0, 1, -48, 1080, -15040, 143820, -985824, 4857920, -16295040, 28412910];
        for (n, w) in want.iter().enumerate() {
            let mut acc = Float::new(256);
            for (c, h) in dec.coefficients.iter().zip(&basis) {
                acc += Float::with_val(256, c * h.a(n + 1));
            }
            assert!((acc.to_f64() - *w as f64).abs() < 1e-20 * (*w as f64).abs().max(1.0), "n={}", n + 1);
        }
        // every h has a_1 = 1 while a_1(Δ²) = 0
        let s: f64 = dec.coefficients.iter().map(Float::to_f64).sum();
        assert!(s.abs() < 1e-20);
    }

    #[test]
    fn cfkrs_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = [2u64, 3, 5, 7, 11, 13][rng.gen_range(0..6)];
            let tf = Float::with_val(192, rng.gen_range(0.0..std::f64::consts::PI));
            let tg = Float::with_val(192, rng.gen_range(0.0..std::f64::consts::PI));
            let s = Complex::with_val(192, (rng.gen_range(0.6..4.0), rng.gen_range(-20.0..20.0)));
            let (a, b) = cfkrs_local_factors(&SatakeParameter::from_angle(p, tf), &SatakeParameter::from_angle(p, tg), &s).unwrap();
            let d = Complex::with_val(192, &a - &b);
            worst = worst.max(Float::with_val(64, d.abs_ref()).to_f64());
        }
        assert!(worst <= 1e-20, "{worst}");
    }

    #[test]
    fn cfkrs_degenerate_direction() {
        let zero = Float::with_val(192, 0);
        let s = Complex::with_val(192, (2, 0));
        let (a, b) = cfkrs_local_factors(&SatakeParameter::from_angle(5, zero.clone()), &SatakeParameter::from_angle(5, zero), &s).unwrap();
        let x = Float::with_val(192, 5).pow(-2i32);
        let want = (Float::with_val(192, 1) - x).pow(-6i32);
        assert!(Float::with_val(192, a.real() - &want).abs() < 1e-50);
        assert!(Float::with_val(192, b.real() - &want).abs() < 1e-50);
        // s = 0 puts X = 1 on the trivial zero of (1 − X)
        let s0 = Complex::with_val(192, (0, 0));
        let t = Float::with_val(192, 1.0);
        assert!(matches!(
            cfkrs_local_factors(&SatakeParameter::from_angle(5, t.clone()), &SatakeParameter::from_angle(5, t), &s0),
            Err(Error::Pole(_))
        ));
    }
}
