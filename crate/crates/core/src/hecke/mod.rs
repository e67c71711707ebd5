//! Hecke operators on `S_k`, the Hecke eigenbasis, Satake parameters and the
//! Hecke-eigenvalue combinatorics.

pub mod poly;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, primes_up_to};
use crate::error::{Error, Result};
use crate::geometry::InnerProductResult;
use crate::lfunctions::LValueResult;
use crate::precision::{decimal_digits, to_decimal, DEFAULT_PRECISION, MIN_PRECISION};
#[cfg(test)]
use crate::precision::pi;
use crate::qseries::{self, large, rational_string, QSeries};
use poly::{adjugate_at, adjugate_at_float, faddeev_leverrier, mat_add_scaled, Matrix, Poly};

pub const EIGENFORM_SCHEMA: &str = "heckelab.eigenform.v1";

/// Matrix of `T_n` on `basis` (an echelon basis with `a_j(f_i) = δ_ij`):
/// entry `[j][i]` is the `q^{j+1}` coefficient of `T_n f_i`.
pub fn hecke_matrix(k: u32, n: usize, basis: &[QSeries]) -> Result<Matrix> {
    let d = basis.len();
    if n == 0 {
        return Err(Error::InvalidInput("T_0 is not a Hecke operator".into()));
    }
    if let Some(f) = basis.iter().find(|f| f.truncation() < n * d) {
        return Err(Error::InsufficientPrecision(format!(
            "T_{n} on a {d}-dimensional space needs truncation {} but the basis has {}",
            n * d,
            f.truncation()
        )));
    }
    let mut m = vec![vec![Rational::new(); d]; d];
    for (i, f) in basis.iter().enumerate() {
        for j in 1..=d {
            m[j - 1][i] = hecke_coefficient(k, n, j, f.coeffs());
        }
    }
    Ok(m)
}

/// `a_m(T_n f) = Σ_{e | (m,n)} e^{k−1} a_{mn/e²}(f)`.
pub fn hecke_coefficient(k: u32, n: usize, m: usize, coeffs: &[Rational]) -> Rational {
    let g = gcd(m as u64, n as u64);
    let mut acc = Rational::new();
    for e in divisors(g) {
        let idx = m * n / (e * e) as usize;
        let w = Integer::from(e).pow(k - 1);
        acc += Rational::from(&coeffs[idx] * w);
    }
    acc
}

#[derive(Clone, Debug)]
pub enum RawCoefficients {
    Exact(Vec<Rational>),
    Approx(Vec<Float>),
}

/// A normalized (`a_1 = 1`) Hecke eigenform of level one.
#[derive(Clone, Debug)]
pub struct HeckeEigenform {
    pub weight: u32,
    pub truncation: usize,
    /// Position in the eigenbasis, ordered by `λ(2)` then `λ(3)`.
    pub index: usize,
    pub field_degree: usize,
    pub precision: u32,
    /// `a_0..a_N`.
    pub raw: RawCoefficients,
    /// `λ(n) = a_n / n^{(k−1)/2}` for `0 ≤ n ≤ N` (`λ(0) = 0`).
    pub lambdas: Vec<Float>,
    /// Coordinates in the Victor–Miller basis; these are `a_1..a_d`.
    pub coords: Vec<Float>,
    pub exact_coords: Option<Vec<Rational>>,
    /// Coordinates on the monomials `E4^a E6^b Δ^c`.
    pub monomial_coords: Vec<Float>,
    pub exact_monomial_coords: Option<Vec<Rational>>,
    pub monomials: Vec<(u32, u32, u32)>,
    pub petersson_norm: Option<InnerProductResult>,
    pub sym2_at_1: Option<LValueResult>,
}

impl HeckeEigenform {
    pub fn id(&self) -> String {
        format!("S{}[{}]", self.weight, self.index)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.raw, RawCoefficients::Exact(_))
    }

    pub fn a(&self, n: usize) -> Float {
        match &self.raw {
            RawCoefficients::Exact(c) => Float::with_val(self.precision, &c[n]),
            RawCoefficients::Approx(c) => c[n].clone(),
        }
    }

    pub fn a_exact(&self, n: usize) -> Option<&Rational> {
        match &self.raw {
            RawCoefficients::Exact(c) => Some(&c[n]),
            RawCoefficients::Approx(_) => None,
        }
    }

    pub fn lambda(&self, n: usize) -> &Float {
        &self.lambdas[n]
    }

    pub fn lambda_f64(&self, n: usize) -> f64 {
        self.lambdas[n].to_f64()
    }

    pub fn lambdas_f64(&self) -> Vec<f64> {
        self.lambdas.iter().map(Float::to_f64).collect()
    }

    /// Copy with the raw coefficients multiplied by `c`; eigenvalue data is
    /// untouched (it is normalized by definition).
    pub fn scaled(&self, c: &Rational) -> QSeries {
        let coeffs = match &self.raw {
            RawCoefficients::Exact(v) => v.iter().map(|a| Rational::from(a * c)).collect(),
            RawCoefficients::Approx(_) => panic!("only exact eigenforms convert to QSeries"),
        };
        QSeries::new(self.weight, coeffs)
    }

    pub fn satake(&self, p: u64) -> Result<SatakeParameter> {
        if p as usize > self.truncation {
            return Err(Error::InvalidInput(format!("p = {p} exceeds truncation {}", self.truncation)));
        }
        satake_from_lambda(p, self.lambda(p as usize))
    }

    pub fn to_json(&self) -> EigenformJson {
        let digits = decimal_digits(self.precision);
        EigenformJson {
            schema: EIGENFORM_SCHEMA.to_string(),
            weight: self.weight,
            index: self.index,
            field_degree: self.field_degree,
            truncation: self.truncation,
            precision_bits: self.precision,
            digits,
            a: match &self.raw {
                RawCoefficients::Exact(c) => c.iter().map(rational_string).collect(),
                RawCoefficients::Approx(c) => c.iter().map(|x| to_decimal(x, digits)).collect(),
            },
            lambda: self.lambdas.iter().map(|x| to_decimal(x, digits)).collect(),
        }
    }

    /// `λ(p)` for all primes `p ≤ x_max`; beyond the stored truncation the
    /// coefficients come from the multi-modular monomial expansion.
    pub fn prime_lambdas(&self, x_max: u64) -> Result<Vec<(u64, Float)>> {
        let primes = primes_up_to(x_max);
        if x_max as usize <= self.truncation {
            return Ok(primes.into_iter().map(|p| (p, self.lambda(p as usize).clone())).collect());
        }
        let n = x_max as usize;
        let indices: Vec<usize> = primes.iter().map(|&p| p as usize).collect();
        let k = self.weight;
        let prec = self.precision;
        let columns = self
            .monomials
            .iter()
            .map(|&(a, b, c)| large::monomial_coefficients_at(a, b, c, n, &indices))
            .collect::<Result<Vec<_>>>()?;
        let norm = |p: u64| Float::with_val(prec + 64, p).sqrt().pow(k - 1);
        if let Some(w) = &self.exact_monomial_coords {
            return Ok(primes
                .iter()
                .enumerate()
                .map(|(j, &p)| {
                    let mut a = Rational::new();
                    for (wc, col) in w.iter().zip(&columns) {
                        a += Rational::from(wc * &col[j]);
                    }
                    (p, Float::with_val(prec, Float::with_val(prec + 64, &a) / norm(p)))
                })
                .collect());
        }
        // Cancellation between monomials grows with n; redo the eigenvector
        // at a precision covering the largest monomial coefficient.
        let bound_bits = self
            .monomials
            .iter()
            .map(|&(a, b, c)| large::coefficient_bound(a, b, c, n).significant_bits())
            .max()
            .unwrap_or(0);
        let work = prec + bound_bits + 64;
        let hi = eigenforms_with_precision(k, 3 * self.coords.len().max(1), work)?;
        let w = &hi[self.index].monomial_coords;
        Ok(primes
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                let mut a = Float::new(work);
                for (wc, col) in w.iter().zip(&columns) {
                    a += Float::with_val(work, wc * &col[j]);
                }
                (p, Float::with_val(prec, a / norm(p)))
            })
            .collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenformJson {
    pub schema: String,
    pub weight: u32,
    pub index: usize,
    pub field_degree: usize,
    pub truncation: usize,
    pub precision_bits: u32,
    pub digits: usize,
    pub a: Vec<String>,
    pub lambda: Vec<String>,
}

/// Hecke eigenbasis of `S_k` at the default precision.
pub fn eigenforms(k: u32, n: usize) -> Result<Vec<HeckeEigenform>> {
    eigenforms_with_precision(k, n, DEFAULT_PRECISION)
}

pub fn eigenforms_with_precision(k: u32, n: usize, prec: u32) -> Result<Vec<HeckeEigenform>> {
    if k % 2 == 1 {
        return Err(Error::InvalidWeight(k as i64));
    }
    if prec < MIN_PRECISION {
        return Err(Error::InsufficientPrecision(format!(
            "working precision {prec} is below the minimum {MIN_PRECISION} bits"
        )));
    }
    let d = qseries::dim_cusp_space(k);
    if d == 0 {
        return Ok(Vec::new());
    }
    let vm = qseries::victor_miller(k, n)?;
    let (charpoly, ms) = separating_operator(k, &vm.forms)?;
    let work = prec + 64;
    let roots = charpoly.real_roots(work + 16);
    if roots.len() != d {
        return Err(Error::DegenerateSpectrum { weight: k });
    }
    let root_floats: Vec<Float> = roots
        .iter()
        .map(|(lo, hi)| Float::with_val(work, Rational::from(lo + hi) / 2u32))
        .collect();
    let degrees = field_degrees(&charpoly, &root_floats);

    let mut forms = Vec::with_capacity(d);
    for (r, (mid, &deg)) in roots.iter().zip(root_floats.iter().zip(&degrees)) {
        let exact_root = if deg == 1 {
            let guess = (Rational::from(&r.0 + &r.1) / 2u32).round();
            Some(guess).filter(|g| charpoly.eval(g).is_zero())
        } else {
            None
        };
        let form = match exact_root {
            Some(mu) => exact_eigenform(k, n, prec, &vm, &ms, &mu)?,
            None => approx_eigenform(k, n, prec, deg, &vm, &ms, mid)?,
        };
        forms.push(form);
    }
    forms.sort_by(|a, b| {
        a.lambdas[2]
            .partial_cmp(&b.lambdas[2])
            .unwrap()
            .then_with(|| a.lambdas[3].partial_cmp(&b.lambdas[3]).unwrap())
    });
    for (i, f) in forms.iter_mut().enumerate() {
        f.index = i;
        for p in primes_up_to(n as u64) {
            let l = f.lambda(p as usize);
            if Float::with_val(prec, l.abs_ref()) > 2.0 + 1e-25 {
                return Err(Error::DeligneViolation { p, value: l.to_f64() });
            }
        }
    }
    Ok(forms)
}

/// Characteristic polynomial and adjugate data of `T_2`, or of `T_2 + c·T_3`
/// for the first `c ≤ 10` giving a squarefree characteristic polynomial.
fn separating_operator(k: u32, basis: &[QSeries]) -> Result<(Poly, Vec<Matrix>)> {
    let t2 = hecke_matrix(k, 2, basis)?;
    let (p, ms) = faddeev_leverrier(&t2);
    if p.is_squarefree() {
        return Ok((p, ms));
    }
    log::warn!("T_2 has a repeated eigenvalue in weight {k}; combining with T_3");
    let t3 = hecke_matrix(k, 3, basis)?;
    for c in 1..=10 {
        let a = mat_add_scaled(&t2, &t3, &Rational::from(c));
        let (p, ms) = faddeev_leverrier(&a);
        if p.is_squarefree() {
            return Ok((p, ms));
        }
    }
    Err(Error::DegenerateSpectrum { weight: k })
}

/// Degree over ℚ of each root, found as the size of the smallest subset of
/// roots whose product `∏ (x − r)` has integer coefficients dividing the
/// characteristic polynomial exactly.
fn field_degrees(charpoly: &Poly, roots: &[Float]) -> Vec<usize> {
    let d = roots.len();
    if d > 16 {
        log::warn!("field degrees not resolved for a {d}-dimensional space");
        return vec![d; d];
    }
    let mut degree = vec![0usize; d];
    let mut masks: Vec<u32> = (1u32..(1 << d)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        if (0..d).any(|i| mask >> i & 1 == 1 && degree[i] != 0) {
            continue;
        }
        let prec = roots[0].prec();
        let mut coeffs = vec![Float::with_val(prec, 1)];
        for (i, r) in roots.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let mut next = vec![Float::new(prec); coeffs.len() + 1];
            for (j, c) in coeffs.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= Float::with_val(prec, c * r);
            }
            coeffs = next;
        }
        let mut ints = Vec::with_capacity(coeffs.len());
        let mut ok = true;
        for c in &coeffs {
            let rounded = Float::with_val(prec, c.round_ref());
            let scale = Float::with_val(prec, c.abs_ref()).max(&Float::with_val(prec, 1));
            if Float::with_val(prec, c - &rounded).abs() > scale * Float::with_val(prec, -(prec as i32) / 2).exp2() {
                ok = false;
                break;
            }
            ints.push(Rational::from(rounded.to_integer().expect("finite")));
        }
        if !ok {
            continue;
        }
        let factor = Poly::new(ints);
        if charpoly.div_rem(&factor).1.is_zero() {
            let size = mask.count_ones() as usize;
            for (i, deg) in degree.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *deg = size;
                }
            }
        }
    }
    degree
}

fn normalizer(n: usize, k: u32, prec: u32) -> Float {
    Float::with_val(prec, n).sqrt().pow(k - 1)
}

fn lambdas_from(a: &[Float], k: u32, prec: u32) -> Vec<Float> {
    a.iter()
        .enumerate()
        .map(|(n, an)| {
            if n == 0 {
                Float::new(prec)
            } else {
                Float::with_val(prec, an / normalizer(n, k, an.prec()))
            }
        })
        .collect()
}

fn monomial_coords_exact(v: &[Rational], transform: &[Vec<Rational>]) -> Vec<Rational> {
    let d = v.len();
    (0..d)
        .map(|c| {
            let mut acc = Rational::new();
            for (vi, row) in v.iter().zip(transform) {
                acc += Rational::from(vi * &row[c]);
            }
            acc
        })
        .collect()
}

fn exact_eigenform(
    k: u32,
    n: usize,
    prec: u32,
    vm: &qseries::VictorMillerBasis,
    ms: &[Matrix],
    mu: &Rational,
) -> Result<HeckeEigenform> {
    let adj = adjugate_at(ms, mu);
    let d = vm.forms.len();
    let col = (0..d)
        .find(|&j| !adj[0][j].is_zero())
        .ok_or(Error::DegenerateSpectrum { weight: k })?;
    let v: Vec<Rational> = (0..d).map(|i| Rational::from(&adj[i][col] / &adj[0][col])).collect();
    let mut raw = vec![Rational::new(); n + 1];
    for (vi, f) in v.iter().zip(&vm.forms) {
        for (r, c) in raw.iter_mut().zip(f.coeffs()) {
            *r += Rational::from(vi * c);
        }
    }
    let a_float: Vec<Float> = raw.iter().map(|r| Float::with_val(prec + 32, r)).collect();
    let w = monomial_coords_exact(&v, &vm.transform);
    Ok(HeckeEigenform {
        weight: k,
        truncation: n,
        index: 0,
        field_degree: 1,
        precision: prec,
        lambdas: lambdas_from(&a_float, k, prec),
        raw: RawCoefficients::Exact(raw),
        coords: v.iter().map(|x| Float::with_val(prec, x)).collect(),
        monomial_coords: w.iter().map(|x| Float::with_val(prec, x)).collect(),
        exact_coords: Some(v),
        exact_monomial_coords: Some(w),
        monomials: vm.monomials.clone(),
        petersson_norm: None,
        sym2_at_1: None,
    })
}

fn approx_eigenform(
    k: u32,
    n: usize,
    prec: u32,
    degree: usize,
    vm: &qseries::VictorMillerBasis,
    ms: &[Matrix],
    mu: &Float,
) -> Result<HeckeEigenform> {
    let work = mu.prec();
    let adj = adjugate_at_float(ms, mu);
    let d = vm.forms.len();
    let col = (0..d)
        .max_by(|&a, &b| {
            let x = Float::with_val(work, adj[0][a].abs_ref());
            let y = Float::with_val(work, adj[0][b].abs_ref());
            x.partial_cmp(&y).unwrap()
        })
        .unwrap();
    let v: Vec<Float> = (0..d).map(|i| Float::with_val(work, &adj[i][col] / &adj[0][col])).collect();

    let mut raw = vec![Float::new(work); n + 1];
    let mut lost_bits = 0i64;
    for (m, r) in raw.iter_mut().enumerate() {
        let mut largest = Float::new(64);
        for (vi, f) in v.iter().zip(&vm.forms) {
            let term = Float::with_val(work, vi * f.coeff(m));
            let mag = Float::with_val(64, term.abs_ref());
            if mag > largest {
                largest = mag;
            }
            *r += term;
        }
        if !r.is_zero() && !largest.is_zero() {
            let lost = largest.get_exp().unwrap_or(0) as i64 - r.get_exp().unwrap_or(0) as i64;
            lost_bits = lost_bits.max(lost);
        }
    }
    if lost_bits + 16 > (work - prec) as i64 {
        log::debug!("weight {k}: {lost_bits} bits cancelled, raising working precision");
        let higher = eigenforms_with_precision(k, n, prec + lost_bits as u32 + 32)?;
        let target = Float::with_val(work, &v[1]);
        let mut best = higher
            .into_iter()
            .min_by(|a, b| {
                let da = Float::with_val(work, &a.coords[1] - &target).abs();
                let db = Float::with_val(work, &b.coords[1] - &target).abs();
                da.partial_cmp(&db).unwrap()
            })
            .expect("same dimension");
        reduce_precision(&mut best, prec);
        return Ok(best);
    }
    let w: Vec<Float> = (0..d)
        .map(|c| {
            let mut acc = Float::new(work);
            for (vi, row) in v.iter().zip(&vm.transform) {
                acc += Float::with_val(work, vi * &row[c]);
            }
            Float::with_val(prec, acc)
        })
        .collect();
    Ok(HeckeEigenform {
        weight: k,
        truncation: n,
        index: 0,
        field_degree: degree,
        precision: prec,
        lambdas: lambdas_from(&raw, k, prec),
        raw: RawCoefficients::Approx(raw.into_iter().map(|x| Float::with_val(prec, x)).collect()),
        coords: v.iter().map(|x| Float::with_val(prec, x)).collect(),
        monomial_coords: w,
        exact_coords: None,
        exact_monomial_coords: None,
        monomials: vm.monomials.clone(),
        petersson_norm: None,
        sym2_at_1: None,
    })
}

fn reduce_precision(f: &mut HeckeEigenform, prec: u32) {
    f.precision = prec;
    for x in f.lambdas.iter_mut().chain(f.coords.iter_mut()).chain(f.monomial_coords.iter_mut()) {
        x.set_prec(prec);
    }
    if let RawCoefficients::Approx(v) = &mut f.raw {
        for x in v.iter_mut() {
            x.set_prec(prec);
        }
    }
}

/// Satake parameter `α = e^{iθ}` at a prime, with `2cos θ = λ(p)`.
#[derive(Clone, Debug)]
pub struct SatakeParameter {
    pub p: u64,
    /// `θ ∈ [0, π]`.
    pub theta: Float,
    pub alpha: Complex,
}

impl SatakeParameter {
    pub fn from_angle(p: u64, theta: Float) -> Self {
        let prec = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(prec));
        Self { p, alpha: Complex::with_val(prec, (c, s)), theta }
    }

    /// `α + α^{-1}`.
    pub fn trace(&self) -> Float {
        let prec = self.theta.prec();
        Float::with_val(prec, self.theta.cos_ref()) * 2u32
    }

    /// `λ(p^β) = sin((β+1)θ) / sin θ`.
    pub fn lambda_power(&self, beta: u32) -> Float {
        chebyshev_u(beta, &self.theta)
    }
}

/// `sin((β+1)θ)/sin θ`, evaluated by the three-term recurrence so that the
/// endpoints `θ = 0, π` are handled.
pub fn chebyshev_u(beta: u32, theta: &Float) -> Float {
    let prec = theta.prec();
    let x = Float::with_val(prec, theta.cos_ref()) * 2u32;
    let mut prev = Float::with_val(prec, 1);
    if beta == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..beta {
        let next = Float::with_val(prec, &x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Tolerance on `|λ(p)| − 2` before a Deligne violation is reported.
pub const DELIGNE_TOLERANCE: f64 = 1e-20;

pub fn satake_from_lambda(p: u64, lambda: &Float) -> Result<SatakeParameter> {
    let prec = lambda.prec();
    if Float::with_val(prec, lambda.abs_ref()) > 2.0 + DELIGNE_TOLERANCE {
        return Err(Error::DeligneViolation { p, value: lambda.to_f64() });
    }
    let half = Float::with_val(prec, lambda / 2u32).clamp(&-1, &1);
    Ok(SatakeParameter::from_angle(p, half.acos()))
}

/// `Λ(p^b) = α^b + α^{−b} = 2cos(bθ)`.
pub fn big_lambda(alpha: &SatakeParameter, b: u32) -> Float {
    let prec = alpha.theta.prec();
    let angle = Float::with_val(prec, &alpha.theta * b);
    angle.cos() * 2u32
}

/// `b_{α,β} = α!(β+1) / (((α−β)/2)! ((α+β)/2+1)!)` when `α ≡ β (mod 2)`,
/// zero otherwise, so that `λ(p)^α = Σ_β b_{α,β} λ(p^β)`.
pub fn power_expansion_coefficients(alpha: u32) -> Vec<Integer> {
    (0..=alpha)
        .map(|beta| {
            if (alpha - beta) % 2 == 1 {
                return Integer::new();
            }
            let num = Integer::from(Integer::factorial(alpha)) * (beta + 1);
            let den = Integer::from(Integer::factorial((alpha - beta) / 2))
                * Integer::from(Integer::factorial((alpha + beta) / 2 + 1));
            let (q, r) = num.div_rem(den);
            debug_assert!(r.is_zero());
            q
        })
        .collect()
}

/// The coefficient of `p^{-cs}` structure in `L(s, sym²f × u)`:
/// `c = 1` gives `λ_f(p²)λ_u(p)`, `c = 2` gives
/// `(λ_f(p⁴) − λ_f(p²) + 1)(λ_u(p²) − 1)`.
pub fn sym2_twist_lambda(f: &HeckeEigenform, alpha_u: &SatakeParameter, c: u32) -> Result<Float> {
    let p = alpha_u.p;
    let f_sat = f.satake(p)?;
    let lf = |e: u32| -> Float {
        let idx = (p as usize).checked_pow(e);
        match idx {
            Some(i) if i <= f.truncation => f.lambda(i).clone(),
            _ => f_sat.lambda_power(e),
        }
    };
    sym2_twist_closed_form(&lf(2), &lf(4), alpha_u, c)
}

pub fn sym2_twist_closed_form(lf_p2: &Float, lf_p4: &Float, alpha_u: &SatakeParameter, c: u32) -> Result<Float> {
    let prec = lf_p2.prec().max(alpha_u.theta.prec());
    match c {
        1 => Ok(Float::with_val(prec, lf_p2 * alpha_u.trace())),
        2 => {
            let lu2 = alpha_u.lambda_power(2);
            let first = Float::with_val(prec, lf_p4 - lf_p2) + 1u32;
            Ok(first * (lu2 - 1u32))
        }
        _ => Err(Error::InvalidInput(format!("c must be 1 or 2, got {c}"))),
    }
}
