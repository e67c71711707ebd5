//! Special functions in extended precision: Bernoulli numbers, the complex
//! log-Gamma function, and Gauss–Legendre rules.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::pi;

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]))
}

/// Bernoulli number `B_n` (with `B_1 = -1/2`), computed by the recurrence
/// `sum_{j<=m} C(m+1, j) B_j = 0` and memoized.
pub fn bernoulli(n: usize) -> Rational {
    let mut cache = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        let m = cache.len();
        if m > 1 && m % 2 == 1 {
            cache.push(Rational::new());
            continue;
        }
        let mut acc = Rational::new();
        let mut binom = Integer::from(1);
        for (j, b) in cache.iter().enumerate() {
            if !b.is_zero() {
                acc += Rational::from(&binom * b.numer()) / b.denom();
            }
            binom *= (m + 1 - j) as u32;
            binom /= (j + 1) as u32;
        }
        cache.push(-acc / (m as u32 + 1));
    }
    cache[n].clone()
}

fn is_nonpositive_integer(z: &Complex) -> bool {
    z.imag().is_zero() && *z.real() <= 0 && z.real().is_integer()
}

/// Principal branch of `log Γ(z)` for complex `z`.
///
/// Uses the Stirling series after shifting `z` far enough from the origin,
/// with the reflection formula for `Re z < 1/2`.
pub fn ln_gamma(z: &Complex, prec: u32) -> Result<Complex> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("Gamma has a pole at {}", z.real())));
    }
    let work = prec + 32;
    let z = Complex::with_val(work, z);
    if *z.real() < 0.5 {
        // log Γ(z) = log π − log sin(πz) − log Γ(1 − z)
        let one_minus = Complex::with_val(work, 1 - &z);
        let reflected = ln_gamma(&one_minus, work)?;
        let sin = Complex::with_val(work, &z * pi(work)).sin();
        let out = Complex::with_val(work, pi(work).ln()) - sin.ln() - reflected;
        return Ok(Complex::with_val(prec, out));
    }
    Ok(Complex::with_val(prec, stirling_shifted(&z, work)))
}

fn stirling_coefficients(prec: u32, count: usize) -> Vec<(Float, f64)> {
    // B_{2j} / (2j(2j−1)) and log2 of its magnitude, cached per precision.
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<(Float, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    let entry = guard.entry(prec).or_default();
    while entry.len() < count {
        let j = entry.len() + 1;
        let coeff = Float::with_val(prec, &bernoulli(2 * j)) / ((2 * j * (2 * j - 1)) as u32);
        let log2 = Float::with_val(53, coeff.abs_ref()).log2().to_f64();
        entry.push((coeff, log2));
    }
    entry[..count].to_vec()
}

fn stirling_shifted(z: &Complex, prec: u32) -> Complex {
    // Remainder after J terms is bounded by the next term times 2^{J+1}
    // on Re w >= 0, so the shift is chosen against |w|/sqrt(2).
    let radius = std::f64::consts::SQRT_2 * (0.12 * prec as f64 + 10.0);
    let re = z.real().to_f64();
    let im = z.imag().to_f64();
    let mut shift = 0u32;
    while ((re + shift as f64).powi(2) + im * im).sqrt() < radius {
        shift += 1;
    }
    // log Γ(z) = log Γ(z + shift) − log ∏ (z + j); the product's logarithm
    // is taken once and moved to the principal branch of the sum.
    let mut w = Complex::with_val(prec, z);
    let mut product = Complex::with_val(prec, 1);
    let mut arg_sum = 0.0f64;
    for j in 0..shift {
        product *= &w;
        arg_sum += im.atan2(re + j as f64);
        w += 1;
    }
    let mut log_prod = product.ln();
    if shift > 0 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let turns = ((arg_sum - log_prod.imag().to_f64()) / two_pi).round();
        if turns != 0.0 {
            let correction = Float::with_val(prec, crate::precision::pi(prec) * 2u32) * turns;
            *log_prod.mut_imag() += correction;
        }
    }
    let half_log_two_pi = Float::with_val(prec, pi(prec) * 2u32).ln() / 2u32;
    let ln_w = Complex::with_val(prec, w.ln_ref());
    let mut out = Complex::with_val(prec, &w - Float::with_val(prec, 0.5)) * &ln_w - &w;
    out += &half_log_two_pi;

    let log2_abs_w = Float::with_val(53, w.abs_ref()).to_f64().log2();
    let inv_w = Complex::with_val(prec, w.recip_ref());
    let inv_w2 = Complex::with_val(prec, inv_w.square_ref());
    let mut power = inv_w; // w^{-(2j-1)}
    let log2_eps = -(prec as f64) - 8.0;
    let mut count = 16;
    let mut coeffs = stirling_coefficients(prec, count);
    let mut j = 1usize;
    loop {
        if j > coeffs.len() {
            count *= 2;
            coeffs = stirling_coefficients(prec, count);
        }
        let (coeff, log2_coeff) = &coeffs[j - 1];
        out += Complex::with_val(prec, &power * coeff);
        let log2_term = log2_coeff - (2 * j - 1) as f64 * log2_abs_w + j as f64;
        if log2_term < log2_eps || j > 4000 {
            break;
        }
        power *= &inv_w2;
        j += 1;
    }
    out - log_prod
}

pub fn gamma(z: &Complex, prec: u32) -> Result<Complex> {
    Ok(ln_gamma(z, prec)?.exp())
}

/// Upper incomplete gamma function `Γ(a, x)` for real `a > 0`, `x >= 0`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    let g = Float::with_val(128, a).gamma_inc(&Float::with_val(128, x));
    g.to_f64()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` in double precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let (xs, ws) = gauss_legendre_float(n, 128);
    let rule = (
        xs.iter().map(Float::to_f64).collect::<Vec<_>>(),
        ws.iter().map(Float::to_f64).collect::<Vec<_>>(),
    );
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// Gauss–Legendre nodes and weights at the requested precision, by Newton
/// iteration on the Legendre polynomial from Chebyshev-type initial guesses.
pub fn gauss_legendre_float(n: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), (Vec<Float>, Vec<Float>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(n, prec)) {
        return hit.clone();
    }
    let work = prec + 32;
    let mut nodes = vec![Float::new(prec); n];
    let mut weights = vec![Float::new(prec); n];
    for i in 0..n.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(work, guess);
        let mut deriv = Float::new(work);
        for _ in 0..200 {
            let (p, dp) = legendre_with_derivative(n, &x, work);
            let step = Float::with_val(work, &p / &dp);
            x -= &step;
            deriv = dp;
            if step.is_zero() || step.get_exp().map_or(true, |e| e < -(work as i32) + 4) {
                let (_, dp) = legendre_with_derivative(n, &x, work);
                deriv = dp;
                break;
            }
        }
        let one_minus_x2 = Float::with_val(work, 1 - Float::with_val(work, x.square_ref()));
        let w = Float::with_val(work, 2u32) / (one_minus_x2 * Float::with_val(work, deriv.square_ref()));
        nodes[i] = Float::with_val(prec, -&x);
        nodes[n - 1 - i] = Float::with_val(prec, &x);
        weights[i] = Float::with_val(prec, &w);
        weights[n - 1 - i] = Float::with_val(prec, &w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = Float::new(prec);
    }
    cache.lock().unwrap().insert((n, prec), (nodes.clone(), weights.clone()));
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: &Float, prec: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = Float::with_val(prec, x);
    for j in 2..=n {
        let jf = j as u32;
        let p2 = (Float::with_val(prec, 2 * jf - 1) * x * &p1 - Float::with_val(prec, jf - 1) * &p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n − P_{n−1}) / (x² − 1)
    let x2m1 = Float::with_val(prec, x.square_ref()) - 1u32;
    let dp = Float::with_val(prec, n as u32) * (Float::with_val(prec, x * &p1) - &p0) / x2m1;
    (p1, dp)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> Integer {
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

pub fn factorial(n: u64) -> Integer {
    Integer::from(Integer::factorial(n as u32))
}

/// `B_{2n}` closed-form check helper: `ζ(2n) = (−1)^{n+1} B_{2n} (2π)^{2n} / (2 (2n)!)`.
pub fn zeta_even_closed_form(n: u32, prec: u32) -> Float {
    let b = Float::with_val(prec, &bernoulli(2 * n as usize));
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let num = b * two_pi.pow(2 * n);
    let den = Float::with_val(prec, &factorial(2 * n as u64)) * 2u32;
    let v = num / den;
    if n % 2 == 1 {
        v
    } else {
        -v
    }
}
