//! Smoothed approximate functional equation for `L(s, sym²f)`.
//!
//! With `γ(s) = Γ_ℝ(s+1) Γ_ℂ(s+k−1)` and `Λ(s) = γ(s) L(s) = Λ(1−s)`,
//! `Λ(s) = F(s) + F(1−s)` where
//! `F(s) = Σ b_n (1/2πi) ∫_{(Re s + 3)} γ(z) e^{c(z−s)²} n^{−z} dz/(z−s)`.
//! Evaluating with two Gaussian widths `c` gives a self-check.

use rug::{Assign, Complex, Float};

use super::ln_gamma_sym2;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AfeConfig {
    pub widths: [f64; 2],
    /// Trapezoid step along the vertical contour.
    pub step: f64,
    /// Distance of the contour to the right of the evaluation point.
    pub shift: f64,
    pub max_terms: usize,
    pub prec: u32,
    /// Target for the Dirichlet-series tail bound.
    pub tail_target: f64,
}

impl Default for AfeConfig {
    fn default() -> Self {
        Self { widths: [0.05, 0.1], step: 0.2, shift: 3.0, max_terms: 20_000, prec: 128, tail_target: 1e-20 }
    }
}

/// Coefficients `b_n = Σ_{m² l = n} λ(l²)` of `L(s, sym²f)` for `n ≤ n_max`,
/// from `λ(p)` at the primes (`λ(p^{j+1}) = λ(p)λ(p^j) − λ(p^{j−1})`).
pub fn sym2_coefficients(prime_lambdas: &[(u64, Float)], n_max: usize, prec: u32) -> Vec<Float> {
    let mut lam_sq = vec![Float::with_val(prec, 1); n_max + 1];
    lam_sq[0] = Float::new(prec);
    for (p, lp) in prime_lambdas {
        let p = *p as usize;
        if p > n_max {
            break;
        }
        // λ(p^{2e}) for p^e ≤ n_max
        let mut powers = vec![Float::with_val(prec, 1), Float::with_val(prec, lp)];
        let mut pe = p;
        let mut e = 1;
        while pe <= n_max {
            while powers.len() <= 2 * e {
                let j = powers.len() - 1;
                let next = Float::with_val(prec, lp * &powers[j]) - &powers[j - 1];
                powers.push(next);
            }
            // multiply λ(l²) by λ(p^{2e}) for l with p-adic valuation exactly e
            let mut l = pe;
            while l <= n_max {
                if (l / pe) % p != 0 {
                    lam_sq[l] *= &powers[2 * e];
                }
                l += pe;
            }
            e += 1;
            pe = match pe.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
    }
    let mut b = vec![Float::new(prec); n_max + 1];
    let mut m = 1usize;
    while m * m <= n_max {
        let mut l = 1;
        while m * m * l <= n_max {
            b[m * m * l] += &lam_sq[l];
            l += 1;
        }
        m += 1;
    }
    b
}

/// Quadrature nodes of `γ(z)/γ(s) e^{c(z−s')²}/(z−s') · h/2π` on the line
/// `Re z = Re s' + shift`, trimmed where negligible.
struct Kernel {
    x0: Float,
    y0: Float,
    weights: Vec<Complex>,
}

fn kernel(s_prime: &Complex, ln_gamma_s: &Complex, k: u32, c: f64, cfg: &AfeConfig) -> Result<Kernel> {
    let prec = cfg.prec;
    let x0 = Float::with_val(prec, s_prime.real() + cfg.shift);
    let t0 = Float::with_val(prec, s_prime.imag());
    let h = Float::with_val(prec, cfg.step);
    let weight = Float::with_val(prec, &h / (2u32 * crate::precision::pi(prec)));
    let node = |j: i64| -> Result<(f64, Complex)> {
        let y = Float::with_val(prec, &h * j) + &t0;
        let z = Complex::with_val(prec, (&x0, &y));
        let w = Complex::with_val(prec, &z - s_prime);
        let expo = ln_gamma_sym2(&z, k, prec)? - ln_gamma_s + Complex::with_val(prec, w.square_ref()) * c;
        let g = Complex::with_val(prec, expo.exp_ref()) / w * &weight;
        let mag = Float::with_val(53, g.abs_ref()).to_f64();
        Ok((mag, g))
    };
    let (m0, g0) = node(0)?;
    let mut peak = m0;
    let mut right = vec![g0];
    let mut left = Vec::new();
    let cutoff = 2f64.powi(-(prec as i32) - 8);
    for (dir, out) in [(1i64, &mut right), (-1, &mut left)] {
        let mut j = dir;
        let mut quiet = 0;
        loop {
            let (m, g) = node(j)?;
            peak = peak.max(m);
            out.push(g);
            quiet = if m < cutoff * peak { quiet + 1 } else { 0 };
            if quiet >= 8 {
                break;
            }
            if j.unsigned_abs() > 200_000 {
                return Err(Error::InsufficientPrecision("contour integrand does not decay".into()));
            }
            j += dir;
        }
    }
    let y_start = t0 - Float::with_val(prec, &h * left.len() as u32);
    left.reverse();
    left.extend(right);
    Ok(Kernel { x0, y0: y_start, weights: left })
}

impl Kernel {
    /// `Σ_n b_n W(s', n) / γ(s)` over `1 ≤ n ≤ b.len() − 1`.
    fn apply(&self, b: &[Float], h: f64) -> Complex {
        let prec = self.x0.prec();
        let mut total = Complex::new(prec);
        let mut acc = Complex::new(prec);
        let mut phase = Complex::new(prec);
        let mut tmp = Complex::new(prec);
        for (n, bn) in b.iter().enumerate().skip(1) {
            if bn.is_zero() {
                continue;
            }
            let ln_n = Float::with_val(prec, n).ln();
            let theta0 = -Float::with_val(prec, &self.y0 * &ln_n);
            let dtheta = Float::with_val(prec, &ln_n * -h);
            let (s0, c0) = theta0.sin_cos(Float::new(prec));
            phase.assign((c0, s0));
            let (s1, c1) = dtheta.sin_cos(Float::new(prec));
            let rot = Complex::with_val(prec, (c1, s1));
            acc.assign(0);
            for g in &self.weights {
                tmp.assign(g * &phase);
                acc += &tmp;
                phase *= &rot;
            }
            let scale = (-Float::with_val(prec, &self.x0 * ln_n)).exp() * bn;
            total += Complex::with_val(prec, &acc * scale);
        }
        total
    }
}


/// Upper bound for `Σ_{n>N} |b_n W(s',n)/γ(s)|` from `|b_n| ≤ d_3(n) ≤ 4n`
/// and `|W(s',n)| ≤ K(ν) n^{−ν}` on shifted lines `Re z = ν`.
struct TailBound {
    table: Vec<(f64, f64)>,
}

impl TailBound {
    fn new(s_prime: &Complex, ln_gamma_s: &Complex, k: u32, c: f64) -> Result<Self> {
        let prec = 64;
        let sigma = s_prime.real().to_f64();
        let t0 = s_prime.imag().to_f64();
        let ln_gs = Complex::with_val(prec, ln_gamma_s);
        let mut table = Vec::new();
        for nu in [3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0] {
            if nu <= sigma + 0.5 {
                continue;
            }
            let h = 0.5;
            let mut integral = 0.0;
            let mut peak = 0.0f64;
            for dir in [1i64, -1] {
                let mut j = if dir == 1 { 0 } else { -1 };
                loop {
                    let y = t0 + j as f64 * h;
                    let z = Complex::with_val(prec, (nu, y));
                    let re = Complex::with_val(prec, ln_gamma_sym2(&z, k, prec)? - &ln_gs).real().to_f64();
                    let log_v = re + c * ((nu - sigma).powi(2) - (y - t0).powi(2))
                        - ((nu - sigma).powi(2) + (y - t0).powi(2)).sqrt().ln();
                    let v = log_v.exp();
                    peak = peak.max(log_v);
                    integral += v * h;
                    if log_v < peak - 80.0 && (y - t0).abs() > 5.0 {
                        break;
                    }
                    j += dir;
                }
            }
            // Trapezoid on a smooth, log-concave-in-tail integrand; doubled for safety.
            table.push((nu, 2.0 * integral / (2.0 * std::f64::consts::PI)));
        }
        Ok(Self { table })
    }

    fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        self.table
            .iter()
            .map(|&(nu, k)| 4.0 * k * n.powf(2.0 - nu) / (nu - 2.0))
            .fold(f64::INFINITY, f64::min)
    }
}

pub struct AfeValue {
    pub value: Complex,
    /// Per-width values, for the two-width agreement check.
    pub per_width: [Complex; 2],
    pub tail: f64,
    pub terms: usize,
}

/// Number of Dirichlet terms needed for the tail bound to reach the target.
pub fn terms_needed(s: &Complex, k: u32, cfg: &AfeConfig) -> Result<(usize, f64)> {
    let prec = cfg.prec;
    let ln_gs = ln_gamma_sym2(s, k, prec)?;
    let dual = Complex::with_val(prec, 1 - s);
    let mut bounds = Vec::new();
    for &c in &cfg.widths {
        bounds.push(TailBound::new(s, &ln_gs, k, c)?);
        bounds.push(TailBound::new(&dual, &ln_gs, k, c)?);
    }
    let tail = |n: usize| bounds.iter().map(|b| b.at(n)).fold(0.0f64, f64::max) * 2.0;
    let mut n = 32usize;
    while n < cfg.max_terms && tail(n) > cfg.tail_target {
        n = (n as f64 * 1.25) as usize;
    }
    let n = n.min(cfg.max_terms);
    Ok((n, tail(n)))
}

/// `L(s, sym²f)` from its Dirichlet coefficients `b` (index `0..=N`).
pub fn evaluate(s: &Complex, k: u32, b: &[Float], tail: f64, cfg: &AfeConfig) -> Result<AfeValue> {
    let prec = cfg.prec;
    let ln_gs = ln_gamma_sym2(s, k, prec)?;
    let dual = Complex::with_val(prec, 1 - s);
    let mut per_width = Vec::with_capacity(2);
    for &c in &cfg.widths {
        let direct = kernel(s, &ln_gs, k, c, cfg)?.apply(b, cfg.step);
        let reflected = kernel(&dual, &ln_gs, k, c, cfg)?.apply(b, cfg.step);
        per_width.push(direct + reflected);
    }
    let [first, second]: [Complex; 2] = per_width.try_into().expect("two widths");
    Ok(AfeValue { value: second.clone(), per_width: [first, second], tail, terms: b.len() - 1 })
}
