//! The transforms `H`, `H⁺`, `H⁻` of `h(t) = e^{−t²/T²}` and imaginary-order
//! Bessel functions.
//!
//! Folding `t → −t` turns both transforms into
//! `H^±(x) = −(1/π) ∫_0^∞ Im X_{2it}(x) h(t) t / cosh(πt) dt`
//! with `X = J` for `H⁺` and `X = I` for `H⁻` (using
//! `sinh(πt) K_{2it}(x) = −π Im I_{2it}(x) / (2 cosh πt)`). Both Bessel
//! functions come from their power series in `x/2`, whose `m`-th term carries
//! `1/Γ(m+1+2it)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rug::ops::NegAssign;
use rug::{Assign, Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::pi;
use crate::special::{gauss_legendre, ln_gamma};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselTransformConfig {
    /// Spectral scale `T`.
    pub t_scale: f64,
    /// Upper end of the `t` integral.
    pub truncation: f64,
    /// Panel width of the composite rule.
    pub panel: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    pub prec: u32,
}

impl BesselTransformConfig {
    pub fn new(t_scale: f64) -> Result<Self> {
        let cfg = Self { t_scale, truncation: 10.0 * t_scale, panel: 0.5, order: 16, prec: 128 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_scale > 0.0) {
            return Err(Error::InvalidInput(format!("T = {} must be positive", self.t_scale)));
        }
        if !(self.truncation >= 10.0 * self.t_scale) {
            return Err(Error::InvalidInput(format!(
                "truncation {} is below 10 T = {}",
                self.truncation,
                10.0 * self.t_scale
            )));
        }
        if !(self.panel > 0.0) || self.order < 8 {
            return Err(Error::InvalidInput("panel width must be positive and order at least 8".into()));
        }
        Ok(())
    }

    /// Same config with half the panel width.
    pub fn refined(&self) -> Self {
        Self { panel: self.panel / 2.0, ..self.clone() }
    }

    fn h(&self, t: f64) -> f64 {
        (-(t / self.t_scale).powi(2)).exp()
    }
}

/// A transform value with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselValue {
    pub value: f64,
    pub precision_estimate: f64,
}

/// `H = (1/2π²) ∫_0^∞ h(t) tanh(πt) t dt`.
pub fn bessel_h(cfg: &BesselTransformConfig) -> Result<BesselValue> {
    cfg.validate()?;
    let t_max = cfg.truncation;
    let integrand = |t: f64| cfg.h(t) * (PI * t).tanh() * t;
    let high = composite(t_max, cfg.panel, cfg.order, integrand);
    let low = composite(t_max, cfg.panel, cfg.order - 6, integrand);
    let tail = cfg.t_scale.powi(2) / 2.0 * (-(t_max / cfg.t_scale).powi(2)).exp();
    let scale = 1.0 / (2.0 * PI * PI);
    Ok(BesselValue {
        value: high * scale,
        precision_estimate: ((high - low).abs() + tail + 1e-15 * high.abs()) * scale,
    })
}

fn composite(t_max: f64, panel: f64, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let panels = (t_max / panel).ceil() as usize;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * panel;
        let b = (a + panel).min(t_max);
        let half = 0.5 * (b - a);
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * half * f(a + half * (x + 1.0));
        }
    }
    acc
}

/// `H⁺(x) = (i/2π) ∫_ℝ J_{2it}(x) h(t) t / cosh(πt) dt`.
pub fn bessel_h_plus(x: f64, cfg: &BesselTransformConfig) -> Result<BesselValue> {
    kernel(cfg, x)?.transform(x, Kind::J)
}

/// `H⁻(x) = (1/π²) ∫_ℝ K_{2it}(x) sinh(πt) h(t) t dt`.
pub fn bessel_h_minus(x: f64, cfg: &BesselTransformConfig) -> Result<BesselValue> {
    kernel(cfg, x)?.transform(x, Kind::I)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    J,
    I,
}

/// Bits lost to cancellation in the series at argument `x`.
fn extra_bits(x: f64) -> u32 {
    (2.9 * x).ceil() as u32 + 16
}

/// `Σ_m (±1)^m (x/2)^{2m} / (m! Γ(m+1+2it))` given `g0 = 1/Γ(1+2it)` (times
/// any common factor), at the precision of `g0`.
fn series(x: f64, t: f64, g0: &Complex, kind: Kind) -> Complex {
    let prec = g0.prec().0;
    let quarter_x2 = Float::with_val(prec, x * x / 4.0);
    let two_t = Float::with_val(prec, 2.0 * t);
    let four_t2 = Float::with_val(prec, two_t.square_ref());
    let (mut re, mut im) = g0.clone().into_real_imag();
    let mut acc_re = re.clone();
    let mut acc_im = im.clone();
    let mut scale = Float::new(prec);
    let mut t1 = Float::new(prec);
    let mut t2 = Float::new(prec);
    let mut biggest = exponent(&re, &im);
    let mut m = 1u32;
    loop {
        // term ← term · (±(x/2)²) (m − 2it) / (m (m² + 4t²))
        scale.assign(&four_t2 + m * m);
        scale *= m;
        scale.recip_mut();
        scale *= &quarter_x2;
        if kind == Kind::J {
            scale.neg_assign();
        }
        t1.assign(&im * &two_t);
        t2.assign(&re * &two_t);
        re *= m;
        re += &t1;
        re *= &scale;
        im *= m;
        im -= &t2;
        im *= &scale;
        acc_re += &re;
        acc_im += &im;
        let e = exponent(&re, &im);
        biggest = biggest.max(e);
        if m as f64 > x && e < biggest - prec as i64 {
            break;
        }
        m += 1;
    }
    Complex::with_val(prec, (acc_re, acc_im))
}

fn exponent(re: &Float, im: &Float) -> i64 {
    let e = |f: &Float| f.get_exp().map_or(i64::MIN / 2, i64::from);
    e(re).max(e(im))
}

fn inv_gamma_1_2it(t: f64, prec: u32) -> Result<Complex> {
    let z = Complex::with_val(prec, (1, 2.0 * t));
    Ok((-ln_gamma(&z, prec)?).exp())
}

fn x_phase(x: f64, t: f64, prec: u32) -> Complex {
    let arg = Float::with_val(prec, Float::with_val(prec, x / 2.0).ln() * (2.0 * t));
    let (s, c) = arg.sin_cos(Float::new(prec));
    Complex::with_val(prec, (c, s))
}

/// `J_{2it}(x)` for real `t` and `x > 0`.
pub fn bessel_j_imag(t: f64, x: f64, prec: u32) -> Result<Complex> {
    let work = prec + extra_bits(x);
    let g0 = inv_gamma_1_2it(t, work)?;
    let s = series(x, t, &g0, Kind::J) * x_phase(x, t, work);
    Ok(Complex::with_val(prec, s))
}

/// `I_{2it}(x)` for real `t` and `x > 0`.
pub fn bessel_i_imag(t: f64, x: f64, prec: u32) -> Result<Complex> {
    let work = prec + extra_bits(x);
    let g0 = inv_gamma_1_2it(t, work)?;
    let s = series(x, t, &g0, Kind::I) * x_phase(x, t, work);
    Ok(Complex::with_val(prec, s))
}

/// `K_{2it}(x) = −π Im I_{2it}(x) / sinh(2πt)` for `t ≠ 0`.
pub fn bessel_k_imag(t: f64, x: f64, prec: u32) -> Result<Float> {
    if t == 0.0 {
        return Err(Error::InvalidInput("imaginary order must be nonzero".into()));
    }
    let work = prec + extra_bits(x) + (4.0 * t.abs()) as u32 + 16;
    let i = bessel_i_imag(t, x, work)?;
    let sinh = Float::with_val(work, pi(work) * (2.0 * t)).sinh();
    Ok(Float::with_val(prec, -(Float::with_val(work, i.imag() * pi(work)) / sinh)))
}

struct Node {
    t: f64,
    /// `w h(t) t / (π cosh(πt) Γ(1+2it))`.
    g0: Complex,
}

struct Kernel {
    prec: u32,
    t_scale: f64,
    t_max: f64,
    high: Vec<Node>,
    low: Vec<Node>,
}

fn kernel(cfg: &BesselTransformConfig, x: f64) -> Result<Arc<Kernel>> {
    cfg.validate()?;
    if !(x > 0.0) {
        return Err(Error::InvalidInput(format!("Bessel transforms need x > 0, got {x}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<Kernel>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    // Kernels are shared between arguments needing the same precision band.
    let band = extra_bits(x).div_ceil(64) * 64;
    let x_band = (band as f64 - 16.0) / 2.9;
    let t_max = cfg.truncation.max(cfg.t_scale * (x_band + 100.0).sqrt());
    let key = format!("{:?}|{band}|{t_max}", cfg);
    if let Some(k) = cache.lock().unwrap().get(&key) {
        return Ok(k.clone());
    }
    let prec = cfg.prec + band;
    let nodes = |order: usize| -> Result<Vec<Node>> {
        let (xs, ws) = gauss_legendre(order);
        let panels = (t_max / cfg.panel).ceil() as usize;
        let mut pts = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * cfg.panel;
            let b = (a + cfg.panel).min(t_max);
            let half = 0.5 * (b - a);
            for (u, w) in xs.iter().zip(&ws) {
                pts.push((a + half * (u + 1.0), w * half));
            }
        }
        pts.into_par_iter()
            .map(|(t, w)| {
                let g = inv_gamma_1_2it(t, prec)?;
                let cosh = Float::with_val(prec, pi(prec) * t).cosh();
                let c = Float::with_val(prec, w * cfg.h(t) * t) / (cosh * pi(prec));
                Ok(Node { t, g0: g * c })
            })
            .collect()
    };
    let k = Arc::new(Kernel { prec, t_scale: cfg.t_scale, t_max, high: nodes(cfg.order)?, low: nodes(cfg.order - 6)? });
    cache.lock().unwrap().insert(key, k.clone());
    Ok(k)
}

impl Kernel {
    fn sum(&self, nodes: &[Node], x: f64, kind: Kind) -> Float {
        let parts: Vec<Float> = nodes
            .par_iter()
            .map(|n| {
                let s = series(x, n.t, &n.g0, kind);
                let ph = x_phase(x, n.t, self.prec);
                Float::with_val(self.prec, ph.real() * s.imag()) + Float::with_val(self.prec, ph.imag() * s.real())
            })
            .collect();
        let mut acc = Float::new(self.prec);
        for p in parts {
            acc -= p;
        }
        acc
    }

    fn transform(&self, x: f64, kind: Kind) -> Result<BesselValue> {
        let high = self.sum(&self.high, x, kind);
        let low = self.sum(&self.low, x, kind);
        let diff = Float::with_val(64, &high - &low).abs().to_f64();
        // |X_{2it}(x)| / cosh(πt) ≤ I_0(x) ≤ e^x beyond the cutoff.
        let t2 = self.t_scale * self.t_scale;
        let tail = (x - self.t_max * self.t_max / t2).exp() * t2 / (2.0 * PI);
        let value = high.to_f64();
        Ok(BesselValue { value, precision_estimate: diff + tail + 1e-16 * value.abs() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// `J_ν(x) = (1/π)∫_0^π cos(νθ − x sin θ) dθ − (sin νπ/π)∫_0^∞ e^{−x sinh u − νu} du`.
    fn schlaefli_j(nu: Complex64, x: f64) -> Complex64 {
        let first = gl_complex(0.0, PI, 400, |th| (nu * th - x * th.sin()).cos()) / PI;
        let second = gl_complex(0.0, 30.0, 3000, |u| (-(x * u.sinh()) - nu * u).exp());
        first - (nu * PI).sin() / PI * second
    }

    fn gl_complex(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let (xs, ws) = gauss_legendre(16);
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in xs.iter().zip(&ws) {
                acc += f(lo + 0.5 * h * (x + 1.0)) * (w * 0.5 * h);
            }
        }
        acc
    }

    #[test]
    fn j_matches_schlaefli_integral() {
        for (t, x) in [(0.3, 1.0), (1.2, 2.5), (2.0, 7.0), (0.05, 0.2)] {
            let ours = bessel_j_imag(t, x, 128).unwrap();
            let ours = Complex64::new(ours.real().to_f64(), ours.imag().to_f64());
            let want = schlaefli_j(Complex64::new(0.0, 2.0 * t), x);
            assert!((ours - want).norm() < 1e-10 * want.norm().max(1.0), "t={t} x={x}: {ours} vs {want}");
        }
    }

    #[test]
    fn j_at_order_zero() {
        for x in [0.5, 3.0, 20.0] {
            let ours = bessel_j_imag(0.0, x, 128).unwrap();
            let want = Float::with_val(128, x).j0();
            assert!(Float::with_val(128, ours.real() - &want).abs() < 1e-35);
        }
    }

    #[test]
    fn k_matches_cosine_integral() {
        // K_{iν}(x) = ∫_0^∞ e^{−x cosh u} cos(νu) du
        for (t, x) in [(0.5, 1.0), (1.5, 3.0), (3.0, 2.0), (0.2, 10.0)] {
            let ours = bessel_k_imag(t, x, 128).unwrap().to_f64();
            let want = gl_complex(0.0, 12.0, 2000, |u| Complex64::new((-(x * u.cosh())).exp() * (2.0 * t * u).cos(), 0.0)).re;
            let scale = (-x).exp().max(want.abs());
            assert!((ours - want).abs() < 1e-12 * scale, "t={t} x={x}: {ours} vs {want}");
        }
    }

    #[test]
    fn big_h_is_close_to_gaussian_moment() {
        let cfg = BesselTransformConfig::new(100.0).unwrap();
        let h = bessel_h(&cfg).unwrap();
        let approx = 100.0f64.powi(2) / (4.0 * PI * PI);
        assert!((h.value / approx - 1.0).abs() < 0.01);
        // tanh(πt) = 1 − 2/(e^{2πt}+1) gives the exact correction
        let corr = composite(20.0, 0.05, 16, |t| 2.0 / ((2.0 * PI * t).exp() + 1.0) * t) / (2.0 * PI * PI);
        assert!((h.value - (approx - corr)).abs() < 1e-9 * approx);
    }

    #[test]
    fn transforms_are_stable_under_refinement() {
        let cfg = BesselTransformConfig::new(6.0).unwrap();
        let fine = cfg.refined();
        for x in [0.3, 2.0, 6.0] {
            let a = bessel_h_plus(x, &cfg).unwrap();
            let b = bessel_h_plus(x, &fine).unwrap();
            assert!((a.value - b.value).abs() <= a.precision_estimate + b.precision_estimate, "{a:?} {b:?}");
            let a = bessel_h_minus(x, &cfg).unwrap();
            let b = bessel_h_minus(x, &fine).unwrap();
            assert!((a.value - b.value).abs() <= a.precision_estimate + b.precision_estimate, "{a:?} {b:?}");
        }
    }

    #[test]
    fn h_minus_matches_k_quadrature() {
        // direct (1/π²)∫_ℝ K_{2it}(x) sinh(πt) h(t) t dt with the K oracle
        let t_scale = 3.0;
        let cfg = BesselTransformConfig::new(t_scale).unwrap();
        let x = 1.5;
        let direct = 2.0 / (PI * PI)
            * composite(30.0, 0.5, 16, |t| {
                if t == 0.0 {
                    return 0.0;
                }
                let k = bessel_k_imag(t, x, 128).unwrap().to_f64();
                k * (PI * t).sinh() * (-(t / t_scale).powi(2)).exp() * t
            });
        let ours = bessel_h_minus(x, &cfg).unwrap();
        assert!((ours.value - direct).abs() < 1e-9 * direct.abs().max(1.0), "{ours:?} vs {direct}");
    }
}
