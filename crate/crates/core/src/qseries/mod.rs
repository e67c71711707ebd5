//! Truncated q-expansions with exact rational coefficients and the
//! Victor–Miller bases of the level-one cusp-form spaces.

pub mod large;
pub mod ntt;

use rug::{Assign, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::sigma;
use crate::error::{Error, Result};
use crate::special::bernoulli;

pub const QSERIES_SCHEMA: &str = "heckelab.qseries.v1";

/// A truncated q-expansion `a_0 + a_1 q + ... + a_N q^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    weight: u32,
    coeffs: Vec<Rational>,
    cuspidal: bool,
}

impl QSeries {
    pub fn new(weight: u32, coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a q-series needs at least the constant term");
        let cuspidal = coeffs[0].is_zero();
        Self { weight, coeffs, cuspidal }
    }

    pub fn from_integers(weight: u32, coeffs: Vec<Integer>) -> Self {
        Self::new(weight, coeffs.into_iter().map(Rational::from).collect())
    }

    /// The constant series 1 of weight 0, the multiplicative identity.
    pub fn one(truncation: usize) -> Self {
        let mut coeffs = vec![Rational::new(); truncation + 1];
        coeffs[0] = Rational::from(1);
        Self::new(0, coeffs)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn is_cuspidal(&self) -> bool {
        self.cuspidal
    }

    /// First index with a nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.truncation());
        Self::new(self.weight, self.coeffs[..=n].to_vec())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| *c.denom() == 1)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.weight, self.coeffs.iter().map(|a| Rational::from(a * c)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| Rational::from(a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| Rational::from(a - b))
    }

    fn combine(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.weight != other.weight {
            return Err(Error::InvalidInput(format!(
                "cannot add series of weights {} and {}",
                self.weight, other.weight
            )));
        }
        let n = self.truncation().min(other.truncation());
        let coeffs = (0..=n).map(|i| op(&self.coeffs[i], &other.coeffs[i])).collect();
        Ok(Self::new(self.weight, coeffs))
    }

    /// Cauchy product truncated at the smaller of the two truncations.
    pub fn multiply(&self, other: &Self) -> Self {
        let n = self.truncation().min(other.truncation());
        let (fa, da) = common_denominator(&self.coeffs[..=n]);
        let (fb, db) = common_denominator(&other.coeffs[..=n]);
        let prod = convolve(&fa, &fb, n);
        let den = Integer::from(&da * &db);
        let coeffs = prod
            .into_iter()
            .map(|c| Rational::from((c, den.clone())))
            .collect();
        Self::new(self.weight + other.weight, coeffs)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.truncation());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.multiply(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base);
            }
        }
        out
    }

    pub fn to_json(&self) -> QSeriesJson {
        QSeriesJson {
            schema: QSERIES_SCHEMA.to_string(),
            weight: self.weight,
            truncation: self.truncation(),
            cuspidal: self.cuspidal,
            coeffs: self.coeffs.iter().map(rational_string).collect(),
        }
    }

    pub fn from_json(json: &QSeriesJson) -> Result<Self> {
        if json.coeffs.len() != json.truncation + 1 {
            return Err(Error::InvalidInput("coefficient count does not match truncation".into()));
        }
        let coeffs = json
            .coeffs
            .iter()
            .map(|s| {
                Rational::parse(s)
                    .map(Rational::from)
                    .map_err(|e| Error::InvalidInput(format!("bad coefficient {s}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(json.weight, coeffs))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QSeriesJson {
    pub schema: String,
    pub weight: u32,
    pub truncation: usize,
    pub cuspidal: bool,
    pub coeffs: Vec<String>,
}

/// `"n"` for integers, `"num/den"` otherwise.
pub fn rational_string(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn common_denominator(coeffs: &[Rational]) -> (Vec<Integer>, Integer) {
    let mut den = Integer::from(1);
    for c in coeffs {
        if *c.denom() != 1 {
            den.lcm_mut(c.denom());
        }
    }
    let scaled = coeffs
        .iter()
        .map(|c| {
            if den == 1 {
                c.numer().clone()
            } else {
                Integer::from(&den / c.denom()) * c.numer()
            }
        })
        .collect();
    (scaled, den)
}

fn convolve(a: &[Integer], b: &[Integer], n: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n + 1];
    let mut tmp = Integer::new();
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            if y.is_zero() {
                continue;
            }
            tmp.assign(x * y);
            out[i + j] += &tmp;
        }
    }
    out
}


fn check_weight(k: u32) -> Result<()> {
    if k % 2 == 1 || k < 4 {
        return Err(Error::InvalidWeight(k as i64));
    }
    Ok(())
}

/// `E_k = 1 − (2k / B_k) Σ σ_{k−1}(n) q^n`.
pub fn eisenstein_series(k: u32, n: usize) -> Result<QSeries> {
    check_weight(k)?;
    let factor = Rational::from(-2 * k as i64) / bernoulli(k as usize);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Rational::from(1));
    for m in 1..=n {
        coeffs.push(Rational::from(&factor * sigma(m as u64, k - 1)));
    }
    Ok(QSeries::new(k, coeffs))
}

/// Coefficients of `∏_{n≥1} (1 − q^n)^3` up to `q^n`, from Jacobi's identity
/// `Σ_{m≥0} (−1)^m (2m+1) q^{m(m+1)/2}`.
pub fn euler_cube(n: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n + 1];
    let mut m = 0usize;
    while m * (m + 1) / 2 <= n {
        let v = (2 * m + 1) as i64;
        out[m * (m + 1) / 2] = Integer::from(if m % 2 == 0 { v } else { -v });
        m += 1;
    }
    out
}

/// `Δ = q ∏ (1 − q^n)^24`, truncated at `q^n`.
pub fn delta_series(n: usize) -> QSeries {
    let n = n.max(1);
    let cube = euler_cube(n - 1);
    let sixth = convolve(&cube, &cube, n - 1);
    let twelfth = convolve(&sixth, &sixth, n - 1);
    let power = convolve(&twelfth, &twelfth, n - 1);
    let mut coeffs = vec![Integer::new(); n + 1];
    for (i, c) in power.into_iter().enumerate() {
        coeffs[i + 1] = c;
    }
    QSeries::from_integers(12, coeffs)
}

pub fn multiply(f: &QSeries, g: &QSeries) -> QSeries {
    f.multiply(g)
}

/// Dimension of the level-one cusp-form space of weight `k`.
pub fn dim_cusp_space(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base - 1
    } else {
        base
    }
}

/// Default truncation for weight `k`.
pub fn default_truncation(k: u32) -> usize {
    200.max(4 * k as usize)
}

/// Exponents `(a, b, c)` of the monomial `E4^a E6^b Δ^c` of weight `k`
/// whose expansion starts at `q^c`.
pub fn vm_monomial_exponents(k: u32) -> Vec<(u32, u32, u32)> {
    let d = dim_cusp_space(k) as u32;
    (1..=d)
        .map(|c| {
            let rest = k - 12 * c;
            let b = if rest % 4 == 0 { 0 } else { 1 };
            ((rest - 6 * b) / 4, b, c)
        })
        .collect()
}

/// The Victor–Miller basis of `S_k` with the exact transform from monomials.
#[derive(Clone, Debug)]
pub struct VictorMillerBasis {
    pub weight: u32,
    pub forms: Vec<QSeries>,
    /// `forms[i] = Σ_c transform[i][c] · monomial_c`.
    pub transform: Vec<Vec<Rational>>,
    pub monomials: Vec<(u32, u32, u32)>,
}

pub fn victor_miller_basis(k: u32, n: usize) -> Result<Vec<QSeries>> {
    Ok(victor_miller(k, n)?.forms)
}

pub fn victor_miller(k: u32, n: usize) -> Result<VictorMillerBasis> {
    if k % 2 == 1 {
        return Err(Error::InvalidWeight(k as i64));
    }
    let d = dim_cusp_space(k);
    let monomials = vm_monomial_exponents(k);
    if d == 0 {
        return Ok(VictorMillerBasis { weight: k, forms: vec![], transform: vec![], monomials });
    }
    if n < d {
        return Err(Error::InsufficientPrecision(format!(
            "truncation {n} is below dim S_{k} = {d}"
        )));
    }
    let e4 = eisenstein_series(4, n)?;
    let e6 = eisenstein_series(6, n)?;
    let delta = delta_series(n);
    let mut forms: Vec<QSeries> = monomials
        .iter()
        .map(|&(a, b, c)| e4.pow(a).multiply(&e6.pow(b)).multiply(&delta.pow(c)))
        .collect();
    let mut transform: Vec<Vec<Rational>> = (0..d)
        .map(|i| (0..d).map(|j| Rational::from((i == j) as i32)).collect())
        .collect();
    for i in (0..d).rev() {
        for j in i + 1..d {
            let c = forms[i].coeff(j + 1).clone();
            if c.is_zero() {
                continue;
            }
            forms[i] = forms[i].sub(&forms[j].scale(&c))?;
            let row_j = transform[j].clone();
            for (t, r) in transform[i].iter_mut().zip(&row_j) {
                *t -= Rational::from(&c * r);
            }
        }
    }
    Ok(VictorMillerBasis { weight: k, forms, transform, monomials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(s: &QSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| c.numer().to_i64().unwrap()).collect()
    }

    fn naive_delta(n: usize) -> Vec<Integer> {
        // q ∏_{m ≤ n} (1 − q^m)^24 by repeated multiplication by (1 − q^m)
        let mut p = vec![Integer::new(); n + 1];
        p[0] = Integer::from(1);
        for m in 1..=n {
            for _ in 0..24 {
                for i in (m..=n).rev() {
                    let t = p[i - m].clone();
                    p[i] -= t;
                }
            }
        }
        let mut out = vec![Integer::new(); n + 1];
        out[1..].clone_from_slice(&p[..n]);
        out
    }

    #[test]
    fn eisenstein_examples() {
        assert_eq!(ints(&eisenstein_series(4, 3).unwrap()), vec![1, 240, 2160, 6720]);
        assert_eq!(ints(&eisenstein_series(6, 1).unwrap()), vec![1, -504]);
        assert_eq!(ints(&eisenstein_series(4, 0).unwrap()), vec![1]);
        assert!(matches!(eisenstein_series(5, 3), Err(Error::InvalidWeight(5))));
        assert!(matches!(eisenstein_series(2, 3), Err(Error::InvalidWeight(2))));
    }

    #[test]
    fn eisenstein_weight_12_has_rational_coefficients() {
        let e12 = eisenstein_series(12, 2).unwrap();
        assert_eq!(*e12.coeff(1), Rational::from((65520, 691)));
    }

    #[test]
    fn delta_matches_product_expansion() {
        assert_eq!(ints(&delta_series(3)), vec![0, 1, -24, 252]);
        assert_eq!(ints(&delta_series(1)), vec![0, 1]);
        assert_eq!(*delta_series(5).coeff(5), 4830);
        let d = delta_series(60);
        assert_eq!(d.coeffs().iter().map(|c| c.numer().clone()).collect::<Vec<_>>(), naive_delta(60));
        assert!(d.is_cuspidal());
    }

    #[test]
    fn products() {
        let d = delta_series(3);
        let dd = d.multiply(&d);
        assert_eq!(ints(&dd), vec![0, 0, 1, -48]);
        assert_eq!(dd.weight(), 24);
        assert_eq!(d.multiply(&QSeries::one(3)), d);
        let e = eisenstein_series(4, 5).unwrap().multiply(&eisenstein_series(6, 5).unwrap());
        assert_eq!(*e.coeff(1), -264);
        let short = delta_series(10).multiply(&eisenstein_series(4, 4).unwrap());
        assert_eq!(short.truncation(), 4);
    }

    #[test]
    fn ring_identity() {
        let n = 200;
        let e4 = eisenstein_series(4, n).unwrap();
        let e6 = eisenstein_series(6, n).unwrap();
        let lhs = e4.pow(3).sub(&e6.pow(2)).unwrap();
        assert_eq!(lhs, delta_series(n).scale(&Rational::from(1728)));
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_cusp_space(12), 1);
        assert_eq!(dim_cusp_space(26), 1);
        assert_eq!(dim_cusp_space(2), 0);
        assert_eq!(dim_cusp_space(14), 0);
        assert_eq!(dim_cusp_space(24), 2);
        // dim S_k = dim M_{k-12} = #{(a, b) : 4a + 6b = k - 12}, the monomial oracle
        for k in (12..=120).step_by(2) {
            let r = k - 12;
            let count = (0..=r / 6).filter(|b| (r - 6 * b) % 4 == 0).count();
            let modular_forms = (0..=k / 4)
                .flat_map(|a| (0..=k / 6).map(move |b| (a, b)))
                .filter(|&(a, b)| 4 * a + 6 * b == k)
                .count();
            assert_eq!(dim_cusp_space(k as u32), modular_forms - 1, "k={k}");
            assert_eq!(dim_cusp_space(k as u32), count, "k={k}");
        }
    }

    #[test]
    fn victor_miller_examples() {
        let b12 = victor_miller_basis(12, 20).unwrap();
        assert_eq!(b12, vec![delta_series(20)]);
        assert!(victor_miller_basis(10, 20).unwrap().is_empty());
        let b24 = victor_miller_basis(24, 10).unwrap();
        assert_eq!(b24.len(), 2);
        assert_eq!(ints(&b24[0])[..3], [0, 1, 0]);
        assert_eq!(ints(&b24[1])[..3], [0, 0, 1]);
        assert!(matches!(victor_miller_basis(36, 2), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn victor_miller_echelon_and_transform() {
        for k in (12..=60).step_by(2) {
            let vm = victor_miller(k, 80).unwrap();
            let d = dim_cusp_space(k);
            for (i, f) in vm.forms.iter().enumerate() {
                assert!(f.is_integral());
                for j in 1..=d {
                    assert_eq!(*f.coeff(j), (i + 1 == j) as i32, "k={k}");
                }
            }
            let e4 = eisenstein_series(4, 80).unwrap();
            let e6 = eisenstein_series(6, 80).unwrap();
            let delta = delta_series(80);
            for (i, f) in vm.forms.iter().enumerate() {
                let mut acc = QSeries::new(k, vec![Rational::new(); 81]);
                for (c, &(a, b, e)) in vm.monomials.iter().enumerate() {
                    let m = e4.pow(a).multiply(&e6.pow(b)).multiply(&delta.pow(e));
                    acc = acc.add(&m.scale(&vm.transform[i][c])).unwrap();
                }
                assert_eq!(&acc, f);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = eisenstein_series(12, 4).unwrap();
        let json = s.to_json();
        assert_eq!(json.coeffs[1], "65520/691");
        let text = serde_json::to_string(&json).unwrap();
        let back: QSeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(QSeries::from_json(&back).unwrap(), s);
    }

    proptest! {
        #[test]
        fn product_is_commutative_and_distributive(
            a in proptest::collection::vec(-50i64..50, 12),
            b in proptest::collection::vec(-50i64..50, 12),
            c in proptest::collection::vec(-50i64..50, 12),
        ) {
            let mk = |v: &Vec<i64>| QSeries::from_integers(4, v.iter().map(|&x| Integer::from(x)).collect());
            let (a, b, c) = (mk(&a), mk(&b), mk(&c));
            prop_assert_eq!(a.multiply(&b), b.multiply(&a));
            prop_assert_eq!(a.multiply(&b.add(&c).unwrap()), a.multiply(&b).add(&a.multiply(&c)).unwrap());
        }

        #[test]
        fn ring_identity_any_truncation(n in 1usize..120) {
            let e4 = eisenstein_series(4, n).unwrap();
            let e6 = eisenstein_series(6, n).unwrap();
            let lhs = e4.pow(3).sub(&e6.pow(2)).unwrap();
            prop_assert_eq!(lhs, delta_series(n).scale(&Rational::from(1728)));
        }
    }
}
