//! Self-checking suites over the exact identities and numerical envelopes of
//! the library. Each suite returns a list of named checks with the measured
//! quantity and the limit it is held to.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gcd, primes_up_to};
use crate::error::{Error, Result};
use crate::geometry::FundamentalDomainMesh;
use crate::hecke::{
    big_lambda, eigenforms_with_precision, power_expansion_coefficients, sym2_twist_closed_form, SatakeParameter,
};
use crate::lfunctions::stirling_suite;
use crate::moments::{
    cfkrs_local_check, combinatorial_bound_check, decorrelation_report, first_moment_triple, joint_mass_report,
    parseval_check, Workspace,
};
use crate::precision::{pi, DEFAULT_PRECISION, MIN_PRECISION};
use crate::qseries::{delta_series, dim_cusp_space, eisenstein_series};
use crate::spectral::{
    bessel_h, bessel_h_minus, bessel_h_plus, kuznetsov_geometric_side, petersson_delta_check,
    petersson_kloosterman_side, weil_bound_check, BesselTransformConfig,
};

pub const VERIFY_SCHEMA: &str = "heckelab.verify.v1";

/// Weight pairs `(k, i, ℓ, j)` of the Parseval, Watson and first-moment checks.
pub const MOMENT_LADDER: [(u32, usize, u32, usize); 3] = [(12, 0, 16, 0), (16, 0, 20, 0), (24, 0, 24, 1)];

/// Weights of the Petersson delta check.
pub const DELTA_WEIGHTS: [u32; 5] = [12, 16, 20, 24, 30];

/// Single constant for `|H⁺(x)| ≤ C·Tx` and `|H⁻(x)| ≤ C·T^{3/2}x^{1/2}`.
pub const BESSEL_ENVELOPE_CONSTANT: f64 = 0.01;

/// Exponent standing in for `T^{1+ε}` in the Kuznetsov off-diagonal bound.
pub const KUZNETSOV_EXPONENT: f64 = 1.1;

/// Constant of the Kuznetsov off-diagonal bound `C·√(mn)·T^{1.1}`.
pub const KUZNETSOV_CONSTANT: f64 = 1.0;

const SEED: u64 = 0x4845_434b;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Stirling,
    Weil,
    Bessel,
    PeterssonDelta,
    Parseval,
    Cfkrs,
    Combinatorial,
    HeckeRelations,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::HeckeRelations,
        Suite::Stirling,
        Suite::Combinatorial,
        Suite::Cfkrs,
        Suite::Weil,
        Suite::Bessel,
        Suite::PeterssonDelta,
        Suite::Parseval,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Stirling => "stirling",
            Suite::Weil => "weil",
            Suite::Bessel => "bessel",
            Suite::PeterssonDelta => "petersson-delta",
            Suite::Parseval => "parseval",
            Suite::Cfkrs => "cfkrs",
            Suite::Combinatorial => "combinatorial",
            Suite::HeckeRelations => "hecke-relations",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity.
    pub value: f64,
    /// The limit it is compared with.
    pub limit: f64,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, limit }
    }

    /// Passes when `value ≥ limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value >= limit, value, limit }
    }

    pub fn exact(name: impl Into<String>, passed: bool) -> Self {
        let v = if passed { 0.0 } else { 1.0 };
        Self { name: name.into(), passed, value: v, limit: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Recorded quantities that are not asserted.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self { suite, checks: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub precision_bits: u32,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs suites against one analyzed-eigenform cache.
pub struct Verifier {
    pub precision: u32,
    pub workspace: Workspace,
}

impl Default for Verifier {
    fn default() -> Self {
        Self { precision: DEFAULT_PRECISION, workspace: Workspace::new(FundamentalDomainMesh::default()) }
    }
}

impl Verifier {
    pub fn new(precision: u32, mesh: FundamentalDomainMesh) -> Result<Self> {
        if precision < MIN_PRECISION {
            return Err(Error::InsufficientPrecision(format!(
                "{precision} bits is below the minimum of {MIN_PRECISION}"
            )));
        }
        Ok(Self { precision, workspace: Workspace::new(mesh) })
    }

    pub fn run(&mut self, suite: Suite) -> Result<SuiteReport> {
        match suite {
            Suite::Stirling => stirling(self.precision),
            Suite::Weil => weil(),
            Suite::Bessel => bessel(),
            Suite::PeterssonDelta => petersson_delta(&mut self.workspace),
            Suite::Parseval => parseval(&mut self.workspace),
            Suite::Cfkrs => cfkrs(&mut self.workspace),
            Suite::Combinatorial => combinatorial(),
            Suite::HeckeRelations => hecke_relations(self.precision),
        }
    }

    pub fn run_all(&mut self, suites: &[Suite]) -> Result<VerifyReport> {
        let mut out = Vec::with_capacity(suites.len());
        for &s in suites {
            log::info!("running suite {}", s.name());
            out.push(self.run(s)?);
        }
        Ok(VerifyReport {
            schema: VERIFY_SCHEMA.into(),
            precision_bits: self.precision,
            passed: out.iter().all(SuiteReport::passed),
            suites: out,
        })
    }
}

/// `E4³ − E6² = 1728Δ` with exact coefficients to `q^n`.
pub fn ring_identity(n: usize) -> Result<bool> {
    let e4 = eisenstein_series(4, n)?;
    let e6 = eisenstein_series(6, n)?;
    let lhs = e4.pow(3).sub(&e6.pow(2))?;
    Ok(lhs == delta_series(n).scale(&Rational::from(1728)))
}

fn hecke_relations(prec: u32) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::HeckeRelations);
    r.checks.push(Check::exact("ring identity E4^3 - E6^2 = 1728 Delta to q^200", ring_identity(200)?));

    let mut worst_mult: f64 = 0.0;
    let mut worst_deligne: f64 = 0.0;
    let mut complete = true;
    for k in (12..=40u32).step_by(2) {
        let forms = eigenforms_with_precision(k, 100, prec)?;
        complete &= forms.len() == dim_cusp_space(k);
        for f in &forms {
            for m in 1..=100usize {
                for n in m..=100 / m {
                    let lhs = Float::with_val(prec, f.lambda(m) * f.lambda(n));
                    let mut rhs = Float::new(prec);
                    for d in divisors(gcd(m as u64, n as u64)) {
                        rhs += f.lambda(m * n / (d * d) as usize);
                    }
                    let scale = Float::with_val(64, lhs.abs_ref()).max(&Float::with_val(64, 1));
                    let rel = Float::with_val(64, lhs - rhs).abs() / scale;
                    worst_mult = worst_mult.max(rel.to_f64());
                }
            }
            for p in primes_up_to(97) {
                worst_deligne = worst_deligne.max(f.lambda_f64(p as usize).abs());
            }
        }
    }
    r.checks.push(Check::exact("eigenbasis size equals dim S_k for even 12 <= k <= 40", complete));
    r.checks.push(Check::at_most("Hecke multiplicativity for mn <= 100 (relative)", worst_mult, 1e-20));
    r.checks.push(Check::at_most("Deligne bound |lambda(p)| for p <= 97", worst_deligne, 2.0 + 1e-20));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let p = 128;
    let mut worst_power: f64 = 0.0;
    for _ in 0..200 {
        let theta = Float::with_val(p, rng.gen_range(1e-3..PI - 1e-3));
        let sin = Float::with_val(p, theta.sin_ref());
        let two_cos = Float::with_val(p, theta.cos_ref()) * 2u32;
        for alpha in 0..=10u32 {
            let lhs = Float::with_val(p, two_cos.clone().pow(alpha));
            let mut rhs = Float::new(p);
            for (beta, b) in power_expansion_coefficients(alpha).iter().enumerate() {
                let u = Float::with_val(p, Float::with_val(p, &theta * (beta as u32 + 1)).sin()) / &sin;
                rhs += u * b;
            }
            worst_power = worst_power.max(Float::with_val(p, lhs - rhs).abs().to_f64());
        }
    }
    r.checks.push(Check::at_most("power expansion vs Chebyshev, 200 angles, alpha <= 10", worst_power, 1e-12));

    let worst_lambda = lambda_identities(&mut rng, 200, p);
    r.checks.push(Check::at_most("Lambda identities on 200 unit-circle parameters", worst_lambda, 1e-14));
    Ok(r)
}

/// Largest deviation of the closed forms `Λ(p²) = λ(p²) − 1`,
/// `Λ_{sym²f×u}(p) = λ_f(p²)λ_u(p)` and
/// `Λ_{sym²f×u}(p²) = (λ_f(p⁴) − λ_f(p²) + 1)(λ_u(p²) − 1)` from the sums of
/// powers of the Satake products.
pub fn lambda_identities(rng: &mut impl Rng, samples: usize, prec: u32) -> f64 {
    let mut worst: f64 = 0.0;
    let tau = Float::with_val(prec, pi(prec) * 2u32);
    for _ in 0..samples {
        let tf = Float::with_val(prec, &tau * rng.gen::<f64>());
        let tu = Float::with_val(prec, &tau * rng.gen::<f64>());
        let f = SatakeParameter::from_angle(2, tf);
        let u = SatakeParameter::from_angle(2, tu);
        let a = &f.alpha;
        let b = &u.alpha;
        let ai = Complex::with_val(prec, a.conj_ref());
        let bi = Complex::with_val(prec, b.conj_ref());
        let power_sum = |xs: &[Complex], e: i32| -> Float {
            let mut acc = Complex::new(prec);
            for x in xs {
                acc += x.clone().pow(e);
            }
            Float::with_val(prec, acc.real())
        };
        let diff = |x: Float, y: Float| Float::with_val(64, x - y).abs().to_f64();

        let lf2 = f.lambda_power(2);
        let lf4 = f.lambda_power(4);
        worst = worst.max(diff(power_sum(&[a.clone(), ai.clone()], 2), Float::with_val(prec, &lf2 - 1u32)));
        worst = worst.max(diff(big_lambda(&f, 2), Float::with_val(prec, &lf2 - 1u32)));

        let sym2f = [Complex::with_val(prec, a.square_ref()), Complex::with_val(prec, (1, 0)), Complex::with_val(prec, ai.square_ref())];
        let mut products = Vec::with_capacity(6);
        for x in &sym2f {
            products.push(Complex::with_val(prec, x * b));
            products.push(Complex::with_val(prec, x * &bi));
        }
        let c1 = sym2_twist_closed_form(&lf2, &lf4, &u, 1).expect("c = 1");
        let c2 = sym2_twist_closed_form(&lf2, &lf4, &u, 2).expect("c = 2");
        worst = worst.max(diff(power_sum(&products, 1), c1));
        worst = worst.max(diff(power_sum(&products, 2), c2));
    }
    worst
}

fn stirling(prec: u32) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Stirling);
    let rows = stirling_suite(prec)?;
    let regimes = [
        (crate::lfunctions::StirlingRegime::Small, "|t| <= k^(2/3): ratio <= 10 exp(-t^2/2k)/sqrt(k)"),
        (crate::lfunctions::StirlingRegime::LargeT, "|t| >= 100k: ratio <= exp(-|t|/2)"),
        (crate::lfunctions::StirlingRegime::Large, "|t| >= k^(2/3): ratio <= 10 exp(-k^(1/3)/4)"),
        (crate::lfunctions::StirlingRegime::All, "all t: ratio <= 10/sqrt(k)"),
    ];
    for (regime, name) in regimes {
        let worst = rows
            .iter()
            .filter(|row| row.regime == regime)
            .map(|row| row.ln_ratio - row.ln_bound)
            .fold(f64::NEG_INFINITY, f64::max);
        r.checks.push(Check::at_most(format!("{name} (max log ratio/bound)"), worst, 0.0));
    }
    r.notes.push(format!("{} grid points", rows.len()));
    Ok(r)
}

fn weil() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Weil);
    let report = weil_bound_check(30, 500, false)?;
    r.checks.push(Check::at_most("Weil bound for c <= 500, 1 <= m, n <= 30 (max |S|/bound)", report.worst.ratio, 1.0 + 1e-12));
    r.notes.push(format!("{} triples checked", report.checked));
    r.notes.push(format!("largest distance of a Kloosterman sum to an integer: {:.6}", report.max_rounding_defect));
    Ok(r)
}

/// Log-spaced grid of `n` points on `[0.1, t]`.
pub fn envelope_grid(t: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.1 * (t / 0.1).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Largest `|H⁺(x)|/(Tx)` and `|H⁻(x)|/(T^{3/2}x^{1/2})` over the grid.
pub fn bessel_envelope(t: f64, grid: &[f64]) -> Result<(f64, f64)> {
    let cfg = BesselTransformConfig::new(t)?;
    let vals: Vec<Result<(f64, f64)>> = grid
        .par_iter()
        .map(|&x| {
            let p = bessel_h_plus(x, &cfg)?;
            let m = bessel_h_minus(x, &cfg)?;
            let cp = (p.value.abs() + p.precision_estimate) / (t * x);
            let cm = (m.value.abs() + m.precision_estimate) / (t.powf(1.5) * x.sqrt());
            Ok((cp, cm))
        })
        .collect();
    let mut c = (0.0f64, 0.0f64);
    for v in vals {
        let (cp, cm) = v?;
        c = (c.0.max(cp), c.1.max(cm));
    }
    Ok(c)
}

fn bessel() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Bessel);
    let t = 100.0;
    let h = bessel_h(&BesselTransformConfig::new(t)?)?;
    let main = t * t / (4.0 * PI * PI);
    r.checks.push(Check::at_most("H at T = 100 vs T^2/4pi^2 (relative)", (h.value - main).abs() / main, 0.01));
    let mut c: f64 = 0.0;
    for t in [10.0, 50.0] {
        let (cp, cm) = bessel_envelope(t, &envelope_grid(t, 12))?;
        r.notes.push(format!("T = {t}: C+ = {cp:.4e}, C- = {cm:.4e}"));
        c = c.max(cp).max(cm);
    }
    r.checks.push(Check::at_most("single envelope constant over x in [0.1, T], T in {10, 50}", c, BESSEL_ENVELOPE_CONSTANT));
    for (m, n) in [(1u64, 1u64), (2, 3)] {
        let t = 50.0;
        let k = kuznetsov_geometric_side(m, n, t, 8)?;
        let limit = KUZNETSOV_CONSTANT * ((m * n) as f64).sqrt() * t.powf(KUZNETSOV_EXPONENT);
        r.checks.push(Check::at_most(
            format!("Kuznetsov off-diagonal plus tail, (m, n) = ({m}, {n}), T = 50"),
            k.off_diagonal.abs() + k.truncation_bound,
            limit,
        ));
    }
    Ok(r)
}

/// `(k, m, n, deviation, Kloosterman side, its tail)` for every point of the
/// delta check.
pub fn petersson_delta_rows(ws: &mut Workspace) -> Result<Vec<(u32, u64, u64, f64, f64, f64)>> {
    let mut rows = Vec::new();
    for k in DELTA_WEIGHTS {
        let forms = ws.forms(k)?.to_vec();
        for (m, n) in [(1u64, 1u64), (1, 2)] {
            let dev = petersson_delta_check(&forms, m, n)?;
            let (side, tail) = petersson_kloosterman_side(k, m, n, 64)?;
            rows.push((k, m, n, dev, side, tail));
        }
    }
    Ok(rows)
}

fn petersson_delta(ws: &mut Workspace) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::PeterssonDelta);
    for (k, m, n, dev, side, tail) in petersson_delta_rows(ws)? {
        r.checks.push(Check::at_most(format!("k = {k}: |LHS({m}, {n}) - delta|"), dev.abs(), 1e-3));
        r.checks.push(Check::at_most(
            format!("k = {k}: deviation vs Kloosterman-Bessel side at ({m}, {n})"),
            (dev - side).abs(),
            1e-8 + tail,
        ));
    }
    Ok(r)
}

fn parseval(ws: &mut Workspace) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Parseval);
    let mesh = ws.mesh.clone();
    for (k, i, l, j) in MOMENT_LADDER {
        let f = ws.form(k, i)?;
        let g = ws.form(l, j)?;
        let basis = ws.forms(k + l)?.to_vec();
        let tag = format!("({}, {})", f.id(), g.id());
        let pc = parseval_check(&f, &g, &basis, &mesh)?;
        r.checks.push(Check::at_most(format!("{tag}: <fg, fg> quadrature vs Parseval (relative)"), pc.relative_gap(), 1e-6));
        let moment = first_moment_triple(&f, &g, &basis, &mesh)?;
        let lowest = moment.rows.iter().map(|row| row.central_value).fold(f64::INFINITY, f64::min);
        r.checks.push(Check::at_least(format!("{tag}: smallest extracted L(1/2, f x g x h)"), lowest, -1e-8));
        r.checks.push(Check::at_least(format!("{tag}: nonvanishing count"), moment.nonvanishing as f64, 1.0));
        r.checks.push(Check::at_most(format!("{tag}: first moment routes (a) vs (b) (relative)"), moment.relative_gap(), 1e-6));
        r.notes.push(format!("{tag}: first moment {:.15e}, main term {:.15e}, ratio {:.15e}", moment.lhs_parseval, moment.main_term, moment.ratio));
        let jm = joint_mass_report(&f, &g, &basis, &mesh)?;
        r.checks.push(Check::at_most(format!("{tag}: joint mass quadrature vs Parseval (relative)"), jm.relative_gap(), 1e-6));
        r.notes.push(format!("{tag}: joint mass {:.15e}", jm.ratio()));
        if k == l {
            let basis2 = ws.forms(2 * k)?.to_vec();
            let d = decorrelation_report(&f, &g, &basis2, &mesh)?;
            r.checks.push(Check::at_least(
                format!("{tag}: diagonal minus |decorrelation|"),
                d.diagonal_quadrature.value.re - d.quadrature.value.norm(),
                f64::MIN_POSITIVE,
            ));
            r.checks.push(Check::at_most(format!("{tag}: decorrelation quadrature vs Parseval (relative)"), d.relative_gap(), 1e-6));
        }
    }
    Ok(r)
}

fn cfkrs(ws: &mut Workspace) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Cfkrs);
    let f = ws.form(12, 0)?;
    let g = ws.form(16, 0)?;
    let primes = primes_up_to(97);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = primes[rng.gen_range(0..primes.len())];
        let s = Complex::with_val(128, (rng.gen_range(0.5..3.0), rng.gen_range(-20.0..20.0)));
        worst = worst.max(cfkrs_local_check(&f, &g, p, &s)?);
    }
    r.checks.push(Check::at_most("exterior square vs sym2 x sym2 local factors, 100 random (p, s)", worst, 1e-20));
    Ok(r)
}

fn combinatorial() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Combinatorial);
    let report = combinatorial_bound_check(8)?;
    r.checks.push(Check::exact(format!("all {} compositions of r <= 8", report.compositions), true));
    r.notes.push(format!("{} equalities, max ratio {}", report.equalities, report.max_ratio));
    Ok(r)
}
