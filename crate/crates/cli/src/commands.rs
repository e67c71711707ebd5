//! Subcommand bodies. Each returns the rendered report and whether its checks passed.

use std::fmt::Write as _;

use heckelab::geometry::petersson_inner;
use heckelab::hecke::{eigenforms_with_precision, EigenformJson, HeckeEigenform, EIGENFORM_SCHEMA};
use heckelab::lfunctions::{sym2_l_afe, sym2_l_from_norm, AfeConfig, LValueJson, LVALUE_SCHEMA, SYM2_CROSS_TOLERANCE};
use heckelab::moments::{first_moment_triple, prime_sum_experiment, PrimeSumKind, Workspace};
use heckelab::precision::{decimal_digits, to_decimal};
use heckelab::qseries::{default_truncation, rational_string, victor_miller, QSeriesJson, QSERIES_SCHEMA};
use heckelab::verify::{Suite, Verifier};
use heckelab::{Error, Result};
use rug::Complex;
use serde::Serialize;

use crate::config::{Format, RunConfig};

/// Largest relative gap accepted between the two first-moment routes.
pub const MOMENT_ROUTE_TOLERANCE: f64 = 1e-6;

pub struct Output {
    pub text: String,
    pub passed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn truncation(config: &RunConfig, n: Option<usize>, k: u32) -> usize {
    n.or(config.truncation).unwrap_or_else(|| default_truncation(k))
}

#[derive(Serialize)]
struct BasisJson {
    schema: &'static str,
    weight: u32,
    truncation: usize,
    monomials: Vec<[u32; 3]>,
    forms: Vec<QSeriesJson>,
}

pub fn basis(config: &RunConfig, k: u32, n: Option<usize>) -> Result<Output> {
    let n = truncation(config, n, k);
    let vm = victor_miller(k, n)?;
    let text = match config.format {
        Format::Json => json(&BasisJson {
            schema: QSERIES_SCHEMA,
            weight: k,
            truncation: n,
            monomials: vm.monomials.iter().map(|&(a, b, c)| [a, b, c]).collect(),
            forms: vm.forms.iter().map(|f| f.to_json()).collect(),
        }),
        Format::Csv => {
            let mut out = String::from("n");
            for i in 0..vm.forms.len() {
                let _ = write!(out, ",f{}", i + 1);
            }
            out.push('\n');
            for j in 0..=n {
                out.push_str(&j.to_string());
                for f in &vm.forms {
                    let _ = write!(out, ",{}", rational_string(f.coeff(j)));
                }
                out.push('\n');
            }
            out
        }
        Format::Pretty => {
            let mut out = format!("Victor-Miller basis of S_{k} (dimension {}, q^{n})\n", vm.forms.len());
            for (i, f) in vm.forms.iter().enumerate() {
                let terms: Vec<String> = (1..=n.min(6)).map(|j| format!("{} q^{j}", rational_string(f.coeff(j)))).collect();
                let _ = writeln!(out, "f{} = {} + ...", i + 1, terms.join(" + "));
            }
            out
        }
    };
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct SatakeJson {
    p: u64,
    theta: String,
}

#[derive(Serialize)]
struct EigenformEntry {
    eigenform: EigenformJson,
    satake: Vec<SatakeJson>,
}

#[derive(Serialize)]
struct EigenformTable {
    schema: &'static str,
    weight: u32,
    truncation: usize,
    precision_bits: u32,
    forms: Vec<EigenformEntry>,
}

fn satake_angles(f: &HeckeEigenform) -> Result<Vec<SatakeJson>> {
    let digits = decimal_digits(f.precision);
    heckelab::arith::primes_up_to(f.truncation as u64)
        .into_iter()
        .map(|p| Ok(SatakeJson { p, theta: to_decimal(&f.satake(p)?.theta, digits) }))
        .collect()
}

pub fn eigenforms(config: &RunConfig, k: u32, n: Option<usize>) -> Result<Output> {
    let n = truncation(config, n, k);
    let forms = eigenforms_with_precision(k, n, config.precision_bits)?;
    let entries = forms
        .iter()
        .map(|f| Ok(EigenformEntry { eigenform: f.to_json(), satake: satake_angles(f)? }))
        .collect::<Result<Vec<_>>>()?;
    let text = match config.format {
        Format::Json => json(&EigenformTable {
            schema: EIGENFORM_SCHEMA,
            weight: k,
            truncation: n,
            precision_bits: config.precision_bits,
            forms: entries,
        }),
        Format::Csv => {
            let mut out = String::from("form,n,a,lambda,theta\n");
            for (f, e) in forms.iter().zip(&entries) {
                for j in 1..=n {
                    let theta = e.satake.iter().find(|s| s.p == j as u64).map_or("", |s| s.theta.as_str());
                    let _ = writeln!(out, "{},{j},{},{},{theta}", f.id(), e.eigenform.a[j], e.eigenform.lambda[j]);
                }
            }
            out
        }
        Format::Pretty => {
            let mut out = format!("Hecke eigenforms of S_{k}: {}\n", forms.len());
            for (f, e) in forms.iter().zip(&entries) {
                let _ = writeln!(out, "{} (field degree {})", f.id(), f.field_degree);
                for s in e.satake.iter().take(5) {
                    let _ = writeln!(out, "  p = {:<3} lambda = {:>22.18}  theta = {:.18}", s.p, f.lambda_f64(s.p as usize), f.satake(s.p)?.theta.to_f64());
                }
            }
            out
        }
    };
    Ok(Output::ok(text))
}

#[derive(Serialize)]
struct LValueRow {
    form: String,
    series: LValueJson,
    norm_relation: LValueJson,
    relative_difference: f64,
    agrees: bool,
}

#[derive(Serialize)]
struct LValueTable {
    schema: &'static str,
    weight: u32,
    tolerance: f64,
    rows: Vec<LValueRow>,
}

pub fn lvalues(config: &RunConfig, k: u32) -> Result<Output> {
    let n = truncation(config, None, k);
    let forms = eigenforms_with_precision(k, n, config.precision_bits)?;
    let afe = AfeConfig::default();
    let one = Complex::with_val(afe.prec, (1, 0));
    let mut rows = Vec::with_capacity(forms.len());
    for f in &forms {
        let series = sym2_l_afe(f, &one, &afe)?;
        let norm = petersson_inner(f, f, &config.mesh)?;
        let from_norm = sym2_l_from_norm(k, &norm, afe.prec);
        let rel = (series.to_f64() - from_norm.to_f64()).abs() / series.to_f64().abs();
        rows.push(LValueRow {
            form: f.id(),
            series: series.to_json(),
            norm_relation: from_norm.to_json(),
            relative_difference: rel,
            agrees: rel <= SYM2_CROSS_TOLERANCE,
        });
    }
    let passed = rows.iter().all(|r| r.agrees);
    let text = match config.format {
        Format::Json => json(&LValueTable { schema: LVALUE_SCHEMA, weight: k, tolerance: SYM2_CROSS_TOLERANCE, rows }),
        Format::Csv => {
            let mut out = String::from("form,series,series_error,norm_relation,norm_relation_error,relative_difference,agrees\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:.3e},{}",
                    r.form, r.series.re, r.series.precision_estimate, r.norm_relation.re, r.norm_relation.precision_estimate, r.relative_difference, r.agrees
                );
            }
            out
        }
        Format::Pretty => {
            let mut out = format!("L(1, sym^2 f) on S_{k}\n");
            for r in &rows {
                let mark = if r.agrees { "ok" } else { "MISMATCH" };
                let _ = writeln!(out, "{}  series {}  norm {}  rel {:.2e}  {mark}", r.form, r.series.re, r.norm_relation.re, r.relative_difference);
            }
            out
        }
    };
    Ok(Output { text, passed })
}

pub fn moment(config: &RunConfig, k: u32, l: u32, fi: usize, gi: usize) -> Result<Output> {
    let mut ws = Workspace::new(config.mesh.clone());
    let f = ws.form(k, fi)?;
    let g = ws.form(l, gi)?;
    let basis = ws.forms(k + l)?.to_vec();
    let report = first_moment_triple(&f, &g, &basis, &config.mesh)?;
    let passed = report.relative_gap() <= MOMENT_ROUTE_TOLERANCE;
    let text = match config.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Pretty => {
            let mut out = format!("First moment for ({}, {}) over S_{}\n", report.f, report.g, k + l);
            for r in &report.rows {
                let _ = writeln!(out, "  {}  L(1/2, f x g x h) = {:.15e} +- {:.1e}", r.h, r.central_value, r.central_error);
            }
            let _ = writeln!(out, "  Parseval route   {:.15e} +- {:.1e}", report.lhs_parseval, report.lhs_parseval_error);
            let _ = writeln!(out, "  quadrature route {:.15e} +- {:.1e}", report.lhs_quadrature, report.lhs_quadrature_error);
            let _ = writeln!(out, "  relative gap     {:.2e}", report.relative_gap());
            let _ = writeln!(out, "  main term        {:.15e}", report.main_term);
            let _ = writeln!(out, "  ratio            {:.15e}", report.ratio);
            let _ = writeln!(out, "  nonvanishing     {}", report.nonvanishing);
            out
        }
    };
    Ok(Output { text, passed })
}

pub fn parse_suites(name: &str) -> Result<Vec<Suite>> {
    if name == "all" {
        Ok(Suite::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

pub fn verify(config: &RunConfig, suite: &str) -> Result<Output> {
    let suites = parse_suites(suite)?;
    let mut verifier = Verifier::new(config.precision_bits, config.mesh.clone())?;
    let report = verifier.run_all(&suites)?;
    for s in &report.suites {
        for c in s.failures() {
            eprintln!("FAIL {} {} value={:e} limit={:e}", s.suite.name(), c.name, c.value, c.limit);
        }
    }
    let text = match config.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut out = String::from("suite,check,passed,value,limit\n");
            for s in &report.suites {
                for c in &s.checks {
                    let _ = writeln!(out, "{},{},{},{:e},{:e}", s.suite.name(), c.name, c.passed, c.value, c.limit);
                }
            }
            out
        }
        Format::Pretty => {
            let mut out = String::new();
            for s in &report.suites {
                let mark = if s.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{mark} {} ({} checks)", s.suite.name(), s.checks.len());
                for c in s.failures() {
                    let _ = writeln!(out, "  failed {}: {:e} vs {:e}", c.name, c.value, c.limit);
                }
                for n in &s.notes {
                    let _ = writeln!(out, "  note: {n}");
                }
            }
            out
        }
    };
    Ok(Output { text, passed: report.passed })
}

pub fn primesum(config: &RunConfig, k: u32, fi: usize, kind: &str, x_max: u64, gi: Option<usize>) -> Result<Output> {
    let kind: PrimeSumKind = kind.parse()?;
    let n = truncation(config, None, k);
    let forms = eigenforms_with_precision(k, n, config.precision_bits)?;
    let pick = |i: usize| {
        forms.get(i).ok_or_else(|| Error::InvalidInput(format!("S_{k} has no eigenform with index {i}")))
    };
    let f = pick(fi)?;
    let g = match (kind, gi) {
        (PrimeSumKind::RankinPair, Some(i)) => Some(pick(i)?),
        (PrimeSumKind::RankinPair, None) => Some(f),
        (_, Some(_)) => return Err(Error::InvalidInput("--with applies only to rankin_pair".into())),
        (_, None) => None,
    };
    let table = prime_sum_experiment(f, g, x_max, kind)?;
    let text = match config.format {
        Format::Json => json(&table),
        Format::Csv => table.to_csv(),
        Format::Pretty => {
            let name = serde_json::to_value(kind).expect("kind serializes");
            let mut out = format!("{} for {} up to {}\n", name.as_str().unwrap_or_default(), table.f, table.x_max);
            for c in &table.checkpoints {
                let _ = writeln!(out, "  x = {:>8}  primes = {:>6}  sum = {:+.12}", c.x, c.primes, c.sum);
            }
            let _ = writeln!(out, "  max |sum| = {:.6}, within envelope: {}", table.max_abs, table.within_envelope);
            out
        }
    };
    Ok(Output::ok(text))
}
