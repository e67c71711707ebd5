//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with the measured quantities, then asserts.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use heckelab::arith::{divisors, gcd, primes_up_to};
use heckelab::geometry::FundamentalDomainMesh;
use heckelab::hecke::{eigenforms, power_expansion_coefficients};
use heckelab::lfunctions::{stirling_suite, StirlingRegime};
use heckelab::moments::{
    cfkrs_local_check, combinatorial_bound_check, decorrelation_report, first_moment_triple, parseval_check,
    prime_sum_experiment, PrimeSumKind, Workspace,
};
use heckelab::qseries::{delta_series, dim_cusp_space};
use heckelab::spectral::{
    bessel_h, petersson_delta_check, petersson_kloosterman_side, weil_bound_check, BesselTransformConfig,
};
use heckelab::verify::{bessel_envelope, envelope_grid, lambda_identities, ring_identity, MOMENT_LADDER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde_json::Value;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(name: &str, pass: bool, elapsed: Duration, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} {name} [{:.2}s] {detail}", elapsed.as_secs_f64());
    assert!(pass, "{name} failed: {detail}");
}

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("fixture exists")).expect("fixture parses")
}

fn workspace() -> Workspace {
    Workspace::new(FundamentalDomainMesh::default())
}

/// `q ∏(1 − q^n)^{24}` and `(E4³ − E6²)/1728` in machine integers.
fn delta_oracles(n: usize) -> (Vec<i128>, Vec<i128>) {
    let mut prod = vec![0i128; n + 1];
    prod[0] = 1;
    for m in 1..=n {
        for _ in 0..24 {
            for i in (m..=n).rev() {
                prod[i] -= prod[i - m];
            }
        }
    }
    let mut delta = vec![0i128; n + 1];
    delta[1..].copy_from_slice(&prod[..n]);
    let sigma = |m: usize, e: u32| -> i128 { (1..=m).filter(|d| m % d == 0).map(|d| (d as i128).pow(e)).sum() };
    let e4: Vec<i128> = (0..=n).map(|m| if m == 0 { 1 } else { 240 * sigma(m, 3) }).collect();
    let e6: Vec<i128> = (0..=n).map(|m| if m == 0 { 1 } else { -504 * sigma(m, 5) }).collect();
    let mul = |a: &[i128], b: &[i128]| -> Vec<i128> {
        (0..=n).map(|m| (0..=m).map(|i| a[i] * b[m - i]).sum()).collect()
    };
    let e4_3 = mul(&mul(&e4, &e4), &e4);
    let e6_2 = mul(&e6, &e6);
    let ring = (0..=n).map(|m| (e4_3[m] - e6_2[m]) / 1728).collect();
    (delta, ring)
}

#[test]
fn ring_identity_exact_to_200() {
    let _g = serial();
    let start = Instant::now();
    let exact = ring_identity(200).unwrap();
    let elapsed = start.elapsed();
    let (product, ring) = delta_oracles(200);
    let lib = delta_series(200);
    let matches_oracle = (0..=200).all(|m| *lib.coeff(m) == Integer::from(product[m]) && product[m] == ring[m]);
    let pass = exact && matches_oracle && elapsed < Duration::from_secs(1);
    verdict(
        "ring_identity_exact_to_200",
        pass,
        elapsed,
        &format!("identity exact: {exact}; agrees with integer product and Eisenstein oracles: {matches_oracle}"),
    );
}

#[test]
fn eigenform_suite_weights_12_to_40() {
    let _g = serial();
    let start = Instant::now();
    let mut complete = true;
    let mut worst_mult: f64 = 0.0;
    let mut worst_deligne: f64 = 0.0;
    for k in (12..=40u32).step_by(2) {
        let forms = eigenforms(k, 100).unwrap();
        // dim S_k = dim M_{k−12} = #{(a, b) : 4a + 6b = k − 12}
        let oracle = (0..=(k - 12) / 4).filter(|a| (k - 12 - 4 * a) % 6 == 0).count();
        complete &= forms.len() == oracle && oracle == dim_cusp_space(k);
        for f in &forms {
            let prec = f.precision;
            for m in 1..=100usize {
                for n in m..=100 / m {
                    let lhs = Float::with_val(prec, f.lambda(m) * f.lambda(n));
                    let mut rhs = Float::new(prec);
                    for d in divisors(gcd(m as u64, n as u64)) {
                        rhs += f.lambda(m * n / (d * d) as usize);
                    }
                    let scale = Float::with_val(64, lhs.abs_ref()).max(&Float::with_val(64, 1));
                    worst_mult = worst_mult.max((Float::with_val(64, lhs - rhs).abs() / scale).to_f64());
                }
            }
            for p in primes_up_to(97) {
                worst_deligne = worst_deligne.max(f.lambda_f64(p as usize).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = complete && worst_mult <= 1e-20 && worst_deligne <= 2.0 + 1e-20 && elapsed < Duration::from_secs(30);
    verdict(
        "eigenform_suite_weights_12_to_40",
        pass,
        elapsed,
        &format!("complete: {complete}; multiplicativity defect {worst_mult:.3e}; max |lambda(p)| {worst_deligne:.12}"),
    );
}

#[test]
fn petersson_delta_at_desk_weights() {
    let _g = serial();
    let start = Instant::now();
    let mut ws = workspace();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    let mut exact_formula: f64 = 0.0;
    for k in [12u32, 16, 20, 24, 30] {
        let forms = ws.forms(k).unwrap().to_vec();
        for (m, n) in [(1u64, 1u64), (1, 2)] {
            let dev = petersson_delta_check(&forms, m, n).unwrap();
            let (side, _) = petersson_kloosterman_side(k, m, n, 64).unwrap();
            exact_formula = exact_formula.max((dev - side).abs());
            worst = worst.max(dev.abs());
            rows.push(format!("k={k} ({m},{n}): {dev:+.3e}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-3 && elapsed < Duration::from_secs(60);
    verdict(
        "petersson_delta_at_desk_weights",
        pass,
        elapsed,
        &format!(
            "max |deviation| {worst:.3e} (limit 1e-3); {}; deviation minus Kloosterman-Bessel side {exact_formula:.1e}",
            rows.join(", ")
        ),
    );
}

#[test]
fn weil_bound_and_integer_rounding() {
    let _g = serial();
    let start = Instant::now();
    let report = weil_bound_check(30, 500, false).unwrap();
    let elapsed = start.elapsed();
    let bound_ok = report.worst.ratio <= 1.0 + 1e-12;
    let rounding_ok = report.max_rounding_defect <= 1e-9;
    let pass = bound_ok && rounding_ok && elapsed < Duration::from_secs(60);
    verdict(
        "weil_bound_and_integer_rounding",
        pass,
        elapsed,
        &format!(
            "{} triples; Weil bound holds: {bound_ok} (worst ratio {:.6} at c = {}); max |raw - round(raw)| {:.6} (limit 1e-9)",
            report.checked, report.worst.ratio, report.worst.c, report.max_rounding_defect
        ),
    );
}

#[test]
fn stirling_inequalities() {
    let _g = serial();
    let start = Instant::now();
    let rows = stirling_suite(192).unwrap();
    let elapsed = start.elapsed();
    let mut detail = Vec::new();
    let mut pass = elapsed < Duration::from_secs(10);
    for regime in [StirlingRegime::Small, StirlingRegime::LargeT, StirlingRegime::Large, StirlingRegime::All] {
        let sel: Vec<_> = rows.iter().filter(|r| r.regime == regime).collect();
        let tightest = sel.iter().map(|r| r.margin()).fold(f64::INFINITY, f64::min);
        pass &= !sel.is_empty() && sel.iter().all(|r| r.holds());
        detail.push(format!("{regime:?}: {} points, min log margin {tightest:.3}", sel.len()));
    }
    // Γ(11.5)/Γ(12) from Γ(n + 1/2) = (2n)! √π / (4^n n!)
    let oracle = (1..=22u64).map(|x| x as f64).product::<f64>() * PI.sqrt()
        / (4f64.powi(11) * (1..=11u64).map(|x| x as f64).product::<f64>())
        / (1..=11u64).map(|x| x as f64).product::<f64>();
    let lib = heckelab::lfunctions::stirling_ratio(12, 0.0, 192).unwrap().to_f64();
    pass &= (lib - oracle).abs() < 1e-14;
    verdict("stirling_inequalities", pass, elapsed, &detail.join("; "));
}

#[test]
fn bessel_transform_envelopes() {
    let _g = serial();
    let fx = fixture("bessel_envelope.json");
    let constant = fx["constant"].as_f64().unwrap();
    let points = fx["grid_points"].as_u64().unwrap() as usize;
    let recorded = fx["measured_max"].as_f64().unwrap();
    let start = Instant::now();
    let t = 100.0;
    let h = bessel_h(&BesselTransformConfig::new(t).unwrap()).unwrap();
    let main = t * t / (4.0 * PI * PI);
    let h_rel = (h.value - main).abs() / main;
    let mut measured: f64 = 0.0;
    let mut parts = Vec::new();
    for t in [10.0, 50.0] {
        let (cp, cm) = bessel_envelope(t, &envelope_grid(t, points)).unwrap();
        parts.push(format!("T={t}: C+ {cp:.4e}, C- {cm:.4e}"));
        measured = measured.max(cp).max(cm);
    }
    let elapsed = start.elapsed();
    let regression = (measured - recorded).abs() / recorded;
    let pass = h_rel <= 0.01 && measured <= constant && regression <= fx["tolerance"].as_f64().unwrap() && elapsed < Duration::from_secs(120);
    verdict(
        "bessel_transform_envelopes",
        pass,
        elapsed,
        &format!(
            "H(100) = {:.6} vs T^2/4pi^2 = {main:.6} (rel {h_rel:.2e}); single C = {measured:.6e} <= {constant}; {}",
            h.value,
            parts.join("; ")
        ),
    );
}

#[test]
fn parseval_watson_master_check() {
    let _g = serial();
    let start = Instant::now();
    let mut ws = workspace();
    let mesh = ws.mesh.clone();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, i, l, j) in MOMENT_LADDER {
        let f = ws.form(k, i).unwrap();
        let g = ws.form(l, j).unwrap();
        let basis = ws.forms(k + l).unwrap().to_vec();
        let pc = parseval_check(&f, &g, &basis, &mesh).unwrap();
        let m = first_moment_triple(&f, &g, &basis, &mesh).unwrap();
        let lowest = m.rows.iter().map(|r| r.central_value).fold(f64::INFINITY, f64::min);
        pass &= pc.relative_gap() <= 1e-6 && lowest >= -1e-8 && m.nonvanishing >= 1;
        parts.push(format!(
            "({k},{l}): rel gap {:.2e}, min L(1/2) {lowest:.4e}, nonvanishing {}",
            pc.relative_gap(),
            m.nonvanishing
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    verdict("parseval_watson_master_check", pass, elapsed, &parts.join("; "));
}

#[test]
fn first_moment_two_routes() {
    let _g = serial();
    let fx = fixture("moment_ratios.json");
    let tol = fx["tolerance"].as_f64().unwrap();
    let start = Instant::now();
    let mut ws = workspace();
    let mesh = ws.mesh.clone();
    let mut pass = true;
    let mut parts = Vec::new();
    let zeta2 = PI * PI / 6.0;
    for pair in fx["pairs"].as_array().unwrap() {
        let idx = |key: &str, n: usize| pair[key][n].as_u64().unwrap();
        let (k, i, l, j) = (idx("f", 0) as u32, idx("f", 1) as usize, idx("g", 0) as u32, idx("g", 1) as usize);
        let f = ws.form(k, i).unwrap();
        let g = ws.form(l, j).unwrap();
        let basis = ws.forms(k + l).unwrap().to_vec();
        let m = first_moment_triple(&f, &g, &basis, &mesh).unwrap();
        let lf = f.sym2_at_1.as_ref().unwrap().to_f64();
        let lg = g.sym2_at_1.as_ref().unwrap().to_f64();
        let main_ok = (m.main_term - 2.0 * lf * lg / zeta2).abs() <= 1e-14 * m.main_term;
        let want = pair["ratio"].as_f64().unwrap();
        let fixture_ok = (m.ratio - want).abs() <= tol * want && m.ratio.is_finite() && m.ratio > 0.0;
        let in_ladder = MOMENT_LADDER.contains(&(k, i, l, j));
        let routes_ok = m.relative_gap() <= 1e-6;
        pass &= main_ok && fixture_ok && (routes_ok || !in_ladder);
        parts.push(format!("({k},{l}): routes rel gap {:.2e}, ratio {:.15}", m.relative_gap(), m.ratio));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    verdict("first_moment_two_routes", pass, elapsed, &parts.join("; "));
}

#[test]
fn decorrelation_weight_24() {
    let _g = serial();
    let start = Instant::now();
    let mut ws = workspace();
    let mesh = ws.mesh.clone();
    let f = ws.form(24, 0).unwrap();
    let g = ws.form(24, 1).unwrap();
    let basis = ws.forms(48).unwrap().to_vec();
    let d = decorrelation_report(&f, &g, &basis, &mesh).unwrap();
    let swapped = decorrelation_report(&g, &f, &basis, &mesh).unwrap();
    let elapsed = start.elapsed();
    let off = d.quadrature.value.norm();
    let diag = d.diagonal_quadrature.value.re;
    let swap_ok = (swapped.quadrature.value - d.quadrature.value.conj()).norm() <= 1e-12 * off;
    let pass = off < diag && d.relative_gap() <= 1e-6 && swap_ok && elapsed < Duration::from_secs(180);
    verdict(
        "decorrelation_weight_24",
        pass,
        elapsed,
        &format!(
            "|decorrelation| {off:.12} < diagonal {diag:.12}; routes rel gap {:.2e}; swap conjugates: {swap_ok}",
            d.relative_gap()
        ),
    );
}

#[test]
fn cfkrs_local_identity() {
    let _g = serial();
    let start = Instant::now();
    let f = eigenforms(12, 100).unwrap().remove(0);
    let g = eigenforms(16, 100).unwrap().remove(0);
    let primes = primes_up_to(97);
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = primes[rng.gen_range(0..primes.len())];
        let s = Complex::with_val(128, (rng.gen_range(0.5..3.0), rng.gen_range(-30.0..30.0)));
        worst = worst.max(cfkrs_local_check(&f, &g, p, &s).unwrap());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-20 && elapsed < Duration::from_secs(5);
    verdict("cfkrs_local_identity", pass, elapsed, &format!("max difference over 100 random (p, s): {worst:.3e}"));
}

#[test]
fn combinatorial_bound_r_up_to_8() {
    let _g = serial();
    let start = Instant::now();
    let report = combinatorial_bound_check(8).unwrap();
    let elapsed = start.elapsed();
    // compositions of r number 2^{r−1}
    let expected: u64 = (1..=8).map(|r| 1u64 << (r - 1)).sum();
    let pass = report.compositions == expected && report.max_ratio <= 1.0 && elapsed < Duration::from_secs(5);
    verdict(
        "combinatorial_bound_r_up_to_8",
        pass,
        elapsed,
        &format!("{} compositions (expected {expected}), {} equalities", report.compositions, report.equalities),
    );
}

#[test]
fn power_expansion_chebyshev() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1_000_003);
    let prec = 128;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let theta = rng.gen_range(1e-3..PI - 1e-3);
        let th = Float::with_val(prec, theta);
        let sin = Float::with_val(prec, th.sin_ref());
        for alpha in 0..=10u32 {
            let lhs = (Float::with_val(prec, th.cos_ref()) * 2u32).pow(alpha);
            let mut rhs = Float::new(prec);
            for (beta, b) in power_expansion_coefficients(alpha).iter().enumerate() {
                let u = Float::with_val(prec, Float::with_val(prec, &th * (beta as u32 + 1)).sin()) / &sin;
                rhs += u * b;
            }
            worst = worst.max(Float::with_val(prec, lhs - rhs).abs().to_f64());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-12 && elapsed < Duration::from_secs(1);
    verdict("power_expansion_chebyshev", pass, elapsed, &format!("max error over 200 angles, alpha <= 10: {worst:.3e}"));
}

#[test]
fn lambda_identities_unit_circle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let worst = lambda_identities(&mut rng, 200, 128);
    let elapsed = start.elapsed();
    let pass = worst <= 1e-14 && elapsed < Duration::from_secs(1);
    verdict("lambda_identities_unit_circle", pass, elapsed, &format!("max error over 200 parameters: {worst:.3e}"));
}

#[test]
fn prime_sum_sym2_delta() {
    let _g = serial();
    let fx = fixture("prime_sum_delta.json");
    let tol = fx["tolerance"].as_f64().unwrap();
    let start = Instant::now();
    let delta = eigenforms(12, 200).unwrap().remove(0);
    let table = prime_sum_experiment(&delta, None, fx["x_max"].as_u64().unwrap(), PrimeSumKind::Sym2OverP).unwrap();
    let elapsed = start.elapsed();
    let mut pass = table.within_envelope && table.checkpoints.iter().all(|c| c.sum.abs() <= 10.0);
    let mut worst: f64 = 0.0;
    for want in fx["checkpoints"].as_array().unwrap() {
        let x = want["x"].as_u64().unwrap();
        match table.checkpoints.iter().find(|c| c.x == x) {
            Some(c) => worst = worst.max((c.sum - want["sum"].as_f64().unwrap()).abs()),
            None => pass = false,
        }
    }
    pass &= worst <= tol && table.hecke_relation_defect <= 1e-20 && elapsed < Duration::from_secs(30);
    verdict(
        "prime_sum_sym2_delta",
        pass,
        elapsed,
        &format!(
            "max |sum| {:.6} over {} checkpoints; fixture deviation {worst:.2e}; sum at 10^6 = {:.12}",
            table.max_abs,
            table.checkpoints.len(),
            table.checkpoints.last().unwrap().sum
        ),
    );
}
