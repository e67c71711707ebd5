//! The four Stirling-ratio inequalities for `|Γ(k−1/2+it)|/Γ(k)` on fixed grids.

use std::fmt::Write as _;

use rug::Float;
use serde::{Deserialize, Serialize};

use super::stirling_ratio;
use crate::error::Result;

/// Implied constant used for every inequality of the suite.
pub const STIRLING_CONSTANT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StirlingRegime {
    /// `|t| ≤ k^{2/3}`: ratio `≤ C e^{−t²/2k}/√k`.
    Small,
    /// `|t| ≥ 100k`: ratio `≤ e^{−|t|/2}`.
    LargeT,
    /// `|t| ≥ k^{2/3}`: ratio `≤ C e^{−k^{1/3}/4}`.
    Large,
    /// Any `t`: ratio `≤ C/√k`.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirlingRow {
    pub k: u32,
    pub t: f64,
    pub regime: StirlingRegime,
    /// Natural logarithms, since the ratio underflows `f64` for large `|t|`.
    pub ln_ratio: f64,
    pub ln_bound: f64,
}

impl StirlingRow {
    pub fn margin(&self) -> f64 {
        self.ln_bound - self.ln_ratio
    }

    pub fn holds(&self) -> bool {
        self.ln_ratio <= self.ln_bound
    }
}

pub fn stirling_csv(rows: &[StirlingRow]) -> String {
    let mut out = String::from("k,t,regime,ratio,bound,margin\n");
    for r in rows {
        let regime = serde_json::to_value(r.regime).expect("regime serializes");
        let _ = writeln!(
            out,
            "{},{},{},{:.12e},{:.12e},{:.6e}",
            r.k,
            r.t,
            regime.as_str().unwrap_or_default(),
            r.ln_ratio.exp(),
            r.ln_bound.exp(),
            r.margin()
        );
    }
    out
}

fn ln_bound(regime: StirlingRegime, k: u32, t: f64) -> f64 {
    let kf = k as f64;
    let c = STIRLING_CONSTANT.ln();
    match regime {
        StirlingRegime::Small => c - t * t / (2.0 * kf) - 0.5 * kf.ln(),
        StirlingRegime::LargeT => -t.abs() / 2.0,
        StirlingRegime::Large => c - kf.cbrt() / 4.0,
        StirlingRegime::All => c - 0.5 * kf.ln(),
    }
}

fn row(k: u32, t: f64, regime: StirlingRegime, prec: u32) -> Result<StirlingRow> {
    let r = stirling_ratio(k, t, prec)?;
    let ln_ratio = Float::with_val(prec, r.ln_ref()).to_f64();
    Ok(StirlingRow { k, t, regime, ln_ratio, ln_bound: ln_bound(regime, k, t) })
}

/// Every grid point of the suite: `k ∈ {12, 16, …, 200}` with 100 points in
/// `|t| ≤ k^{2/3}`, samples with `|t| ≥ 100k`, samples with `|t| ≥ k^{2/3}`,
/// and the union of all of them against the uniform bound.
pub fn stirling_suite(prec: u32) -> Result<Vec<StirlingRow>> {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for k in (12..=200u32).step_by(4) {
        let edge = (k as f64).powf(2.0 / 3.0);
        for i in 0..100 {
            let t = -edge + 2.0 * edge * i as f64 / 99.0;
            rows.push(row(k, t, StirlingRegime::Small, prec)?);
            all.push((k, t));
        }
        for s in [1.0, 1.5, 2.0, 5.0, 10.0] {
            let t = 100.0 * k as f64 * s;
            rows.push(row(k, t, StirlingRegime::LargeT, prec)?);
            rows.push(row(k, -t, StirlingRegime::LargeT, prec)?);
            all.push((k, t));
        }
        for s in [1.0, 1.25, 1.5, 2.0, 4.0, 10.0, 100.0] {
            let t = edge * s;
            rows.push(row(k, t, StirlingRegime::Large, prec)?);
            rows.push(row(k, -t, StirlingRegime::Large, prec)?);
            all.push((k, t));
        }
    }
    for (k, t) in all {
        rows.push(row(k, t, StirlingRegime::All, prec)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_inequality_holds() {
        let rows = stirling_suite(128).unwrap();
        assert_eq!(rows.iter().filter(|r| r.regime == StirlingRegime::Small).count(), 48 * 100);
        for r in &rows {
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let rows = vec![row(12, 0.0, StirlingRegime::All, 128).unwrap()];
        let csv = stirling_csv(&rows);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("12,0,all,2.98105636"));
    }
}
