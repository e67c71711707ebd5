//! Partial sums over primes of symmetric-power Hecke eigenvalues.

use std::fmt::Write as _;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{power_expansion_coefficients, HeckeEigenform};

pub const PRIME_SUM_LIMIT: u64 = 1_000_000;

/// Soft sanity envelope for the partial sums.
pub const PRIME_SUM_ENVELOPE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeSumKind {
    /// `Σ λ_f(p²)/p`
    Sym2OverP,
    /// `Σ λ_f(p⁴)/p`
    Sym4OverP,
    /// `Σ λ_f(p²) λ_g(p²)/p`
    RankinPair,
}

impl std::str::FromStr for PrimeSumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym2_over_p" | "sym2" => Ok(Self::Sym2OverP),
            "sym4_over_p" | "sym4" => Ok(Self::Sym4OverP),
            "rankin_pair" | "rankin" => Ok(Self::RankinPair),
            _ => Err(Error::InvalidInput(format!("unknown prime-sum kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub x: u64,
    pub primes: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeSumTable {
    pub f: String,
    pub g: Option<String>,
    pub kind: PrimeSumKind,
    pub x_max: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub max_abs: f64,
    pub within_envelope: bool,
    /// `f = g` in a Rankin pair: the sum grows like `Σ 1/p` and is not
    /// expected to stay bounded.
    pub diagonal: bool,
    /// Largest `|λ(p²) − (λ(p)² − 1)|` over primes with `p²` in the stored expansion.
    pub hecke_relation_defect: f64,
}

impl PrimeSumTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,primes,sum\n");
        for c in &self.checkpoints {
            let _ = writeln!(out, "{},{},{:.15e}", c.x, c.primes, c.sum);
        }
        out
    }
}

/// Checkpoints `1·10^j, 3·10^j` below `x_max`, and `x_max`.
pub fn checkpoints(x_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut base = 10u64;
    while base <= x_max {
        out.push(base);
        if 3 * base <= x_max {
            out.push(3 * base);
        }
        base *= 10;
    }
    if out.last() != Some(&x_max) {
        out.push(x_max);
    }
    out
}

fn hecke_defect(f: &HeckeEigenform, lambdas: &[(u64, Float)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, l) in lambdas {
        let p2 = (p * p) as usize;
        if p2 > f.truncation {
            break;
        }
        let want = Float::with_val(l.prec(), l.square_ref()) - 1u32;
        worst = worst.max(Float::with_val(64, f.lambda(p2) - want).abs().to_f64());
    }
    worst
}

pub fn prime_sum_experiment(
    f: &HeckeEigenform,
    g: Option<&HeckeEigenform>,
    x_max: u64,
    kind: PrimeSumKind,
) -> Result<PrimeSumTable> {
    if !(2..=PRIME_SUM_LIMIT).contains(&x_max) {
        return Err(Error::UnsupportedRange(format!("x_max must lie in 2..={PRIME_SUM_LIMIT}")));
    }
    let lf = f.prime_lambdas(x_max)?;
    let mut defect = hecke_defect(f, &lf);
    let lg = match (kind, g) {
        (PrimeSumKind::RankinPair, Some(g)) => {
            let v = g.prime_lambdas(x_max)?;
            defect = defect.max(hecke_defect(g, &v));
            Some(v)
        }
        (PrimeSumKind::RankinPair, None) => {
            return Err(Error::InvalidInput("rankin_pair needs a second form".into()));
        }
        _ => None,
    };
    let b4 = power_expansion_coefficients(4);
    let (b40, b42) = (b4[0].to_f64(), b4[2].to_f64());
    let sym2 = |l: f64| l * l - 1.0;
    let marks = checkpoints(x_max);
    let mut next = 0;
    let mut sum = 0.0;
    let mut rows = Vec::with_capacity(marks.len());
    let mut max_abs: f64 = 0.0;
    for (i, (p, l)) in lf.iter().enumerate() {
        while next < marks.len() && *p > marks[next] {
            rows.push(Checkpoint { x: marks[next], primes: i, sum });
            next += 1;
        }
        let l = l.to_f64();
        let term = match kind {
            PrimeSumKind::Sym2OverP => sym2(l),
            // λ(p⁴) = λ(p)⁴ − b_{4,2} λ(p²) − b_{4,0}
            PrimeSumKind::Sym4OverP => l.powi(4) - b42 * sym2(l) - b40,
            PrimeSumKind::RankinPair => sym2(l) * sym2(lg.as_ref().expect("second form")[i].1.to_f64()),
        };
        sum += term / *p as f64;
        max_abs = max_abs.max(sum.abs());
    }
    while next < marks.len() {
        rows.push(Checkpoint { x: marks[next], primes: lf.len(), sum });
        next += 1;
    }
    let diagonal = matches!((kind, g), (PrimeSumKind::RankinPair, Some(g)) if g.weight == f.weight && g.index == f.index);
    Ok(PrimeSumTable {
        f: f.id(),
        g: g.map(HeckeEigenform::id),
        kind,
        x_max,
        checkpoints: rows,
        max_abs,
        within_envelope: max_abs <= PRIME_SUM_ENVELOPE,
        diagonal,
        hecke_relation_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::eigenforms;

    #[test]
    fn checkpoint_layout() {
        assert_eq!(checkpoints(1000), vec![10, 30, 100, 300, 1000]);
        assert_eq!(checkpoints(50), vec![10, 30, 50]);
    }

    #[test]
    fn delta_sym2_small() {
        let d = &eigenforms(12, 200).unwrap()[0];
        let t = prime_sum_experiment(d, None, 10_000, PrimeSumKind::Sym2OverP).unwrap();
        assert!(t.within_envelope);
        assert!(t.hecke_relation_defect < 1e-20);
        assert_eq!(t.checkpoints.last().unwrap().primes, 1229);
        // first checkpoint: primes 2, 3, 5, 7
        let direct: f64 = [2u64, 3, 5, 7].iter().map(|&p| (d.lambda_f64(p as usize).powi(2) - 1.0) / p as f64).sum();
        assert!((t.checkpoints[0].sum - direct).abs() < 1e-14);
    }

    #[test]
    fn rankin_diagonal_is_flagged() {
        let d = &eigenforms(12, 200).unwrap()[0];
        let t = prime_sum_experiment(d, Some(d), 1000, PrimeSumKind::RankinPair).unwrap();
        assert!(t.diagonal);
        assert!(prime_sum_experiment(d, None, 1000, PrimeSumKind::RankinPair).is_err());
    }
}
