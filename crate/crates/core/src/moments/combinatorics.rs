//! Exact check of
//! `binom(2r; 2β₁,…,2β_s) ∏ (2β_i)!/(β_i!(β_i+1)!) ≤ (2r)!/(2^r r!) · binom(r; β₁,…,β_s)`
//! over all compositions of `r`.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_R: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinatorialReport {
    pub r_max: u32,
    pub compositions: u64,
    pub equalities: u64,
    /// Largest `left/right` seen.
    pub max_ratio: f64,
    /// Composition attaining `max_ratio` outside the equality cases.
    pub tightest: Vec<u32>,
}

fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Both sides for one composition.
pub fn sides(beta: &[u32]) -> (Integer, Integer) {
    let r: u32 = beta.iter().sum();
    let mut left = factorial(2 * r);
    for &b in beta {
        left /= factorial(2 * b);
        // (2β)!/(β!(β+1)!) is the Catalan number
        left *= factorial(2 * b) / (factorial(b) * factorial(b + 1));
    }
    let mut right = factorial(2 * r) / (Integer::from(1) << r);
    for &b in beta {
        right /= factorial(b);
    }
    (left, right)
}

fn compositions(r: u32, prefix: &mut Vec<u32>, out: &mut dyn FnMut(&[u32])) {
    if r == 0 {
        out(prefix);
        return;
    }
    for first in 1..=r {
        prefix.push(first);
        compositions(r - first, prefix, out);
        prefix.pop();
    }
}

pub fn combinatorial_bound_check(r_max: u32) -> Result<CombinatorialReport> {
    if r_max == 0 || r_max > MAX_R {
        return Err(Error::UnsupportedRange(format!("r_max must lie in 1..={MAX_R}")));
    }
    let mut report = CombinatorialReport { r_max, compositions: 0, equalities: 0, max_ratio: 0.0, tightest: Vec::new() };
    let mut failure = None;
    for r in 1..=r_max {
        compositions(r, &mut Vec::new(), &mut |beta| {
            let (left, right) = sides(beta);
            report.compositions += 1;
            if left > right && failure.is_none() {
                failure = Some(format!("composition {beta:?}: {left} > {right}"));
            }
            if left == right {
                report.equalities += 1;
            }
            let ratio = Rational::from((left, right)).to_f64();
            if ratio > report.max_ratio || report.tightest.is_empty() {
                report.max_ratio = report.max_ratio.max(ratio);
                report.tightest = beta.to_vec();
            }
        });
    }
    match failure {
        Some(msg) => Err(Error::BoundViolation(msg)),
        None => Ok(report),
    }
}
