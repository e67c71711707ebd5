//! Coefficients of `E4^a E6^b Δ^c` far beyond the exact-series range,
//! computed modulo several NTT primes and lifted by the Chinese remainder
//! theorem at the requested indices only.

use rug::ops::Pow;
use rug::Integer;

use super::ntt::{multiply_mod, ntt_primes, square_mod, NttPrime};
use crate::arith::pow_mod;
use crate::error::{Error, Result};

fn reduce(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// `E_k mod p` for `k ∈ {4, 6}`, coefficients `0..=n`.
pub fn eisenstein_mod(k: u32, n: usize, prime: NttPrime) -> Vec<u32> {
    let p = prime.p as u64;
    let factor = match k {
        4 => reduce(240, prime.p),
        6 => reduce(-504, prime.p),
        _ => panic!("only E4 and E6 are generated modularly"),
    } as u64;
    let mut sigma = vec![0u64; n + 1];
    for d in 1..=n {
        let dp = pow_mod(d as u64 % p, (k - 1) as u64, p);
        let mut m = d;
        while m <= n {
            sigma[m] += dp;
            if sigma[m] >= p {
                sigma[m] -= p;
            }
            m += d;
        }
    }
    let mut out: Vec<u32> = sigma.into_iter().map(|s| (s * factor % p) as u32).collect();
    out[0] = 1;
    out
}

/// `Δ mod p`, coefficients `0..=n`.
pub fn delta_mod(n: usize, prime: NttPrime) -> Vec<u32> {
    let len = n; // E^24 needs indices 0..n-1
    let mut cube = vec![0u32; len.max(1)];
    let mut m = 0usize;
    while m * (m + 1) / 2 < len {
        let v = (2 * m + 1) as i64;
        cube[m * (m + 1) / 2] = reduce(if m % 2 == 0 { v } else { -v }, prime.p);
        m += 1;
    }
    let e6 = square_mod(&cube, len, prime);
    let e12 = square_mod(&e6, len, prime);
    let e24 = square_mod(&e12, len, prime);
    let mut out = vec![0u32; n + 1];
    out[1..].copy_from_slice(&e24[..n]);
    out
}

fn power_mod_series(base: &[u32], e: u32, len: usize, prime: NttPrime) -> Vec<u32> {
    let mut out = vec![0u32; len];
    out[0] = 1;
    let mut base = base.to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            out = multiply_mod(&out, &base, len, prime);
        }
        e >>= 1;
        if e > 0 {
            base = square_mod(&base, len, prime);
        }
    }
    out
}

/// `E4^a E6^b Δ^c mod p`, coefficients `0..=n`.
pub fn monomial_mod(a: u32, b: u32, c: u32, n: usize, prime: NttPrime) -> Vec<u32> {
    let len = n + 1;
    let mut out = vec![0u32; len];
    out[0] = 1;
    if c > 0 {
        out = power_mod_series(&delta_mod(n, prime), c, len, prime);
    }
    if b > 0 {
        out = multiply_mod(&out, &power_mod_series(&eisenstein_mod(6, n, prime), b, len, prime), len, prime);
    }
    if a > 0 {
        out = multiply_mod(&out, &power_mod_series(&eisenstein_mod(4, n, prime), a, len, prime), len, prime);
    }
    out
}

/// Upper bound for `|coefficient of q^m|`, `m ≤ n`, of `E4^a E6^b Δ^c`,
/// from `|E4| ≤ 289(n+1)^3`, `|E6| ≤ 523(n+1)^5`, `|Δ| ≤ 2(n+1)^6`, with a
/// factor `n+1` for each convolution.
pub fn coefficient_bound(a: u32, b: u32, c: u32, n: usize) -> Integer {
    let m = Integer::from(n as u64 + 1);
    let factors = a + b + c;
    let constant = Integer::from(289).pow(a) * Integer::from(523).pow(b) * Integer::from(2).pow(c);
    let exponent = 3 * a + 5 * b + 6 * c + factors.saturating_sub(1);
    constant * m.pow(exponent)
}

/// Exact coefficients at `indices` of `E4^a E6^b Δ^c`.
pub fn monomial_coefficients_at(a: u32, b: u32, c: u32, n: usize, indices: &[usize]) -> Result<Vec<Integer>> {
    if let Some(&bad) = indices.iter().find(|&&i| i > n) {
        return Err(Error::InvalidInput(format!("index {bad} exceeds truncation {n}")));
    }
    let bound = coefficient_bound(a, b, c, n) * 2u32 + 1u32;
    let mut modulus = Integer::from(1);
    let mut primes = Vec::new();
    for &q in ntt_primes() {
        if modulus > bound {
            break;
        }
        modulus *= q.p;
        primes.push(q);
    }
    if modulus <= bound {
        return Err(Error::UnsupportedRange(format!(
            "coefficients of E4^{a} E6^{b} Δ^{c} to q^{n} exceed the available moduli"
        )));
    }
    log::debug!("E4^{a} E6^{b} Δ^{c} to q^{n}: {} primes", primes.len());
    let residues: Vec<Vec<u32>> = primes
        .iter()
        .map(|&q| {
            let series = monomial_mod(a, b, c, n, q);
            indices.iter().map(|&i| series[i]).collect()
        })
        .collect();
    let half = Integer::from(&modulus >> 1);
    Ok((0..indices.len())
        .map(|j| {
            let mut x = Integer::new();
            let mut m = Integer::from(1);
            for (q, r) in primes.iter().zip(&residues) {
                let p = q.p;
                let x_mod = x.mod_u(p) as u64;
                let m_mod = m.mod_u(p) as u64;
                let diff = (r[j] as u64 + p as u64 - x_mod) % p as u64;
                let t = diff * pow_mod(m_mod, p as u64 - 2, p as u64) % p as u64;
                x += Integer::from(&m * t);
                m *= p;
            }
            if x > half {
                x -= &modulus;
            }
            x
        })
        .collect())
}

/// Ramanujan's `τ(m)` at each of `indices`.
pub fn ramanujan_tau_at(n: usize, indices: &[usize]) -> Result<Vec<Integer>> {
    monomial_coefficients_at(0, 0, 1, n, indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{delta_series, eisenstein_series};

    #[test]
    fn modular_monomials_match_exact_series() {
        let n = 150;
        let e4 = eisenstein_series(4, n).unwrap();
        let e6 = eisenstein_series(6, n).unwrap();
        let d = delta_series(n);
        let idx: Vec<usize> = (0..=n).collect();
        for &(a, b, c) in &[(0, 0, 1), (3, 0, 0), (0, 1, 2), (2, 1, 1), (1, 0, 3)] {
            let exact = e4.pow(a).multiply(&e6.pow(b)).multiply(&d.pow(c));
            let got = monomial_coefficients_at(a, b, c, n, &idx).unwrap();
            for (i, g) in got.iter().enumerate() {
                assert_eq!(exact.coeff(i).numer(), g, "({a},{b},{c}) at {i}");
            }
        }
    }

    #[test]
    fn tau_at_known_values() {
        // τ(p) for a few primes, from the classical tables
        let got = ramanujan_tau_at(5000, &[2, 3, 5, 7, 11, 4999]).unwrap();
        assert_eq!(got[0], -24);
        assert_eq!(got[1], 252);
        assert_eq!(got[2], 4830);
        assert_eq!(got[3], -16744);
        assert_eq!(got[4], 534612);
        // Deligne: |τ(p)| ≤ 2 p^{11/2}
        let p = 4999f64;
        assert!(got[5].to_f64().abs() <= 2.0 * p.powf(5.5));
    }
}
