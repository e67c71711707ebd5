//! Elementary integer arithmetic: gcds, modular inverses, divisor functions
//! and a segmented sieve of Eratosthenes.

use rug::ops::Pow;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
/// Returns `None` when `gcd(a, m) != 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128 % m as u128;
    let mut b = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Number of divisors of `n`.
pub fn tau(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Sum of `d^power` over the divisors `d` of `n`, exactly.
pub fn sigma(n: u64, power: u32) -> rug::Integer {
    let mut total = rug::Integer::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += rug::Integer::from(d).pow(power);
            let e = n / d;
            if e != d {
                total += rug::Integer::from(e).pow(power);
            }
        }
        d += 1;
    }
    total
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// All primes `<= limit`, using a segmented sieve with segments of
/// `SEGMENT` integers so memory stays bounded for large limits.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    const SEGMENT: u64 = 1 << 16;
    if limit < 2 {
        return Vec::new();
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let mut base = vec![true; root as usize + 1];
    let mut small = Vec::new();
    for i in 2..=root as usize {
        if base[i] {
            small.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                base[j] = false;
                j += i;
            }
        }
    }
    let mut primes = Vec::new();
    let mut low = 2u64;
    let mut mark = vec![true; SEGMENT as usize];
    while low <= limit {
        let high = (low + SEGMENT - 1).min(limit);
        mark.iter_mut().for_each(|m| *m = true);
        for &p in &small {
            if p * p > high {
                break;
            }
            let start = (low.div_ceil(p) * p).max(p * p);
            let mut j = start;
            while j <= high {
                mark[(j - low) as usize] = false;
                j += p;
            }
        }
        for n in low..=high {
            if mark[(n - low) as usize] {
                primes.push(n);
            }
        }
        low = high + 1;
    }
    primes
}

/// Smallest-prime-factor table on `0..=n`.
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_gcd() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 1), Some(0));
        assert_eq!(gcd(12, 18), 6);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieve = primes_up_to(200_000);
        let trial: Vec<u64> = (0..=200_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, trial);
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(tau(12), 6);
        assert_eq!(tau(1), 1);
        assert_eq!(sigma(6, 3), 1 + 8 + 27 + 216);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }
}
