//! Number-theoretic transforms over primes `c·2^22 + 1 < 2^31`, used to
//! multiply long integer series modulo several primes.

use crate::arith::{factorize, is_prime, pow_mod};

const LOG_MAX: u32 = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NttPrime {
    pub p: u32,
    /// Primitive root modulo `p`.
    pub generator: u32,
}

/// The NTT-friendly primes below `2^31`, largest first.
pub fn ntt_primes() -> &'static [NttPrime] {
    static PRIMES: std::sync::OnceLock<Vec<NttPrime>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        for c in (1u64..512).rev() {
            let p = c << LOG_MAX | 1;
            if p >= 1 << 31 || !is_prime(p) {
                continue;
            }
            let factors: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
            let g = (2..p)
                .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
                .expect("prime has a primitive root");
            out.push(NttPrime { p: p as u32, generator: g as u32 });
        }
        out
    })
}

#[inline]
fn mul(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

/// Precomputed `w` together with `floor(w · 2^32 / p)` for Shoup reduction.
#[derive(Clone, Copy)]
struct Twiddle {
    w: u32,
    w_shoup: u32,
}

impl Twiddle {
    fn new(w: u32, p: u32) -> Self {
        Self { w, w_shoup: (((w as u64) << 32) / p as u64) as u32 }
    }

    #[inline]
    fn apply(self, a: u32, p: u32) -> u32 {
        let q = ((a as u64 * self.w_shoup as u64) >> 32) as u32;
        let r = (a.wrapping_mul(self.w)).wrapping_sub(q.wrapping_mul(p));
        if r >= p {
            r - p
        } else {
            r
        }
    }
}

fn transform(a: &mut [u32], prime: NttPrime, inverse: bool) {
    let n = a.len();
    let p = prime.p;
    debug_assert!(n.is_power_of_two() && n.trailing_zeros() <= LOG_MAX);
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut root = pow_mod(prime.generator as u64, (p as u64 - 1) / len as u64, p as u64) as u32;
        if inverse {
            root = pow_mod(root as u64, p as u64 - 2, p as u64) as u32;
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u32;
        for _ in 0..half {
            twiddles.push(Twiddle::new(w, p));
            w = mul(w, root, p);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((x, y), tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let u = *x;
                let v = tw.apply(*y, p);
                let s = u + v;
                *x = if s >= p { s - p } else { s };
                *y = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
    }
    if inverse {
        let n_inv = Twiddle::new(pow_mod(n as u64, p as u64 - 2, p as u64) as u32, p);
        for x in a.iter_mut() {
            *x = n_inv.apply(*x, p);
        }
    }
}

/// Product of two series modulo `prime`, truncated to `len` coefficients.
pub fn multiply_mod(a: &[u32], b: &[u32], len: usize, prime: NttPrime) -> Vec<u32> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    let p = prime.p;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0u64; len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        return out.into_iter().map(|v| v as u32).collect();
    }
    let size = (a.len() + b.len() - 1).next_power_of_two();
    assert!(size.trailing_zeros() <= LOG_MAX, "series too long for the NTT primes");
    let mut fa = vec![0u32; size];
    fa[..a.len()].copy_from_slice(a);
    transform(&mut fa, prime, false);
    let same = std::ptr::eq(a.as_ptr(), b.as_ptr()) && a.len() == b.len();
    if same {
        for x in fa.iter_mut() {
            *x = mul(*x, *x, p);
        }
    } else {
        let mut fb = vec![0u32; size];
        fb[..b.len()].copy_from_slice(b);
        transform(&mut fb, prime, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = mul(*x, *y, p);
        }
    }
    transform(&mut fa, prime, true);
    fa.truncate(len);
    fa.resize(len, 0);
    fa
}

pub fn square_mod(a: &[u32], len: usize, prime: NttPrime) -> Vec<u32> {
    multiply_mod(a, a, len, prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primes_are_ntt_friendly() {
        let primes = ntt_primes();
        assert!(primes.len() >= 20);
        for q in primes {
            assert!(q.p < 1 << 31);
            assert_eq!((q.p - 1) % (1 << LOG_MAX), 0);
            assert_eq!(pow_mod(q.generator as u64, (q.p as u64 - 1) / 2, q.p as u64), q.p as u64 - 1);
        }
    }

    fn schoolbook(a: &[u32], b: &[u32], len: usize, p: u32) -> Vec<u32> {
        let mut out = vec![0u64; len];
        for i in 0..a.len() {
            for j in 0..b.len() {
                if i + j < len {
                    out[i + j] = (out[i + j] + a[i] as u64 * b[j] as u64) % p as u64;
                }
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }

    proptest! {
        #[test]
        fn ntt_product_matches_schoolbook(
            a in proptest::collection::vec(0u32..2_000_000_000, 33..300),
            b in proptest::collection::vec(0u32..2_000_000_000, 33..300),
            idx in 0usize..5,
        ) {
            let prime = ntt_primes()[idx];
            let a: Vec<u32> = a.iter().map(|x| x % prime.p).collect();
            let b: Vec<u32> = b.iter().map(|x| x % prime.p).collect();
            let len = a.len() + b.len() - 1;
            prop_assert_eq!(multiply_mod(&a, &b, len, prime), schoolbook(&a, &b, len, prime.p));
            prop_assert_eq!(square_mod(&a, 100, prime), schoolbook(&a, &a, 100, prime.p));
        }
    }
}
