//! Dense univariate polynomials and square matrices over ℚ: characteristic
//! polynomials, adjugates, gcds and real-root isolation.

use rug::{Float, Integer, Rational};

/// Coefficients in ascending degree; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

pub type Matrix = Vec<Vec<Rational>>;

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lead(&self) -> &Rational {
        self.0.last().expect("zero polynomial has no leading coefficient")
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let prec = x.prec();
        let mut acc = Float::new(prec);
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        let lead = self.lead().clone();
        Self::new(self.0.iter().map(|c| Rational::from(c / &lead)).collect())
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut rem = self.0.clone();
        let mut quo = vec![Rational::new(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let f = Rational::from(rem.last().unwrap() / d.lead());
            for (i, c) in d.0.iter().enumerate() {
                rem[shift + i] -= Rational::from(&f * c);
            }
            quo[shift] = f;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Self::new(quo), Self::new(rem))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    pub fn from_roots(roots: &[Integer]) -> Self {
        let mut p = vec![Rational::from(1)];
        for r in roots {
            let mut next = vec![Rational::new(); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= Rational::from(c * r);
            }
            p = next;
        }
        Self::new(p)
    }

    fn neg(&self) -> Self {
        Self::new(self.0.iter().map(|c| Rational::from(-c)).collect())
    }

    fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn root_bound(&self) -> Rational {
        let lead = self.lead().clone().abs();
        let mut m = Rational::new();
        for c in &self.0[..self.0.len() - 1] {
            let r = Rational::from(c / &lead).abs();
            if r > m {
                m = r;
            }
        }
        m + 1u32
    }

    /// All real roots of a squarefree polynomial, each refined by exact
    /// bisection to an interval of width at most `2^-bits · max(1, |root|)`,
    /// in increasing order.
    pub fn real_roots(&self, bits: u32) -> Vec<(Rational, Rational)> {
        let seq = self.sturm_sequence();
        let changes = |x: &Rational| -> usize {
            let signs: Vec<i32> = seq
                .iter()
                .map(|p| p.eval(x).cmp0() as i32)
                .filter(|&s| s != 0)
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let b = self.root_bound();
        let mut stack = vec![(Rational::from(-&b), b)];
        let mut isolated = Vec::new();
        while let Some((lo, hi)) = stack.pop() {
            let count = changes(&lo) - changes(&hi);
            if count == 0 {
                continue;
            }
            if count == 1 {
                isolated.push((lo, hi));
                continue;
            }
            let mid = Rational::from(&lo + &hi) / 2u32;
            if self.eval(&mid).is_zero() {
                let eps = Rational::from(&hi - &lo) / 1024u32;
                isolated.push((Rational::from(&mid - &eps), Rational::from(&mid + &eps)));
                stack.push((lo, Rational::from(&mid - &eps)));
                stack.push((Rational::from(&mid + &eps), hi));
                continue;
            }
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        let mut out: Vec<_> = isolated.into_iter().map(|(lo, hi)| self.refine(lo, hi, bits)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn refine(&self, mut lo: Rational, mut hi: Rational, bits: u32) -> (Rational, Rational) {
        let mut s_lo = self.eval(&lo).cmp0();
        if s_lo == std::cmp::Ordering::Equal {
            return (lo.clone(), lo);
        }
        let scale = Rational::from(1) << bits;
        loop {
            let width = Rational::from(&hi - &lo);
            let mag = Rational::from(lo.abs_ref()).max(Rational::from(hi.abs_ref())).max(Rational::from(1));
            if width * &scale <= mag {
                return (lo, hi);
            }
            let mid = Rational::from(&lo + &hi) / 2u32;
            let s = self.eval(&mid).cmp0();
            if s == std::cmp::Ordering::Equal {
                return (mid.clone(), mid);
            }
            if s == s_lo {
                lo = mid;
                s_lo = s;
            } else {
                hi = mid;
            }
        }
    }
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| Rational::from((i == j) as i32)).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = Rational::new();
                    for (k, bk) in b.iter().enumerate() {
                        acc += Rational::from(&a[i][k] * &bk[j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_add_scaled(a: &Matrix, b: &Matrix, c: &Rational) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + Rational::from(y * c)).collect())
        .collect()
}

pub fn trace(a: &Matrix) -> Rational {
    let mut t = Rational::new();
    for (i, row) in a.iter().enumerate() {
        t += &row[i];
    }
    t
}

/// Characteristic polynomial `det(xI − A)` and the matrices `M_1..M_n` of
/// the Faddeev–LeVerrier recursion, for which
/// `adj(xI − A) = Σ_{j=1}^{n} M_j x^{n−j}`.
pub fn faddeev_leverrier(a: &Matrix) -> (Poly, Vec<Matrix>) {
    let n = a.len();
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[n] = Rational::from(1);
    let mut ms = Vec::with_capacity(n);
    let mut m = vec![vec![Rational::new(); n]; n];
    for j in 1..=n {
        let am = mat_mul(a, &m);
        m = mat_add_scaled(&am, &identity(n), &coeffs[n + 1 - j]);
        let c = -trace(&mat_mul(a, &m)) / j as u32;
        coeffs[n - j] = c;
        ms.push(m.clone());
    }
    (Poly::new(coeffs), ms)
}

/// `adj(xI − A)` evaluated at a rational point.
pub fn adjugate_at(ms: &[Matrix], x: &Rational) -> Matrix {
    let n = ms.len();
    let mut acc = vec![vec![Rational::new(); n]; n];
    for m in ms {
        for (ra, rm) in acc.iter_mut().zip(m) {
            for (v, w) in ra.iter_mut().zip(rm) {
                *v *= x;
                *v += w;
            }
        }
    }
    acc
}

/// `adj(xI − A)` evaluated at a floating-point point.
pub fn adjugate_at_float(ms: &[Matrix], x: &Float) -> Vec<Vec<Float>> {
    let n = ms.len();
    let prec = x.prec();
    let mut acc = vec![vec![Float::new(prec); n]; n];
    for m in ms {
        for (ra, rm) in acc.iter_mut().zip(m) {
            for (v, w) in ra.iter_mut().zip(rm) {
                *v *= x;
                *v += w;
            }
        }
    }
    acc
}
