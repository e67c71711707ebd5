//! Tensor-product Gauss–Legendre rules on the truncated fundamental domain
//! `|x| ≤ 1/2, √(1−x²) ≤ y ≤ Y`, mapped to `(x, u) ∈ [−1/2, 1/2] × [0, 1]`
//! by `y = b(x) + u (Y − b(x))` with `b(x) = √(1−x²)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::special::gauss_legendre;

/// Node of a cell rule: position and weight including the Jacobian and the
/// invariant measure `dx dy / y²`.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// Nodes of every cell for a primary rule and a lower-order companion; the
/// difference of the two cell sums is the per-cell error estimate.
#[derive(Clone, Debug)]
pub struct CellRules {
    pub cells: usize,
    pub high_per_cell: usize,
    pub low_per_cell: usize,
    pub high: Vec<Node>,
    pub low: Vec<Node>,
}

fn cell_nodes(x0: f64, x1: f64, u0: f64, u1: f64, y_max: f64, order: usize, out: &mut Vec<Node>) {
    let (t, w) = gauss_legendre(order);
    let hx = 0.5 * (x1 - x0);
    let hu = 0.5 * (u1 - u0);
    for (ti, wi) in t.iter().zip(&w) {
        let x = x0 + hx * (ti + 1.0);
        let b = (1.0 - x * x).sqrt();
        let span = y_max - b;
        for (tj, wj) in t.iter().zip(&w) {
            let u = u0 + hu * (tj + 1.0);
            let y = b + u * span;
            out.push(Node { x, y, w: wi * wj * hx * hu * span / (y * y) });
        }
    }
}

impl CellRules {
    pub fn new(y_max: f64, nx: usize, ny: usize, order: usize, low_order: usize) -> Self {
        let mut high = Vec::with_capacity(nx * ny * order * order);
        let mut low = Vec::with_capacity(nx * ny * low_order * low_order);
        for i in 0..nx {
            let x0 = -0.5 + i as f64 / nx as f64;
            let x1 = -0.5 + (i + 1) as f64 / nx as f64;
            for j in 0..ny {
                let u0 = j as f64 / ny as f64;
                let u1 = (j + 1) as f64 / ny as f64;
                cell_nodes(x0, x1, u0, u1, y_max, order, &mut high);
                cell_nodes(x0, x1, u0, u1, y_max, low_order, &mut low);
            }
        }
        Self {
            cells: nx * ny,
            high_per_cell: order * order,
            low_per_cell: low_order * low_order,
            high,
            low,
        }
    }

    /// Integral with the primary rule and the summed per-cell discrepancy
    /// to the companion rule. `high_vals`/`low_vals` are integrand values at
    /// the nodes (without the weights).
    pub fn integrate(&self, high_vals: &[Complex64], low_vals: &[Complex64]) -> (Complex64, f64) {
        let per_cell: Vec<(Complex64, f64)> = (0..self.cells)
            .into_par_iter()
            .map(|c| {
                let hs = c * self.high_per_cell;
                let ls = c * self.low_per_cell;
                let mut hi = Complex64::new(0.0, 0.0);
                for (n, v) in self.high[hs..hs + self.high_per_cell].iter().zip(&high_vals[hs..]) {
                    hi += v * n.w;
                }
                let mut lo = Complex64::new(0.0, 0.0);
                for (n, v) in self.low[ls..ls + self.low_per_cell].iter().zip(&low_vals[ls..]) {
                    lo += v * n.w;
                }
                (hi, (hi - lo).norm())
            })
            .collect();
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        let mut err = Neumaier::default();
        for (v, e) in per_cell {
            re.add(v.re);
            im.add(v.im);
            err.add(e);
        }
        (Complex64::new(re.sum(), im.sum()), err.sum())
    }
}

/// Compensated summation, accumulated in a fixed order.
#[derive(Default, Clone, Copy, Debug)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
