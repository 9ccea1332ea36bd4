//! Reference implementations used only by tests. None of them call into the code path
//! they check.
#![allow(dead_code)]

use std::f64::consts::{LN_2, PI};

/// Cells `k` with some grid `t` in `[k 2^-n, k 2^-n + 2^-(n+j)]` such that
/// `2^(n/2) |X((k+1) 2^-n) - X(t)| >= alpha sqrt(2 n ln 2)`, by a plain double loop.
pub fn naive_rapid_cells(values: &[f64], big_n: u32, alpha: f64, n: u32, j: u32) -> Vec<u64> {
    let grid = 1u64 << big_n;
    let threshold = alpha * (2.0 * n as f64 * LN_2).sqrt();
    let scale = (n as f64 / 2.0).exp2();
    let mut out = Vec::new();
    for k in 0..(1u64 << n) {
        let left = (k * grid) >> n;
        let right = ((k + 1) * grid) >> n;
        let window_end = left + (grid >> (n + j));
        let mut hit = false;
        let mut t = left;
        while t <= window_end {
            if scale * (values[right as usize] - values[t as usize]).abs() >= threshold {
                hit = true;
                break;
            }
            t += 1;
        }
        if hit {
            out.push(k);
        }
    }
    out
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Interval with the integrand at both ends and the midpoint.
#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
}

impl Panel {
    fn new(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Self {
        Self { a, b, fa: f(a), fm: f(0.5 * (a + b)), fb: f(b) }
    }

    fn simpson(&self) -> f64 {
        (self.b - self.a) / 6.0 * (self.fa + 4.0 * self.fm + self.fb)
    }

    fn halves(&self, f: &impl Fn(f64) -> f64) -> (Self, Self) {
        let m = 0.5 * (self.a + self.b);
        let left = Self { a: self.a, b: m, fa: self.fa, fm: f(0.5 * (self.a + m)), fb: self.fm };
        let right = Self { a: m, b: self.b, fa: self.fm, fm: f(0.5 * (m + self.b)), fb: self.fb };
        (left, right)
    }
}

fn adaptive(f: &impl Fn(f64) -> f64, panel: Panel, whole: f64, tol: f64, depth: u32) -> f64 {
    let (lp, rp) = panel.halves(f);
    let (left, right) = (lp.simpson(), rp.simpson());
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, lp, left, tol / 2.0, depth - 1) + adaptive(f, rp, right, tol / 2.0, depth - 1)
}

/// `P{Z >= y}` by adaptive Simpson quadrature of the density over `[y, y + 16]`, in
/// quarter-width panels, each to about `1e-13` relative. The neglected remainder is
/// below `1e-55` relative to the tail.
pub fn quadrature_upper_tail(y: f64) -> f64 {
    let mut total = 0.0;
    for panel in 0..64 {
        let a = y + panel as f64 * 0.25;
        let panel = Panel::new(&density, a, a + 0.25);
        total += adaptive(&density, panel, panel.simpson(), 1e-13 * density(a).max(1e-300), 30);
    }
    total
}

/// `P{S >= r}` by walking all `2^m` outcomes.
pub fn enumerated_binomial_tail(m: u32, p: f64, r: u32) -> f64 {
    let q = 1.0 - p;
    (0u32..1 << m)
        .filter(|w| w.count_ones() >= r)
        .map(|w| {
            let k = w.count_ones() as i32;
            p.powi(k) * q.powi(m as i32 - k)
        })
        .sum()
}

/// `P{S >= r}` from exact integer binomial coefficients, for `m <= 64`.
pub fn integer_binomial_tail(m: u32, p: f64, r: u32) -> f64 {
    assert!(m <= 64);
    let q = 1.0 - p;
    let mut coeff: u128 = 1;
    let mut total = 0.0;
    for k in 0..=m {
        if k >= r {
            total += coeff as f64 * p.powi(k as i32) * q.powi((m - k) as i32);
        }
        coeff = coeff * u128::from(m - k) / u128::from(k + 1);
    }
    total
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
