//! Closed-form probability estimates: Feller's binomial tail bound and its exact
//! counterpart, the Mills-ratio sandwich for the Gaussian tail, the reflection
//! principle, and the lower bound on the per-cell rapid probability.

// negated comparisons below also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest trial count [`exact_binomial_tail`] sums directly.
pub const MAX_EXACT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTailQuery {
    /// Number of Bernoulli trials.
    pub m: u64,
    pub p: f64,
    /// Threshold on the success count.
    pub r: f64,
}

impl BinomialTailQuery {
    pub fn new(m: u64, p: f64, r: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("binomial trial count must be >= 1".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("success probability {p} not in (0, 1)")));
        }
        if r.is_nan() {
            return Err(Error::Domain("threshold r is NaN".into()));
        }
        Ok(Self { m, p, r })
    }

    pub fn mean(&self) -> f64 {
        self.m as f64 * self.p
    }
}

/// `P{S >= r} <= r q / (r - m p)^2`, valid only for `r > m p`.
pub fn feller_upper_bound(q: &BinomialTailQuery) -> Result<f64> {
    let gap = q.r - q.mean();
    if !(gap > 0.0) {
        return Err(Error::Domain(format!(
            "Feller bound needs r > m p, got r = {} and m p = {}",
            q.r,
            q.mean()
        )));
    }
    Ok(q.r * (1.0 - q.p) / (gap * gap))
}

/// `P{S >= ceil(r)}` summed term by term in log space with compensated summation.
pub fn exact_binomial_tail(q: &BinomialTailQuery) -> Result<f64> {
    if q.m > MAX_EXACT_TRIALS {
        return Err(Error::Capacity(format!(
            "{} trials exceeds the direct-summation limit {MAX_EXACT_TRIALS}",
            q.m
        )));
    }
    let m = q.m;
    let first = q.r.ceil();
    if first <= 0.0 {
        return Ok(1.0);
    }
    if first > m as f64 {
        return Ok(0.0);
    }
    let first = first as u64;

    let (ln_p, ln_q) = (q.p.ln(), (-q.p).ln_1p());
    let ln_fact_m = libm::lgamma(m as f64 + 1.0);
    let log_term = |k: u64| {
        ln_fact_m - libm::lgamma(k as f64 + 1.0) - libm::lgamma((m - k) as f64 + 1.0)
            + k as f64 * ln_p
            + (m - k) as f64 * ln_q
    };
    // terms are unimodal; the largest one in range is at the mode or at `first`
    let mode = (((m + 1) as f64 * q.p).floor() as u64).min(m);
    let peak = log_term(mode.max(first));

    let mut sum = NeumaierSum::default();
    for k in first..=m {
        let t = (log_term(k) - peak).exp();
        sum.add(t);
        if k > mode && t < 1e-20 * sum.value() {
            break;
        }
    }
    Ok((sum.value() * peak.exp()).min(1.0))
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Standard normal density.
pub fn gaussian_density(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * PI).sqrt()
}

/// `P{Z >= y}` for standard normal `Z`, from the complementary error function.
pub fn gaussian_upper_tail(y: f64) -> f64 {
    0.5 * libm::erfc(y * FRAC_1_SQRT_2)
}

/// `(1/y - 1/y^3) phi(y)`, a lower bound on `P{Z >= y}` that is positive for `y > 1`.
///
/// The normalizing `1/sqrt(2 pi)` sits on the bound side here; without it the
/// inequality is false (at `y = 2` the unnormalized left side is about 0.0507 against
/// a tail of 0.0228).
pub fn gaussian_tail_lower_bound(y: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(format!("Mills lower bound needs y > 1, got {y}")));
    }
    Ok((1.0 / y - 1.0 / (y * y * y)) * gaussian_density(y))
}

/// `phi(y) / y`, the matching upper bound on `P{Z >= y}` for `y > 0`.
pub fn gaussian_tail_upper_bound(y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("Mills upper bound needs y > 0, got {y}")));
    }
    Ok(gaussian_density(y) / y)
}

/// `P{max_[0,1] X >= b} = 2 P{X(1) >= b}` for standard Brownian motion.
pub fn reflection_tail(b: f64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::Domain(format!("reflection identity needs b >= 0, got {b}")));
    }
    Ok(2.0 * gaussian_upper_tail(b))
}

/// `2^(-alpha^2 n) / (alpha sqrt(2 n ln 2))`, the lower bound on the probability that a
/// cell at scale `n` is rapid.
pub fn rapid_probability_lower_bound(alpha: f64, n: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} not in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("scale n must be >= 1".into()));
    }
    let n = f64::from(n);
    Ok((-alpha * alpha * n).exp2() / (alpha * (2.0 * n * LN_2).sqrt()))
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub suite: &'static str,
    /// Grid point, as `key=value` pairs separated by `;`.
    pub point: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(suite: &'static str, point: String, lhs: f64, rhs: f64) -> Self {
        Self { suite, point, lhs, rhs, holds: lhs <= rhs }
    }
}

pub const FELLER_TRIALS: [u64; 4] = [16, 64, 256, 1024];

/// `p = 0.05, 0.10, ..., 0.95`.
pub fn probability_grid() -> impl Iterator<Item = f64> {
    (1..=19).map(|i| f64::from(i) / 20.0)
}

/// `y = 1.05, 1.10, ..., 8.00`.
pub fn mills_grid() -> impl Iterator<Item = f64> {
    (21..=160).map(|i| f64::from(i) / 20.0)
}

/// Exact tail against the Feller bound over every `m` in [`FELLER_TRIALS`], every `p` in
/// [`probability_grid`] and every integer `r` in `(m p, m]`.
pub fn feller_suite() -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for m in FELLER_TRIALS {
        for p in probability_grid() {
            let r_min = (m as f64 * p).floor() as u64 + 1;
            for r in r_min..=m {
                let q = BinomialTailQuery::new(m, p, r as f64)?;
                out.push(BoundCheck::new(
                    "feller",
                    format!("m={m};p={p};r={r}"),
                    exact_binomial_tail(&q)?,
                    feller_upper_bound(&q)?,
                ));
            }
        }
    }
    Ok(out)
}

/// Both Mills bounds around the erfc-based tail on [`mills_grid`].
pub fn mills_suite() -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for y in mills_grid() {
        let tail = gaussian_upper_tail(y);
        out.push(BoundCheck::new("mills_lower", format!("y={y}"), gaussian_tail_lower_bound(y)?, tail));
        out.push(BoundCheck::new("mills_upper", format!("y={y}"), tail, gaussian_tail_upper_bound(y)?));
    }
    Ok(out)
}

/// Everything the `bounds` experiment mode reports.
pub fn inequality_suite() -> Result<Vec<BoundCheck>> {
    let mut out = feller_suite()?;
    out.extend(mills_suite()?);
    Ok(out)
}
