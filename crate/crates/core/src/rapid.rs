//! Rapid dyadic intervals and pointwise growth ratios.
//!
//! Cell `k` at scale `n` is rapid when some grid time `t` in the leftmost
//! `2^-(n+j)` part of the cell satisfies
//!
//! ```text
//! 2^(n/2) |X((k+1) 2^-n) - X(t)| >= alpha * sqrt(2 n ln 2)
//! ```
//!
//! The existential over `t` is taken over every grid sample in the closed window,
//! endpoints included.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::DyadicPath;

/// Which side the rapid points are approximated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    /// Window at the left end of each cell, compared against the right endpoint.
    #[default]
    Right,
    /// Same construction on the time-reversed path; cell indices refer to original time.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapidQuery {
    pub alpha: f64,
    pub n: u32,
    pub j: u32,
    #[serde(default)]
    pub approach: Approach,
}

impl RapidQuery {
    /// `alpha = 0` is accepted as the degenerate zero-threshold limit.
    pub fn new(alpha: f64, n: u32, j: u32) -> Result<Self> {
        let q = Self { alpha, n, j, approach: Approach::Right };
        q.validate()?;
        Ok(q)
    }

    pub fn from_left(mut self) -> Self {
        self.approach = Approach::Left;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!("alpha = {} not in [0, 1]", self.alpha)));
        }
        if self.n == 0 {
            return Err(Error::Domain("scale n must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RapidCountRecord {
    pub query: RapidQuery,
    pub rapid_cells: Vec<u64>,
    pub count: u64,
    pub threshold: f64,
}

/// `alpha * sqrt(2 n ln 2)`. With `h = 2^-n` this equals
/// `2^(n/2) * alpha * sqrt(2 h ln(1/h))`.
pub fn threshold(alpha: f64, n: u32) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha = {alpha} must be finite and >= 0")));
    }
    if n == 0 {
        return Err(Error::Domain("scale n must be >= 1".into()));
    }
    Ok(alpha * (2.0 * f64::from(n) * LN_2).sqrt())
}

/// `2^(n/2)`, the rescaling of a cell-size increment to unit variance.
pub(crate) fn cell_scale(n: u32) -> f64 {
    (f64::from(n) / 2.0).exp2()
}

pub fn count_rapid_intervals(path: &DyadicPath, query: &RapidQuery) -> Result<RapidCountRecord> {
    query.validate()?;
    let big_n = path.resolution_exponent();
    let (n, j) = (query.n, query.j);
    if n + j > big_n {
        return Err(Error::Resolution(format!(
            "n + j = {} exceeds path resolution {big_n}",
            n + j
        )));
    }
    let thr = threshold(query.alpha, n)?;
    let scale = cell_scale(n);
    let cell = 1usize << (big_n - n);
    let window = 1usize << (big_n - n - j);
    let cells = 1u64 << n;

    let reversed;
    let values = match query.approach {
        Approach::Right => path.values(),
        Approach::Left => {
            reversed = path.time_reversed();
            reversed.values()
        }
    };

    let is_rapid = |k: u64| {
        let start = k as usize * cell;
        let right = values[start + cell];
        let widest = values[start..=start + window]
            .iter()
            .fold(0.0f64, |m, v| m.max((right - v).abs()));
        scale * widest >= thr
    };

    let mut rapid_cells: Vec<u64> = (0..cells).into_par_iter().filter(|&k| is_rapid(k)).collect();
    if query.approach == Approach::Left {
        rapid_cells = rapid_cells.into_iter().rev().map(|k| cells - 1 - k).collect();
    }
    Ok(RapidCountRecord {
        query: *query,
        count: rapid_cells.len() as u64,
        rapid_cells,
        threshold: thr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `sqrt(2 h ln(1/h))`
    Rapid,
    /// `sqrt(2 h ln ln(1/h))`
    Lil,
}

impl Normalization {
    pub fn denominator(self, h: f64) -> f64 {
        let log_inv = -h.ln();
        match self {
            Normalization::Rapid => (2.0 * h * log_inv).sqrt(),
            Normalization::Lil => (2.0 * h * log_inv.ln()).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatio {
    /// `h = 2^-m`
    pub m: u32,
    pub h: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStatistic {
    pub t0: f64,
    pub normalization: Normalization,
    pub values: Vec<GrowthRatio>,
    pub sup_ratio: f64,
}

impl GrowthStatistic {
    /// Rapid-at-resolution flag; only meaningful under [`Normalization::Rapid`].
    pub fn is_rapid(&self, alpha: f64) -> bool {
        self.sup_ratio >= alpha
    }
}

/// Ratios `|X(t0 + h) - X(t0)| / denom(h)` for `h = 2^-m`, `m = 2..=N`, `t0 + h <= 1`.
pub fn growth_statistic(
    path: &DyadicPath,
    t0: f64,
    normalization: Normalization,
) -> Result<GrowthStatistic> {
    let big_n = path.resolution_exponent();
    if big_n < 2 {
        return Err(Error::Resolution(format!("resolution {big_n} leaves no h = 2^-m with m >= 2")));
    }
    let steps = path.steps();
    let pos = t0 * steps as f64;
    if !(0.0..1.0).contains(&t0) || pos.fract() != 0.0 {
        return Err(Error::Grid(format!("{t0} is not in {{k 2^-{big_n}}} ∩ [0, 1)")));
    }
    let i0 = pos as usize;
    let v = path.values();
    let values: Vec<GrowthRatio> = (2..=big_n)
        .filter_map(|m| {
            let span = 1usize << (big_n - m);
            (i0 + span <= steps).then(|| {
                let h = (-f64::from(m)).exp2();
                let ratio = (v[i0 + span] - v[i0]).abs() / normalization.denominator(h);
                GrowthRatio { m, h, ratio }
            })
        })
        .collect();
    let sup_ratio = values.iter().fold(0.0f64, |s, r| s.max(r.ratio));
    Ok(GrowthStatistic { t0, normalization, values, sup_ratio })
}
