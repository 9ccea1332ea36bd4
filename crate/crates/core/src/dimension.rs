//! Counting exponents from per-scale rapid counts.
//!
//! At scale `n` the count of rapid cells grows like `2^(beta n)`; `beta` is read off as
//! the least-squares slope of `log2(count)` against `n` and compared with `1 - alpha^2`.
//! This is a box-type exponent at finite scales, not a Hausdorff measure computation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::DyadicPath;
use crate::rapid::{count_rapid_intervals, RapidCountRecord, RapidQuery};

pub const MIN_FIT_POINTS: usize = 3;

/// Smallest scale [`estimate_dimension`] accepts.
pub const MIN_SCALE: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `(n, log2 count)` pairs that entered the regression.
    pub points: Vec<(u32, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Smallest and largest scale offered to the fit, including dropped ones.
    pub n_range: (u32, u32),
    /// Scales whose count was zero.
    pub dropped_scales: Vec<u32>,
    /// Set when the fit came from [`estimate_dimension`].
    pub alpha: Option<f64>,
}

impl ExponentFit {
    /// Slopes outside `[-0.1, 1.1]` cannot be a dimension in `[0, 1]` plus fit noise.
    pub fn is_suspicious(&self) -> bool {
        !(-0.1..=1.1).contains(&self.slope)
    }
}

/// Ordinary least squares of `log2(count)` on `n`; zero counts are dropped, not smoothed.
pub fn fit_exponent(counts: &BTreeMap<u32, u64>) -> Result<ExponentFit> {
    fit_real_counts(&counts.iter().map(|(&n, &c)| (n, c as f64)).collect())
}

/// [`fit_exponent`] for non-integer counts, e.g. ensemble means. Non-positive counts
/// are dropped.
pub fn fit_real_counts(counts: &BTreeMap<u32, f64>) -> Result<ExponentFit> {
    let (first, last) = match (counts.keys().next(), counts.keys().next_back()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientData { usable: 0, required: MIN_FIT_POINTS }),
    };
    if let Some((n, c)) = counts.iter().find(|(_, c)| !c.is_finite()) {
        return Err(Error::Domain(format!("count {c} at scale {n} is not finite")));
    }
    let dropped_scales: Vec<u32> =
        counts.iter().filter(|(_, &c)| c <= 0.0).map(|(&n, _)| n).collect();
    let points: Vec<(u32, f64)> =
        counts.iter().filter(|(_, &c)| c > 0.0).map(|(&n, &c)| (n, c.log2())).collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { usable: points.len(), required: MIN_FIT_POINTS });
    }

    let k = points.len() as f64;
    let mean_x = points.iter().map(|&(n, _)| f64::from(n)).sum::<f64>() / k;
    let mean_y = points.iter().map(|&(_, y)| y).sum::<f64>() / k;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(n, y)| {
        let dx = f64::from(n) - mean_x;
        (sxx + dx * dx, sxy + dx * (y - mean_y))
    });
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|&(n, y)| {
            let r = y - (intercept + slope * f64::from(n));
            r * r
        })
        .sum();

    Ok(ExponentFit {
        points,
        slope,
        intercept,
        residual_rms: (sse / k).sqrt(),
        n_range: (first, last),
        dropped_scales,
        alpha: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub fit: ExponentFit,
    /// One record per scale `n_min..=n_max`, kept for audit.
    pub records: Vec<RapidCountRecord>,
}

/// Per-scale rapid counts for `n_min..=n_max`; an error from a failed fit carries no
/// records, so callers that need them on failure use [`rapid_counts`].
pub fn rapid_counts(
    path: &DyadicPath,
    alpha: f64,
    n_min: u32,
    n_max: u32,
    j: u32,
) -> Result<Vec<RapidCountRecord>> {
    if n_min < MIN_SCALE {
        return Err(Error::bounds("n_min", format!("{n_min} < {MIN_SCALE}")));
    }
    if n_max < n_min {
        return Err(Error::bounds("n_max", format!("{n_max} < n_min = {n_min}")));
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| count_rapid_intervals(path, &RapidQuery::new(alpha, n, j)?))
        .collect()
}

pub fn estimate_dimension(
    path: &DyadicPath,
    alpha: f64,
    n_min: u32,
    n_max: u32,
    j: u32,
) -> Result<DimensionEstimate> {
    let records = rapid_counts(path, alpha, n_min, n_max, j)?;
    let counts: BTreeMap<u32, u64> = records.iter().map(|r| (r.query.n, r.count)).collect();
    let mut fit = fit_exponent(&counts)?;
    fit.alpha = Some(alpha);
    Ok(DimensionEstimate { fit, records })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleComparison {
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_a - mean_b`
    pub difference: f64,
    pub pooled_sd: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

pub fn mean_slope(fits: &[ExponentFit]) -> Option<f64> {
    (!fits.is_empty()).then(|| fits.iter().map(|f| f.slope).sum::<f64>() / fits.len() as f64)
}

/// Same-exponent verdict: `|mean_a - mean_b| <= tolerance`. Every fit must share one
/// `alpha` and one scale range.
pub fn compare_ensembles(
    fits_a: &[ExponentFit],
    fits_b: &[ExponentFit],
    tolerance: f64,
) -> Result<EnsembleComparison> {
    if fits_a.is_empty() || fits_b.is_empty() {
        return Err(Error::Comparison("both ensembles must be non-empty".into()));
    }
    let reference = &fits_a[0];
    for f in fits_a.iter().chain(fits_b) {
        if f.alpha != reference.alpha {
            return Err(Error::Comparison(format!(
                "alpha {:?} differs from {:?}",
                f.alpha, reference.alpha
            )));
        }
        if f.n_range != reference.n_range {
            return Err(Error::Comparison(format!(
                "scale range {:?} differs from {:?}",
                f.n_range, reference.n_range
            )));
        }
    }

    let stats = |fits: &[ExponentFit]| {
        let mean = mean_slope(fits).unwrap();
        let ss: f64 = fits.iter().map(|f| (f.slope - mean).powi(2)).sum();
        (mean, ss, fits.len())
    };
    let (mean_a, ss_a, len_a) = stats(fits_a);
    let (mean_b, ss_b, len_b) = stats(fits_b);
    let dof = len_a + len_b - 2;
    let pooled_sd = if dof == 0 { 0.0 } else { ((ss_a + ss_b) / dof as f64).sqrt() };
    let difference = mean_a - mean_b;
    Ok(EnsembleComparison {
        mean_a,
        mean_b,
        difference,
        pooled_sd,
        tolerance,
        consistent: difference.abs() <= tolerance,
    })
}
