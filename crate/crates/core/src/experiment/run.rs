use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Mode, OutputFormat, PathFamily};
use crate::bounds::{inequality_suite, BoundCheck};
use crate::complexity::{oscillation_path, ComplexityReport, COMPRESSOR_IDENTITY};
use crate::dimension::{compare_ensembles, fit_exponent, rapid_counts, ExponentFit};
use crate::error::{Error, Result};
use crate::path::{generate_brownian, DyadicPath, RNG_IDENTITY};

pub const WORKERS_ENV: &str = "RAPID_DIM_WORKERS";

pub const SEED_DERIVATION: &str = "trial seed = base_seed + trial index (wrapping u64); Gaussian \
     increments use ChaCha8 stream 0 of that seed, oscillation codes use stream 1 + redraw index";

const OK: &str = "ok";

fn error_status(e: &Error) -> String {
    format!("error: {e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRow {
    pub trial: u64,
    pub seed: u64,
    pub family: PathFamily,
    pub resolution: u32,
    pub x1: Option<f64>,
    pub max: Option<f64>,
    pub min: Option<f64>,
    pub compressed_bits: Option<u64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub trial: u64,
    pub seed: u64,
    pub family: PathFamily,
    pub alpha: f64,
    pub n: Option<u32>,
    pub j: u32,
    pub cells: Option<u64>,
    pub count: Option<u64>,
    pub threshold: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionRow {
    pub trial: u64,
    pub seed: u64,
    pub family: PathFamily,
    pub alpha: f64,
    pub n: Option<u32>,
    pub j: u32,
    pub count: Option<u64>,
    pub threshold: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual_rms: Option<f64>,
    pub status: String,
}

/// `record` is `trial` for per-path fits and `summary` for the per-alpha verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub record: &'static str,
    pub alpha: f64,
    pub family: Option<PathFamily>,
    pub trial: Option<u64>,
    pub seed: Option<u64>,
    pub slope: Option<f64>,
    pub residual_rms: Option<f64>,
    pub mean_gaussian: Option<f64>,
    pub mean_oscillation: Option<f64>,
    pub difference: Option<f64>,
    pub pooled_sd: Option<f64>,
    pub consistent: Option<bool>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Results {
    Simulate(Vec<SimulateRow>),
    Count(Vec<CountRow>),
    Dimension(Vec<DimensionRow>),
    Bounds(Vec<BoundCheck>),
    Compare(Vec<CompareRow>),
}

impl Results {
    pub fn len(&self) -> usize {
        match self {
            Results::Simulate(r) => r.len(),
            Results::Count(r) => r.len(),
            Results::Dimension(r) => r.len(),
            Results::Bounds(r) => r.len(),
            Results::Compare(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn failures(&self) -> usize {
        let bad = |s: &str| s != OK;
        match self {
            Results::Simulate(r) => r.iter().filter(|r| bad(&r.status)).count(),
            Results::Count(r) => r.iter().filter(|r| bad(&r.status)).count(),
            Results::Dimension(r) => r.iter().filter(|r| bad(&r.status)).count(),
            Results::Bounds(r) => r.iter().filter(|r| !r.holds).count(),
            Results::Compare(r) => r.iter().filter(|r| bad(&r.status)).count(),
        }
    }

    pub fn write<W: std::io::Write>(&self, w: W, format: OutputFormat) -> Result<()> {
        match self {
            Results::Simulate(r) => write_rows(w, r, format),
            Results::Count(r) => write_rows(w, r, format),
            Results::Dimension(r) => write_rows(w, r, format),
            Results::Bounds(r) => write_rows(w, r, format),
            Results::Compare(r) => write_rows(w, r, format),
        }
    }
}

fn write_rows<W: std::io::Write, R: Serialize>(w: W, rows: &[R], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        OutputFormat::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn make_path(config: &ExperimentConfig, family: PathFamily, seed: u64) -> Result<(DyadicPath, Option<ComplexityReport>)> {
    match family {
        PathFamily::Gaussian => Ok((generate_brownian(config.resolution_exponent, seed)?, None)),
        PathFamily::Oscillation => {
            let (p, r) = oscillation_path(config.resolution_exponent, seed, config.deficiency_budget)?;
            Ok((p, Some(r)))
        }
    }
}

/// Worker count: `RAPID_DIM_WORKERS` if set, else the config, else every core.
pub fn resolve_workers(config: &ExperimentConfig) -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(Error::config(WORKERS_ENV, format!("`{v}` is not a positive integer"))),
        };
    }
    Ok(config.workers.unwrap_or_else(rayon::current_num_threads))
}

/// Runs the experiment in memory; nothing is written.
pub fn execute(config: &ExperimentConfig) -> Result<Results> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(config)?)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| execute_in_pool(config))
}

fn per_trial<T: Send>(config: &ExperimentConfig, f: impl Fn(u64, u64) -> Vec<T> + Sync) -> Vec<T> {
    let chunks: Vec<Vec<T>> =
        (0..config.trials).into_par_iter().map(|t| f(t, config.trial_seed(t))).collect();
    chunks.into_iter().flatten().collect()
}

fn execute_in_pool(config: &ExperimentConfig) -> Result<Results> {
    let family = config.path_family;
    Ok(match config.mode {
        Mode::Bounds => Results::Bounds(inequality_suite()?),
        Mode::Simulate => Results::Simulate(per_trial(config, |trial, seed| {
            let row = match make_path(config, family, seed) {
                Ok((p, report)) => {
                    let v = p.values();
                    SimulateRow {
                        trial,
                        seed,
                        family,
                        resolution: config.resolution_exponent,
                        x1: Some(v[v.len() - 1]),
                        max: Some(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                        min: Some(v.iter().copied().fold(f64::INFINITY, f64::min)),
                        compressed_bits: report.map(|r| r.compressed_length),
                        status: OK.into(),
                    }
                }
                Err(e) => SimulateRow {
                    trial,
                    seed,
                    family,
                    resolution: config.resolution_exponent,
                    x1: None,
                    max: None,
                    min: None,
                    compressed_bits: None,
                    status: error_status(&e),
                },
            };
            vec![row]
        })),
        Mode::Count => Results::Count(per_trial(config, |trial, seed| count_trial(config, trial, seed))),
        Mode::Dimension => {
            Results::Dimension(per_trial(config, |trial, seed| dimension_trial(config, trial, seed)))
        }
        Mode::Compare => Results::Compare(compare(config)),
    })
}

fn count_trial(config: &ExperimentConfig, trial: u64, seed: u64) -> Vec<CountRow> {
    let family = config.path_family;
    let failed = |alpha: f64, n: Option<u32>, e: &Error| CountRow {
        trial,
        seed,
        family,
        alpha,
        n,
        j: config.j,
        cells: None,
        count: None,
        threshold: None,
        status: error_status(e),
    };
    let path = match make_path(config, family, seed) {
        Ok((p, _)) => p,
        Err(e) => return config.alphas.iter().map(|&a| failed(a, None, &e)).collect(),
    };
    let mut rows = Vec::new();
    for &alpha in &config.alphas {
        match rapid_counts(&path, alpha, config.n_min, config.n_max, config.j) {
            Ok(records) => rows.extend(records.into_iter().map(|r| CountRow {
                trial,
                seed,
                family,
                alpha,
                n: Some(r.query.n),
                j: config.j,
                cells: Some(1 << r.query.n),
                count: Some(r.count),
                threshold: Some(r.threshold),
                status: OK.into(),
            })),
            Err(e) => rows.push(failed(alpha, None, &e)),
        }
    }
    rows
}

fn dimension_trial(config: &ExperimentConfig, trial: u64, seed: u64) -> Vec<DimensionRow> {
    let family = config.path_family;
    let blank = |alpha: f64, status: String| DimensionRow {
        trial,
        seed,
        family,
        alpha,
        n: None,
        j: config.j,
        count: None,
        threshold: None,
        slope: None,
        intercept: None,
        residual_rms: None,
        status,
    };
    let path = match make_path(config, family, seed) {
        Ok((p, _)) => p,
        Err(e) => return config.alphas.iter().map(|&a| blank(a, error_status(&e))).collect(),
    };
    let mut rows = Vec::new();
    for &alpha in &config.alphas {
        let records = match rapid_counts(&path, alpha, config.n_min, config.n_max, config.j) {
            Ok(r) => r,
            Err(e) => {
                rows.push(blank(alpha, error_status(&e)));
                continue;
            }
        };
        let counts: BTreeMap<u32, u64> = records.iter().map(|r| (r.query.n, r.count)).collect();
        let fit = fit_exponent(&counts);
        let status = fit.as_ref().map_or_else(error_status, |_| OK.to_string());
        for r in records {
            rows.push(DimensionRow {
                n: Some(r.query.n),
                count: Some(r.count),
                threshold: Some(r.threshold),
                slope: fit.as_ref().ok().map(|f| f.slope),
                intercept: fit.as_ref().ok().map(|f| f.intercept),
                residual_rms: fit.as_ref().ok().map(|f| f.residual_rms),
                ..blank(alpha, status.clone())
            });
        }
    }
    rows
}

struct TrialFits {
    trial: u64,
    seed: u64,
    family: PathFamily,
    /// One entry per configured alpha.
    fits: Vec<Result<ExponentFit>>,
}

fn fits_for(config: &ExperimentConfig, family: PathFamily, trial: u64, seed: u64) -> TrialFits {
    let fits = match make_path(config, family, seed) {
        Ok((path, _)) => config
            .alphas
            .iter()
            .map(|&alpha| {
                let records = rapid_counts(&path, alpha, config.n_min, config.n_max, config.j)?;
                let counts: BTreeMap<u32, u64> = records.iter().map(|r| (r.query.n, r.count)).collect();
                let mut fit = fit_exponent(&counts)?;
                fit.alpha = Some(alpha);
                Ok(fit)
            })
            .collect(),
        Err(e) => {
            let msg = e.to_string();
            config.alphas.iter().map(|_| Err(Error::Domain(msg.clone()))).collect()
        }
    };
    TrialFits { trial, seed, family, fits }
}

fn compare(config: &ExperimentConfig) -> Vec<CompareRow> {
    let families = [PathFamily::Gaussian, PathFamily::Oscillation];
    let trials: Vec<TrialFits> = families
        .iter()
        .flat_map(|&f| (0..config.trials).map(move |t| (f, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(family, t)| fits_for(config, family, t, config.trial_seed(t)))
        .collect();

    let mut rows = Vec::new();
    for (ai, &alpha) in config.alphas.iter().enumerate() {
        let trial_row = |tf: &TrialFits| {
            let fit = &tf.fits[ai];
            CompareRow {
                record: "trial",
                alpha,
                family: Some(tf.family),
                trial: Some(tf.trial),
                seed: Some(tf.seed),
                slope: fit.as_ref().ok().map(|f| f.slope),
                residual_rms: fit.as_ref().ok().map(|f| f.residual_rms),
                mean_gaussian: None,
                mean_oscillation: None,
                difference: None,
                pooled_sd: None,
                consistent: None,
                status: fit.as_ref().map_or_else(error_status, |_| OK.to_string()),
            }
        };
        rows.extend(trials.iter().map(trial_row));

        let ok_fits = |family: PathFamily| -> Vec<ExponentFit> {
            trials
                .iter()
                .filter(|tf| tf.family == family)
                .filter_map(|tf| tf.fits[ai].as_ref().ok().cloned())
                .collect()
        };
        let summary = compare_ensembles(
            &ok_fits(PathFamily::Gaussian),
            &ok_fits(PathFamily::Oscillation),
            config.tolerance,
        );
        rows.push(match summary {
            Ok(s) => CompareRow {
                record: "summary",
                alpha,
                family: None,
                trial: None,
                seed: None,
                slope: None,
                residual_rms: None,
                mean_gaussian: Some(s.mean_a),
                mean_oscillation: Some(s.mean_b),
                difference: Some(s.difference),
                pooled_sd: Some(s.pooled_sd),
                consistent: Some(s.consistent),
                status: OK.into(),
            },
            Err(e) => CompareRow {
                record: "summary",
                alpha,
                family: None,
                trial: None,
                seed: None,
                slope: None,
                residual_rms: None,
                mean_gaussian: None,
                mean_oscillation: None,
                difference: None,
                pooled_sd: None,
                consistent: None,
                status: error_status(&e),
            },
        });
    }
    rows
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    /// Config file text, when the run came from a file.
    pub config_source: Option<String>,
    pub rng: &'static str,
    pub compressor: &'static str,
    pub seed_derivation: &'static str,
    pub trial_seeds: Vec<u64>,
    pub workers: usize,
    pub rows: usize,
    /// Errored rows, or failed inequalities in `bounds` mode.
    pub failures: usize,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: ExperimentManifest,
    pub results: Results,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs the experiment and writes the results file and its `.manifest.json` sidecar.
pub fn run(config: &ExperimentConfig, config_source: Option<String>) -> Result<RunReport> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let workers = resolve_workers(config)?;
    let results = execute(config)?;

    results.write(create(&config.output_path)?, config.output_format)?;

    let manifest = ExperimentManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        config_source,
        rng: RNG_IDENTITY,
        compressor: COMPRESSOR_IDENTITY,
        seed_derivation: SEED_DERIVATION,
        trial_seeds: match config.mode {
            Mode::Bounds => Vec::new(),
            _ => (0..config.trials).map(|t| config.trial_seed(t)).collect(),
        },
        workers,
        rows: results.len(),
        failures: results.failures(),
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
    };
    let manifest_path = config.manifest_path();
    let mut w = create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    std::io::Write::write_all(&mut w, b"\n")?;

    Ok(RunReport { results_path: config.output_path.clone(), manifest_path, manifest, results })
}
