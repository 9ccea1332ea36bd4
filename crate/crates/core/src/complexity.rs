//! Compressor-based incompressibility screen for codes, and the cross-resolution
//! distance profile between a path and its sign-code approximants.
//!
//! Kolmogorov complexity is not computable. A fixed lossless compressor stands in for
//! it: a code of `n` bits passes when its compressed form still needs at least
//! `n - d` bits.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{decode_dyadic, encode, uniform_distance, BitCode, DyadicPath};

pub const COMPRESSOR_IDENTITY: &str = "raw deflate, level 9 (flate2 1.x, miniz_oxide backend)";

pub const DEFAULT_DEFICIENCY_BUDGET: u64 = 64;

/// Below this length the compressor's fixed overhead dominates.
pub const MIN_SCREEN_LENGTH: usize = 64;

/// Redraws allowed in [`screened_random_code`] before giving up.
pub const MAX_SCREEN_ATTEMPTS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScreenStatus {
    Screened,
    /// Code shorter than [`MIN_SCREEN_LENGTH`]; the verdict carries no information.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub length: usize,
    /// Compressed size in bits.
    pub compressed_length: u64,
    pub ratio: f64,
    pub deficiency_budget: u64,
    pub passes: bool,
    pub status: ScreenStatus,
}

/// Compressed size of `bytes` in bits.
pub fn compressed_bits(bytes: &[u8]) -> u64 {
    let mut enc = DeflateEncoder::new(Vec::with_capacity(bytes.len() + 64), Compression::best());
    // writes into a Vec cannot fail
    enc.write_all(bytes).expect("in-memory deflate");
    let out = enc.finish().expect("in-memory deflate");
    out.len() as u64 * 8
}

pub fn screen_code(code: &BitCode, deficiency_budget: u64) -> ComplexityReport {
    let length = code.len();
    let compressed_length = compressed_bits(&code.to_packed_bytes());
    ComplexityReport {
        length,
        compressed_length,
        ratio: compressed_length as f64 / length as f64,
        deficiency_budget,
        passes: compressed_length + deficiency_budget >= length as u64,
        status: if length < MIN_SCREEN_LENGTH { ScreenStatus::Vacuous } else { ScreenStatus::Screened },
    }
}

/// Uniform random code of `len` bits that passes [`screen_code`]. Attempt `a` draws from
/// stream `a + 1` of the generator seeded with `seed`, so stream 0 stays free for
/// Gaussian paths with the same seed. Returns the code, its report and the number of
/// draws used.
pub fn screened_random_code(
    len: usize,
    seed: u64,
    deficiency_budget: u64,
) -> Result<(BitCode, ComplexityReport, u32)> {
    for attempt in 0..MAX_SCREEN_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(attempt) + 1);
        let code = BitCode::random(len, &mut rng)?;
        let report = screen_code(&code, deficiency_budget);
        if report.passes {
            return Ok((code, report, attempt + 1));
        }
    }
    Err(Error::Domain(format!(
        "no code of length {len} passed the screen in {MAX_SCREEN_ATTEMPTS} draws (seed {seed})"
    )))
}

/// Decoded screened random code of length `2^N` on the grid `2^-N`.
pub fn oscillation_path(
    resolution_exponent: u32,
    seed: u64,
    deficiency_budget: u64,
) -> Result<(DyadicPath, ComplexityReport)> {
    if resolution_exponent > crate::path::MAX_RESOLUTION {
        return Err(Error::bounds("resolution exponent", format!("{resolution_exponent}")));
    }
    let (code, report, _) =
        screened_random_code(1usize << resolution_exponent, seed, deficiency_budget)?;
    Ok((decode_dyadic(&code, resolution_exponent)?, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub m: u32,
    /// Number of code cells, `2^m`.
    pub cells: u64,
    pub distance: f64,
}

/// Uniform distance between the path and `decode(encode(path, 2^m))` for `m = 1..=m_max`.
pub fn convergence_profile(path: &DyadicPath, m_max: u32) -> Result<Vec<ConvergencePoint>> {
    let big_n = path.resolution_exponent();
    if m_max > big_n {
        return Err(Error::Resolution(format!("2^{m_max} cells exceed the 2^{big_n} grid")));
    }
    (1..=m_max)
        .map(|m| {
            let cells = 1usize << m;
            let approx = decode_dyadic(&encode(path, cells)?, big_n)?;
            Ok(ConvergencePoint { m, cells: cells as u64, distance: uniform_distance(path, &approx)? })
        })
        .collect()
}
