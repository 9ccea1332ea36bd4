//! Sample paths on uniform grids of `[0, 1]`.
//!
//! A [`GridPath`] is any function sampled at `k / steps`, `k = 0..=steps`, with the
//! value at `t = 0` pinned to zero. A [`DyadicPath`] is the special case
//! `steps = 2^N`; Brownian realizations live there, as do the decoded
//! piecewise-linear oscillations used for comparison.
//!
//! The codec between paths and `±1` words: [`encode`] records whether the path goes up
//! or not across each of `n` equal cells, and [`decode`] builds the piecewise-linear
//! function with slope `bits[i] * sqrt(n)` on cell `i`.

use std::io::{Read, Write};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest accepted resolution exponent; `2^26` doubles is about half a gigabyte.
pub const MAX_RESOLUTION: u32 = 26;

/// Identity of the generator pair used by [`generate_brownian`], echoed into manifests.
pub const RNG_IDENTITY: &str =
    "ChaCha8Rng (rand_chacha 0.9, seed_from_u64) + StandardNormal ziggurat (rand_distr 0.5)";

const PATH_MAGIC: [u8; 4] = *b"RDP1";

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    values: Vec<f64>,
}

impl GridPath {
    /// Wraps grid samples. Requires at least two samples, `values[0] == 0` and every
    /// value finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::bounds("grid length", format!("{} < 2 samples", values.len())));
        }
        if values[0] != 0.0 {
            return Err(Error::Domain(format!("path must start at 0, got {}", values[0])));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {i}")));
        }
        Ok(Self { values })
    }

    /// Number of grid cells; samples sit at `k / steps`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

/// A path sampled on `{k 2^-N : 0 <= k <= 2^N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPath {
    resolution_exponent: u32,
    grid: GridPath,
}

impl DyadicPath {
    pub fn from_values(resolution_exponent: u32, values: Vec<f64>) -> Result<Self> {
        if resolution_exponent > MAX_RESOLUTION {
            return Err(Error::bounds(
                "resolution exponent",
                format!("{resolution_exponent} > {MAX_RESOLUTION}"),
            ));
        }
        let expected = (1usize << resolution_exponent) + 1;
        if values.len() != expected {
            return Err(Error::Resolution(format!(
                "resolution {resolution_exponent} needs {expected} samples, got {}",
                values.len()
            )));
        }
        Ok(Self { resolution_exponent, grid: GridPath::new(values)? })
    }

    /// Reinterprets a grid path whose step count is a power of two.
    pub fn from_grid(grid: GridPath) -> Result<Self> {
        let steps = grid.steps();
        if !steps.is_power_of_two() {
            return Err(Error::Resolution(format!("{steps} grid steps is not a power of two")));
        }
        Self::from_values(steps.trailing_zeros(), grid.into_values())
    }

    pub fn resolution_exponent(&self) -> u32 {
        self.resolution_exponent
    }

    pub fn grid(&self) -> &GridPath {
        &self.grid
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Ok(Self { resolution_exponent: self.resolution_exponent, grid: self.grid.scaled(factor)? })
    }

    /// `t -> X(1 - t) - X(1)`, which turns left-approximable behaviour into
    /// right-approximable behaviour.
    pub fn time_reversed(&self) -> Self {
        let v = self.grid.values();
        let end = v[v.len() - 1];
        let values = v.iter().rev().map(|x| x - end).collect();
        Self { resolution_exponent: self.resolution_exponent, grid: GridPath { values } }
    }

    /// Flat little-endian layout: `b"RDP1"`, `N` as u32, `seed` as u64, then the
    /// `2^N + 1` samples as f64.
    pub fn write_binary<W: Write>(&self, mut w: W, seed: u64) -> Result<()> {
        w.write_all(&PATH_MAGIC)?;
        w.write_all(&self.resolution_exponent.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        for v in self.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the layout written by [`DyadicPath::write_binary`]; returns the path and its seed.
    pub fn read_binary<R: Read>(mut r: R) -> Result<(Self, u64)> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if header[..4] != PATH_MAGIC {
            return Err(Error::Domain("bad path file magic".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let seed = u64::from_le_bytes(header[8..16].try_into().unwrap());
        if n > MAX_RESOLUTION {
            return Err(Error::bounds("resolution exponent", format!("{n} > {MAX_RESOLUTION}")));
        }
        let mut buf = vec![0u8; ((1usize << n) + 1) * 8];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((Self::from_values(n, values)?, seed))
    }
}

impl Deref for DyadicPath {
    type Target = GridPath;

    fn deref(&self) -> &GridPath {
        &self.grid
    }
}

/// A word over `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitCode {
    bits: Vec<i8>,
}

impl BitCode {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("empty code".into()));
        }
        if let Some(i) = bits.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::Domain(format!("code symbol {} at {i} is not ±1", bits[i])));
        }
        Ok(Self { bits })
    }

    /// `true` maps to `+1`.
    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(bits.into_iter().map(|b| if b { 1 } else { -1 }).collect())
    }

    /// Bit `i` of `word` (LSB first) for `i < len`; `len <= 64`.
    pub fn from_word(word: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(Error::bounds("code length", format!("{len} > 64")));
        }
        Self::from_bools((0..len).map(|i| word >> i & 1 == 1))
    }

    /// Uniform random code.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        let mut bits = Vec::with_capacity(len);
        while bits.len() < len {
            let word: u64 = rng.random();
            let take = (len - bits.len()).min(64);
            bits.extend((0..take).map(|i| if word >> i & 1 == 1 { 1i8 } else { -1 }));
        }
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    /// Global `-1 <-> +1` swap.
    pub fn flipped(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| -b).collect() }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &BitCode) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    /// Packs `+1` as a set bit, MSB first; the last byte is zero-padded.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| if b > 0 { acc | 0x80 >> i } else { acc })
            })
            .collect()
    }
}

/// Brownian path on the grid of step `2^-N`: i.i.d. `N(0, 2^-N)` increments, `X(0) = 0`.
/// Identical `(N, seed)` pairs give bit-identical output.
pub fn generate_brownian(resolution_exponent: u32, seed: u64) -> Result<DyadicPath> {
    if !(1..=MAX_RESOLUTION).contains(&resolution_exponent) {
        return Err(Error::bounds(
            "resolution exponent",
            format!("{resolution_exponent} not in 1..={MAX_RESOLUTION}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = 1usize << resolution_exponent;
    let sd = (steps as f64).sqrt().recip();
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        x += sd * z;
        values.push(x);
    }
    DyadicPath::from_values(resolution_exponent, values)
}

/// The piecewise-linear function with slope `bits[i] * sqrt(n)` on cell `i`, sampled at
/// `samples_per_cell` points per cell (grid of `n * samples_per_cell` steps).
///
/// Values are formed from integer partial sums, so the value at `i / n` is exactly
/// `S_i / sqrt(n)` up to one rounding.
pub fn decode(code: &BitCode, samples_per_cell: usize) -> Result<GridPath> {
    if code.is_empty() {
        return Err(Error::Domain("empty code".into()));
    }
    if samples_per_cell == 0 {
        return Err(Error::Domain("samples_per_cell must be >= 1".into()));
    }
    let n = code.len();
    let m = samples_per_cell as i64;
    let scale = m as f64 * (n as f64).sqrt();
    let mut values = Vec::with_capacity(n * samples_per_cell + 1);
    values.push(0.0);
    let mut partial: i64 = 0;
    for &b in code.bits() {
        let b = i64::from(b);
        for r in 1..=m {
            values.push((partial * m + b * r) as f64 / scale);
        }
        partial += b;
    }
    GridPath::new(values)
}

/// [`decode`] onto the dyadic grid `2^-N`; the code length must be a power of two
/// no larger than `2^N`.
pub fn decode_dyadic(code: &BitCode, resolution_exponent: u32) -> Result<DyadicPath> {
    let n = code.len();
    if !n.is_power_of_two() || n.trailing_zeros() > resolution_exponent {
        return Err(Error::Resolution(format!(
            "code length {n} does not divide 2^{resolution_exponent}"
        )));
    }
    DyadicPath::from_grid(decode(code, (1usize << resolution_exponent) / n)?)
}

/// Sign of the path's change across each of `n` equal cells: `+1` iff the value at
/// `i / n` strictly exceeds the value at `(i - 1) / n`, `-1` otherwise (ties included).
pub fn encode(path: &GridPath, n: usize) -> Result<BitCode> {
    let steps = path.steps();
    if n == 0 || !steps.is_multiple_of(n) {
        return Err(Error::Resolution(format!("{n} cells do not divide {steps} grid steps")));
    }
    let stride = steps / n;
    let v = path.values();
    BitCode::new((0..n).map(|i| if v[(i + 1) * stride] > v[i * stride] { 1 } else { -1 }).collect())
}

/// Restriction to `[k 2^-n, (k+1) 2^-n]`, re-based to start at zero. The result keeps
/// the fine grid, so its resolution exponent is `N - n`.
pub fn shift_origin(path: &DyadicPath, k: u64, n: u32) -> Result<DyadicPath> {
    let big_n = path.resolution_exponent();
    if n > big_n {
        return Err(Error::bounds("scale", format!("n = {n} exceeds resolution {big_n}")));
    }
    if k >= 1u64 << n {
        return Err(Error::bounds("cell index", format!("k = {k} not below 2^{n}")));
    }
    let width = 1usize << (big_n - n);
    let start = k as usize * width;
    let window = &path.values()[start..=start + width];
    let origin = window[0];
    DyadicPath::from_values(big_n - n, window.iter().map(|v| v - origin).collect())
}

/// `max |a - b|` over the grid points both paths share. One grid must refine the other.
pub fn uniform_distance(a: &GridPath, b: &GridPath) -> Result<f64> {
    let (sa, sb) = (a.steps(), b.steps());
    let coarse = sa.min(sb);
    if sa.max(sb) % coarse != 0 {
        return Err(Error::Resolution(format!("grids of {sa} and {sb} steps are not nested")));
    }
    let (da, db) = (sa / coarse, sb / coarse);
    Ok((0..=coarse).fold(0.0f64, |m, i| m.max((a.values()[i * da] - b.values()[i * db]).abs())))
}
