//! Experiment configuration from command-line flags or a `key = value` file.
//!
//! File format: one `key = value` per line, `#` starts a comment, blank lines are
//! ignored. Keys are the long flag names with `-` or `_` accepted interchangeably:
//!
//! ```text
//! mode = dimension
//! alpha = 0.4, 0.6
//! n-min = 8
//! n-max = 16
//! j = 2
//! resolution = 22
//! trials = 50
//! seed = 7
//! family = gaussian
//! out = results/dim.csv
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::complexity::DEFAULT_DEFICIENCY_BUDGET;
use crate::dimension::{MIN_FIT_POINTS, MIN_SCALE};
use crate::error::{Error, Result};
use crate::path::MAX_RESOLUTION;

/// Samples each search window must hold beyond its endpoints: `N >= n_max + j + 4`.
pub const WINDOW_GUARD: u32 = 4;

pub const DEFAULT_J: u32 = 2;
pub const DEFAULT_RESOLUTION: u32 = 20;
pub const DEFAULT_TRIALS: u64 = 50;
pub const DEFAULT_N_MIN: u32 = 8;
pub const DEFAULT_N_MAX: u32 = 14;
pub const DEFAULT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Count,
    Dimension,
    Bounds,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathFamily {
    Gaussian,
    Oscillation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

macro_rules! keyword_enum {
    ($ty:ty, $field:literal, $($word:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($word => Ok($variant),)+
                    other => Err(Error::config(
                        $field,
                        format!("unknown value `{other}`, expected one of: {}", [$($word),+].join(", ")),
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let word = match *self { $(v if v == $variant => $word,)+ _ => unreachable!() };
                f.write_str(word)
            }
        }
    };
}

keyword_enum!(Mode, "mode",
    "simulate" => Mode::Simulate, "count" => Mode::Count, "dimension" => Mode::Dimension,
    "bounds" => Mode::Bounds, "compare" => Mode::Compare);
keyword_enum!(PathFamily, "family",
    "gaussian" => PathFamily::Gaussian, "oscillation" => PathFamily::Oscillation);
keyword_enum!(OutputFormat, "format", "csv" => OutputFormat::Csv, "json" => OutputFormat::Json);

impl Mode {
    fn needs_alphas(self) -> bool {
        matches!(self, Mode::Count | Mode::Dimension | Mode::Compare)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub alphas: Vec<f64>,
    pub n_min: u32,
    pub n_max: u32,
    pub j: u32,
    pub resolution_exponent: u32,
    pub trials: u64,
    pub base_seed: u64,
    pub path_family: PathFamily,
    pub deficiency_budget: u64,
    /// Same-exponent tolerance for `compare`.
    pub tolerance: f64,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// A config with every default filled in; still needs [`ExperimentConfig::validate`].
    pub fn new(mode: Mode, output_path: impl Into<PathBuf>) -> Self {
        Self {
            mode,
            alphas: Vec::new(),
            n_min: DEFAULT_N_MIN,
            n_max: DEFAULT_N_MAX,
            j: DEFAULT_J,
            resolution_exponent: DEFAULT_RESOLUTION,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            path_family: PathFamily::Gaussian,
            deficiency_budget: DEFAULT_DEFICIENCY_BUDGET,
            tolerance: DEFAULT_TOLERANCE,
            output_path: output_path.into(),
            output_format: OutputFormat::Csv,
            workers: None,
        }
    }

    /// `base_seed + trial`, wrapping.
    pub fn trial_seed(&self, trial: u64) -> u64 {
        self.base_seed.wrapping_add(trial)
    }

    pub fn manifest_path(&self) -> PathBuf {
        let mut s = self.output_path.clone().into_os_string();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_path.as_os_str().is_empty() {
            return Err(Error::config("out", "output path is empty"));
        }
        if !(1..=MAX_RESOLUTION).contains(&self.resolution_exponent) {
            return Err(Error::config(
                "resolution",
                format!("{} not in 1..={MAX_RESOLUTION}", self.resolution_exponent),
            ));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if let Some(0) = self.workers {
            return Err(Error::config("workers", "must be >= 1"));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::config("tolerance", format!("{} is not a finite value >= 0", self.tolerance)));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::config("alpha", format!("{a} not in (0, 1)")));
        }
        if !self.mode.needs_alphas() {
            return Ok(());
        }
        if self.alphas.is_empty() {
            return Err(Error::config("alpha", format!("required for mode `{}`", self.mode)));
        }
        if self.n_min < MIN_SCALE {
            return Err(Error::config("n-min", format!("{} < {MIN_SCALE}", self.n_min)));
        }
        if self.n_max < self.n_min {
            return Err(Error::config("n-max", format!("{} < n-min = {}", self.n_max, self.n_min)));
        }
        let span = (self.n_max - self.n_min + 1) as usize;
        if self.mode != Mode::Count && span < MIN_FIT_POINTS {
            return Err(Error::config(
                "n-max",
                format!("{span} scales in [n-min, n-max], a fit needs {MIN_FIT_POINTS}"),
            ));
        }
        let needed = self.n_max + self.j + WINDOW_GUARD;
        if self.resolution_exponent < needed {
            return Err(Error::config(
                "resolution",
                format!(
                    "n-max + j + {WINDOW_GUARD} = {needed} exceeds resolution {} (needs N >= {needed})",
                    self.resolution_exponent
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "rapid-dim", version, about = "Counting dimension of rapid points of Brownian motion")]
struct Cli {
    /// simulate | count | dimension | bounds | compare
    mode: Option<String>,
    /// `key = value` config file; flags given alongside override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated list, or repeat the flag
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<String>,
    /// Smallest scale n [default: 8]
    #[arg(long)]
    n_min: Option<String>,
    /// Largest scale n [default: 14]
    #[arg(long)]
    n_max: Option<String>,
    /// Window refinement: left endpoints within 2^-(n+j) of the cell start [default: 2]
    #[arg(long)]
    j: Option<String>,
    /// Grid exponent N, 2^N steps per path [default: 20]
    #[arg(long)]
    resolution: Option<String>,
    /// Number of paths [default: 50]
    #[arg(long)]
    trials: Option<String>,
    /// Base seed; trial t uses seed + t [default: 0]
    #[arg(long)]
    seed: Option<String>,
    /// gaussian | oscillation [default: gaussian]
    #[arg(long)]
    family: Option<String>,
    /// Compression slack in bits for oscillation codes [default: 64]
    #[arg(long)]
    deficiency_budget: Option<String>,
    /// Allowed gap between family mean slopes in compare mode [default: 0.1]
    #[arg(long)]
    tolerance: Option<String>,
    /// Thread count; RAPID_DIM_WORKERS takes precedence [default: all cores]
    #[arg(long)]
    workers: Option<String>,
    /// Results file; the manifest goes to <out>.manifest.json
    #[arg(long)]
    out: Option<String>,
    /// csv | json [default: csv]
    #[arg(long)]
    format: Option<String>,
}

/// A validated config plus the config file text it came from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub source: Option<String>,
}

#[derive(Debug, Default)]
struct Entries(Vec<(String, String)>);

impl Entries {
    fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.retain(|(k, _)| k != key);
        self.0.push((key.to_string(), value.into()));
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(i).1)
    }
}

const KEYS: [&str; 14] = [
    "mode",
    "alpha",
    "n-min",
    "n-max",
    "j",
    "resolution",
    "trials",
    "seed",
    "family",
    "deficiency-budget",
    "tolerance",
    "workers",
    "out",
    "format",
];

const REQUIRED: [&str; 2] = ["mode", "out"];

fn canonical_key(raw: &str) -> String {
    raw.trim().to_ascii_lowercase().replace('_', "-")
}

fn parse_file_text(text: &str, entries: &mut Entries) -> Result<()> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
        })?;
        let key = canonical_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(key, "unknown key"));
        }
        entries.set(&key, value.trim());
    }
    Ok(())
}

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| Error::config(field, format!("`{}`: {e}", value.trim())))
}

/// Builds a config from `key = value` text, with no command-line flags.
pub fn parse_config_text(text: &str) -> Result<ExperimentConfig> {
    let mut entries = Entries::default();
    parse_file_text(text, &mut entries)?;
    from_entries(entries)
}

fn from_entries(mut e: Entries) -> Result<ExperimentConfig> {
    let missing: Vec<&str> =
        REQUIRED.iter().copied().filter(|k| !e.0.iter().any(|(key, _)| key == k)).collect();
    if !missing.is_empty() {
        return Err(Error::config(
            missing.join(", "),
            format!("missing required field(s); required: {}", REQUIRED.join(", ")),
        ));
    }
    let mode: Mode = e.take("mode").unwrap().parse()?;
    let mut c = ExperimentConfig::new(mode, e.take("out").unwrap());
    if let Some(v) = e.take("alpha") {
        c.alphas = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_num("alpha", s))
            .collect::<Result<_>>()?;
    }
    if let Some(v) = e.take("n-min") {
        c.n_min = parse_num("n-min", &v)?;
    }
    if let Some(v) = e.take("n-max") {
        c.n_max = parse_num("n-max", &v)?;
    }
    if let Some(v) = e.take("j") {
        c.j = parse_num("j", &v)?;
    }
    if let Some(v) = e.take("resolution") {
        c.resolution_exponent = parse_num("resolution", &v)?;
    }
    if let Some(v) = e.take("trials") {
        c.trials = parse_num("trials", &v)?;
    }
    if let Some(v) = e.take("seed") {
        c.base_seed = parse_num("seed", &v)?;
    }
    if let Some(v) = e.take("family") {
        c.path_family = v.parse()?;
    }
    if let Some(v) = e.take("deficiency-budget") {
        c.deficiency_budget = parse_num("deficiency-budget", &v)?;
    }
    if let Some(v) = e.take("tolerance") {
        c.tolerance = parse_num("tolerance", &v)?;
    }
    if let Some(v) = e.take("workers") {
        c.workers = Some(parse_num("workers", &v)?);
    }
    if let Some(v) = e.take("format") {
        c.output_format = v.parse()?;
    }
    c.validate()?;
    Ok(c)
}

/// Parses `argv` (program name first). A `--config` file is read first and flags
/// override its entries.
pub fn parse_args<I, S>(argv: I) -> Result<ParsedConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            Error::Help(e.to_string())
        }
        _ => Error::config("argv", e.to_string()),
    })?;
    let mut entries = Entries::default();
    let source = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_file_text(&text, &mut entries)?;
            Some(text)
        }
        None => None,
    };
    let flags = [
        ("mode", cli.mode),
        ("alpha", (!cli.alpha.is_empty()).then(|| cli.alpha.join(","))),
        ("n-min", cli.n_min),
        ("n-max", cli.n_max),
        ("j", cli.j),
        ("resolution", cli.resolution),
        ("trials", cli.trials),
        ("seed", cli.seed),
        ("family", cli.family),
        ("deficiency-budget", cli.deficiency_budget),
        ("tolerance", cli.tolerance),
        ("workers", cli.workers),
        ("out", cli.out),
        ("format", cli.format),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            entries.set(key, v);
        }
    }
    Ok(ParsedConfig { config: from_entries(entries)?, source })
}
