//! Run configuration: TOML file merged with command-line flags.
//!
//! Precedence is flag > file > built-in default. Every numeric range is
//! validated here, before any computation or file output starts.

use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Evolve,
    Entanglement,
    RemoteScan,
    Tomography,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Options exactly as given on the command line.
pub struct RawOptions {
    pub config: Option<PathBuf>,
    pub steps: Option<u32>,
    pub visibility: Option<f64>,
    pub entangled_weight: Option<f64>,
    pub classical_weight: Option<f64>,
    pub theta_classical: Option<f64>,
    pub grid_deg: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub exact: bool,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

/// Options as they may appear in the TOML configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOptions {
    steps: Option<u32>,
    visibility: Option<f64>,
    entangled_weight: Option<f64>,
    classical_weight: Option<f64>,
    theta_classical: Option<f64>,
    grid_deg: Option<f64>,
    shots: Option<u64>,
    seed: Option<u64>,
    exact: Option<bool>,
    out: Option<PathBuf>,
    format: Option<String>,
}

/// Fully resolved, validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub steps: u32,
    pub visibility: f64,
    pub entangled_weight: f64,
    pub theta_classical_deg: f64,
    pub grid_deg: f64,
    pub shots: u64,
    pub seed: Option<u64>,
    pub exact: bool,
    pub out: PathBuf,
    pub format: OutputFormat,
}

pub fn resolve(kind: CommandKind, raw: RawOptions) -> Result<RunConfig, CliError> {
    let file: FileOptions = match &raw.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?
        }
        None => FileOptions::default(),
    };

    let steps = raw.steps.or(file.steps).unwrap_or(match kind {
        CommandKind::Evolve | CommandKind::Entanglement => 10,
        CommandKind::RemoteScan | CommandKind::Tomography => 3,
    });
    let visibility = raw.visibility.or(file.visibility).unwrap_or(1.0);

    // Eq-style weight of the entangled term; --classical-weight is the
    // complementary alias.
    let entangled_weight = match (
        raw.entangled_weight.or(file.entangled_weight),
        raw.classical_weight.or(file.classical_weight),
    ) {
        (Some(e), _) => e,
        (None, Some(c)) => 1.0 - c,
        (None, None) => 0.8,
    };

    let theta_classical_deg = raw.theta_classical.or(file.theta_classical).unwrap_or(0.0);
    let grid_deg = raw.grid_deg.or(file.grid_deg).unwrap_or(2.0);
    let shots = raw.shots.or(file.shots).unwrap_or(1_000_000);
    let seed = raw.seed.or(file.seed);
    let exact = raw.exact || file.exact.unwrap_or(false);
    let format = match raw.format.or(file.format).as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown format {other:?}; expected csv or json"
            )))
        }
    };
    let out = raw
        .out
        .or(file.out)
        .ok_or_else(|| CliError::Config("missing required option --out".into()))?;

    if !(0.0..=1.0).contains(&visibility) || !visibility.is_finite() {
        return Err(CliError::Config(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    if !(0.0..=1.0).contains(&entangled_weight) || !entangled_weight.is_finite() {
        return Err(CliError::Config(format!(
            "entangled weight must lie in [0, 1], got {entangled_weight}"
        )));
    }
    if !theta_classical_deg.is_finite() {
        return Err(CliError::Config("theta-classical must be finite".into()));
    }
    if !(grid_deg > 0.0 && grid_deg <= 90.0) || !grid_deg.is_finite() {
        return Err(CliError::Config(format!(
            "grid-deg must lie in (0, 90], got {grid_deg}"
        )));
    }
    if shots == 0 {
        return Err(CliError::Config("shots must be positive".into()));
    }
    if kind == CommandKind::Tomography && !exact && seed.is_none() {
        return Err(CliError::Config(
            "--seed is required for sampled tomography (or pass --exact)".into(),
        ));
    }

    Ok(RunConfig {
        steps,
        visibility,
        entangled_weight,
        theta_classical_deg,
        grid_deg,
        shots,
        seed,
        exact,
        out,
        format,
    })
}

impl RunConfig {
    /// The angle grid {0°, grid_deg, 2·grid_deg, …} below 180°.
    pub fn angle_grid_deg(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut k = 0u32;
        loop {
            let v = self.grid_deg * k as f64;
            if v >= 180.0 {
                break;
            }
            grid.push(v);
            k += 1;
        }
        grid
    }

    /// Sibling output path carrying a suffix, e.g. `dist_amplitudes.csv`.
    pub fn sibling_out(&self, suffix: &str) -> PathBuf {
        let stem = self
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        self.out
            .with_file_name(format!("{stem}_{suffix}.{}", self.format.extension()))
    }
}
