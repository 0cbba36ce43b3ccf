use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::spin_algebra::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 400 trajectories of 10³ jumps.
    #[default]
    Fast,
    /// 2000 trajectories of 10⁴ jumps.
    Paper,
}

impl Profile {
    pub fn n_trajectories(self) -> usize {
        match self {
            Profile::Fast => 400,
            Profile::Paper => 2000,
        }
    }

    pub fn n_jumps(self) -> usize {
        match self {
            Profile::Fast => 1_000,
            Profile::Paper => 10_000,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Fast => "fast",
            Profile::Paper => "paper",
        }
    }
}

/// How trajectory length is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMode {
    /// Fixed horizon holding n_jumps events on average.
    #[default]
    MatchedTime,
    /// Stop at the n_jumps-th event.
    Jumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "ScanConfig::default_s_min")]
    pub s_min: f64,
    #[serde(default = "ScanConfig::default_s_max")]
    pub s_max: f64,
    #[serde(default = "ScanConfig::default_n_points")]
    pub n_points: usize,
}

impl ScanConfig {
    fn default_s_min() -> f64 {
        -1.0
    }
    fn default_s_max() -> f64 {
        1.0
    }
    fn default_n_points() -> usize {
        101
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            s_min: Self::default_s_min(),
            s_max: Self::default_s_max(),
            n_points: Self::default_n_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Overrides the profile value when set.
    #[serde(default)]
    pub n_trajectories: Option<usize>,
    /// Overrides the profile value when set.
    #[serde(default)]
    pub n_jumps: Option<usize>,
    #[serde(default)]
    pub stop: StopMode,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default = "EnsembleConfig::default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default = "EnsembleConfig::default_sweep")]
    pub nbar_sweep: Vec<f64>,
    #[serde(default = "EnsembleConfig::default_ft_window")]
    pub ft_window: f64,
    #[serde(default = "EnsembleConfig::default_ft_k_max")]
    pub ft_k_max: i64,
    /// Number of leading trajectories whose event logs are written.
    #[serde(default = "EnsembleConfig::default_sample_events")]
    pub sample_events: usize,
    /// Window of the blinking classifier; defaults to the time for 50 jumps
    /// of the undamped active phase.
    #[serde(default)]
    pub blink_window: Option<f64>,
}

impl EnsembleConfig {
    fn default_burn_in() -> f64 {
        0.1
    }
    fn default_sweep() -> Vec<f64> {
        vec![0.0, 1.0, 2.0, 5.0]
    }
    fn default_ft_window() -> f64 {
        5.0
    }
    fn default_ft_k_max() -> i64 {
        6
    }
    fn default_sample_events() -> usize {
        5
    }
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_trajectories: None,
            n_jumps: None,
            stop: StopMode::default(),
            master_seed: None,
            burn_in_fraction: Self::default_burn_in(),
            nbar_sweep: Self::default_sweep(),
            ft_window: Self::default_ft_window(),
            ft_k_max: Self::default_ft_k_max(),
            sample_events: Self::default_sample_events(),
            blink_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "OutputConfig::default_dir")]
    pub dir: PathBuf,
}

impl OutputConfig {
    fn default_dir() -> PathBuf {
        PathBuf::from("out")
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: Self::default_dir(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub profile: Profile,
    pub model: ModelParams,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

fn range_error(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let scan = &self.scan;
        if !scan.s_min.is_finite() {
            return Err(range_error("s_min", "must be finite"));
        }
        if !(scan.s_max.is_finite() && scan.s_max > scan.s_min) {
            return Err(range_error(
                "s_max",
                format!("must be finite and > s_min = {} (got {})", scan.s_min, scan.s_max),
            ));
        }
        if scan.n_points < 3 {
            return Err(range_error("n_points", format!("must be >= 3 (got {})", scan.n_points)));
        }
        let e = &self.ensemble;
        if e.n_trajectories == Some(0) {
            return Err(range_error("n_trajectories", "must be >= 1"));
        }
        if e.n_jumps == Some(0) {
            return Err(range_error("n_jumps", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&e.burn_in_fraction) {
            return Err(range_error(
                "burn_in_fraction",
                format!("must lie in [0, 1) (got {})", e.burn_in_fraction),
            ));
        }
        if let Some(bad) = e.nbar_sweep.iter().find(|n| !(n.is_finite() && **n >= 0.0)) {
            return Err(range_error("nbar_sweep", format!("entries must be finite and >= 0 (got {bad})")));
        }
        if !(e.ft_window.is_finite() && e.ft_window > 0.0) {
            return Err(range_error("ft_window", format!("must be > 0 (got {})", e.ft_window)));
        }
        if e.ft_k_max < 1 {
            return Err(range_error("ft_k_max", format!("must be >= 1 (got {})", e.ft_k_max)));
        }
        if let Some(w) = e.blink_window {
            if !(w.is_finite() && w > 0.0) {
                return Err(range_error("blink_window", format!("must be > 0 (got {w})")));
            }
        }
        Ok(())
    }

    pub fn n_trajectories(&self) -> usize {
        self.ensemble
            .n_trajectories
            .unwrap_or_else(|| self.profile.n_trajectories())
    }

    pub fn n_jumps(&self) -> usize {
        self.ensemble.n_jumps.unwrap_or_else(|| self.profile.n_jumps())
    }

    /// Seeds are never taken from the clock.
    pub fn master_seed(&self) -> Result<u64> {
        self.ensemble.master_seed.ok_or_else(|| {
            Error::Config("missing `ensemble.master_seed` (or pass --seed)".into())
        })
    }

    /// SHA-256 of the configuration without the output location.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    RunConfig::from_toml(&text)
}
