use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the connectivity of an edge is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectivityMode {
    /// Mean intensity along the segment, in `[0, 1]`.
    Mean,
    /// Mean intensity divided by the segment length.
    Literal,
}

impl fmt::Display for ConnectivityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConnectivityMode::Mean => "mean",
            ConnectivityMode::Literal => "literal",
        })
    }
}

/// Every tunable constant of the superpixel, state and clustering stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Binarization threshold on the baseline map (strict `>`).
    pub bin_threshold: f64,
    /// Minimum distance between two superpixels.
    pub min_sp_distance: f64,
    /// Projection-profile diameters, strictly increasing powers of two.
    pub diameters: Vec<usize>,
    /// DFT bins evaluated per diameter.
    pub harmonics: Vec<usize>,
    /// Smoothing cost for label jumps of four or more list positions.
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Curvilinearity bound.
    pub gamma: f64,
    /// Cluster separation factor.
    pub delta: f64,
    /// Separator connectivity threshold.
    pub eta: f64,
    pub reg_degree: usize,
    pub min_sps_per_baseline: usize,
    pub data_cost_cap: f64,
    pub connectivity: ConnectivityMode,
    /// Drop edges that cross the separator map.
    pub use_separators: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bin_threshold: 0.2,
            min_sp_distance: 10.0,
            diameters: vec![64, 128, 256, 512],
            harmonics: vec![3, 4, 5],
            sigma: 25.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.3,
            delta: 0.5,
            eta: 0.125,
            reg_degree: 3,
            min_sps_per_baseline: 2,
            data_cost_cap: 20.0,
            connectivity: ConnectivityMode::Mean,
            use_separators: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("min_sp_distance", self.min_sp_distance),
            ("sigma", self.sigma),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("eta", self.eta),
            ("data_cost_cap", self.data_cost_cap),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!("beta must be non-negative, got {}", self.beta)));
        }
        if !(0.0..1.0).contains(&self.bin_threshold) {
            return Err(Error::Config(format!(
                "bin_threshold must lie in [0, 1), got {}",
                self.bin_threshold
            )));
        }
        if self.diameters.is_empty()
            || self.diameters.iter().any(|d| !d.is_power_of_two() || *d < 2)
            || self.diameters.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(format!(
                "diameters must be strictly increasing powers of two, got {:?}",
                self.diameters
            )));
        }
        if self.harmonics.is_empty()
            || self.harmonics.iter().any(|&k| k == 0 || k >= self.diameters[0])
        {
            return Err(Error::Config(format!("invalid harmonics {:?}", self.harmonics)));
        }
        if self.min_sps_per_baseline < 2 {
            return Err(Error::Config("min_sps_per_baseline must be at least 2".into()));
        }
        Ok(())
    }

    /// `key=value` lines, one per field, in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("bin_threshold", self.bin_threshold.to_string()),
            ("min_sp_distance", self.min_sp_distance.to_string()),
            ("diameters", list(&self.diameters)),
            ("harmonics", list(&self.harmonics)),
            ("sigma", self.sigma.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("gamma", self.gamma.to_string()),
            ("delta", self.delta.to_string()),
            ("eta", self.eta.to_string()),
            ("reg_degree", self.reg_degree.to_string()),
            ("min_sps_per_baseline", self.min_sps_per_baseline.to_string()),
            ("data_cost_cap", self.data_cost_cap.to_string()),
            ("connectivity", self.connectivity.to_string()),
            ("use_separators", self.use_separators.to_string()),
        ]
    }

    /// Overrides a single field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("bad value {value:?} for {key}"));
        let float = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let uint = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let list = |v: &str| -> Result<Vec<usize>> {
            v.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| bad())).collect()
        };
        match key.trim() {
            "bin_threshold" => self.bin_threshold = float(value)?,
            "min_sp_distance" => self.min_sp_distance = float(value)?,
            "diameters" => self.diameters = list(value)?,
            "harmonics" => self.harmonics = list(value)?,
            "sigma" => self.sigma = float(value)?,
            "alpha" => self.alpha = float(value)?,
            "beta" => self.beta = float(value)?,
            "gamma" => self.gamma = float(value)?,
            "delta" => self.delta = float(value)?,
            "eta" => self.eta = float(value)?,
            "reg_degree" => self.reg_degree = uint(value)?,
            "min_sps_per_baseline" => self.min_sps_per_baseline = uint(value)?,
            "data_cost_cap" => self.data_cost_cap = float(value)?,
            "connectivity" => {
                self.connectivity = match value.trim() {
                    "mean" => ConnectivityMode::Mean,
                    "literal" => ConnectivityMode::Literal,
                    _ => return Err(bad()),
                }
            }
            "use_separators" => self.use_separators = value.trim().parse().map_err(|_| bad())?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` document. Blank lines and `#` comments are skipped.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        self.validate()
    }
}
