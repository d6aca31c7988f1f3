//! `key=value` configuration files and flag overrides.

use std::collections::BTreeMap;
use std::path::Path;

use bayesproj::experiments::slam::SlamConfig;
use bayesproj::experiments::stereo::StereoConfig;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Raw settings in the order of precedence they were applied.
#[derive(Debug, Default, Clone)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("config line {}: expected key=value", k + 1)))?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(ConfigError(format!("config line {}: empty key", k + 1)));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError(format!("invalid value '{value}' for {key}"))),
    }
}

pub fn stereo_config(settings: &Settings) -> Result<StereoConfig, ConfigError> {
    let mut cfg = StereoConfig::default();
    for (key, value) in settings.entries() {
        match key.as_str() {
            "prior_mean" => cfg.prior_mean = parse_value(key, value)?,
            "prior_var" => cfg.prior_var = parse_value(key, value)?,
            "focal" => cfg.focal = parse_value(key, value)?,
            "baseline" => cfg.baseline = parse_value(key, value)?,
            "meas_var" => cfg.meas_var = parse_value(key, value)?,
            "true_depth" => cfg.true_depth = parse_value(key, value)?,
            "seed" => cfg.seed = parse_value(key, value)?,
            "z" => cfg.z = Some(parse_value(key, value)?),
            "nodes" => cfg.nodes = parse_value(key, value)?,
            "max_iters" => cfg.max_iters = parse_value(key, value)?,
            "tol" => cfg.tol = parse_value(key, value)?,
            "basis" => cfg.basis = parse_value(key, value)?,
            "grid_points" => cfg.grid_points = parse_value(key, value)?,
            other => return Err(ConfigError(format!("unknown key '{other}' for stereo experiments"))),
        }
    }
    cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(cfg)
}

pub fn slam_config(settings: &Settings) -> Result<SlamConfig, ConfigError> {
    let mut cfg = SlamConfig::default();
    for (key, value) in settings.entries() {
        match key.as_str() {
            "poses" => cfg.poses = parse_value(key, value)?,
            "landmarks" => cfg.landmarks = parse_value(key, value)?,
            "step" => cfg.step = parse_value(key, value)?,
            "prior_var" => cfg.prior_var = parse_value(key, value)?,
            "odom_var" => cfg.odom_var = parse_value(key, value)?,
            "range_var" => cfg.range_var = parse_value(key, value)?,
            "offset" => cfg.offset = parse_value(key, value)?,
            "visibility" => cfg.visibility = parse_value(key, value)?,
            "linear" => cfg.linear = parse_bool(key, value)?,
            "seed" => cfg.seed = parse_value(key, value)?,
            "trials" => cfg.trials = parse_value(key, value)?,
            "max_iters" => cfg.max_iters = parse_value(key, value)?,
            "tol" => cfg.tol = parse_value(key, value)?,
            "nodes" => cfg.nodes = parse_value(key, value)?,
            "init_inflation" => cfg.init_inflation = parse_value(key, value)?,
            other => return Err(ConfigError(format!("unknown key '{other}' for gvi-demo"))),
        }
    }
    cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(cfg)
}
