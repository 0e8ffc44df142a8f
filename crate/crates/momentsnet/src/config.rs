//! Experiment configuration: flat key=value files with `#` comments, every
//! key overridable by the same-named long CLI flag.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

/// Sweepable parameter names.
pub const SWEEP_PARAMS: [&str; 7] = ["threshold", "l1", "l2", "k", "h", "overlap", "c"];

/// Upper bound on sweep cross-product size.
pub const MAX_SWEEP_POINTS: usize = 500;

/// Upper bound on simultaneous sweep axes.
pub const MAX_SWEEP_AXES: usize = 3;

/// A fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: String,
    pub stages: u8,
    pub l1: usize,
    pub l2: usize,
    pub k: usize,
    pub h: usize,
    pub overlap: f64,
    pub threshold: f64,
    pub auto_threshold: bool,
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    pub jobs: usize,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
    pub train_fraction: f64,
    pub classes: usize,
    pub rotations: usize,
    pub replicas: usize,
    pub size: usize,
    pub dump_features: bool,
    pub sweep: Vec<(String, Vec<f64>)>,
    l2_explicit: bool,
    generator_keys_set: bool,
}

/// A config-level problem: bad key, bad value, or conflicting sources.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: "zernike".into(),
            stages: 1,
            l1: 9,
            l2: 9,
            k: 11,
            h: 8,
            overlap: 0.5,
            threshold: 0.1,
            auto_threshold: false,
            c: 1.0,
            epochs: 40,
            seed: 0,
            jobs: 0,
            dataset: None,
            out: PathBuf::from("out"),
            train_fraction: 0.5,
            classes: 9,
            rotations: 12,
            replicas: 12,
            size: 32,
            dump_features: false,
            sweep: Vec::new(),
            l2_explicit: false,
            generator_keys_set: false,
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> ConfigError {
    ConfigError(format!("key '{key}': cannot parse '{value}' as {what}"))
}

impl ExperimentConfig {
    /// Applies one key=value assignment (file line or CLI flag).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let canon = key.replace('_', "-");
        if let Some(param) = canon.strip_prefix("sweep.") {
            return self.add_sweep_axis(param, value);
        }
        match canon.as_str() {
            "family" => self.family = value.to_ascii_lowercase(),
            "stages" => self.stages = value.parse().map_err(|_| bad(key, value, "1 or 2"))?,
            "l1" => self.l1 = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "l2" => {
                self.l2 = value.parse().map_err(|_| bad(key, value, "an integer"))?;
                self.l2_explicit = true;
            }
            "k" => self.k = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "h" => self.h = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "overlap" => {
                self.overlap = value.parse().map_err(|_| bad(key, value, "a real number"))?
            }
            "threshold" => {
                self.threshold = value.parse().map_err(|_| bad(key, value, "a real number"))?
            }
            "auto-threshold" => self.auto_threshold = parse_bool(key, value)?,
            "c" => self.c = value.parse().map_err(|_| bad(key, value, "a real number"))?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "jobs" => self.jobs = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "train-fraction" => {
                self.train_fraction = value.parse().map_err(|_| bad(key, value, "a real number"))?
            }
            "classes" => {
                self.classes = value.parse().map_err(|_| bad(key, value, "an integer"))?;
                self.generator_keys_set = true;
            }
            "rotations" => {
                self.rotations = value.parse().map_err(|_| bad(key, value, "an integer"))?;
                self.generator_keys_set = true;
            }
            "replicas" => {
                self.replicas = value.parse().map_err(|_| bad(key, value, "an integer"))?;
                self.generator_keys_set = true;
            }
            "size" => self.size = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "dump-features" => self.dump_features = parse_bool(key, value)?,
            _ => return Err(ConfigError(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Registers one sweep axis from `param=v1,v2,...` notation.
    pub fn add_sweep_axis(&mut self, param: &str, values: &str) -> Result<(), ConfigError> {
        if !SWEEP_PARAMS.contains(&param) {
            return Err(ConfigError(format!(
                "unknown sweep parameter '{param}'; valid: {}",
                SWEEP_PARAMS.join(", ")
            )));
        }
        if self.sweep.iter().any(|(name, _)| name == param) {
            return Err(ConfigError(format!("duplicate sweep axis '{param}'")));
        }
        let parsed: Result<Vec<f64>, _> = values.split(',').map(|v| v.trim().parse()).collect();
        let parsed = parsed.map_err(|_| bad(param, values, "a comma-separated number list"))?;
        if parsed.is_empty() {
            return Err(ConfigError(format!("sweep axis '{param}' is empty")));
        }
        self.sweep.push((param.to_string(), parsed));
        Ok(())
    }

    /// Parses a whole config file body.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Whether l2 was set explicitly (otherwise it follows l1).
    pub fn resolve_convention(&mut self) {
        if !self.l2_explicit {
            self.l2 = self.l1;
        }
    }

    /// Source-exclusivity and sweep-budget invariants.
    pub fn validate_sources(&self) -> Result<(), ConfigError> {
        if self.dataset.is_some() && self.generator_keys_set {
            return Err(ConfigError(
                "both a dataset path and generator parameters were given; pick one source".into(),
            ));
        }
        if self.sweep.len() > MAX_SWEEP_AXES {
            return Err(ConfigError(format!(
                "at most {MAX_SWEEP_AXES} sweep axes allowed, got {}",
                self.sweep.len()
            )));
        }
        let points: usize = self.sweep.iter().map(|(_, v)| v.len()).product();
        if !self.sweep.is_empty() && points > MAX_SWEEP_POINTS {
            return Err(ConfigError(format!(
                "sweep budget exceeded: {points} points > {MAX_SWEEP_POINTS}"
            )));
        }
        Ok(())
    }

    /// Applies one sweep point's values onto a copy of this config.
    pub fn with_sweep_point(&self, assignment: &BTreeMap<String, f64>) -> ExperimentConfig {
        let mut cfg = self.clone();
        for (name, &value) in assignment {
            match name.as_str() {
                "threshold" => cfg.threshold = value,
                "l1" => cfg.l1 = value as usize,
                "l2" => {
                    cfg.l2 = value as usize;
                    cfg.l2_explicit = true;
                }
                "k" => cfg.k = value as usize,
                "h" => cfg.h = value as usize,
                "overlap" => cfg.overlap = value,
                "c" => cfg.c = value,
                _ => unreachable!("axis names validated at parse time"),
            }
        }
        if !cfg.l2_explicit {
            cfg.l2 = cfg.l1;
        }
        cfg
    }

    /// Cross-product of all sweep axes, in axis-major order.
    pub fn sweep_points(&self) -> Vec<BTreeMap<String, f64>> {
        if self.sweep.is_empty() {
            return vec![BTreeMap::new()];
        }
        let mut points = vec![BTreeMap::new()];
        for (name, values) in &self.sweep {
            let mut next = Vec::with_capacity(points.len() * values.len());
            for point in &points {
                for &v in values {
                    let mut p = point.clone();
                    p.insert(name.clone(), v);
                    next.push(p);
                }
            }
            points = next;
        }
        points
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    value.parse().map_err(|_| bad(key, value, "true or false"))
}
