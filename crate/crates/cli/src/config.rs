//! Key-value experiment configuration.
//!
//! One file per experiment; `key = value` lines, `#` comments. Unknown keys
//! are rejected so typos fail loudly. The `--seed` and `--out` flags
//! override the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kagome_vqe::ansatz::{star_ansatz, star_exact_params, triangle_ansatz, AnsatzSpec};
use kagome_vqe::lattice::{build_star, build_triangle, LatticeFragment};
use kagome_vqe::optim::{AqngdConfig, SpsaGains};
use kagome_vqe::simulator::NoiseModel;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FragmentChoice {
    Triangle,
    Star,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendChoice {
    Exact,
    Shots,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimizerChoice {
    Aqngd,
    Spsa,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitChoice {
    Random,
    Explicit(Vec<f64>),
}

/// Fully parsed experiment configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub fragment: FragmentChoice,
    pub seed: u64,
    pub out: PathBuf,
    pub backend: BackendChoice,
    pub shots: u64,
    pub trajectories: u32,
    pub p1: f64,
    pub p2: f64,
    pub readout_flip: f64,
    pub init: InitChoice,
    pub params: Option<Vec<f64>>,
    pub optimizer: OptimizerChoice,
    pub alpha: f64,
    pub beta: f64,
    pub k_max: u32,
    pub pinv_tol: f64,
    pub converge_tol: f64,
    pub max_iters: usize,
    pub spsa_iters: usize,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_big_a: f64,
    pub rem: bool,
    pub rem_positive: bool,
    pub zne_folds: Vec<u32>,
    pub zne_degree: usize,
    pub calibration_shots: u64,
    pub grid_resolution: usize,
    pub grid_extent: f64,
    pub metric_draws: usize,
    /// Original file text, copied into the output directory.
    pub source_text: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            fragment: FragmentChoice::Triangle,
            seed: 0,
            out: PathBuf::from("outputs"),
            backend: BackendChoice::Exact,
            shots: 4096,
            trajectories: 256,
            p1: 0.001,
            p2: 0.01,
            readout_flip: 0.02,
            init: InitChoice::Random,
            params: None,
            optimizer: OptimizerChoice::Aqngd,
            alpha: 0.01,
            beta: 0.5,
            k_max: 6,
            pinv_tol: 1e-15,
            converge_tol: 1e-4,
            max_iters: 100,
            spsa_iters: 300,
            spsa_a: 0.2,
            spsa_c: 0.1,
            spsa_big_a: 10.0,
            rem: false,
            rem_positive: false,
            zne_folds: vec![1, 3, 5],
            zne_degree: 2,
            calibration_shots: 20_000,
            grid_resolution: 101,
            grid_extent: 1.0,
            metric_draws: 100,
            source_text: String::new(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("duplicate key '{key}'")));
            }
        }
        let mut cfg = ExperimentConfig { source_text: text.to_string(), ..Default::default() };
        for (key, value) in &map {
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value
                .parse::<T>()
                .map_err(|_| config_err(format!("bad value '{value}' for {key}")))
        }
        match key {
            "fragment" => {
                self.fragment = match value {
                    "triangle" => FragmentChoice::Triangle,
                    "star" => FragmentChoice::Star,
                    path => FragmentChoice::File(PathBuf::from(path)),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "backend" => {
                self.backend = match value {
                    "exact" => BackendChoice::Exact,
                    "shots" => BackendChoice::Shots,
                    "noisy" => BackendChoice::Noisy,
                    other => return Err(config_err(format!("unknown backend '{other}'"))),
                }
            }
            "shots" => self.shots = num(key, value)?,
            "trajectories" => self.trajectories = num(key, value)?,
            "p1" => self.p1 = num(key, value)?,
            "p2" => self.p2 = num(key, value)?,
            "readout_flip" => self.readout_flip = num(key, value)?,
            "init" => {
                self.init = if value == "random" {
                    InitChoice::Random
                } else if let Some(list) = value.strip_prefix("explicit:") {
                    InitChoice::Explicit(parse_float_list(key, list)?)
                } else {
                    return Err(config_err(format!(
                        "init must be 'random' or 'explicit:v0,v1,...', got '{value}'"
                    )));
                }
            }
            "params" => self.params = Some(parse_float_list(key, value)?),
            "optimizer" => {
                self.optimizer = match value {
                    "aqngd" => OptimizerChoice::Aqngd,
                    "spsa" => OptimizerChoice::Spsa,
                    other => return Err(config_err(format!("unknown optimizer '{other}'"))),
                }
            }
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "k_max" => self.k_max = num(key, value)?,
            "pinv_tol" => self.pinv_tol = num(key, value)?,
            "converge_tol" => self.converge_tol = num(key, value)?,
            "max_iters" => self.max_iters = num(key, value)?,
            "spsa_iters" => self.spsa_iters = num(key, value)?,
            "spsa_a" => self.spsa_a = num(key, value)?,
            "spsa_c" => self.spsa_c = num(key, value)?,
            "spsa_big_a" => self.spsa_big_a = num(key, value)?,
            "rem" => self.rem = parse_bool(key, value)?,
            "rem_positive" => self.rem_positive = parse_bool(key, value)?,
            "zne_folds" => {
                self.zne_folds = value
                    .split(',')
                    .map(|t| num::<u32>(key, t.trim()))
                    .collect::<Result<_, _>>()?
            }
            "zne_degree" => self.zne_degree = num(key, value)?,
            "calibration_shots" => self.calibration_shots = num(key, value)?,
            "grid_resolution" => self.grid_resolution = num(key, value)?,
            "grid_extent" => self.grid_extent = num(key, value)?,
            "metric_draws" => self.metric_draws = num(key, value)?,
            other => return Err(config_err(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(config_err(format!("alpha {} outside [0,1]", self.alpha)));
        }
        if self.beta <= 0.0 {
            return Err(config_err("beta must be positive"));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(config_err(format!("{name}={p} outside [0,1]")));
            }
        }
        if self.backend != BackendChoice::Exact && self.shots < 2 {
            return Err(config_err("shots must be at least 2"));
        }
        Ok(())
    }

    /// Loads the configured lattice fragment; file fragments are parsed and
    /// validated here.
    pub fn fragment(&self) -> Result<LatticeFragment, CliError> {
        match &self.fragment {
            FragmentChoice::Triangle => Ok(build_triangle()),
            FragmentChoice::Star => Ok(build_star()),
            FragmentChoice::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    config_err(format!("cannot read fragment {}: {e}", path.display()))
                })?;
                LatticeFragment::from_text(&text)
                    .map_err(|e| config_err(format!("bad fragment file: {e}")))
            }
        }
    }

    /// The ansatz of the configured fragment; file fragments have none.
    pub fn ansatz(&self) -> Result<AnsatzSpec, CliError> {
        match self.fragment {
            FragmentChoice::Triangle => Ok(triangle_ansatz()),
            FragmentChoice::Star => Ok(star_ansatz()),
            FragmentChoice::File(_) => Err(config_err(
                "this command needs an ansatz; only the triangle and star fragments have one",
            )),
        }
    }

    /// Bound-circuit parameters for the mitigation and structure-factor
    /// pipelines: the configured `params`, or the known exact ground-state
    /// parameters of the built-in fragments.
    pub fn bound_params(&self) -> Result<Vec<f64>, CliError> {
        if let Some(p) = &self.params {
            return Ok(p.clone());
        }
        match self.fragment {
            FragmentChoice::Triangle => Ok(vec![
                std::f64::consts::PI / 4.0,
                3.0 * std::f64::consts::PI / 2.0,
                std::f64::consts::PI,
            ]),
            FragmentChoice::Star => Ok(star_exact_params()),
            FragmentChoice::File(_) => {
                Err(config_err("params required for a file fragment"))
            }
        }
    }

    pub fn noise_model(&self, num_qubits: usize) -> NoiseModel {
        NoiseModel::uniform(num_qubits, self.p1, self.p2, self.readout_flip)
    }

    pub fn aqngd(&self) -> AqngdConfig {
        AqngdConfig {
            alpha: self.alpha,
            beta: self.beta,
            k_max: self.k_max,
            pinv_tol: self.pinv_tol,
            converge_tol: self.converge_tol,
            max_iters: self.max_iters,
        }
    }

    pub fn spsa_gains(&self) -> SpsaGains {
        SpsaGains {
            a: self.spsa_a,
            c: self.spsa_c,
            big_a: self.spsa_big_a,
            ..Default::default()
        }
    }

    /// The config text plus the resolved seed and output directory, written
    /// next to the artifacts for bit-reproducibility.
    pub fn resolved_text(&self) -> String {
        format!(
            "{}\n# resolved\n# seed = {}\n# out = {}\n",
            self.source_text.trim_end(),
            self.seed,
            self.out.display()
        )
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(config_err(format!("bad boolean '{other}' for {key}"))),
    }
}

fn parse_float_list(key: &str, list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad number '{t}' in {key}")))
        })
        .collect()
}
