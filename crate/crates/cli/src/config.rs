//! Flat `key = value` run configuration.

use std::fmt;
use std::str::FromStr;

use backscatter_isac::conic::SolverSettings;
use backscatter_isac::experiments::{bearing_grid, CoverageSpec, MethodKind};
use backscatter_isac::scene::{ArrayConfig, LinkBudget, Position, SystemParams};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("`{key}`: {reason}")]
    Key { key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    DetectDistance,
    Coverage,
    PowerSweep,
    BeamPattern,
    SolveOne,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::DetectDistance => "detect-distance",
            Experiment::Coverage => "coverage",
            Experiment::PowerSweep => "power-sweep",
            Experiment::BeamPattern => "beam-pattern",
            Experiment::SolveOne => "solve-one",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "detect-distance" => Experiment::DetectDistance,
            "coverage" => Experiment::Coverage,
            "power-sweep" => Experiment::PowerSweep,
            "beam-pattern" => Experiment::BeamPattern,
            "solve-one" => Experiment::SolveOne,
            _ => return Err(format!("unknown experiment `{s}`")),
        })
    }
}

/// `zf`, `joint`, or `zf+joint` (alias `both`).
pub fn parse_methods(s: &str) -> Result<Vec<MethodKind>, String> {
    match s {
        "both" | "zf+joint" => Ok(MethodKind::ALL.to_vec()),
        other => other
            .parse::<MethodKind>()
            .map(|m| vec![m])
            .map_err(|e| e.to_string()),
    }
}

fn methods_str(m: &[MethodKind]) -> String {
    m.iter().map(|m| m.as_str()).collect::<Vec<_>>().join("+")
}

/// Every setting of a run. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub methods: Vec<MethodKind>,
    pub n_antennas: Vec<usize>,
    /// Receive elements; equal to the transmit count when unset.
    pub n_rx: Option<usize>,
    pub element_spacing: f64,
    pub carrier_ghz: f64,
    pub total_power_dbm: f64,
    pub temperature_k: f64,
    pub bandwidth_mhz: f64,
    pub noise_figure_db: f64,
    pub tag_sensitivity_dbm: f64,
    pub reader_sensitivity_dbm: f64,
    pub eta: f64,
    pub gamma_u_db: Vec<f64>,
    pub gamma_tag_db: Option<f64>,
    pub gamma_reader_db: Option<f64>,
    pub user_x: f64,
    pub user_y: f64,
    pub angle_start_deg: f64,
    pub angle_stop_deg: f64,
    pub angle_step_deg: f64,
    pub search_low_m: f64,
    pub search_tol_m: f64,
    pub tag_distance_m: f64,
    pub tag_angle_deg: f64,
    pub pattern_step_deg: f64,
    pub coverage_users: usize,
    pub coverage_x_min: f64,
    pub coverage_x_max: f64,
    pub coverage_y_min: f64,
    pub coverage_y_max: f64,
    pub seed: u64,
    pub solver_tolerance: f64,
    pub solver_max_iter: u32,
    pub parallel: bool,
    pub dump_program: bool,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = LinkBudget::default();
        let cov = CoverageSpec::default();
        let user = Position::new(
            5.0 * std::f64::consts::FRAC_1_SQRT_2,
            5.0 * std::f64::consts::FRAC_1_SQRT_2,
        );
        Self {
            experiment: Experiment::DetectDistance,
            methods: MethodKind::ALL.to_vec(),
            n_antennas: vec![4],
            n_rx: None,
            element_spacing: 0.5,
            carrier_ghz: ArrayConfig::DEFAULT_CARRIER_HZ / 1e9,
            total_power_dbm: b.total_power_dbm,
            temperature_k: b.temperature_k,
            bandwidth_mhz: b.bandwidth_hz / 1e6,
            noise_figure_db: b.noise_figure_db,
            tag_sensitivity_dbm: b.tag_sensitivity_dbm,
            reader_sensitivity_dbm: b.reader_sensitivity_dbm,
            eta: b.eta,
            gamma_u_db: vec![b.gamma_user_db],
            gamma_tag_db: None,
            gamma_reader_db: None,
            user_x: user.x,
            user_y: user.y,
            angle_start_deg: 0.0,
            angle_stop_deg: 180.0,
            angle_step_deg: 5.0,
            search_low_m: 0.1,
            search_tol_m: 0.01,
            tag_distance_m: 6.0,
            tag_angle_deg: 90.0,
            pattern_step_deg: 0.5,
            coverage_users: cov.n_users,
            coverage_x_min: cov.x_range.0,
            coverage_x_max: cov.x_range.1,
            coverage_y_min: cov.y_range.0,
            coverage_y_max: cov.y_range.1,
            seed: cov.seed,
            solver_tolerance: SolverSettings::default().tolerance,
            solver_max_iter: SolverSettings::default().max_iter,
            parallel: true,
            dump_program: false,
            output_dir: "out".into(),
        }
    }
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("`{v}` is not a valid number"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let items: Vec<T> = v
        .split(',')
        .map(|s| num(s.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn flag(v: &str) -> Result<bool, String> {
    v.parse().map_err(|_| format!("`{v}` is not true or false"))
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Key names in the order they are written back out.
pub const KEYS: [&str; 37] = [
    "experiment",
    "methods",
    "n_antennas",
    "n_rx",
    "element_spacing",
    "carrier_ghz",
    "total_power_dbm",
    "temperature_k",
    "bandwidth_mhz",
    "noise_figure_db",
    "tag_sensitivity_dbm",
    "reader_sensitivity_dbm",
    "eta",
    "gamma_u_db",
    "gamma_tag_db",
    "gamma_reader_db",
    "user_x",
    "user_y",
    "angle_start_deg",
    "angle_stop_deg",
    "angle_step_deg",
    "search_low_m",
    "search_tol_m",
    "tag_distance_m",
    "tag_angle_deg",
    "pattern_step_deg",
    "coverage_users",
    "coverage_x_min",
    "coverage_x_max",
    "coverage_y_min",
    "coverage_y_max",
    "seed",
    "solver_tolerance",
    "solver_max_iter",
    "parallel",
    "dump_program",
    "output_dir",
];

impl RunConfig {
    /// Sets one key from its textual value. Does not run cross-field checks.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = v.parse()?,
            "methods" => self.methods = parse_methods(v)?,
            "n_antennas" => self.n_antennas = list(v)?,
            "n_rx" => self.n_rx = Some(num(v)?),
            "element_spacing" => self.element_spacing = num(v)?,
            "carrier_ghz" => self.carrier_ghz = num(v)?,
            "total_power_dbm" => self.total_power_dbm = num(v)?,
            "temperature_k" => self.temperature_k = num(v)?,
            "bandwidth_mhz" => self.bandwidth_mhz = num(v)?,
            "noise_figure_db" => self.noise_figure_db = num(v)?,
            "tag_sensitivity_dbm" => self.tag_sensitivity_dbm = num(v)?,
            "reader_sensitivity_dbm" => self.reader_sensitivity_dbm = num(v)?,
            "eta" => self.eta = num(v)?,
            "gamma_u_db" => self.gamma_u_db = list(v)?,
            "gamma_tag_db" => self.gamma_tag_db = Some(num(v)?),
            "gamma_reader_db" => self.gamma_reader_db = Some(num(v)?),
            "user_x" => self.user_x = num(v)?,
            "user_y" => self.user_y = num(v)?,
            "angle_start_deg" => self.angle_start_deg = num(v)?,
            "angle_stop_deg" => self.angle_stop_deg = num(v)?,
            "angle_step_deg" => self.angle_step_deg = num(v)?,
            "search_low_m" => self.search_low_m = num(v)?,
            "search_tol_m" => self.search_tol_m = num(v)?,
            "tag_distance_m" => self.tag_distance_m = num(v)?,
            "tag_angle_deg" => self.tag_angle_deg = num(v)?,
            "pattern_step_deg" => self.pattern_step_deg = num(v)?,
            "coverage_users" => self.coverage_users = num(v)?,
            "coverage_x_min" => self.coverage_x_min = num(v)?,
            "coverage_x_max" => self.coverage_x_max = num(v)?,
            "coverage_y_min" => self.coverage_y_min = num(v)?,
            "coverage_y_max" => self.coverage_y_max = num(v)?,
            "seed" => self.seed = num(v)?,
            "solver_tolerance" => self.solver_tolerance = num(v)?,
            "solver_max_iter" => self.solver_max_iter = num(v)?,
            "parallel" => self.parallel = flag(v)?,
            "dump_program" => self.dump_program = flag(v)?,
            "output_dir" => {
                if v.is_empty() {
                    return Err("empty path".into());
                }
                self.output_dir = v.to_string()
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// `(key, value)` pairs that [`parse_config`] reads back into `self`.
    /// Unset optional keys are left out.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        for key in KEYS {
            let value = match key {
                "experiment" => self.experiment.as_str().to_string(),
                "methods" => methods_str(&self.methods),
                "n_antennas" => join(&self.n_antennas),
                "n_rx" => match self.n_rx {
                    Some(n) => n.to_string(),
                    None => continue,
                },
                "element_spacing" => self.element_spacing.to_string(),
                "carrier_ghz" => self.carrier_ghz.to_string(),
                "total_power_dbm" => self.total_power_dbm.to_string(),
                "temperature_k" => self.temperature_k.to_string(),
                "bandwidth_mhz" => self.bandwidth_mhz.to_string(),
                "noise_figure_db" => self.noise_figure_db.to_string(),
                "tag_sensitivity_dbm" => self.tag_sensitivity_dbm.to_string(),
                "reader_sensitivity_dbm" => self.reader_sensitivity_dbm.to_string(),
                "eta" => self.eta.to_string(),
                "gamma_u_db" => join(&self.gamma_u_db),
                "gamma_tag_db" => match self.gamma_tag_db {
                    Some(g) => g.to_string(),
                    None => continue,
                },
                "gamma_reader_db" => match self.gamma_reader_db {
                    Some(g) => g.to_string(),
                    None => continue,
                },
                "user_x" => self.user_x.to_string(),
                "user_y" => self.user_y.to_string(),
                "angle_start_deg" => self.angle_start_deg.to_string(),
                "angle_stop_deg" => self.angle_stop_deg.to_string(),
                "angle_step_deg" => self.angle_step_deg.to_string(),
                "search_low_m" => self.search_low_m.to_string(),
                "search_tol_m" => self.search_tol_m.to_string(),
                "tag_distance_m" => self.tag_distance_m.to_string(),
                "tag_angle_deg" => self.tag_angle_deg.to_string(),
                "pattern_step_deg" => self.pattern_step_deg.to_string(),
                "coverage_users" => self.coverage_users.to_string(),
                "coverage_x_min" => self.coverage_x_min.to_string(),
                "coverage_x_max" => self.coverage_x_max.to_string(),
                "coverage_y_min" => self.coverage_y_min.to_string(),
                "coverage_y_max" => self.coverage_y_max.to_string(),
                "seed" => self.seed.to_string(),
                "solver_tolerance" => self.solver_tolerance.to_string(),
                "solver_max_iter" => self.solver_max_iter.to_string(),
                "parallel" => self.parallel.to_string(),
                "dump_program" => self.dump_program.to_string(),
                "output_dir" => self.output_dir.clone(),
                _ => unreachable!("key table out of sync"),
            };
            out.push((key, value));
        }
        out
    }

    pub fn link_budget(&self, gamma_u_db: f64) -> LinkBudget {
        LinkBudget {
            total_power_dbm: self.total_power_dbm,
            temperature_k: self.temperature_k,
            bandwidth_hz: self.bandwidth_mhz * 1e6,
            noise_figure_db: self.noise_figure_db,
            tag_sensitivity_dbm: self.tag_sensitivity_dbm,
            reader_sensitivity_dbm: self.reader_sensitivity_dbm,
            eta: self.eta,
            gamma_user_db: gamma_u_db,
            gamma_tag_db: self.gamma_tag_db,
            gamma_reader_db: self.gamma_reader_db,
        }
    }

    pub fn params(&self, gamma_u_db: f64) -> Result<SystemParams, ConfigError> {
        self.link_budget(gamma_u_db)
            .params()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn array(&self, n: usize) -> Result<ArrayConfig, ConfigError> {
        ArrayConfig::new(
            n,
            self.n_rx.unwrap_or(n),
            self.element_spacing,
            self.carrier_ghz * 1e9,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn user(&self) -> Position {
        Position::new(self.user_x, self.user_y)
    }

    pub fn bearings(&self) -> Result<Vec<f64>, ConfigError> {
        bearing_grid(
            self.angle_start_deg,
            self.angle_stop_deg,
            self.angle_step_deg,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn pattern_bearings(&self) -> Result<Vec<f64>, ConfigError> {
        bearing_grid(0.0, 180.0, self.pattern_step_deg)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn coverage_spec(&self) -> Result<CoverageSpec, ConfigError> {
        let spec = CoverageSpec {
            n_users: self.coverage_users,
            x_range: (self.coverage_x_min, self.coverage_x_max),
            y_range: (self.coverage_y_min, self.coverage_y_max),
            seed: self.seed,
            bearings_deg: self.bearings()?,
        };
        spec.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            tolerance: self.solver_tolerance,
            max_iter: self.solver_max_iter,
        }
    }

    /// Cross-field checks; everything a run needs is derived once here so a
    /// bad value fails before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: &str| {
            Err(ConfigError::Key {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta", "must lie in (0, 1]");
        }
        if self.methods.is_empty() {
            return bad("methods", "select at least one method");
        }
        for &n in &self.n_antennas {
            self.array(n)?;
        }
        for &g in &self.gamma_u_db {
            self.params(g)?;
        }
        self.bearings()?;
        self.pattern_bearings()?;
        self.coverage_spec()?;
        if !(self.search_low_m > 0.0) {
            return bad("search_low_m", "must be positive");
        }
        if !(self.search_tol_m > 0.0) {
            return bad("search_tol_m", "must be positive");
        }
        if !(self.tag_distance_m > 0.0) {
            return bad("tag_distance_m", "must be positive");
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance < 1.0) {
            return bad("solver_tolerance", "must lie in (0, 1)");
        }
        if self.solver_max_iter == 0 {
            return bad("solver_max_iter", "must be positive");
        }
        if !(self.user_x.is_finite() && self.user_y.is_finite()) {
            return bad("user_x", "user position must be finite");
        }
        Ok(())
    }

    /// Config text that parses back to `self`.
    #[cfg(test)]
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Parses and validates a config file. Later lines may not repeat a key.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Line {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Line {
                line,
                reason: format!("duplicate key `{key}`"),
            });
        }
        cfg.set(key, value)
            .map_err(|reason| ConfigError::Line { line, reason })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
