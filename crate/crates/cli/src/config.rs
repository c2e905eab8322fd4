//! Flat `key=value` configuration.
//!
//! A configuration file holds `key=value` tokens separated by whitespace or
//! newlines, with `#` starting a comment. Command flags carry the same names
//! and win over the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use rdfilter::{PredatorCoupling, ShiftOrder};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{token}` is not of the form key=value")]
    Malformed { token: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error("`ratio` and `dt` are mutually exclusive")]
    RatioAndDt,
    #[error("`shift_order=3` is not available for heat2d")]
    ShiftOrder2d,
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem", "heat1d", "heat1d | predprey1d | heat2d | custom"),
    ("N", "64", "grid intervals along x"),
    ("Ny", "N", "grid intervals along y (heat2d)"),
    ("ratio", "2", "step as 3dt/h^2; excludes dt"),
    ("dt", "none", "time step; excludes ratio"),
    ("T", "1", "final time; the step shrinks slightly to land on it"),
    ("shift_order", "1", "1 | 3 (3 is 1D only)"),
    ("filter", "on", "on | off"),
    ("kappa_fraction", "1", "stretching as a fraction of the critical value"),
    ("kappa_adapt", "false", "raise the stretching while high modes grow"),
    ("n_subdomains", "1", "overlapping subdomains (1D)"),
    ("overlap", "8", "shared intervals between neighbouring subdomains"),
    ("overlap_adapt", "false", "widen overlaps on interface growth"),
    ("output", "-", "CSV path, - for stdout"),
    ("timing", "false", "record wall_ms (otherwise 0 for byte-stable output)"),
    ("blowup_threshold", "1e8", "sup norm counted as blow-up"),
    ("coupling", "printed", "predprey1d: printed | classic"),
    ("excited", "true", "predprey1d: oscillating boundary data"),
    ("coefficients", "0,-1,0,0", "custom: c0,c1,c2,c3 of f(u)"),
    ("left", "0", "custom: value at x=0"),
    ("right", "1", "custom: value at x=pi"),
    ("sweep_N", "32,64", "sweep: grid sizes"),
    ("sweep_ratios", "0.25,0.5,1,2,3,4,6,8", "sweep: values of 3dt/h^2"),
    ("sweep_shifts", "1,3", "sweep: shift orders"),
    ("overlaps", "4,8,16", "dd: overlaps to study"),
    ("dd_steps", "500", "dd: steps a ratio must survive"),
    ("dd_resolution", "0.1", "dd: bisection width"),
    ("dd_max_ratio", "32", "dd: largest ratio explored"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Heat1d,
    PredPrey1d,
    Heat2d,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Ratio(f64),
    Dt(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub n: usize,
    pub ny: usize,
    pub step: StepSize,
    pub t_final: f64,
    pub shift_order: ShiftOrder,
    pub filter: bool,
    pub kappa_fraction: f64,
    pub kappa_adapt: bool,
    pub n_subdomains: usize,
    pub overlap: usize,
    pub overlap_adapt: bool,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    pub timing: bool,
    pub blowup_threshold: f64,
    pub coupling: PredatorCoupling,
    pub excited: bool,
    pub coefficients: [f64; 4],
    pub left: f64,
    pub right: f64,
    pub sweep_n: Vec<usize>,
    pub sweep_ratios: Vec<f64>,
    pub sweep_shifts: Vec<ShiftOrder>,
    pub overlaps: Vec<usize>,
    pub dd_steps: usize,
    pub dd_resolution: f64,
    pub dd_max_ratio: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_pairs(Vec::<(String, String)>::new()).expect("defaults are valid")
    }
}

/// Splits configuration text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            pairs.push(split_token(token)?);
        }
    }
    Ok(pairs)
}

pub fn split_token(token: &str) -> Result<(String, String), ConfigError> {
    match token.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Malformed {
            token: token.to_string(),
        }),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_pairs(parse_pairs(text)?)
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let value = self.raw(key).unwrap_or_else(|| default_of(key));
        value.parse().map_err(|e: T::Err| invalid(key, value, e.to_string()))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let value = self.raw(key).unwrap_or_else(|| default_of(key));
        let items = value
            .split(',')
            .map(|s| s.trim().parse().map_err(|e: T::Err| invalid(key, value, e.to_string())))
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(invalid(key, value, "empty list"));
        }
        Ok(items)
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        let value = self.raw(key).unwrap_or_else(|| default_of(key));
        match value {
            "true" | "on" | "yes" | "1" => Ok(true),
            "false" | "off" | "no" | "0" => Ok(false),
            _ => Err(invalid(key, value, "expected on/off or true/false")),
        }
    }
}

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1).expect("known key")
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(key, &x.to_string(), "must be positive and finite"))
    }
}

fn shift_of(key: &str, order: u8) -> Result<ShiftOrder, ConfigError> {
    match order {
        1 => Ok(ShiftOrder::First),
        3 => Ok(ShiftOrder::Third),
        _ => Err(invalid(key, &order.to_string(), "expected 1 or 3")),
    }
}

impl RunConfig {
    /// Builds a validated configuration. Later pairs override earlier ones.
    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self, ConfigError>
    where
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            let k = k.into();
            if !KEYS.iter().any(|key| key.0 == k) {
                return Err(ConfigError::UnknownKey(k));
            }
            map.insert(k, v.into());
        }
        Self::from_values(Values(map))
    }

    /// File pairs overridden by command-line pairs. A step size given on the
    /// command line replaces either form in the file.
    pub fn from_sources(file: Vec<(String, String)>, cli: Vec<(String, String)>) -> Result<Self, ConfigError> {
        let cli_has_step = cli.iter().any(|(k, _)| k == "ratio" || k == "dt");
        let file = file
            .into_iter()
            .filter(|(k, _)| !(cli_has_step && (k == "ratio" || k == "dt")));
        let mut seen_step = None::<String>;
        for (k, _) in &cli {
            if k == "ratio" || k == "dt" {
                match &seen_step {
                    Some(prev) if prev != k => return Err(ConfigError::RatioAndDt),
                    _ => seen_step = Some(k.clone()),
                }
            }
        }
        Self::from_pairs(file.chain(cli))
    }

    fn from_values(v: Values) -> Result<Self, ConfigError> {
        let problem = match v.raw("problem").unwrap_or("heat1d") {
            "heat1d" => ProblemKind::Heat1d,
            "predprey1d" => ProblemKind::PredPrey1d,
            "heat2d" => ProblemKind::Heat2d,
            "custom" => ProblemKind::Custom,
            other => return Err(invalid("problem", other, "expected heat1d, predprey1d, heat2d or custom")),
        };
        let n: usize = v.get("N")?;
        if n < 4 {
            return Err(invalid("N", &n.to_string(), "at least 4 intervals"));
        }
        let ny = match v.raw("Ny") {
            None => n,
            Some(_) => v.get("Ny")?,
        };
        if ny < 4 {
            return Err(invalid("Ny", &ny.to_string(), "at least 4 intervals"));
        }
        let step = match (v.raw("ratio"), v.raw("dt")) {
            (Some(_), Some(_)) => return Err(ConfigError::RatioAndDt),
            (_, Some(_)) => StepSize::Dt(positive("dt", v.get("dt")?)?),
            _ => StepSize::Ratio(positive("ratio", v.get("ratio")?)?),
        };
        let shift_order = shift_of("shift_order", v.get("shift_order")?)?;
        if problem == ProblemKind::Heat2d && shift_order == ShiftOrder::Third {
            return Err(ConfigError::ShiftOrder2d);
        }
        let n_subdomains: usize = v.get("n_subdomains")?;
        if n_subdomains == 0 {
            return Err(invalid("n_subdomains", "0", "at least 1"));
        }
        let overlap: usize = v.get("overlap")?;
        if overlap == 0 || overlap % 2 == 1 {
            return Err(invalid("overlap", &overlap.to_string(), "must be even and positive"));
        }
        let coupling = match v.raw("coupling").unwrap_or("printed") {
            "printed" => PredatorCoupling::Printed,
            "classic" => PredatorCoupling::Classic,
            other => return Err(invalid("coupling", other, "expected printed or classic")),
        };
        let coefficients: Vec<f64> = v.list("coefficients")?;
        let coefficients: [f64; 4] = coefficients
            .try_into()
            .map_err(|_| invalid("coefficients", v.raw("coefficients").unwrap_or(""), "expected four values"))?;
        let output = match v.raw("output").unwrap_or("-") {
            "-" | "" => None,
            path => Some(PathBuf::from(path)),
        };
        let sweep_shifts = v
            .list::<u8>("sweep_shifts")?
            .into_iter()
            .map(|o| shift_of("sweep_shifts", o))
            .collect::<Result<_, _>>()?;
        let sweep_n: Vec<usize> = v.list("sweep_N")?;
        if let Some(&bad) = sweep_n.iter().find(|&&n| n < 4) {
            return Err(invalid("sweep_N", &bad.to_string(), "at least 4 intervals"));
        }
        let sweep_ratios = v
            .list::<f64>("sweep_ratios")?
            .into_iter()
            .map(|r| positive("sweep_ratios", r))
            .collect::<Result<_, _>>()?;
        let overlaps: Vec<usize> = v.list("overlaps")?;
        if let Some(&bad) = overlaps.iter().find(|&&o| o == 0 || o % 2 == 1) {
            return Err(invalid("overlaps", &bad.to_string(), "must be even and positive"));
        }
        Ok(Self {
            problem,
            n,
            ny,
            step,
            t_final: positive("T", v.get("T")?)?,
            shift_order,
            filter: v.flag("filter")?,
            kappa_fraction: positive("kappa_fraction", v.get("kappa_fraction")?)?,
            kappa_adapt: v.flag("kappa_adapt")?,
            n_subdomains,
            overlap,
            overlap_adapt: v.flag("overlap_adapt")?,
            output,
            timing: v.flag("timing")?,
            blowup_threshold: positive("blowup_threshold", v.get("blowup_threshold")?)?,
            coupling,
            excited: v.flag("excited")?,
            coefficients,
            left: v.get("left")?,
            right: v.get("right")?,
            sweep_n,
            sweep_ratios,
            sweep_shifts,
            overlaps,
            dd_steps: v.get("dd_steps")?,
            dd_resolution: positive("dd_resolution", v.get("dd_resolution")?)?,
            dd_max_ratio: positive("dd_max_ratio", v.get("dd_max_ratio")?)?,
        })
    }

    /// `(steps, dt)` reaching `T` in 1D. The step never exceeds the one
    /// requested.
    pub fn steps_1d(&self, h: f64) -> (usize, f64) {
        let nominal = match self.step {
            StepSize::Ratio(r) => r * h * h / 3.0,
            StepSize::Dt(dt) => dt,
        };
        let steps = (self.t_final / nominal - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn defaults_parse() {
        let c = RunConfig::default();
        assert_eq!(c.problem, ProblemKind::Heat1d);
        assert_eq!(c.step, StepSize::Ratio(2.0));
        assert_eq!(c.ny, 64);
        assert_eq!(c.output, None);
    }

    #[test]
    fn comments_and_lines() {
        let c = parse_config("# study\nproblem=custom   N=32\ncoefficients=1,0,0,-1 # cubic\n").unwrap();
        assert_eq!(c.problem, ProblemKind::Custom);
        assert_eq!(c.n, 32);
        assert_eq!(c.coefficients, [1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("kappa_fraction=-1").unwrap_err();
        assert!(e.to_string().contains("kappa_fraction"));
        let e = parse_config("colour=red").unwrap_err();
        assert!(e.to_string().contains("colour"));
        assert!(matches!(parse_config("N").unwrap_err(), ConfigError::Malformed { .. }));
        assert!(parse_config("overlap=5").unwrap_err().to_string().contains("overlap"));
    }

    #[test]
    fn steps_land_on_t() {
        let c = parse_config("dt=0.3 T=1").unwrap();
        let (steps, dt) = c.steps_1d(PI / 64.0);
        assert_eq!(steps, 4);
        assert!((dt * 4.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cli_step_replaces_file_step() {
        let file = parse_pairs("ratio=4").unwrap();
        let cli = vec![("dt".to_string(), "0.001".to_string())];
        assert_eq!(RunConfig::from_sources(file, cli).unwrap().step, StepSize::Dt(0.001));
    }
}
