//! Run configuration: `key = value` files with `#` comments, overridden by
//! long-form command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dqw::rho::EngineChoice;

use crate::CliError;

pub const VALID_KEYS: &[&str] = &[
    "omega_rate",
    "d_rate",
    "r_d",
    "rd_list",
    "t",
    "window",
    "grid_n",
    "n_k",
    "eps",
    "tail_eps",
    "engine",
    "out_dir",
    "cache",
    "mem_budget_mb",
    "sweep_start",
    "sweep_stop",
    "sweep_points",
    "sweep_scale",
    "ic1",
    "ic2",
    "lattice_sizes",
    "mirror_eps",
    "slices",
    "deep",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSpec {
    Auto,
    Fixed(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    pub fn times(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    SweepScale::Linear => self.start + f * (self.stop - self.start),
                    SweepScale::Log => {
                        (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub omega_rate: f64,
    pub d_rate: f64,
    pub rd_list: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub window: WindowSpec,
    pub grid_n: Option<usize>,
    pub n_k: Option<usize>,
    pub eps: f64,
    pub tail_eps: f64,
    pub engine: EngineChoice,
    pub out_dir: PathBuf,
    pub cache: bool,
    pub mem_budget_mb: u64,
    pub sweep: Option<SweepSpec>,
    pub ic: (i64, i64),
    pub lattice_sizes: Vec<i64>,
    pub mirror_eps: f64,
    /// Doubled phase-space coordinates `2x`.
    pub slices: Vec<(i64, i64)>,
    pub deep: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega_rate: 1.0,
            d_rate: 0.5,
            rd_list: None,
            t: None,
            window: WindowSpec::Auto,
            grid_n: None,
            n_k: None,
            eps: 1e-8,
            tail_eps: 1e-9,
            engine: EngineChoice::Auto,
            out_dir: PathBuf::from("out"),
            cache: true,
            mem_budget_mb: 3072,
            sweep: None,
            ic: (0, 0),
            lattice_sizes: vec![8, 16],
            mirror_eps: 1e-8,
            slices: vec![(2, -2), (2, 2), (1, 1), (1, -1)],
            deep: false,
        }
    }
}

impl RunConfig {
    pub fn mem_budget_bytes(&self) -> u64 {
        self.mem_budget_mb << 20
    }

    pub fn params(&self) -> Result<dqw::ModelParams, CliError> {
        dqw::ModelParams::new(self.omega_rate, self.d_rate)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params_for_rd(&self, r_d: f64) -> Result<dqw::ModelParams, CliError> {
        dqw::ModelParams::new(self.omega_rate, 0.5 * r_d * self.omega_rate)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Serializable snapshot for the manifest.
    pub fn snapshot(&self, command: &str) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "omega_rate": self.omega_rate,
            "d_rate": self.d_rate,
            "rd_list": self.rd_list,
            "t": self.t,
            "window": match self.window { WindowSpec::Auto => "auto".to_string(), WindowSpec::Fixed(l) => l.to_string() },
            "grid_n": self.grid_n,
            "n_k": self.n_k,
            "eps": self.eps,
            "tail_eps": self.tail_eps,
            "engine": format!("{:?}", self.engine).to_lowercase(),
            "out_dir": self.out_dir.display().to_string(),
            "cache": self.cache,
            "mem_budget_mb": self.mem_budget_mb,
            "sweep": self.sweep.as_ref().map(|s| serde_json::json!({
                "start": s.start, "stop": s.stop, "points": s.points,
                "scale": if s.scale == SweepScale::Log { "log" } else { "linear" },
            })),
            "ic": [self.ic.0, self.ic.1],
            "lattice_sizes": self.lattice_sizes,
            "mirror_eps": self.mirror_eps,
            "slices": self.slices.iter().map(|&(a, b)| format!("{}:{}", a as f64 / 2.0, b as f64 / 2.0)).collect::<Vec<_>>(),
            "deep": self.deep,
        })
    }
}

fn bad_key(key: &str) -> CliError {
    CliError::Config(format!(
        "unknown configuration key '{key}'; valid keys: {}",
        VALID_KEYS.join(", ")
    ))
}

fn parse_err(key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("key '{key}': cannot parse '{value}' as {what}"))
}

/// Raw `key = value` pairs from a config file.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Apply raw pairs (file first, then flag overrides) onto the defaults.
pub fn apply_pairs(
    config: &mut RunConfig,
    pairs: &BTreeMap<String, String>,
) -> Result<(), CliError> {
    let mut r_d_request: Option<f64> = None;
    let mut d_rate_request: Option<f64> = None;
    for (key, value) in pairs {
        match key.as_str() {
            "omega_rate" => {
                config.omega_rate = value.parse().map_err(|_| parse_err(key, value, "a number"))?
            }
            "d_rate" => {
                d_rate_request =
                    Some(value.parse().map_err(|_| parse_err(key, value, "a number"))?)
            }
            "r_d" => {
                r_d_request =
                    Some(value.parse().map_err(|_| parse_err(key, value, "a number"))?)
            }
            "rd_list" => {
                let list: Result<Vec<f64>, _> =
                    value.split(',').map(|v| v.trim().parse::<f64>()).collect();
                config.rd_list =
                    Some(list.map_err(|_| parse_err(key, value, "a comma list of numbers"))?);
            }
            "t" => config.t = Some(value.parse().map_err(|_| parse_err(key, value, "a number"))?),
            "window" => {
                config.window = if value == "auto" {
                    WindowSpec::Auto
                } else {
                    WindowSpec::Fixed(
                        value
                            .parse()
                            .map_err(|_| parse_err(key, value, "'auto' or an integer"))?,
                    )
                }
            }
            "grid_n" => {
                config.grid_n = if value == "auto" {
                    None
                } else {
                    Some(
                        value
                            .parse()
                            .map_err(|_| parse_err(key, value, "'auto' or an integer"))?,
                    )
                }
            }
            "n_k" => {
                config.n_k =
                    Some(value.parse().map_err(|_| parse_err(key, value, "an integer"))?)
            }
            "eps" => config.eps = parse_unit_interval(key, value)?,
            "tail_eps" => config.tail_eps = parse_unit_interval(key, value)?,
            "mirror_eps" => config.mirror_eps = parse_unit_interval(key, value)?,
            "engine" => {
                config.engine = match value.as_str() {
                    "series" => EngineChoice::Series,
                    "spectral" => EngineChoice::Spectral,
                    "auto" => EngineChoice::Auto,
                    _ => return Err(parse_err(key, value, "series|spectral|auto")),
                }
            }
            "out_dir" => config.out_dir = PathBuf::from(value),
            "cache" => {
                config.cache = match value.as_str() {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => return Err(parse_err(key, value, "on|off")),
                }
            }
            "mem_budget_mb" => {
                config.mem_budget_mb =
                    value.parse().map_err(|_| parse_err(key, value, "an integer"))?
            }
            "sweep_start" | "sweep_stop" | "sweep_points" | "sweep_scale" => {
                let mut sweep = config.sweep.clone().unwrap_or(SweepSpec {
                    start: 0.25,
                    stop: 3.0,
                    points: 12,
                    scale: SweepScale::Linear,
                });
                match key.as_str() {
                    "sweep_start" => {
                        sweep.start =
                            value.parse().map_err(|_| parse_err(key, value, "a number"))?
                    }
                    "sweep_stop" => {
                        sweep.stop =
                            value.parse().map_err(|_| parse_err(key, value, "a number"))?
                    }
                    "sweep_points" => {
                        sweep.points =
                            value.parse().map_err(|_| parse_err(key, value, "an integer"))?;
                        if sweep.points < 2 {
                            return Err(CliError::Config(
                                "sweep_points must be >= 2".to_string(),
                            ));
                        }
                    }
                    _ => {
                        sweep.scale = match value.as_str() {
                            "linear" => SweepScale::Linear,
                            "log" => SweepScale::Log,
                            _ => return Err(parse_err(key, value, "linear|log")),
                        }
                    }
                }
                config.sweep = Some(sweep);
            }
            "ic1" => {
                config.ic.0 = value.parse().map_err(|_| parse_err(key, value, "an integer"))?
            }
            "ic2" => {
                config.ic.1 = value.parse().map_err(|_| parse_err(key, value, "an integer"))?
            }
            "lattice_sizes" => {
                let list: Result<Vec<i64>, _> =
                    value.split(',').map(|v| v.trim().parse::<i64>()).collect();
                config.lattice_sizes =
                    list.map_err(|_| parse_err(key, value, "a comma list of integers"))?;
            }
            "slices" => {
                let mut slices = Vec::new();
                for part in value.split(';') {
                    let Some((x1, x2)) = part.split_once(':') else {
                        return Err(parse_err(key, value, "x1:x2 pairs separated by ';'"));
                    };
                    slices.push((parse_half_integer(key, x1)?, parse_half_integer(key, x2)?));
                }
                config.slices = slices;
            }
            "deep" => {
                config.deep = match value.as_str() {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => return Err(parse_err(key, value, "on|off")),
                }
            }
            _ => return Err(bad_key(key)),
        }
    }
    match (d_rate_request, r_d_request) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "set either d_rate or r_d, not both".to_string(),
            ))
        }
        (Some(d), None) => config.d_rate = d,
        (None, Some(r)) => config.d_rate = 0.5 * r * config.omega_rate,
        (None, None) => {}
    }
    if !(config.eps > 0.0 && config.eps < 1.0) || !(config.tail_eps > 0.0 && config.tail_eps < 1.0)
    {
        return Err(CliError::Config("tolerances must lie in (0, 1)".to_string()));
    }
    Ok(())
}

fn parse_unit_interval(key: &str, value: &str) -> Result<f64, CliError> {
    let v: f64 = value.parse().map_err(|_| parse_err(key, value, "a number"))?;
    if !(v > 0.0 && v < 1.0) {
        return Err(CliError::Config(format!("key '{key}': must lie in (0, 1)")));
    }
    Ok(v)
}

/// Positions are written as integers or half-integers; stored doubled.
fn parse_half_integer(key: &str, value: &str) -> Result<i64, CliError> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| parse_err(key, value, "an integer or half-integer"))?;
    let doubled = 2.0 * v;
    if (doubled - doubled.round()).abs() > 1e-9 {
        return Err(parse_err(key, value, "an integer or half-integer"));
    }
    Ok(doubled.round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_lists_valid_ones() {
        let mut cfg = RunConfig::default();
        let mut pairs = BTreeMap::new();
        pairs.insert("bogus".to_string(), "1".to_string());
        let err = apply_pairs(&mut cfg, &pairs).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("omega_rate") && msg.contains("n_k"));
    }

    #[test]
    fn r_d_resolution_and_conflict() {
        let mut cfg = RunConfig::default();
        let mut pairs = BTreeMap::new();
        pairs.insert("omega_rate".to_string(), "2.0".to_string());
        pairs.insert("r_d".to_string(), "3.0".to_string());
        apply_pairs(&mut cfg, &pairs).unwrap();
        assert_eq!(cfg.d_rate, 3.0);

        let mut pairs = BTreeMap::new();
        pairs.insert("r_d".to_string(), "1.0".to_string());
        pairs.insert("d_rate".to_string(), "1.0".to_string());
        assert!(apply_pairs(&mut RunConfig::default(), &pairs).is_err());
    }

    #[test]
    fn slice_parsing() {
        let mut cfg = RunConfig::default();
        let mut pairs = BTreeMap::new();
        pairs.insert("slices".to_string(), "1:-1;0.5:0.5".to_string());
        apply_pairs(&mut cfg, &pairs).unwrap();
        assert_eq!(cfg.slices, vec![(2, -2), (1, 1)]);
        let mut pairs = BTreeMap::new();
        pairs.insert("slices".to_string(), "0.3:0".to_string());
        assert!(apply_pairs(&mut RunConfig::default(), &pairs).is_err());
    }
}
