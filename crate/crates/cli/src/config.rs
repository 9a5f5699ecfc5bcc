//! Sectioned `key = value` configuration.
//!
//! ```text
//! [device]
//! g1 = 2pi*100MHz
//! C_self = 100fF
//! [geometry]
//! r0 = 1.01um
//! [interferometer]
//! n_bar = 1e7
//! phi_t = optimal
//! [sweep]
//! variable = n_bar
//! start = 1e2
//! stop = 1e7
//! points = 26
//! scale = log
//! ```
//!
//! Angular frequencies are either bare numbers in rad/s or `2pi*<value><unit>`
//! with unit `Hz`, `MHz` or `GHz`. Lengths take `um`/`nm` (bare numbers are
//! metres), capacitances `fF` (bare numbers are farads). `#` starts a comment.
//! An empty file yields the default device.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use kerrmeter_core::device::{CapacitanceModel, DeviceParams, Exposure, PlateGeometry};
use kerrmeter_core::interferometer::{OutputPort, Quadrature};
use thiserror::Error;

use crate::sweep::{Scale, SweepVariable};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: key `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Linear phase setting of the interferometer.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PhiSetting {
    #[default]
    Optimal,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerSection {
    pub n_bar: f64,
    pub theta_t: f64,
    pub phi_t: PhiSetting,
    /// Pinned Kerr phase; otherwise `n_eta_t / n̄`.
    pub eta_t: Option<f64>,
    pub n_eta_t: f64,
    /// Pinned interaction time for the device chain (s).
    pub t: Option<f64>,
    pub port: OutputPort,
    pub quadrature: Quadrature,
}

impl Default for InterferometerSection {
    fn default() -> Self {
        Self {
            n_bar: 1e7,
            theta_t: std::f64::consts::FRAC_PI_4,
            phi_t: PhiSetting::Optimal,
            eta_t: None,
            n_eta_t: 1e-3,
            t: None,
            port: OutputPort::A,
            quadrature: Quadrature::X,
        }
    }
}

impl InterferometerSection {
    pub fn eta_t_for(&self, n_bar: f64) -> f64 {
        self.eta_t.unwrap_or(self.n_eta_t / n_bar)
    }

    pub fn exposure(&self) -> Exposure {
        match self.t {
            Some(t) => Exposure::Fixed(t),
            None => Exposure::SmallTime {
                n_eta_t: self.n_eta_t,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SweepSection {
    pub variable: Option<SweepVariable>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub scale: Option<Scale>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    pub device: DeviceParams,
    pub geometry: PlateGeometry,
    /// Operating displacement `r` (m).
    pub r: f64,
    pub interferometer: InterferometerSection,
    pub sweep: SweepSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            geometry: PlateGeometry::default(),
            r: -0.5e-6,
            interferometer: InterferometerSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Device,
    Geometry,
    Interferometer,
    Sweep,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Device => "device",
            Section::Geometry => "geometry",
            Section::Interferometer => "interferometer",
            Section::Sweep => "sweep",
        })
    }
}

pub fn parse_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut section: Option<Section> = None;
    // sweep start/stop are typed by the variable, which may come later
    let mut raw_bounds: Vec<(usize, &str, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("unterminated section header `{content}`"),
            })?;
            section = Some(match name.trim() {
                "device" => Section::Device,
                "geometry" => Section::Geometry,
                "interferometer" => Section::Interferometer,
                "sweep" => Section::Sweep,
                other => {
                    return Err(ConfigError::UnknownSection {
                        line,
                        name: other.to_string(),
                    })
                }
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let section = section.ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("key `{key}` outside of any section"),
        })?;
        let bad = |message: String| ConfigError::Value {
            line,
            key: key.to_string(),
            message,
        };
        let unknown = || ConfigError::UnknownKey {
            line,
            section: section.to_string(),
            key: key.to_string(),
        };

        match section {
            Section::Device => {
                let d = &mut cfg.device;
                let slot = match key {
                    "E_J" => &mut d.e_j,
                    "g1" => &mut d.g1,
                    "g2" => &mut d.g2,
                    "Omega_c" => &mut d.omega_c,
                    "Delta0" => &mut d.big_delta0,
                    "delta0" => &mut d.delta0,
                    "gamma_21" => &mut d.gamma_21,
                    "gamma_23" => &mut d.gamma_23,
                    "gamma_43" => &mut d.gamma_43,
                    "kappa" => &mut d.kappa,
                    "E_p" => &mut d.e_p,
                    "C_self" => {
                        d.c_self = parse_capacitance(value).map_err(bad)?;
                        continue;
                    }
                    _ => return Err(unknown()),
                };
                *slot = parse_angular(value).map_err(bad)?;
            }
            Section::Geometry => {
                let g = &mut cfg.geometry;
                match key {
                    "width" => g.width = parse_length(value).map_err(bad)?,
                    "length" => g.length = parse_length(value).map_err(bad)?,
                    "thickness" => g.thickness = parse_length(value).map_err(bad)?,
                    "r0" => g.r0 = parse_length(value).map_err(bad)?,
                    "r" => cfg.r = parse_length(value).map_err(bad)?,
                    "model" => {
                        g.model = match value {
                            "parallel_plate" => CapacitanceModel::ParallelPlate,
                            "parallel_plate_with_fringe" => CapacitanceModel::ParallelPlateWithFringe,
                            other => match other.strip_prefix("constant:") {
                                Some(c) => CapacitanceModel::Constant(parse_capacitance(c.trim()).map_err(bad)?),
                                None => {
                                    return Err(bad(format!(
                                        "expected parallel_plate, parallel_plate_with_fringe or constant:<C>, got `{other}`"
                                    )))
                                }
                            },
                        }
                    }
                    _ => return Err(unknown()),
                }
            }
            Section::Interferometer => {
                let i = &mut cfg.interferometer;
                match key {
                    "n_bar" => i.n_bar = parse_number(value).map_err(bad)?,
                    "theta_t" => i.theta_t = parse_number(value).map_err(bad)?,
                    "phi_t" => {
                        i.phi_t = if value == "optimal" {
                            PhiSetting::Optimal
                        } else {
                            PhiSetting::Fixed(parse_number(value).map_err(bad)?)
                        }
                    }
                    "eta_t" => i.eta_t = Some(parse_number(value).map_err(bad)?),
                    "n_eta_t" => i.n_eta_t = parse_number(value).map_err(bad)?,
                    "t" => i.t = Some(parse_number(value).map_err(bad)?),
                    "port" => {
                        i.port = match value {
                            "A" | "a" => OutputPort::A,
                            "B" | "b" => OutputPort::B,
                            other => return Err(bad(format!("expected A or B, got `{other}`"))),
                        }
                    }
                    "quadrature" => {
                        i.quadrature = match value {
                            "X" | "x" => Quadrature::X,
                            "Y" | "y" => Quadrature::Y,
                            other => return Err(bad(format!("expected X or Y, got `{other}`"))),
                        }
                    }
                    _ => return Err(unknown()),
                }
            }
            Section::Sweep => {
                let s = &mut cfg.sweep;
                match key {
                    "variable" => s.variable = Some(value.parse().map_err(bad)?),
                    "start" | "stop" => raw_bounds.push((
                        line,
                        if key == "start" { "start" } else { "stop" },
                        value.to_string(),
                    )),
                    "points" => {
                        s.points = Some(value.parse::<usize>().map_err(|_| {
                            bad(format!("expected a positive integer, got `{value}`"))
                        })?)
                    }
                    "scale" => {
                        s.scale = Some(match value {
                            "linear" => Scale::Linear,
                            "log" => Scale::Log,
                            other => {
                                return Err(bad(format!("expected linear or log, got `{other}`")))
                            }
                        })
                    }
                    _ => return Err(unknown()),
                }
            }
        }
    }

    for (line, key, value) in raw_bounds {
        let parsed = match cfg.sweep.variable {
            Some(SweepVariable::R) => parse_length(&value),
            _ => parse_number(&value),
        }
        .map_err(|message| ConfigError::Value {
            line,
            key: key.to_string(),
            message,
        })?;
        if key == "start" {
            cfg.sweep.start = Some(parsed);
        } else {
            cfg.sweep.stop = Some(parsed);
        }
    }

    cfg.device
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.geometry
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let i = &cfg.interferometer;
    if !(i.n_bar >= 0.0) || !(i.n_eta_t > 0.0) || i.t.is_some_and(|t| !(t > 0.0)) {
        return Err(ConfigError::Invalid(
            "n_bar must be ≥ 0, n_eta_t and t positive".into(),
        ));
    }
    Ok(cfg)
}

fn parse_number(value: &str) -> std::result::Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("expected a number, got `{value}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{value}`"));
    }
    Ok(v)
}

fn split_unit<'a>(value: &'a str, units: &[(&'a str, f64)]) -> Option<(&'a str, f64)> {
    units
        .iter()
        .find_map(|&(unit, scale)| value.strip_suffix(unit).map(|num| (num.trim(), scale)))
}

/// `2pi*<x><unit>` with unit Hz/MHz/GHz, or a bare number in rad/s.
fn parse_angular(value: &str) -> std::result::Result<f64, String> {
    let compact: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(rest) = compact.strip_prefix("2pi*") {
        let (num, scale) =
            split_unit(rest, &[("GHz", 1e9), ("MHz", 1e6), ("Hz", 1.0)]).unwrap_or((rest, 1.0));
        return Ok(TAU * parse_number(num)? * scale);
    }
    if compact.ends_with("Hz") {
        return Err(format!(
            "`{value}` is a cycle frequency; write 2pi*{value} for an angular frequency"
        ));
    }
    parse_number(&compact)
}

fn parse_length(value: &str) -> std::result::Result<f64, String> {
    let compact: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    match split_unit(&compact, &[("um", 1e-6), ("nm", 1e-9)]) {
        Some((num, scale)) => Ok(parse_number(num)? * scale),
        None => parse_number(&compact),
    }
}

fn parse_capacitance(value: &str) -> std::result::Result<f64, String> {
    let compact: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    match split_unit(&compact, &[("fF", 1e-15)]) {
        Some((num, scale)) => Ok(parse_number(num)? * scale),
        None => parse_number(&compact),
    }
}
