//! Deterministic one-variable sweeps and their CSV form.

use std::f64::consts::TAU;
use std::io::Write;
use std::str::FromStr;

use kerrmeter_core::constants::TWO_PI_MHZ;
use kerrmeter_core::device::{default_r_grid, Device, PhaseChoice, Readout, DEFAULT_R_POINTS};
use kerrmeter_core::interferometer::{
    optimal_phi_t, precision_closed_form_for, ClosedForm, Estimand, InterferometerConfig,
    Quadrature,
};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Config, PhiSetting};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("[sweep] variable is {found}, but this command sweeps {expected}")]
    VariableMismatch {
        expected: SweepVariable,
        found: SweepVariable,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    /// Plate displacement (m).
    R,
    NBar,
    EtaT,
    PhiT,
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepVariable::R => "r",
            SweepVariable::NBar => "n_bar",
            SweepVariable::EtaT => "eta_t",
            SweepVariable::PhiT => "phi_t",
        })
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r" => Ok(SweepVariable::R),
            "n_bar" => Ok(SweepVariable::NBar),
            "eta_t" => Ok(SweepVariable::EtaT),
            "phi_t" => Ok(SweepVariable::PhiT),
            other => Err(format!("expected r, n_bar, eta_t or phi_t, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
    pub fixed: Config,
}

impl SweepSpec {
    /// Default range for `variable`, overridden by whatever the `[sweep]`
    /// section of `cfg` sets.
    pub fn from_config(cfg: &Config, variable: SweepVariable) -> Result<Self, SweepError> {
        if let Some(found) = cfg.sweep.variable {
            if found != variable {
                return Err(SweepError::VariableMismatch {
                    expected: variable,
                    found,
                });
            }
        }
        let (start, stop, points, scale) = match variable {
            SweepVariable::R => {
                let g = default_r_grid(2);
                (g[0], g[1], DEFAULT_R_POINTS, Scale::Linear)
            }
            SweepVariable::NBar => (1e2, 1e7, 26, Scale::Log),
            SweepVariable::EtaT => (1e-8, 1e-1, 36, Scale::Log),
            SweepVariable::PhiT => (0.0, TAU, 73, Scale::Linear),
        };
        let s = &cfg.sweep;
        let spec = Self {
            variable,
            start: s.start.unwrap_or(start),
            stop: s.stop.unwrap_or(stop),
            points: s.points.unwrap_or(points),
            scale: s.scale.unwrap_or(scale),
            fixed: *cfg,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points < 2 {
            return Err(SweepError::Spec(format!(
                "points = {} (need at least 2)",
                self.points
            )));
        }
        if !(self.start < self.stop) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(SweepError::Spec(format!(
                "start = {} must be below stop = {}",
                self.start, self.stop
            )));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(SweepError::Spec("log scale needs start > 0".into()));
        }
        if self.variable == SweepVariable::R && !(self.fixed.geometry.r0 + self.start > 0.0) {
            return Err(SweepError::Spec(format!(
                "r start {} m closes the gap (r0 = {} m)",
                self.start, self.fixed.geometry.r0
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * f,
                    Scale::Log => self.start * (self.stop / self.start).powf(f),
                }
            })
            .collect()
    }
}

/// Bit set in [`SweepRow::flags`] when the X quadrature carries no signal.
pub const FLAG_X_UNOBSERVABLE: u8 = 1;
pub const FLAG_Y_UNOBSERVABLE: u8 = 2;
/// The point violated a module precondition; see [`SweepRow::error`].
pub const FLAG_POINT_ERROR: u8 = 4;

/// One grid point. Quantities that do not apply to the sweep are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub gap: Option<f64>,
    /// rad/s
    pub eta: Option<f64>,
    pub eta_over_kappa: Option<f64>,
    /// rad/s per m
    pub d_eta_dr: Option<f64>,
    pub t: Option<f64>,
    pub eta_t: Option<f64>,
    pub phi_t_x: Option<f64>,
    pub phi_t_y: Option<f64>,
    pub delta_eta_t_x: Option<f64>,
    pub delta_eta_t_y: Option<f64>,
    pub delta_rt_x: Option<f64>,
    pub delta_rt_y: Option<f64>,
    pub flags: u8,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: f64, message: String) -> Self {
        Self {
            value,
            flags: FLAG_POINT_ERROR,
            error: Some(message),
            ..Self::default()
        }
    }

    fn set_unobservable_flags(&mut self) {
        if self.delta_eta_t_x.is_none() {
            self.flags |= FLAG_X_UNOBSERVABLE;
        }
        if self.delta_eta_t_y.is_none() {
            self.flags |= FLAG_Y_UNOBSERVABLE;
        }
    }
}

fn readout(cfg: &Config, n_bar: f64) -> Readout {
    let i = &cfg.interferometer;
    Readout {
        n_bar,
        exposure: i.exposure(),
        phase: match i.phi_t {
            PhiSetting::Optimal => PhaseChoice::Optimal,
            PhiSetting::Fixed(phi) => PhaseChoice::Fixed(phi),
        },
        theta_t: i.theta_t,
        port: i.port,
    }
}

/// Device chain at displacement `r` with `n_bar` input photons.
pub fn device_row(cfg: &Config, value: f64, r: f64, n_bar: f64) -> SweepRow {
    let device = Device::new(cfg.geometry, cfg.device);
    let kerr = match device.kerr(r) {
        Ok(k) => k,
        Err(e) => return SweepRow::failed(value, e.to_string()),
    };
    let mut row = SweepRow {
        value,
        gap: device.geometry.gap(r).ok(),
        eta: Some(kerr.eta),
        eta_over_kappa: Some(kerr.eta_over_kappa),
        ..SweepRow::default()
    };
    match device.displacement_precision(r, &readout(cfg, n_bar)) {
        Ok(p) => {
            row.d_eta_dr = Some(p.d_eta_dr);
            row.t = Some(p.t);
            row.eta_t = Some(p.eta_t);
            row.phi_t_x = Some(p.x.phi_t);
            row.phi_t_y = Some(p.y.phi_t);
            row.delta_eta_t_x = p.x.delta_eta_t;
            row.delta_eta_t_y = p.y.delta_eta_t;
            row.delta_rt_x = p.x.delta_rt;
            row.delta_rt_y = p.y.delta_rt;
            row.set_unobservable_flags();
        }
        Err(e) => {
            row.d_eta_dr = device.d_eta_dr(r).ok();
            row.flags |= FLAG_POINT_ERROR;
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Interferometer alone at (`n_bar`, `eta_t`, `phi`).
pub fn interferometer_row(
    cfg: &Config,
    value: f64,
    n_bar: f64,
    eta_t: f64,
    phi: PhiSetting,
) -> SweepRow {
    let i = &cfg.interferometer;
    let base = InterferometerConfig::new(n_bar)
        .with_theta_t(i.theta_t)
        .with_port(i.port)
        .with_eta_t(eta_t);
    if let Err(e) = base.validate() {
        return SweepRow::failed(value, e.to_string());
    }
    let mut row = SweepRow {
        value,
        eta_t: Some(eta_t),
        ..SweepRow::default()
    };
    for q in [Quadrature::X, Quadrature::Y] {
        let phi_t = match phi {
            PhiSetting::Fixed(p) => p,
            PhiSetting::Optimal => optimal_phi_t(&base, q, Estimand::KerrPhase),
        };
        let delta = precision_closed_form_for(
            &base.with_phi_t(phi_t),
            Estimand::KerrPhase,
            ClosedForm::Rederived,
        )
        .delta(q)
        .ok();
        match q {
            Quadrature::X => (row.phi_t_x, row.delta_eta_t_x) = (Some(phi_t), delta),
            Quadrature::Y => (row.phi_t_y, row.delta_eta_t_y) = (Some(phi_t), delta),
        }
    }
    row.set_unobservable_flags();
    row
}

fn evaluate(spec: &SweepSpec, value: f64) -> SweepRow {
    let cfg = &spec.fixed;
    let i = &cfg.interferometer;
    match spec.variable {
        SweepVariable::R => device_row(cfg, value, value, i.n_bar),
        SweepVariable::NBar => device_row(cfg, value, cfg.r, value),
        SweepVariable::EtaT => interferometer_row(cfg, value, i.n_bar, value, i.phi_t),
        SweepVariable::PhiT => interferometer_row(
            cfg,
            value,
            i.n_bar,
            i.eta_t_for(i.n_bar),
            PhiSetting::Fixed(value),
        ),
    }
}

/// Evaluate every grid point, `jobs` workers at a time (all cores when
/// `None`). Rows come back in grid order whatever the worker count.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let grid = spec.grid();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    Ok(pool.install(|| grid.par_iter().map(|&v| evaluate(spec, v)).collect()))
}

#[derive(Clone, Copy)]
enum Column {
    Value,
    Gap,
    Eta,
    EtaOverKappa,
    DEtaDr,
    Time,
    EtaT,
    PhiX,
    PhiY,
    DeltaEtaX,
    DeltaEtaY,
    DeltaRtX,
    DeltaRtY,
    Flags,
}

impl Column {
    fn header(self, variable: SweepVariable) -> &'static str {
        match self {
            Column::Value => match variable {
                SweepVariable::R => "r_m",
                SweepVariable::NBar => "n_bar_photons",
                SweepVariable::EtaT => "eta_t_rad",
                SweepVariable::PhiT => "phi_t_rad",
            },
            Column::Gap => "gap_m",
            Column::Eta => "eta_2pi_MHz",
            Column::EtaOverKappa => "eta_over_kappa_ratio",
            Column::DEtaDr => "d_eta_dr_2pi_MHz_per_m",
            Column::Time => "t_s",
            Column::EtaT => "eta_t_rad",
            Column::PhiX => "phi_t_x_rad",
            Column::PhiY => "phi_t_y_rad",
            Column::DeltaEtaX => "delta_eta_t_x_rad",
            Column::DeltaEtaY => "delta_eta_t_y_rad",
            Column::DeltaRtX => "delta_rt_x_m_per_Hz",
            Column::DeltaRtY => "delta_rt_y_m_per_Hz",
            Column::Flags => "flags_bitmask",
        }
    }

    fn cell(self, row: &SweepRow) -> String {
        let v = match self {
            Column::Value => Some(row.value),
            Column::Gap => row.gap,
            Column::Eta => row.eta.map(|e| e / TWO_PI_MHZ),
            Column::EtaOverKappa => row.eta_over_kappa,
            Column::DEtaDr => row.d_eta_dr.map(|d| d / TWO_PI_MHZ),
            Column::Time => row.t,
            Column::EtaT => row.eta_t,
            Column::PhiX => row.phi_t_x,
            Column::PhiY => row.phi_t_y,
            Column::DeltaEtaX => row.delta_eta_t_x,
            Column::DeltaEtaY => row.delta_eta_t_y,
            Column::DeltaRtX => row.delta_rt_x,
            Column::DeltaRtY => row.delta_rt_y,
            Column::Flags => return row.flags.to_string(),
        };
        format_number(v)
    }
}

fn columns(variable: SweepVariable) -> Vec<Column> {
    use Column::*;
    match variable {
        SweepVariable::R | SweepVariable::NBar => vec![
            Value,
            Gap,
            Eta,
            EtaOverKappa,
            DEtaDr,
            Time,
            EtaT,
            PhiX,
            PhiY,
            DeltaEtaX,
            DeltaEtaY,
            DeltaRtX,
            DeltaRtY,
            Flags,
        ],
        SweepVariable::EtaT => vec![Value, PhiX, PhiY, DeltaEtaX, DeltaEtaY, Flags],
        SweepVariable::PhiT => vec![Value, EtaT, DeltaEtaX, DeltaEtaY, Flags],
    }
}

/// Scientific notation with 12 significant digits; missing values are `nan`.
pub fn format_number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.11e}"),
        _ => "nan".to_string(),
    }
}

pub fn write_csv<W: Write>(
    rows: &[SweepRow],
    variable: SweepVariable,
    out: W,
) -> Result<(), SweepError> {
    let cols = columns(variable);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(cols.iter().map(|c| c.header(variable)))?;
    for row in rows {
        w.write_record(cols.iter().map(|c| c.cell(row)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow], variable: SweepVariable) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(rows, variable, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kerrmeter_core::device::CapacitanceModel;

    fn fit_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        let sxy: f64 = points
            .iter()
            .map(|p| (p.0.ln() - mx) * (p.1.ln() - my))
            .sum();
        let sxx: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn photon_sweep_scales() {
        let mut cfg = Config::default();
        cfg.sweep.start = Some(1e2);
        cfg.sweep.stop = Some(1e6);
        cfg.sweep.points = Some(5);
        let spec = SweepSpec::from_config(&cfg, SweepVariable::NBar).unwrap();
        let rows = run_sweep(&spec, Some(2)).unwrap();
        let pts: Vec<_> = rows
            .iter()
            .map(|r| (r.value, r.delta_eta_t_x.unwrap()))
            .collect();
        assert!((fit_slope(&pts) + 1.5).abs() < 0.02);
        let pts: Vec<_> = rows
            .iter()
            .map(|r| (r.value, r.delta_rt_x.unwrap()))
            .collect();
        assert!((fit_slope(&pts) + 1.5).abs() < 0.02);
    }

    #[test]
    fn constant_capacitance_sweep_is_flat() {
        let mut cfg = Config::default();
        cfg.geometry.model = CapacitanceModel::Constant(50e-15);
        cfg.sweep.points = Some(9);
        let spec = SweepSpec::from_config(&cfg, SweepVariable::R).unwrap();
        let rows = run_sweep(&spec, Some(1)).unwrap();
        assert!(rows.iter().all(|r| r.eta == rows[0].eta));
        assert!(rows
            .iter()
            .all(|r| r.flags & FLAG_POINT_ERROR != 0 && r.error.is_some()));
    }

    #[test]
    fn spec_validation() {
        let mut cfg = Config::default();
        cfg.sweep.points = Some(1);
        assert!(SweepSpec::from_config(&cfg, SweepVariable::NBar).is_err());
        let mut cfg = Config::default();
        cfg.sweep.start = Some(0.0);
        assert!(SweepSpec::from_config(&cfg, SweepVariable::NBar).is_err());
        let mut cfg = Config::default();
        cfg.sweep.start = Some(5.0);
        cfg.sweep.stop = Some(1.0);
        assert!(SweepSpec::from_config(&cfg, SweepVariable::PhiT).is_err());
        let mut cfg = Config::default();
        cfg.sweep.variable = Some(SweepVariable::R);
        assert!(matches!(
            SweepSpec::from_config(&cfg, SweepVariable::NBar),
            Err(SweepError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn serial_equals_parallel() {
        let cfg = Config::default();
        let spec = SweepSpec::from_config(&cfg, SweepVariable::R).unwrap();
        let a = csv_string(&run_sweep(&spec, Some(1)).unwrap(), spec.variable).unwrap();
        let b = csv_string(&run_sweep(&spec, Some(4)).unwrap(), spec.variable).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_format() {
        let row = SweepRow {
            value: 100.0,
            eta_t: Some(1e-5),
            delta_eta_t_x: Some(0.001234567890123456),
            delta_eta_t_y: None,
            flags: FLAG_Y_UNOBSERVABLE,
            ..SweepRow::default()
        };
        let text = csv_string(&[row], SweepVariable::PhiT).unwrap();
        assert_eq!(
            text,
            "phi_t_rad,eta_t_rad,delta_eta_t_x_rad,delta_eta_t_y_rad,flags_bitmask\n\
             1.00000000000e2,1.00000000000e-5,1.23456789012e-3,nan,2\n"
        );
    }

    #[test]
    fn phase_sweep_flags_dark_points() {
        let mut cfg = Config::default();
        cfg.interferometer.n_bar = 4.0;
        cfg.interferometer.eta_t = Some(0.0);
        cfg.sweep.start = Some(0.0);
        cfg.sweep.stop = Some(1.0);
        cfg.sweep.points = Some(3);
        let spec = SweepSpec::from_config(&cfg, SweepVariable::PhiT).unwrap();
        let rows = run_sweep(&spec, None).unwrap();
        // φt = 0 and ηt = 0: the X mean has no slope
        assert!(rows[0].flags & FLAG_X_UNOBSERVABLE != 0);
        assert!(rows[1].delta_eta_t_x.is_some());
    }
}
