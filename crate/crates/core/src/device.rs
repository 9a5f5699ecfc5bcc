//! Plate separation → coupling capacitance → N-system detunings → Kerr
//! coefficient η, and the displacement precision `δ(rt) = δ(ηt) / |dη/dr|`.

use std::f64::consts::PI;

use crate::constants::{ELEMENTARY_CHARGE, EPSILON_0, HBAR, TWO_PI_GHZ, TWO_PI_MHZ};
use crate::diff::{backward_richardson, central_richardson, forward_richardson};
use crate::interferometer::{
    optimal_phi_t, precision_closed_form_for, ClosedForm, Estimand, InterferometerConfig,
    OutputPort, Quadrature,
};
use crate::{Error, Result};

/// Above this ratio `g/Ω_c` the perturbative Kerr formula is flagged.
pub const WEAK_COUPLING_LIMIT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum CapacitanceModel {
    #[default]
    ParallelPlate,
    /// Parallel plate times the first-order edge correction
    /// `1 + (d/πw)(1 + ln(2πw/d))`.
    ParallelPlateWithFringe,
    /// Gap-independent capacitance (farads).
    Constant(f64),
}

/// Two identical rectangular plates facing each other across `gap = r0 + r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateGeometry {
    pub width: f64,
    pub length: f64,
    pub thickness: f64,
    /// Gap at `r = 0`.
    pub r0: f64,
    pub model: CapacitanceModel,
}

impl Default for PlateGeometry {
    fn default() -> Self {
        Self {
            width: 200e-6,
            length: 70e-6,
            thickness: 0.16e-6,
            r0: 1.01e-6,
            model: CapacitanceModel::ParallelPlate,
        }
    }
}

impl PlateGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("width", self.width),
            ("length", self.length),
            ("thickness", self.thickness),
            ("r0", self.r0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("plate {name} = {v} m")));
            }
        }
        if let CapacitanceModel::Constant(c) = self.model {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "constant capacitance {c} F"
                )));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.length
    }

    /// Plate gap at displacement `r`.
    pub fn gap(&self, r: f64) -> Result<f64> {
        let gap = self.r0 + r;
        if !(gap > 0.0) {
            return Err(Error::NonPositiveGap(gap));
        }
        Ok(gap)
    }
}

/// Coupling capacitance in farads.
pub fn coupling_capacitance(geom: &PlateGeometry, gap: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(Error::NonPositiveGap(gap));
    }
    let plate = EPSILON_0 * geom.area() / gap;
    Ok(match geom.model {
        CapacitanceModel::ParallelPlate => plate,
        CapacitanceModel::ParallelPlateWithFringe => {
            let w = geom.width;
            plate * (1.0 + gap / (PI * w) * (1.0 + (2.0 * PI * w / gap).ln()))
        }
        CapacitanceModel::Constant(c) => c,
    })
}

/// Circuit and N-system parameters. All frequencies are angular (rad/s).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceParams {
    /// Josephson energy of each junction, `E_J/ħ`.
    pub e_j: f64,
    /// Self capacitance of each transmon (F).
    pub c_self: f64,
    pub g1: f64,
    pub g2: f64,
    pub omega_c: f64,
    /// Baseline `Δ`.
    pub big_delta0: f64,
    /// Baseline `δ`.
    pub delta0: f64,
    pub gamma_21: f64,
    pub gamma_23: f64,
    pub gamma_43: f64,
    /// Cavity decay; only enters `η/κ`.
    pub kappa: f64,
    /// Probe drive. Carried along but unused by the Kerr formula.
    pub e_p: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            e_j: 15.0 * TWO_PI_GHZ,
            c_self: 100e-15,
            g1: 100.0 * TWO_PI_MHZ,
            g2: 100.0 * TWO_PI_MHZ,
            omega_c: 1500.0 * TWO_PI_MHZ,
            big_delta0: -60.0 * TWO_PI_MHZ,
            delta0: -60.0 * TWO_PI_MHZ,
            gamma_21: 0.1 * TWO_PI_MHZ,
            gamma_23: 0.1 * TWO_PI_MHZ,
            gamma_43: 0.1 * TWO_PI_MHZ,
            kappa: 2.0 * PI * 50.0,
            e_p: 5.0 * TWO_PI_MHZ,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("E_J", self.e_j),
            ("C_self", self.c_self),
            ("g1", self.g1),
            ("g2", self.g2),
            ("Omega_c", self.omega_c),
            ("Delta0", self.big_delta0),
            ("delta0", self.delta0),
            ("gamma_21", self.gamma_21),
            ("gamma_23", self.gamma_23),
            ("gamma_43", self.gamma_43),
            ("kappa", self.kappa),
            ("E_p", self.e_p),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} = {v}")));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kappa = {} must be positive",
                self.kappa
            )));
        }
        if self.omega_c == 0.0 {
            return Err(Error::InvalidArgument("Omega_c must be nonzero".into()));
        }
        if !(self.c_self > 0.0) || !(self.e_j > 0.0) {
            return Err(Error::InvalidArgument(
                "E_J and C_self must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `E_C/ħ = e² / (2 C_self ħ)`.
    pub fn charging_energy(&self) -> f64 {
        ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * self.c_self * HBAR)
    }

    /// Transmon frequency `√(8 E_J E_C) − E_C`.
    pub fn qubit_frequency(&self) -> f64 {
        let e_c = self.charging_energy();
        (8.0 * self.e_j * e_c).sqrt() - e_c
    }

    /// Capacitive qubit–qubit coupling `J = C_c/(C_c + C_self) · ω_q/2`.
    pub fn coupling_j(&self, c_c: f64) -> f64 {
        c_c / (c_c + self.c_self) * self.qubit_frequency() / 2.0
    }

    /// Largest of `g1/Ω_c`, `g2/Ω_c`.
    pub fn weak_coupling_ratio(&self) -> f64 {
        self.g1.abs().max(self.g2.abs()) / self.omega_c.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detunings {
    /// `δ` (rad/s).
    pub delta: f64,
    /// `Δ` (rad/s).
    pub big_delta: f64,
}

/// Maps a coupling capacitance to the N-system detunings.
pub trait DetuningModel {
    fn detunings(&self, c_c: f64, geom: &PlateGeometry, dev: &DeviceParams) -> Detunings;
}

/// Opposite linear shifts by the change of the dressed coupling relative to
/// its value at `r = 0`: `δ = δ₀ − (J − J₀)`, `Δ = Δ₀ + (J − J₀)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CapacitiveSplitting;

impl DetuningModel for CapacitiveSplitting {
    fn detunings(&self, c_c: f64, geom: &PlateGeometry, dev: &DeviceParams) -> Detunings {
        let c_base = coupling_capacitance(geom, geom.r0).unwrap_or(0.0);
        detunings_from_capacitance(c_c, c_base, dev)
    }
}

/// The [`CapacitiveSplitting`] map with an explicit baseline capacitance.
pub fn detunings_from_capacitance(c_c: f64, c_baseline: f64, dev: &DeviceParams) -> Detunings {
    if c_c == c_baseline {
        return Detunings {
            delta: dev.delta0,
            big_delta: dev.big_delta0,
        };
    }
    let shift = dev.coupling_j(c_c) - dev.coupling_j(c_baseline);
    Detunings {
        delta: dev.delta0 - shift,
        big_delta: dev.big_delta0 + shift,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrCoefficient {
    /// η (rad/s).
    pub eta: f64,
    pub eta_over_kappa: f64,
    /// `max(g)/Ω_c` when it exceeds [`WEAK_COUPLING_LIMIT`].
    pub weak_coupling_warning: Option<f64>,
}

/// `η = (g₁/Ω_c)² (g₂²Δ/(γ₄₃² + Δ²) − g₁²δ/((γ₂₁ + γ₂₃)² + δ²))`.
pub fn kerr_eta(det: Detunings, dev: &DeviceParams) -> KerrCoefficient {
    let Detunings { delta, big_delta } = det;
    let prefactor = (dev.g1 / dev.omega_c).powi(2);
    let upper = dev.g2 * dev.g2 * big_delta / (dev.gamma_43.powi(2) + big_delta * big_delta);
    let gamma_lower = dev.gamma_21 + dev.gamma_23;
    let lower = dev.g1 * dev.g1 * delta / (gamma_lower * gamma_lower + delta * delta);
    let eta = prefactor * (upper - lower);
    let ratio = dev.weak_coupling_ratio();
    KerrCoefficient {
        eta,
        eta_over_kappa: eta / dev.kappa,
        weak_coupling_warning: (ratio > WEAK_COUPLING_LIMIT).then_some(ratio),
    }
}

/// How long the tone interacts with the Kerr arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exposure {
    /// Choose `t` so that `n̄ |η| t` equals the given value.
    SmallTime { n_eta_t: f64 },
    /// Fixed interaction time in seconds.
    Fixed(f64),
}

impl Default for Exposure {
    fn default() -> Self {
        Exposure::SmallTime { n_eta_t: 1e-3 }
    }
}

impl Exposure {
    pub fn time(&self, n_bar: f64, eta: f64) -> Result<f64> {
        let t = match *self {
            Exposure::SmallTime { n_eta_t } => n_eta_t / (n_bar * eta.abs()),
            Exposure::Fixed(t) => t,
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "interaction time {t} s (n̄ = {n_bar}, η = {eta} rad/s)"
            )));
        }
        Ok(t)
    }
}

/// Linear-phase choice for each quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PhaseChoice {
    #[default]
    Optimal,
    Fixed(f64),
}

/// The interferometer settings used when chaining to δ(rt).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Readout {
    pub n_bar: f64,
    pub exposure: Exposure,
    pub phase: PhaseChoice,
    pub theta_t: f64,
    pub port: OutputPort,
}

impl Readout {
    pub fn new(n_bar: f64) -> Self {
        Self {
            n_bar,
            exposure: Exposure::default(),
            phase: PhaseChoice::Optimal,
            theta_t: std::f64::consts::FRAC_PI_4,
            port: OutputPort::A,
        }
    }

    pub fn with_exposure(mut self, exposure: Exposure) -> Self {
        self.exposure = exposure;
        self
    }

    pub fn with_phase(mut self, phase: PhaseChoice) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_port(mut self, port: OutputPort) -> Self {
        self.port = port;
        self
    }

    /// Interferometer configuration for Kerr phase `eta_t`, with the linear
    /// phase resolved for quadrature `q`.
    pub fn config(&self, eta_t: f64, q: Quadrature) -> InterferometerConfig {
        let cfg = InterferometerConfig::new(self.n_bar)
            .with_theta_t(self.theta_t)
            .with_port(self.port)
            .with_quadrature(q)
            .with_eta_t(eta_t);
        match self.phase {
            PhaseChoice::Fixed(phi) => cfg.with_phi_t(phi),
            PhaseChoice::Optimal => cfg.with_phi_t(optimal_phi_t(&cfg, q, Estimand::KerrPhase)),
        }
    }
}

/// A device: plate geometry, circuit parameters and a detuning model.
#[derive(Clone, Debug, Default)]
pub struct Device<M: DetuningModel = CapacitiveSplitting> {
    pub geometry: PlateGeometry,
    pub params: DeviceParams,
    pub model: M,
}

impl Device<CapacitiveSplitting> {
    pub fn new(geometry: PlateGeometry, params: DeviceParams) -> Self {
        Self {
            geometry,
            params,
            model: CapacitiveSplitting,
        }
    }
}

impl<M: DetuningModel> Device<M> {
    pub fn with_model<N: DetuningModel>(self, model: N) -> Device<N> {
        Device {
            geometry: self.geometry,
            params: self.params,
            model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.params.validate()
    }

    pub fn detunings(&self, r: f64) -> Result<Detunings> {
        let c_c = coupling_capacitance(&self.geometry, self.geometry.gap(r)?)?;
        Ok(self.model.detunings(c_c, &self.geometry, &self.params))
    }

    pub fn kerr(&self, r: f64) -> Result<KerrCoefficient> {
        Ok(kerr_eta(self.detunings(r)?, &self.params))
    }

    pub fn eta(&self, r: f64) -> Result<f64> {
        Ok(self.kerr(r)?.eta)
    }

    /// Step used for `dη/dr` at displacement `r`.
    pub fn derivative_step(&self, r: f64) -> Result<f64> {
        Ok(1e-9f64.max(1e-4 * self.geometry.gap(r)?))
    }

    /// `dη/dr` (rad/s per metre), central with one Richardson step. Falls
    /// back to a forward stencil when the gap is too small for a central one.
    pub fn d_eta_dr(&self, r: f64) -> Result<f64> {
        let h = self.derivative_step(r)?;
        if self.geometry.gap(r - h).is_ok() {
            self.d_eta_dr_with(r, h, Stencil::Central)
        } else {
            self.d_eta_dr_with(r, h, Stencil::Forward)
        }
    }

    fn d_eta_dr_with(&self, r: f64, h: f64, stencil: Stencil) -> Result<f64> {
        // probe the outermost stencil points once so gap errors surface
        match stencil {
            Stencil::Central => {
                self.geometry.gap(r - h)?;
            }
            Stencil::Forward => {}
            Stencil::Backward => {
                self.geometry.gap(r - 2.0 * h)?;
            }
        }
        let eta = |x: f64| self.eta(x).unwrap_or(f64::NAN);
        let d = match stencil {
            Stencil::Central => central_richardson(eta, r, h),
            Stencil::Forward => forward_richardson(eta, r, h),
            Stencil::Backward => backward_richardson(eta, r, h),
        };
        if d.is_nan() {
            return Err(Error::NonPositiveGap(self.geometry.r0 + r - 2.0 * h));
        }
        Ok(d)
    }

    /// η, η/κ and dη/dr over `r_grid`. Interior points use central
    /// differences; the two end points use one-sided stencils that stay inside
    /// the grid range.
    pub fn eta_curve(&self, r_grid: &[f64]) -> Result<EtaCurve> {
        check_grid(r_grid)?;
        let mut curve = EtaCurve::with_capacity(r_grid.len());
        let last = r_grid.len() - 1;
        for (i, &r) in r_grid.iter().enumerate() {
            let k = self.kerr(r)?;
            let h = self.derivative_step(r)?;
            let stencil = if last == 0 {
                Stencil::Central
            } else if i == 0 {
                Stencil::Forward
            } else if i == last {
                Stencil::Backward
            } else {
                Stencil::Central
            };
            let d = if last == 0 {
                self.d_eta_dr(r)?
            } else {
                self.d_eta_dr_with(r, h, stencil)?
            };
            curve.r_grid.push(r);
            curve.eta.push(k.eta);
            curve.eta_over_kappa.push(k.eta_over_kappa);
            curve.d_eta_dr.push(d);
        }
        Ok(curve)
    }

    /// Displacement precision at `r` using the locally evaluated `dη/dr`.
    pub fn displacement_precision(
        &self,
        r: f64,
        readout: &Readout,
    ) -> Result<DisplacementPrecision> {
        let d_eta_dr = self.d_eta_dr(r)?;
        self.displacement_precision_with_slope(r, d_eta_dr, readout)
    }

    /// As [`Self::displacement_precision`] with a supplied `dη/dr`.
    pub fn displacement_precision_with_slope(
        &self,
        r: f64,
        d_eta_dr: f64,
        readout: &Readout,
    ) -> Result<DisplacementPrecision> {
        if !(d_eta_dr.abs() > 0.0) {
            return Err(Error::UnobservableDisplacement { r, d_eta_dr });
        }
        let kerr = self.kerr(r)?;
        let t = readout.exposure.time(readout.n_bar, kerr.eta)?;
        let eta_t = kerr.eta * t;
        let quad = |q: Quadrature| -> Result<QuadratureDisplacement> {
            let cfg = readout.config(eta_t, q);
            cfg.validate()?;
            let delta_eta_t =
                precision_closed_form_for(&cfg, Estimand::KerrPhase, ClosedForm::Rederived)
                    .delta(q)
                    .ok();
            Ok(QuadratureDisplacement {
                phi_t: cfg.phi_t,
                delta_eta_t,
                delta_rt: delta_eta_t.map(|d| delta_rt_from(d, d_eta_dr)),
            })
        };
        Ok(DisplacementPrecision {
            r,
            gap: self.geometry.gap(r)?,
            eta: kerr.eta,
            eta_over_kappa: kerr.eta_over_kappa,
            d_eta_dr,
            t,
            eta_t,
            x: quad(Quadrature::X)?,
            y: quad(Quadrature::Y)?,
        })
    }
}

/// `ΔQ / |d⟨Q⟩/d(rt)|` with the slope taken by finite differences of the
/// composed map `r → η(r) t → ⟨Q⟩` at the time and phases chosen by `chained`.
pub fn displacement_precision_direct<M: DetuningModel>(
    device: &Device<M>,
    chained: &DisplacementPrecision,
    readout: &Readout,
) -> Result<(Option<f64>, Option<f64>)> {
    let r = chained.r;
    let h = device.derivative_step(r)?;
    let central = device.geometry.gap(r - h).is_ok();
    let per_quadrature = |q: Quadrature| -> Option<f64> {
        let cfg = readout
            .config(chained.eta_t, q)
            .with_phi_t(chained.quadrature(q).phi_t);
        let mean = |x: f64| match device.eta(x) {
            Ok(eta) => {
                crate::interferometer::analytic_moments(&cfg.with_eta_t(eta * chained.t)).mean(q)
            }
            Err(_) => f64::NAN,
        };
        let d_mean_dr = if central {
            central_richardson(mean, r, h)
        } else {
            forward_richardson(mean, r, h)
        };
        let slope = d_mean_dr / chained.t;
        let sigma = crate::interferometer::analytic_moments(&cfg)
            .variance(q)
            .sqrt();
        (slope.abs() > 0.0 && slope.is_finite()).then(|| sigma / slope.abs())
    };
    Ok((per_quadrature(Quadrature::X), per_quadrature(Quadrature::Y)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty r grid".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "r grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `δ(rt) = δ(ηt) / |dη/dr|`.
pub fn delta_rt_from(delta_eta_t: f64, d_eta_dr: f64) -> f64 {
    delta_eta_t / d_eta_dr.abs()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EtaCurve {
    pub r_grid: Vec<f64>,
    pub eta: Vec<f64>,
    pub eta_over_kappa: Vec<f64>,
    pub d_eta_dr: Vec<f64>,
}

impl EtaCurve {
    fn with_capacity(n: usize) -> Self {
        Self {
            r_grid: Vec::with_capacity(n),
            eta: Vec::with_capacity(n),
            eta_over_kappa: Vec::with_capacity(n),
            d_eta_dr: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureDisplacement {
    pub phi_t: f64,
    /// `None` when the quadrature carries no signal.
    pub delta_eta_t: Option<f64>,
    /// m·s (reported as m/Hz).
    pub delta_rt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplacementPrecision {
    pub r: f64,
    pub gap: f64,
    pub eta: f64,
    pub eta_over_kappa: f64,
    pub d_eta_dr: f64,
    /// Interaction time (s).
    pub t: f64,
    pub eta_t: f64,
    pub x: QuadratureDisplacement,
    pub y: QuadratureDisplacement,
}

impl DisplacementPrecision {
    pub fn quadrature(&self, q: Quadrature) -> &QuadratureDisplacement {
        match q {
            Quadrature::X => &self.x,
            Quadrature::Y => &self.y,
        }
    }

    /// Displacement precision `δr = δ(rt)/t` at the fixed interaction time.
    pub fn delta_r(&self, q: Quadrature) -> Option<f64> {
        self.quadrature(q).delta_rt.map(|d| d / self.t)
    }

    /// Better of the two quadratures.
    pub fn best_delta_rt(&self) -> Option<f64> {
        match (self.x.delta_rt, self.y.delta_rt) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Evenly spaced displacement grid from −0.9 μm to +1.0 μm.
pub fn default_r_grid(points: usize) -> Vec<f64> {
    linear_grid(-0.9e-6, 1.0e-6, points)
}

pub(crate) fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Number of points in [`default_r_grid`] as used by the sweeps.
pub const DEFAULT_R_POINTS: usize = 191;
