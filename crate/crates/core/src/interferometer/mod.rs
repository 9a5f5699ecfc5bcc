//! The coupler → Kerr arm → coupler → homodyne measurement pipeline.
//!
//! A coherent tone `|α, 0⟩` enters the first coupler `exp(−iθt(â†b̂ + âb̂†))`.
//! Mode `a` (the Kerr arm) then picks up `exp(−i(φt n̂ + ηt n̂(n̂ − 1)))`, the
//! two arms recombine on an identical coupler and one output port is read out
//! by homodyne detection of `X̂ = (â + â†)/2` or `Ŷ = −i(â − â†)/2`.
//!
//! In the Heisenberg picture the output annihilators are
//!
//! ```text
//! port A:  c â − i s b̂        port B:  c b̂ − i s â        (c, s) = (cos θt, sin θt)
//! ```
//!
//! so the output quadrature moments only need `⟨â⟩, ⟨â²⟩, ⟨â†â⟩` of the
//! Kerr-evolved coherent amplitude `β = α c` plus the coherent reference arm
//! `γ = −iα s`. Port A is dark at zero phase for a balanced coupler.

mod moments;
mod precision;
mod scaling;

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub use moments::{
    analytic_moments, kerr_arm_moments, oracle_moments, output_state_oracle, KerrArmMoments,
    QuadratureMoments,
};
pub use precision::{
    optimal_phi_t, precision_closed_form, precision_closed_form_for, precision_numeric,
    precision_numeric_for, with_optimal_phase, ClosedForm, Method, MomentSource, Phi2Reading,
    PrecisionResult, PrintedNBar, PrintedReading, QuadraturePrecision, PHASE_SCAN_POINTS,
    UNOBSERVABLE_SLOPE,
};
pub use scaling::{scaling_exponent, ScalingFit, MIN_GRID_DECADES};

/// Above this photon number the superconducting waveguides themselves turn
/// nonlinear; configurations beyond it are rejected.
pub const MAX_N_BAR: f64 = 1.0e7;

/// Which output port of the second coupler is detected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OutputPort {
    /// `c â − i s b̂`; dark at zero phase.
    #[default]
    A,
    /// `c b̂ − i s â`; bright at zero phase.
    B,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Quadrature {
    #[default]
    X,
    Y,
}

/// The parameter a precision refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Estimand {
    /// The accumulated Kerr phase `ηt`.
    #[default]
    KerrPhase,
    /// The accumulated linear phase `φt` of the Kerr arm.
    LinearPhase,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerConfig {
    /// Input coherent amplitude; `n̄ = |α|²`.
    pub alpha: C64,
    /// Coupler angle, π/4 for a 50/50 hybrid.
    pub theta_t: f64,
    pub phi_t: f64,
    pub eta_t: f64,
    pub port: OutputPort,
    pub quadrature: Quadrature,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl InterferometerConfig {
    /// Real input amplitude `√n̄`, balanced couplers, zero phases, port A, X.
    pub fn new(n_bar: f64) -> Self {
        Self {
            alpha: C64::new(n_bar.max(0.0).sqrt(), 0.0),
            theta_t: FRAC_PI_4,
            phi_t: 0.0,
            eta_t: 0.0,
            port: OutputPort::A,
            quadrature: Quadrature::X,
        }
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Rescale `|α|` to `√n̄`, keeping its phase.
    pub fn with_n_bar(mut self, n_bar: f64) -> Self {
        self.alpha = C64::from_polar(n_bar.max(0.0).sqrt(), self.alpha.arg());
        self
    }

    pub fn with_theta_t(mut self, theta_t: f64) -> Self {
        self.theta_t = theta_t;
        self
    }

    pub fn with_phi_t(mut self, phi_t: f64) -> Self {
        self.phi_t = phi_t;
        self
    }

    pub fn with_eta_t(mut self, eta_t: f64) -> Self {
        self.eta_t = eta_t;
        self
    }

    pub fn with_port(mut self, port: OutputPort) -> Self {
        self.port = port;
        self
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn n_bar(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Mean photon number entering the Kerr arm, `|α cos θt|²`.
    pub fn kerr_arm_photons(&self) -> f64 {
        (self.alpha * self.theta_t.cos()).norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.alpha.re.is_finite()
            && self.alpha.im.is_finite()
            && self.theta_t.is_finite()
            && self.phi_t.is_finite()
            && self.eta_t.is_finite();
        if !finite {
            return Err(Error::InvalidArgument(format!(
                "non-finite configuration: {self:?}"
            )));
        }
        if self.n_bar() > MAX_N_BAR * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "n̄ = {:.3e} exceeds the waveguide limit {MAX_N_BAR:.0e}",
                self.n_bar()
            )));
        }
        Ok(())
    }

    /// Output-port annihilator as `p â + q b̂`.
    pub(crate) fn port_coefficients(&self) -> (C64, C64) {
        let (s, c) = self.theta_t.sin_cos();
        match self.port {
            OutputPort::A => (C64::new(c, 0.0), C64::new(0.0, -s)),
            OutputPort::B => (C64::new(0.0, -s), C64::new(c, 0.0)),
        }
    }
}

/// Convert a precision on `ηt` into one on `η` for a fixed interaction time.
pub fn delta_eta_from_delta_eta_t(delta_eta_t: f64, t: f64) -> f64 {
    delta_eta_t / t
}
