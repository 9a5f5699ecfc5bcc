use num_complex::Complex64 as C64;

use super::{Estimand, InterferometerConfig, OutputPort, Quadrature};
use crate::fock::{
    coherent_state, mode_expectation, recommended_cutoff, Beamsplitter, Mode, Operator,
    StateVector, TwoModeState, ORACLE_N_BAR_CEILING,
};
use crate::{Error, Result};

/// Homodyne statistics of the detected port, plus the slopes of both means
/// with respect to `ηt` and `φt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub d_mean_x_d_eta_t: f64,
    pub d_mean_y_d_eta_t: f64,
    pub d_mean_x_d_phi_t: f64,
    pub d_mean_y_d_phi_t: f64,
}

impl QuadratureMoments {
    pub fn mean(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.mean_x,
            Quadrature::Y => self.mean_y,
        }
    }

    pub fn variance(&self, q: Quadrature) -> f64 {
        match q {
            Quadrature::X => self.var_x,
            Quadrature::Y => self.var_y,
        }
    }

    pub fn slope(&self, q: Quadrature, estimand: Estimand) -> f64 {
        match (q, estimand) {
            (Quadrature::X, Estimand::KerrPhase) => self.d_mean_x_d_eta_t,
            (Quadrature::Y, Estimand::KerrPhase) => self.d_mean_y_d_eta_t,
            (Quadrature::X, Estimand::LinearPhase) => self.d_mean_x_d_phi_t,
            (Quadrature::Y, Estimand::LinearPhase) => self.d_mean_y_d_phi_t,
        }
    }
}

/// Moments of the Kerr arm after the nonlinear phase, before recombination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrArmMoments {
    /// `⟨â⟩ = β e^{−iφt} exp(|β|²(e^{−2iηt} − 1))`.
    pub mean: C64,
    /// `⟨â²⟩ − ⟨â⟩²`.
    pub central_square: C64,
    /// `⟨â†â⟩ − |⟨â⟩|²`.
    pub excess_photons: f64,
    /// `d⟨â⟩/d(ηt)`.
    pub d_mean_d_eta_t: C64,
    /// Coherent amplitude of the reference arm, `−iα sin θt`.
    pub reference: C64,
}

/// `e^z − 1` without cancellation for small `|z|`.
fn expm1_complex(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    C64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

pub fn kerr_arm_moments(cfg: &InterferometerConfig) -> KerrArmMoments {
    let (s, c) = cfg.theta_t.sin_cos();
    let beta = cfg.alpha * c;
    let m = beta.norm_sqr();
    let eta = cfg.eta_t;
    let sin_eta = eta.sin();
    // e^{−2iηt} − 1, written so that it stays accurate as ηt → 0
    let e1 = C64::new(-2.0 * sin_eta * sin_eta, -(2.0 * eta).sin());
    let damping = (m * e1).exp();
    let linear = C64::from_polar(1.0, -cfg.phi_t);
    let mean = beta * linear * damping;

    // ⟨â²⟩ − ⟨â⟩² = β² e^{−2iφt} (e^{z₁} − e^{z₂}) with
    // z₁ = −2iηt + |β|²(e^{−4iηt} − 1), z₂ = 2|β|²(e^{−2iηt} − 1); both have
    // non-positive real parts.
    let z1 = C64::new(
        -2.0 * m * (2.0 * eta).sin().powi(2),
        -2.0 * eta - m * (4.0 * eta).sin(),
    );
    let z2 = 2.0 * m * e1;
    let gap = z1 - z2;
    let difference = if gap.norm() < 1.0 {
        z2.exp() * expm1_complex(gap)
    } else {
        z1.exp() - z2.exp()
    };
    let central_square = beta * beta * linear * linear * difference;
    let excess_photons = -m * (-4.0 * m * sin_eta * sin_eta).exp_m1();
    let d_mean_d_eta_t = mean * C64::new(0.0, -2.0 * m) * C64::from_polar(1.0, -2.0 * eta);

    KerrArmMoments {
        mean,
        central_square,
        excess_photons,
        d_mean_d_eta_t,
        reference: cfg.alpha * C64::new(0.0, -s),
    }
}

/// Closed-form output-port quadrature moments, valid at any `n̄`.
pub fn analytic_moments(cfg: &InterferometerConfig) -> QuadratureMoments {
    let arm = kerr_arm_moments(cfg);
    let (p, q) = cfg.port_coefficients();
    let mean = p * arm.mean + q * arm.reference;
    // the reference arm is coherent, so only the Kerr arm adds noise
    let p2_central = p * p * arm.central_square;
    let excess = 2.0 * p.norm_sqr() * arm.excess_photons;
    let var_x = 0.25 * (1.0 + excess + 2.0 * p2_central.re);
    let var_y = 0.25 * (1.0 + excess - 2.0 * p2_central.re);
    let d_eta = p * arm.d_mean_d_eta_t;
    let d_phi = p * arm.mean * C64::new(0.0, -1.0);
    QuadratureMoments {
        mean_x: mean.re,
        mean_y: mean.im,
        var_x,
        var_y,
        d_mean_x_d_eta_t: d_eta.re,
        d_mean_y_d_eta_t: d_eta.im,
        d_mean_x_d_phi_t: d_phi.re,
        d_mean_y_d_phi_t: d_phi.im,
    }
}

fn check_oracle_ceiling(cfg: &InterferometerConfig) -> Result<()> {
    cfg.validate()?;
    let n_bar = cfg.n_bar();
    if n_bar > ORACLE_N_BAR_CEILING {
        return Err(Error::OracleCeiling {
            n_bar,
            ceiling: ORACLE_N_BAR_CEILING,
        });
    }
    Ok(())
}

/// Exact Fock-space pipeline with the couplers built once.
struct FockPipeline {
    coupler: Beamsplitter,
    after_first: TwoModeState,
    readout: Mode,
    x: Operator,
    y: Operator,
    x2: Operator,
    y2: Operator,
}

impl FockPipeline {
    fn new(cfg: &InterferometerConfig) -> Result<Self> {
        check_oracle_ceiling(cfg)?;
        let cutoff = recommended_cutoff(cfg.n_bar());
        let input = TwoModeState::product(
            &coherent_state(cfg.alpha, cutoff)?,
            &StateVector::vacuum(cutoff)?,
        )?;
        let coupler = Beamsplitter::new(cutoff, cfg.theta_t)?;
        let after_first = coupler.apply(&input)?;
        let x = Operator::quadrature_x(cutoff);
        let y = Operator::quadrature_y(cutoff);
        let x2 = x.compose(&x)?;
        let y2 = y.compose(&y)?;
        Ok(Self {
            coupler,
            after_first,
            readout: match cfg.port {
                OutputPort::A => Mode::A,
                OutputPort::B => Mode::B,
            },
            x,
            y,
            x2,
            y2,
        })
    }

    fn output(&self, phi_t: f64, eta_t: f64) -> Result<TwoModeState> {
        let kerr = crate::fock::apply_kerr(&self.after_first, Mode::A, phi_t, eta_t);
        self.coupler.apply(&kerr)
    }

    fn means(&self, phi_t: f64, eta_t: f64) -> Result<(f64, f64)> {
        let out = self.output(phi_t, eta_t)?;
        Ok((
            mode_expectation(&out, self.readout, &self.x)?.re,
            mode_expectation(&out, self.readout, &self.y)?.re,
        ))
    }
}

/// `Û_BS Û_η Û_BS |α, 0⟩` on the truncated two-mode space.
pub fn output_state_oracle(cfg: &InterferometerConfig) -> Result<TwoModeState> {
    FockPipeline::new(cfg)?.output(cfg.phi_t, cfg.eta_t)
}

/// Output quadrature moments from the exact Fock state. The slopes are
/// central finite differences (one Richardson step) of the oracle means.
pub fn oracle_moments(cfg: &InterferometerConfig) -> Result<QuadratureMoments> {
    let pipeline = FockPipeline::new(cfg)?;
    let out = pipeline.output(cfg.phi_t, cfg.eta_t)?;
    let mode = pipeline.readout;
    let mean_x = mode_expectation(&out, mode, &pipeline.x)?.re;
    let mean_y = mode_expectation(&out, mode, &pipeline.y)?.re;
    let var_x = mode_expectation(&out, mode, &pipeline.x2)?.re - mean_x * mean_x;
    let var_y = mode_expectation(&out, mode, &pipeline.y2)?.re - mean_y * mean_y;

    let h = 1e-3 / (1.0 + cfg.kerr_arm_photons());
    let slope = |f: &dyn Fn(f64) -> Result<(f64, f64)>| -> Result<(f64, f64)> {
        let plus = f(h)?;
        let minus = f(-h)?;
        let plus_half = f(0.5 * h)?;
        let minus_half = f(-0.5 * h)?;
        let d = |p: f64, m: f64, ph: f64, mh: f64| {
            let coarse = (p - m) / (2.0 * h);
            let fine = (ph - mh) / h;
            (4.0 * fine - coarse) / 3.0
        };
        Ok((
            d(plus.0, minus.0, plus_half.0, minus_half.0),
            d(plus.1, minus.1, plus_half.1, minus_half.1),
        ))
    };
    let d_eta = slope(&|dh| pipeline.means(cfg.phi_t, cfg.eta_t + dh))?;
    let d_phi = slope(&|dh| pipeline.means(cfg.phi_t + dh, cfg.eta_t))?;
    Ok(QuadratureMoments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        d_mean_x_d_eta_t: d_eta.0,
        d_mean_y_d_eta_t: d_eta.1,
        d_mean_x_d_phi_t: d_phi.0,
        d_mean_y_d_phi_t: d_phi.1,
    })
}
