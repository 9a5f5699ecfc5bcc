//! Phase precision `δθ = ΔQ / |d⟨Q⟩/dθ|` from homodyne statistics.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64 as C64;

use super::moments::{analytic_moments, oracle_moments, QuadratureMoments};
use super::{Estimand, InterferometerConfig, Quadrature};
use crate::diff::central_richardson;
use crate::{Error, Result};

/// Absolute floor below which a slope is treated as zero.
pub const UNOBSERVABLE_SLOPE: f64 = 1e-30;

/// Slopes smaller than this fraction of their envelope are treated as zero.
const RELATIVE_SLOPE_FLOOR: f64 = 1e-12;

/// Grid size of the coarse phase scan before golden-section refinement.
pub const PHASE_SCAN_POINTS: usize = 720;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Oracle,
    Analytic,
    ClosedFormPrinted,
    ClosedFormRederived,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MomentSource {
    #[default]
    Analytic,
    Oracle,
}

/// How the photon number in the printed closed forms is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrintedNBar {
    /// `n̄ = |α|²`, the input photon number.
    Input,
    /// `n̄ = |α cos θt|²`, the photon number entering the Kerr arm.
    KerrArm,
}

/// How the `δ` inside the printed `φ₂ = 2(δ + η)t + n̄ sin(4ηt)` is read.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phi2Reading {
    /// `δ` is a misprint for the linear phase `φ`.
    DeltaAsPhi,
    /// `δt` takes the given value (radians).
    DeltaValue(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintedReading {
    pub n_bar: PrintedNBar,
    pub phi2: Phi2Reading,
}

impl PrintedReading {
    /// Symbols taken at face value: `n̄ = |α|²` and the stray `δ` set to zero.
    pub const LITERAL: Self = Self {
        n_bar: PrintedNBar::Input,
        phi2: Phi2Reading::DeltaValue(0.0),
    };

    /// The reading under which the printed forms coincide with the rederived
    /// ones for port A of a balanced interferometer with real `α`.
    pub const CONSISTENT: Self = Self {
        n_bar: PrintedNBar::KerrArm,
        phi2: Phi2Reading::DeltaAsPhi,
    };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// Printed quadrature-precision formulas, evaluated as read.
    Printed(PrintedReading),
    /// Re-derived from the Kerr-arm moments for any coupler angle, port and
    /// complex `α`.
    Rederived,
}

/// Noise and slope of one quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraturePrecision {
    /// `ΔQ = √Var(Q)`.
    pub sigma: f64,
    /// `d⟨Q⟩/dθ` (only the magnitude is meaningful for the printed forms).
    pub slope: f64,
    /// Slopes with `|slope| ≤ floor` are unobservable.
    pub floor: f64,
}

impl QuadraturePrecision {
    pub fn delta(&self) -> Result<f64> {
        if !(self.slope.abs() > self.floor.max(UNOBSERVABLE_SLOPE)) {
            return Err(Error::UnobservablePhase { slope: self.slope });
        }
        Ok(self.sigma / self.slope.abs())
    }

    pub fn is_observable(&self) -> bool {
        self.delta().is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionResult {
    pub x: QuadraturePrecision,
    pub y: QuadraturePrecision,
    pub estimand: Estimand,
    pub method: Method,
}

impl PrecisionResult {
    pub fn quadrature(&self, q: Quadrature) -> &QuadraturePrecision {
        match q {
            Quadrature::X => &self.x,
            Quadrature::Y => &self.y,
        }
    }

    /// `δ` for one quadrature, or the unobservable-phase error.
    pub fn delta(&self, q: Quadrature) -> Result<f64> {
        self.quadrature(q).delta()
    }

    pub fn delta_x(&self) -> Option<f64> {
        self.x.delta().ok()
    }

    pub fn delta_y(&self) -> Option<f64> {
        self.y.delta().ok()
    }
}

fn moments_for(cfg: &InterferometerConfig, source: MomentSource) -> Result<QuadratureMoments> {
    match source {
        MomentSource::Analytic => Ok(analytic_moments(cfg)),
        MomentSource::Oracle => oracle_moments(cfg),
    }
}

/// Nonlinear-phase precision with the slope taken by central finite
/// differences (step `h`, one Richardson step) of the chosen moments.
pub fn precision_numeric(
    cfg: &InterferometerConfig,
    h: f64,
    source: MomentSource,
) -> Result<PrecisionResult> {
    precision_numeric_for(cfg, Estimand::KerrPhase, h, source)
}

pub fn precision_numeric_for(
    cfg: &InterferometerConfig,
    estimand: Estimand,
    h: f64,
    source: MomentSource,
) -> Result<PrecisionResult> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step h = {h}"
        )));
    }
    cfg.validate()?;
    let at = moments_for(cfg, source)?;
    let shifted = |d: f64| -> InterferometerConfig {
        match estimand {
            Estimand::KerrPhase => cfg.with_eta_t(cfg.eta_t + d),
            Estimand::LinearPhase => cfg.with_phi_t(cfg.phi_t + d),
        }
    };
    // Analytic means are cheap, so sample them through the closure; the oracle
    // is evaluated once per stencil point.
    let (slope_x, slope_y) = match source {
        MomentSource::Analytic => (
            central_richardson(|d| analytic_moments(&shifted(d)).mean_x, 0.0, h),
            central_richardson(|d| analytic_moments(&shifted(d)).mean_y, 0.0, h),
        ),
        MomentSource::Oracle => {
            let mut samples = Vec::with_capacity(4);
            for d in [h, -h, 0.5 * h, -0.5 * h] {
                let m = oracle_moments(&shifted(d))?;
                samples.push((m.mean_x, m.mean_y));
            }
            let rich = |f: fn(&(f64, f64)) -> f64| {
                let coarse = (f(&samples[0]) - f(&samples[1])) / (2.0 * h);
                let fine = (f(&samples[2]) - f(&samples[3])) / h;
                (4.0 * fine - coarse) / 3.0
            };
            (rich(|s| s.0), rich(|s| s.1))
        }
    };
    // rounding noise of the stencil
    let scale = cfg.alpha.norm() + at.mean_x.abs() + at.mean_y.abs();
    let floor = 64.0 * f64::EPSILON * scale / h;
    Ok(PrecisionResult {
        x: QuadraturePrecision {
            sigma: at.var_x.max(0.0).sqrt(),
            slope: slope_x,
            floor,
        },
        y: QuadraturePrecision {
            sigma: at.var_y.max(0.0).sqrt(),
            slope: slope_y,
            floor,
        },
        estimand,
        method: match source {
            MomentSource::Analytic => Method::Analytic,
            MomentSource::Oracle => Method::Oracle,
        },
    })
}

/// Nonlinear-phase precision from a closed-form expression.
pub fn precision_closed_form(cfg: &InterferometerConfig, variant: ClosedForm) -> PrecisionResult {
    precision_closed_form_for(cfg, Estimand::KerrPhase, variant)
}

pub fn precision_closed_form_for(
    cfg: &InterferometerConfig,
    estimand: Estimand,
    variant: ClosedForm,
) -> PrecisionResult {
    match variant {
        ClosedForm::Rederived => rederived(cfg, estimand),
        ClosedForm::Printed(reading) => printed(cfg, estimand, reading),
    }
}

/// With `w = p β = |w| e^{iχ}` (p the Kerr-arm weight of the detected port),
/// `m = |β|²`, `D = e^{−2m sin²ηt}`, `F = e^{−2m sin²2ηt}`,
/// `φ₁ = φt + m sin 2ηt` and `φ₂ = 2φt + 2ηt + m sin 4ηt`:
///
/// ```text
/// 4 Var X = 1 + 2|p|² m [1 − 2D² cos²(φ₁ − χ) + F cos(φ₂ − 2χ)]
/// 4 Var Y = 1 + 2|p|² m [1 − 2D² sin²(φ₁ − χ) − F cos(φ₂ − 2χ)]
/// d⟨X⟩/dηt = 2mD|w| sin(χ − φ₁ − 2ηt),   d⟨Y⟩/dηt = −2mD|w| cos(χ − φ₁ − 2ηt)
/// d⟨X⟩/dφt =  D|w| sin(χ − φ₁),          d⟨Y⟩/dφt =  −D|w| cos(χ − φ₁)
/// ```
fn rederived(cfg: &InterferometerConfig, estimand: Estimand) -> PrecisionResult {
    let (p, _) = cfg.port_coefficients();
    let beta = cfg.alpha * cfg.theta_t.cos();
    let m = beta.norm_sqr();
    let w: C64 = p * beta;
    let (w_abs, chi) = (w.norm(), if w.norm() > 0.0 { w.arg() } else { 0.0 });
    let eta = cfg.eta_t;
    let d = (-2.0 * m * eta.sin().powi(2)).exp();
    let f = (-2.0 * m * (2.0 * eta).sin().powi(2)).exp();
    let phi1 = cfg.phi_t + m * (2.0 * eta).sin();
    let phi2 = 2.0 * cfg.phi_t + 2.0 * eta + m * (4.0 * eta).sin();
    let weight = 2.0 * p.norm_sqr() * m;
    let cross = f * (phi2 - 2.0 * chi).cos();
    let var_x = 0.25 * (1.0 + weight * (1.0 - 2.0 * d * d * (phi1 - chi).cos().powi(2) + cross));
    let var_y = 0.25 * (1.0 + weight * (1.0 - 2.0 * d * d * (phi1 - chi).sin().powi(2) - cross));
    let (envelope, angle) = match estimand {
        Estimand::KerrPhase => (2.0 * m * d * w_abs, chi - phi1 - 2.0 * eta),
        Estimand::LinearPhase => (d * w_abs, chi - phi1),
    };
    let floor = RELATIVE_SLOPE_FLOOR * envelope;
    PrecisionResult {
        x: QuadraturePrecision {
            sigma: var_x.max(0.0).sqrt(),
            slope: envelope * angle.sin(),
            floor,
        },
        y: QuadraturePrecision {
            sigma: var_y.max(0.0).sqrt(),
            slope: -envelope * angle.cos(),
            floor,
        },
        estimand,
        method: Method::ClosedFormRederived,
    }
}

/// The printed balanced-interferometer forms:
///
/// ```text
/// δ(ηt)_X = e^{2n̄ sin²ηt} √(1 + n̄ − 2A cos²φ₁ + B) / (2√2 n̄^{3/2} |sin(φ₁ + 2ηt)|)
/// δ(ηt)_Y = e^{2n̄ sin²ηt} √(1 + n̄ − 2A sin²φ₁ − B) / (2√2 n̄^{3/2} |cos(φ₁ + 2ηt)|)
/// A = n̄ e^{−4n̄ sin²ηt},  B = n̄ e^{n̄(cos 4ηt − 1)} cos φ₂
/// ```
///
/// Only the Kerr phase is covered; a linear-phase request falls back to the
/// same expressions. A negative radicand yields `sigma = NaN`.
fn printed(
    cfg: &InterferometerConfig,
    estimand: Estimand,
    reading: PrintedReading,
) -> PrecisionResult {
    let n = match reading.n_bar {
        PrintedNBar::Input => cfg.n_bar(),
        PrintedNBar::KerrArm => cfg.kerr_arm_photons(),
    };
    let eta = cfg.eta_t;
    let phi1 = cfg.phi_t + n * (2.0 * eta).sin();
    let delta_t = match reading.phi2 {
        Phi2Reading::DeltaAsPhi => cfg.phi_t,
        Phi2Reading::DeltaValue(v) => v,
    };
    let phi2 = 2.0 * (delta_t + eta) + n * (4.0 * eta).sin();
    let a = (-4.0 * n * eta.sin().powi(2)).exp() * n;
    let b = (n * ((4.0 * eta).cos() - 1.0)).exp() * n * phi2.cos();
    let radicand_x = 1.0 + n - 2.0 * a * phi1.cos().powi(2) + b;
    let radicand_y = 1.0 + n - 2.0 * a * phi1.sin().powi(2) - b;
    let sqrt_or_nan = |r: f64| if r >= 0.0 { r.sqrt() } else { f64::NAN };
    // δ = σ/|slope| with σ = √radicand / 2
    let envelope = SQRT_2 * n.powf(1.5) * (-2.0 * n * eta.sin().powi(2)).exp();
    let floor = RELATIVE_SLOPE_FLOOR * envelope;
    PrecisionResult {
        x: QuadraturePrecision {
            sigma: 0.5 * sqrt_or_nan(radicand_x),
            slope: envelope * (phi1 + 2.0 * eta).sin().abs(),
            floor,
        },
        y: QuadraturePrecision {
            sigma: 0.5 * sqrt_or_nan(radicand_y),
            slope: envelope * (phi1 + 2.0 * eta).cos().abs(),
            floor,
        },
        estimand,
        method: Method::ClosedFormPrinted,
    }
}

/// Signal-to-noise figure `|d⟨Q⟩/dθ| / ΔQ` from the rederived closed form.
fn figure_of_merit(cfg: &InterferometerConfig, q: Quadrature, estimand: Estimand) -> f64 {
    let r = rederived(cfg, estimand);
    let qp = r.quadrature(q);
    if qp.sigma > 0.0 {
        qp.slope.abs() / qp.sigma
    } else {
        0.0
    }
}

/// Linear phase `φt ∈ [0, 2π)` maximising `|d⟨Q⟩/dθ| / ΔQ`: a
/// [`PHASE_SCAN_POINTS`]-point scan followed by golden-section refinement
/// inside the best cell.
pub fn optimal_phi_t(cfg: &InterferometerConfig, q: Quadrature, estimand: Estimand) -> f64 {
    let step = TAU / PHASE_SCAN_POINTS as f64;
    let merit = |phi: f64| figure_of_merit(&cfg.with_phi_t(phi), q, estimand);
    let (best_i, _) = (0..PHASE_SCAN_POINTS)
        .map(|i| (i, merit(i as f64 * step)))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let centre = best_i as f64 * step;
    let (mut lo, mut hi) = (centre - step, centre + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (merit(x1), merit(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = merit(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = merit(x1);
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let best = if merit(0.5 * (lo + hi)) >= merit(centre) {
        0.5 * (lo + hi)
    } else {
        centre
    };
    best.rem_euclid(TAU)
}

/// Copy of `cfg` with `φt` set to the optimum for its quadrature.
pub fn with_optimal_phase(cfg: &InterferometerConfig, estimand: Estimand) -> InterferometerConfig {
    cfg.with_phi_t(optimal_phi_t(cfg, cfg.quadrature, estimand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::OutputPort;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_slope_is_unobservable() {
        // dark port, no phase at all: d⟨X⟩/dηt vanishes by symmetry
        let cfg = InterferometerConfig::new(4.0);
        let numeric = precision_numeric(&cfg, 1e-4, MomentSource::Analytic).unwrap();
        assert!(matches!(
            numeric.delta(Quadrature::X),
            Err(Error::UnobservablePhase { .. })
        ));
        assert!(numeric.delta(Quadrature::Y).is_ok());
        let closed = precision_closed_form(&cfg, ClosedForm::Rederived);
        assert!(closed.delta_x().is_none());
        assert!(closed.delta_y().is_some());
    }

    #[test]
    fn rejects_bad_step() {
        let cfg = InterferometerConfig::new(4.0);
        assert!(precision_numeric(&cfg, 0.0, MomentSource::Analytic).is_err());
        assert!(precision_numeric(&cfg, -1.0, MomentSource::Analytic).is_err());
    }

    #[test]
    fn zero_kerr_phase_reduces_printed_form() {
        // ηt = 0: A = n̄, no exponential prefactor; δ_X = √(1 + n̄ − 2n̄cos²φ + n̄cos2φ)/(2√2 n̄^{3/2}|sin φ|)
        let n: f64 = 25.0;
        let phi: f64 = 0.9;
        let cfg = InterferometerConfig::new(n).with_phi_t(phi);
        let r = precision_closed_form(
            &cfg,
            ClosedForm::Printed(PrintedReading {
                n_bar: PrintedNBar::Input,
                phi2: Phi2Reading::DeltaAsPhi,
            }),
        );
        let want = (1.0 + n - 2.0 * n * phi.cos().powi(2) + n * (2.0 * phi).cos()).sqrt()
            / (2.0 * SQRT_2 * n.powf(1.5) * phi.sin().abs());
        assert!((r.delta_x().unwrap() - want).abs() < 1e-15 * want.max(1.0));
        assert!((want - 1.0 / (2.0 * SQRT_2 * n.powf(1.5) * phi.sin())).abs() < 1e-15);
    }

    #[test]
    fn printed_form_matches_rederived_under_consistent_reading() {
        for &(n_bar, eta_t, phi_t) in &[
            (2.0, 0.03, 0.4),
            (50.0, 0.002, 2.0),
            (1.0e5, 1e-6, 5.5),
            (7.0, 0.25, 1.1),
        ] {
            let cfg = InterferometerConfig::new(n_bar)
                .with_eta_t(eta_t)
                .with_phi_t(phi_t);
            let printed =
                precision_closed_form(&cfg, ClosedForm::Printed(PrintedReading::CONSISTENT));
            let ours = precision_closed_form(&cfg, ClosedForm::Rederived);
            for q in [Quadrature::X, Quadrature::Y] {
                let (a, b) = (printed.delta(q).unwrap(), ours.delta(q).unwrap());
                // the printed radicand 1 + n̄ − 2A cos²φ₁ + B cancels to O(1)
                assert!(((a - b) / b).abs() < 1e-6, "{q:?} n̄={n_bar}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rederived_matches_moment_route() {
        let cfg = InterferometerConfig::new(3.0)
            .with_alpha(C64::new(1.2, -1.1))
            .with_theta_t(0.6)
            .with_eta_t(0.07)
            .with_phi_t(2.3)
            .with_port(OutputPort::B);
        let m = analytic_moments(&cfg);
        for est in [Estimand::KerrPhase, Estimand::LinearPhase] {
            let r = precision_closed_form_for(&cfg, est, ClosedForm::Rederived);
            assert!((r.x.sigma - m.var_x.sqrt()).abs() < 1e-13);
            assert!((r.y.sigma - m.var_y.sqrt()).abs() < 1e-13);
            assert!((r.x.slope - m.slope(Quadrature::X, est)).abs() < 1e-12);
            assert!((r.y.slope - m.slope(Quadrature::Y, est)).abs() < 1e-12);
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let cfg = InterferometerConfig::new(12.0)
            .with_eta_t(0.02)
            .with_phi_t(1.3);
        let h = 1e-3 / (1.0 + cfg.kerr_arm_photons());
        let numeric = precision_numeric(&cfg, h, MomentSource::Analytic).unwrap();
        let closed = precision_closed_form(&cfg, ClosedForm::Rederived);
        for q in [Quadrature::X, Quadrature::Y] {
            let (a, b) = (numeric.delta(q).unwrap(), closed.delta(q).unwrap());
            assert!(((a - b) / b).abs() < 1e-8);
        }
        let oracle = precision_numeric(&cfg, h, MomentSource::Oracle).unwrap();
        assert_eq!(oracle.method, Method::Oracle);
        assert!(
            ((oracle.delta_x().unwrap() - closed.delta_x().unwrap()) / closed.delta_x().unwrap())
                .abs()
                < 1e-6
        );
    }

    #[test]
    fn optimal_phase_small_time_limit() {
        // Small-time optimum on port A of a balanced interferometer:
        // δ → 1/(4|α|³cos⁴θt) = n̄^{-3/2}, reached at |sin(φ₁ + 2ηt)| = 1.
        let n_bar: f64 = 100.0;
        let cfg = InterferometerConfig::new(n_bar).with_eta_t(1e-3 / n_bar);
        let best = with_optimal_phase(&cfg, Estimand::KerrPhase);
        let r = precision_closed_form(&best, ClosedForm::Rederived);
        let delta = r.delta_x().unwrap();
        assert!((delta * n_bar.powf(1.5) - 1.0).abs() < 5e-3, "{delta}");
        let m = best.kerr_arm_photons();
        let phase = best.phi_t + m * (2.0 * best.eta_t).sin() + 2.0 * best.eta_t;
        assert!((phase.sin().abs() - 1.0).abs() < 1e-4);
        // the optimum beats every scan point
        for i in 0..64 {
            let other = precision_closed_form(
                &cfg.with_phi_t(i as f64 * TAU / 64.0),
                ClosedForm::Rederived,
            );
            if let Some(d) = other.delta_x() {
                assert!(d >= delta * (1.0 - 1e-9));
            }
        }
        let _ = (FRAC_PI_2, PI);
    }

    #[test]
    fn linear_phase_is_shot_noise_limited() {
        let n_bar: f64 = 400.0;
        let cfg = InterferometerConfig::new(n_bar);
        let best = cfg.with_phi_t(optimal_phi_t(&cfg, Quadrature::X, Estimand::LinearPhase));
        let r = precision_closed_form_for(&best, Estimand::LinearPhase, ClosedForm::Rederived);
        // balanced coupler: δφ = 1/|α|
        assert!((r.delta_x().unwrap() - 1.0 / n_bar.sqrt()).abs() < 1e-9);
    }
}
