//! Oracle equivalence and invariants of the interferometer moments.

use std::f64::consts::{PI, TAU};

use kerrmeter_core::diff::central_richardson;
use kerrmeter_core::interferometer::{
    analytic_moments, kerr_arm_moments, optimal_phi_t, oracle_moments, precision_closed_form,
    ClosedForm, Estimand, InterferometerConfig, OutputPort, Quadrature,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn port() -> impl Strategy<Value = OutputPort> {
    prop_oneof![Just(OutputPort::A), Just(OutputPort::B)]
}

fn small_config() -> impl Strategy<Value = InterferometerConfig> {
    (
        0.0f64..9.0,
        0.0f64..TAU,
        0.0f64..0.3,
        0.0f64..TAU,
        0.1f64..1.4,
        port(),
    )
        .prop_map(|(n_bar, arg, eta_t, phi_t, theta_t, port)| {
            InterferometerConfig::new(n_bar)
                .with_alpha(C64::from_polar(n_bar.sqrt(), arg))
                .with_eta_t(eta_t)
                .with_phi_t(phi_t)
                .with_theta_t(theta_t)
                .with_port(port)
        })
}

fn any_config() -> impl Strategy<Value = InterferometerConfig> {
    (
        -2.0f64..7.0,
        0.0f64..TAU,
        -3.0f64..3.0,
        0.0f64..TAU,
        0.0f64..1.6,
        port(),
    )
        .prop_map(|(log_n, arg, eta_t, phi_t, theta_t, port)| {
            let n_bar = 10f64.powf(log_n);
            InterferometerConfig::new(n_bar)
                .with_alpha(C64::from_polar(n_bar.sqrt(), arg))
                .with_eta_t(eta_t)
                .with_phi_t(phi_t)
                .with_theta_t(theta_t)
                .with_port(port)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_matches_oracle(cfg in small_config()) {
        let a = analytic_moments(&cfg);
        let o = oracle_moments(&cfg).unwrap();
        prop_assert!((a.mean_x - o.mean_x).abs() < 1e-8);
        prop_assert!((a.mean_y - o.mean_y).abs() < 1e-8);
        prop_assert!((a.var_x - o.var_x).abs() < 1e-8);
        prop_assert!((a.var_y - o.var_y).abs() < 1e-8);
        let scale = 1.0 + cfg.n_bar().powf(1.5);
        prop_assert!((a.d_mean_x_d_eta_t - o.d_mean_x_d_eta_t).abs() < 1e-6 * scale);
        prop_assert!((a.d_mean_y_d_eta_t - o.d_mean_y_d_eta_t).abs() < 1e-6 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn uncertainty_floor(cfg in any_config()) {
        let m = analytic_moments(&cfg);
        prop_assert!(m.var_x >= 0.0 && m.var_y >= 0.0);
        prop_assert!(m.var_x * m.var_y >= 1.0 / 16.0 - 1e-9, "{} {}", m.var_x, m.var_y);
    }

    #[test]
    fn gradient_matches_finite_difference(cfg in any_config().prop_filter("moderate n̄", |c| c.n_bar() < 1e4)) {
        let n_bar = cfg.n_bar();
        let h = 1e-6 * f64::max(1.0, 1.0 / n_bar);
        let m = analytic_moments(&cfg);
        let mean = |q: Quadrature| move |e: f64| analytic_moments(&cfg.with_eta_t(e)).mean(q);
        let fd_x = central_richardson(mean(Quadrature::X), cfg.eta_t, h);
        let fd_y = central_richardson(mean(Quadrature::Y), cfg.eta_t, h);
        // largest slope the configuration can produce
        let m_arm = cfg.kerr_arm_photons();
        let envelope = 2.0 * m_arm * m_arm.sqrt() * (-2.0 * m_arm * cfg.eta_t.sin().powi(2)).exp();
        // plus the rounding floor of the stencil on means of size |α|
        let rounding = 256.0 * f64::EPSILON * (1.0 + cfg.alpha.norm()) / h;
        let tol = |exact: f64| 1e-6 * exact.abs().max(envelope) + rounding;
        prop_assert!((fd_x - m.d_mean_x_d_eta_t).abs() < tol(m.d_mean_x_d_eta_t));
        prop_assert!((fd_y - m.d_mean_y_d_eta_t).abs() < tol(m.d_mean_y_d_eta_t));
    }

    #[test]
    fn half_turn_flips_kerr_arm_field(cfg in any_config()) {
        let a = kerr_arm_moments(&cfg);
        let b = kerr_arm_moments(&cfg.with_phi_t(cfg.phi_t + PI));
        prop_assert!((a.mean + b.mean).norm() < 1e-10 * (1.0 + a.mean.norm()));
        prop_assert!((a.d_mean_d_eta_t + b.d_mean_d_eta_t).norm() < 1e-10 * (1.0 + a.d_mean_d_eta_t.norm()));
    }

    #[test]
    fn half_turn_keeps_precision(cfg in any_config()) {
        let a = precision_closed_form(&cfg, ClosedForm::Rederived);
        let b = precision_closed_form(&cfg.with_phi_t(cfg.phi_t + PI), ClosedForm::Rederived);
        for q in [Quadrature::X, Quadrature::Y] {
            if let (Ok(x), Ok(y)) = (a.delta(q), b.delta(q)) {
                prop_assert!(((x - y) / x).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn optimum_shifts_with_half_turn() {
    // φt is only defined mod 2π; the optimum for the reflected amplitude
    // −α is the original optimum shifted by π.
    let cfg = InterferometerConfig::new(400.0).with_eta_t(1e-3 / 400.0);
    let phi = optimal_phi_t(&cfg, Quadrature::X, Estimand::KerrPhase);
    let best = precision_closed_form(&cfg.with_phi_t(phi), ClosedForm::Rederived)
        .delta_x()
        .unwrap();
    let shifted = precision_closed_form(&cfg.with_phi_t(phi + PI), ClosedForm::Rederived)
        .delta_x()
        .unwrap();
    assert!(((best - shifted) / best).abs() < 1e-10);
}

#[test]
fn precision_improves_along_small_time_manifold() {
    let mut previous = f64::INFINITY;
    for k in 0..40 {
        let n_bar = 10f64.powf(0.5 + 0.15 * k as f64);
        for q in [Quadrature::X, Quadrature::Y] {
            let cfg = InterferometerConfig::new(n_bar)
                .with_eta_t(1e-3 / n_bar)
                .with_quadrature(q);
            let cfg = cfg.with_phi_t(optimal_phi_t(&cfg, q, Estimand::KerrPhase));
            let delta = precision_closed_form(&cfg, ClosedForm::Rederived)
                .delta(q)
                .unwrap();
            if q == Quadrature::X {
                assert!(delta < previous, "n̄ = {n_bar}");
                previous = delta;
            }
        }
    }
}

#[test]
fn coherent_input_on_dark_port_is_quiet() {
    let cfg = InterferometerConfig::new(4.0);
    let m = analytic_moments(&cfg);
    assert!(m.mean_x.abs() < 1e-15 && m.mean_y.abs() < 1e-15);
    assert!((m.var_x - 0.25).abs() < 1e-15 && (m.var_y - 0.25).abs() < 1e-15);
}
