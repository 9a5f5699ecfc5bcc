//! Invariants of the truncated Fock-space evolutions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use kerrmeter_core::fock::{
    apply_beamsplitter, apply_kerr, mode_expectation, recommended_cutoff, Ket, Mode, Operator,
    TwoModeState,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn random_state() -> impl Strategy<Value = TwoModeState> {
    (3usize..9).prop_flat_map(|cutoff| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), cutoff * cutoff).prop_filter_map(
            "non-zero vector",
            move |raw| {
                let norm: f64 = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
                if norm < 1e-3 {
                    return None;
                }
                let amps = raw
                    .iter()
                    .map(|&(a, b)| C64::new(a / norm, b / norm))
                    .collect();
                TwoModeState::from_amplitudes(cutoff, amps).ok()
            },
        )
    })
}

fn total_photons(s: &TwoModeState) -> f64 {
    s.mean_photon_number(Mode::A) + s.mean_photon_number(Mode::B)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn beamsplitter_is_unitary(state in random_state(), theta in -3.2f64..3.2) {
        let out = apply_beamsplitter(&state, theta).unwrap();
        prop_assert!((out.norm_sqr() - state.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn beamsplitter_conserves_photons(state in random_state(), theta in -3.2f64..3.2) {
        let out = apply_beamsplitter(&state, theta).unwrap();
        prop_assert!((total_photons(&out) - total_photons(&state)).abs() < 1e-9);
    }

    #[test]
    fn kerr_is_unitary_and_diagonal(
        state in random_state(),
        phi in -7.0f64..7.0,
        eta in -2.0f64..2.0,
        on_b in any::<bool>(),
    ) {
        let mode = if on_b { Mode::B } else { Mode::A };
        let out = apply_kerr(&state, mode, phi, eta);
        prop_assert!((out.norm_sqr() - state.norm_sqr()).abs() < 1e-10);
        for m in [Mode::A, Mode::B] {
            let before = state.mode_distribution(m);
            let after = out.mode_distribution(m);
            for (p, q) in before.iter().zip(&after) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_quarter_couplers_make_a_half(state in random_state()) {
        let twice = apply_beamsplitter(&apply_beamsplitter(&state, FRAC_PI_4).unwrap(), FRAC_PI_4).unwrap();
        let once = apply_beamsplitter(&state, FRAC_PI_2).unwrap();
        prop_assert!(twice.fidelity(&once).unwrap() > 1.0 - 1e-10);
    }
}

fn pipeline_moments(alpha: f64, phi_t: f64, eta_t: f64, cutoff: usize) -> Vec<f64> {
    let input = TwoModeState::coherent(C64::new(alpha, 0.0), C64::new(0.0, 0.0), cutoff).unwrap();
    let first = apply_beamsplitter(&input, FRAC_PI_4).unwrap();
    let kerr = apply_kerr(&first, Mode::A, phi_t, eta_t);
    let out = apply_beamsplitter(&kerr, FRAC_PI_4).unwrap();
    let x = Operator::quadrature_x(cutoff);
    let y = Operator::quadrature_y(cutoff);
    let x2 = x.compose(&x).unwrap();
    let y2 = y.compose(&y).unwrap();
    let mut moments = Vec::new();
    for mode in [Mode::A, Mode::B] {
        for op in [&x, &y, &x2, &y2] {
            moments.push(mode_expectation(&out, mode, op).unwrap().re);
        }
    }
    moments
}

#[test]
fn cutoff_convergence() {
    for &(n_bar, phi_t, eta_t) in &[(1.0, 0.3, 0.05), (4.0, 2.0, 0.2), (9.0, 5.0, 0.3)] {
        let n = recommended_cutoff(n_bar);
        let coarse = pipeline_moments(f64::sqrt(n_bar), phi_t, eta_t, n);
        let fine = pipeline_moments(f64::sqrt(n_bar), phi_t, eta_t, n + 8);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-8, "n̄ = {n_bar}: {a} vs {b}");
        }
    }
}
