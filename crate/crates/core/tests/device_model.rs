//! Device chain: capacitance, detunings, Kerr coefficient, displacement precision.

use std::f64::consts::TAU;

use kerrmeter_core::device::{
    coupling_capacitance, default_r_grid, displacement_precision_direct, CapacitanceModel, Device,
    DeviceParams, Exposure, PlateGeometry, Readout,
};
use kerrmeter_core::interferometer::Quadrature;
use proptest::prelude::*;

fn default_device() -> Device {
    Device::new(PlateGeometry::default(), DeviceParams::default())
}

/// The declared capacitance → detuning → η chain, written out independently.
fn reference_eta(gap: f64) -> (f64, f64, f64) {
    let (hbar, e, eps0) = (1.054571817e-34, 1.602176634e-19, 8.854187813e-12);
    let mhz = TAU * 1e6;
    let (g, omega_c, gamma) = (100.0 * mhz, 1500.0 * mhz, 0.1 * mhz);
    let c_self = 100e-15;
    let e_c = e * e / (2.0 * c_self * hbar);
    let w_q = (8.0 * 15.0 * TAU * 1e9 * e_c).sqrt() - e_c;
    let cap = |d: f64| eps0 * 200e-6 * 70e-6 / d;
    let j = |c: f64| c / (c + c_self) * w_q / 2.0;
    let shift = j(cap(gap)) - j(cap(1.01e-6));
    let (delta, big_delta) = (-60.0 * mhz - shift, -60.0 * mhz + shift);
    let eta = (g / omega_c).powi(2)
        * (g * g * big_delta / (gamma * gamma + big_delta * big_delta)
            - g * g * delta / (4.0 * gamma * gamma + delta * delta));
    (delta, big_delta, eta)
}

#[test]
fn golden_values_at_half_micron() {
    let device = default_device();
    let r = 0.5e-6 - 1.01e-6;
    let det = device.detunings(r).unwrap();
    let kerr = device.kerr(r).unwrap();
    // locked from an independent evaluation of the same chain
    let locked = (
        -2_725_527_909.772_607,
        1_971_545_672.911_057,
        1_533_723.394_054_243,
    );
    assert!((det.delta / locked.0 - 1.0).abs() < 1e-9);
    assert!((det.big_delta / locked.1 - 1.0).abs() < 1e-9);
    assert!((kerr.eta / locked.2 - 1.0).abs() < 1e-8);
    let (delta, big_delta, eta) = reference_eta(0.5e-6);
    assert!((det.delta / delta - 1.0).abs() < 1e-12);
    assert!((det.big_delta / big_delta - 1.0).abs() < 1e-12);
    assert!((kerr.eta / eta - 1.0).abs() < 1e-9);
    assert!(kerr.weak_coupling_warning.is_none());
}

#[test]
fn eta_over_kappa_reaches_blockade_range() {
    let kerr = default_device().kerr(0.5e-6 - 1.01e-6).unwrap();
    assert!(
        (1e3..=1e4).contains(&kerr.eta_over_kappa),
        "{}",
        kerr.eta_over_kappa
    );
}

#[test]
fn eta_ignores_kappa() {
    let grid = default_r_grid(191);
    let base = default_device().eta_curve(&grid).unwrap();
    for scale in [1e-3, 10.0, 1e3] {
        let mut device = default_device();
        device.params.kappa *= scale;
        let scaled = device.eta_curve(&grid).unwrap();
        for i in 0..grid.len() {
            assert_eq!(scaled.eta[i].to_bits(), base.eta[i].to_bits());
            let ratio = base.eta_over_kappa[i] / scaled.eta_over_kappa[i];
            assert!((ratio / scale - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn chain_rule_matches_composed_map() {
    let device = default_device();
    let readout = Readout::new(1e4);
    for r in [-0.8e-6, -0.45e-6, 0.03e-6, 0.35e-6, 0.9e-6] {
        let chained = device.displacement_precision(r, &readout).unwrap();
        let (x, y) = displacement_precision_direct(&device, &chained, &readout).unwrap();
        for (a, b) in [(chained.x.delta_rt, x), (chained.y.delta_rt, y)] {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert!(((a - b) / a).abs() < 1e-4, "r = {r}: {a} vs {b}");
        }
    }
}

#[test]
fn displacement_precision_scales_with_photon_number() {
    let device = default_device();
    let r = -0.5e-6;
    let points: Vec<(f64, f64)> = (0..9)
        .map(|k| {
            let n_bar = 10f64.powf(2.0 + 0.5 * k as f64);
            let d = device
                .displacement_precision(r, &Readout::new(n_bar))
                .unwrap();
            (n_bar.ln(), d.x.delta_rt.unwrap().ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    assert!((sxy / sxx + 1.5).abs() < 0.02, "{}", sxy / sxx);
}

#[test]
fn delta_r_at_fixed_time() {
    let device = default_device();
    let readout = Readout::new(1e4).with_exposure(Exposure::Fixed(1e-9));
    let d = device.displacement_precision(-0.5e-6, &readout).unwrap();
    assert_eq!(d.t, 1e-9);
    assert!((d.delta_r(Quadrature::X).unwrap() * 1e-9 / d.x.delta_rt.unwrap() - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn capacitance_decreases_with_gap(gap in 1e-8f64..1e-4, factor in 1.0001f64..10.0, fringe in any::<bool>()) {
        let geom = PlateGeometry {
            model: if fringe { CapacitanceModel::ParallelPlateWithFringe } else { CapacitanceModel::ParallelPlate },
            ..PlateGeometry::default()
        };
        let near = coupling_capacitance(&geom, gap).unwrap();
        let far = coupling_capacitance(&geom, gap * factor).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn baseline_is_anchored(
        delta0 in -1e9f64..1e9,
        big_delta0 in -1e9f64..1e9,
        r0 in 0.2e-6f64..5e-6,
        c_self in 10e-15f64..500e-15,
    ) {
        let params = DeviceParams { delta0, big_delta0, c_self, ..DeviceParams::default() };
        let geometry = PlateGeometry { r0, ..PlateGeometry::default() };
        let det = Device::new(geometry, params).detunings(0.0).unwrap();
        prop_assert_eq!(det.delta, delta0);
        prop_assert_eq!(det.big_delta, big_delta0);
    }

    #[test]
    fn kappa_never_enters_eta(r in -0.9e-6f64..2e-6, kappa in 1e-3f64..1e12) {
        let base = default_device();
        let mut other = default_device();
        other.params.kappa = kappa;
        prop_assert_eq!(base.eta(r).unwrap().to_bits(), other.eta(r).unwrap().to_bits());
    }
}
