//! Physical constants (CODATA 2018, 10 significant figures) used throughout
//! the crate. Every numerical constant lives here.

use std::f64::consts::TAU;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_813e-12;
/// Newtonian constant of gravitation, m³ kg⁻¹ s⁻².
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_300_000e-11;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_650_000;

/// Density of gold, kg/m³.
pub const GOLD_DENSITY: f64 = 19_300.0;

/// `2π × 1 MHz` in rad/s.
pub const TWO_PI_MHZ: f64 = TAU * 1.0e6;
/// `2π × 1 GHz` in rad/s.
pub const TWO_PI_GHZ: f64 = TAU * 1.0e9;
