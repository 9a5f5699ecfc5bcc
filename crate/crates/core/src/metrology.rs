//! Cantilever mechanics, force and gravity resolution, zero-point motion.
//!
//! Quantities are wrapped in unit newtypes so that a stiffness cannot be
//! passed where a mass is expected.

use std::fmt;

use crate::constants::{GOLD_DENSITY, GRAVITATIONAL_CONSTANT, HBAR, STANDARD_GRAVITY};
use crate::{Error, Result};

macro_rules! quantity {
    ($(#[$doc:meta])* $name:ident, $unit:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
        pub struct $name(f64);

        impl $name {
            pub const UNIT: &'static str = $unit;

            /// Wrap a finite, non-negative SI value.
            pub fn new(value: f64) -> Result<Self> {
                if value.is_finite() && value >= 0.0 {
                    Ok(Self(value))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "{} = {value} {}", stringify!($name), $unit
                    )))
                }
            }

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match f.precision() {
                    Some(p) => write!(f, "{:.*e} {}", p, self.0, $unit),
                    None => write!(f, "{:.6e} {}", self.0, $unit),
                }
            }
        }
    };
}

quantity!(Meters, "m");
quantity!(Kilograms, "kg");
quantity!(KgPerCubicMeter, "kg/m^3");
quantity!(Pascals, "Pa");
quantity!(NewtonsPerMeter, "N/m");
quantity!(Newtons, "N");
quantity!(RadiansPerSecond, "rad/s");
quantity!(
    /// Displacement–time precision δ(rt) (m·s, quoted as m/Hz).
    MeterSeconds,
    "m/Hz"
);
quantity!(
    /// Force–time precision (N·s, quoted as N/Hz).
    NewtonSeconds,
    "N/Hz"
);

/// End-loaded rectangular beam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cantilever {
    pub length: Meters,
    pub width: Meters,
    pub thickness: Meters,
    pub density: KgPerCubicMeter,
    pub youngs_modulus: Pascals,
    /// Mass attached at the free end.
    pub added_mass: Kilograms,
}

/// Factor converting the beam mass into its end-point effective mass.
pub const BEAM_EFFECTIVE_MASS_FACTOR: f64 = 0.24;

/// Side of the gold proof mass on the default cantilever.
pub const DEFAULT_GOLD_CUBE_SIDE: f64 = 50e-6;

impl Default for Cantilever {
    /// Silicon nitride, (200, 70, 0.8) μm, with a 50 μm gold cube.
    fn default() -> Self {
        Self {
            length: Meters(200e-6),
            width: Meters(70e-6),
            thickness: Meters(0.8e-6),
            density: KgPerCubicMeter(3184.0),
            youngs_modulus: Pascals(250e9),
            added_mass: added_mass_cube(
                Meters(DEFAULT_GOLD_CUBE_SIDE),
                KgPerCubicMeter(GOLD_DENSITY),
            ),
        }
    }
}

impl Cantilever {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.length.0,
            self.width.0,
            self.thickness.0,
            self.density.0,
            self.youngs_modulus.0,
        ];
        if dims.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!("cantilever {self:?}")));
        }
        Ok(())
    }

    pub fn beam_mass(&self) -> Kilograms {
        Kilograms(self.density.0 * self.length.0 * self.width.0 * self.thickness.0)
    }

    /// `m_added + 0.24 m_beam`.
    pub fn effective_mass(&self) -> Kilograms {
        Kilograms(self.added_mass.0 + BEAM_EFFECTIVE_MASS_FACTOR * self.beam_mass().0)
    }

    /// `Ω = √(k / m_eff)`.
    pub fn resonance(&self) -> RadiansPerSecond {
        RadiansPerSecond((spring_constant(self).0 / self.effective_mass().0).sqrt())
    }
}

/// `k = E w t³ / (4 l³)`.
pub fn spring_constant(c: &Cantilever) -> NewtonsPerMeter {
    NewtonsPerMeter(
        c.youngs_modulus.0 * c.width.0 * c.thickness.0.powi(3) / (4.0 * c.length.0.powi(3)),
    )
}

/// `ρ · side³`.
pub fn added_mass_cube(side: Meters, density: KgPerCubicMeter) -> Kilograms {
    Kilograms(density.0 * side.0.powi(3))
}

/// `δF = k · δ(rt)`.
pub fn min_detectable_force(k: NewtonsPerMeter, delta_rt: MeterSeconds) -> NewtonSeconds {
    NewtonSeconds(k.0 * delta_rt.0)
}

/// `F = G m₁ m₂ / d²`.
pub fn gravitational_force(m1: Kilograms, m2: Kilograms, distance: Meters) -> Result<Newtons> {
    if !(distance.0 > 0.0) {
        return Err(Error::InvalidArgument("distance must be positive".into()));
    }
    Ok(Newtons(
        GRAVITATIONAL_CONSTANT * m1.0 * m2.0 / (distance.0 * distance.0),
    ))
}

/// `δa/g = δF / (m g)`, in units of standard gravity.
pub fn gravity_resolution(delta_f: NewtonSeconds, sensing_mass: Kilograms) -> Result<f64> {
    if !(sensing_mass.0 > 0.0) {
        return Err(Error::InvalidArgument(
            "sensing mass must be positive".into(),
        ));
    }
    Ok(delta_f.0 / (sensing_mass.0 * STANDARD_GRAVITY))
}

/// Mass which, at `distance`, pulls on `sensing_mass` with force `delta_f`.
pub fn equivalent_source_mass(
    delta_f: NewtonSeconds,
    sensing_mass: Kilograms,
    distance: Meters,
) -> Result<Kilograms> {
    if !(sensing_mass.0 > 0.0) {
        return Err(Error::InvalidArgument(
            "sensing mass must be positive".into(),
        ));
    }
    Ok(Kilograms(
        delta_f.0 * distance.0 * distance.0 / (GRAVITATIONAL_CONSTANT * sensing_mass.0),
    ))
}

/// `x_zpm = √(ħ / (2 m Ω))`.
pub fn zero_point_motion(mass: Kilograms, omega: RadiansPerSecond) -> Result<Meters> {
    if !(mass.0 > 0.0 && omega.0 > 0.0) {
        return Err(Error::InvalidArgument(
            "mass and frequency must be positive".into(),
        ));
    }
    Ok(Meters((HBAR / (2.0 * mass.0 * omega.0)).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceSensitivity {
    pub spring_constant: NewtonsPerMeter,
    pub min_force: NewtonSeconds,
    /// In units of g.
    pub gravity_resolution: f64,
    /// Mass at 1 m whose pull on the sensing mass equals `min_force`.
    pub reference_mass_at_1m: Kilograms,
    pub sensing_mass: Kilograms,
}

/// Force and gravity figures of a cantilever read out at precision `delta_rt`.
pub fn force_sensitivity(c: &Cantilever, delta_rt: MeterSeconds) -> Result<ForceSensitivity> {
    c.validate()?;
    let k = spring_constant(c);
    let min_force = min_detectable_force(k, delta_rt);
    let sensing_mass = c.effective_mass();
    Ok(ForceSensitivity {
        spring_constant: k,
        min_force,
        gravity_resolution: gravity_resolution(min_force, sensing_mass)?,
        reference_mass_at_1m: equivalent_source_mass(min_force, sensing_mass, Meters(1.0))?,
        sensing_mass,
    })
}
