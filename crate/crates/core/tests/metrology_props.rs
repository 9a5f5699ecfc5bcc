use kerrmeter_core::constants::STANDARD_GRAVITY;
use kerrmeter_core::metrology::{
    gravity_resolution, min_detectable_force, spring_constant, zero_point_motion, Cantilever,
    Kilograms, MeterSeconds, Meters, NewtonsPerMeter, Pascals, RadiansPerSecond,
};
use proptest::prelude::*;

fn positive() -> impl Strategy<Value = f64> {
    (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
}

fn cantilever() -> impl Strategy<Value = Cantilever> {
    (positive(), positive(), positive(), positive()).prop_map(|(l, w, t, e)| Cantilever {
        length: Meters::new(l * 1e-4).unwrap(),
        width: Meters::new(w * 1e-4).unwrap(),
        thickness: Meters::new(t * 1e-6).unwrap(),
        youngs_modulus: Pascals::new(e * 1e9).unwrap(),
        ..Cantilever::default()
    })
}

proptest! {
    #[test]
    fn stiffness_follows_beam_laws(c in cantilever(), f in 1.001f64..10.0) {
        let k = spring_constant(&c).value();
        let thicker = Cantilever { thickness: Meters::new(c.thickness.value() * f).unwrap(), ..c };
        let longer = Cantilever { length: Meters::new(c.length.value() * f).unwrap(), ..c };
        let wider = Cantilever { width: Meters::new(c.width.value() * f).unwrap(), ..c };
        prop_assert!(spring_constant(&thicker).value() > k);
        prop_assert!(spring_constant(&longer).value() < k);
        prop_assert!(spring_constant(&wider).value() > k);
        prop_assert!((spring_constant(&thicker).value() / k / f.powi(3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_point_motion_decreases(m in positive(), w in positive(), f in 1.001f64..10.0) {
        let x = zero_point_motion(Kilograms::new(m).unwrap(), RadiansPerSecond::new(w).unwrap()).unwrap().value();
        let heavier = zero_point_motion(Kilograms::new(m * f).unwrap(), RadiansPerSecond::new(w).unwrap()).unwrap().value();
        let faster = zero_point_motion(Kilograms::new(m).unwrap(), RadiansPerSecond::new(w * f).unwrap()).unwrap().value();
        prop_assert!(heavier < x && faster < x);
        prop_assert!((x / heavier - f.sqrt()).abs() < 1e-12 * f.sqrt());
    }

    #[test]
    fn force_is_monotone(k in positive(), d in positive(), f in 1.001f64..10.0) {
        let base = min_detectable_force(NewtonsPerMeter::new(k).unwrap(), MeterSeconds::new(d).unwrap()).value();
        let stiffer = min_detectable_force(NewtonsPerMeter::new(k * f).unwrap(), MeterSeconds::new(d).unwrap()).value();
        let coarser = min_detectable_force(NewtonsPerMeter::new(k).unwrap(), MeterSeconds::new(d * f).unwrap()).value();
        prop_assert!(stiffer > base && coarser > base);
    }

    #[test]
    fn gravity_round_trip(k in positive(), d in positive(), m in positive()) {
        let force = min_detectable_force(NewtonsPerMeter::new(k).unwrap(), MeterSeconds::new(d).unwrap());
        let g = gravity_resolution(force, Kilograms::new(m).unwrap()).unwrap();
        let back = g * m * STANDARD_GRAVITY;
        prop_assert!((back / (k * d) - 1.0).abs() < 1e-12);
    }
}
