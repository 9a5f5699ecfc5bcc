//! Finite-difference derivatives.

/// Plain second-order central difference.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference with one Richardson step (fourth order):
/// `(4 D(h/2) − D(h)) / 3`.
pub fn central_richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d_h = central(&f, x, h);
    let d_half = central(&f, x, 0.5 * h);
    (4.0 * d_half - d_h) / 3.0
}

fn forward2<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    (4.0 * (f(x + h) - f0) - (f(x + 2.0 * h) - f0)) / (2.0 * h)
}

/// Second-order forward difference with one Richardson step. Only samples
/// `x .. x + 2h`.
pub fn forward_richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (4.0 * forward2(&f, x, 0.5 * h) - forward2(&f, x, h)) / 3.0
}

/// Mirror of [`forward_richardson`]; only samples `x − 2h .. x`.
pub fn backward_richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    -forward_richardson(|y| f(-y), -x, h)
}
