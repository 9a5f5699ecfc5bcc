use super::precision::{optimal_phi_t, precision_closed_form_for, ClosedForm};
use super::{Estimand, InterferometerConfig};
use crate::{Error, Result};

/// A scaling fit needs at least this many decades of `n̄`.
pub const MIN_GRID_DECADES: f64 = 3.0;

/// Least-squares fit of `log δ = slope · log n̄ + log prefactor`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub prefactor: f64,
    /// `(n̄, δ)` pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
}

/// Fit the `n̄` scaling of the optimal-phase precision.
///
/// The template fixes the coupler, port, quadrature and the input phase of
/// `α`. For [`Estimand::KerrPhase`] the product `n̄ · ηt` of the template is
/// held constant across the grid, i.e. `ηt` is rescaled per point.
pub fn scaling_exponent(
    n_bar_grid: &[f64],
    template: &InterferometerConfig,
    estimand: Estimand,
) -> Result<ScalingFit> {
    if n_bar_grid.len() < 2 || n_bar_grid.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
        return Err(Error::InvalidArgument(
            "n̄ grid needs at least two positive points".into(),
        ));
    }
    let lo = n_bar_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = n_bar_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let decades = (hi / lo).log10();
    if decades < MIN_GRID_DECADES - 1e-9 {
        return Err(Error::GridTooNarrow {
            decades,
            required: MIN_GRID_DECADES,
        });
    }
    let n_eta_t = template.n_bar() * template.eta_t;

    let mut points = Vec::with_capacity(n_bar_grid.len());
    for &n_bar in n_bar_grid {
        let cfg = template.with_n_bar(n_bar).with_eta_t(n_eta_t / n_bar);
        cfg.validate()?;
        let cfg = cfg.with_phi_t(optimal_phi_t(&cfg, cfg.quadrature, estimand));
        let delta = precision_closed_form_for(&cfg, estimand, ClosedForm::Rederived)
            .delta(cfg.quadrature)?;
        points.push((n_bar, delta));
    }

    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x.ln() - mx;
        (sxx + dx * dx, sxy + dx * (y.ln() - my))
    });
    let slope = sxy / sxx;
    let prefactor = (my - slope * mx).exp();
    Ok(ScalingFit {
        slope,
        prefactor,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::Quadrature;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn kerr_slope_is_minus_three_halves() {
        let grid = log_grid(1e2, 1e6, 9);
        let template = InterferometerConfig::new(1.0).with_eta_t(1e-3);
        let fit = scaling_exponent(&grid, &template, Estimand::KerrPhase).unwrap();
        assert!((fit.slope + 1.5).abs() < 0.02, "{}", fit.slope);
    }

    #[test]
    fn linear_phase_slope_is_shot_noise() {
        let grid = log_grid(1e2, 1e6, 9);
        let template = InterferometerConfig::new(1.0);
        let fit = scaling_exponent(&grid, &template, Estimand::LinearPhase).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.02);
        assert!((fit.prefactor - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratures_scale_alike() {
        let grid = log_grid(1e2, 1e6, 9);
        let x = scaling_exponent(
            &grid,
            &InterferometerConfig::new(1.0).with_eta_t(1e-3),
            Estimand::KerrPhase,
        )
        .unwrap();
        let y = scaling_exponent(
            &grid,
            &InterferometerConfig::new(1.0)
                .with_eta_t(1e-3)
                .with_quadrature(Quadrature::Y),
            Estimand::KerrPhase,
        )
        .unwrap();
        assert!((x.slope - y.slope).abs() < 0.02);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let grid = log_grid(1e2, 5e4, 5);
        let r = scaling_exponent(&grid, &InterferometerConfig::new(1.0), Estimand::KerrPhase);
        assert!(matches!(r, Err(Error::GridTooNarrow { .. })));
    }
}
