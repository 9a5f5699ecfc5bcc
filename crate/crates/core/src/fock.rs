//! Truncated Fock-space states and the exact two-mode evolutions.
//!
//! Single-mode states live on photon numbers `0..cutoff`. Two-mode states are
//! stored row-major over `(n_a, n_b)` with a shared cutoff, so the amplitude of
//! `|n_a, n_b⟩` sits at `n_a * cutoff + n_b`.
//!
//! The beamsplitter generator `â†b̂ + âb̂†` conserves `n_a + n_b`, so its
//! exponential is block diagonal in the total photon number. Each block is a
//! real symmetric tridiagonal matrix; we diagonalise it and exponentiate the
//! eigenvalues, which is exact on the truncated space up to rounding.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Norm leakage tolerated when a state is constructed.
pub const DEFAULT_LEAK_TOL: f64 = 1e-10;

/// Largest mean photon number for which the two-mode oracle is run.
pub const ORACLE_N_BAR_CEILING: f64 = 100.0;

/// Target Poisson tail weight beyond the recommended cutoff.
pub const CUTOFF_TAIL: f64 = 1e-12;

/// `ceil(n̄ + 6√n̄ + 10)`, raised where needed so that the Poisson tail of a
/// coherent state with mean `n_bar` beyond the cutoff stays below
/// [`CUTOFF_TAIL`] (the plain rule leaves ~1e-10 at n̄ = 100).
pub fn recommended_cutoff(n_bar: f64) -> usize {
    let n_bar = n_bar.max(0.0);
    let rule = (n_bar + 6.0 * n_bar.sqrt() + 10.0).ceil() as usize;
    rule.max(poisson_tail_cutoff(n_bar, CUTOFF_TAIL))
}

/// Smallest `N` with `P(n ≥ N) < tail` for a Poisson distribution.
fn poisson_tail_cutoff(n_bar: f64, tail: f64) -> usize {
    if n_bar == 0.0 {
        return 1;
    }
    let top = (n_bar + 40.0 * n_bar.sqrt() + 60.0).ceil() as usize;
    let log_pmf = |n: usize| n as f64 * n_bar.ln() - n_bar - ln_factorial(n);
    let mut acc = 0.0;
    for n in (0..=top).rev() {
        acc += log_pmf(n).exp();
        if acc >= tail {
            return n + 1;
        }
    }
    0
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Anything that is a flat vector of amplitudes.
pub trait Ket {
    fn amplitudes(&self) -> &[C64];

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|c| c.norm_sqr()).sum()
    }

    fn dim(&self) -> usize {
        self.amplitudes().len()
    }
}

fn check_norm(amplitudes: &[C64], leak_tol: f64) -> Result<()> {
    let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    if !norm.is_finite() || norm > 1.0 + 1e-12 || norm < 1.0 - leak_tol {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// A single-mode state on a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, DEFAULT_LEAK_TOL)
    }

    pub fn with_tolerance(amplitudes: Vec<C64>, leak_tol: f64) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::CutoffTooSmall(amplitudes.len()));
        }
        check_norm(&amplitudes, leak_tol)?;
        Ok(Self { amplitudes })
    }

    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        if n >= cutoff {
            return Err(Error::InvalidArgument(format!(
                "Fock state |{n}⟩ does not fit below cutoff {cutoff}"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff];
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::fock(0, cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }
}

impl Ket for StateVector {
    fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// Coherent state `|α⟩` truncated at `cutoff`, requiring the kept norm to be
/// within [`DEFAULT_LEAK_TOL`] of one.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<StateVector> {
    coherent_state_with_tolerance(alpha, cutoff, DEFAULT_LEAK_TOL)
}

/// Coherent state with an explicit truncation tolerance.
///
/// Amplitudes `e^{−|α|²/2} αⁿ/√(n!)` are evaluated in log-space so that
/// neither `αⁿ` nor `n!` overflow for large `n̄`.
pub fn coherent_state_with_tolerance(
    alpha: C64,
    cutoff: usize,
    leak_tol: f64,
) -> Result<StateVector> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    let n_bar = alpha.norm_sqr();
    let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff];
    if n_bar == 0.0 {
        amplitudes[0] = C64::new(1.0, 0.0);
    } else {
        let ln_r = alpha.norm().ln();
        let arg = alpha.arg();
        let mut ln_fact = 0.0;
        for (n, amp) in amplitudes.iter_mut().enumerate() {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            let ln_mag = -0.5 * n_bar + n as f64 * ln_r - 0.5 * ln_fact;
            *amp = C64::from_polar(ln_mag.exp(), n as f64 * arg);
        }
    }
    let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    if norm < 1.0 - leak_tol {
        return Err(Error::Truncation {
            cutoff,
            norm,
            tolerance: leak_tol,
        });
    }
    Ok(StateVector { amplitudes })
}

/// Mode selector for two-mode states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// A two-mode state with a shared per-mode cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl TwoModeState {
    pub fn from_amplitudes(cutoff: usize, amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_amplitudes_with_tolerance(cutoff, amplitudes, DEFAULT_LEAK_TOL)
    }

    pub fn from_amplitudes_with_tolerance(
        cutoff: usize,
        amplitudes: Vec<C64>,
        leak_tol: f64,
    ) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        let expected = cutoff
            .checked_mul(cutoff)
            .ok_or_else(|| Error::InvalidArgument(format!("cutoff {cutoff} overflows cutoff²")))?;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        check_norm(&amplitudes, leak_tol)?;
        Ok(Self { cutoff, amplitudes })
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        if a.cutoff() != b.cutoff() {
            return Err(Error::DimensionMismatch {
                expected: a.cutoff(),
                actual: b.cutoff(),
            });
        }
        let cutoff = a.cutoff();
        let mut amplitudes = Vec::with_capacity(cutoff * cutoff);
        for ca in a.amplitudes() {
            for cb in b.amplitudes() {
                amplitudes.push(ca * cb);
            }
        }
        Ok(Self { cutoff, amplitudes })
    }

    /// Product coherent state `|α_a, α_b⟩`.
    pub fn coherent(alpha_a: C64, alpha_b: C64, cutoff: usize) -> Result<Self> {
        Self::product(
            &coherent_state(alpha_a, cutoff)?,
            &coherent_state(alpha_b, cutoff)?,
        )
    }

    pub fn fock(n_a: usize, n_b: usize, cutoff: usize) -> Result<Self> {
        Self::product(
            &StateVector::fock(n_a, cutoff)?,
            &StateVector::fock(n_b, cutoff)?,
        )
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.cutoff + n_b
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> C64 {
        self.amplitudes[self.index(n_a, n_b)]
    }

    /// Marginal photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: Mode) -> Vec<f64> {
        let c = self.cutoff;
        let mut p = vec![0.0; c];
        for n_a in 0..c {
            for n_b in 0..c {
                let w = self.amplitudes[n_a * c + n_b].norm_sqr();
                match mode {
                    Mode::A => p[n_a] += w,
                    Mode::B => p[n_b] += w,
                }
            }
        }
        p
    }

    pub fn mean_photon_number(&self, mode: Mode) -> f64 {
        self.mode_distribution(mode)
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn mean_total_photons(&self) -> f64 {
        self.mean_photon_number(Mode::A) + self.mean_photon_number(Mode::B)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &TwoModeState) -> Result<f64> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff,
                actual: other.cutoff,
            });
        }
        let overlap: C64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum();
        Ok(overlap.norm_sqr())
    }
}

impl Ket for TwoModeState {
    fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// One total-photon-number block of the beamsplitter, stored as the
/// eigendecomposition of its (real, symmetric) generator.
#[derive(Clone, Debug)]
struct BeamsplitterBlock {
    /// Smallest `n_a` in the block; basis element `k` is `|lo + k, N − lo − k⟩`.
    lo: usize,
    total: usize,
    eigenvectors: DMatrix<f64>,
    phases: Vec<C64>,
}

/// `exp(−iθt(â†b̂ + âb̂†))` on a truncated two-mode space.
///
/// With this sign convention `|α, 0⟩ ↦ |α cos θt, −iα sin θt⟩`, and θt = π/4
/// is the balanced (90° hybrid) coupler.
#[derive(Clone, Debug)]
pub struct Beamsplitter {
    cutoff: usize,
    theta_t: f64,
    blocks: Vec<BeamsplitterBlock>,
}

impl Beamsplitter {
    pub fn new(cutoff: usize, theta_t: f64) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        if !theta_t.is_finite() {
            return Err(Error::InvalidArgument(format!("theta_t = {theta_t}")));
        }
        let blocks = (0..=2 * (cutoff - 1))
            .map(|total| {
                let lo = total.saturating_sub(cutoff - 1);
                let hi = total.min(cutoff - 1);
                let size = hi - lo + 1;
                let mut generator = DMatrix::<f64>::zeros(size, size);
                for k in 0..size.saturating_sub(1) {
                    // ⟨n_a + 1, n_b − 1| â†b̂ |n_a, n_b⟩ = √((n_a + 1) n_b)
                    let n_a = lo + k;
                    let n_b = total - n_a;
                    let element = (((n_a + 1) * n_b) as f64).sqrt();
                    generator[(k + 1, k)] = element;
                    generator[(k, k + 1)] = element;
                }
                let eig = SymmetricEigen::new(generator);
                let phases = eig
                    .eigenvalues
                    .iter()
                    .map(|&lambda| C64::from_polar(1.0, -theta_t * lambda))
                    .collect();
                BeamsplitterBlock {
                    lo,
                    total,
                    eigenvectors: eig.eigenvectors,
                    phases,
                }
            })
            .collect();
        Ok(Self {
            cutoff,
            theta_t,
            blocks,
        })
    }

    pub fn theta_t(&self) -> f64 {
        self.theta_t
    }

    pub fn apply(&self, state: &TwoModeState) -> Result<TwoModeState> {
        if state.cutoff != self.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff,
                actual: state.cutoff,
            });
        }
        let c = self.cutoff;
        let mut out = vec![C64::new(0.0, 0.0); c * c];
        for block in &self.blocks {
            let size = block.phases.len();
            let idx = |k: usize| {
                let n_a = block.lo + k;
                n_a * c + (block.total - n_a)
            };
            let psi =
                DVector::<C64>::from_iterator(size, (0..size).map(|k| state.amplitudes[idx(k)]));
            if psi.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let v = block.eigenvectors.map(|x| C64::new(x, 0.0));
            let mut coeffs = v.tr_mul(&psi);
            for (z, phase) in coeffs.iter_mut().zip(&block.phases) {
                *z *= phase;
            }
            let rotated = v * coeffs;
            for k in 0..size {
                out[idx(k)] = rotated[k];
            }
        }
        Ok(TwoModeState {
            cutoff: c,
            amplitudes: out,
        })
    }
}

/// Apply `exp(−iθt(â†b̂ + âb̂†))` exactly on the truncated space.
pub fn apply_beamsplitter(state: &TwoModeState, theta_t: f64) -> Result<TwoModeState> {
    Beamsplitter::new(state.cutoff, theta_t)?.apply(state)
}

/// Apply `exp(−i(φt n̂ + ηt n̂(n̂ − 1)))` to one mode. `â†²â² = n̂(n̂ − 1)` exactly,
/// so this is a diagonal phase map.
pub fn apply_kerr(state: &TwoModeState, mode: Mode, phi_t: f64, eta_t: f64) -> TwoModeState {
    let c = state.cutoff;
    let phases: Vec<C64> = (0..c)
        .map(|n| {
            let n = n as f64;
            C64::from_polar(1.0, -(phi_t * n + eta_t * n * (n - 1.0)))
        })
        .collect();
    let mut amplitudes = state.amplitudes.clone();
    for n_a in 0..c {
        for n_b in 0..c {
            let n = match mode {
                Mode::A => n_a,
                Mode::B => n_b,
            };
            amplitudes[n_a * c + n_b] *= phases[n];
        }
    }
    TwoModeState {
        cutoff: c,
        amplitudes,
    }
}

/// A dense operator on a truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let hermitian = (&matrix - matrix.adjoint())
            .iter()
            .all(|z| z.norm() <= 1e-12 * scale);
        Ok(Self { matrix, hermitian })
    }

    /// `â` with `⟨n − 1|â|n⟩ = √n`.
    pub fn annihilation(cutoff: usize) -> Self {
        let mut m = DMatrix::zeros(cutoff, cutoff);
        for n in 1..cutoff {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self {
            matrix: m,
            hermitian: false,
        }
    }

    pub fn creation(cutoff: usize) -> Self {
        Self::annihilation(cutoff).adjoint()
    }

    pub fn number(cutoff: usize) -> Self {
        let m = DMatrix::from_fn(cutoff, cutoff, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            matrix: m,
            hermitian: true,
        }
    }

    pub fn identity(cutoff: usize) -> Self {
        Self {
            matrix: DMatrix::identity(cutoff, cutoff),
            hermitian: true,
        }
    }

    /// `X̂ = (â + â†)/2`.
    pub fn quadrature_x(cutoff: usize) -> Self {
        let a = Self::annihilation(cutoff).matrix;
        Self {
            matrix: (&a + a.adjoint()) * C64::new(0.5, 0.0),
            hermitian: true,
        }
    }

    /// `Ŷ = −i(â − â†)/2`.
    pub fn quadrature_y(cutoff: usize) -> Self {
        let a = Self::annihilation(cutoff).matrix;
        Self {
            matrix: (&a - a.adjoint()) * C64::new(0.0, -0.5),
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rhs.dim(),
            });
        }
        Self::new(&self.matrix * &rhs.matrix)
    }

    /// Tensor product `self ⊗ rhs`, matching the `(n_a, n_b)` row-major layout.
    pub fn kron(&self, rhs: &Operator) -> Self {
        Self {
            matrix: self.matrix.kronecker(&rhs.matrix),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// `⟨ψ|O|ψ⟩` for an operator acting on the full space of `state`.
pub fn expectation<K: Ket>(state: &K, op: &Operator) -> Result<C64> {
    let psi = state.amplitudes();
    if op.dim() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            actual: op.dim(),
        });
    }
    let m = &op.matrix;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..psi.len() {
        let mut row = C64::new(0.0, 0.0);
        for (j, pj) in psi.iter().enumerate() {
            row += m[(i, j)] * pj;
        }
        acc += psi[i].conj() * row;
    }
    Ok(acc)
}

/// `⟨ψ|O ⊗ 1|ψ⟩` (or `1 ⊗ O`) for a single-mode operator on one mode.
pub fn mode_expectation(state: &TwoModeState, mode: Mode, op: &Operator) -> Result<C64> {
    let c = state.cutoff;
    if op.dim() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            actual: op.dim(),
        });
    }
    let amp = |own: usize, other: usize| match mode {
        Mode::A => state.amplitudes[own * c + other],
        Mode::B => state.amplitudes[other * c + own],
    };
    let m = &op.matrix;
    let mut acc = C64::new(0.0, 0.0);
    for other in 0..c {
        for i in 0..c {
            let left = amp(i, other);
            if left == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for j in 0..c {
                let mij = m[(i, j)];
                if mij != C64::new(0.0, 0.0) {
                    row += mij * amp(j, other);
                }
            }
            acc += left.conj() * row;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(recommended_cutoff(0.0), 10);
        assert_eq!(recommended_cutoff(1.0), 17);
        for n_bar in [1.0, 9.0, 100.0, 900.0, 1e4] {
            let n = recommended_cutoff(n_bar);
            assert!(n >= (n_bar + 6.0 * n_bar.sqrt() + 10.0).ceil() as usize);
            let s = coherent_state_with_tolerance(c(n_bar.sqrt(), 0.0), n, 1.0).unwrap();
            assert!(
                1.0 - s.norm_sqr() < 10.0 * CUTOFF_TAIL,
                "{n_bar}: {}",
                1.0 - s.norm_sqr()
            );
        }
        assert!((170..190).contains(&recommended_cutoff(100.0)));
    }

    #[test]
    fn coherent_zero_is_vacuum() {
        let s = coherent_state(c(0.0, 0.0), 8).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn coherent_mean_photon_number() {
        let s = coherent_state(c(1.0, 0.0), 32).unwrap();
        assert!((s.mean_photon_number() - 1.0).abs() < 1e-10);
        let s = coherent_state(c(2.0, 0.0), 40).unwrap();
        let n = expectation(&s, &Operator::number(40)).unwrap();
        assert!((n.re - 4.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_poisson_amplitude() {
        // e^{-2} 2^4 / sqrt(4!) evaluated directly, outside log space
        let expected = (-2.0f64).exp() * 16.0 / 24.0f64.sqrt();
        let s = coherent_state(c(2.0, 0.0), 40).unwrap();
        assert!((s.amplitudes()[4].re - expected).abs() < 1e-15);
        assert!((expected - 0.442_003_184_166_318_6).abs() < 1e-15);
    }

    #[test]
    fn coherent_truncation_error_carries_norm() {
        match coherent_state(c(5.0, 0.0), 10) {
            Err(Error::Truncation { cutoff, norm, .. }) => {
                assert_eq!(cutoff, 10);
                assert!(norm < 0.1);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
        let s = coherent_state_with_tolerance(c(5.0, 0.0), 10, 1.0).unwrap();
        assert!(s.norm_sqr() < 0.1);
        assert!(matches!(
            coherent_state(c(1.0, 0.0), 1),
            Err(Error::CutoffTooSmall(1))
        ));
    }

    #[test]
    fn large_coherent_state_does_not_overflow() {
        let n_bar: f64 = 900.0;
        let s = coherent_state(c(n_bar.sqrt(), 0.0), recommended_cutoff(n_bar)).unwrap();
        assert!((s.mean_photon_number() - n_bar).abs() < 1e-7);
    }

    #[test]
    fn operator_matrix_elements() {
        let a = Operator::annihilation(5);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i + 1 == j { (j as f64).sqrt() } else { 0.0 };
                assert_eq!(a.matrix()[(i, j)], c(want, 0.0));
            }
        }
        let n = Operator::creation(5).compose(&a).unwrap();
        let diff = n.matrix() - Operator::number(5).matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-15));
        assert!(n.is_hermitian());
        assert!(!a.is_hermitian());
        assert!(Operator::quadrature_x(4).is_hermitian());
        assert!(Operator::quadrature_y(4).is_hermitian());
    }

    #[test]
    fn expectation_values() {
        let vac = StateVector::vacuum(6).unwrap();
        assert_eq!(
            expectation(&vac, &Operator::number(6)).unwrap(),
            c(0.0, 0.0)
        );
        let s = coherent_state(c(1.0, 0.0), 32).unwrap();
        let x = expectation(&s, &Operator::quadrature_x(32)).unwrap();
        assert!((x.re - 1.0).abs() < 1e-12 && x.im.abs() < 1e-14);
        assert!(matches!(
            expectation(&s, &Operator::number(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn beamsplitter_identity_at_zero() {
        let s = TwoModeState::coherent(c(1.2, 0.3), c(-0.4, 0.5), 20).unwrap();
        let out = apply_beamsplitter(&s, 0.0).unwrap();
        for (x, y) in s.amplitudes().iter().zip(out.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn beamsplitter_single_photon() {
        let s = TwoModeState::fock(1, 0, 4).unwrap();
        let out = apply_beamsplitter(&s, FRAC_PI_4).unwrap();
        assert!((out.amplitude(1, 0) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
        assert!((out.amplitude(0, 1) - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-14);
    }

    #[test]
    fn beamsplitter_maps_coherent_to_coherent() {
        let alpha = c(1.5, 0.0);
        let cutoff = 30;
        let s = TwoModeState::coherent(alpha, c(0.0, 0.0), cutoff).unwrap();
        let out = apply_beamsplitter(&s, FRAC_PI_4).unwrap();
        let (cs, sn) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let want = TwoModeState::coherent(alpha * cs, alpha * c(0.0, -sn), cutoff).unwrap();
        assert!(out.fidelity(&want).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn beamsplitter_composition() {
        let s = TwoModeState::coherent(c(0.8, -0.6), c(0.3, 0.9), 25).unwrap();
        let twice =
            apply_beamsplitter(&apply_beamsplitter(&s, FRAC_PI_4).unwrap(), FRAC_PI_4).unwrap();
        let once = apply_beamsplitter(&s, FRAC_PI_2).unwrap();
        assert!(twice.fidelity(&once).unwrap() > 1.0 - 1e-10);
    }

    /// Dense Taylor-series exponential used as an independent check on the
    /// block eigendecomposition.
    fn taylor_expm(m: &DMatrix<C64>) -> DMatrix<C64> {
        let n = m.nrows();
        let norm = m.iter().map(|z| z.norm()).sum::<f64>();
        let squarings = (norm.log2().ceil().max(0.0) as u32) + 1;
        let scaled = m / C64::new(2f64.powi(squarings as i32), 0.0);
        let mut term = DMatrix::<C64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &scaled / C64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn beamsplitter_matches_dense_exponential() {
        let cutoff = 5;
        let a = Operator::annihilation(cutoff);
        let id = Operator::identity(cutoff);
        let ab_dag = a.kron(&id).compose(&id.kron(&a.adjoint())).unwrap();
        let generator = ab_dag.matrix() + ab_dag.matrix().adjoint();
        let theta = 0.37;
        let u = taylor_expm(&(generator * C64::new(0.0, -theta)));

        let s = TwoModeState::fock(2, 1, cutoff).unwrap();
        let psi = DVector::from_column_slice(s.amplitudes());
        let dense = u * psi;
        let block = apply_beamsplitter(&s, theta).unwrap();
        for (x, y) in dense.iter().zip(block.amplitudes()) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn kerr_phases() {
        let s = TwoModeState::coherent(c(1.0, 0.2), c(0.5, 0.0), 16).unwrap();
        assert_eq!(apply_kerr(&s, Mode::A, 0.0, 0.0), s);

        let f = TwoModeState::fock(2, 0, 4).unwrap();
        let out = apply_kerr(&f, Mode::A, 0.0, FRAC_PI_2);
        assert!((out.amplitude(2, 0) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kerr_mean_field_matches_series() {
        // ⟨â⟩ after Kerr evolution of |α = 1⟩ with ηt = 0.05, summed term by term
        let eta_t: f64 = 0.05;
        let mut series = c(0.0, 0.0);
        let mut weight = (-1.0f64).exp();
        for n in 0..60 {
            if n > 0 {
                weight /= n as f64;
            }
            series += weight * C64::from_polar(1.0, -2.0 * eta_t * n as f64);
        }
        let s = TwoModeState::coherent(c(1.0, 0.0), c(0.0, 0.0), 32).unwrap();
        let out = apply_kerr(&s, Mode::A, 0.0, eta_t);
        let a = mode_expectation(&out, Mode::A, &Operator::annihilation(32)).unwrap();
        assert!((a - series).norm() < 1e-12);
        assert!((a - c(0.990_06, -0.099_17)).norm() < 1e-4);
    }
}
