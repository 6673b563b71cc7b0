//! Ordering parameters, mode-ordering vectors, and input-state specifications.
//!
//! The ordering parameter s ∈ [-1, s_max] selects a quasiprobability
//! representation: s = -1 is the Husimi Q-function, s = 0 the Wigner
//! function, s = 1 the Glauber P-function. Values above 1 are reachable
//! only by noisy states (e.g. thermal), never produced by unitary gates.
//!
//! The nonclassical depth of a state is the largest s at which its
//! representation is still a probability density; delta-measure limits
//! (a coherent state at s = 1) count as densities.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use thiserror::Error;

/// Default cap on ordering parameters. Values in (1, s_max] occur for
/// noisy states only; the cap keeps kernel existence checks simple.
pub const DEFAULT_S_MAX: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum OrderingError {
    #[error("ordering parameter {value} outside [-1, {s_max}]")]
    OutOfRange { value: f64, s_max: f64 },
    #[error("ordering parameter must be finite")]
    NonFinite,
    #[error("no smoothing kernel from s_lo = {s_lo} to s_hi = {s_hi} (need s_lo < s_hi)")]
    NoSmoothingKernel { s_hi: f64, s_lo: f64 },
}

/// Dimensionless ordering parameter s, totally ordered by its real value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OrderingParam(f64);

impl OrderingParam {
    /// Validates against the default cap [`DEFAULT_S_MAX`].
    pub fn new(value: f64) -> Result<Self, OrderingError> {
        Self::with_cap(value, DEFAULT_S_MAX)
    }

    pub fn with_cap(value: f64, s_max: f64) -> Result<Self, OrderingError> {
        if !value.is_finite() {
            return Err(OrderingError::NonFinite);
        }
        if value < -1.0 || value > s_max {
            return Err(OrderingError::OutOfRange { value, s_max });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Eq for OrderingParam {}

impl Ord for OrderingParam {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// One ordering parameter per mode: the diagonal of the multimode ordering
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOrdering(pub Vec<OrderingParam>);

impl ModeOrdering {
    pub fn uniform(s: OrderingParam, modes: usize) -> Self {
        Self(vec![s; modes])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|s| s.value()).collect()
    }
}

impl std::ops::Index<usize> for ModeOrdering {
    type Output = OrderingParam;
    fn index(&self, i: usize) -> &OrderingParam {
        &self.0[i]
    }
}

/// Supported single-mode input states.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Coherent { amplitude: Complex64 },
    Thermal { mean_photons: f64 },
    SqueezedVacuum { r: f64, phase: f64 },
    Fock { n: u32 },
}

impl StateSpec {
    pub fn vacuum() -> Self {
        StateSpec::Coherent {
            amplitude: Complex64::new(0.0, 0.0),
        }
    }

    /// Mean quadrature vector (q, p) = (2 Re α, 2 Im α); zero except for
    /// coherent states.
    pub fn mean_quadratures(&self) -> Vector2<f64> {
        match self {
            StateSpec::Coherent { amplitude } => Vector2::new(2.0 * amplitude.re, 2.0 * amplitude.im),
            _ => Vector2::zeros(),
        }
    }

    /// Symmetric-order (Wigner) quadrature covariance. `None` for Fock
    /// states with n ≥ 1, whose positive representation is non-Gaussian.
    pub fn gaussian_covariance(&self) -> Option<Matrix2<f64>> {
        match self {
            StateSpec::Coherent { .. } => Some(Matrix2::identity()),
            StateSpec::Thermal { mean_photons } => {
                Some(Matrix2::identity() * (2.0 * mean_photons + 1.0))
            }
            StateSpec::SqueezedVacuum { r, phase } => {
                let rot = Matrix2::new(phase.cos(), -phase.sin(), phase.sin(), phase.cos());
                let diag = Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
                Some(rot * diag * rot.transpose())
            }
            StateSpec::Fock { n: 0 } => Some(Matrix2::identity()),
            StateSpec::Fock { .. } => None,
        }
    }
}

/// Nonclassical-depth threshold τ: the supremum s such that the state's
/// (s)-ordered representation is a regular non-negative function (delta
/// limits counting as PDFs), capped at `s_max`.
///
/// Gaussian states: τ is the smallest eigenvalue of the quadrature
/// covariance. Fock states with n ≥ 1: τ = -1 (only the Q-function is a
/// PDF, as for every non-Gaussian pure state).
pub fn depth_of_state(state: &StateSpec, s_max: f64) -> OrderingParam {
    let tau = match state {
        StateSpec::Coherent { .. } => 1.0,
        StateSpec::Thermal { mean_photons } => 2.0 * mean_photons + 1.0,
        StateSpec::SqueezedVacuum { r, .. } => (-2.0 * r.abs()).exp(),
        StateSpec::Fock { n: 0 } => 1.0,
        StateSpec::Fock { .. } => -1.0,
    };
    OrderingParam::with_cap(tau.min(s_max), s_max).expect("depth is always within [-1, s_max]")
}

/// Closed-form (s)-ordered representation of the Fock projector |n><n| as
/// a density in quadrature units:
///
/// ```text
/// w(q,p) = 1/(4π) · 2/(1-s) · ((s+1)/(s-1))^n · L_n(4|α|²/(1-s²)) · e^(-2|α|²/(1-s))
/// ```
///
/// with |α|² = (q² + p²)/4, valid for s < 1. Negative for some (q,p)
/// whenever n ≥ 1 and s > -1; the Husimi value s = -1 is the continuous
/// limit (|α|²)^n e^(-|α|²)/n! of the expression.
pub fn fock_quasi_pdf(n: u32, s: f64, q: f64, p: f64) -> f64 {
    debug_assert!(s < 1.0);
    let a2 = 0.25 * (q * q + p * p);
    if (s + 1.0).abs() < 1e-14 {
        let mut v = (-a2).exp();
        for k in 1..=n {
            v *= a2 / f64::from(k);
        }
        return v / (4.0 * std::f64::consts::PI);
    }
    let ratio = (s + 1.0) / (s - 1.0);
    let x = 4.0 * a2 / (1.0 - s * s);
    (2.0 / (1.0 - s)) * ratio.powi(n as i32) * laguerre(n, x) * (-2.0 * a2 / (1.0 - s)).exp()
        / (4.0 * std::f64::consts::PI)
}

fn laguerre(n: u32, x: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 - x;
    for k in 1..n {
        let kf = f64::from(k);
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Variance of the complex Gaussian kernel linking the (s_hi)- and
/// (s_lo)-ordered representations of the same operator: smoothing by a
/// kernel with E|Δα|² = (s_hi - s_lo)/2 maps the former onto the latter.
/// In quadrature units the kernel covariance is (s_hi - s_lo)·I.
pub fn gaussian_smooth_relation(
    s_hi: OrderingParam,
    s_lo: OrderingParam,
) -> Result<f64, OrderingError> {
    if s_lo >= s_hi {
        return Err(OrderingError::NoSmoothingKernel {
            s_hi: s_hi.value(),
            s_lo: s_lo.value(),
        });
    }
    Ok((s_hi.value() - s_lo.value()) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> OrderingParam {
        OrderingParam::new(v).unwrap()
    }

    #[test]
    fn coherent_depth_is_one_for_any_amplitude() {
        for amp in [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.3, -0.7),
            Complex64::new(-4.0, 2.5),
        ] {
            let state = StateSpec::Coherent { amplitude: amp };
            assert_eq!(depth_of_state(&state, DEFAULT_S_MAX).value(), 1.0);
        }
    }

    #[test]
    fn fock_one_depth_is_minus_one() {
        let state = StateSpec::Fock { n: 1 };
        assert_eq!(depth_of_state(&state, DEFAULT_S_MAX).value(), -1.0);
        // Fock(0) is the vacuum, a Gaussian pure state.
        assert_eq!(depth_of_state(&StateSpec::Fock { n: 0 }, DEFAULT_S_MAX).value(), 1.0);
    }

    #[test]
    fn squeezed_vacuum_depth() {
        let state = StateSpec::SqueezedVacuum { r: 0.3, phase: 0.0 };
        let tau = depth_of_state(&state, DEFAULT_S_MAX).value();
        assert!((tau - (-0.6f64).exp()).abs() < 1e-15);
        // phase independence
        for phase in [0.4, 1.1, -2.0, 3.7] {
            let rotated = StateSpec::SqueezedVacuum { r: 0.3, phase };
            assert_eq!(depth_of_state(&rotated, DEFAULT_S_MAX).value(), tau);
        }
        // negative r squeezes the other quadrature, same depth
        let neg = StateSpec::SqueezedVacuum { r: -0.3, phase: 0.0 };
        assert_eq!(depth_of_state(&neg, DEFAULT_S_MAX).value(), tau);
    }

    #[test]
    fn thermal_depth_exceeds_one() {
        let state = StateSpec::Thermal { mean_photons: 0.5 };
        assert_eq!(depth_of_state(&state, DEFAULT_S_MAX).value(), 2.0);
        // capped at s_max
        let hot = StateSpec::Thermal { mean_photons: 5.0 };
        assert_eq!(depth_of_state(&hot, DEFAULT_S_MAX).value(), DEFAULT_S_MAX);
    }

    #[test]
    fn smoothing_kernel_variances() {
        assert_eq!(gaussian_smooth_relation(s(0.0), s(-1.0)).unwrap(), 0.5);
        assert_eq!(gaussian_smooth_relation(s(1.0), s(0.0)).unwrap(), 0.5);
        assert!(matches!(
            gaussian_smooth_relation(s(0.2), s(0.2)),
            Err(OrderingError::NoSmoothingKernel { .. })
        ));
        assert!(gaussian_smooth_relation(s(-0.5), s(0.5)).is_err());
    }

    #[test]
    fn ordering_param_range_checks() {
        assert!(OrderingParam::new(-1.0).is_ok());
        assert!(OrderingParam::new(3.0).is_ok());
        assert!(OrderingParam::new(-1.0001).is_err());
        assert!(OrderingParam::new(3.0001).is_err());
        assert!(OrderingParam::new(f64::NAN).is_err());
        assert!(OrderingParam::with_cap(1.5, 1.0).is_err());
    }

    #[test]
    fn squeezed_covariance_eigenvalues_are_phase_invariant() {
        let cov = StateSpec::SqueezedVacuum { r: 0.4, phase: 0.9 }
            .gaussian_covariance()
            .unwrap();
        let eig = cov.symmetric_eigen();
        let mut vals = [eig.eigenvalues[0], eig.eigenvalues[1]];
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - (-0.8f64).exp()).abs() < 1e-12);
        assert!((vals[1] - (0.8f64).exp()).abs() < 1e-12);
    }
}
