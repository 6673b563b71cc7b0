//! Boundary curves (s_in, max s_out) of the single-mode gate rules, in the
//! form the plotting pipeline consumes.

use crate::gates::{photon_subtraction_limit_rule, squeeze_rule};
use crate::state::OrderingParam;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub s_in: f64,
    /// Closed-form bound, reported even when it dips below the -1 floor.
    pub s_out_bound: f64,
    pub feasible: bool,
}

fn param(v: f64) -> OrderingParam {
    OrderingParam::with_cap(v, v.max(1.0)).expect("grid values are finite and >= -1")
}

/// Squeezing-gate boundary: slope e^(-2|r|) on the classical side,
/// e^(+2|r|) on the Wigner-negative side.
pub fn squeeze_boundary(r: f64, s_in_grid: &[f64]) -> Vec<CurvePoint> {
    s_in_grid
        .iter()
        .map(|&s| {
            let bound = if s >= 0.0 {
                s * (-2.0 * r.abs()).exp()
            } else {
                s * (2.0 * r.abs()).exp()
            };
            CurvePoint {
                s_in: s,
                s_out_bound: bound,
                feasible: squeeze_rule(param(s), r).feasible,
            }
        })
        .collect()
}

/// Photon-subtraction boundary in the scaling limit, for one κ. Points past
/// the pole of the bound are reported infeasible with a -∞ bound.
pub fn subtraction_boundary(kappa: f64, s_in_grid: &[f64]) -> Vec<CurvePoint> {
    s_in_grid
        .iter()
        .map(|&s| {
            let outcome = photon_subtraction_limit_rule(param(s), kappa);
            let k2 = kappa * kappa;
            let denom = 1.0 - (1.0 - s) * k2;
            let bound = if denom > 0.0 {
                (s - (1.0 - s) * k2) / denom
            } else {
                f64::NEG_INFINITY
            };
            CurvePoint {
                s_in: s,
                s_out_bound: bound,
                feasible: outcome.feasible,
            }
        })
        .collect()
}

/// Smallest input parameter at which the subtraction bound still clears the
/// -1 floor, located by bisection to 1e-6. Solving the bound equation gives
/// (2κ² - 1)/(2κ² + 1) in closed form; the bisection is the independent
/// route used to confirm it.
pub fn subtraction_endpoint(kappa: f64) -> f64 {
    if kappa == 0.0 {
        return -1.0;
    }
    let feasible = |s: f64| photon_subtraction_limit_rule(param(s), kappa).feasible;
    if feasible(-1.0) {
        return -1.0;
    }
    let mut lo = -1.0;
    let mut hi = 1.0;
    debug_assert!(feasible(hi));
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeeze_boundary_slopes() {
        let grid: Vec<f64> = (0..7).map(|i| -0.9 + 0.3 * i as f64).collect();
        let points = squeeze_boundary(0.3, &grid);
        for point in &points {
            let slope = if point.s_in >= 0.0 {
                (-0.6f64).exp()
            } else {
                0.6f64.exp()
            };
            assert_eq!(point.s_out_bound, point.s_in * slope);
        }
        // feasibility flips exactly where the bound crosses -1
        let deep = squeeze_boundary(0.3, &[-0.9]);
        assert!(!deep[0].feasible);
        assert!(deep[0].s_out_bound < -1.0);
    }

    #[test]
    fn subtraction_diagonal_at_zero_kappa() {
        let grid: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        for point in subtraction_boundary(0.0, &grid) {
            assert_eq!(point.s_out_bound, point.s_in);
            assert!(point.feasible);
        }
    }

    #[test]
    fn subtraction_endpoints_match_closed_form() {
        for kappa in [0.25, 0.5, 0.75, 1.0, 1.5] {
            let want = (2.0 * kappa * kappa - 1.0) / (2.0 * kappa * kappa + 1.0);
            let got = subtraction_endpoint(kappa);
            assert!(
                (got - want).abs() < 1e-6,
                "kappa {kappa}: endpoint {got} want {want}"
            );
        }
        assert_eq!(subtraction_endpoint(0.0), -1.0);
        // κ = 0.5 endpoint is -1/3
        assert!((subtraction_endpoint(0.5) + 1.0 / 3.0).abs() < 1e-6);
    }
}
