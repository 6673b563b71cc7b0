//! Per-gate ordering-parameter rules: for each supported gate or channel,
//! the maximal feasible output ordering parameter(s) given the input
//! parameter(s), such that the gate's transfer function is a regular
//! non-negative kernel.
//!
//! Single-mode Gaussian channels reduce to scalar inequalities; the beam
//! splitter mixes the two input parameters through the 2×2 PSD condition
//! diag(t) ⪯ Lᵀ diag(s) L, whose Pareto frontier is parametrized in closed
//! form (Schur complement) instead of generic SDP machinery.

use crate::cubic::{r_star_cached, CubicError};
use crate::state::OrderingParam;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("cubicity must be positive, got {0}")]
    InvalidCubicity(f64),
    #[error(transparent)]
    Cubic(#[from] CubicError),
}

/// Supported gates and channels with their physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Displace { mode: usize, amplitude: Complex64 },
    PhaseShift { mode: usize, angle: f64 },
    Squeeze { mode: usize, r: f64 },
    BeamSplitter { mode_a: usize, mode_b: usize, theta: f64 },
    Loss { mode: usize, eta: f64 },
    PhotonSubtraction { mode: usize, model: SubtractionModel },
    CubicPhase { mode: usize, gamma: f64 },
}

/// Photon subtraction either in the scaling limit θ = κ√ε, ε → 0, or with
/// an explicit mixing angle and detector imperfection ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubtractionModel {
    Limit { kappa: f64 },
    Exact { theta: f64, epsilon: f64 },
}

impl GateSpec {
    pub fn modes(&self) -> Vec<usize> {
        match self {
            GateSpec::Displace { mode, .. }
            | GateSpec::PhaseShift { mode, .. }
            | GateSpec::Squeeze { mode, .. }
            | GateSpec::Loss { mode, .. }
            | GateSpec::PhotonSubtraction { mode, .. }
            | GateSpec::CubicPhase { mode, .. } => vec![*mode],
            GateSpec::BeamSplitter { mode_a, mode_b, .. } => vec![*mode_a, *mode_b],
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(
            self,
            GateSpec::Displace { .. }
                | GateSpec::PhaseShift { .. }
                | GateSpec::Squeeze { .. }
                | GateSpec::BeamSplitter { .. }
                | GateSpec::CubicPhase { .. }
        )
    }
}

/// Vector-maximization policy for the beam splitter's Pareto frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BsPolicy {
    /// Maximize min(t_a, t_b), then the other coordinate.
    Balanced,
    /// Maximize w_a·t_a + w_b·t_b (weights positive).
    WeightedSum { w_a: f64, w_b: f64 },
    /// Maximize t_a first, then t_b.
    GreedyModeA,
    /// Maximize t_b first, then t_a.
    GreedyModeB,
}

impl Default for BsPolicy {
    fn default() -> Self {
        BsPolicy::Balanced
    }
}

/// Distance of the chosen output bound from the feasibility floor -1.
/// A rule whose bound diverges to -∞ (photon subtraction past the pole,
/// cubic gate on a Wigner-negative input) reports `UnboundedBelow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slack {
    Finite(f64),
    UnboundedBelow,
}

impl Slack {
    pub fn as_f64(&self) -> f64 {
        match self {
            Slack::Finite(v) => *v,
            Slack::UnboundedBelow => f64::NEG_INFINITY,
        }
    }
}

/// Outcome of one gate rule: the maximal output ordering parameter(s) on the
/// gate's modes when the positivity condition is satisfiable, or the reason
/// it is not.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    pub feasible: bool,
    /// Present iff feasible; one entry per gate mode, in `GateSpec::modes`
    /// order.
    pub max_output: Option<Vec<OrderingParam>>,
    pub slack: Slack,
    pub reason: Option<String>,
}

impl RuleOutcome {
    fn feasible(values: Vec<f64>, slack: f64) -> Self {
        let cap = values.iter().fold(1.0f64, |m, v| m.max(*v));
        RuleOutcome {
            feasible: true,
            max_output: Some(
                values
                    .into_iter()
                    .map(|v| {
                        // frontier arithmetic can land an ulp below the floor
                        OrderingParam::with_cap(v.max(-1.0), cap)
                            .expect("rule output within [-1, cap]")
                    })
                    .collect(),
            ),
            slack: Slack::Finite(slack),
            reason: None,
        }
    }

    fn infeasible(slack: Slack, reason: &str) -> Self {
        RuleOutcome {
            feasible: false,
            max_output: None,
            slack,
            reason: Some(reason.to_string()),
        }
    }
}

/// Identity channel, also Displace and PhaseShift: Euclidean transformations
/// of phase space leave the ordering parameter unchanged, and s_out ≤ s_in
/// is both necessary and sufficient for a regular positive kernel.
pub fn identity_rule(s_in: OrderingParam) -> RuleOutcome {
    RuleOutcome::feasible(vec![s_in.value()], s_in.value() + 1.0)
}

/// Loss channel with efficiency η: s_out ≤ 1 - η(1 - s_in), from the
/// Gaussian-channel positivity condition with L = √η. Always feasible, and
/// strictly relaxing for η < 1, s_in < 1: losses drive the parameter toward
/// the classical boundary.
pub fn loss_rule(s_in: OrderingParam, eta: f64) -> RuleOutcome {
    debug_assert!((0.0..=1.0).contains(&eta));
    let bound = 1.0 - eta * (1.0 - s_in.value());
    RuleOutcome::feasible(vec![bound], bound + 1.0)
}

/// Squeezing gate: s_out ≤ s_in·e^(-2|r|) for s_in ≥ 0, s_out ≤ s_in·e^(+2|r|)
/// for s_in ≤ 0. The second branch drops below -1 when |r| > -½·ln|s_in|:
/// sufficiently nonclassical Wigner-negative inputs make the squeezer
/// unsimulable no matter how the output is parametrized.
pub fn squeeze_rule(s_in: OrderingParam, r: f64) -> RuleOutcome {
    let s = s_in.value();
    let bound = if s >= 0.0 {
        s * (-2.0 * r.abs()).exp()
    } else {
        s * (2.0 * r.abs()).exp()
    };
    if bound >= -1.0 {
        RuleOutcome::feasible(vec![bound], bound + 1.0)
    } else {
        RuleOutcome::infeasible(
            Slack::Finite(bound + 1.0),
            "squeezing on Wigner-negative input exceeds depth budget",
        )
    }
}

/// Rotation mixing matrix M = Lᵀ·diag(s_a, s_b)·L for mixing angle θ.
fn bs_mixed_matrix(s_a: f64, s_b: f64, theta: f64) -> (f64, f64, f64) {
    let (sin, cos) = theta.sin_cos();
    let m11 = s_a * cos * cos + s_b * sin * sin;
    let m22 = s_a * sin * sin + s_b * cos * cos;
    let m12 = (s_a - s_b) * cos * sin;
    (m11, m22, m12)
}

/// Beam splitter: returns the policy-selected point of the Pareto frontier
/// of { diag(t_a, t_b) ⪯ M, t ≥ -1 } with M = Lᵀ·diag(s_a, s_b)·L.
/// The frontier is t_b = M22 - M12²/(M11 - t_a) for t_a < M11; with
/// M12 = 0 the constraints decouple and every policy returns (M11, M22).
/// The constraint set is never empty (λ_min(M) = min(s_a, s_b) ≥ -1).
pub fn beamsplitter_rule(
    s_a: OrderingParam,
    s_b: OrderingParam,
    theta: f64,
    policy: BsPolicy,
) -> RuleOutcome {
    let (sa, sb) = (s_a.value(), s_b.value());
    let (m11, m22, m12) = bs_mixed_matrix(sa, sb, theta);
    let scale = 1.0 + sa.abs() + sb.abs();
    if m12.abs() <= 1e-12 * scale {
        let t = vec![m11, m22];
        let slack = m11.min(m22) + 1.0;
        return RuleOutcome::feasible(t, slack);
    }
    let (t_a, t_b) = match policy {
        BsPolicy::Balanced => {
            // max of min(t_a, t_b) sits on the diagonal crossing of the
            // frontier, which is the smaller eigenvalue of M; both
            // coordinates are pinned there.
            let t = sa.min(sb);
            (t, t)
        }
        BsPolicy::GreedyModeA => (m11 - m12 * m12 / (m22 + 1.0), -1.0),
        BsPolicy::GreedyModeB => (-1.0, m22 - m12 * m12 / (m11 + 1.0)),
        BsPolicy::WeightedSum { w_a, w_b } => {
            if !(w_a > 0.0 && w_b > 0.0) {
                return RuleOutcome::infeasible(
                    Slack::Finite(f64::NAN),
                    "weighted-sum policy requires positive weights",
                );
            }
            let ta = m11 - m12.abs() * (w_b / w_a).sqrt();
            if ta < -1.0 {
                (-1.0, m22 - m12 * m12 / (m11 + 1.0))
            } else {
                let tb = m22 - m12 * m12 / (m11 - ta);
                if tb < -1.0 {
                    (m11 - m12 * m12 / (m22 + 1.0), -1.0)
                } else {
                    (ta, tb)
                }
            }
        }
    };
    let slack = t_a.min(t_b) + 1.0;
    RuleOutcome::feasible(vec![t_a, t_b], slack)
}

/// Photon subtraction in the scaling limit θ = κ√ε, ε → 0:
/// s_out ≤ (s_in - (1 - s_in)κ²) / (1 - (1 - s_in)κ²), with the bound
/// diverging to -∞ as the denominator crosses zero.
pub fn photon_subtraction_limit_rule(s_in: OrderingParam, kappa: f64) -> RuleOutcome {
    debug_assert!(kappa >= 0.0);
    let s = s_in.value();
    let k2 = kappa * kappa;
    let denom = 1.0 - (1.0 - s) * k2;
    if denom <= 0.0 {
        return RuleOutcome::infeasible(Slack::UnboundedBelow, "subtraction bound unbounded below");
    }
    let bound = (s - (1.0 - s) * k2) / denom;
    if bound >= -1.0 {
        RuleOutcome::feasible(vec![bound], bound + 1.0)
    } else {
        RuleOutcome::infeasible(
            Slack::Finite(bound + 1.0),
            "subtraction output below the Husimi floor",
        )
    }
}

/// Photon subtraction as the explicit two-mode block: input ordering
/// diag(s_in, 1) (signal ⊗ vacuum tap), output diag(s_out, 1-ε) (the
/// measured mode carries the sign-flipped detector parameter). Returns the
/// largest s_out ≥ -1 keeping M - diag(s_out, 1-ε) ⪰ 0. For ε = 0 and θ
/// not a multiple of π the minimal eigenvalue is negative for every s_out:
/// ideal photodetection makes the block unsimulable.
pub fn photon_subtraction_exact_rule(
    s_in: OrderingParam,
    theta: f64,
    epsilon: f64,
) -> RuleOutcome {
    debug_assert!((0.0..2.0).contains(&epsilon));
    let s = s_in.value();
    let (m11, m22, m12) = bs_mixed_matrix(s, 1.0, theta);
    let a22 = m22 - 1.0 + epsilon;
    let scale = 1.0 + s.abs();
    let degenerate_tol = 1e-12 * scale;
    let bound = if a22 > degenerate_tol {
        m11 - m12 * m12 / a22
    } else if m12.abs() <= degenerate_tol && a22 >= -degenerate_tol {
        // θ a multiple of π (or s_in = 1): the block decouples
        m11
    } else {
        return RuleOutcome::infeasible(
            Slack::UnboundedBelow,
            "ideal photodetection: transfer function negative for every output parameter",
        );
    };
    if bound >= -1.0 {
        RuleOutcome::feasible(vec![bound], bound + 1.0)
    } else {
        RuleOutcome::infeasible(
            Slack::Finite(bound + 1.0),
            "subtraction output below the Husimi floor",
        )
    }
}

/// Cubic phase gate with cubicity γ: requires a Wigner-positive input
/// budget (s_in > 0) and bounds the output by
/// s_out ≤ s_in - 2^(1/3)·γ^(1/3)·r*(ε), where r*(ε) caps the transfer
/// function's negativity at -ε.
///
/// Both orderings of the transfer function must be strictly negative for
/// the defining integral to converge, so the usable output parameter is
/// additionally capped below 0: `max_output` carries min(bound, 0) (the
/// supremum 0 is open), while `slack` keeps the raw bound's distance from
/// -1 so the linear budget arithmetic stays visible.
pub fn cubic_rule(
    s_in: OrderingParam,
    gamma: f64,
    epsilon_neg: f64,
) -> Result<RuleOutcome, RuleError> {
    if !(gamma > 0.0) {
        return Err(RuleError::InvalidCubicity(gamma));
    }
    let s = s_in.value();
    if s <= 0.0 {
        return Ok(RuleOutcome::infeasible(
            Slack::UnboundedBelow,
            "cubic gate on Wigner-negative or boundary input",
        ));
    }
    let rstar = r_star_cached(epsilon_neg)?;
    let bound = s - 2f64.powf(1.0 / 3.0) * gamma.powf(1.0 / 3.0) * rstar;
    if bound >= -1.0 {
        Ok(RuleOutcome::feasible(vec![bound.min(0.0)], bound + 1.0))
    } else {
        Ok(RuleOutcome::infeasible(
            Slack::Finite(bound + 1.0),
            "cubicity exceeds the ordering budget",
        ))
    }
}
