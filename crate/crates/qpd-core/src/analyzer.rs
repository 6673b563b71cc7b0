//! Layer-by-layer ordering-parameter propagation: decide whether a circuit
//! admits an all-positive quasiprobability decomposition, carrying the
//! per-mode parameters forward greedily (each layer's rule maximizes its
//! output given the inputs fixed by the previous layer), then check the
//! detectors' thresholds.
//!
//! Failure is a [`Verdict`], not an error: the first layer whose rule is
//! infeasible (or the detector check) is reported with its reason, and the
//! partial trace is kept for diagnostics.

use crate::gates::{
    beamsplitter_rule, cubic_rule, identity_rule, loss_rule, photon_subtraction_exact_rule,
    photon_subtraction_limit_rule, squeeze_rule, BsPolicy, GateSpec, RuleOutcome, Slack,
    SubtractionModel,
};
use crate::state::{depth_of_state, ModeOrdering, OrderingParam, StateSpec, DEFAULT_S_MAX};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate_index} touches mode {mode}, but the circuit has {mode_count} modes")]
    ModeOutOfRange {
        gate_index: usize,
        mode: usize,
        mode_count: usize,
    },
    #[error("beam splitter at layer {0} must act on two distinct modes")]
    DegenerateBeamSplitter(usize),
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid parameter at layer {layer}: {message}")]
    BadParameter { layer: usize, message: String },
    #[error("invalid input state {index}: {message}")]
    BadInput { index: usize, message: String },
    #[error("detector {index}: epsilon must lie in [0, 2)")]
    BadDetector { index: usize },
    #[error("circuit must have at least one mode")]
    NoModes,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalyzerError {
    #[error("layer index {0} out of range for loss insertion")]
    LayerOutOfRange(usize),
    #[error("cubic negativity budget must lie in [1e-5, 1e-1], got {0}")]
    BadCubicEpsilon(f64),
    #[error("s_max must be at least 1, got {0}")]
    BadSMax(f64),
}

/// Factorized single-mode detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorSpec {
    /// Projection onto coherent states; its POVM elements have positive
    /// representations for every final parameter down to the Husimi floor.
    Heterodyne,
    /// {vacuum projector, rest}: the click element dips negative at the
    /// origin unless the final parameter reaches the coherent boundary.
    IdealOnOff,
    /// {|1><1|, rest} with ordering slack ε for imperfect detection.
    SinglePhotonProjector { epsilon: f64 },
}

/// Minimal final ordering parameter for which all of the detector's POVM
/// elements have non-negative (-s)-ordered representations.
pub fn detector_threshold(d: DetectorSpec) -> OrderingParam {
    let t = match d {
        DetectorSpec::Heterodyne => -1.0,
        DetectorSpec::IdealOnOff => 1.0,
        DetectorSpec::SinglePhotonProjector { epsilon } => 1.0 - epsilon,
    };
    OrderingParam::with_cap(t, DEFAULT_S_MAX).expect("detector thresholds within range")
}

/// Full circuit description: factorized inputs, ordered gate layers,
/// factorized detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub mode_count: usize,
    pub inputs: Vec<StateSpec>,
    pub layers: Vec<GateSpec>,
    pub detectors: Vec<DetectorSpec>,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.mode_count == 0 {
            return Err(CircuitError::NoModes);
        }
        if self.inputs.len() != self.mode_count {
            return Err(CircuitError::LengthMismatch {
                what: "input states",
                expected: self.mode_count,
                got: self.inputs.len(),
            });
        }
        if self.detectors.len() != self.mode_count {
            return Err(CircuitError::LengthMismatch {
                what: "detectors",
                expected: self.mode_count,
                got: self.detectors.len(),
            });
        }
        for (i, state) in self.inputs.iter().enumerate() {
            let bad = |message: &str| CircuitError::BadInput {
                index: i,
                message: message.to_string(),
            };
            match state {
                StateSpec::Coherent { amplitude } => {
                    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
                        return Err(bad("coherent amplitude must be finite"));
                    }
                }
                StateSpec::Thermal { mean_photons } => {
                    if !mean_photons.is_finite() || *mean_photons < 0.0 {
                        return Err(bad("thermal occupation must be finite and non-negative"));
                    }
                }
                StateSpec::SqueezedVacuum { r, phase } => {
                    if !r.is_finite() || !phase.is_finite() {
                        return Err(bad("squeezing parameters must be finite"));
                    }
                }
                StateSpec::Fock { .. } => {}
            }
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if let DetectorSpec::SinglePhotonProjector { epsilon } = d {
                if !epsilon.is_finite() || *epsilon < 0.0 || *epsilon >= 2.0 {
                    return Err(CircuitError::BadDetector { index: i });
                }
            }
        }
        for (g, gate) in self.layers.iter().enumerate() {
            for mode in gate.modes() {
                if mode >= self.mode_count {
                    return Err(CircuitError::ModeOutOfRange {
                        gate_index: g,
                        mode,
                        mode_count: self.mode_count,
                    });
                }
            }
            let bad = |message: String| CircuitError::BadParameter { layer: g, message };
            match gate {
                GateSpec::BeamSplitter { mode_a, mode_b, theta } => {
                    if mode_a == mode_b {
                        return Err(CircuitError::DegenerateBeamSplitter(g));
                    }
                    if !theta.is_finite() {
                        return Err(bad("beam-splitter angle must be finite".into()));
                    }
                }
                GateSpec::Loss { eta, .. } => {
                    if !eta.is_finite() || !(0.0..=1.0).contains(eta) {
                        return Err(bad(format!("loss efficiency {eta} outside [0, 1]")));
                    }
                }
                GateSpec::CubicPhase { gamma, .. } => {
                    if !gamma.is_finite() || *gamma <= 0.0 {
                        return Err(bad(format!("cubicity {gamma} must be positive")));
                    }
                }
                GateSpec::PhotonSubtraction { model, .. } => match model {
                    SubtractionModel::Limit { kappa } => {
                        if !kappa.is_finite() || *kappa < 0.0 {
                            return Err(bad(format!("kappa {kappa} must be non-negative")));
                        }
                    }
                    SubtractionModel::Exact { theta, epsilon } => {
                        if !theta.is_finite() {
                            return Err(bad("subtraction angle must be finite".into()));
                        }
                        if !epsilon.is_finite() || *epsilon < 0.0 || *epsilon >= 2.0 {
                            return Err(bad(format!("epsilon {epsilon} outside [0, 2)")));
                        }
                    }
                },
                GateSpec::Displace { amplitude, .. } => {
                    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
                        return Err(bad("displacement must be finite".into()));
                    }
                }
                GateSpec::PhaseShift { angle, .. } => {
                    if !angle.is_finite() {
                        return Err(bad("phase angle must be finite".into()));
                    }
                }
                GateSpec::Squeeze { r, .. } => {
                    if !r.is_finite() {
                        return Err(bad("squeezing parameter must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Knobs of the propagation pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerOptions {
    pub policy: BsPolicy,
    pub s_max: f64,
    /// Negativity budget ε for cubic-phase layers.
    pub cubic_epsilon: f64,
}

impl Default for AnalyzerOptions {
    fn default() -> Self {
        AnalyzerOptions {
            policy: BsPolicy::Balanced,
            s_max: DEFAULT_S_MAX,
            cubic_epsilon: 1e-2,
        }
    }
}

impl AnalyzerOptions {
    pub fn validate(&self) -> Result<(), AnalyzerError> {
        if !(1e-5..=1e-1).contains(&self.cubic_epsilon) {
            return Err(AnalyzerError::BadCubicEpsilon(self.cubic_epsilon));
        }
        if !self.s_max.is_finite() || self.s_max < 1.0 {
            return Err(AnalyzerError::BadSMax(self.s_max));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Simulable,
    Failed,
}

/// Where and why the propagation stopped. `layer_index == layers.len()`
/// denotes the terminal detector check.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureInfo {
    pub layer_index: usize,
    pub gate: Option<GateSpec>,
    pub reason: String,
}

/// Result of the propagation pass: the per-layer-boundary ordering trace
/// and either success or the blocking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// One entry per layer boundary: `tau_trace[0]` holds the input depths,
    /// `tau_trace[i+1]` the parameters after layer i. On failure the trace
    /// stops at the last consistent boundary.
    pub tau_trace: Vec<ModeOrdering>,
    pub failure: Option<FailureInfo>,
    pub policy_used: BsPolicy,
}

impl Verdict {
    pub fn is_simulable(&self) -> bool {
        self.outcome == Outcome::Simulable
    }

    pub fn final_ordering(&self) -> &ModeOrdering {
        self.tau_trace.last().expect("trace has the input entry")
    }
}

/// Rule dispatch for one layer given the current parameters of the touched
/// modes.
pub fn layer_rule(
    gate: &GateSpec,
    taus: &[OrderingParam],
    options: &AnalyzerOptions,
) -> RuleOutcome {
    match gate {
        GateSpec::Displace { .. } | GateSpec::PhaseShift { .. } => identity_rule(taus[0]),
        GateSpec::Squeeze { r, .. } => squeeze_rule(taus[0], *r),
        GateSpec::Loss { eta, .. } => loss_rule(taus[0], *eta),
        GateSpec::BeamSplitter { theta, .. } => {
            beamsplitter_rule(taus[0], taus[1], *theta, options.policy)
        }
        GateSpec::PhotonSubtraction { model, .. } => match model {
            SubtractionModel::Limit { kappa } => photon_subtraction_limit_rule(taus[0], *kappa),
            SubtractionModel::Exact { theta, epsilon } => {
                photon_subtraction_exact_rule(taus[0], *theta, *epsilon)
            }
        },
        GateSpec::CubicPhase { gamma, .. } => cubic_rule(taus[0], *gamma, options.cubic_epsilon)
            .expect("validated options keep the threshold search convergent"),
    }
}

/// The propagation loop: τ₁ from the input depths, each layer advancing the
/// touched modes by its rule (untouched modes carry their parameter
/// unchanged), then the per-mode detector thresholds.
pub fn analyze(circuit: &CircuitSpec, options: &AnalyzerOptions) -> Verdict {
    debug_assert!(circuit.validate().is_ok());
    debug_assert!(options.validate().is_ok());
    let mut current: Vec<OrderingParam> = circuit
        .inputs
        .iter()
        .map(|state| depth_of_state(state, options.s_max))
        .collect();
    let mut trace = vec![ModeOrdering(current.clone())];

    for (i, gate) in circuit.layers.iter().enumerate() {
        let modes = gate.modes();
        let taus: Vec<OrderingParam> = modes.iter().map(|&m| current[m]).collect();
        let outcome = layer_rule(gate, &taus, options);
        if !outcome.feasible {
            return Verdict {
                outcome: Outcome::Failed,
                tau_trace: trace,
                failure: Some(FailureInfo {
                    layer_index: i,
                    gate: Some(gate.clone()),
                    reason: outcome
                        .reason
                        .unwrap_or_else(|| "no feasible output ordering".to_string()),
                }),
                policy_used: options.policy,
            };
        }
        let maxed = outcome.max_output.expect("feasible outcome carries outputs");
        for (slot, value) in modes.iter().zip(maxed) {
            current[*slot] = value;
        }
        trace.push(ModeOrdering(current.clone()));
    }

    for (m, detector) in circuit.detectors.iter().enumerate() {
        let threshold = detector_threshold(*detector);
        if current[m] < threshold {
            return Verdict {
                outcome: Outcome::Failed,
                tau_trace: trace,
                failure: Some(FailureInfo {
                    layer_index: circuit.layers.len(),
                    gate: None,
                    reason: format!(
                        "detector on mode {m} needs ordering >= {}, reached {}",
                        threshold.value(),
                        current[m].value()
                    ),
                }),
                policy_used: options.policy,
            };
        }
    }

    Verdict {
        outcome: Outcome::Simulable,
        tau_trace: trace,
        failure: None,
        policy_used: options.policy,
    }
}

/// Result of the loss-insertion scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossTolerance {
    AlreadySimulable,
    /// Minimal η-deficit (1 - η) of a uniform loss layer inserted before
    /// the given layer that flips the verdict.
    Deficit(f64),
    NotRescuable,
}

fn with_inserted_loss(circuit: &CircuitSpec, layer_index: usize, eta: f64) -> CircuitSpec {
    let mut patched = circuit.clone();
    for mode in (0..circuit.mode_count).rev() {
        patched.layers.insert(layer_index, GateSpec::Loss { mode, eta });
    }
    patched
}

/// How much loss, inserted (on every mode) before `layer_index`, makes a
/// failing circuit simulable. Bisection on η to resolution 1e-3; loss only
/// ever relaxes the parameters, so feasibility is monotone in 1 - η.
pub fn loss_tolerance(
    circuit: &CircuitSpec,
    layer_index: usize,
    options: &AnalyzerOptions,
) -> Result<LossTolerance, AnalyzerError> {
    if layer_index > circuit.layers.len() {
        return Err(AnalyzerError::LayerOutOfRange(layer_index));
    }
    if analyze(circuit, options).is_simulable() {
        return Ok(LossTolerance::AlreadySimulable);
    }
    let simulable_at = |eta: f64| {
        analyze(&with_inserted_loss(circuit, layer_index, eta), options).is_simulable()
    };
    if !simulable_at(0.0) {
        return Ok(LossTolerance::NotRescuable);
    }
    // largest feasible eta; f(0) = true, f(1) = false
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if simulable_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LossTolerance::Deficit(1.0 - 0.5 * (lo + hi)))
}

/// Per-layer slack diagnostics: each gate layer's distance from its
/// feasibility boundary, plus a terminal entry (index = layer count) for
/// the detector margin min over modes of (τ_final - threshold). On a failed
/// circuit the list stops at the failing layer, whose slack is negative.
pub fn slack_report(circuit: &CircuitSpec, options: &AnalyzerOptions) -> Vec<(usize, Slack)> {
    let mut current: Vec<OrderingParam> = circuit
        .inputs
        .iter()
        .map(|state| depth_of_state(state, options.s_max))
        .collect();
    let mut report = Vec::new();

    for (i, gate) in circuit.layers.iter().enumerate() {
        let modes = gate.modes();
        let taus: Vec<OrderingParam> = modes.iter().map(|&m| current[m]).collect();
        let outcome = layer_rule(gate, &taus, options);
        report.push((i, outcome.slack));
        if !outcome.feasible {
            return report;
        }
        let maxed = outcome.max_output.expect("feasible outcome carries outputs");
        for (slot, value) in modes.iter().zip(maxed) {
            current[*slot] = value;
        }
    }

    let detector_margin = circuit
        .detectors
        .iter()
        .enumerate()
        .map(|(m, d)| current[m].value() - detector_threshold(*d).value())
        .fold(f64::INFINITY, f64::min);
    report.push((circuit.layers.len(), Slack::Finite(detector_margin)));
    report
}
