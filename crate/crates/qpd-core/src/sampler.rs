//! The sampling half of the decision procedure: draw a phase-space point
//! from the input representation, push it through the positive Gaussian
//! transfer kernels layer by layer, then draw measurement outcomes. When
//! the analyzer's pass succeeds, the resulting outcome statistics reproduce
//! the circuit's Born probabilities.
//!
//! Everything is stated in quadrature units (vacuum covariance = identity,
//! point = (2 Re α, 2 Im α)); see the crate-level conventions.

use crate::analyzer::{detector_threshold, CircuitSpec, DetectorSpec, Verdict};
use crate::gates::GateSpec;
use crate::state::{depth_of_state, fock_quasi_pdf, ModeOrdering, OrderingParam, StateSpec};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("Fock inputs have no Gaussian positive representation; mode {0}")]
    FockInput(usize),
    #[error("no positive Gaussian kernel exists for {0}")]
    NonGaussianGate(&'static str),
    #[error("(s_in, s_out) pair infeasible for this gate: covariance eigenvalue {0:e} < 0")]
    InfeasibleOrdering(f64),
    #[error("requested ordering {requested} exceeds the state's depth {depth}")]
    OrderingAboveDepth { requested: f64, depth: f64 },
    #[error("final ordering {tau} below detector threshold {threshold}")]
    BelowDetectorThreshold { tau: f64, threshold: f64 },
    #[error("sampling requires a simulable verdict")]
    VerdictNotSimulable,
}

/// Positive Gaussian transfer kernel on the quadratures of a gate's modes:
/// output = map·input + offset + noise, noise ~ N(0, covariance). The
/// kernel integrates to one over its outputs for every input, so it acts
/// as a Markov kernel. Zero covariance is an exact point map (delta
/// kernels at feasibility boundaries are represented explicitly, not as
/// tiny Gaussians).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    pub map: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Eigen-factor L with covariance = L·Lᵀ, for sampling.
    noise_factor: DMatrix<f64>,
}

impl GaussianKernel {
    fn new(
        map: DMatrix<f64>,
        offset: DVector<f64>,
        covariance: DMatrix<f64>,
    ) -> Result<Self, SamplerError> {
        let eig = covariance.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(SamplerError::InfeasibleOrdering(min));
        }
        let n = covariance.nrows();
        let mut factor = eig.eigenvectors.clone();
        for j in 0..n {
            let scale = eig.eigenvalues[j].max(0.0).sqrt();
            for i in 0..n {
                factor[(i, j)] *= scale;
            }
        }
        Ok(GaussianKernel {
            map,
            offset,
            covariance,
            noise_factor: factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.map.nrows()
    }

    /// Push a point through: deterministic part plus one noise draw.
    pub fn sample<R: Rng>(&self, input: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let n = self.dim();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.map * input + &self.offset + &self.noise_factor * z
    }

    /// Mean-map and covariance pushforward of a Gaussian (mean, cov).
    pub fn push_gaussian(
        &self,
        mean: &DVector<f64>,
        cov: &DMatrix<f64>,
    ) -> (DVector<f64>, DMatrix<f64>) {
        (
            &self.map * mean + &self.offset,
            &self.map * cov * self.map.transpose() + &self.covariance,
        )
    }
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (sin, cos) = theta.sin_cos();
    Matrix2::new(cos, sin, -sin, cos)
}

/// Positive Gaussian kernel realizing a gate between the (s_in)- and
/// (s_out)-ordered representations of its modes. The mean map is the gate's
/// symplectic/attenuation action; the covariance absorbs the ordering slack
/// so that pushing an input state's (s_in)-Gaussian through the kernel
/// yields exactly the output state's (s_out)-Gaussian.
pub fn kernel_for_gate(
    gate: &GateSpec,
    s_in: &ModeOrdering,
    s_out: &ModeOrdering,
) -> Result<GaussianKernel, SamplerError> {
    match gate {
        GateSpec::Displace { amplitude, .. } => {
            let (si, so) = (s_in[0].value(), s_out[0].value());
            GaussianKernel::new(
                DMatrix::identity(2, 2),
                DVector::from_column_slice(&[2.0 * amplitude.re, 2.0 * amplitude.im]),
                DMatrix::identity(2, 2) * (si - so),
            )
        }
        GateSpec::PhaseShift { angle, .. } => {
            let (si, so) = (s_in[0].value(), s_out[0].value());
            GaussianKernel::new(
                DMatrix::from_fn(2, 2, |i, j| rotation(-*angle)[(i, j)]),
                DVector::zeros(2),
                DMatrix::identity(2, 2) * (si - so),
            )
        }
        GateSpec::Loss { eta, .. } => {
            let (si, so) = (s_in[0].value(), s_out[0].value());
            GaussianKernel::new(
                DMatrix::identity(2, 2) * eta.sqrt(),
                DVector::zeros(2),
                DMatrix::identity(2, 2) * (1.0 - eta - so + eta * si),
            )
        }
        GateSpec::Squeeze { r, .. } => {
            let (si, so) = (s_in[0].value(), s_out[0].value());
            let map = DMatrix::from_diagonal(&DVector::from_column_slice(&[
                (-r).exp(),
                r.exp(),
            ]));
            let cov = DMatrix::from_diagonal(&DVector::from_column_slice(&[
                si * (-2.0 * r).exp() - so,
                si * (2.0 * r).exp() - so,
            ]));
            GaussianKernel::new(map, DVector::zeros(2), cov)
        }
        GateSpec::BeamSplitter { theta, .. } => {
            let (sa, sb) = (s_in[0].value(), s_in[1].value());
            let (ta, tb) = (s_out[0].value(), s_out[1].value());
            let l = rotation(*theta);
            // mode-block mean map L ⊗ I₂ on (q_a, p_a, q_b, p_b)
            let mut map = DMatrix::zeros(4, 4);
            for mi in 0..2 {
                for mj in 0..2 {
                    map[(2 * mi, 2 * mj)] = l[(mi, mj)];
                    map[(2 * mi + 1, 2 * mj + 1)] = l[(mi, mj)];
                }
            }
            // (L diag(s) Lᵀ - diag(t)) ⊗ I₂
            let m = l * Matrix2::new(sa, 0.0, 0.0, sb) * l.transpose();
            let mut cov = DMatrix::zeros(4, 4);
            let slack = Matrix2::new(m[(0, 0)] - ta, m[(0, 1)], m[(1, 0)], m[(1, 1)] - tb);
            for mi in 0..2 {
                for mj in 0..2 {
                    cov[(2 * mi, 2 * mj)] = slack[(mi, mj)];
                    cov[(2 * mi + 1, 2 * mj + 1)] = slack[(mi, mj)];
                }
            }
            GaussianKernel::new(map, DVector::zeros(4), cov)
        }
        GateSpec::CubicPhase { .. } => Err(SamplerError::NonGaussianGate(
            "the cubic phase gate (its transfer function is only bounded-negative)",
        )),
        GateSpec::PhotonSubtraction { .. } => Err(SamplerError::NonGaussianGate(
            "photon subtraction (a terminal measurement block)",
        )),
    }
}

/// Draw a phase point from the factorized (τ)-ordered input representation:
/// each mode independently Gaussian with covariance σ - τ·I (a point mass
/// at the coherent boundary τ = depth for pure coherent inputs).
pub fn sample_input<R: Rng>(
    states: &[StateSpec],
    tau: &ModeOrdering,
    rng: &mut R,
) -> Result<DVector<f64>, SamplerError> {
    let mut point = DVector::zeros(2 * states.len());
    for (m, state) in states.iter().enumerate() {
        let t = tau[m].value();
        let depth = depth_of_state(state, t.max(crate::state::DEFAULT_S_MAX)).value();
        if t > depth + 1e-12 {
            return Err(SamplerError::OrderingAboveDepth {
                requested: t,
                depth,
            });
        }
        let cov = match state.gaussian_covariance() {
            Some(c) => c,
            None => return Err(SamplerError::FockInput(m)),
        };
        let mean = state.mean_quadratures();
        let rep = cov - Matrix2::identity() * t;
        let eig = rep.symmetric_eigen();
        let mut draw = Vector2::zeros();
        for j in 0..2 {
            let scale = eig.eigenvalues[j].max(0.0).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            draw += eig.eigenvectors.column(j) * (scale * z);
        }
        point[2 * m] = mean[0] + draw[0];
        point[2 * m + 1] = mean[1] + draw[1];
    }
    Ok(point)
}

/// One detector click or heterodyne readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementOutcome {
    Heterodyne { q: f64, p: f64 },
    Click(bool),
}

/// Outcome weights of a two-element projective detector at a phase point:
/// (π × the (-τ)-ordered representation of each element), which sum to one
/// by POVM completeness. Tiny negative dips (an imperfect single-photon
/// detector below the coherent boundary) are clamped to zero.
fn click_weight_fock(n: u32, tau: f64, q: f64, p: f64) -> f64 {
    let w = fock_quasi_pdf(n, -tau, q, p);
    (4.0 * std::f64::consts::PI * w).clamp(0.0, 1.0)
}

/// Draw one detector outcome at a final phase point.
///
/// Heterodyne adds Gaussian noise with per-quadrature variance (1 + τ) in
/// these units (complex-modulus variance (1 + τ)/2), degenerating to the
/// point itself at the Husimi floor τ = -1. Projective detectors draw a
/// Bernoulli from the element weights at the point.
pub fn sample_measurement<R: Rng>(
    detector: DetectorSpec,
    tau_final: OrderingParam,
    point: (f64, f64),
    rng: &mut R,
) -> Result<MeasurementOutcome, SamplerError> {
    let tau = tau_final.value();
    let threshold = detector_threshold(detector).value();
    if tau < threshold {
        return Err(SamplerError::BelowDetectorThreshold { tau, threshold });
    }
    let (q, p) = point;
    match detector {
        DetectorSpec::Heterodyne => {
            let sd = (1.0 + tau).max(0.0).sqrt();
            let zq: f64 = rng.sample(StandardNormal);
            let zp: f64 = rng.sample(StandardNormal);
            Ok(MeasurementOutcome::Heterodyne {
                q: q + sd * zq,
                p: p + sd * zp,
            })
        }
        DetectorSpec::IdealOnOff => {
            let no_click = click_weight_fock(0, tau, q, p);
            Ok(MeasurementOutcome::Click(rng.gen::<f64>() >= no_click))
        }
        DetectorSpec::SinglePhotonProjector { .. } => {
            let click = click_weight_fock(1, tau, q, p);
            Ok(MeasurementOutcome::Click(rng.gen::<f64>() < click))
        }
    }
}

/// One simulated shot: the phase points at every layer boundary and the
/// final measurement outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub phase_points: Vec<DVector<f64>>,
    pub outcome: Vec<MeasurementOutcome>,
}

fn kernels_for_trace(
    circuit: &CircuitSpec,
    verdict: &Verdict,
) -> Result<Vec<(Vec<usize>, GaussianKernel)>, SamplerError> {
    circuit
        .layers
        .iter()
        .enumerate()
        .map(|(i, gate)| {
            let modes = gate.modes();
            let s_in = ModeOrdering(modes.iter().map(|&m| verdict.tau_trace[i][m]).collect());
            let s_out =
                ModeOrdering(modes.iter().map(|&m| verdict.tau_trace[i + 1][m]).collect());
            Ok((modes, kernel_for_gate(gate, &s_in, &s_out)?))
        })
        .collect()
}

/// Generate `n` independent records. Each record draws from its own RNG
/// stream derived from (seed, record index), so results are reproducible
/// regardless of how the records are scheduled across threads.
pub fn run_sampling(
    circuit: &CircuitSpec,
    verdict: &Verdict,
    n: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>, SamplerError> {
    if !verdict.is_simulable() {
        return Err(SamplerError::VerdictNotSimulable);
    }
    let kernels = kernels_for_trace(circuit, verdict)?;
    let tau_in = &verdict.tau_trace[0];
    let tau_final = verdict.final_ordering();

    // fail fast on unsupported inputs before spawning workers
    for (m, state) in circuit.inputs.iter().enumerate() {
        if state.gaussian_covariance().is_none() {
            return Err(SamplerError::FockInput(m));
        }
    }

    (0..n)
        .into_par_iter()
        .map(|record| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(record as u64 + 1);
            let mut point = sample_input(&circuit.inputs, tau_in, &mut rng)?;
            let mut phase_points = vec![point.clone()];
            for (modes, kernel) in &kernels {
                let local = DVector::from_fn(2 * modes.len(), |i, _| {
                    point[2 * modes[i / 2] + i % 2]
                });
                let pushed = kernel.sample(&local, &mut rng);
                for (slot, &mode) in modes.iter().enumerate() {
                    point[2 * mode] = pushed[2 * slot];
                    point[2 * mode + 1] = pushed[2 * slot + 1];
                }
                phase_points.push(point.clone());
            }
            let outcome = circuit
                .detectors
                .iter()
                .enumerate()
                .map(|(m, d)| {
                    sample_measurement(
                        *d,
                        tau_final[m],
                        (point[2 * m], point[2 * m + 1]),
                        &mut rng,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SampleRecord {
                phase_points,
                outcome,
            })
        })
        .collect()
}
