//! Desk-scale ground truth: truncated-Fock-space density-matrix simulation
//! of the circuit, quasi-PDF grids through the characteristic function,
//! negativity volume, nonclassical-depth scans, and Born probabilities.
//! Everything the closed-form rule modules claim is validated against this
//! module at small scale.

mod grid;
mod linalg;

pub use grid::{negativity_volume, ChiGrid, GridBounds, QuasiPdfGrid};
pub use linalg::{annihilation, displacement_elements, expm, hermitian_eigenvalues, CMat};

use crate::analyzer::{CircuitSpec, DetectorSpec};
use crate::gates::GateSpec;
use crate::state::StateSpec;
use linalg::c;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Default per-mode truncation; grown in steps of 5 when the leak monitor
/// trips, up to [`MAX_DIMS`].
pub const DEFAULT_DIMS: usize = 25;
pub const MAX_DIMS: usize = 60;
const LEAK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("truncation leak {leak:e} at dims {dims}: raise dims")]
    TruncationLeak { dims: usize, leak: f64 },
    #[error("oracle limited to 2 modes, circuit has {0}")]
    TooManyModes(usize),
    #[error("ordering {0} too singular for direct grid evaluation (limit 0.9); smooth from a lower ordering instead")]
    OrderingTooSingular(f64),
    #[error("characteristic function diverges: state has no regular representation at ordering {0}")]
    SingularAtOrdering(f64),
    #[error("quasi-PDF grids are single-mode only")]
    GridNeedsSingleMode,
    #[error("photon subtraction blocks are analyzed, not simulated")]
    SubtractionNotSimulated,
    #[error("unsupported detector combination for the oracle")]
    UnsupportedDistribution,
}

/// Truncated Fock-space density matrix on one or two modes.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    /// Per-mode truncation dimensions (1 or 2 entries).
    pub dims: Vec<usize>,
    /// Row-major density matrix in the product Fock basis.
    pub rho: CMat,
}

impl TruncatedState {
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn trace(&self) -> f64 {
        (0..self.total_dim()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Pure state from a ket.
    fn from_ket(dims: Vec<usize>, ket: &DVector<Complex64>) -> Self {
        let rho = ket * ket.adjoint();
        TruncatedState { dims, rho }
    }

    /// Single-mode constructor for the supported input families.
    pub fn from_state_spec(spec: &StateSpec, dims: usize) -> Self {
        match spec {
            StateSpec::Coherent { amplitude } => {
                let mut ket = DVector::zeros(dims);
                let mut amp = c(1.0, 0.0) * (-0.5 * amplitude.norm_sqr()).exp();
                for n in 0..dims {
                    ket[n] = amp;
                    amp *= amplitude / ((n + 1) as f64).sqrt();
                }
                Self::from_ket(vec![dims], &ket)
            }
            StateSpec::Thermal { mean_photons } => {
                let nb = *mean_photons;
                let mut rho = CMat::zeros(dims, dims);
                for n in 0..dims {
                    let p = nb.powi(n as i32) / (1.0 + nb).powi(n as i32 + 1);
                    rho[(n, n)] = c(p, 0.0);
                }
                TruncatedState { dims: vec![dims], rho }
            }
            StateSpec::SqueezedVacuum { r, phase } => {
                let vacuum = Self::from_state_spec(&StateSpec::Fock { n: 0 }, dims);
                let squeezed = vacuum
                    .apply_unitary(&squeeze_unitary(dims, *r), &[0])
                    .expect("unitary application");
                // e^{iφ n} rotates quadratures by +φ
                let rot = phase_unitary(dims, -*phase);
                squeezed.apply_unitary(&rot, &[0]).expect("unitary application")
            }
            StateSpec::Fock { n } => {
                let mut ket = DVector::zeros(dims);
                ket[(*n as usize).min(dims - 1)] = c(1.0, 0.0);
                Self::from_ket(vec![dims], &ket)
            }
        }
    }

    /// Tensor product of two single-mode states.
    pub fn product(a: &TruncatedState, b: &TruncatedState) -> Self {
        TruncatedState {
            dims: vec![a.dims[0], b.dims[0]],
            rho: a.rho.kronecker(&b.rho),
        }
    }

    /// Occupation leak indicator: trace drift plus population of the top
    /// two levels of each mode (a truncated unitary preserves the trace
    /// exactly, so edge population is what flags an undersized basis).
    pub fn leak(&self) -> f64 {
        let trace_drift = (self.trace() - 1.0).abs();
        let mut edge = 0.0;
        for (mode, &d) in self.dims.iter().enumerate() {
            for level in [d - 1, d - 2] {
                edge += self.mode_population(mode, level);
            }
        }
        trace_drift + edge
    }

    fn mode_population(&self, mode: usize, level: usize) -> f64 {
        let mut p = 0.0;
        let dim = self.total_dim();
        for i in 0..dim {
            if self.index_of(i, mode) == level {
                p += self.rho[(i, i)].re;
            }
        }
        p
    }

    fn index_of(&self, flat: usize, mode: usize) -> usize {
        match (self.dims.len(), mode) {
            (1, 0) => flat,
            (2, 0) => flat / self.dims[1],
            (2, 1) => flat % self.dims[1],
            _ => unreachable!("modes validated"),
        }
    }

    fn embed(&self, op: &CMat, mode: usize) -> CMat {
        if self.dims.len() == 1 {
            op.clone()
        } else if mode == 0 {
            op.kronecker(&CMat::identity(self.dims[1], self.dims[1]))
        } else {
            CMat::identity(self.dims[0], self.dims[0]).kronecker(op)
        }
    }

    fn apply_unitary(&self, u: &CMat, modes: &[usize]) -> Result<Self, OracleError> {
        let full = if modes.len() == self.dims.len() {
            u.clone()
        } else {
            self.embed(u, modes[0])
        };
        let rho = &full * &self.rho * full.adjoint();
        Ok(TruncatedState { dims: self.dims.clone(), rho })
    }

    /// One gate applied in the truncated space: unitaries as matrix
    /// exponentials of truncated generators, loss as a Kraus sum cut when
    /// the residual trace falls below 1e-10. The leak monitor aborts with a
    /// raise-dims signal when the truncation stops being faithful.
    pub fn apply_gate(&self, gate: &GateSpec) -> Result<Self, OracleError> {
        let out = match gate {
            GateSpec::Displace { mode, amplitude } => {
                let d = self.dims[*mode];
                let a = annihilation(d);
                let gen = a.adjoint() * c(amplitude.re, amplitude.im)
                    - &a * c(amplitude.re, -amplitude.im);
                self.apply_unitary(&expm(&gen), &[*mode])?
            }
            GateSpec::PhaseShift { mode, angle } => {
                self.apply_unitary(&phase_unitary(self.dims[*mode], *angle), &[*mode])?
            }
            GateSpec::Squeeze { mode, r } => {
                self.apply_unitary(&squeeze_unitary(self.dims[*mode], *r), &[*mode])?
            }
            GateSpec::CubicPhase { mode, gamma } => {
                let d = self.dims[*mode];
                let a = annihilation(d);
                let q = &a + a.adjoint();
                let q3 = &q * &q * &q;
                let gen = q3 * c(0.0, -gamma / 6.0);
                self.apply_unitary(&expm(&gen), &[*mode])?
            }
            GateSpec::BeamSplitter { mode_a, mode_b, theta } => {
                let u = beamsplitter_unitary(self.dims[0], self.dims[1], *theta, *mode_a > *mode_b);
                self.apply_unitary(&u, &[*mode_a.min(mode_b), *mode_a.max(mode_b)])?
            }
            GateSpec::Loss { mode, eta } => self.apply_loss(*mode, *eta),
            GateSpec::PhotonSubtraction { .. } => {
                return Err(OracleError::SubtractionNotSimulated)
            }
        };
        let leak = out.leak();
        if leak > LEAK_TOLERANCE {
            return Err(OracleError::TruncationLeak {
                dims: self.dims.iter().copied().max().unwrap(),
                leak,
            });
        }
        Ok(out)
    }

    fn apply_loss(&self, mode: usize, eta: f64) -> Self {
        let d = self.dims[mode];
        let a = annihilation(d);
        // K_k = sqrt((1-η)^k / k!) · η^(n/2) · a^k
        let mut eta_half_n = CMat::zeros(d, d);
        for n in 0..d {
            eta_half_n[(n, n)] = c(eta.powf(n as f64 / 2.0), 0.0);
        }
        let mut out = CMat::zeros(self.total_dim(), self.total_dim());
        let mut a_pow = CMat::identity(d, d);
        let mut coeff = 1.0f64; // (1-η)^k / k!
        let mut accumulated = 0.0;
        for k in 0..d {
            if k > 0 {
                a_pow = &a_pow * &a;
                coeff *= (1.0 - eta) / k as f64;
            }
            if coeff == 0.0 {
                break;
            }
            let kraus = &eta_half_n * &a_pow * c(coeff.sqrt(), 0.0);
            let full = self.embed(&kraus, mode);
            let term = &full * &self.rho * full.adjoint();
            accumulated += (0..term.nrows()).map(|i| term[(i, i)].re).sum::<f64>();
            out += term;
            if 1.0 - accumulated < 1e-10 {
                break;
            }
        }
        TruncatedState { dims: self.dims.clone(), rho: out }
    }

    /// Mean quadrature vector and symmetric-order covariance, from Fock
    /// moments of q̂ = â + â†, p̂ = -i(â - â†).
    pub fn mean_and_covariance(&self) -> (DVector<f64>, DMatrix<f64>) {
        let modes = self.dims.len();
        let mut quads: Vec<CMat> = Vec::with_capacity(2 * modes);
        for mode in 0..modes {
            let a = annihilation(self.dims[mode]);
            let q = self.embed(&(&a + a.adjoint()), mode);
            let p = self.embed(&((&a - a.adjoint()) * c(0.0, -1.0)), mode);
            quads.push(q);
            quads.push(p);
        }
        let expect = |op: &CMat| -> f64 { (op * &self.rho).trace().re };
        let mean = DVector::from_fn(2 * modes, |i, _| expect(&quads[i]));
        let mut cov = DMatrix::zeros(2 * modes, 2 * modes);
        for i in 0..2 * modes {
            for j in 0..2 * modes {
                let sym = (&quads[i] * &quads[j] + &quads[j] * &quads[i]) * c(0.5, 0.0);
                cov[(i, j)] = expect(&sym) - mean[i] * mean[j];
            }
        }
        (mean, cov)
    }

    /// Trace distance ½·||ρ - σ||₁ via Hermitian eigenvalues.
    pub fn trace_distance(&self, other: &TruncatedState) -> f64 {
        let diff = &self.rho - &other.rho;
        0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Hermiticity defect and most negative eigenvalue, for the physicality
    /// invariant (tested, not enforced in the hot path).
    pub fn physicality(&self) -> (f64, f64) {
        let herm_defect = (&self.rho - self.rho.adjoint()).norm();
        let min_eig = hermitian_eigenvalues(&self.rho)
            .first()
            .copied()
            .unwrap_or(0.0);
        (herm_defect, min_eig)
    }
}

fn phase_unitary(d: usize, angle: f64) -> CMat {
    // e^{-iθ n̂}: rotates (q, p) by -θ
    let mut u = CMat::zeros(d, d);
    for n in 0..d {
        u[(n, n)] = Complex64::from_polar(1.0, -angle * n as f64);
    }
    u
}

fn squeeze_unitary(d: usize, r: f64) -> CMat {
    let a = annihilation(d);
    let a2 = &a * &a;
    let gen = (&a2 - a2.adjoint()) * c(r / 2.0, 0.0);
    expm(&gen)
}

/// Two-mode beam splitter exp(θ(a†b - ab†)), assembled sector by sector:
/// the generator conserves total photon number, so it block-diagonalizes
/// over N = n_a + n_b and each block is a small antisymmetric matrix.
/// `swapped` flips the sign of θ for gates written with the mode pair
/// reversed.
fn beamsplitter_unitary(da: usize, db: usize, theta: f64, swapped: bool) -> CMat {
    let theta = if swapped { -theta } else { theta };
    let dim = da * db;
    let mut u = CMat::zeros(dim, dim);
    let flat = |na: usize, nb: usize| na * db + nb;
    for total in 0..(da + db - 1) {
        let lo = total.saturating_sub(db - 1);
        let hi = total.min(da - 1);
        if lo > hi {
            continue;
        }
        let size = hi - lo + 1;
        let mut gen = CMat::zeros(size, size);
        for (row, na) in (lo..hi).enumerate() {
            // <na+1, nb-1| a†b |na, nb> = sqrt((na+1)·nb)
            let nb = total - na;
            let amp = ((na + 1) as f64 * nb as f64).sqrt() * theta;
            gen[(row + 1, row)] = c(amp, 0.0);
            gen[(row, row + 1)] = c(-amp, 0.0);
        }
        let block = expm(&gen);
        for (row, na_r) in (lo..=hi).enumerate() {
            for (col, na_c) in (lo..=hi).enumerate() {
                u[(flat(na_r, total - na_r), flat(na_c, total - na_c))] = block[(row, col)];
            }
        }
    }
    u
}

/// Run the circuit's state preparation and gate layers at fixed dims.
fn run_layers(circuit: &CircuitSpec, dims: usize) -> Result<TruncatedState, OracleError> {
    let mut state = match circuit.mode_count {
        1 => TruncatedState::from_state_spec(&circuit.inputs[0], dims),
        2 => TruncatedState::product(
            &TruncatedState::from_state_spec(&circuit.inputs[0], dims),
            &TruncatedState::from_state_spec(&circuit.inputs[1], dims),
        ),
        m => return Err(OracleError::TooManyModes(m)),
    };
    let leak = state.leak();
    if leak > LEAK_TOLERANCE {
        return Err(OracleError::TruncationLeak { dims, leak });
    }
    for gate in &circuit.layers {
        state = state.apply_gate(gate)?;
    }
    Ok(state)
}

/// Simulate the circuit, growing the truncation by 5 on leak signals until
/// the monitor passes or [`MAX_DIMS`] is reached.
pub fn simulate_circuit(circuit: &CircuitSpec, dims: usize) -> Result<TruncatedState, OracleError> {
    let mut d = dims;
    loop {
        match run_layers(circuit, d) {
            Err(OracleError::TruncationLeak { leak, .. }) if d + 5 <= MAX_DIMS => {
                let _ = leak;
                d += 5;
            }
            other => return other,
        }
    }
}

/// Exact outcome distribution of the measured circuit.
#[derive(Debug, Clone)]
pub enum OutcomeDistribution {
    /// Joint click patterns (one bool per mode) with probabilities.
    Discrete(Vec<(Vec<bool>, f64)>),
    /// Single-mode heterodyne: the Husimi grid as outcome density.
    HeterodyneGrid(QuasiPdfGrid),
    /// Two-mode heterodyne: outcome mean and covariance (state covariance
    /// plus one vacuum unit per quadrature).
    HeterodyneMoments {
        mean: DVector<f64>,
        covariance: DMatrix<f64>,
    },
}

fn projector(d: usize, level: usize) -> CMat {
    let mut p = CMat::zeros(d, d);
    p[(level, level)] = c(1.0, 0.0);
    p
}

fn detector_elements(d: usize, det: DetectorSpec) -> Option<Vec<CMat>> {
    match det {
        DetectorSpec::Heterodyne => None,
        DetectorSpec::IdealOnOff => {
            let p0 = projector(d, 0);
            let rest = CMat::identity(d, d) - &p0;
            Some(vec![p0, rest])
        }
        DetectorSpec::SinglePhotonProjector { .. } => {
            let p1 = projector(d, 1);
            let rest = CMat::identity(d, d) - &p1;
            Some(vec![p1, rest])
        }
    }
}

/// Born probabilities by direct traces (discrete detectors) or the Husimi
/// density (heterodyne). Mixed heterodyne/click layouts on two modes are
/// outside the oracle's remit.
pub fn born_probabilities(
    circuit: &CircuitSpec,
    dims: usize,
) -> Result<OutcomeDistribution, OracleError> {
    if circuit.mode_count > 2 {
        return Err(OracleError::TooManyModes(circuit.mode_count));
    }
    let state = simulate_circuit(circuit, dims)?;
    let all_heterodyne = circuit
        .detectors
        .iter()
        .all(|d| matches!(d, DetectorSpec::Heterodyne));
    let none_heterodyne = circuit
        .detectors
        .iter()
        .all(|d| !matches!(d, DetectorSpec::Heterodyne));
    if all_heterodyne {
        if circuit.mode_count == 1 {
            let grid = grid::quasi_pdf(&state, -1.0, GridBounds::default())?;
            return Ok(OutcomeDistribution::HeterodyneGrid(grid));
        }
        let (mean, cov) = state.mean_and_covariance();
        let n = cov.nrows();
        return Ok(OutcomeDistribution::HeterodyneMoments {
            mean,
            covariance: cov + DMatrix::identity(n, n),
        });
    }
    if !none_heterodyne {
        return Err(OracleError::UnsupportedDistribution);
    }
    let element_sets: Vec<Vec<CMat>> = circuit
        .detectors
        .iter()
        .enumerate()
        .map(|(m, det)| detector_elements(state.dims[m], *det).expect("discrete detector"))
        .collect();
    let mut outcomes = Vec::new();
    let patterns: Vec<Vec<bool>> = match circuit.mode_count {
        1 => vec![vec![true], vec![false]],
        _ => vec![
            vec![true, true],
            vec![true, false],
            vec![false, true],
            vec![false, false],
        ],
    };
    for pattern in patterns {
        let mut povm = element_sets[0][usize::from(!pattern[0])].clone();
        if circuit.mode_count == 2 {
            povm = povm.kronecker(&element_sets[1][usize::from(!pattern[1])]);
        }
        let p = (&povm * &state.rho).trace().re;
        outcomes.push((pattern, p.max(0.0)));
    }
    Ok(OutcomeDistribution::Discrete(outcomes))
}

/// Nonclassical-depth scan: bisection (resolution 1e-3) of the largest
/// ordering at which the state's grid representation exists and is
/// non-negative. The characteristic function is evaluated once at s = 0
/// and rescaled per candidate ordering, with its growth on the conjugate
/// grid serving as the singularity detector past the Gaussian boundary.
pub fn depth_scan(state: &TruncatedState, s_max: f64) -> Result<f64, OracleError> {
    if state.dims.len() != 1 {
        return Err(OracleError::GridNeedsSingleMode);
    }
    let chi = ChiGrid::new(state);
    let positive = |s: f64| -> bool { chi.positive_at(s) };
    if positive(s_max) {
        return Ok(s_max);
    }
    let mut lo = -1.0;
    let mut hi = s_max;
    if !positive(lo) {
        // even the Husimi level failed: numerically possible only for
        // unphysical inputs; report the floor
        return Ok(-1.0);
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub use grid::quasi_pdf;

#[cfg(test)]
mod tests;
