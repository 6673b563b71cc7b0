//! Circuit file schema: a JSON document with `modes`, `inputs`, `gates`,
//! `detectors` and the optional `policy` and `s_max` keys. Unknown keys are
//! rejected, all physical parameters must be finite, and every schema
//! violation is reported with the line/column serde_json provides.

use num_complex::Complex64;
use qpd_core::analyzer::{CircuitSpec, DetectorSpec};
use qpd_core::gates::{BsPolicy, GateSpec, SubtractionModel};
use qpd_core::state::StateSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub modes: usize,
    pub inputs: Vec<InputEntry>,
    pub gates: Vec<GateEntry>,
    pub detectors: Vec<DetectorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputEntry {
    Vacuum,
    Coherent { re: f64, im: f64 },
    Thermal { mean_photons: f64 },
    SqueezedVacuum {
        r: f64,
        #[serde(default)]
        phase: f64,
    },
    Fock { n: u32 },
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateEntry {
    Displace { modes: [usize; 1], re: f64, im: f64 },
    PhaseShift { modes: [usize; 1], angle: f64 },
    Squeeze { modes: [usize; 1], r: f64 },
    BeamSplitter { modes: [usize; 2], theta: f64 },
    Loss { modes: [usize; 1], eta: f64 },
    /// Either the scaling limit (`kappa`) or the explicit block
    /// (`theta` + `epsilon`); exactly one form must be given.
    PhotonSubtraction {
        modes: [usize; 1],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    CubicPhase { modes: [usize; 1], gamma: f64 },
}

#[derive(Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectorEntry {
    Heterodyne,
    IdealOnOff,
    SinglePhotonProjector { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PolicyEntry {
    Balanced,
    GreedyModeA,
    GreedyModeB,
    WeightedSum { w_a: f64, w_b: f64 },
}

impl CircuitFile {
    pub fn to_circuit(&self) -> anyhow::Result<CircuitSpec> {
        let inputs = self
            .inputs
            .iter()
            .map(|entry| match entry {
                InputEntry::Vacuum => StateSpec::vacuum(),
                InputEntry::Coherent { re, im } => StateSpec::Coherent {
                    amplitude: Complex64::new(*re, *im),
                },
                InputEntry::Thermal { mean_photons } => StateSpec::Thermal {
                    mean_photons: *mean_photons,
                },
                InputEntry::SqueezedVacuum { r, phase } => StateSpec::SqueezedVacuum {
                    r: *r,
                    phase: *phase,
                },
                InputEntry::Fock { n } => StateSpec::Fock { n: *n },
            })
            .collect();
        let layers = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                Ok(match entry {
                    GateEntry::Displace { modes, re, im } => GateSpec::Displace {
                        mode: modes[0],
                        amplitude: Complex64::new(*re, *im),
                    },
                    GateEntry::PhaseShift { modes, angle } => GateSpec::PhaseShift {
                        mode: modes[0],
                        angle: *angle,
                    },
                    GateEntry::Squeeze { modes, r } => GateSpec::Squeeze {
                        mode: modes[0],
                        r: *r,
                    },
                    GateEntry::BeamSplitter { modes, theta } => GateSpec::BeamSplitter {
                        mode_a: modes[0],
                        mode_b: modes[1],
                        theta: *theta,
                    },
                    GateEntry::Loss { modes, eta } => GateSpec::Loss {
                        mode: modes[0],
                        eta: *eta,
                    },
                    GateEntry::PhotonSubtraction {
                        modes,
                        kappa,
                        theta,
                        epsilon,
                    } => {
                        let model = match (kappa, theta, epsilon) {
                            (Some(k), None, None) => SubtractionModel::Limit { kappa: *k },
                            (None, Some(t), Some(e)) => SubtractionModel::Exact {
                                theta: *t,
                                epsilon: *e,
                            },
                            _ => anyhow::bail!(
                                "gate {i}: photon_subtraction takes either `kappa` or both `theta` and `epsilon`"
                            ),
                        };
                        GateSpec::PhotonSubtraction {
                            mode: modes[0],
                            model,
                        }
                    }
                    GateEntry::CubicPhase { modes, gamma } => GateSpec::CubicPhase {
                        mode: modes[0],
                        gamma: *gamma,
                    },
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let detectors = self
            .detectors
            .iter()
            .map(|entry| match entry {
                DetectorEntry::Heterodyne => DetectorSpec::Heterodyne,
                DetectorEntry::IdealOnOff => DetectorSpec::IdealOnOff,
                DetectorEntry::SinglePhotonProjector { epsilon } => {
                    DetectorSpec::SinglePhotonProjector { epsilon: *epsilon }
                }
            })
            .collect();
        if let Some(s_max) = self.s_max {
            if !s_max.is_finite() || s_max < 1.0 {
                anyhow::bail!("s_max must be finite and at least 1, got {s_max}");
            }
        }
        let circuit = CircuitSpec {
            mode_count: self.modes,
            inputs,
            layers,
            detectors,
        };
        circuit.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(circuit)
    }

    pub fn policy(&self) -> BsPolicy {
        match self.policy {
            None | Some(PolicyEntry::Balanced) => BsPolicy::Balanced,
            Some(PolicyEntry::GreedyModeA) => BsPolicy::GreedyModeA,
            Some(PolicyEntry::GreedyModeB) => BsPolicy::GreedyModeB,
            Some(PolicyEntry::WeightedSum { w_a, w_b }) => BsPolicy::WeightedSum { w_a, w_b },
        }
    }
}

pub fn parse_circuit_file(text: &str) -> anyhow::Result<CircuitFile> {
    let file: CircuitFile = serde_json::from_str(text)
        .map_err(|e| anyhow::anyhow!("circuit file: {e} (line {}, column {})", e.line(), e.column()))?;
    Ok(file)
}
