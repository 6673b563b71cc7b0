//! Structured analysis report: verdict summary, tau-trace table, slack
//! table, failure diagnostics, tool version and input hash. The document
//! round-trips losslessly through its JSON form.

use qpd_core::analyzer::{slack_report, AnalyzerOptions, CircuitSpec, Verdict};
use qpd_core::gates::Slack;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub tool_version: String,
    /// SHA-256 of the circuit file bytes, for provenance.
    pub input_hash: String,
    pub policy: String,
    pub outcome: String,
    /// One row per layer boundary, one entry per mode.
    pub tau_trace: Vec<Vec<f64>>,
    pub slack_table: Vec<SlackRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureRow>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SlackRow {
    pub layer: usize,
    /// `None` encodes an unbounded-below rule (no finite slack exists).
    pub slack: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FailureRow {
    /// Equal to the layer count when the terminal detector check failed.
    pub layer_index: usize,
    pub gate: Option<String>,
    pub reason: String,
}

pub fn input_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_report(
    circuit: &CircuitSpec,
    verdict: &Verdict,
    options: &AnalyzerOptions,
    file_bytes: &[u8],
) -> ReportDocument {
    let slack_table = slack_report(circuit, options)
        .into_iter()
        .map(|(layer, slack)| SlackRow {
            layer,
            slack: match slack {
                Slack::Finite(v) => Some(v),
                Slack::UnboundedBelow => None,
            },
        })
        .collect();
    ReportDocument {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_hash: input_hash(file_bytes),
        policy: format!("{:?}", verdict.policy_used),
        outcome: if verdict.is_simulable() {
            "simulable".to_string()
        } else {
            "failed".to_string()
        },
        tau_trace: verdict.tau_trace.iter().map(|row| row.values()).collect(),
        slack_table,
        failure: verdict.failure.as_ref().map(|f| FailureRow {
            layer_index: f.layer_index,
            gate: f.gate.as_ref().map(|g| format!("{g:?}")),
            reason: f.reason.clone(),
        }),
    }
}
