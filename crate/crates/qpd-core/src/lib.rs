//! Phase-space simulability analysis for continuous-variable photonic circuits.
//!
//! The library decides whether a CV circuit (factorized inputs, a sequence of
//! few-mode gates, factorized detectors) admits a classical hidden-variable
//! simulation built from all-positive (s)-ordered quasiprobability
//! decompositions, and runs the resulting Monte-Carlo sampler when it does.
//! A truncated-Fock-space oracle provides desk-scale ground truth for every
//! closed-form rule.
//!
//! # Conventions
//!
//! All Gaussian formulas use the quadrature convention
//!
//! ```text
//! q̂ = â + â†,   p̂ = -i(â - â†),   [q̂, p̂] = 2i
//! ```
//!
//! so the vacuum quadrature covariance matrix is the identity. A complex
//! phase-space point α maps to the quadrature pair (q, p) = (2·Re α, 2·Im α).
//! Quasi-PDFs are densities in (q, p): they integrate to 1 over dq dp.
//! With these units the ordering parameter enters linearly: a state with
//! symmetric-order covariance σ has an (s)-ordered representation with
//! covariance σ - s·I whenever that matrix is positive definite.
//!
//! The operator pairing that fixes every π prefactor is
//!
//! ```text
//! Tr[A B] = (4π)^M ∬ w_A^(-s)(q,p) · w_B^(s)(q,p) dq dp
//! ```
//!
//! which the oracle test-suite verifies on random truncated states.

pub mod airy;
pub mod analyzer;
pub mod cubic;
pub mod curves;
pub mod gates;
pub mod oracle;
pub mod sampler;
pub mod state;
pub mod stats;

pub use analyzer::{analyze, AnalyzerOptions, CircuitSpec, DetectorSpec, Verdict};
pub use gates::{BsPolicy, GateSpec, RuleOutcome};
pub use sampler::{run_sampling, GaussianKernel, SampleRecord};
pub use state::{depth_of_state, ModeOrdering, OrderingParam, StateSpec, DEFAULT_S_MAX};
