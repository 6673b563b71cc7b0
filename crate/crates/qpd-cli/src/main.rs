//! qpd-sim: decide whether a CV photonic circuit admits an all-positive
//! phase-space decomposition, sample the resulting hidden-variable model,
//! and verify it against the truncated-Fock oracle.
//!
//! Exit codes: 0 success (analyze: simulable; verify: passed), 1 input
//! error, 2 analysis failed (or verify mismatch), 3 circuit analyzable but
//! not sampler-supported, 4 oracle limitation (mode count / truncation).

mod report;
mod schema;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qpd_core::analyzer::{analyze, AnalyzerOptions, CircuitSpec, DetectorSpec, LossTolerance};
use qpd_core::oracle::{born_probabilities, OracleError, OutcomeDistribution};
use qpd_core::sampler::{run_sampling, MeasurementOutcome, SamplerError};
use qpd_core::{cubic, curves, stats};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qpd-sim", version, about)]
struct Cli {
    /// Worker threads for sampling and grid evaluation
    /// (default: QPD_SIM_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ordering-parameter propagation and print the verdict.
    Analyze {
        path: PathBuf,
        /// Override the beam-splitter policy from the circuit file.
        #[arg(long)]
        policy: Option<String>,
        /// Write a structured JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Negativity budget for cubic-phase layers.
        #[arg(long, default_value_t = 1e-2)]
        cubic_eps: f64,
    },
    /// Draw hidden-variable samples from a simulable circuit (CSV).
    Sample {
        path: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare sampler statistics against the truncated-Fock oracle.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = 25)]
        fock_dims: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Acceptance threshold on the KS / total-variation / moment gap.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
    },
    /// Tabulate the cubic-gate threshold r*(ε) (CSV).
    CubicRstar {
        /// Comma-separated list of negativity budgets.
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit (s_in, max s_out) boundary curves for plotting (CSV).
    Curves {
        /// Gate family: `squeeze` or `subtraction`.
        #[arg(long)]
        gate: String,
        /// Squeezing parameter (squeeze curves).
        #[arg(long, default_value_t = 0.3)]
        r: f64,
        /// Comma-separated κ values (subtraction curves).
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal loss deficit flipping a failing circuit to simulable.
    LossTolerance {
        path: PathBuf,
        /// Insert the loss layer before this gate index.
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[arg(long, default_value_t = 1e-2)]
        cubic_eps: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("QPD_SIM_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

struct LoadedCircuit {
    circuit: CircuitSpec,
    options: AnalyzerOptions,
    bytes: Vec<u8>,
}

fn load(path: &Path, policy_override: Option<&str>, cubic_eps: f64) -> anyhow::Result<LoadedCircuit> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("circuit file is not UTF-8")?;
    let file = schema::parse_circuit_file(text)?;
    let circuit = file.to_circuit()?;
    let policy = match policy_override {
        None => file.policy(),
        Some("balanced") => qpd_core::gates::BsPolicy::Balanced,
        Some("greedy-a") => qpd_core::gates::BsPolicy::GreedyModeA,
        Some("greedy-b") => qpd_core::gates::BsPolicy::GreedyModeB,
        Some(other) => anyhow::bail!(
            "unknown policy {other:?} (balanced, greedy-a, greedy-b; weighted sums go in the circuit file)"
        ),
    };
    let options = AnalyzerOptions {
        policy,
        s_max: file.s_max.unwrap_or(qpd_core::state::DEFAULT_S_MAX),
        cubic_epsilon: cubic_eps,
    };
    options.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(LoadedCircuit {
        circuit,
        options,
        bytes,
    })
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Analyze {
            path,
            policy,
            report,
            cubic_eps,
        } => {
            let loaded = load(&path, policy.as_deref(), cubic_eps)?;
            let verdict = analyze(&loaded.circuit, &loaded.options);
            let doc = report::build_report(&loaded.circuit, &verdict, &loaded.options, &loaded.bytes);
            if verdict.is_simulable() {
                let trace = verdict.final_ordering().values();
                println!("simulable; final ordering = {trace:?}");
            } else {
                let failure = verdict.failure.as_ref().expect("failed verdict has details");
                println!(
                    "not simulable: layer {} — {}",
                    failure.layer_index, failure.reason
                );
            }
            if let Some(out) = report {
                std::fs::write(&out, serde_json::to_string_pretty(&doc)?)
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            Ok(if verdict.is_simulable() { 0 } else { 2 })
        }
        Command::Sample {
            path,
            samples,
            seed,
            out,
        } => {
            let loaded = load(&path, None, 1e-2)?;
            let verdict = analyze(&loaded.circuit, &loaded.options);
            if !verdict.is_simulable() {
                eprintln!("circuit is not simulable; nothing to sample");
                return Ok(2);
            }
            let records = match run_sampling(&loaded.circuit, &verdict, samples, seed) {
                Ok(records) => records,
                Err(
                    err @ (SamplerError::FockInput(_) | SamplerError::NonGaussianGate(_)),
                ) => {
                    eprintln!("circuit is analyzable but not sampler-supported: {err}");
                    return Ok(3);
                }
                Err(err) => return Err(err.into()),
            };
            let csv = render_samples_csv(&loaded.circuit, &records)?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Verify {
            path,
            fock_dims,
            samples,
            seed,
            threshold,
        } => cmd_verify(&path, fock_dims, samples, seed, threshold),
        Command::CubicRstar { eps, out } => {
            let mut csv = String::from("epsilon,r_star,bracket_lo,bracket_hi,min_value,status\n");
            for epsilon in eps {
                match cubic::r_star(epsilon) {
                    Ok(r) => {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},ok",
                            epsilon, r.r_star, r.bracket.0, r.bracket.1, r.achieved_minimum
                        );
                    }
                    Err(err) => {
                        let _ = writeln!(csv, "{epsilon},,,,,{err}");
                    }
                }
            }
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Curves {
            gate,
            r,
            kappa,
            points,
            out,
        } => {
            let grid: Vec<f64> = (0..points)
                .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
                .collect();
            let csv = match gate.as_str() {
                "squeeze" => {
                    let mut csv = String::from("s_in,s_out_max,feasible\n");
                    for p in curves::squeeze_boundary(r, &grid) {
                        let _ = writeln!(csv, "{},{},{}", p.s_in, p.s_out_bound, p.feasible);
                    }
                    csv
                }
                "subtraction" => {
                    let mut csv = String::from("kappa,s_in,s_out_max,feasible\n");
                    for &k in &kappa {
                        for p in curves::subtraction_boundary(k, &grid) {
                            let _ =
                                writeln!(csv, "{},{},{},{}", k, p.s_in, p.s_out_bound, p.feasible);
                        }
                    }
                    csv
                }
                other => anyhow::bail!("unknown gate {other:?} (squeeze, subtraction)"),
            };
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::LossTolerance {
            path,
            layer,
            cubic_eps,
        } => {
            let loaded = load(&path, None, cubic_eps)?;
            let result =
                qpd_core::analyzer::loss_tolerance(&loaded.circuit, layer, &loaded.options)
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
            match result {
                LossTolerance::AlreadySimulable => println!("already simulable; deficit 0"),
                LossTolerance::Deficit(d) => {
                    println!("minimal loss deficit (1 - eta) before layer {layer}: {d:.4}")
                }
                LossTolerance::NotRescuable => {
                    println!("not rescuable: even full loss before layer {layer} leaves the circuit unsimulable")
                }
            }
            Ok(0)
        }
    }
}

fn render_samples_csv(
    circuit: &CircuitSpec,
    records: &[qpd_core::sampler::SampleRecord],
) -> anyhow::Result<String> {
    let all_heterodyne = circuit
        .detectors
        .iter()
        .all(|d| matches!(d, DetectorSpec::Heterodyne));
    let none_heterodyne = circuit
        .detectors
        .iter()
        .all(|d| !matches!(d, DetectorSpec::Heterodyne));
    anyhow::ensure!(
        all_heterodyne || none_heterodyne,
        "mixed heterodyne/click detector layouts have no single CSV shape"
    );
    let mut csv = String::new();
    if all_heterodyne {
        csv.push_str("record,mode,outcome_q,outcome_p\n");
        for (i, record) in records.iter().enumerate() {
            for (m, outcome) in record.outcome.iter().enumerate() {
                if let MeasurementOutcome::Heterodyne { q, p } = outcome {
                    let _ = writeln!(csv, "{i},{m},{q},{p}");
                }
            }
        }
    } else {
        csv.push_str("record,mode,click\n");
        for (i, record) in records.iter().enumerate() {
            for (m, outcome) in record.outcome.iter().enumerate() {
                if let MeasurementOutcome::Click(click) = outcome {
                    let _ = writeln!(csv, "{i},{m},{}", u8::from(*click));
                }
            }
        }
    }
    Ok(csv)
}

fn cmd_verify(
    path: &Path,
    fock_dims: usize,
    samples: usize,
    seed: u64,
    threshold: f64,
) -> anyhow::Result<u8> {
    let loaded = load(path, None, 1e-2)?;
    if loaded.circuit.mode_count > 2 {
        eprintln!("oracle limited to 2 modes");
        return Ok(4);
    }
    let verdict = analyze(&loaded.circuit, &loaded.options);
    if !verdict.is_simulable() {
        eprintln!("circuit is not simulable; nothing to verify");
        return Ok(2);
    }
    let records = match run_sampling(&loaded.circuit, &verdict, samples, seed) {
        Ok(records) => records,
        Err(err @ (SamplerError::FockInput(_) | SamplerError::NonGaussianGate(_))) => {
            eprintln!("circuit is analyzable but not sampler-supported: {err}");
            return Ok(3);
        }
        Err(err) => return Err(err.into()),
    };
    // negative-control hook used by the integration tests: corrupt the
    // sampler output before comparing so a healthy oracle flags it
    let corrupt = std::env::var("QPD_SIM_CORRUPT_KERNEL").is_ok();

    let oracle = match born_probabilities(&loaded.circuit, fock_dims) {
        Ok(distribution) => distribution,
        Err(err @ (OracleError::TruncationLeak { .. } | OracleError::TooManyModes(_))) => {
            eprintln!("oracle abort: {err}");
            return Ok(4);
        }
        Err(err) => return Err(err.into()),
    };

    let mut worst: f64 = 0.0;
    match oracle {
        OutcomeDistribution::HeterodyneGrid(grid) => {
            let shift = if corrupt { 0.3 } else { 0.0 };
            let mut qs = Vec::with_capacity(samples);
            let mut ps = Vec::with_capacity(samples);
            for record in &records {
                if let MeasurementOutcome::Heterodyne { q, p } = record.outcome[0] {
                    qs.push(q + shift);
                    ps.push(p);
                }
            }
            let us: Vec<f64> = (0..samples)
                .map(|i| (i as f64 + 0.5) / samples as f64)
                .collect();
            let oq = stats::sample_tabulated(&grid.q_marginal(), grid.q0, grid.step, &us);
            let op = stats::sample_tabulated(&grid.p_marginal(), grid.p0, grid.step, &us);
            let ks_q = stats::ks_two_sample(&qs, &oq);
            let ks_p = stats::ks_two_sample(&ps, &op);
            println!("KS statistic: q = {ks_q:.5}, p = {ks_p:.5}");
            worst = ks_q.max(ks_p);
        }
        OutcomeDistribution::HeterodyneMoments { mean, covariance } => {
            let shift = if corrupt { 0.3 } else { 0.0 };
            let modes = loaded.circuit.mode_count;
            let mut columns = vec![Vec::with_capacity(samples); 2 * modes];
            for record in &records {
                for (m, outcome) in record.outcome.iter().enumerate() {
                    if let MeasurementOutcome::Heterodyne { q, p } = outcome {
                        columns[2 * m].push(q + if m == 0 { shift } else { 0.0 });
                        columns[2 * m + 1].push(*p);
                    }
                }
            }
            for i in 0..2 * modes {
                let gap = (stats::mean(&columns[i]) - mean[i]).abs() / mean[i].abs().max(1.0);
                worst = worst.max(gap);
                for j in i..2 * modes {
                    let emp = if i == j {
                        stats::variance(&columns[i])
                    } else {
                        stats::covariance(&columns[i], &columns[j])
                    };
                    let gap = (emp - covariance[(i, j)]).abs() / covariance[(i, j)].abs().max(1.0);
                    worst = worst.max(gap);
                }
            }
            println!("normalized moment gap (two-mode heterodyne): {worst:.5}");
        }
        OutcomeDistribution::Discrete(table) => {
            let mut empirical = vec![0.0f64; table.len()];
            for record in &records {
                let pattern: Vec<bool> = record
                    .outcome
                    .iter()
                    .map(|o| match o {
                        // "true" in the oracle table means the projector
                        // element (no-click for on/off detectors)
                        MeasurementOutcome::Click(clicked) => !clicked,
                        _ => unreachable!("discrete layout checked above"),
                    })
                    .collect();
                let pattern = if corrupt {
                    pattern.iter().map(|b| !b).collect()
                } else {
                    pattern
                };
                if let Some(idx) = table.iter().position(|(p, _)| *p == pattern) {
                    empirical[idx] += 1.0 / samples as f64;
                }
            }
            let oracle_probs: Vec<f64> = table.iter().map(|(_, p)| *p).collect();
            let tv = stats::total_variation(&empirical, &oracle_probs);
            println!("total variation distance: {tv:.5}");
            worst = tv;
        }
    }
    // the moment comparison tolerates 2% by convention; distribution
    // distances use the configured threshold directly
    let limit = match loaded.circuit.detectors[0] {
        DetectorSpec::Heterodyne if loaded.circuit.mode_count == 2 => threshold.max(0.02),
        _ => threshold,
    };
    if worst <= limit {
        println!("verify: PASS ({worst:.5} <= {limit})");
        Ok(0)
    } else {
        println!("verify: FAIL ({worst:.5} > {limit})");
        Ok(2)
    }
}
