use super::*;
use crate::analyzer::DetectorSpec;
use crate::state::fock_quasi_pdf;
use nalgebra::Matrix2;

fn vacuum(dims: usize) -> TruncatedState {
    TruncatedState::from_state_spec(&StateSpec::Fock { n: 0 }, dims)
}

#[test]
fn constructors_have_unit_trace_and_right_moments() {
    let states = [
        StateSpec::Coherent { amplitude: Complex64::new(0.9, -0.4) },
        StateSpec::Thermal { mean_photons: 0.7 },
        StateSpec::SqueezedVacuum { r: 0.35, phase: 0.6 },
        StateSpec::Fock { n: 2 },
    ];
    for spec in &states {
        let state = TruncatedState::from_state_spec(spec, 30);
        assert!((state.trace() - 1.0).abs() < 1e-9, "trace for {spec:?}");
        let (mean, cov) = state.mean_and_covariance();
        let want_mean = spec.mean_quadratures();
        assert!((mean[0] - want_mean[0]).abs() < 1e-6);
        assert!((mean[1] - want_mean[1]).abs() < 1e-6);
        if let Some(want_cov) = spec.gaussian_covariance() {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (cov[(i, j)] - want_cov[(i, j)]).abs() < 1e-5,
                        "{spec:?} cov[{i}{j}] = {} want {}",
                        cov[(i, j)],
                        want_cov[(i, j)]
                    );
                }
            }
        }
    }
    // Fock(2) symmetric covariance is (2n+1)·I
    let fock2 = TruncatedState::from_state_spec(&StateSpec::Fock { n: 2 }, 20);
    let (_, cov) = fock2.mean_and_covariance();
    assert!((cov[(0, 0)] - 5.0).abs() < 1e-9);
    assert!((cov[(1, 1)] - 5.0).abs() < 1e-9);
}

#[test]
fn squeeze_gate_reaches_analytic_variance() {
    for r in [0.1, 0.3, 0.5] {
        let state = vacuum(25)
            .apply_gate(&GateSpec::Squeeze { mode: 0, r })
            .unwrap();
        let (_, cov) = state.mean_and_covariance();
        assert!((cov[(0, 0)] - (-2.0 * r).exp()).abs() < 1e-4, "r = {r}");
        assert!((cov[(1, 1)] - (2.0 * r).exp()).abs() < 1e-4);
    }
}

#[test]
fn loss_on_coherent_is_attenuated_coherent() {
    let alpha = Complex64::new(1.1, 0.4);
    let eta = 0.6;
    let input = TruncatedState::from_state_spec(&StateSpec::Coherent { amplitude: alpha }, 30);
    let lossy = input.apply_gate(&GateSpec::Loss { mode: 0, eta }).unwrap();
    let want = TruncatedState::from_state_spec(
        &StateSpec::Coherent { amplitude: alpha * eta.sqrt() },
        30,
    );
    assert!(lossy.trace_distance(&want) < 1e-6);
}

#[test]
fn beamsplitter_at_right_angle_swaps_modes() {
    let a = TruncatedState::from_state_spec(&StateSpec::Coherent { amplitude: Complex64::new(1.0, 0.0) }, 16);
    let b = TruncatedState::from_state_spec(&StateSpec::Fock { n: 0 }, 16);
    let joint = TruncatedState::product(&a, &b);
    let swapped = joint
        .apply_gate(&GateSpec::BeamSplitter {
            mode_a: 0,
            mode_b: 1,
            theta: std::f64::consts::FRAC_PI_2,
        })
        .unwrap();
    let (mean, _) = swapped.mean_and_covariance();
    // the coherent amplitude moves to mode b (up to the rotation's sign)
    assert!(mean[0].abs() < 1e-9);
    assert!((mean[2].abs() - 2.0).abs() < 1e-9);
}

#[test]
fn gates_preserve_physicality() {
    let mut state = TruncatedState::from_state_spec(
        &StateSpec::SqueezedVacuum { r: 0.25, phase: 0.0 },
        25,
    );
    for gate in [
        GateSpec::PhaseShift { mode: 0, angle: 0.4 },
        GateSpec::Displace { mode: 0, amplitude: Complex64::new(0.3, 0.2) },
        GateSpec::Loss { mode: 0, eta: 0.8 },
        GateSpec::CubicPhase { mode: 0, gamma: 0.05 },
    ] {
        state = state.apply_gate(&gate).unwrap();
        assert!((state.trace() - 1.0).abs() < 1e-6);
        let (herm, min_eig) = state.physicality();
        assert!(herm < 1e-9, "hermiticity defect {herm}");
        assert!(min_eig > -1e-10, "negative eigenvalue {min_eig}");
    }
}

#[test]
fn truncation_leak_grows_dims() {
    let circuit = CircuitSpec {
        mode_count: 1,
        inputs: vec![StateSpec::vacuum()],
        layers: vec![GateSpec::Squeeze { mode: 0, r: 0.8 }],
        detectors: vec![DetectorSpec::Heterodyne],
    };
    // dims 10 is undersized for r = 0.8; the runner must grow it
    let state = simulate_circuit(&circuit, 10).unwrap();
    assert!(state.dims[0] > 10);
    assert!(state.leak() <= 1e-6);
    let (_, cov) = state.mean_and_covariance();
    assert!((cov[(0, 0)] - (-1.6f64).exp()).abs() < 1e-4);
}

#[test]
fn subtraction_blocks_are_not_simulated() {
    let state = vacuum(10);
    let err = state
        .apply_gate(&GateSpec::PhotonSubtraction {
            mode: 0,
            model: crate::gates::SubtractionModel::Limit { kappa: 0.3 },
        })
        .unwrap_err();
    assert_eq!(err, OracleError::SubtractionNotSimulated);
}

#[test]
fn vacuum_wigner_matches_closed_form() {
    let grid = quasi_pdf(&vacuum(20), 0.0, GridBounds::default()).unwrap();
    assert!((grid.riemann_mass() - 1.0).abs() < 1e-3);
    for (iq, ip) in [(160, 160), (120, 200), (80, 160), (200, 240)] {
        let q = grid.q_at(iq);
        let p = grid.p_at(ip);
        let want = (-(q * q + p * p) / 2.0).exp() / (2.0 * std::f64::consts::PI);
        assert!(
            (grid.value(iq, ip) - want).abs() < 1e-6,
            "w({q},{p}) = {} want {want}",
            grid.value(iq, ip)
        );
    }
}

#[test]
fn displaced_state_peaks_at_plus_q() {
    let state = TruncatedState::from_state_spec(
        &StateSpec::Coherent { amplitude: Complex64::new(1.0, 0.5) },
        25,
    );
    let grid = quasi_pdf(&state, 0.0, GridBounds::default()).unwrap();
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for iq in 0..grid.nq {
        for ip in 0..grid.np {
            if grid.value(iq, ip) > best.2 {
                best = (iq, ip, grid.value(iq, ip));
            }
        }
    }
    assert!((grid.q_at(best.0) - 2.0).abs() < 0.051);
    assert!((grid.p_at(best.1) - 1.0).abs() < 0.051);
}

#[test]
fn fock_one_wigner_negative_at_origin_husimi_positive() {
    let state = TruncatedState::from_state_spec(&StateSpec::Fock { n: 1 }, 20);
    let wigner = quasi_pdf(&state, 0.0, GridBounds::default()).unwrap();
    let center = wigner.value(160, 160);
    let want = -1.0 / (2.0 * std::f64::consts::PI);
    assert!((center - want).abs() < 1e-6, "w(0,0) = {center}");
    // grid route vs closed form on a ring of points
    for (q, p) in [(0.5f64, 0.0f64), (1.0, -1.0), (2.0, 0.6)] {
        let iq = ((q + 8.0) / 0.05).round() as usize;
        let ip = ((p + 8.0) / 0.05).round() as usize;
        let want = fock_quasi_pdf(1, 0.0, wigner.q_at(iq), wigner.p_at(ip));
        assert!((wigner.value(iq, ip) - want).abs() < 1e-6);
    }
    let husimi = quasi_pdf(&state, -1.0, GridBounds::default()).unwrap();
    assert!(husimi.min_value() >= -1e-9);
}

#[test]
fn quasi_pdf_rejects_singular_requests() {
    assert!(matches!(
        quasi_pdf(&vacuum(15), 0.95, GridBounds::default()),
        Err(OracleError::OrderingTooSingular(_))
    ));
    // two-mode grids are out of scope
    let joint = TruncatedState::product(&vacuum(6), &vacuum(6));
    assert!(matches!(
        quasi_pdf(&joint, 0.0, GridBounds::default()),
        Err(OracleError::GridNeedsSingleMode)
    ));
}

#[test]
fn negativity_volume_examples() {
    let vac = quasi_pdf(&vacuum(20), 0.0, GridBounds::default()).unwrap();
    assert!(negativity_volume(&vac) < 1e-6);

    let fock1 = TruncatedState::from_state_spec(&StateSpec::Fock { n: 1 }, 20);
    let wigner = quasi_pdf(&fock1, 0.0, GridBounds::default()).unwrap();
    // brute-force reference: 2·(2·e^{-1/2} - 1)
    let want = 2.0 * (2.0 * (-0.5f64).exp() - 1.0);
    let got = negativity_volume(&wigner);
    assert!((got - want).abs() < 5e-3, "negativity {got} want {want}");
}

#[test]
fn negativity_monotone_under_smoothing() {
    for n in [1u32, 2] {
        let state = TruncatedState::from_state_spec(&StateSpec::Fock { n }, 25);
        let mut prev = -1.0;
        for s in [-1.0, -0.5, 0.0] {
            let grid = quasi_pdf(&state, s, GridBounds::default()).unwrap();
            let vol = negativity_volume(&grid);
            assert!(
                vol >= prev - 1e-6,
                "Fock({n}): negativity not monotone at s = {s}"
            );
            prev = vol;
        }
        assert!(prev > 0.1, "Fock({n}) Wigner negativity missing");
    }
}

#[test]
fn depth_scan_matches_closed_forms() {
    let fock1 = TruncatedState::from_state_spec(&StateSpec::Fock { n: 1 }, 25);
    let d = depth_scan(&fock1, 3.0).unwrap();
    assert!((d - (-1.0)).abs() < 1e-2, "Fock(1) depth {d}");

    let sq = TruncatedState::from_state_spec(&StateSpec::SqueezedVacuum { r: 0.3, phase: 0.0 }, 30);
    let d = depth_scan(&sq, 3.0).unwrap();
    assert!((d - (-0.6f64).exp()).abs() < 1e-2, "squeezed depth {d}");

    let d = depth_scan(&vacuum(20), 3.0).unwrap();
    assert!(d >= 0.9, "vacuum depth {d}");

    let thermal = TruncatedState::from_state_spec(&StateSpec::Thermal { mean_photons: 0.5 }, 30);
    let d = depth_scan(&thermal, 3.0).unwrap();
    assert!((d - 2.0).abs() < 1e-2, "thermal depth {d}");
}

#[test]
fn depth_monotonicity_between_families() {
    // below depth: positive; just above: negative or singular
    let cases = [
        (StateSpec::Fock { n: 1 }, -1.0),
        (StateSpec::SqueezedVacuum { r: 0.3, phase: 0.0 }, (-0.6f64).exp()),
    ];
    for (spec, depth) in cases {
        let state = TruncatedState::from_state_spec(&spec, 30);
        let chi = ChiGrid::new(&state);
        assert!(chi.positive_at(depth - 0.05), "{spec:?} below depth");
        assert!(!chi.positive_at(depth + 0.05), "{spec:?} above depth");
    }
}

fn random_low_rank_state(seed: u64, levels: usize, dims: usize) -> TruncatedState {
    let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut g = CMat::zeros(dims, dims);
    for i in 0..levels {
        for j in 0..levels {
            g[(i, j)] = Complex64::new(next() - 0.5, next() - 0.5);
        }
    }
    let rho = &g * g.adjoint();
    let tr: f64 = (0..dims).map(|i| rho[(i, i)].re).sum();
    TruncatedState {
        dims: vec![dims],
        rho: rho / Complex64::new(tr, 0.0),
    }
}

#[test]
fn pairing_identity_on_random_states() {
    // Tr[ρ₁ρ₂] = (4π) Σ w₁^(-s) · w₂^(s) · step² for each tested ordering
    for seed in [3u64, 11] {
        let rho1 = random_low_rank_state(seed, 4, 16);
        let rho2 = random_low_rank_state(seed + 100, 4, 16);
        let want = (&rho1.rho * &rho2.rho).trace().re;
        for s in [-0.5, 0.0, 0.5] {
            let w1 = quasi_pdf(&rho1, -s, GridBounds::default()).unwrap();
            let w2 = quasi_pdf(&rho2, s, GridBounds::default()).unwrap();
            let inner: f64 = w1
                .values
                .iter()
                .zip(w2.values.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * w1.step
                * w1.step;
            let got = 4.0 * std::f64::consts::PI * inner;
            assert!(
                (got - want).abs() < 1e-3,
                "pairing at s = {s}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn smoothing_consistency_between_orderings() {
    // w^(s') = Gaussian(σ² = s - s' per quadrature) ⊛ w^(s)
    let state = TruncatedState::from_state_spec(&StateSpec::Fock { n: 1 }, 25);
    let s_hi = 0.0;
    let s_lo = -0.6;
    let hi = quasi_pdf(&state, s_hi, GridBounds::default()).unwrap();
    let lo = quasi_pdf(&state, s_lo, GridBounds::default()).unwrap();
    let var = s_hi - s_lo;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * var);
    for (q, p) in [(0.0, 0.0), (1.0, 0.5), (-0.6, 1.2), (2.0, -2.0)] {
        let mut conv = 0.0;
        for iq in 0..hi.nq {
            let dq = q - hi.q_at(iq);
            if dq.abs() > 6.0 * var.sqrt() {
                continue;
            }
            for ip in 0..hi.np {
                let dp = p - hi.p_at(ip);
                if dp.abs() > 6.0 * var.sqrt() {
                    continue;
                }
                conv += hi.value(iq, ip) * norm * (-(dq * dq + dp * dp) / (2.0 * var)).exp();
            }
        }
        conv *= hi.step * hi.step;
        let iq = ((q + 8.0) / 0.05).round() as usize;
        let ip = ((p + 8.0) / 0.05).round() as usize;
        let direct = lo.value(iq, ip);
        assert!(
            (conv - direct).abs() < 1e-4,
            "smoothing mismatch at ({q},{p}): {conv} vs {direct}"
        );
    }
}

#[test]
fn born_probabilities_discrete() {
    let vac_onoff = CircuitSpec {
        mode_count: 1,
        inputs: vec![StateSpec::vacuum()],
        layers: vec![],
        detectors: vec![DetectorSpec::IdealOnOff],
    };
    match born_probabilities(&vac_onoff, 20).unwrap() {
        OutcomeDistribution::Discrete(ps) => {
            for (pattern, p) in ps {
                if pattern == vec![true] {
                    assert!((p - 1.0).abs() < 1e-9); // "true" = first element = no click
                } else {
                    assert!(p.abs() < 1e-9);
                }
            }
        }
        other => panic!("unexpected distribution {other:?}"),
    }

    let coherent_onoff = CircuitSpec {
        mode_count: 1,
        inputs: vec![StateSpec::Coherent { amplitude: Complex64::new(1.0, 0.0) }],
        layers: vec![],
        detectors: vec![DetectorSpec::IdealOnOff],
    };
    match born_probabilities(&coherent_onoff, 25).unwrap() {
        OutcomeDistribution::Discrete(ps) => {
            let p_vac = ps
                .iter()
                .find(|(pattern, _)| pattern == &vec![true])
                .unwrap()
                .1;
            assert!((p_vac - (-1.0f64).exp()).abs() < 1e-8);
        }
        other => panic!("unexpected distribution {other:?}"),
    }
}

#[test]
fn born_probabilities_heterodyne_covariance() {
    let circuit = CircuitSpec {
        mode_count: 1,
        inputs: vec![StateSpec::vacuum()],
        layers: vec![GateSpec::Squeeze { mode: 0, r: 0.2 }],
        detectors: vec![DetectorSpec::Heterodyne],
    };
    match born_probabilities(&circuit, 25).unwrap() {
        OutcomeDistribution::HeterodyneGrid(grid) => {
            assert!((grid.riemann_mass() - 1.0).abs() < 1e-3);
            // covariance of the grid density
            let mut m = [0.0f64; 2];
            let mut c: Matrix2<f64> = Matrix2::zeros();
            for iq in 0..grid.nq {
                for ip in 0..grid.np {
                    let w = grid.value(iq, ip) * grid.step * grid.step;
                    m[0] += w * grid.q_at(iq);
                    m[1] += w * grid.p_at(ip);
                }
            }
            for iq in 0..grid.nq {
                for ip in 0..grid.np {
                    let w = grid.value(iq, ip) * grid.step * grid.step;
                    let dq = grid.q_at(iq) - m[0];
                    let dp = grid.p_at(ip) - m[1];
                    c[(0, 0)] += w * dq * dq;
                    c[(1, 1)] += w * dp * dp;
                    c[(0, 1)] += w * dq * dp;
                }
            }
            assert!((c[(0, 0)] - ((-0.4f64).exp() + 1.0)).abs() < 1e-2);
            assert!((c[(1, 1)] - (0.4f64.exp() + 1.0)).abs() < 1e-2);
            assert!(c[(0, 1)].abs() < 1e-3);
        }
        other => panic!("unexpected distribution {other:?}"),
    }
}

#[test]
fn oracle_rejects_three_modes() {
    let circuit = CircuitSpec {
        mode_count: 3,
        inputs: vec![StateSpec::vacuum(); 3],
        layers: vec![],
        detectors: vec![DetectorSpec::Heterodyne; 3],
    };
    assert!(matches!(
        born_probabilities(&circuit, 10),
        Err(OracleError::TooManyModes(3))
    ));
}
