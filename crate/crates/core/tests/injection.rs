use lpoint_core::injection::*;
use proptest::prelude::*;

fn state_for(spec: &ProtocolSpec) -> DeviceState {
    DeviceState::new(&spec.dot, spec.mu_s, spec.mu_d, spec.delta_e_l_gamma)
}

/// Oracle: the charging ladder in closed form. The 7th electron goes onto
/// level l with 6 electrons present, so it needs E_l + 6U.
#[test]
fn seventh_electron_threshold_closed_form() {
    for u in [0.0, 0.01, 0.037] {
        let dot = DotSpec::ladder(6, 4, 0.05, 0.1, u).unwrap();
        let need = dot.level_energies[3] + 6.0 * u;
        assert!((dot.stop_window().0 - need).abs() < 1e-15);
        for (mu, want) in [(need - 1e-9, 6), (need, 7)] {
            let spec = ProtocolSpec { mu_s: mu, ..ProtocolSpec::with_dot(dot.clone(), 0.1) };
            let mut s = state_for(&spec);
            assert_eq!(fill_from_source(&mut s, &dot, &mut EventLog::new()), want);
        }
    }
}

#[test]
fn stop_window_fills_seven_with_l_last() {
    let spec = ProtocolSpec::default();
    let (lo, hi) = spec.dot.stop_window();
    for i in 0..50 {
        let mu = lo + (hi - lo) * i as f64 / 50.0;
        let mut s = state_for(&ProtocolSpec { mu_s: mu, ..spec.clone() });
        assert_eq!(fill_from_source(&mut s, &spec.dot, &mut EventLog::new()), 7);
        assert_eq!(s.l_electrons(QUBIT1, &spec.dot), 1);
        assert_eq!(s.x0_electrons(QUBIT1, &spec.dot), 6);
    }
}

#[test]
fn x0_path_gives_six_then_flush() {
    let spec = ProtocolSpec::default();
    let r = run_protocol(&spec, &StochasticParams { p_l: 0.0, rng_seed: 1 }, 0).unwrap();
    assert_eq!(r.current_counts, vec![6]);
    assert_eq!(r.detections, vec![Detection::X0]);
    let mut s = r.final_state.clone();
    let mut log = EventLog::new();
    assert_eq!(flush_drain(&mut s, &spec.dot, &mut log), 6);
    assert_eq!(s.x0_electrons(QUBIT2, &spec.dot), 0);
}

#[test]
fn certain_failure_flushes_each_retry() {
    let r = run_protocol(&ProtocolSpec::default(), &StochasticParams { p_l: 0.0, rng_seed: 3 }, 5).unwrap();
    assert!(!r.success);
    assert_eq!(r.retries, 5);
    assert_eq!(r.log.count(EventKind::DrainFlush), 5);
}

#[test]
fn certain_success_first_pass() {
    let r = run_protocol(&ProtocolSpec::default(), &StochasticParams { p_l: 1.0, rng_seed: 3 }, 5).unwrap();
    assert!(r.success);
    assert_eq!(r.retries, 0);
    assert_eq!(r.current_counts, vec![1]);
    assert_eq!(r.log.count(EventKind::Blockade), 1);
}

#[test]
fn monte_carlo_matches_geometric_law() {
    let s = monte_carlo(&ProtocolSpec::default(), 0.5, 2024, 10_000, 20).unwrap();
    assert!(s.within_sigma(3.0), "{s:?}");
    assert!((s.mean_retries - 1.0).abs() < 0.1);
}

#[test]
fn monte_carlo_is_thread_independent() {
    let spec = ProtocolSpec::default();
    let a = monte_carlo(&spec, 0.3, 7, 500, 6).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| monte_carlo(&spec, 0.3, 7, 500, 6).unwrap());
    assert_eq!(a, b);
}

/// Electron count after each event, replayed from the log.
fn replay_ok(log: &EventLog) -> bool {
    let mut n: i64 = 0;
    for e in log.events() {
        match e.kind {
            EventKind::Inject => n += e.n_moved as i64,
            EventKind::DrainFlush => n -= e.n_moved as i64,
            _ => {}
        }
        if n < 0 {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conservation_and_pauli(p in 0.0f64..=1.0, seed in any::<u64>(), retries in 0usize..8) {
        let spec = ProtocolSpec::default();
        let r = run_protocol(&spec, &StochasticParams { p_l: p, rng_seed: seed }, retries).unwrap();
        let injected: usize = r.log.events().iter().filter(|e| e.kind == EventKind::Inject).map(|e| e.n_moved).sum();
        let drained: usize = r.log.events().iter().filter(|e| e.kind == EventKind::DrainFlush).map(|e| e.n_moved).sum();
        prop_assert_eq!(r.final_state.total_electrons(), injected - drained);
        prop_assert!(replay_ok(&r.log));
        for d in &r.final_state.dots {
            prop_assert!(d.electrons() <= 2 * spec.dot.orbital_levels);
        }
        prop_assert!(r.log.events().iter().enumerate().all(|(i, e)| e.step == i));
    }

    #[test]
    fn stepwise_invariants(p in 0.0f64..=1.0, seed in any::<u64>()) {
        use rand::SeedableRng;
        let spec = ProtocolSpec::default();
        let dot = &spec.dot;
        let mut s = state_for(&spec);
        let mut log = EventLog::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..6 {
            let before = s.total_electrons();
            let n = log.len();
            fill_from_source(&mut s, dot, &mut log);
            shuttle(&mut s, dot, &mut rng, p, &mut log);
            flush_drain(&mut s, dot, &mut log);
            let delta: i64 = log.events()[n..].iter().map(|e| match e.kind {
                EventKind::Inject => e.n_moved as i64,
                EventKind::DrainFlush => -(e.n_moved as i64),
                _ => 0,
            }).sum();
            prop_assert_eq!(s.total_electrons() as i64, before as i64 + delta);
            prop_assert!(s.l_electrons(QUBIT2, dot) <= 1);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible(p in 0.0f64..=1.0, seed in any::<u64>()) {
        let spec = ProtocolSpec::default();
        let a = run_protocol(&spec, &StochasticParams { p_l: p, rng_seed: seed }, 10).unwrap();
        let b = run_protocol(&spec, &StochasticParams { p_l: p, rng_seed: seed }, 10).unwrap();
        prop_assert_eq!(a.log.to_csv_string(), b.log.to_csv_string());
    }

    #[test]
    fn fill_is_in_level_order(mu in -0.1f64..0.5) {
        let spec = ProtocolSpec { mu_s: mu, ..ProtocolSpec::default() };
        let mut s = state_for(&spec);
        fill_from_source(&mut s, &spec.dot, &mut EventLog::new());
        let d = s.dot(QUBIT1);
        // occupied levels form a prefix: no level is filled above an empty one
        let counts: Vec<usize> = (0..d.levels.len()).map(|j| d.level_count(j)).collect();
        let first_not_full = counts.iter().position(|&c| c < 2).unwrap_or(counts.len());
        prop_assert!(counts[first_not_full.min(counts.len())..].iter().skip(1).all(|&c| c == 0));
    }
}
