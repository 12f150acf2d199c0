//! End-to-end use of the public API: ensemble of models, dephasing dynamics,
//! quantifiers and their average.

use scramble_core::dynamics::{
    build_liouvillian, propagate, rk4_oracle, uniform_grid, ChannelKind, DecoherenceChannel,
};
use scramble_core::models::{build_hamiltonian, initial_state, DisorderEnsemble, InitialState, ModelKind, ModelSpec};
use scramble_core::observables::{ensemble_average, quantifier_series};
use scramble_core::qcore::linalg::max_abs_diff;
use scramble_core::Partition;

#[test]
fn six_qubit_propagation_matches_rk4() {
    let spec = ModelSpec::with_defaults(ModelKind::Xxx, 6, 31).unwrap();
    let h = build_hamiltonian(&spec).unwrap();
    let ch = DecoherenceChannel::new(&h, ChannelKind::Computational, 0.1).unwrap();
    let l = build_liouvillian(&h, &ch).unwrap();
    let rho0 = initial_state(InitialState::Neel, 6).unwrap();
    let times = uniform_grid(2.0, 5).unwrap();
    let exact = propagate(&rho0, &l, &times).unwrap();
    let oracle = rk4_oracle(&rho0, &h, &ch, 0.01, &times).unwrap();
    for (a, b) in exact.states.iter().zip(&oracle.states) {
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-6);
    }
}

#[test]
fn ensemble_series_is_reproducible() {
    let run = || {
        let base = ModelSpec::with_defaults(ModelKind::Syk, 4, 0).unwrap();
        let ensemble = DisorderEnsemble::new(base, 4, 77);
        let part = Partition::first_qubit(4).unwrap();
        let times = uniform_grid(5.0, 11).unwrap();
        let series: Vec<_> = ensemble
            .realizations()
            .map(|spec| {
                let h = build_hamiltonian(&spec).unwrap();
                let ch = DecoherenceChannel::new(&h, ChannelKind::Energy, 0.1).unwrap();
                let l = build_liouvillian(&h, &ch).unwrap();
                let traj = propagate(&initial_state(InitialState::AllUp, 4).unwrap(), &l, &times)
                    .unwrap()
                    .with_model(spec);
                quantifier_series(&traj, &part, ch.basis()).unwrap()
            })
            .collect();
        ensemble_average(&series, Some(ensemble.master_seed)).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    let stats = a.stats.as_ref().unwrap();
    assert_eq!(stats.n_realizations, 4);
    assert!(stats.se_i[5] > 0.0);
    assert!(a.delta_c.iter().all(|&c| c <= 1e-9));
}
