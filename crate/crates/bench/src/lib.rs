//! Shared fixtures for the benchmarks.

use scramble_core::dynamics::{build_liouvillian, ChannelKind, DecoherenceChannel, Liouvillian};
use scramble_core::models::{build_hamiltonian, initial_state, InitialState, ModelKind, ModelSpec};
use scramble_core::DensityMatrix;

/// A `n`-qubit model realization with its generator and an all-up state.
pub fn fixture(kind: ModelKind, n: usize, channel: ChannelKind, gamma: f64) -> (Liouvillian, DensityMatrix) {
    let spec = ModelSpec::with_defaults(kind, n, 42).expect("valid model");
    let h = build_hamiltonian(&spec).expect("hamiltonian");
    let ch = DecoherenceChannel::new(&h, channel, gamma).expect("channel");
    let l = build_liouvillian(&h, &ch).expect("generator");
    (l, initial_state(InitialState::AllUp, n).expect("state"))
}
