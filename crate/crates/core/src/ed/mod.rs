//! Exact state-vector and density-matrix dynamics of small rings.
//!
//! Basis convention: bit `i` of a basis index is 1 when site `i` is excited
//! (`n_i = 1`, `σᶻ_i = +1`). The all-down state is index 0.

pub mod fidelity;
pub mod hamiltonian;
pub mod lindblad;
pub mod observables;
pub mod propagate;
pub mod sampler;

pub use fidelity::{rydberg_ising_comparison, RydbergIsingComparison};
pub use hamiltonian::{
    build_ising_ring, build_rydberg_ring, DenseHamiltonian, HamiltonianKind, MAX_ED_SITES,
};
pub use lindblad::{
    dephased_antipodal_series, dephasing_samples, lindblad_dephasing, lindblad_observe,
    peak_suppression, DensityMatrix, LindbladOptions,
};
pub use observables::{half_chain_entropy, initial_state, observables, probabilities, Observables};
pub use propagate::{evolve, Evolution, State};
pub use sampler::{noisy_shot_sampler, sample_state, NoiseParams};
