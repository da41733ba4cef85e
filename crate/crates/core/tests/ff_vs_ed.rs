//! Free-fermion correlators against dense exact diagonalisation.

use mbqs_core::ed::{build_ising_ring, initial_state, observables, Evolution};
use mbqs_core::freefermion::FreeFermionEngine;
use mbqs_core::quench::InitialState;

const TOL: f64 = 1e-8;

fn compare(sites: usize, g: f64, coupling: f64, state: InitialState, times: &[f64]) -> f64 {
    let engine = FreeFermionEngine::from_parts(sites, g, coupling, state).unwrap();
    let h = build_ising_ring(sites, g, coupling).unwrap();
    let evo = Evolution::new(&h, &initial_state(state, sites).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for &t in times {
        let ed = observables(&evo.state_at(t), sites).unwrap();
        let ff = engine.correlations(t).unwrap();
        worst = worst.max((ed.mean_one_point() - ff.one_point).abs());
        for ell in 1..=sites / 2 {
            worst = worst.max((ed.two_point_at(ell) - ff.two_point[ell - 1]).abs());
            worst = worst.max((ed.connected_at(ell) - ff.connected[ell - 1]).abs());
        }
    }
    worst
}

fn grid(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn even_rings_both_states() {
    for sites in [4, 6, 8, 10] {
        for g in [0.5, 1.0] {
            for state in [InitialState::Plus, InitialState::Down] {
                let err = compare(sites, g, 1.0, state, &grid(21, 0.4 * sites as f64));
                assert!(err < TOL, "L={sites} g={g} {state}: {err:e}");
            }
        }
    }
}

#[test]
fn odd_rings_and_other_couplings() {
    for sites in [3, 5, 7, 9] {
        for (g, coupling) in [(0.3, 1.0), (1.0, 1.22), (1.7, 0.8)] {
            for state in [InitialState::Plus, InitialState::Down] {
                let err = compare(sites, g, coupling, state, &grid(9, 3.0));
                assert!(err < TOL, "L={sites} g={g} J={coupling} {state}: {err:e}");
            }
        }
    }
}

#[test]
fn transverse_field_off_is_static() {
    for state in [InitialState::Plus, InitialState::Down] {
        let err = compare(6, 0.0, 1.0, state, &grid(5, 2.0));
        assert!(err < TOL, "{state}: {err:e}");
    }
}
