//! Noiseless comparison of a Rydberg ring with the Ising ring it encodes.

use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_ising_ring, build_rydberg_ring};
use super::observables::{initial_state, observables};
use super::propagate::Evolution;
use crate::error::{Error, Result};
use crate::quench::{InitialState, RydbergParams};
use crate::scoring::p2_distances;

/// Connected correlators of both models at one time, indexed by `ℓ − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RydbergIsingComparison {
    #[serde(rename = "L")]
    pub sites: usize,
    pub t: f64,
    pub ising: Vec<f64>,
    pub rydberg: Vec<f64>,
    /// Mean relative deviation over the distances that enter `P₂`.
    pub deviation: f64,
}

/// Evolves `initial` under the long-range Rydberg Hamiltonian and under the
/// nearest-neighbour Ising ring with the mapped `(g, J)`, and compares the
/// connected correlators at time `t` with the `P₂` formula.
pub fn rydberg_ising_comparison(
    params: &RydbergParams,
    initial: InitialState,
    t: f64,
) -> Result<RydbergIsingComparison> {
    let l = params.sites;
    let psi0 = initial_state(initial, l)?;
    let ising_h = build_ising_ring(l, params.ising_g(), params.ising_coupling())?;
    let rydberg_h = build_rydberg_ring(params)?;
    let profile = |h| -> Result<Vec<f64>> {
        let obs = observables(&Evolution::new(h, &psi0)?.state_at(t), l)?;
        Ok((1..=l / 2).map(|ell| obs.connected_at(ell)).collect())
    };
    let ising = profile(&ising_h)?;
    let rydberg = profile(&rydberg_h)?;
    let ells = p2_distances(l)?;
    let mut deviation = 0.0;
    for &ell in &ells {
        let th = ising[ell - 1];
        if th.abs() < crate::scoring::DIVISION_FLOOR {
            return Err(Error::DivisionGuard { ell, value: th });
        }
        deviation += ((rydberg[ell - 1] - th) / th).abs() / ells.len() as f64;
    }
    Ok(RydbergIsingComparison {
        sites: l,
        t,
        ising,
        rydberg,
        deviation,
    })
}
