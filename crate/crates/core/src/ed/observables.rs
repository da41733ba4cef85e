//! Initial product states and σᶻ observables of dense states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hamiltonian::spin;
use crate::error::{Error, Result};
use crate::quench::InitialState;

/// Product initial state in the computational basis.
pub fn initial_state(state: InitialState, sites: usize) -> Result<Vec<Complex64>> {
    let dim = 1usize << sites;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    match state {
        InitialState::Plus => {
            let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
            psi.iter_mut().for_each(|p| *p = a);
        }
        InitialState::Down => psi[0] = Complex64::new(1.0, 0.0),
        InitialState::Afm => {
            if sites % 2 == 1 {
                return Err(Error::arg(format!(
                    "antiferromagnetic state needs even L (got {sites})"
                )));
            }
            let s = (0..sites)
                .filter(|i| i % 2 == 1)
                .fold(0usize, |acc, i| acc | (1 << i));
            psi[s] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(psi)
}

/// Single-site and pair σᶻ statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    /// `⟨σᶻ_i⟩`
    pub one_point: Vec<f64>,
    /// `⟨σᶻ_i σᶻ_j⟩`
    pub two_point: DMatrix<f64>,
    /// `⟨σᶻ_i σᶻ_j⟩ − ⟨σᶻ_i⟩⟨σᶻ_j⟩`
    pub connected: DMatrix<f64>,
}

impl Observables {
    /// From computational-basis probabilities `p_s`.
    pub fn from_probabilities(p: &[f64], sites: usize) -> Self {
        let mut one = vec![0.0; sites];
        let mut two = DMatrix::zeros(sites, sites);
        for (s, &ps) in p.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for i in 0..sites {
                let zi = spin(s, i);
                one[i] += ps * zi;
                for j in i + 1..sites {
                    two[(i, j)] += ps * zi * spin(s, j);
                }
            }
        }
        for i in 0..sites {
            two[(i, i)] = p.iter().sum();
            for j in 0..i {
                two[(i, j)] = two[(j, i)];
            }
        }
        let connected = DMatrix::from_fn(sites, sites, |i, j| two[(i, j)] - one[i] * one[j]);
        Observables {
            one_point: one,
            two_point: two,
            connected,
        }
    }

    /// Translation average of the connected correlator at distance `ell`.
    pub fn connected_at(&self, ell: usize) -> f64 {
        let l = self.one_point.len();
        (0..l)
            .map(|i| self.connected[(i, (i + ell) % l)])
            .sum::<f64>()
            / l as f64
    }

    /// Translation average of `⟨σᶻ_i σᶻ_{i+ℓ}⟩`.
    pub fn two_point_at(&self, ell: usize) -> f64 {
        let l = self.one_point.len();
        (0..l)
            .map(|i| self.two_point[(i, (i + ell) % l)])
            .sum::<f64>()
            / l as f64
    }

    /// Site average of `⟨σᶻ_i⟩`.
    pub fn mean_one_point(&self) -> f64 {
        self.one_point.iter().sum::<f64>() / self.one_point.len() as f64
    }
}

pub fn probabilities(psi: &[Complex64]) -> Vec<f64> {
    psi.iter().map(|z| z.norm_sqr()).collect()
}

pub fn observables(psi: &[Complex64], sites: usize) -> Result<Observables> {
    if psi.len() != 1 << sites {
        return Err(Error::arg(format!(
            "state of length {} does not match L = {sites}",
            psi.len()
        )));
    }
    Ok(Observables::from_probabilities(&probabilities(psi), sites))
}

/// Von Neumann entropy (nats) of sites `0..L/2` against the rest.
pub fn half_chain_entropy(psi: &[Complex64], sites: usize) -> Result<f64> {
    if sites % 2 == 1 {
        return Err(Error::arg(format!(
            "half-chain entropy needs even L (got {sites})"
        )));
    }
    if psi.len() != 1 << sites {
        return Err(Error::arg(format!(
            "state of length {} does not match L = {sites}",
            psi.len()
        )));
    }
    let half = 1usize << (sites / 2);
    // Row index: low bits (left half); column: high bits.
    let m = DMatrix::from_fn(half, half, |a, b| psi[a | (b << (sites / 2))]);
    let sv = m.singular_values();
    Ok(sv
        .iter()
        .map(|s| s * s)
        .filter(|&l| l > 1e-300)
        .map(|l| -l * l.ln())
        .sum::<f64>()
        .max(0.0))
}
