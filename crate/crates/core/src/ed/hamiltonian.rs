//! Ising and Rydberg ring Hamiltonians in the computational basis.
//!
//! Basis state `s` has bit `i` set when site `i` has `σᶻ_i = +1`
//! (Rydberg-excited, `n_i = 1`). Every Hamiltonian handled here is a diagonal
//! part plus a site-dependent transverse field `Σ_i h_i σˣ_i`, which is kept
//! in that structured form; [`DenseHamiltonian::to_dense`] expands it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quench::RydbergParams;

/// Largest ring accepted by the dense oracle.
pub const MAX_ED_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    Ising,
    Rydberg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    pub sites: usize,
    pub kind: HamiltonianKind,
    /// Diagonal matrix elements, indexed by basis state.
    pub diagonal: Vec<f64>,
    /// Coefficient of `σˣ_i` for each site.
    pub transverse: Vec<f64>,
}

/// `σᶻ_i` eigenvalue of basis state `s`.
#[inline]
pub fn spin(s: usize, i: usize) -> f64 {
    if (s >> i) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_size(sites: usize) -> Result<()> {
    if sites < 2 {
        return Err(Error::arg(format!("need at least two sites (got {sites})")));
    }
    if sites > MAX_ED_SITES {
        return Err(Error::Resource(format!(
            "L = {sites} exceeds the dense oracle limit of {MAX_ED_SITES} sites"
        )));
    }
    Ok(())
}

/// `H = J Σ σᶻ_i σᶻ_{i+1} + gJ Σ σˣ_i` on a ring (for L = 2 the bond appears twice).
pub fn build_ising_ring(sites: usize, g: f64, coupling: f64) -> Result<DenseHamiltonian> {
    check_size(sites)?;
    let dim = 1usize << sites;
    let diagonal = (0..dim)
        .map(|s| {
            (0..sites)
                .map(|i| spin(s, i) * spin(s, (i + 1) % sites))
                .sum::<f64>()
                * coupling
        })
        .collect();
    Ok(DenseHamiltonian {
        sites,
        kind: HamiltonianKind::Ising,
        diagonal,
        transverse: vec![g * coupling; sites],
    })
}

/// Rydberg Hamiltonian for atoms at arbitrary 3-D positions:
/// `Σ_{i<j} C6/r_ij⁶ n_i n_j + Σ_i (Ω_i/2) σˣ_i − Σ_i δ_i n_i`, with the
/// constant dropped. Sites flagged in `inactive` carry no terms at all.
pub(crate) fn rydberg_from_geometry(
    c6: f64,
    positions: &[[f64; 3]],
    omega: &[f64],
    delta: &[f64],
    inactive: &[bool],
) -> Result<DenseHamiltonian> {
    let sites = positions.len();
    check_size(sites)?;
    // Couplings in the spin language: V n_i n_j = (V/4)(1 + z_i + z_j + z_i z_j).
    let mut zz = vec![0.0; sites * sites];
    let mut field = vec![0.0; sites];
    for i in 0..sites {
        if inactive[i] {
            continue;
        }
        field[i] -= 0.5 * delta[i];
        for j in i + 1..sites {
            if inactive[j] {
                continue;
            }
            let r2: f64 = (0..3)
                .map(|d| (positions[i][d] - positions[j][d]).powi(2))
                .sum();
            if r2 == 0.0 {
                return Err(Error::Domain(format!("atoms {i} and {j} coincide")));
            }
            let v = 0.25 * c6 / r2.powi(3);
            zz[i * sites + j] = v;
            field[i] += v;
            field[j] += v;
        }
    }
    let dim = 1usize << sites;
    let diagonal = (0..dim)
        .map(|s| {
            let mut e = 0.0;
            for i in 0..sites {
                let zi = spin(s, i);
                e += field[i] * zi;
                for j in i + 1..sites {
                    e += zz[i * sites + j] * zi * spin(s, j);
                }
            }
            e
        })
        .collect();
    let transverse = (0..sites)
        .map(|i| if inactive[i] { 0.0 } else { 0.5 * omega[i] })
        .collect();
    Ok(DenseHamiltonian {
        sites,
        kind: HamiltonianKind::Rydberg,
        diagonal,
        transverse,
    })
}

/// Rydberg ring with chord-distance van der Waals couplings.
pub fn build_rydberg_ring(params: &RydbergParams) -> Result<DenseHamiltonian> {
    let sites = params.sites;
    check_size(sites)?;
    if params.positions.len() != sites {
        return Err(Error::arg(format!(
            "{} positions given for {sites} sites",
            params.positions.len()
        )));
    }
    let pos: Vec<[f64; 3]> = params.positions.iter().map(|&[x, y]| [x, y, 0.0]).collect();
    rydberg_from_geometry(
        params.c6,
        &pos,
        &vec![params.omega; sites],
        &vec![params.delta; sites],
        &vec![false; sites],
    )
}

impl DenseHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `y = H x`.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        for (s, ys) in y.iter_mut().enumerate() {
            let mut acc = x[s] * self.diagonal[s];
            for (i, &h) in self.transverse.iter().enumerate() {
                if h != 0.0 {
                    acc = acc + x[s ^ (1 << i)] * h;
                }
            }
            *ys = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for s in 0..dim {
            for (i, &h) in self.transverse.iter().enumerate() {
                m[(s ^ (1 << i), s)] += h;
            }
        }
        m
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let off: f64 = self.transverse.iter().map(|h| h.abs()).sum();
        let lo = self.diagonal.iter().copied().fold(f64::INFINITY, f64::min) - off;
        let hi = self
            .diagonal
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            + off;
        (lo, hi)
    }

    /// True when the Hamiltonian commutes with the cyclic shift `i → i+1`.
    pub fn is_translation_invariant(&self, tol: f64) -> bool {
        let h0 = self.transverse[0];
        if self.transverse.iter().any(|h| (h - h0).abs() > tol) {
            return false;
        }
        (0..self.dim())
            .all(|s| (self.diagonal[s] - self.diagonal[rotate(s, self.sites)]).abs() <= tol)
    }

    /// Coefficient of the uniform `Σ σᶻ_i` term, read off from the diagonal.
    pub fn uniform_z_field(&self) -> f64 {
        // E(s) averaged against z_0 isolates the linear coefficient of z_0.
        let dim = self.dim() as f64;
        let sum: f64 = self
            .diagonal
            .iter()
            .enumerate()
            .map(|(s, e)| e * spin(s, 0))
            .sum();
        sum / dim
    }

    /// Coefficient of `σᶻ_i σᶻ_j`, read off from the diagonal.
    pub fn zz_coefficient(&self, i: usize, j: usize) -> f64 {
        let dim = self.dim() as f64;
        let sum: f64 = self
            .diagonal
            .iter()
            .enumerate()
            .map(|(s, e)| e * spin(s, i) * spin(s, j))
            .sum();
        sum / dim
    }
}

/// Cyclic shift of a basis state by one site: site `i` moves to `i + 1`.
#[inline]
pub fn rotate(s: usize, sites: usize) -> usize {
    let mask = (1usize << sites) - 1;
    ((s << 1) | (s >> (sites - 1))) & mask
}
