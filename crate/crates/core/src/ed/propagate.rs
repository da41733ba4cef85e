//! Exact unitary evolution `e^{−iHt} ψ₀`.
//!
//! Three routes, chosen once per (H, ψ₀):
//! - translation-invariant H and ψ₀: diagonalise H in the zero-momentum
//!   sector (dimension ≈ 2^L / L) and apply phases;
//! - otherwise, full diagonalisation when 2^L ≤ [`DENSE_EIGEN_MAX_DIM`];
//! - otherwise a Chebyshev expansion of the propagator using only `H x`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::{rotate, DenseHamiltonian};
use crate::error::{Error, Result};

/// Largest Hilbert-space dimension diagonalised in full.
pub const DENSE_EIGEN_MAX_DIM: usize = 1024;

const NORM_TOL: f64 = 1e-10;

pub type State = Vec<Complex64>;

pub fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_state(h: &DenseHamiltonian, psi0: &[Complex64]) -> Result<()> {
    if psi0.len() != h.dim() {
        return Err(Error::arg(format!(
            "state has {} amplitudes but the Hilbert space has dimension {}",
            psi0.len(),
            h.dim()
        )));
    }
    let n = norm(psi0);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::arg(format!(
            "initial state is not normalised (norm {n})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Route {
    /// Eigenpairs in a reduced basis, with the map back to the full space.
    Spectral {
        energies: Vec<f64>,
        vectors: DMatrix<f64>,
        coefficients: Vec<Complex64>,
        embedding: Embedding,
    },
    Chebyshev {
        h: DenseHamiltonian,
        psi0: State,
    },
}

#[derive(Debug, Clone)]
enum Embedding {
    Identity,
    /// Zero-momentum basis: `rep_of[s]` is the index of the orbit of `s`,
    /// `orbit_size[r]` the number of states in orbit `r`.
    Momentum {
        rep_of: Vec<usize>,
        orbit_size: Vec<usize>,
    },
}

/// Prepared propagator for one Hamiltonian and one initial state.
#[derive(Debug, Clone)]
pub struct Evolution {
    dim: usize,
    route: Route,
}

impl Evolution {
    pub fn new(h: &DenseHamiltonian, psi0: &[Complex64]) -> Result<Self> {
        check_state(h, psi0)?;
        let dim = h.dim();
        let route = if h.is_translation_invariant(1e-12) && is_translation_invariant(psi0, h.sites)
        {
            momentum_route(h, psi0)
        } else if dim <= DENSE_EIGEN_MAX_DIM {
            dense_route(h, psi0)
        } else {
            Route::Chebyshev {
                h: h.clone(),
                psi0: psi0.to_vec(),
            }
        };
        Ok(Evolution { dim, route })
    }

    /// Always use the Chebyshev route.
    pub fn chebyshev(h: &DenseHamiltonian, psi0: &[Complex64]) -> Result<Self> {
        check_state(h, psi0)?;
        Ok(Evolution {
            dim: h.dim(),
            route: Route::Chebyshev {
                h: h.clone(),
                psi0: psi0.to_vec(),
            },
        })
    }

    /// Always diagonalise in the full space.
    pub fn dense(h: &DenseHamiltonian, psi0: &[Complex64]) -> Result<Self> {
        check_state(h, psi0)?;
        Ok(Evolution {
            dim: h.dim(),
            route: dense_route(h, psi0),
        })
    }

    pub fn state_at(&self, t: f64) -> State {
        match &self.route {
            Route::Spectral {
                energies,
                vectors,
                coefficients,
                embedding,
            } => {
                let phased: DVector<Complex64> = DVector::from_iterator(
                    energies.len(),
                    energies
                        .iter()
                        .zip(coefficients)
                        .map(|(&e, &c)| c * Complex64::from_polar(1.0, -e * t)),
                );
                let reduced: Vec<Complex64> = (0..vectors.nrows())
                    .map(|r| {
                        vectors
                            .row(r)
                            .iter()
                            .zip(phased.iter())
                            .map(|(&v, &c)| c * v)
                            .sum()
                    })
                    .collect();
                match embedding {
                    Embedding::Identity => reduced,
                    Embedding::Momentum { rep_of, orbit_size } => (0..self.dim)
                        .map(|s| {
                            let r = rep_of[s];
                            reduced[r] / (orbit_size[r] as f64).sqrt()
                        })
                        .collect(),
                }
            }
            Route::Chebyshev { h, psi0 } => chebyshev_propagate(h, psi0, t),
        }
    }
}

/// `e^{−iHt} ψ₀` in one call.
pub fn evolve(h: &DenseHamiltonian, psi0: &[Complex64], t: f64) -> Result<State> {
    Ok(Evolution::new(h, psi0)?.state_at(t))
}

fn is_translation_invariant(psi: &[Complex64], sites: usize) -> bool {
    (0..psi.len()).all(|s| (psi[s] - psi[rotate(s, sites)]).norm() <= 1e-12)
}

fn dense_route(h: &DenseHamiltonian, psi0: &[Complex64]) -> Route {
    let eig = h.to_dense().symmetric_eigen();
    let vectors = eig.eigenvectors;
    let coefficients = (0..vectors.ncols())
        .map(|c| {
            vectors
                .column(c)
                .iter()
                .zip(psi0)
                .map(|(&v, &p)| p * v)
                .sum()
        })
        .collect();
    Route::Spectral {
        energies: eig.eigenvalues.iter().copied().collect(),
        vectors,
        coefficients,
        embedding: Embedding::Identity,
    }
}

fn momentum_route(h: &DenseHamiltonian, psi0: &[Complex64]) -> Route {
    let sites = h.sites;
    let dim = h.dim();
    let mut rep_of = vec![usize::MAX; dim];
    let mut reps = Vec::new();
    let mut orbit_size = Vec::new();
    for s in 0..dim {
        if rep_of[s] != usize::MAX {
            continue;
        }
        let r = reps.len();
        let mut x = s;
        let mut size = 0;
        loop {
            if rep_of[x] == r {
                break;
            }
            rep_of[x] = r;
            size += 1;
            x = rotate(x, sites);
        }
        reps.push(s);
        orbit_size.push(size);
    }
    let n = reps.len();
    let hx = h.transverse[0];
    let mut m = DMatrix::zeros(n, n);
    for (r, &s) in reps.iter().enumerate() {
        m[(r, r)] = h.diagonal[s];
        for i in 0..sites {
            let r2 = rep_of[s ^ (1 << i)];
            m[(r2, r)] += hx * (orbit_size[r] as f64 / orbit_size[r2] as f64).sqrt();
        }
    }
    let eig = m.symmetric_eigen();
    let vectors = eig.eigenvectors;
    let reduced_psi: Vec<Complex64> = reps
        .iter()
        .zip(&orbit_size)
        .map(|(&s, &size)| psi0[s] * (size as f64).sqrt())
        .collect();
    let coefficients = (0..n)
        .map(|c| {
            vectors
                .column(c)
                .iter()
                .zip(&reduced_psi)
                .map(|(&v, &p)| p * v)
                .sum()
        })
        .collect();
    Route::Spectral {
        energies: eig.eigenvalues.iter().copied().collect(),
        vectors,
        coefficients,
        embedding: Embedding::Momentum { rep_of, orbit_size },
    }
}

/// Bessel functions `J_0(x) … J_{n}(x)` by Miller's backward recurrence.
pub(crate) fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    let ax = x.abs();
    let top = n.max(ax as usize);
    let start = top + 30 + (40.0 * top as f64).sqrt() as usize;
    let mut out = vec![0.0; n + 1];
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (0..=start).rev() {
        if k <= n {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            // Rescale to avoid overflow.
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for (k, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && k % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

fn chebyshev_propagate(h: &DenseHamiltonian, psi0: &[Complex64], t: f64) -> State {
    if t == 0.0 {
        return psi0.to_vec();
    }
    let (lo, hi) = h.spectral_bounds();
    let half_width = 0.5 * (hi - lo) * 1.01 + 1e-12;
    let center = 0.5 * (hi + lo);
    let x = half_width * t;
    let n_terms = (x.abs() + 30.0 + 10.0 * x.abs().cbrt()) as usize;
    let bessel = bessel_j_sequence(x, n_terms);
    let dim = psi0.len();
    let scaled = |v: &[Complex64], out: &mut [Complex64]| {
        h.apply(v, out);
        for (o, &vi) in out.iter_mut().zip(v) {
            *o = (*o - vi * center) / half_width;
        }
    };
    let mut t_prev = psi0.to_vec();
    let mut t_cur = vec![Complex64::new(0.0, 0.0); dim];
    scaled(&t_prev, &mut t_cur);
    let mut acc: Vec<Complex64> = psi0.iter().map(|&p| p * bessel[0]).collect();
    let mut phase = Complex64::new(0.0, -1.0);
    for (a, &c) in acc.iter_mut().zip(&t_cur) {
        *a += c * phase * (2.0 * bessel[1]);
    }
    let mut t_next = vec![Complex64::new(0.0, 0.0); dim];
    for (k, &jk) in bessel.iter().enumerate().skip(2) {
        scaled(&t_cur, &mut t_next);
        for (n, &p) in t_next.iter_mut().zip(&t_prev) {
            *n = *n * 2.0 - p;
        }
        phase *= Complex64::new(0.0, -1.0);
        let coeff = phase * (2.0 * jk);
        for (a, &v) in acc.iter_mut().zip(&t_next) {
            *a += v * coeff;
        }
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut t_next);
        if k as f64 > x.abs() && jk.abs() < 1e-18 {
            break;
        }
    }
    let global = Complex64::from_polar(1.0, -center * t);
    acc.iter().map(|&a| a * global).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::hamiltonian::build_ising_ring;

    fn plus_state(sites: usize) -> State {
        let dim = 1 << sites;
        vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim]
    }

    fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn bessel_values() {
        // J_0(1), J_1(1), J_5(10)
        let v = bessel_j_sequence(1.0, 3);
        assert!((v[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((v[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        let w = bessel_j_sequence(10.0, 6);
        assert!((w[5] - (-0.234_061_528_186_793_6)).abs() < 1e-13);
        // J_0² + 2 Σ_{k≥1} J_k² = 1
        let big = bessel_j_sequence(200.0, 260);
        let s2 = big[0] * big[0] + 2.0 * big.iter().skip(1).map(|b| b * b).sum::<f64>();
        assert!((s2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree() {
        let h = build_ising_ring(6, 0.8, 1.1).unwrap();
        let psi = plus_state(6);
        let mom = Evolution::new(&h, &psi).unwrap();
        let dense = Evolution::dense(&h, &psi).unwrap();
        let cheb = Evolution::chebyshev(&h, &psi).unwrap();
        for &t in &[0.0, 0.3, 2.7, 11.0] {
            let a = mom.state_at(t);
            assert!(distance(&a, &dense.state_at(t)) < 1e-11);
            assert!(distance(&a, &cheb.state_at(t)) < 1e-11);
            assert!((norm(&a) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn non_invariant_state_uses_full_space() {
        let h = build_ising_ring(5, 0.6, 1.0).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 32];
        psi[0b00101] = Complex64::new(1.0, 0.0);
        let e = Evolution::new(&h, &psi).unwrap();
        let c = Evolution::chebyshev(&h, &psi).unwrap();
        assert!(distance(&e.state_at(1.9), &c.state_at(1.9)) < 1e-11);
    }

    #[test]
    fn diagonal_hamiltonian_gives_phase_only() {
        let h = build_ising_ring(4, 0.0, 1.0).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); 16];
        psi[3] = Complex64::new(1.0, 0.0);
        let out = evolve(&h, &psi, 1.234).unwrap();
        assert!((out[3].norm() - 1.0).abs() < 1e-12);
        let expected = Complex64::from_polar(1.0, -h.diagonal[3] * 1.234);
        assert!((out[3] - expected).norm() < 1e-12);
    }

    #[test]
    fn rejects_unnormalised_state() {
        let h = build_ising_ring(3, 1.0, 1.0).unwrap();
        let psi = vec![Complex64::new(1.0, 0.0); 8];
        assert!(matches!(evolve(&h, &psi, 1.0), Err(Error::Argument(_))));
    }
}
