//! Dense Lindblad evolution with σᶻ dephasing on every site.
//!
//! `∂ρ/∂t = −i[H, ρ] + γ Σ_m (σᶻ_m ρ σᶻ_m − ρ)`. In the computational basis
//! the dissipator is diagonal: `(Dρ)_ab = −2γ · hamming(a, b) · ρ_ab`.
//! Integration is classical RK4; the step is halved whenever the trace drifts
//! by more than the tolerance within one step.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::{build_ising_ring, DenseHamiltonian};
use super::observables::{initial_state, Observables};
use crate::error::{Error, Result};
use crate::quench::InitialState;
use crate::scoring::DephasingSample;
use crate::surge::fermi_time;

/// Largest ring accepted for dense density matrices.
pub const MAX_LINDBLAD_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    /// Largest RK4 step, in units of `1 / ‖H‖`.
    pub step_fraction: f64,
    /// Allowed trace drift per step.
    pub trace_tol: f64,
    /// Number of step halvings before giving up.
    pub max_halvings: u32,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            step_fraction: 0.2,
            trace_tol: 1e-10,
            max_halvings: 12,
        }
    }
}

/// Row-major dense density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        DensityMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|a| self.data[a * self.dim + a]).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|a| self.data[a * self.dim + a].re)
            .collect()
    }

    pub fn observables(&self, sites: usize) -> Observables {
        Observables::from_probabilities(&self.probabilities(), sites)
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|ρ_ab − conj(ρ_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..a {
                worst = worst.max((self.data[a * n + b] - self.data[b * n + a].conj()).norm());
            }
        }
        worst
    }
}

struct Generator<'a> {
    h: &'a DenseHamiltonian,
    gamma: f64,
}

impl Generator<'_> {
    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.h.dim();
        let diag = &self.h.diagonal;
        let field = &self.h.transverse;
        let minus_i = Complex64::new(0.0, -1.0);
        out.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
            let da = diag[a];
            let rho_row = &rho[a * n..(a + 1) * n];
            for (b, o) in row.iter_mut().enumerate() {
                let r = rho_row[b];
                // [H, ρ]_ab
                let mut comm = r * (da - diag[b]);
                for (i, &h) in field.iter().enumerate() {
                    if h != 0.0 {
                        let bit = 1 << i;
                        comm += (rho[(a ^ bit) * n + b] - rho_row[b ^ bit]) * h;
                    }
                }
                let flips = (a ^ b).count_ones() as f64;
                *o = minus_i * comm - r * (2.0 * self.gamma * flips);
            }
        });
    }
}

/// Integrates the dephasing master equation from a pure state and calls
/// `observe(t, ρ(t))` at every requested time (ascending, non-negative).
pub fn lindblad_observe<F>(
    h: &DenseHamiltonian,
    psi0: &[Complex64],
    gamma: f64,
    times: &[f64],
    options: LindbladOptions,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(f64, &DensityMatrix),
{
    if h.sites > MAX_LINDBLAD_SITES {
        return Err(Error::Resource(format!(
            "dense Lindblad evolution is limited to L <= {MAX_LINDBLAD_SITES} (got {})",
            h.sites
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::arg(format!(
            "dephasing rate must be non-negative (got {gamma})"
        )));
    }
    if psi0.len() != h.dim() {
        return Err(Error::arg("initial state does not match the Hamiltonian"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::arg("time grid must be ascending and non-negative"));
    }
    let (lo, hi) = h.spectral_bounds();
    let scale = (hi - lo).max(1e-12) + 4.0 * gamma * h.sites as f64;
    let base_step = options.step_fraction / scale;
    let gen = Generator { h, gamma };

    let mut rho = DensityMatrix::pure(psi0);
    let n2 = rho.data.len();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n2];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let mut t = 0.0;
    for &target in times {
        while t < target {
            let mut dt = base_step.min(target - t);
            let mut halvings = 0;
            loop {
                let tr0 = rho.trace();
                gen.apply(&rho.data, &mut k1);
                axpy(&rho.data, &k1, 0.5 * dt, &mut tmp);
                gen.apply(&tmp, &mut k2);
                axpy(&rho.data, &k2, 0.5 * dt, &mut tmp);
                gen.apply(&tmp, &mut k3);
                axpy(&rho.data, &k3, dt, &mut tmp);
                gen.apply(&tmp, &mut k4);
                for i in 0..n2 {
                    tmp[i] = rho.data[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
                }
                let tr1: Complex64 = (0..rho.dim).map(|a| tmp[a * rho.dim + a]).sum();
                let drift = (tr1 - tr0).norm();
                if drift.is_finite() && drift <= options.trace_tol {
                    std::mem::swap(&mut rho.data, &mut tmp);
                    t += dt;
                    break;
                }
                halvings += 1;
                if halvings > options.max_halvings {
                    return Err(Error::Integration(format!(
                        "trace drift {drift:e} per step at t = {t} persists after {} halvings (step {dt:e})",
                        options.max_halvings
                    )));
                }
                dt *= 0.5;
            }
        }
        observe(target, &rho);
    }
    Ok(())
}

fn axpy(x: &[Complex64], y: &[Complex64], a: f64, out: &mut [Complex64]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + yi * a;
    }
}

/// Density matrices at the requested times.
pub fn lindblad_dephasing(
    h: &DenseHamiltonian,
    psi0: &[Complex64],
    gamma: f64,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(times.len());
    lindblad_observe(
        h,
        psi0,
        gamma,
        times,
        LindbladOptions::default(),
        |_, rho| out.push(rho.clone()),
    )?;
    Ok(out)
}

/// Translation-averaged antipodal connected correlator along a time grid.
pub fn dephased_antipodal_series(
    h: &DenseHamiltonian,
    psi0: &[Complex64],
    gamma: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    let sites = h.sites;
    let mut out = Vec::with_capacity(times.len());
    lindblad_observe(
        h,
        psi0,
        gamma,
        times,
        LindbladOptions::default(),
        |_, rho| out.push(rho.observables(sites).connected_at(sites / 2)),
    )?;
    Ok(out)
}

/// Suppression `η(γ)` of the antipodal connected peak: the largest value on
/// the grid with dephasing rate `γ` over the largest noiseless value.
pub fn peak_suppression(
    h: &DenseHamiltonian,
    psi0: &[Complex64],
    gammas: &[f64],
    times: &[f64],
) -> Result<Vec<f64>> {
    let peak = |gamma: f64| -> Result<f64> {
        Ok(dephased_antipodal_series(h, psi0, gamma, times)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    };
    let base = peak(0.0)?;
    if !(base > 0.0) {
        return Err(Error::Domain(format!(
            "noiseless antipodal correlator has no positive peak on the grid (max {base})"
        )));
    }
    gammas.iter().map(|&g| Ok(peak(g)? / base)).collect()
}

/// Suppression samples over a grid of ring sizes, couplings and rates for
/// the Ising ring with `J = 1`. Each series covers `[0, 1.3 t_F]` with step
/// `dt`.
pub fn dephasing_samples(
    sites: &[usize],
    gs: &[f64],
    gammas: &[f64],
    initial: InitialState,
    dt: f64,
) -> Result<Vec<DephasingSample>> {
    if !(dt > 0.0) {
        return Err(Error::arg(format!("time step must be positive (got {dt})")));
    }
    let mut out = Vec::with_capacity(sites.len() * gs.len() * gammas.len());
    for &l in sites {
        for &g in gs {
            let h = build_ising_ring(l, g, 1.0)?;
            let psi0 = initial_state(initial, l)?;
            let window = 1.3 * fermi_time(l, g, 1.0);
            let n = (window / dt).ceil() as usize;
            let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
            let etas = peak_suppression(&h, &psi0, gammas, &times)?;
            out.extend(
                gammas
                    .iter()
                    .zip(etas)
                    .map(|(&gamma, eta)| DephasingSample {
                        gamma,
                        g,
                        sites: l,
                        eta,
                    }),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::propagate::evolve;

    #[test]
    fn zero_rate_matches_unitary_evolution() {
        let h = build_ising_ring(4, 1.0, 1.0).unwrap();
        let psi = initial_state(InitialState::Down, 4).unwrap();
        let times = [0.0, 0.4, 1.1];
        let worst = |options: LindbladOptions| {
            let mut worst = 0.0f64;
            lindblad_observe(&h, &psi, 0.0, &times, options, |t, rho| {
                let pure = DensityMatrix::pure(&evolve(&h, &psi, t).unwrap());
                for (a, b) in rho.data.iter().zip(&pure.data) {
                    worst = worst.max((a - b).norm());
                }
            })
            .unwrap();
            worst
        };
        // RK4 error falls as the fourth power of the step
        assert!(worst(LindbladOptions::default()) < 1e-6);
        let fine = LindbladOptions {
            step_fraction: 0.05,
            ..LindbladOptions::default()
        };
        let w = worst(fine);
        assert!(w < 1e-8, "{w:e}");
    }

    #[test]
    fn trace_and_positivity() {
        let h = build_ising_ring(4, 0.7, 1.0).unwrap();
        let psi = initial_state(InitialState::Plus, 4).unwrap();
        let rhos = lindblad_dephasing(&h, &psi, 0.3, &[0.5, 2.0]).unwrap();
        for rho in &rhos {
            assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
            assert!(rho.min_eigenvalue() > -1e-8);
            assert!(rho.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn strong_dephasing_suppresses_correlations() {
        let h = build_ising_ring(4, 1.0, 1.0).unwrap();
        let psi = initial_state(InitialState::Down, 4).unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.02).collect();
        let peak = |gamma: f64| {
            dephased_antipodal_series(&h, &psi, gamma, &times)
                .unwrap()
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let p: Vec<f64> = [0.0, 0.05, 0.2, 1.0].iter().map(|&g| peak(g)).collect();
        assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
    }
}
