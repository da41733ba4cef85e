//! Shot-level Monte Carlo of a noisy Rydberg ring.
//!
//! Per shot: Gaussian 3-D displacements of every atom, a relative amplitude
//! error on Ω and an additive detuning error, then exact evolution of the
//! rebuilt Hamiltonian, projective sampling, preparation errors and readout
//! flips. Shot `i` draws from its own ChaCha stream `(seed, i)`, so results do
//! not depend on scheduling.
//!
//! Dephasing with jump operators `√γ σᶻ_m` is unravelled exactly: since
//! `σᶻ_m² = 1` the jump rate does not depend on the state, so every site
//! receives `σᶻ` kicks at the times of an independent Poisson process of rate
//! `γ`, with unitary evolution in between.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{rydberg_from_geometry, DenseHamiltonian};
use super::observables::{initial_state, probabilities};
use super::propagate::Evolution;
use crate::error::{Error, Result};
use crate::quench::{InitialState, RydbergParams};
use crate::shots::{ShotMetadata, ShotRecordSet};

/// Largest ring accepted by the sampler.
pub const MAX_SAMPLER_SITES: usize = 12;

/// Device noise figures. `t1_us` and `t2_us` are bookkeeping only; the
/// sampler applies dephasing at rate `gamma_dephasing`, which
/// [`NoiseParams::with_t2_dephasing`] derives from `t2_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    #[serde(rename = "T1")]
    pub t1_us: f64,
    #[serde(rename = "T2")]
    pub t2_us: f64,
    pub sigma_r_xy: f64,
    pub sigma_r_z: f64,
    pub p_prep: f64,
    pub p_fn: f64,
    pub p_fp: f64,
    pub sigma_omega_rel: f64,
    pub sigma_delta: f64,
    pub gamma_dephasing: f64,
}

impl Default for NoiseParams {
    /// Typical figures of a neutral-atom device.
    fn default() -> Self {
        NoiseParams {
            t1_us: 100.0,
            t2_us: 20.0,
            sigma_r_xy: 0.18,
            sigma_r_z: 0.67,
            p_prep: 0.01,
            p_fn: 0.07,
            p_fp: 0.01,
            sigma_omega_rel: 0.02,
            sigma_delta: 2.0 * PI * 0.05,
            gamma_dephasing: 0.0,
        }
    }
}

impl NoiseParams {
    /// No noise at all.
    pub fn noiseless() -> Self {
        NoiseParams {
            t1_us: f64::INFINITY,
            t2_us: f64::INFINITY,
            sigma_r_xy: 0.0,
            sigma_r_z: 0.0,
            p_prep: 0.0,
            p_fn: 0.0,
            p_fp: 0.0,
            sigma_omega_rel: 0.0,
            sigma_delta: 0.0,
            gamma_dephasing: 0.0,
        }
    }

    /// Only readout flips.
    pub fn readout_only(p_fp: f64, p_fn: f64) -> Self {
        NoiseParams {
            p_fp,
            p_fn,
            ..Self::noiseless()
        }
    }

    /// Sets the dephasing rate equivalent to `T2`, `γ = 2 / T2`.
    pub fn with_t2_dephasing(mut self) -> Self {
        self.gamma_dephasing = 2.0 / self.t2_us;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("T1", self.t1_us),
            ("T2", self.t2_us),
            ("sigma_r_xy", self.sigma_r_xy),
            ("sigma_r_z", self.sigma_r_z),
            ("sigma_omega_rel", self.sigma_omega_rel),
            ("sigma_delta", self.sigma_delta),
            ("gamma_dephasing", self.gamma_dephasing),
        ];
        for (name, v) in non_negative {
            if v.is_nan() || v < 0.0 {
                return Err(Error::arg(format!(
                    "noise parameter {name} = {v} must be non-negative"
                )));
            }
        }
        for (name, p) in [
            ("p_prep", self.p_prep),
            ("p_fn", self.p_fn),
            ("p_fp", self.p_fp),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::arg(format!(
                    "probability {name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// True when every shot sees the same Hamiltonian and initial state.
    fn is_static(&self) -> bool {
        self.sigma_r_xy == 0.0
            && self.sigma_r_z == 0.0
            && self.sigma_omega_rel == 0.0
            && self.sigma_delta == 0.0
            && self.p_prep == 0.0
            && self.gamma_dephasing == 0.0
    }
}

/// Deterministic per-shot random stream.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Draws a basis state from cumulative probabilities.
fn draw(cumulative: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cumulative.last().unwrap_or(&1.0);
    let u = rng.random::<f64>() * total;
    cumulative
        .partition_point(|&c| c <= u)
        .min(cumulative.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

/// Applies the readout channel: `1 → 0` with `p_fn`, `0 → 1` with `p_fp`.
pub fn apply_readout(bits: &mut [u8], p_fp: f64, p_fn: f64, rng: &mut impl Rng) {
    for b in bits.iter_mut() {
        let u: f64 = rng.random();
        if *b == 1 {
            if u < p_fn {
                *b = 0;
            }
        } else if u < p_fp {
            *b = 1;
        }
    }
}

fn bits_of(s: usize, sites: usize) -> Vec<u8> {
    (0..sites).map(|i| ((s >> i) & 1) as u8).collect()
}

/// Poisson jump times of every site on `[0, t)`, sorted by time.
fn dephasing_jumps(sites: usize, gamma: f64, t: f64, rng: &mut impl Rng) -> Vec<(f64, usize)> {
    let mut jumps = Vec::new();
    if gamma == 0.0 {
        return jumps;
    }
    let wait = Exp::new(gamma).expect("positive rate");
    for site in 0..sites {
        let mut at = wait.sample(rng);
        while at < t {
            jumps.push((at, site));
            at += wait.sample(rng);
        }
    }
    jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
    jumps
}

/// Unitary evolution to `t` interrupted by `σᶻ` kicks.
fn evolve_with_jumps(
    h: &DenseHamiltonian,
    psi0: &[Complex64],
    t: f64,
    jumps: &[(f64, usize)],
) -> Result<Vec<Complex64>> {
    let mut psi = psi0.to_vec();
    let mut now = 0.0;
    for &(at, site) in jumps {
        psi = Evolution::chebyshev(h, &psi)?.state_at(at - now);
        for (s, amp) in psi.iter_mut().enumerate() {
            if (s >> site) & 1 == 0 {
                *amp = -*amp;
            }
        }
        now = at;
    }
    Ok(Evolution::chebyshev(h, &psi)?.state_at(t - now))
}

/// Samples `n_shots` bitstrings from a fixed state, with readout flips.
pub fn sample_state(
    psi: &[Complex64],
    sites: usize,
    n_shots: usize,
    p_fp: f64,
    p_fn: f64,
    seed: u64,
) -> Vec<Vec<u8>> {
    let cum = cumulative(&probabilities(psi));
    (0..n_shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(seed, shot as u64);
            let mut bits = bits_of(draw(&cum, &mut rng), sites);
            apply_readout(&mut bits, p_fp, p_fn, &mut rng);
            bits
        })
        .collect()
}

/// Noisy shots of the Rydberg ring at time `t` after the quench.
pub fn noisy_shot_sampler(
    params: &RydbergParams,
    noise: &NoiseParams,
    initial: InitialState,
    t: f64,
    n_shots: usize,
    seed: u64,
) -> Result<ShotRecordSet> {
    noise.validate()?;
    let sites = params.sites;
    if sites > MAX_SAMPLER_SITES {
        return Err(Error::Resource(format!(
            "noisy sampling is limited to L <= {MAX_SAMPLER_SITES} (got {sites})"
        )));
    }
    if n_shots == 0 {
        return Err(Error::arg("need at least one shot"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::arg(format!(
            "sampling time {t} must be non-negative"
        )));
    }
    let psi0 = initial_state(initial, sites)?;
    let base: Vec<[f64; 3]> = params.positions.iter().map(|&[x, y]| [x, y, 0.0]).collect();

    let rows: Vec<Vec<u8>> = if noise.is_static() {
        let h = rydberg_from_geometry(
            params.c6,
            &base,
            &vec![params.omega; sites],
            &vec![params.delta; sites],
            &vec![false; sites],
        )?;
        let psi = Evolution::new(&h, &psi0)?.state_at(t);
        sample_state(&psi, sites, n_shots, noise.p_fp, noise.p_fn, seed)
    } else {
        let normal = |s: f64| Normal::new(0.0, s).map_err(|e| Error::arg(e.to_string()));
        let (nxy, nz) = (normal(noise.sigma_r_xy)?, normal(noise.sigma_r_z)?);
        let (nom, ndel) = (normal(noise.sigma_omega_rel)?, normal(noise.sigma_delta)?);
        (0..n_shots)
            .into_par_iter()
            .map(|shot| -> Result<Vec<u8>> {
                let mut rng = shot_rng(seed, shot as u64);
                let pos: Vec<[f64; 3]> = base
                    .iter()
                    .map(|p| {
                        [
                            p[0] + nxy.sample(&mut rng),
                            p[1] + nxy.sample(&mut rng),
                            p[2] + nz.sample(&mut rng),
                        ]
                    })
                    .collect();
                let omega = params.omega * (1.0 + nom.sample(&mut rng));
                let delta = params.delta + ndel.sample(&mut rng);
                let missing: Vec<bool> = (0..sites)
                    .map(|_| rng.random::<f64>() < noise.p_prep)
                    .collect();
                let h: DenseHamiltonian = rydberg_from_geometry(
                    params.c6,
                    &pos,
                    &vec![omega; sites],
                    &vec![delta; sites],
                    &missing,
                )?;
                let jumps = dephasing_jumps(sites, noise.gamma_dephasing, t, &mut rng);
                let psi = evolve_with_jumps(&h, &psi0, t, &jumps)?;
                let cum = cumulative(&probabilities(&psi));
                let mut bits = bits_of(draw(&cum, &mut rng), sites);
                for (b, &m) in bits.iter_mut().zip(&missing) {
                    if m {
                        *b = 0;
                    }
                }
                apply_readout(&mut bits, noise.p_fp, noise.p_fn, &mut rng);
                Ok(bits)
            })
            .collect::<Result<_>>()?
    };
    let metadata = ShotMetadata {
        device_id: "ed-sampler".into(),
        sites,
        a_um: Some(params.a),
        g: params.ising_g(),
        coupling: params.ising_coupling(),
        initial_state: initial,
        t_us: t,
        n_shots,
        seed: Some(seed),
    };
    ShotRecordSet::new(metadata, rows)
}
