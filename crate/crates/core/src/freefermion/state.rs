//! Time-evolved Gaussian states of one parity sector.
//!
//! Each sector state factorises over momentum pairs `(k, −k)`, `k > 0`, into
//! `α_k |0⟩ + β_k c†_k c†_{−k} |0⟩`, times fixed occupations of the unpaired
//! momenta `k ∈ {0, −π}`. Amplitudes carry their exact dynamical phases so that
//! matrix elements between the two sectors can be formed.

use num_complex::Complex64;

use super::modes::{ModeData, Sector};

/// Amplitudes of one momentum pair on `|0⟩` and `c†_k c†_{−k} |0⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub k: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PairState {
    /// `⟨c†_k c_k⟩ = ⟨c†_{−k} c_{−k}⟩`.
    pub fn occupation(&self) -> f64 {
        self.beta.norm_sqr()
    }

    /// Anomalous amplitude `⟨c_{−k} c_k⟩ = ᾱ β`.
    pub fn anomalous(&self) -> Complex64 {
        self.alpha.conj() * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnpairedMode {
    pub k: f64,
    pub occupied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub sector: Sector,
    pub sites: usize,
    pub t: f64,
    pub pairs: Vec<PairState>,
    pub unpaired: Vec<UnpairedMode>,
    /// Dynamical phase picked up by the occupied unpaired modes.
    pub unpaired_phase: Complex64,
}

/// Evolves a pair that starts as the Bogoliubov vacuum of angle `phi`, i.e.
/// `(cos φ/2, i sin φ/2)` in the `(|0⟩, c†_k c†_{−k}|0⟩)` basis.
///
/// In the quasiparticle basis of the post-quench Hamiltonian the state is
/// `cos χ |∅⟩ + i sin χ e^{−2iε t} |γγ⟩` with `χ = (θ − φ)/2`, up to the
/// vacuum phase `e^{−i(2J(cos k − g) − ε) t}`.
pub(crate) fn evolve_pair(mode: &ModeData, g: f64, coupling: f64, phi: f64, t: f64) -> PairState {
    let h = 0.5 * mode.theta;
    let chi = 0.5 * (mode.theta - phi);
    let (sh, ch) = h.sin_cos();
    let (sx, cx) = chi.sin_cos();
    let vacuum_energy = 2.0 * coupling * (mode.k.cos() - g) - mode.epsilon;
    let global = Complex64::from_polar(1.0, -vacuum_energy * t);
    // i sin χ e^{−2iεt}
    let excited = Complex64::new(0.0, sx) * Complex64::from_polar(1.0, -2.0 * mode.epsilon * t);
    // vacuum (cos h, i sin h); pair −(i sin h, cos h)
    let alpha = Complex64::new(cx * ch, 0.0) + excited * Complex64::new(0.0, -sh);
    let beta = Complex64::new(0.0, cx * sh) + excited * Complex64::new(-ch, 0.0);
    PairState {
        k: mode.k,
        alpha: global * alpha,
        beta: global * beta,
    }
}

/// Energy `2J(cos k − g) n` of an unpaired mode with occupation `n`.
pub(crate) fn unpaired_energy(k: f64, g: f64, coupling: f64, occupied: bool) -> f64 {
    if occupied {
        2.0 * coupling * (k.cos() - g)
    } else {
        0.0
    }
}
