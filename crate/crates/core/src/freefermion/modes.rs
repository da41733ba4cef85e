//! Momentum sets and single-mode data of the Ising ring after Jordan–Wigner.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fermion-parity sector. NS (even parity) has antiperiodic fermions, R (odd
/// parity) periodic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    R,
    NS,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::NS, Sector::R];

    /// Fermion parity `(−1)^N` of states in this sector.
    pub fn parity(self) -> i32 {
        match self {
            Sector::NS => 1,
            Sector::R => -1,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::R => "R",
            Sector::NS => "NS",
        })
    }
}

/// The `L` allowed momenta of a sector, ascending in `[−π, π)`.
///
/// Every momentum is `π m / L` with `−L ≤ m < L`, `m` even in R and odd in NS.
pub fn momenta(sites: usize, sector: Sector) -> Vec<f64> {
    let l = sites as i64;
    let start = match sector {
        Sector::R => -l + (l & 1),
        Sector::NS => -l + 1 - (l & 1),
    };
    (0..l)
        .map(|n| match start + 2 * n {
            m if m == -l => -PI,
            m => PI * m as f64 / sites as f64,
        })
        .collect()
}

/// `1 + g² − 2g cos k`, written to stay accurate near `g = 1, k = 0`.
fn gap_squared(g: f64, k: f64) -> f64 {
    let s = (0.5 * k).sin();
    (1.0 - g) * (1.0 - g) + 4.0 * g * s * s
}

/// Single-particle energy `ε_k = −2J √(1 + g² − 2g cos k)`.
pub fn dispersion(g: f64, coupling: f64, k: f64) -> f64 {
    -2.0 * coupling * gap_squared(g, k).sqrt()
}

/// Group velocity `dε/dk = −2J g sin k / √(1 + g² − 2g cos k)`.
///
/// At the closing gap (`g = 1`, `k = 0`) the one-sided limit `∓J` is not
/// unique; zero is returned there.
pub fn group_velocity(g: f64, coupling: f64, k: f64) -> f64 {
    let r = gap_squared(g, k).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    -2.0 * coupling * g * k.sin() / r
}

/// Bogoliubov angle θ_k with `e^{iθ_k} = (g − e^{ik}) / √(1 + g² − 2g cos k)`.
pub fn bogoliubov_angle(g: f64, k: f64) -> f64 {
    (-k.sin()).atan2(g - k.cos())
}

/// Amplitude `K(k) = g sin k / (1 − g cos k + √(1 + g² − 2g cos k))` of the
/// post-quench pair state; odd in k and zero wherever `sin k = 0`.
pub fn excitation_amplitude(g: f64, k: f64) -> f64 {
    let num = g * k.sin();
    if num == 0.0 {
        return 0.0;
    }
    // 1 − g cos k = (1 − g) + 2g sin²(k/2)
    let s = (0.5 * k).sin();
    num / ((1.0 - g) + 2.0 * g * s * s + gap_squared(g, k).sqrt())
}

/// Per-momentum free-fermion data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    pub k: f64,
    pub epsilon: f64,
    pub theta: f64,
    #[serde(rename = "K")]
    pub amplitude: f64,
}

impl ModeData {
    pub fn new(g: f64, coupling: f64, k: f64) -> Self {
        ModeData {
            k,
            epsilon: dispersion(g, coupling, k),
            theta: bogoliubov_angle(g, k),
            amplitude: excitation_amplitude(g, k),
        }
    }

    /// Quasiparticle occupation `K² / (1 + K²)` of the quenched state.
    pub fn occupation(&self) -> f64 {
        let k2 = self.amplitude * self.amplitude;
        k2 / (1.0 + k2)
    }
}

/// Mode table of one sector, ordered like [`momenta`].
pub fn mode_table(sites: usize, sector: Sector, g: f64, coupling: f64) -> Vec<ModeData> {
    momenta(sites, sector)
        .into_iter()
        .map(|k| ModeData::new(g, coupling, k))
        .collect()
}

/// Pair amplitude `z_k(t) = i K(k) e^{−2iε_k t}` of the BCS form
/// `exp(Σ_{k>0} z_k γ†_{−k} γ†_k)`.
pub fn pair_amplitude(mode: &ModeData, t: f64) -> Result<Complex64> {
    if mode.k <= 0.0 {
        return Err(Error::arg(format!(
            "pair amplitude needs k > 0, got {}",
            mode.k
        )));
    }
    Ok(Complex64::new(0.0, mode.amplitude) * Complex64::from_polar(1.0, -2.0 * mode.epsilon * t))
}

/// Energy of the quasiparticle vacuum, the top of the spectrum in sector `a`:
/// `E_max = −½ Σ_k ε_k` (the parity constraint of the sector is ignored).
pub fn max_energy(sites: usize, sector: Sector, g: f64, coupling: f64) -> f64 {
    -0.5 * momenta(sites, sector)
        .into_iter()
        .map(|k| dispersion(g, coupling, k))
        .sum::<f64>()
}
