//! Protocol instances and the Ising ↔ Rydberg parameter mapping on a ring.
//!
//! Units throughout the crate: ħ = 1, angular frequencies in rad/µs, times in
//! µs, lengths in µm.
//!
//! Sign convention: the Rydberg drive term is written `+(Ω/2) Σ σˣ`, so a
//! positive amplitude `Ω = 2gJ` reproduces `+gJ Σ σˣ` of the Ising ring. The
//! opposite sign is related by the unitary `Π σᶻ`, which leaves every σᶻ
//! correlator unchanged, so only `|g|` is physically meaningful here.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rydberg C6 coefficient for n = 60 rubidium, rad·µm⁶/µs.
pub const C6_RB60: f64 = 865_723.02;
/// Rydberg C6 coefficient for n = 70 rubidium, rad·µm⁶/µs.
pub const C6_RB70: f64 = 5_420_158.53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// `|+ ⋯ +⟩`, the σˣ = +1 product state.
    Plus,
    /// `|↓ ⋯ ↓⟩`, all atoms in the ground state.
    Down,
    /// `|↓↑↓↑ ⋯⟩`, only defined for even L.
    Afm,
}

impl InitialState {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialState::Plus => "plus",
            InitialState::Down => "down",
            InitialState::Afm => "afm",
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(InitialState::Plus),
            "down" => Ok(InitialState::Down),
            "afm" => Ok(InitialState::Afm),
            other => Err(Error::arg(format!("unknown initial state '{other}'"))),
        }
    }
}

/// Optional Rydberg realisation attached to a serialized spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RydbergRecord {
    #[serde(rename = "C6")]
    pub c6: f64,
    pub a_um: f64,
    pub omega: f64,
    pub delta: f64,
}

/// One protocol instance: a quench of the periodic transverse-field Ising ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    #[serde(rename = "L")]
    pub sites: usize,
    pub g: f64,
    #[serde(rename = "J_rad_per_us")]
    pub coupling: f64,
    pub initial_state: InitialState,
    #[serde(rename = "times_us")]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rydberg: Option<RydbergRecord>,
}

impl QuenchSpec {
    /// Builds and validates a spec.
    pub fn new(
        sites: usize,
        g: f64,
        coupling: f64,
        initial_state: InitialState,
        times: Vec<f64>,
    ) -> Result<Self> {
        let spec = QuenchSpec {
            sites,
            g,
            coupling,
            initial_state,
            times,
            rydberg: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Critical-point spec (g = 1) without a time grid.
    pub fn critical(sites: usize, coupling: f64, initial_state: InitialState) -> Result<Self> {
        Self::new(sites, 1.0, coupling, initial_state, Vec::new())
    }

    pub fn with_times(mut self, times: Vec<f64>) -> Result<Self> {
        self.times = times;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 3 {
            return Err(Error::arg(format!(
                "L = {} but a ring needs L >= 3",
                self.sites
            )));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::arg(format!(
                "g = {} must be finite and non-negative",
                self.g
            )));
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::arg(format!(
                "J = {} must be positive",
                self.coupling
            )));
        }
        if self.initial_state == InitialState::Afm && self.sites % 2 == 1 {
            return Err(Error::arg(format!(
                "the antiferromagnetic state is not defined on an odd ring (L = {})",
                self.sites
            )));
        }
        for (i, &t) in self.times.iter().enumerate() {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::arg(format!(
                    "time {t} at index {i} is negative or not finite"
                )));
            }
            if i > 0 && t <= self.times[i - 1] {
                return Err(Error::arg(format!(
                    "time grid must be strictly increasing (index {i}: {} then {t})",
                    self.times[i - 1]
                )));
            }
        }
        Ok(())
    }

    /// Largest distance needed for the correlators, `⌊L/2⌋`.
    pub fn max_distance(&self) -> usize {
        self.sites / 2
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: QuenchSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Chord distance between two atoms `ell` sites apart on a ring of `sites`
/// atoms with nearest-neighbour spacing `a`.
pub fn ring_distance(sites: usize, a: f64, ell: usize) -> Result<f64> {
    if sites < 2 || ell == 0 || ell >= sites {
        return Err(Error::arg(format!(
            "ring distance needs 1 <= ell <= L-1 (L = {sites}, ell = {ell})"
        )));
    }
    // ℓ and L−ℓ give the same chord; evaluate with the smaller index so both
    // sides are bitwise identical.
    let ell = ell.min(sites - ell);
    let n = sites as f64;
    Ok(a * (PI * ell as f64 / n).sin() / (PI / n).sin())
}

/// Induced longitudinal field `m̂ = Σ_ℓ (a / r_ℓ)⁶` in closed form.
pub fn induced_field(sites: usize) -> Result<f64> {
    if sites < 3 {
        return Err(Error::arg(format!(
            "induced field needs L >= 3 (got {sites})"
        )));
    }
    let l2 = (sites * sites) as f64;
    let s = (PI / sites as f64).sin();
    Ok((l2 - 1.0) / 945.0 * (191.0 + 23.0 * l2 + 2.0 * l2 * l2) * s.powi(6))
}

/// Same quantity by direct summation over the ring.
pub fn induced_field_direct(sites: usize) -> Result<f64> {
    if sites < 3 {
        return Err(Error::arg(format!(
            "induced field needs L >= 3 (got {sites})"
        )));
    }
    (1..sites).try_fold(0.0, |acc, ell| {
        Ok(acc + ring_distance(sites, 1.0, ell)?.powi(-6))
    })
}

/// How the detuning is chosen when mapping onto the Rydberg ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningMode {
    /// `δ = 2J m̂(L)`: the uniform σᶻ field vanishes exactly for this L.
    ExactPerL,
    /// A fixed detuning in rad/µs (e.g. the single value used on hardware).
    Override(f64),
}

/// Rydberg-ring realisation of an Ising quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RydbergParams {
    pub c6: f64,
    /// Nearest-neighbour distance, µm.
    pub a: f64,
    /// Drive amplitude Ω, rad/µs.
    pub omega: f64,
    /// Detuning δ, rad/µs.
    pub delta: f64,
    pub sites: usize,
    /// Atom coordinates in the plane, µm.
    pub positions: Vec<[f64; 2]>,
}

impl RydbergParams {
    /// Ising coupling `J = C6 / (4a⁶)`.
    pub fn ising_coupling(&self) -> f64 {
        self.c6 / (4.0 * self.a.powi(6))
    }

    /// Transverse-field ratio realised by the drive, `Ω / 2J`.
    pub fn ising_g(&self) -> f64 {
        self.omega / (2.0 * self.ising_coupling())
    }

    /// Residual uniform longitudinal field `m = m̂ − δ/2J`.
    pub fn residual_field(&self) -> Result<f64> {
        Ok(induced_field(self.sites)? - self.delta / (2.0 * self.ising_coupling()))
    }

    /// Pair coupling `C6 / (4 r_ij⁶)` between sites `i` and `j`.
    pub fn pair_coupling(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.positions[i];
        let [xj, yj] = self.positions[j];
        let r2 = (xi - xj).powi(2) + (yi - yj).powi(2);
        self.c6 / (4.0 * r2.powi(3))
    }

    pub fn record(&self) -> RydbergRecord {
        RydbergRecord {
            c6: self.c6,
            a_um: self.a,
            omega: self.omega,
            delta: self.delta,
        }
    }
}

/// Equally spaced atoms on a circle with nearest-neighbour distance `a`.
pub fn ring_positions(sites: usize, a: f64) -> Vec<[f64; 2]> {
    let radius = a / (2.0 * (PI / sites as f64).sin());
    (0..sites)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / sites as f64;
            [radius * phi.cos(), radius * phi.sin()]
        })
        .collect()
}

/// Maps an Ising quench onto a Rydberg ring: `Ω = 2gJ`, and δ cancels the
/// induced σᶻ field (or is overridden).
pub fn ising_to_rydberg(
    spec: &QuenchSpec,
    c6: f64,
    a: f64,
    mode: DetuningMode,
) -> Result<RydbergParams> {
    spec.validate()?;
    if !(c6 > 0.0 && a > 0.0) {
        return Err(Error::arg(format!(
            "C6 = {c6} and a = {a} must be positive"
        )));
    }
    let coupling = c6 / (4.0 * a.powi(6));
    let delta = match mode {
        DetuningMode::ExactPerL => 2.0 * coupling * induced_field(spec.sites)?,
        DetuningMode::Override(d) => d,
    };
    Ok(RydbergParams {
        c6,
        a,
        omega: 2.0 * spec.g * coupling,
        delta,
        sites: spec.sites,
        positions: ring_positions(spec.sites, a),
    })
}

/// Blockade radius `(C6 / Ω)^{1/6}`.
pub fn blockade_radius(c6: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "blockade radius undefined for Ω = {omega}"
        )));
    }
    Ok((c6 / omega.abs()).powf(1.0 / 6.0))
}
