//! Cross-sector matrix element `⟨Ψ_NS| σᶻ_1 |Ψ_R⟩` for the all-down quench.
//!
//! σᶻ flips fermion parity, so its expectation value only involves the
//! interference between the two sectors. Each sector state is written in
//! Thouless form `Π α_k · exp(½ c† Z c†) |0⟩` (times `c†_0` for the occupied
//! R zero mode); the overlap of two such states is a Pfaffian and the
//! remaining bilinear is contracted with the mixed (non-Hermitian) Wick rule.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::SectorState;
use crate::error::{Error, Result};
use crate::pfaffian::pfaffian;

/// Smallest vacuum amplitude accepted when forming `ζ = β / α`.
const MIN_VACUUM_AMPLITUDE: f64 = 1e-12;

struct Thouless {
    prefactor: Complex64,
    z: DMatrix<Complex64>,
}

fn thouless(state: &SectorState) -> Result<Thouless> {
    let l = state.sites;
    let inv = 1.0 / l as f64;
    let mut prefactor = state.unpaired_phase;
    let mut z = DMatrix::zeros(l, l);
    for pair in &state.pairs {
        if pair.alpha.norm() < MIN_VACUUM_AMPLITUDE {
            return Err(Error::PfaffianBreakdown {
                step: 0,
                pivot_ratio: pair.alpha.norm(),
                detail: format!(
                    "vacuum amplitude of mode k = {} vanishes at t = {}",
                    pair.k, state.t
                ),
            });
        }
        prefactor *= pair.alpha;
        let zeta = pair.beta / pair.alpha;
        // c†_k c†_{−k} = (1/L) Σ_ij e^{−ik(i−j)} c†_i c†_j
        for i in 0..l {
            for j in 0..l {
                let s = (pair.k * (i as f64 - j as f64)).sin();
                z[(i, j)] += zeta * Complex64::new(0.0, -2.0 * s * inv);
            }
        }
    }
    Ok(Thouless { prefactor, z })
}

/// `⟨Z₁|Z₂⟩ = (−1)^{n(n+1)/2} Pf [[Z₂, −1], [1, −Z̄₁]]` for unnormalised
/// Thouless states on `n` modes.
fn overlap(z1: &DMatrix<Complex64>, z2: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = z1.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(z2);
    m.view_mut((n, n), (n, n)).copy_from(&(-z1.conjugate()));
    for i in 0..n {
        m[(i, n + i)] = Complex64::new(-1.0, 0.0);
        m[(n + i, i)] = Complex64::new(1.0, 0.0);
    }
    let sign = if (n * (n + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Ok(pfaffian(&m)? * sign)
}

/// Unnormalised interference term `⟨Ψ_NS| (c_1 + c†_1) |Ψ_R⟩` including all
/// dynamical phases. The sector weights and the relative phase of the two
/// components are fixed by the caller from the value at `t = 0`.
pub(crate) fn interference(even: &SectorState, odd: &SectorState) -> Result<Complex64> {
    let l = even.sites;
    let zero_mode = odd.unpaired.iter().find(|m| m.occupied).ok_or_else(|| {
        Error::Unsupported("odd sector state without an occupied zero mode".into())
    })?;
    if even.unpaired.iter().any(|m| m.occupied)
        || odd.unpaired.iter().filter(|m| m.occupied).count() != 1
    {
        return Err(Error::Unsupported(
            "unexpected unpaired occupations for the cross-sector element".into(),
        ));
    }
    let te = thouless(even)?;
    let to = thouless(odd)?;
    let w = te.z.conjugate();
    let ident = DMatrix::<Complex64>::identity(l, l);
    let wz = &w * &to.z;
    let zw = &to.z * &w;
    let singular = || Error::PfaffianBreakdown {
        step: 0,
        pivot_ratio: 0.0,
        detail: format!("mixed contraction matrix is singular at t = {}", even.t),
    };
    let inv_wz = (&ident - &wz).try_inverse().ok_or_else(singular)?;
    let inv_zw = (&ident - &zw).try_inverse().ok_or_else(singular)?;
    // ⟨c†_i c_j⟩ and ⟨c†_i c†_j⟩ between ⟨Z_E| and |Z_O⟩
    let hop = -(&inv_wz * &wz);
    let pair_dag = &w * &inv_zw;

    let norm = 1.0 / (l as f64).sqrt();
    let mut contraction = Complex64::new(0.0, 0.0);
    for j in 0..l {
        // c†_q = (1/√L) Σ_j e^{−iqj} c†_j with sites counted from 1
        let u = Complex64::from_polar(norm, -zero_mode.k * (j + 1) as f64);
        let delta = if j == 0 { 1.0 } else { 0.0 };
        contraction += u * (Complex64::new(delta, 0.0) - hop[(j, 0)] + pair_dag[(0, j)]);
    }
    Ok(te.prefactor.conj() * to.prefactor * overlap(&te.z, &to.z)? * contraction)
}
