//! Real-space fermionic two-point functions and Jordan–Wigner string
//! expectations of a sector state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::modes::Sector;
use super::state::SectorState;
use crate::error::{Error, Result};
use crate::pfaffian::pfaffian_in_place;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Translation-invariant two-point data for `r = i − j ∈ [0, L)`:
/// `c[r] = ⟨c†_i c_j⟩` and `f[r] = ⟨c_i c_j⟩`. Negative offsets pick up the
/// boundary sign of the sector (`−1` in NS, where the fermions are
/// antiperiodic).
#[derive(Debug, Clone, PartialEq)]
pub struct Circulant {
    pub c: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub antiperiodic: bool,
}

impl Circulant {
    pub fn from_state(state: &SectorState) -> Self {
        let l = state.sites;
        let inv = 1.0 / l as f64;
        let mut c = vec![ZERO; l];
        let mut f = vec![ZERO; l];
        for pair in &state.pairs {
            let n = pair.occupation();
            let an = pair.anomalous();
            for r in 0..l {
                let (s, co) = (pair.k * r as f64).sin_cos();
                c[r] += Complex64::new(2.0 * co * n * inv, 0.0);
                f[r] += Complex64::new(0.0, 2.0 * s * inv) * an;
            }
        }
        for mode in state.unpaired.iter().filter(|m| m.occupied) {
            for (r, cr) in c.iter_mut().enumerate() {
                *cr += Complex64::from_polar(inv, mode.k * r as f64);
            }
        }
        Circulant {
            c,
            f,
            antiperiodic: state.sector == Sector::NS,
        }
    }

    pub fn sites(&self) -> usize {
        self.c.len()
    }

    /// Offset index and boundary sign for sites `i, j ∈ [0, L)`.
    fn idx(&self, i: usize, j: usize) -> (usize, f64) {
        if i >= j {
            (i - j, 1.0)
        } else {
            (
                i + self.sites() - j,
                if self.antiperiodic { -1.0 } else { 1.0 },
            )
        }
    }

    /// `⟨c†_i c_j⟩`
    pub fn hop(&self, i: usize, j: usize) -> Complex64 {
        let (r, sign) = self.idx(i, j);
        self.c[r] * sign
    }

    /// `⟨c_i c_j⟩`
    pub fn pair(&self, i: usize, j: usize) -> Complex64 {
        let (r, sign) = self.idx(i, j);
        self.f[r] * sign
    }

    /// Expectation of `x_i y_j` for `x = u_x c† + v_x c` on site `i` and
    /// `y = u_y c† + v_y c` on site `j`.
    fn bilinear(
        &self,
        i: usize,
        x: (Complex64, Complex64),
        j: usize,
        y: (Complex64, Complex64),
    ) -> Complex64 {
        let delta = if i == j { 1.0 } else { 0.0 };
        x.0 * y.0 * self.pair(j, i).conj()
            + x.0 * y.1 * self.hop(i, j)
            + x.1 * y.0 * (Complex64::new(delta, 0.0) - self.hop(j, i))
            + x.1 * y.1 * self.pair(i, j)
    }

    /// `⟨σᶻ_0 σᶻ_ℓ⟩` in this sector: the Jordan–Wigner string reduces to
    /// `(−i)^ℓ b_0 a_1 b_1 ⋯ a_{ℓ−1} b_{ℓ−1} a_ℓ` with `a = c† + c`,
    /// `b = i(c† − c)`, evaluated as a Pfaffian of the contraction matrix.
    pub fn string_expectation(&self, ell: usize) -> Result<Complex64> {
        let l = self.sites();
        if ell == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if ell >= l {
            return Err(Error::arg(format!(
                "string length {ell} exceeds ring size {l}"
            )));
        }
        let ops = string_operators(ell);
        let m = ops.len();
        let mut buf = vec![ZERO; m * m];
        let mut scale = 0.0f64;
        for p in 0..m {
            for q in p + 1..m {
                let v = self.bilinear(ops[p].0, ops[p].1, ops[q].0, ops[q].1);
                buf[p * m + q] = v;
                buf[q * m + p] = -v;
                scale = scale.max(v.norm());
            }
        }
        let pf = pfaffian_in_place(&mut buf, m, scale)?;
        Ok(Complex64::new(0.0, -1.0).powu(ell as u32) * pf)
    }
}

/// Full matrices `C_ij = ⟨c†_i c_j⟩` and `F_ij = ⟨c_i c_j⟩` of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorCorrelators {
    pub sector: Sector,
    pub t: f64,
    pub c: DMatrix<Complex64>,
    pub f: DMatrix<Complex64>,
}

impl SectorCorrelators {
    pub fn from_circulant(sector: Sector, t: f64, circ: &Circulant) -> Self {
        let l = circ.sites();
        SectorCorrelators {
            sector,
            t,
            c: DMatrix::from_fn(l, l, |i, j| circ.hop(i, j)),
            f: DMatrix::from_fn(l, l, |i, j| circ.pair(i, j)),
        }
    }

    /// Largest deviation of `C` from Hermiticity and of `F` from antisymmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let c = (&self.c - self.c.adjoint())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        let f = (&self.f + self.f.transpose())
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        c.max(f)
    }

    /// Eigenvalues of the Hermitian part of `C`, ascending.
    pub fn occupation_spectrum(&self) -> Vec<f64> {
        let h = (&self.c + self.c.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Majorana contraction block for the string between sites `0` and `ell`:
    /// entries `⟨x_p x_q⟩` for `p < q`, mirrored with a minus sign below.
    pub fn majorana_block(&self, ell: usize) -> Result<MajoranaBlock> {
        let l = self.c.nrows();
        if ell == 0 || ell >= l {
            return Err(Error::arg(format!("string length {ell} outside 1..{l}")));
        }
        let circ = Circulant {
            c: (0..l).map(|r| self.c[(r, 0)]).collect(),
            f: (0..l).map(|r| self.f[(r, 0)]).collect(),
            antiperiodic: self.sector == Sector::NS,
        };
        let ops = string_operators(ell);
        let m = ops.len();
        let mut mat = DMatrix::zeros(m, m);
        for p in 0..m {
            for q in p + 1..m {
                let v = circ.bilinear(ops[p].0, ops[p].1, ops[q].0, ops[q].1);
                mat[(p, q)] = v;
                mat[(q, p)] = -v;
            }
        }
        Ok(MajoranaBlock {
            sites: (0..=ell).collect(),
            m: mat,
        })
    }
}

/// Contraction matrix of a Majorana string on consecutive sites.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaBlock {
    pub sites: Vec<usize>,
    pub m: DMatrix<Complex64>,
}

type Operator = (usize, (Complex64, Complex64));

/// Site and `(c†, c)` coefficients of `b_0 a_1 b_1 ⋯ a_{ℓ−1} b_{ℓ−1} a_ℓ`.
fn string_operators(ell: usize) -> Vec<Operator> {
    let a = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let b = (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0));
    let mut ops = Vec::with_capacity(2 * ell);
    ops.push((0, b));
    for j in 1..ell {
        ops.push((j, a));
        ops.push((j, b));
    }
    ops.push((ell, a));
    ops
}
