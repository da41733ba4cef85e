//! Surge time `t*`: the first simultaneous peak of the connected correlators.
//!
//! The numeric search samples the antipodal connected correlator on a coarse
//! grid over `[0, window · t_F]`, applies the first-peak heuristics, and then
//! refines the location on a fine grid around the selected sample.

pub mod analytic;
pub mod peak;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::{
    f_closed_form, f_time_derivative, surge_condition, surge_estimate, KernelValue,
};
pub use peak::{detect_peak, find_surge_time, Peak, SurgeMethod, SurgeResult};

use crate::error::{Error, Result};
use crate::freefermion::FreeFermionEngine;
use crate::quench::InitialState;

/// Maximal group velocity `max_k |dε/dk| = 2J·min(g, 1)`.
pub fn lieb_robinson_velocity(g: f64, coupling: f64) -> f64 {
    2.0 * coupling * g.min(1.0)
}

/// `t_F = L / (2 v_max)`; infinite for `g = 0`.
pub fn fermi_time(sites: usize, g: f64, coupling: f64) -> f64 {
    sites as f64 / (2.0 * lieb_robinson_velocity(g, coupling))
}

/// Grid parameters of the numeric surge search. Steps are in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeSearch {
    /// End of the search window in units of `t_F`.
    pub window: f64,
    pub coarse_step: f64,
    pub fine_step: f64,
}

impl Default for SurgeSearch {
    fn default() -> Self {
        SurgeSearch {
            window: 1.3,
            coarse_step: 0.02,
            fine_step: 0.001,
        }
    }
}

/// Connected `g2(ℓ = ⌊L/2⌋)` along a time grid.
pub fn antipodal_series(engine: &FreeFermionEngine, times: &[f64]) -> Result<Vec<f64>> {
    let ell = engine.sites() / 2;
    times
        .par_iter()
        .map(|&t| {
            let one = engine.one_point(t)?.value;
            Ok(engine.two_point_at(t, ell)? - one * one)
        })
        .collect()
}

fn uniform_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step).ceil() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Numeric surge time of the antipodal connected correlator.
pub fn numeric_surge(engine: &FreeFermionEngine, search: &SurgeSearch) -> Result<SurgeResult> {
    let (g, coupling) = (engine.g(), engine.coupling());
    if g <= 0.0 {
        return Err(Error::Domain(
            "no propagation without transverse field (g = 0)".into(),
        ));
    }
    if !(search.window > 0.0 && search.coarse_step > 0.0 && search.fine_step > 0.0) {
        return Err(Error::arg("surge search window and steps must be positive"));
    }
    let t_end = search.window * fermi_time(engine.sites(), g, coupling);
    let coarse = uniform_grid(t_end, search.coarse_step / coupling);
    let values = antipodal_series(engine, &coarse)?;
    let peak = detect_peak(&coarse, &values)?;

    let lo = coarse[peak.index - 1];
    let hi = coarse[peak.index + 1];
    let dt = search.fine_step / coupling;
    let n = ((hi - lo) / dt).round() as usize;
    let fine: Vec<f64> = (0..=n).map(|i| lo + i as f64 * dt).collect();
    let fine_values = antipodal_series(engine, &fine)?;
    let (best, &height) = fine_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty refinement grid");
    Ok(SurgeResult {
        sites: engine.sites(),
        t_star: fine[best],
        method: SurgeMethod::NumericPeak,
        peak_height: Some(height),
        peak_width_75: Some(peak.width),
    })
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Regression(
            "need matching samples, at least two".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::Regression(
            "degenerate design: all abscissae equal".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
    })
}

/// Line through `(L, J·t*)` pairs.
pub fn surge_regression(pairs: &[(usize, f64)]) -> Result<LinearFit> {
    if pairs.len() < 3 {
        return Err(Error::arg(format!(
            "surge regression needs at least 3 pairs (got {})",
            pairs.len()
        )));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    linear_fit(&x, &y)
}

/// Stored surge times with the regression as fallback. Values are `J·t*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeLookup {
    pub g: f64,
    pub initial_state: InitialState,
    pub exact: BTreeMap<usize, f64>,
    pub regression: LinearFit,
}

impl SurgeLookup {
    pub fn from_pairs(g: f64, initial_state: InitialState, pairs: &[(usize, f64)]) -> Result<Self> {
        Ok(SurgeLookup {
            g,
            initial_state,
            exact: pairs.iter().copied().collect(),
            regression: surge_regression(pairs)?,
        })
    }

    /// `J·t*` at `L`: the stored value when present, the regression otherwise.
    pub fn predict(&self, sites: usize) -> (f64, SurgeMethod) {
        match self.exact.get(&sites) {
            Some(&v) => (v, SurgeMethod::NumericPeak),
            None => (
                self.regression.predict(sites as f64),
                SurgeMethod::Regression,
            ),
        }
    }

    /// Surge time in µs for coupling `J`.
    pub fn surge_time(&self, sites: usize, coupling: f64) -> SurgeResult {
        let (jt, method) = self.predict(sites);
        SurgeResult {
            sites,
            t_star: jt / coupling,
            method,
            peak_height: None,
            peak_width_75: None,
        }
    }
}

/// Analytic surge time of the antipodal correlator on a ring of `L` sites.
pub fn analytic_surge(sites: usize, g: f64, coupling: f64) -> Result<SurgeResult> {
    let ratio = (sites / 2) as f64 / sites as f64;
    let s = surge_estimate(g, ratio)?;
    Ok(SurgeResult {
        sites,
        t_star: s * fermi_time(sites, g, coupling),
        method: SurgeMethod::Analytic,
        peak_height: None,
        peak_width_75: None,
    })
}

/// Numeric surge for every ring size, in parallel.
pub fn surge_sweep(
    sites: &[usize],
    g: f64,
    coupling: f64,
    state: InitialState,
    search: &SurgeSearch,
) -> Result<Vec<SurgeResult>> {
    sites
        .par_iter()
        .map(|&l| {
            numeric_surge(
                &FreeFermionEngine::from_parts(l, g, coupling, state)?,
                search,
            )
        })
        .collect()
}

/// Peak heights against ring size with the fit of `ln(height)` on `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakHeightScan {
    pub rows: Vec<SurgeResult>,
    pub log_fit: LinearFit,
    pub strictly_decreasing: bool,
}

/// Antipodal peak heights of the plus-state quench.
pub fn peak_height_scan(
    sites: &[usize],
    g: f64,
    coupling: f64,
    search: &SurgeSearch,
) -> Result<PeakHeightScan> {
    let rows = surge_sweep(sites, g, coupling, InitialState::Plus, search)?;
    let x: Vec<f64> = rows.iter().map(|r| r.sites as f64).collect();
    let heights: Vec<f64> = rows
        .iter()
        .map(|r| r.peak_height.unwrap_or(f64::NAN))
        .collect();
    if heights.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Regression(
            "peak heights must be positive for a log-linear fit".into(),
        ));
    }
    let logs: Vec<f64> = heights.iter().map(|h| h.ln()).collect();
    let log_fit = linear_fit(&x, &logs)?;
    let strictly_decreasing = heights.windows(2).all(|w| w[1] < w[0]);
    Ok(PeakHeightScan {
        rows,
        log_fit,
        strictly_decreasing,
    })
}

/// One line of `surge_table.csv`. Times are dimensionless `J·t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeTableRow {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "Jt_star_numeric")]
    pub numeric: f64,
    #[serde(rename = "Jt_star_regression")]
    pub regression: f64,
    /// Only defined for `0 < g ≤ 1`.
    #[serde(rename = "Jt_star_analytic")]
    pub analytic: Option<f64>,
    pub peak_height: f64,
    #[serde(rename = "width75_Jt")]
    pub width75: f64,
}

/// Surge table, the lookup built from it, and the ring sizes where no peak
/// qualified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeTable {
    pub rows: Vec<SurgeTableRow>,
    pub lookup: SurgeLookup,
    pub unresolved: Vec<usize>,
}

/// Numeric surge times over a range of ring sizes. Sizes without a
/// qualifying peak are listed in `unresolved` and served by the regression.
pub fn surge_table(
    sites: &[usize],
    g: f64,
    coupling: f64,
    state: InitialState,
    search: &SurgeSearch,
) -> Result<SurgeTable> {
    let attempts: Vec<(usize, Result<SurgeResult>)> = sites
        .par_iter()
        .map(|&l| {
            let r = FreeFermionEngine::from_parts(l, g, coupling, state)
                .and_then(|e| numeric_surge(&e, search));
            (l, r)
        })
        .collect();
    let mut results = Vec::new();
    let mut unresolved = Vec::new();
    for (l, r) in attempts {
        match r {
            Ok(r) => results.push(r),
            Err(Error::PeakDetection { .. }) => unresolved.push(l),
            Err(e) => return Err(e),
        }
    }
    let pairs: Vec<(usize, f64)> = results
        .iter()
        .map(|r| (r.sites, coupling * r.t_star))
        .collect();
    let lookup = SurgeLookup::from_pairs(g, state, &pairs)?;
    let rows = results
        .iter()
        .map(|r| {
            let analytic = if g > 0.0 && g <= 1.0 {
                Some(coupling * analytic_surge(r.sites, g, coupling)?.t_star)
            } else {
                None
            };
            Ok(SurgeTableRow {
                sites: r.sites,
                numeric: coupling * r.t_star,
                regression: lookup.regression.predict(r.sites as f64),
                analytic,
                peak_height: r.peak_height.unwrap_or(f64::NAN),
                width75: coupling * r.peak_width_75.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;
    Ok(SurgeTable {
        rows,
        lookup,
        unresolved,
    })
}
