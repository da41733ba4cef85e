//! From measured bitstrings to the benchmark score.
//!
//! Shots give `σᶻ = 2b − 1` per site. One- and two-point means are averaged
//! over sites (translation invariance) and shots; the connected correlator is
//! the plug-in estimate `mean(σᶻ_i σᶻ_{i+ℓ}) − mean(σᶻ)²`, with a leave-one-shot
//! -out jackknife for its standard error.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shots::ShotRecordSet;

/// Floor on `|g2_theory|` below which a relative error is refused.
pub const DIVISION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_shots: usize,
}

/// Site-averaged estimates of one record set; `g2[ℓ − 1]` for `ℓ = 1..=⌊L/2⌋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimates {
    #[serde(rename = "L")]
    pub sites: usize,
    pub one_point: CorrelationEstimate,
    pub g2: Vec<CorrelationEstimate>,
}

impl CorrelatorEstimates {
    pub fn g2_at(&self, ell: usize) -> Option<&CorrelationEstimate> {
        ell.checked_sub(1).and_then(|i| self.g2.get(i))
    }
}

/// Per-shot site averages: `m_s = mean_i σᶻ_i` and
/// `p_s(ℓ) = mean_i σᶻ_i σᶻ_{i+ℓ}`.
struct ShotMoments {
    one: Vec<f64>,
    /// Row-major `n_shots × ⌊L/2⌋`.
    two: Vec<f64>,
    half: usize,
}

fn shot_moments(records: &ShotRecordSet) -> ShotMoments {
    let l = records.sites();
    let half = l / 2;
    let inv = 1.0 / l as f64;
    let mut one = Vec::with_capacity(records.n_shots());
    let mut two = Vec::with_capacity(records.n_shots() * half);
    let mut z = vec![0.0; l];
    for shot in records.shots() {
        for (zi, &b) in z.iter_mut().zip(shot) {
            *zi = 2.0 * b as f64 - 1.0;
        }
        one.push(z.iter().sum::<f64>() * inv);
        for ell in 1..=half {
            let s: f64 = (0..l).map(|i| z[i] * z[(i + ell) % l]).sum();
            two.push(s * inv);
        }
    }
    ShotMoments { one, two, half }
}

fn mean(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.sum::<f64>() / n as f64
}

/// Jackknife standard error from leave-one-out replicates.
fn jackknife_stderr(replicates: &[f64]) -> f64 {
    let n = replicates.len() as f64;
    let m = replicates.iter().sum::<f64>() / n;
    ((n - 1.0) / n * replicates.iter().map(|r| (r - m).powi(2)).sum::<f64>()).sqrt()
}

/// One-point and connected two-point estimates with standard errors.
pub fn estimate_correlators(records: &ShotRecordSet) -> Result<CorrelatorEstimates> {
    let n = records.n_shots();
    if n < 2 {
        return Err(Error::arg("standard errors need at least two shots"));
    }
    let l = records.sites();
    let mom = shot_moments(records);
    let half = mom.half;
    let nf = n as f64;

    let m = mean(mom.one.iter().copied(), n);
    let var = mom.one.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0);
    let one_point = CorrelationEstimate {
        value: m,
        stderr: (var / nf).sqrt(),
        n_shots: n,
    };

    let mut g2 = Vec::with_capacity(half);
    let mut loo = vec![0.0; n];
    for ell in 0..half {
        let p = mean((0..n).map(|s| mom.two[s * half + ell]), n);
        for (s, r) in loo.iter_mut().enumerate() {
            let p_s = (nf * p - mom.two[s * half + ell]) / (nf - 1.0);
            let m_s = (nf * m - mom.one[s]) / (nf - 1.0);
            *r = p_s - m_s * m_s;
        }
        g2.push(CorrelationEstimate {
            value: p - m * m,
            stderr: jackknife_stderr(&loo),
            n_shots: n,
        });
    }
    Ok(CorrelatorEstimates {
        sites: l,
        one_point,
        g2,
    })
}

/// Readout flip probabilities: `p_fp` for `0 → 1`, `p_fn` for `1 → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutChannel {
    pub p_fp: f64,
    pub p_fn: f64,
}

impl ReadoutChannel {
    fn factors(&self) -> Result<(f64, f64)> {
        for p in [self.p_fp, self.p_fn] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::arg(format!("flip probability {p} outside [0, 1]")));
            }
        }
        let s = self.p_fp + self.p_fn;
        if s >= 1.0 {
            return Err(Error::ChannelNotInvertible(s));
        }
        Ok((s, self.p_fp - self.p_fn))
    }
}

/// Inverts the readout channel: `⟨σᶻ⟩ → (⟨σᶻ⟩ − d)/(1 − s)` and
/// `g2 → g2/(1 − s)²` with `s = p_fp + p_fn`, `d = p_fp − p_fn`.
pub fn readout_mitigate(
    est: &CorrelatorEstimates,
    channel: ReadoutChannel,
) -> Result<CorrelatorEstimates> {
    let (s, d) = channel.factors()?;
    let a = 1.0 / (1.0 - s);
    let b = a * a;
    Ok(CorrelatorEstimates {
        sites: est.sites,
        one_point: CorrelationEstimate {
            value: (est.one_point.value - d) * a,
            stderr: est.one_point.stderr * a,
            n_shots: est.one_point.n_shots,
        },
        g2: est
            .g2
            .iter()
            .map(|e| CorrelationEstimate {
                value: e.value * b,
                stderr: e.stderr * b,
                n_shots: e.n_shots,
            })
            .collect(),
    })
}

/// `P₂(L)` with its propagated error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P2Score {
    #[serde(rename = "L")]
    pub sites: usize,
    pub value: f64,
    pub stderr: f64,
    /// Set for `L = 3`, where the nearest-neighbour distance stands in for
    /// the empty sum.
    pub nearest_neighbour_only: bool,
}

/// Distances entering `P₂(L)`: `2..=⌊L/2⌋`, or `{1}` for `L = 3`.
pub fn p2_distances(sites: usize) -> Result<Vec<usize>> {
    match sites {
        0..=2 => Err(Error::arg(format!("P2 needs L >= 3 (got {sites})"))),
        3 => Ok(vec![1]),
        _ => Ok((2..=sites / 2).collect()),
    }
}

fn check_theory(theory: &[f64], ells: &[usize]) -> Result<()> {
    for &ell in ells {
        let th = *theory
            .get(ell - 1)
            .ok_or_else(|| Error::arg(format!("no theory value for distance {ell}")))?;
        if th.abs() < DIVISION_FLOOR {
            return Err(Error::DivisionGuard { ell, value: th });
        }
    }
    Ok(())
}

/// Mean relative error of the connected correlators; `theory[ℓ − 1]` is the
/// reference at distance `ℓ`. The error bar is first-order propagation of
/// the per-distance standard errors.
pub fn p2_score(exp: &CorrelatorEstimates, theory: &[f64]) -> Result<P2Score> {
    let ells = p2_distances(exp.sites)?;
    check_theory(theory, &ells)?;
    let n = ells.len() as f64;
    let mut value = 0.0;
    let mut var = 0.0;
    for &ell in &ells {
        let e = exp
            .g2_at(ell)
            .ok_or_else(|| Error::arg(format!("no estimate for distance {ell}")))?;
        let th = theory[ell - 1];
        value += ((e.value - th) / th).abs() / n;
        var += (e.stderr / (n * th.abs())).powi(2);
    }
    Ok(P2Score {
        sites: exp.sites,
        value,
        stderr: var.sqrt(),
        nearest_neighbour_only: exp.sites == 3,
    })
}

/// Jackknife error bar of `P₂` directly from shots, as a cross-check of the
/// propagated one. Mitigation, if any, is applied to every replicate.
pub fn p2_jackknife(
    records: &ShotRecordSet,
    theory: &[f64],
    channel: Option<ReadoutChannel>,
) -> Result<f64> {
    let n = records.n_shots();
    if n < 2 {
        return Err(Error::arg("jackknife needs at least two shots"));
    }
    let ells = p2_distances(records.sites())?;
    check_theory(theory, &ells)?;
    let (s, _) = channel
        .map(|c| c.factors())
        .transpose()?
        .unwrap_or((0.0, 0.0));
    let scale = 1.0 / (1.0 - s).powi(2);
    let mom = shot_moments(records);
    let half = mom.half;
    let nf = n as f64;
    let m = mean(mom.one.iter().copied(), n);
    let p: Vec<f64> = (0..half)
        .map(|ell| mean((0..n).map(|s| mom.two[s * half + ell]), n))
        .collect();
    let replicates: Vec<f64> = (0..n)
        .map(|sh| {
            let m_s = (nf * m - mom.one[sh]) / (nf - 1.0);
            ells.iter()
                .map(|&ell| {
                    let p_s = (nf * p[ell - 1] - mom.two[sh * half + ell - 1]) / (nf - 1.0);
                    let g = (p_s - m_s * m_s) * scale;
                    let th = theory[ell - 1];
                    ((g - th) / th).abs()
                })
                .sum::<f64>()
                / ells.len() as f64
        })
        .collect();
    Ok(jackknife_stderr(&replicates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Pass => "pass",
            CellStatus::Inconclusive => "inconclusive",
            CellStatus::Fail => "fail",
        })
    }
}

/// Classification of one `(L, ε)` cell.
pub fn classify(p2: &P2Score, epsilon: f64) -> CellStatus {
    if p2.value + p2.stderr <= epsilon {
        CellStatus::Pass
    } else if p2.value <= epsilon {
        CellStatus::Inconclusive
    } else {
        CellStatus::Fail
    }
}

/// Which cells count as success when computing `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Only `pass`.
    #[default]
    Strict,
    /// `pass` or `inconclusive`.
    Lenient,
}

impl Policy {
    fn accepts(self, status: CellStatus) -> bool {
        match self {
            Policy::Strict => status == CellStatus::Pass,
            Policy::Lenient => status != CellStatus::Fail,
        }
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Policy::Strict),
            "lenient" => Ok(Policy::Lenient),
            other => Err(Error::arg(format!(
                "unknown policy '{other}' (expected strict or lenient)"
            ))),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Strict => "strict",
            Policy::Lenient => "lenient",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumetricCell {
    #[serde(rename = "L")]
    pub sites: usize,
    pub epsilon: f64,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub policy: Policy,
    /// Ring sizes left out of the `∀L' ≤ L` rule.
    pub exclude: Vec<usize>,
    /// Additional thresholds for the volumetric grid.
    pub volumetric_epsilons: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub p2: Vec<P2Score>,
    pub epsilon: f64,
    /// Largest `L` whose cell and all smaller ones are accepted; `None` when
    /// the smallest ring already fails.
    pub score: Option<usize>,
    /// True when a missing ring size cut the scan short, so `S` may be larger.
    pub lower_bounded: bool,
    pub missing: Vec<usize>,
    pub policy: Policy,
    pub excluded: Vec<usize>,
    pub mitigation: Option<ReadoutChannel>,
    pub cells: Vec<VolumetricCell>,
}

/// Score `S` at threshold `ε` with the volumetric classification.
pub fn mbqs_score(p2: &[P2Score], epsilon: f64, options: &ScoreOptions) -> Result<ScoreReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::arg(format!(
            "threshold ε = {epsilon} must be positive"
        )));
    }
    if p2.is_empty() {
        return Err(Error::arg("no P2 values to score"));
    }
    let mut by_size: BTreeMap<usize, P2Score> = BTreeMap::new();
    for p in p2 {
        if by_size.insert(p.sites, *p).is_some() {
            return Err(Error::arg(format!(
                "duplicate P2 entry for L = {}",
                p.sites
            )));
        }
    }
    let lo = *by_size.keys().next().expect("non-empty");
    let hi = *by_size.keys().next_back().expect("non-empty");
    let missing: Vec<usize> = (lo..=hi)
        .filter(|l| !by_size.contains_key(l) && !options.exclude.contains(l))
        .collect();

    let mut score = None;
    let mut lower_bounded = false;
    for l in lo..=hi {
        if options.exclude.contains(&l) {
            continue;
        }
        match by_size.get(&l) {
            None => {
                lower_bounded = true;
                break;
            }
            Some(p) if options.policy.accepts(classify(p, epsilon)) => score = Some(l),
            Some(_) => break,
        }
    }

    let mut epsilons = vec![epsilon];
    for &e in &options.volumetric_epsilons {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::arg(format!("threshold ε = {e} must be positive")));
        }
        if !epsilons.contains(&e) {
            epsilons.push(e);
        }
    }
    epsilons.sort_by(f64::total_cmp);
    let cells = by_size
        .values()
        .flat_map(|p| {
            epsilons.iter().map(move |&e| VolumetricCell {
                sites: p.sites,
                epsilon: e,
                status: classify(p, e),
            })
        })
        .collect();

    Ok(ScoreReport {
        p2: by_size.into_values().collect(),
        epsilon,
        score,
        lower_bounded,
        missing,
        policy: options.policy,
        excluded: options.exclude.clone(),
        mitigation: None,
        cells,
    })
}

/// One dephasing simulation: suppression `η` of the antipodal peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingSample {
    pub gamma: f64,
    pub g: f64,
    #[serde(rename = "L")]
    pub sites: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingFit {
    pub beta: f64,
    /// Uncentred `R²` of the fit through the origin.
    pub r2: f64,
    pub n_samples: usize,
}

/// Least squares of `−ln η` against `γ g L²` through the origin.
pub fn dephasing_fit(samples: &[DephasingSample]) -> Result<DephasingFit> {
    if samples.is_empty() {
        return Err(Error::arg("no dephasing samples"));
    }
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for s in samples {
        if !(s.eta > 0.0 && s.eta.is_finite()) {
            return Err(Error::arg(format!(
                "η = {} must be positive (γ = {}, L = {})",
                s.eta, s.gamma, s.sites
            )));
        }
        let x = s.gamma * s.g * (s.sites * s.sites) as f64;
        let y = -s.eta.ln();
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    if sxx == 0.0 {
        return Err(Error::Regression("all samples have γ g L² = 0".into()));
    }
    let beta = sxy / sxx;
    if beta <= 0.0 {
        return Err(Error::Regression(format!(
            "fitted β = {beta} is not positive"
        )));
    }
    let ss_res = syy - beta * sxy;
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(DephasingFit {
        beta,
        r2,
        n_samples: samples.len(),
    })
}

/// Largest ring with antipodal suppression below `ε` at `g = 1`:
/// `S = √(−ln(1 − ε) / (β γ))`.
pub fn predicted_score(gamma: f64, epsilon: f64, beta: f64) -> Result<f64> {
    if !(gamma > 0.0 && beta > 0.0) {
        return Err(Error::arg(format!(
            "γ = {gamma} and β = {beta} must be positive"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::arg(format!("ε = {epsilon} outside (0, 1)")));
    }
    Ok((-(1.0 - epsilon).ln() / (beta * gamma)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quench::InitialState;
    use crate::shots::ShotMetadata;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn records(sites: usize, rows: Vec<Vec<u8>>) -> ShotRecordSet {
        let meta = ShotMetadata {
            device_id: "test".into(),
            sites,
            a_um: None,
            g: 1.0,
            coupling: 1.0,
            initial_state: InitialState::Down,
            t_us: 1.0,
            n_shots: 0,
            seed: None,
        };
        ShotRecordSet::new(meta, rows).unwrap()
    }

    fn estimates(sites: usize, g2: &[f64], se: f64) -> CorrelatorEstimates {
        CorrelatorEstimates {
            sites,
            one_point: CorrelationEstimate {
                value: 0.0,
                stderr: 0.0,
                n_shots: 100,
            },
            g2: g2
                .iter()
                .map(|&v| CorrelationEstimate {
                    value: v,
                    stderr: se,
                    n_shots: 100,
                })
                .collect(),
        }
    }

    fn p2(sites: usize, value: f64, stderr: f64) -> P2Score {
        P2Score {
            sites,
            value,
            stderr,
            nearest_neighbour_only: sites == 3,
        }
    }

    #[test]
    fn all_zero_bits() {
        let est = estimate_correlators(&records(6, vec![vec![0; 6]; 20])).unwrap();
        assert_eq!(est.one_point.value, -1.0);
        assert!(est.g2.iter().all(|e| e.value == 0.0 && e.stderr == 0.0));
        assert_eq!(est.g2.len(), 3);
    }

    #[test]
    fn fair_coins_are_uncorrelated() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (l, n) = (8, 20_000);
        let rows = (0..n)
            .map(|_| (0..l).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let est = estimate_correlators(&records(l, rows)).unwrap();
        for (i, e) in est.g2.iter().enumerate() {
            // antipodal pairs appear twice in the site sum
            let pairs = if i + 1 == l / 2 { l / 2 } else { l };
            let expected = 1.0 / ((n * pairs) as f64).sqrt();
            assert!(e.value.abs() < 4.0 * e.stderr);
            assert!(
                (e.stderr / expected - 1.0).abs() < 0.1,
                "{} vs {expected}",
                e.stderr
            );
        }
    }

    #[test]
    fn jackknife_matches_naive_leave_one_out() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<u8>> = (0..40)
            .map(|_| (0..5).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let est = estimate_correlators(&records(5, rows.clone())).unwrap();
        let value = |rows: &[Vec<u8>], ell: usize| {
            let n = rows.len() as f64;
            let z = |b: u8| 2.0 * b as f64 - 1.0;
            let m: f64 = rows
                .iter()
                .flat_map(|r| r.iter().map(|&b| z(b)))
                .sum::<f64>()
                / (5.0 * n);
            let p: f64 = rows
                .iter()
                .map(|r| (0..5).map(|i| z(r[i]) * z(r[(i + ell) % 5])).sum::<f64>())
                .sum::<f64>()
                / (5.0 * n);
            p - m * m
        };
        for ell in 1..=2 {
            let reps: Vec<f64> = (0..rows.len())
                .map(|i| {
                    let mut r = rows.clone();
                    r.remove(i);
                    value(&r, ell)
                })
                .collect();
            assert_relative_eq!(est.g2[ell - 1].value, value(&rows, ell), epsilon = 1e-12);
            assert_relative_eq!(
                est.g2[ell - 1].stderr,
                jackknife_stderr(&reps),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn cyclic_relabelling_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<u8>> = (0..50)
            .map(|_| (0..7).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let shifted: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| (0..7).map(|i| r[(i + 3) % 7]).collect())
            .collect();
        let a = estimate_correlators(&records(7, rows)).unwrap();
        let b = estimate_correlators(&records(7, shifted)).unwrap();
        assert_relative_eq!(a.one_point.value, b.one_point.value, epsilon = 1e-14);
        for (x, y) in a.g2.iter().zip(&b.g2) {
            assert_relative_eq!(x.value, y.value, epsilon = 1e-14);
            assert_relative_eq!(x.stderr, y.stderr, epsilon = 1e-12);
        }
    }

    #[test]
    fn mitigation_examples() {
        let mut est = estimates(6, &[0.1, 0.2, 0.3], 0.01);
        let same = readout_mitigate(
            &est,
            ReadoutChannel {
                p_fp: 0.0,
                p_fn: 0.0,
            },
        )
        .unwrap();
        assert_eq!(same, est);
        est.one_point.value = 0.0;
        let m = readout_mitigate(
            &est,
            ReadoutChannel {
                p_fp: 0.01,
                p_fn: 0.07,
            },
        )
        .unwrap();
        assert!((m.one_point.value - 0.06522).abs() < 1e-5);
        assert_relative_eq!(m.g2[0].value, 0.1 / 0.92f64.powi(2), epsilon = 1e-14);
        assert_relative_eq!(m.g2[0].stderr, 0.01 / 0.92f64.powi(2), epsilon = 1e-14);
        assert!(matches!(
            readout_mitigate(
                &est,
                ReadoutChannel {
                    p_fp: 0.5,
                    p_fn: 0.5
                }
            ),
            Err(Error::ChannelNotInvertible(_))
        ));
    }

    #[test]
    fn p2_examples() {
        let theory = [0.3, -0.2, 0.1, 0.05];
        let exact = estimates(8, &theory, 0.0);
        assert_eq!(p2_score(&exact, &theory).unwrap().value, 0.0);
        let zero = estimates(8, &[0.0; 4], 0.0);
        assert_relative_eq!(
            p2_score(&zero, &theory).unwrap().value,
            1.0,
            epsilon = 1e-15
        );
        let far: Vec<f64> = theory.iter().map(|t| 2.5 * t).collect();
        assert_relative_eq!(
            p2_score(&estimates(8, &far, 0.0), &theory).unwrap().value,
            1.5,
            epsilon = 1e-14
        );
        let scaled: Vec<f64> = theory.iter().map(|t| 0.93 * t).collect();
        assert_relative_eq!(
            p2_score(&estimates(8, &scaled, 0.0), &theory)
                .unwrap()
                .value,
            0.07,
            epsilon = 1e-14
        );
    }

    #[test]
    fn p2_edge_cases() {
        assert_eq!(p2_distances(4).unwrap(), vec![2]);
        assert_eq!(p2_distances(3).unwrap(), vec![1]);
        assert!(p2_distances(2).is_err());
        let small = p2_score(&estimates(3, &[0.2], 0.01), &[0.1]).unwrap();
        assert!(small.nearest_neighbour_only);
        assert_relative_eq!(small.value, 1.0, epsilon = 1e-14);
        match p2_score(&estimates(6, &[0.1, 0.2, 0.3], 0.0), &[0.1, 0.2, 1e-14]) {
            Err(Error::DivisionGuard { ell, .. }) => assert_eq!(ell, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn propagated_and_jackknife_errors_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let (l, n) = (8, 4000);
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|_| {
                let base = rng.random_range(0..2u8);
                (0..l)
                    .map(|_| {
                        if rng.random::<f64>() < 0.7 {
                            base
                        } else {
                            1 - base
                        }
                    })
                    .collect()
            })
            .collect();
        let set = records(l, rows);
        let est = estimate_correlators(&set).unwrap();
        let theory: Vec<f64> = est.g2.iter().map(|e| 1.3 * e.value).collect();
        let delta = p2_score(&est, &theory).unwrap().stderr;
        let jack = p2_jackknife(&set, &theory, None).unwrap();
        assert!(delta > 0.0 && jack > 0.0);
        assert!((delta / jack).ln().abs() < 1.0, "{delta} vs {jack}");
    }

    #[test]
    fn score_examples() {
        let flat: Vec<P2Score> = (4..=9).map(|l| p2(l, 0.0, 0.0)).collect();
        let r = mbqs_score(&flat, 0.5, &ScoreOptions::default()).unwrap();
        assert_eq!(r.score, Some(9));
        assert!(!r.lower_bounded);

        let mixed = [
            p2(4, 0.2, 0.0),
            p2(5, 0.2, 0.0),
            p2(6, 0.6, 0.0),
            p2(7, 0.2, 0.0),
        ];
        let r = mbqs_score(&mixed, 0.5, &ScoreOptions::default()).unwrap();
        assert_eq!(r.score, Some(5));
        assert_eq!(
            r.cells
                .iter()
                .filter(|c| c.status == CellStatus::Fail)
                .count(),
            1
        );
    }

    #[test]
    fn policy_exclusions_and_gaps() {
        let data = [
            p2(3, 0.9, 0.0),
            p2(4, 0.3, 0.0),
            p2(5, 0.45, 0.1),
            p2(6, 0.2, 0.0),
            p2(8, 0.1, 0.0),
        ];
        let strict = mbqs_score(&data, 0.5, &ScoreOptions::default()).unwrap();
        assert_eq!(strict.score, None);
        let opts = ScoreOptions {
            exclude: vec![3],
            ..Default::default()
        };
        assert_eq!(mbqs_score(&data, 0.5, &opts).unwrap().score, Some(4));
        let lenient = ScoreOptions {
            policy: Policy::Lenient,
            exclude: vec![3],
            ..Default::default()
        };
        let r = mbqs_score(&data, 0.5, &lenient).unwrap();
        assert_eq!(r.score, Some(6));
        assert!(r.lower_bounded);
        assert_eq!(r.missing, vec![7]);
        assert_eq!(r.excluded, vec![3]);
        assert_eq!(classify(&data[2], 0.5), CellStatus::Inconclusive);
    }

    #[test]
    fn volumetric_grid() {
        let data = [p2(4, 0.05, 0.01), p2(5, 0.2, 0.08)];
        let opts = ScoreOptions {
            volumetric_epsilons: vec![0.1, 0.25, 0.5],
            ..Default::default()
        };
        let r = mbqs_score(&data, 0.5, &opts).unwrap();
        assert_eq!(r.cells.len(), 6);
        let cell = |l: usize, e: f64| {
            r.cells
                .iter()
                .find(|c| c.sites == l && c.epsilon == e)
                .unwrap()
                .status
        };
        assert_eq!(cell(5, 0.1), CellStatus::Fail);
        assert_eq!(cell(5, 0.25), CellStatus::Inconclusive);
        assert_eq!(cell(5, 0.5), CellStatus::Pass);
    }

    #[test]
    fn dephasing_examples() {
        assert!((predicted_score(1.0 / 20.0, 0.5, 0.12).unwrap() - 10.7).abs() < 0.05);
        assert_eq!(
            predicted_score(1.0 / 20.0, 0.5, 0.12).unwrap().round(),
            11.0
        );
        assert_eq!(predicted_score(1.0 / 5.0, 0.5, 0.12).unwrap().round(), 5.0);
        let samples: Vec<DephasingSample> = [0.02, 0.05, 0.1]
            .iter()
            .flat_map(|&gamma| {
                [(0.5, 4), (1.0, 6), (1.0, 8)].map(|(g, l)| DephasingSample {
                    gamma,
                    g,
                    sites: l,
                    eta: (-0.12 * gamma * g * (l * l) as f64).exp(),
                })
            })
            .collect();
        let fit = dephasing_fit(&samples).unwrap();
        assert!((fit.beta - 0.12).abs() < 1e-10);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);
        let mut bad = samples.clone();
        bad[0].eta = 0.0;
        assert!(matches!(dephasing_fit(&bad), Err(Error::Argument(_))));
    }
}
