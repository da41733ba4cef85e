//! First-peak detection on sampled correlator curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A candidate peak must reach this fraction of the global maximum.
pub const HEIGHT_GATE: f64 = 0.5;
/// Minimum topographic prominence, as a fraction of the global maximum.
pub const PROMINENCE_GATE: f64 = 0.1;
/// Level at which the peak width is measured, as a fraction of its height.
pub const WIDTH_LEVEL: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeMethod {
    NumericPeak,
    Regression,
    Analytic,
}

/// Surge time of one ring. Peak height and width are only known for
/// `NumericPeak`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeResult {
    #[serde(rename = "L")]
    pub sites: usize,
    pub t_star: f64,
    pub method: SurgeMethod,
    pub peak_height: Option<f64>,
    pub peak_width_75: Option<f64>,
}

/// Index of the surge peak in a sampled series, with its 75 % width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub width: f64,
}

fn prominence(values: &[f64], i: usize) -> f64 {
    let v = values[i];
    let mut left = v;
    for &x in values[..i].iter().rev() {
        if x > v {
            break;
        }
        left = left.min(x);
    }
    let mut right = v;
    for &x in &values[i + 1..] {
        if x > v {
            break;
        }
        right = right.min(x);
    }
    v - left.max(right)
}

/// Full width of the peak at `WIDTH_LEVEL × height`, interpolating linearly
/// between samples. A side that never drops below the level is cut at the end
/// of the series.
fn width_at(times: &[f64], values: &[f64], i: usize) -> f64 {
    let level = WIDTH_LEVEL * values[i];
    let cross = |a: usize, b: usize| {
        let (va, vb) = (values[a], values[b]);
        times[a] + (level - va) / (vb - va) * (times[b] - times[a])
    };
    let mut lo = times[0];
    for j in (0..i).rev() {
        if values[j] < level {
            lo = cross(j, j + 1);
            break;
        }
    }
    let mut hi = times[times.len() - 1];
    for j in i + 1..values.len() {
        if values[j] < level {
            hi = cross(j - 1, j);
            break;
        }
    }
    hi - lo
}

/// Earliest local maximum that is at least half the global maximum and has a
/// prominence of at least 10 % of it.
pub fn detect_peak(times: &[f64], values: &[f64]) -> Result<Peak> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::arg(
            "peak detection needs at least three (t, value) samples",
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("sample times must be strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("series contains non-finite values"));
    }
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty series");
    let fallback = Error::PeakDetection {
        fallback_time: times[imax],
        fallback_value: vmax,
    };
    if vmax <= 0.0 {
        return Err(fallback);
    }
    let n = values.len();
    for i in 1..n - 1 {
        let v = values[i];
        if v > values[i - 1]
            && v >= values[i + 1]
            && v >= HEIGHT_GATE * vmax
            && prominence(values, i) >= PROMINENCE_GATE * vmax
        {
            return Ok(Peak {
                index: i,
                height: v,
                width: width_at(times, values, i),
            });
        }
    }
    Err(fallback)
}

/// Surge time of a sampled antipodal correlator series.
pub fn find_surge_time(sites: usize, times: &[f64], values: &[f64]) -> Result<SurgeResult> {
    let peak = detect_peak(times, values)?;
    Ok(SurgeResult {
        sites,
        t_star: times[peak.index],
        method: SurgeMethod::NumericPeak,
        peak_height: Some(peak.height),
        peak_width_75: Some(peak.width),
    })
}
