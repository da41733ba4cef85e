//! Single-mode correlation kernel `f_{k,ℓ}(t)` and the analytic surge time.
//!
//! With `x = 2t|ε'_k|/L` and `a = ℓ/L`, one period of the kernel is
//! `f(0) − π²x` up to `x = a`, the plateau `−π²a²` up to `x = 1 − a`, and
//! the mirror ramp back to `f(0) = π²a(1 − a)` at `x = 1`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::freefermion::{excitation_amplitude, group_velocity};

/// Kernel value; `degenerate` is set when `ε'_k = 0` and the kernel is the
/// constant `f(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub degenerate: bool,
}

/// Speed `|dε/dk|` of mode `k`.
fn mode_speed(k: f64, g: f64, coupling: f64) -> f64 {
    group_velocity(g, coupling, k).abs()
}

fn check_distance(ell: usize, sites: usize) -> Result<f64> {
    if ell == 0 || 2 * ell > sites {
        return Err(Error::arg(format!(
            "distance {ell} outside 1..={}",
            sites / 2
        )));
    }
    Ok(ell as f64 / sites as f64)
}

/// Kernel in the reduced variables `x` (time in units of the mode period) and
/// `a = ℓ/L`.
fn kernel_reduced(x: f64, a: f64) -> f64 {
    let f0 = PI * PI * a * (1.0 - a);
    let x = x - x.floor();
    if x <= a {
        f0 - PI * PI * x
    } else if x <= 1.0 - a {
        -PI * PI * a * a
    } else {
        f0 - PI * PI * (1.0 - x)
    }
}

/// `d f / dx` in the reduced variables: `−π²`, `0` or `+π²`.
fn slope_reduced(x: f64, a: f64) -> f64 {
    let x = x - x.floor();
    if x < a {
        -PI * PI
    } else if x < 1.0 - a {
        0.0
    } else {
        PI * PI
    }
}

/// `f_{k,ℓ}(t)` in closed form, extended periodically.
pub fn f_closed_form(
    k: f64,
    ell: usize,
    sites: usize,
    t: f64,
    g: f64,
    coupling: f64,
) -> Result<KernelValue> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::arg(format!("momentum {k} outside (0, π)")));
    }
    let a = check_distance(ell, sites)?;
    let speed = mode_speed(k, g, coupling);
    if speed == 0.0 {
        return Ok(KernelValue {
            value: kernel_reduced(0.0, a),
            degenerate: true,
        });
    }
    Ok(KernelValue {
        value: kernel_reduced(2.0 * t * speed / sites as f64, a),
        degenerate: false,
    })
}

/// `df_{k,ℓ}/dt`, piecewise constant.
pub fn f_time_derivative(
    k: f64,
    ell: usize,
    sites: usize,
    t: f64,
    g: f64,
    coupling: f64,
) -> Result<f64> {
    let a = check_distance(ell, sites)?;
    let speed = mode_speed(k, g, coupling);
    let rate = 2.0 * speed / sites as f64;
    Ok(rate * slope_reduced(t * rate, a))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Golub–Welsch).
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let m = i.max(j) as f64;
            m / (4.0 * m * m - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

const GL_ORDER: usize = 24;

/// Mode speed in units of the maximal velocity, `u(k) = |ε'_k| / v_max`,
/// for `0 < g ≤ 1`.
fn reduced_speed(k: f64, g: f64) -> f64 {
    mode_speed(k, g, 1.0) / (2.0 * g)
}

/// Momenta in `(0, π)` where `u(k) = y`, from
/// `cos k = g y² ± √((1 − y²)(1 − g² y²))`.
fn speed_level_crossings(y: f64, g: f64) -> Vec<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Vec::new();
    }
    let root = ((1.0 - y * y) * (1.0 - g * g * y * y)).max(0.0).sqrt();
    [g * y * y + root, g * y * y - root]
        .into_iter()
        .filter(|c| c.abs() < 1.0)
        .map(f64::acos)
        .filter(|&k| (reduced_speed(k, g) - y).abs() < 1e-9)
        .collect()
}

/// Left-hand side of the surge condition at `s = t / t_F`, up to a positive
/// factor: `∫₀^π K(k)² u(k) h(s·u(k)) dk` with `h` the reduced kernel slope.
pub fn surge_condition(g: f64, a: f64, s: f64) -> f64 {
    // Breakpoints: s·u(k) crosses n + a, n + 1 − a or n + 1.
    let mut cuts = vec![0.0, PI];
    let mut n = 0.0;
    while n <= s {
        for level in [n + a, n + 1.0 - a, n + 1.0] {
            cuts.extend(speed_level_crossings(level / s, g));
        }
        n += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let rule = gauss_legendre(GL_ORDER);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let h = slope_reduced(s * reduced_speed(mid, g), a);
        if h == 0.0 {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let integral: f64 = rule
            .iter()
            .map(|&(x, wt)| {
                let k = mid + half * x;
                let kk = excitation_amplitude(g, k);
                wt * kk * kk * reduced_speed(k, g)
            })
            .sum::<f64>()
            * half;
        total += h * integral;
    }
    total
}

/// Bracket used for the root, in units of `t_F`.
pub const ESTIMATE_BRACKET: (f64, f64) = (0.9, 2.0);

/// Analytic surge time `t*/t_F`: the first sign change from positive to
/// negative of the surge condition inside the bracket, refined by bisection.
pub fn surge_estimate(g: f64, ell_over_l: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::arg(format!(
            "analytic surge estimate needs 0 < g <= 1 (got {g})"
        )));
    }
    if !(ell_over_l > 0.0 && ell_over_l <= 0.5) {
        return Err(Error::arg(format!("ℓ/L = {ell_over_l} outside (0, 1/2]")));
    }
    let f = |s: f64| surge_condition(g, ell_over_l, s);
    let (lo, hi) = ESTIMATE_BRACKET;
    let steps = 220;
    let mut trace = Vec::with_capacity(steps + 1);
    let mut prev = (lo, f(lo));
    trace.push(prev);
    for i in 1..=steps {
        let s = lo + (hi - lo) * i as f64 / steps as f64;
        let v = f(s);
        trace.push((s, v));
        if prev.1 > 0.0 && v <= 0.0 {
            let (mut a, mut b) = (prev.0, s);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if f(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = (s, v);
    }
    Err(Error::Estimation {
        message: format!("no positive-to-negative sign change in t/t_F ∈ [{lo}, {hi}] for g = {g}, ℓ/L = {ell_over_l}"),
        trace,
    })
}
