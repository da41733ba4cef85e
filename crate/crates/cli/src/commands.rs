use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use mbqs_core::ed::lindblad::MAX_LINDBLAD_SITES;
use mbqs_core::ed::sampler::MAX_SAMPLER_SITES;
use mbqs_core::ed::{dephasing_samples, noisy_shot_sampler, NoiseParams};
use mbqs_core::freefermion::{FreeFermionEngine, ReferenceTable};
use mbqs_core::io::read_json;
use mbqs_core::quench::{ising_to_rydberg, DetuningMode, InitialState, QuenchSpec, C6_RB60};
use mbqs_core::scoring::{
    dephasing_fit, estimate_correlators, mbqs_score, p2_jackknife, p2_score, predicted_score,
    readout_mitigate, CorrelationEstimate, CorrelatorEstimates, Policy, ReadoutChannel,
    ScoreOptions, ScoreReport,
};
use mbqs_core::shots::ShotRecordSet;
use mbqs_core::surge::{
    fermi_time, surge_table, SurgeLookup, SurgeMethod, SurgeSearch, SurgeTableRow,
};

use crate::config::{parse_reals, parse_sizes, Settings, Times};
use crate::error::CliError;
use crate::output::Output;

/// Coarse step of the default time window, in units of `1/J`.
const WINDOW_STEP_JT: f64 = 0.02;
/// Ring sizes always included when building a surge lookup, so that the
/// regression is well conditioned.
const LOOKUP_SIZES: std::ops::RangeInclusive<usize> = 6..=20;

fn out_dir(s: &Settings, default: &str) -> PathBuf {
    PathBuf::from(s.get_or("out", default))
}

/// `J` from `--J` or from `--a-um` with the Rb n=60 coefficient.
fn coupling(s: &Settings) -> Result<f64, CliError> {
    let j: Option<f64> = s.parse("J")?;
    let a: Option<f64> = s.parse("a-um")?;
    let j = match (j, a) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --J or --a-um, not both")),
        (Some(j), None) => j,
        (None, Some(a)) if a > 0.0 => C6_RB60 / (4.0 * a.powi(6)),
        (None, Some(a)) => {
            return Err(CliError::usage(format!(
                "--a-um must be positive (got {a})"
            )))
        }
        (None, None) => 1.0,
    };
    if !(j > 0.0 && j.is_finite()) {
        return Err(CliError::usage(format!(
            "coupling J must be positive (got {j})"
        )));
    }
    Ok(j)
}

fn state(s: &Settings, default: InitialState) -> Result<InitialState, CliError> {
    s.parse_or("state", default)
}

fn engines(
    sizes: &[usize],
    g: f64,
    j: f64,
    state: InitialState,
) -> Result<Vec<FreeFermionEngine>, CliError> {
    sizes
        .iter()
        .map(|&l| {
            QuenchSpec::new(l, g, j, state, Vec::new())?;
            Ok(FreeFermionEngine::from_parts(l, g, j, state)?)
        })
        .collect()
}

/// Surge times: exact where the numeric peak qualifies, regression
/// otherwise. Values are `J·t*`.
fn lookup(sizes: &[usize], g: f64, j: f64, state: InitialState) -> Result<SurgeLookup, CliError> {
    let mut all: Vec<usize> = sizes.iter().copied().chain(LOOKUP_SIZES).collect();
    all.sort_unstable();
    all.dedup();
    Ok(surge_table(&all, g, j, state, &SurgeSearch::default())?.lookup)
}

fn real_list(values: &[f64]) -> Value {
    json!(values)
}

#[derive(Serialize, Deserialize)]
struct SpacetimeRow {
    #[serde(rename = "Jt")]
    jt: f64,
    ell: usize,
    g2: f64,
}

pub fn reference(s: &Settings) -> Result<(), CliError> {
    let sizes = parse_sizes(s.get_or("L", "6..20"))?;
    let g: f64 = s.parse_or("g", 1.0)?;
    let j = coupling(s)?;
    let initial = state(s, InitialState::Plus)?;
    let times: Times = s.parse_or("times", Times::Window)?;
    let engines = engines(&sizes, g, j, initial)?;
    let surge = match times {
        Times::Surge => Some(lookup(&sizes, g, j, initial)?),
        _ => None,
    };

    let mut out = Output::new(&out_dir(s, "reference"))?;
    let mut grids = Map::new();
    for engine in &engines {
        let l = engine.sites();
        let grid: Vec<f64> = match &times {
            Times::Window => {
                // No light cone at g = 0; use the g = 1 window instead.
                let t_f = fermi_time(l, g, j);
                let end = 1.3
                    * if t_f.is_finite() {
                        t_f
                    } else {
                        fermi_time(l, 1.0, j)
                    };
                let n = (end * j / WINDOW_STEP_JT).ceil() as usize;
                (0..=n).map(|i| i as f64 * WINDOW_STEP_JT / j).collect()
            }
            Times::Surge => vec![surge.as_ref().expect("built above").surge_time(l, j).t_star],
            Times::Explicit(ts) => ts.clone(),
        };
        let table = engine.table(&grid)?;
        let comments = [
            format!(
                "free-fermion reference: L = {l}, g = {g}, J = {j} rad/us, initial state {initial}"
            ),
            "t_us in microseconds; ell in sites; correlators of sigma^z, dimensionless".to_string(),
        ];
        out.csv(&format!("reference_L{l}.csv"), &comments, &table.rows)?;
        out.json(&format!("reference_L{l}.json"), &table)?;
        let spacetime: Vec<SpacetimeRow> = table
            .rows
            .iter()
            .map(|r| SpacetimeRow {
                jt: j * r.t_us,
                ell: r.ell,
                g2: r.g2_connected,
            })
            .collect();
        let comments = [
            format!("connected correlator g2(Jt, ell): L = {l}, g = {g}, initial state {initial}"),
            "Jt dimensionless (time times coupling); ell in sites".to_string(),
        ];
        out.csv(&format!("spacetime_L{l}.csv"), &comments, &spacetime)?;
        out.json(&format!("spacetime_L{l}.json"), &spacetime)?;
        grids.insert(
            l.to_string(),
            json!({"n_times": grid.len(), "t_max_us": grid.last()}),
        );
    }

    let mut p = Map::new();
    p.insert("L".into(), json!(sizes));
    p.insert("g".into(), json!(g));
    p.insert("J_rad_per_us".into(), json!(j));
    p.insert("initial_state".into(), json!(initial));
    p.insert("times".into(), json!(s.get_or("times", "window")));
    p.insert("grids".into(), Value::Object(grids));
    out.finish("reference", s, p)
}

#[derive(Serialize)]
struct LookupFile<'a> {
    #[serde(rename = "J_rad_per_us")]
    coupling: f64,
    lookup: &'a SurgeLookup,
    /// Ring sizes without a qualifying numeric peak.
    unresolved: &'a [usize],
}

pub fn surge(s: &Settings) -> Result<(), CliError> {
    let sizes = parse_sizes(s.get_or("L", "6..20"))?;
    let g: f64 = s.parse_or("g", 1.0)?;
    let j = coupling(s)?;
    let initial = state(s, InitialState::Plus)?;
    engines(&sizes, g, j, initial)?;
    let table = surge_table(&sizes, g, j, initial, &SurgeSearch::default())?;

    let mut out = Output::new(&out_dir(s, "surge"))?;
    let fit = &table.lookup.regression;
    let comments = [
        format!("surge times: g = {g}, J = {j} rad/us, initial state {initial}"),
        "times as dimensionless J*t; peak_height dimensionless".to_string(),
        format!(
            "regression Jt* = {:.6} L {} {:.6}, R^2 = {:.6}",
            fit.slope,
            if fit.intercept < 0.0 { '-' } else { '+' },
            fit.intercept.abs(),
            fit.r2
        ),
    ];
    out.csv("surge_table.csv", &comments, &table.rows)?;
    out.json::<Vec<SurgeTableRow>>("surge_table.json", &table.rows)?;
    out.json(
        "surge_lookup.json",
        &LookupFile {
            coupling: j,
            lookup: &table.lookup,
            unresolved: &table.unresolved,
        },
    )?;
    for l in &table.unresolved {
        eprintln!("mbqs: L = {l}: no qualifying peak, using the regression");
    }

    let mut p = Map::new();
    p.insert("L".into(), json!(sizes));
    p.insert("g".into(), json!(g));
    p.insert("J_rad_per_us".into(), json!(j));
    p.insert("initial_state".into(), json!(initial));
    p.insert(
        "search".into(),
        json!({"window_t_over_tF": 1.3, "coarse_step_Jt": 0.02, "fine_step_Jt": 0.001}),
    );
    out.finish("surge", s, p)
}

fn noise_params(s: &Settings) -> Result<NoiseParams, CliError> {
    let preset = s.get_or("noise", "default");
    let mut noise = match preset {
        "default" | "coherent" => NoiseParams::default(),
        "noiseless" => NoiseParams::noiseless(),
        other => {
            return Err(CliError::usage(format!(
                "--noise: unknown preset '{other}'"
            )))
        }
    };
    let fields: [(&str, &mut f64); 9] = [
        ("T1", &mut noise.t1_us),
        ("T2", &mut noise.t2_us),
        ("sigma_r_xy", &mut noise.sigma_r_xy),
        ("sigma_r_z", &mut noise.sigma_r_z),
        ("p_prep", &mut noise.p_prep),
        ("p_fn", &mut noise.p_fn),
        ("p_fp", &mut noise.p_fp),
        ("sigma_omega_rel", &mut noise.sigma_omega_rel),
        ("sigma_delta", &mut noise.sigma_delta),
    ];
    for (key, field) in fields {
        if let Some(v) = s.parse::<f64>(key)? {
            *field = v;
        }
    }
    if preset == "default" {
        noise = noise.with_t2_dephasing();
    }
    noise.validate()?;
    Ok(noise)
}

/// Seed of the shots for ring `L` at time index `k`.
fn shot_seed(seed: u64, sites: usize, k: usize) -> u64 {
    seed.wrapping_add((sites as u64) << 32)
        .wrapping_add(k as u64)
}

#[derive(Serialize)]
struct SampleRow {
    #[serde(rename = "L")]
    sites: usize,
    t_us: f64,
    #[serde(rename = "Jt")]
    jt: f64,
    time_source: String,
    omega_rad_per_us: f64,
    delta_rad_per_us: f64,
    seed: u64,
    file: String,
}

pub fn sample(s: &Settings) -> Result<(), CliError> {
    let sizes = parse_sizes(s.get_or("L", "3..12"))?;
    let g: f64 = s.parse_or("g", 1.0)?;
    let a: f64 = s.parse_or("a-um", 7.5)?;
    if !(a > 0.0) {
        return Err(CliError::usage(format!(
            "--a-um must be positive (got {a})"
        )));
    }
    let j = C6_RB60 / (4.0 * a.powi(6));
    let initial = state(s, InitialState::Down)?;
    let times: Times = s.parse_or("times", Times::Surge)?;
    let shots: usize = s.parse_or("shots", 2000)?;
    let seed: u64 = s.parse_or("seed", 0)?;
    let noise = noise_params(s)?;
    let mode = match s.parse::<f64>("delta")? {
        Some(d) => DetuningMode::Override(d),
        None => DetuningMode::ExactPerL,
    };
    if shots == 0 {
        return Err(CliError::usage("--shots must be at least 1"));
    }
    if let Some(&l) = sizes.iter().find(|&&l| l > MAX_SAMPLER_SITES) {
        return Err(mbqs_core::Error::Resource(format!(
            "noisy sampling is limited to L <= {MAX_SAMPLER_SITES} (got {l})"
        ))
        .into());
    }
    let params = sizes
        .iter()
        .map(|&l| {
            ising_to_rydberg(
                &QuenchSpec::new(l, g, j, initial, Vec::new())?,
                C6_RB60,
                a,
                mode,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let surge = match times {
        Times::Surge => Some(lookup(&sizes, g, j, initial)?),
        Times::Window => {
            return Err(CliError::usage(
                "sample needs --times surge or explicit times",
            ))
        }
        Times::Explicit(_) => None,
    };

    let mut out = Output::new(&out_dir(s, "shots"))?;
    let mut rows = Vec::new();
    for p in &params {
        let l = p.sites;
        let grid: Vec<(f64, String)> = match (&times, &surge) {
            (Times::Explicit(ts), _) => ts.iter().map(|&t| (t, "explicit".to_string())).collect(),
            (_, Some(lk)) => {
                let r = lk.surge_time(l, j);
                let source = match r.method {
                    SurgeMethod::NumericPeak => "surge_numeric",
                    SurgeMethod::Regression => "surge_regression",
                    SurgeMethod::Analytic => "surge_analytic",
                };
                vec![(r.t_star, source.to_string())]
            }
            _ => unreachable!("validated above"),
        };
        for (k, (t, source)) in grid.into_iter().enumerate() {
            let seed_k = shot_seed(seed, l, k);
            let set = noisy_shot_sampler(p, &noise, initial, t, shots, seed_k)?;
            let file = if times == Times::Surge
                || matches!(&times, Times::Explicit(ts) if ts.len() == 1)
            {
                format!("L{l}.shots")
            } else {
                format!("L{l}_t{k}.shots")
            };
            out.bytes(&file, set.to_text()?.as_bytes())?;
            rows.push(SampleRow {
                sites: l,
                t_us: t,
                jt: j * t,
                time_source: source,
                omega_rad_per_us: p.omega,
                delta_rad_per_us: p.delta,
                seed: seed_k,
                file,
            });
        }
    }
    let comments = [
        format!("sampled shots: g = {g}, a = {a} um, J = {j} rad/us, initial state {initial}, {shots} shots each"),
        "t_us in microseconds; Jt dimensionless; omega and delta in rad/us".to_string(),
    ];
    out.csv("samples.csv", &comments, &rows)?;
    out.json("samples.json", &rows)?;

    let mut p = Map::new();
    p.insert("L".into(), json!(sizes));
    p.insert("g".into(), json!(g));
    p.insert("a_um".into(), json!(a));
    p.insert("J_rad_per_us".into(), json!(j));
    p.insert("initial_state".into(), json!(initial));
    p.insert("times".into(), json!(s.get_or("times", "surge")));
    p.insert("shots".into(), json!(shots));
    p.insert("seed".into(), json!(seed));
    p.insert("detuning".into(), json!(mode));
    p.insert(
        "noise".into(),
        serde_json::to_value(noise).map_err(mbqs_core::Error::from)?,
    );
    out.finish("sample", s, p)
}

/// Experimental input for one ring size.
enum Data {
    Shots(ShotRecordSet),
    /// A single-time reference table standing in for a perfect device.
    Exact(ReferenceTable),
}

struct Experiment {
    source: String,
    sites: usize,
    t: f64,
    g: f64,
    coupling: f64,
    initial: InitialState,
    data: Data,
}

fn load_experiments(dir: &Path) -> Result<BTreeMap<usize, Experiment>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| {
        CliError::format(format!(
            "cannot read records directory {}: {e}",
            dir.display()
        ))
    })?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for path in paths {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        let exp = if name.ends_with(".shots") {
            let set = ShotRecordSet::read(&path).map_err(|e| CliError::input(&path, e))?;
            let m = &set.metadata;
            Experiment {
                source: name,
                sites: m.sites,
                t: m.t_us,
                g: m.g,
                coupling: m.coupling,
                initial: m.initial_state,
                data: Data::Shots(set),
            }
        } else if name.starts_with("reference_L") && name.ends_with(".json") {
            let table: ReferenceTable = read_json(&path).map_err(|e| CliError::input(&path, e))?;
            let times = table.times();
            if times.len() != 1 {
                return Err(CliError::format(format!(
                    "{name}: a reference table used as data must hold a single time (has {})",
                    times.len()
                )));
            }
            Experiment {
                source: name,
                sites: table.sites,
                t: times[0],
                g: table.g,
                coupling: table.coupling,
                initial: table.initial_state,
                data: Data::Exact(table),
            }
        } else {
            continue;
        };
        if let Some(prev) = out.get(&exp.sites) {
            let prev: &Experiment = prev;
            return Err(CliError::format(format!(
                "both {} and {} hold data for L = {}",
                prev.source, exp.source, exp.sites
            )));
        }
        out.insert(exp.sites, exp);
    }
    if out.is_empty() {
        return Err(CliError::format(format!(
            "no .shots or reference_L*.json files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// Connected correlators of a table at time `t`, indexed by `ℓ − 1`.
fn table_profile(table: &ReferenceTable, t: f64) -> Option<Vec<f64>> {
    (1..=table.sites / 2)
        .map(|ell| {
            table
                .rows
                .iter()
                .find(|r| r.ell == ell && same_time(r.t_us, t))
                .map(|r| r.g2_connected)
        })
        .collect()
}

fn theory(exp: &Experiment, reference: Option<&Path>) -> Result<Vec<f64>, CliError> {
    let Some(dir) = reference else {
        let engine = FreeFermionEngine::from_parts(exp.sites, exp.g, exp.coupling, exp.initial)?;
        return Ok(engine.correlations(exp.t)?.connected);
    };
    let path = dir.join(format!("reference_L{}.json", exp.sites));
    let table: ReferenceTable = read_json(&path).map_err(|e| CliError::input(&path, e))?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    if !(close(table.g, exp.g)
        && close(table.coupling, exp.coupling)
        && table.initial_state == exp.initial)
    {
        return Err(CliError::format(format!(
            "{}: quench (g = {}, J = {}, {}) does not match {} (g = {}, J = {}, {})",
            path.display(),
            table.g,
            table.coupling,
            table.initial_state,
            exp.source,
            exp.g,
            exp.coupling,
            exp.initial
        )));
    }
    table_profile(&table, exp.t).ok_or_else(|| {
        CliError::format(format!(
            "{} has no rows at t = {} us; regenerate it with --times {}",
            path.display(),
            exp.t,
            exp.t
        ))
    })
}

#[derive(Serialize)]
struct P2Row {
    #[serde(rename = "L")]
    sites: usize,
    t_us: f64,
    #[serde(rename = "P2")]
    value: f64,
    stderr: f64,
    stderr_jackknife: f64,
    n_shots: usize,
    mitigated: bool,
    nearest_neighbour_only: bool,
    source: String,
}

#[derive(Serialize)]
struct ScoreFile<'a> {
    reports: &'a [ScoreReport],
    p2: &'a [P2Row],
}

pub fn score(s: &Settings) -> Result<(), CliError> {
    let records = PathBuf::from(
        s.get("records")
            .ok_or_else(|| CliError::usage("--records is required"))?,
    );
    let reference = s.get("reference").map(PathBuf::from);
    let epsilons = parse_reals("epsilon", s.get_or("epsilon", "0.5"))?;
    if let Some(e) = epsilons.iter().find(|&&e| e <= 0.0) {
        return Err(CliError::usage(format!(
            "--epsilon values must be positive (got {e})"
        )));
    }
    let mitigate = s.flag("mitigate")?;
    let channel = ReadoutChannel {
        p_fp: s.parse_or("p-fp", 0.01)?,
        p_fn: s.parse_or("p-fn", 0.07)?,
    };
    let policy: Policy = s.parse_or("policy", Policy::Strict)?;
    let exclude = match s.get("exclude-L") {
        Some(text) => parse_sizes(text)?,
        None => Vec::new(),
    };

    let experiments = load_experiments(&records)?;
    let mut rows = Vec::new();
    let mut p2s = Vec::new();
    for exp in experiments.values() {
        let th = theory(exp, reference.as_deref())?;
        let (est, jackknife, n_shots, mitigated) = match &exp.data {
            Data::Shots(set) => {
                let raw = estimate_correlators(set)?;
                let est = if mitigate {
                    readout_mitigate(&raw, channel)?
                } else {
                    raw
                };
                let jk = p2_jackknife(set, &th, mitigate.then_some(channel))?;
                (est, jk, set.n_shots(), mitigate)
            }
            Data::Exact(table) => {
                let exact = |value| CorrelationEstimate {
                    value,
                    stderr: 0.0,
                    n_shots: 0,
                };
                let g2 = table_profile(table, exp.t).expect("single-time table");
                let one = table.rows.first().map(|r| r.one_point).unwrap_or(0.0);
                let est = CorrelatorEstimates {
                    sites: exp.sites,
                    one_point: exact(one),
                    g2: g2.into_iter().map(exact).collect(),
                };
                (est, 0.0, 0, false)
            }
        };
        let p2 = p2_score(&est, &th)?;
        rows.push(P2Row {
            sites: exp.sites,
            t_us: exp.t,
            value: p2.value,
            stderr: p2.stderr,
            stderr_jackknife: jackknife,
            n_shots,
            mitigated,
            nearest_neighbour_only: p2.nearest_neighbour_only,
            source: exp.source.clone(),
        });
        p2s.push(p2);
    }

    let options = ScoreOptions {
        policy,
        exclude: exclude.clone(),
        volumetric_epsilons: epsilons.clone(),
    };
    let reports = epsilons
        .iter()
        .map(|&e| {
            let mut r = mbqs_score(&p2s, e, &options)?;
            r.mitigation = mitigate.then_some(channel);
            Ok(r)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut out = Output::new(&out_dir(s, "score"))?;
    let comments = [
        "P2: mean relative error of connected correlators at the sampling time".to_string(),
        "t_us in microseconds; stderr by first-order propagation, stderr_jackknife from shots"
            .to_string(),
    ];
    out.csv("p2.csv", &comments, &rows)?;
    out.json(
        "score_report.json",
        &ScoreFile {
            reports: &reports,
            p2: &rows,
        },
    )?;
    let cells = &reports[0].cells;
    let comments = [format!(
        "volumetric classification, policy {policy}: pass if P2 + stderr <= epsilon, inconclusive if P2 <= epsilon < P2 + stderr"
    )];
    out.csv("volumetric.csv", &comments, cells)?;
    out.json("volumetric.json", cells)?;
    for r in &reports {
        let s_text = r.score.map_or("none".to_string(), |v| v.to_string());
        let bound = if r.lower_bounded {
            " (lower bound)"
        } else {
            ""
        };
        println!(
            "epsilon = {}: S = {s_text}{bound} [{}]",
            r.epsilon, r.policy
        );
    }

    let mut p = Map::new();
    p.insert("records".into(), json!(records));
    p.insert("reference".into(), json!(reference));
    p.insert("epsilon".into(), real_list(&epsilons));
    p.insert("mitigate".into(), json!(mitigate));
    p.insert("readout_channel".into(), json!(channel));
    p.insert("policy".into(), json!(policy));
    p.insert("exclude_L".into(), json!(exclude));
    out.finish("score", s, p)
}

#[derive(Serialize)]
struct NoiseFitFile {
    beta: f64,
    r2: f64,
    n_samples: usize,
    gamma_device: f64,
    epsilon: f64,
    predicted_score: f64,
    predicted_score_rounded: i64,
}

pub fn noise_fit(s: &Settings) -> Result<(), CliError> {
    let sizes = parse_sizes(s.get_or("L", "4,6,8"))?;
    let gs = parse_reals("g", s.get_or("g", "0.5,1"))?;
    let gammas = parse_reals("gamma", s.get_or("gamma", "0.02,0.05,0.1,0.2"))?;
    let initial = state(s, InitialState::Down)?;
    let epsilon: f64 = s.parse_or("epsilon", 0.5)?;
    let gamma_device: f64 = s.parse_or("gamma-device", 0.05)?;
    let dt: f64 = s.parse_or("dt", 0.01)?;
    if let Some(&l) = sizes.iter().find(|&&l| l > MAX_LINDBLAD_SITES) {
        return Err(mbqs_core::Error::Resource(format!(
            "dense Lindblad evolution is limited to L <= {MAX_LINDBLAD_SITES} (got {l})"
        ))
        .into());
    }
    if let Some(&l) = sizes.iter().find(|&&l| l < 2) {
        return Err(CliError::usage(format!(
            "ring sizes must be at least 2 (got {l})"
        )));
    }
    if let Some(g) = gs.iter().find(|&&g| !(g > 0.0)) {
        return Err(CliError::usage(format!(
            "--g values must be positive (got {g})"
        )));
    }
    if let Some(x) = gammas.iter().find(|&&x| x < 0.0) {
        return Err(CliError::usage(format!(
            "--gamma values must be non-negative (got {x})"
        )));
    }

    let samples = dephasing_samples(&sizes, &gs, &gammas, initial, dt)?;
    let fit = dephasing_fit(&samples)?;
    let predicted = predicted_score(gamma_device, epsilon, fit.beta)?;

    let mut out = Output::new(&out_dir(s, "noise_fit"))?;
    let comments = [
        format!("antipodal peak suppression eta under dephasing, J = 1, initial state {initial}"),
        "gamma in 1/us (units of J); eta dimensionless".to_string(),
    ];
    out.csv("dephasing_samples.csv", &comments, &samples)?;
    out.json("dephasing_samples.json", &samples)?;
    out.json(
        "noise_fit.json",
        &NoiseFitFile {
            beta: fit.beta,
            r2: fit.r2,
            n_samples: fit.n_samples,
            gamma_device,
            epsilon,
            predicted_score: predicted,
            predicted_score_rounded: predicted.round() as i64,
        },
    )?;
    println!(
        "beta = {:.4} (R^2 = {:.4}), predicted S = {predicted:.2}",
        fit.beta, fit.r2
    );

    let mut p = Map::new();
    p.insert("L".into(), json!(sizes));
    p.insert("g".into(), real_list(&gs));
    p.insert("gamma".into(), real_list(&gammas));
    p.insert("initial_state".into(), json!(initial));
    p.insert("epsilon".into(), json!(epsilon));
    p.insert("gamma_device".into(), json!(gamma_device));
    p.insert("dt".into(), json!(dt));
    out.finish("noise-fit", s, p)
}
