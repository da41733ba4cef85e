//! `mbqs`: reference tables, surge times, synthetic shots, scores and
//! dephasing fits for the quenched Ising ring benchmark.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "mbqs",
    version,
    about = "Many-body quantum score pipeline for quenched Ising rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-fermion reference correlators and spacetime tables.
    Reference(ReferenceArgs),
    /// Numeric surge times, their regression and the analytic estimate.
    Surge(SurgeArgs),
    /// Noisy shots of the Rydberg ring from exact evolution.
    Sample(SampleArgs),
    /// P2 per ring size, the score S and the volumetric grid.
    Score(ScoreArgs),
    /// Dephasing suppression fit and the predicted score.
    NoiseFit(NoiseFitArgs),
}

/// Flags shared by every command.
#[derive(Args)]
struct Common {
    /// Flat `key = value` file; keys are the long flag names. Flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ReferenceArgs {
    #[command(flatten)]
    common: Common,
    /// Ring sizes, e.g. `6..20` or `4,8,12` [default: 6..20].
    #[arg(long = "L")]
    sites: Option<String>,
    /// Transverse field in units of J [default: 1].
    #[arg(long)]
    g: Option<String>,
    /// Coupling in rad/µs [default: 1].
    #[arg(long = "J")]
    coupling: Option<String>,
    /// Atom spacing in µm; sets J = C6/(4a⁶) for Rb n=60.
    #[arg(long = "a-um")]
    a_um: Option<String>,
    /// Initial state: plus, down or afm [default: plus].
    #[arg(long)]
    state: Option<String>,
    /// `window`, `surge`, `start:stop:step` or a list, in µs [default: window].
    #[arg(long)]
    times: Option<String>,
}

#[derive(Args)]
struct SurgeArgs {
    #[command(flatten)]
    common: Common,
    /// Ring sizes [default: 6..20].
    #[arg(long = "L")]
    sites: Option<String>,
    /// Transverse field in units of J [default: 1].
    #[arg(long)]
    g: Option<String>,
    /// Coupling in rad/µs [default: 1].
    #[arg(long = "J")]
    coupling: Option<String>,
    /// Atom spacing in µm; sets J = C6/(4a⁶) for Rb n=60.
    #[arg(long = "a-um")]
    a_um: Option<String>,
    /// Initial state: plus or down [default: plus].
    #[arg(long)]
    state: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    /// Ring sizes, at most 12 [default: 3..12].
    #[arg(long = "L")]
    sites: Option<String>,
    /// Transverse field in units of J [default: 1].
    #[arg(long)]
    g: Option<String>,
    /// Atom spacing in µm [default: 7.5].
    #[arg(long = "a-um")]
    a_um: Option<String>,
    /// Initial state: plus or down [default: down].
    #[arg(long)]
    state: Option<String>,
    /// `surge` or explicit times in µs [default: surge].
    #[arg(long)]
    times: Option<String>,
    /// Shots per ring size and time [default: 2000].
    #[arg(long)]
    shots: Option<String>,
    /// Base seed [default: 0].
    #[arg(long)]
    seed: Option<String>,
    /// Noise preset: default (dephasing at 2/T2), coherent (no dephasing) or
    /// noiseless [default: default].
    #[arg(long)]
    noise: Option<String>,
    /// Fixed detuning in rad/µs instead of the exact value per L.
    #[arg(long)]
    delta: Option<String>,
}

/// Noise figures that may be set in the config file of `sample`.
const NOISE_KEYS: [&str; 9] = [
    "T1",
    "T2",
    "sigma_r_xy",
    "sigma_r_z",
    "p_prep",
    "p_fn",
    "p_fp",
    "sigma_omega_rel",
    "sigma_delta",
];

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    /// Directory with `.shots` files or single-time `reference_L*.json` tables.
    #[arg(long)]
    records: Option<String>,
    /// Directory with reference tables; computed from record metadata if absent.
    #[arg(long)]
    reference: Option<String>,
    /// Thresholds; the first one also sets the volumetric grid order [default: 0.5].
    #[arg(long)]
    epsilon: Option<String>,
    /// Invert the readout channel before scoring.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    mitigate: Option<String>,
    /// False-positive readout probability [default: 0.01].
    #[arg(long = "p-fp")]
    p_fp: Option<String>,
    /// False-negative readout probability [default: 0.07].
    #[arg(long = "p-fn")]
    p_fn: Option<String>,
    /// strict or lenient [default: strict].
    #[arg(long)]
    policy: Option<String>,
    /// Ring sizes left out of the score.
    #[arg(long = "exclude-L")]
    exclude: Option<String>,
}

#[derive(Args)]
struct NoiseFitArgs {
    #[command(flatten)]
    common: Common,
    /// Ring sizes, at most 10 [default: 4,6,8].
    #[arg(long = "L")]
    sites: Option<String>,
    /// Transverse fields [default: 0.5,1].
    #[arg(long)]
    g: Option<String>,
    /// Dephasing rates in 1/µs with J = 1 [default: 0.02,0.05,0.1,0.2].
    #[arg(long)]
    gamma: Option<String>,
    /// Initial state [default: down].
    #[arg(long)]
    state: Option<String>,
    /// Threshold for the predicted score [default: 0.5].
    #[arg(long)]
    epsilon: Option<String>,
    /// Device dephasing rate used for the prediction [default: 0.05].
    #[arg(long = "gamma-device")]
    gamma_device: Option<String>,
    /// Time step of the peak search [default: 0.01].
    #[arg(long)]
    dt: Option<String>,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Reference(a) => {
            let s = Settings::resolve(
                vec![
                    ("out", a.common.out),
                    ("L", a.sites),
                    ("g", a.g),
                    ("J", a.coupling),
                    ("a-um", a.a_um),
                    ("state", a.state),
                    ("times", a.times),
                ],
                a.common.config.as_deref(),
            )?;
            commands::reference(&s)
        }
        Command::Surge(a) => {
            let s = Settings::resolve(
                vec![
                    ("out", a.common.out),
                    ("L", a.sites),
                    ("g", a.g),
                    ("J", a.coupling),
                    ("a-um", a.a_um),
                    ("state", a.state),
                ],
                a.common.config.as_deref(),
            )?;
            commands::surge(&s)
        }
        Command::Sample(a) => {
            let mut flags = vec![
                ("out", a.common.out),
                ("L", a.sites),
                ("g", a.g),
                ("a-um", a.a_um),
                ("state", a.state),
                ("times", a.times),
                ("shots", a.shots),
                ("seed", a.seed),
                ("noise", a.noise),
                ("delta", a.delta),
            ];
            flags.extend(NOISE_KEYS.iter().map(|&k| (k, None)));
            let s = Settings::resolve(flags, a.common.config.as_deref())?;
            commands::sample(&s)
        }
        Command::Score(a) => {
            let s = Settings::resolve(
                vec![
                    ("out", a.common.out),
                    ("records", a.records),
                    ("reference", a.reference),
                    ("epsilon", a.epsilon),
                    ("mitigate", a.mitigate),
                    ("p-fp", a.p_fp),
                    ("p-fn", a.p_fn),
                    ("policy", a.policy),
                    ("exclude-L", a.exclude),
                ],
                a.common.config.as_deref(),
            )?;
            commands::score(&s)
        }
        Command::NoiseFit(a) => {
            let s = Settings::resolve(
                vec![
                    ("out", a.common.out),
                    ("L", a.sites),
                    ("g", a.g),
                    ("gamma", a.gamma),
                    ("state", a.state),
                    ("epsilon", a.epsilon),
                    ("gamma-device", a.gamma_device),
                    ("dt", a.dt),
                ],
                a.common.config.as_deref(),
            )?;
            commands::noise_fit(&s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbqs: {e}");
            ExitCode::from(e.code)
        }
    }
}
