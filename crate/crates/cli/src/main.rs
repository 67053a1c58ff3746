//! `lpoint`: command-line front end for the L-point spin-qubit toolkit.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use lpoint_core::config::{section_help, ConfigError, RunConfig};

use output::{Manifest, Outputs};

#[derive(Parser, Debug)]
#[command(name = "lpoint", version, about = "Band structure, spin-orbit, valley, injection and fin electrostatics tools for (111) Si L-point qubits")]
pub struct Cli {
    /// TOML configuration file; keys not given keep their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// RNG seed (sets inject.seed).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Override any config key, e.g. --set poisson.vgate=0.5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// sp3s* bands along a k-path. Writes bands.csv, kpath.csv, band_features.json.
    Bands(BandsArgs),
    /// Multipole spin-orbit checks. Writes spinorbit.json.
    Spinorbit(SpinorbitArgs),
    /// Double-group character table and decompositions. Writes group.json.
    Group(GroupArgs),
    /// Valley splitting under confinement. Writes valleys.json.
    Valleys(ValleysArgs),
    /// Unit cells, levels and electrons in cubic dots. Writes dots.csv, dots.json.
    Dots(DotsArgs),
    /// Injection protocol and Monte Carlo retries. Writes inject_events.csv,
    /// inject_retries.csv, inject.json.
    Inject(InjectArgs),
    /// Fin cross-section electrostatics. Writes potential_<variant>.csv,
    /// contour_<variant>.pgm, contour_<variant>.csv, geometry_<variant>.txt,
    /// poisson_metrics.json.
    Poisson(PoissonArgs),
    /// Run every check; writes verify_report.json, verify_report.txt and the
    /// regression outputs.
    #[command(name = "verify-all", alias = "verify_all")]
    VerifyAll,
}

#[derive(Args, Debug)]
pub struct BandsArgs {
    /// k-points per segment (bands.samples).
    #[arg(long)]
    samples: Option<usize>,
    /// Path: l-gamma-x, gamma-delta-x, gamma-lambda-l or k-l (bands.path).
    #[arg(long)]
    path: Option<String>,
    /// Load a built-in parameter set: si-refit or vogl1983.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug)]
pub struct SpinorbitArgs {
    /// Which check to run.
    #[arg(long, default_value = "all", value_parser = ["all", "dso-lambda", "spin-sum", "bsvsp"])]
    check: String,
    /// Λ-axis point t in k = (t, t, t) (spinorbit.k_t).
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    /// Decompose a character vector over the six classes, e.g. "4,-4,-2,2,0,0".
    #[arg(long, allow_hyphen_values = true)]
    rep: Option<String>,
}

#[derive(Args, Debug)]
pub struct ValleysArgs {
    /// X0 or L (valleys.family).
    #[arg(long)]
    family: Option<String>,
    /// Growth axis, e.g. 001 or 111 (valleys.growth).
    #[arg(long, allow_hyphen_values = true)]
    growth: Option<String>,
    /// Well width in nm (valleys.well_width_nm).
    #[arg(long)]
    width_nm: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DotsArgs {
    /// Cube edge in nm; repeatable (dots.sides_nm).
    #[arg(long = "side-nm")]
    side_nm: Vec<f64>,
    /// nearest or floor (dots.rounding).
    #[arg(long)]
    rounding: Option<String>,
}

#[derive(Args, Debug)]
pub struct InjectArgs {
    /// Landing probability on L (inject.p_l).
    #[arg(long)]
    p_l: Option<f64>,
    /// Monte Carlo trials (inject.trials).
    #[arg(long)]
    trials: Option<usize>,
    /// Retry budget (inject.max_retries).
    #[arg(long)]
    max_retries: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PoissonArgs {
    /// planarized, protruding or both (poisson.variant).
    #[arg(long)]
    variant: Option<String>,
    /// Fin width in nm (poisson.w_nm).
    #[arg(long)]
    w_nm: Option<f64>,
    /// Gate voltage (poisson.vgate).
    #[arg(long, allow_hyphen_values = true)]
    vgate: Option<f64>,
    /// dielectric_continuity or fixed_potential (poisson.interface_mode).
    #[arg(long)]
    interface_mode: Option<String>,
}

/// Subcommand name and the config sections listed in its help.
const SECTIONS: &[(&str, &[&str])] = &[
    ("bands", &["lattice", "tb", "bands"]),
    ("spinorbit", &["tb", "spinorbit"]),
    ("group", &[]),
    ("valleys", &["valleys"]),
    ("dots", &["lattice", "dots"]),
    ("inject", &["inject"]),
    ("poisson", &["poisson"]),
    ("verify-all", &["lattice", "tb", "bands", "spinorbit", "dots", "inject", "poisson"]),
];

fn command_with_key_help() -> clap::Command {
    let mut cmd = Cli::command();
    for (name, sections) in SECTIONS {
        if sections.is_empty() {
            continue;
        }
        let mut text = String::from("Config keys (key, default, meaning):\n");
        for s in *sections {
            text.push_str(&section_help(s));
        }
        cmd = cmd.mut_subcommand(*name, |c| c.after_help(text));
    }
    cmd
}

pub enum Failure {
    /// A check ran and failed.
    Check(String),
    /// Bad configuration or usage.
    Config(anyhow::Error),
    /// I/O or numerical failure.
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(s) = cli.seed {
        cfg.apply_override(&format!("inject.seed={s}"))?;
    }
    for o in commands::flag_overrides(&cli.command)? {
        cfg.apply_override(&o)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let matches = command_with_key_help().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let name = commands::name(&cli.command);
    let mut out = Outputs::new(cli.out.clone());
    let cfg = resolve(&cli);
    let result = match &cfg {
        Ok(cfg) => out.prepare().map_err(Failure::from).and_then(|()| commands::run(&cli.command, cfg, &mut out)),
        Err(e) => Err(Failure::Config(anyhow::anyhow!("{e}"))),
    };
    let (code, error) = match &result {
        Ok(()) => (0u8, None),
        Err(Failure::Check(msg)) => (1, Some(("check_failed", msg.clone()))),
        Err(Failure::Config(e)) => (2, Some(("config", format!("{e:#}")))),
        Err(Failure::Runtime(e)) => (1, Some(("runtime", format!("{e:#}")))),
    };
    if let Some((_, msg)) = &error {
        eprintln!("lpoint {name}: {msg}");
    }
    let manifest = Manifest::new(name, cfg.as_ref().ok(), out.files(), code, error);
    if let Err(e) = out.write_manifest(&manifest) {
        eprintln!("lpoint {name}: cannot write manifest: {e:#}");
        return ExitCode::from(code.max(1));
    }
    ExitCode::from(code)
}
