//! `dqw` — batch driver for the two-particle dissipative-walk lab.
//!
//! Every run reads an optional `key = value` config file, applies long-form
//! flag overrides, writes its artifacts and a JSON manifest into the output
//! directory, and exits 0 on success, 1 on validation failure, 2 on a
//! configuration error, 3 on a resource refusal.

mod cache;
mod commands;
mod config;
mod manifest;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{apply_pairs, read_config_file, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Resource(String),
    Compute(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Resource(m) => write!(f, "resource refusal: {m}"),
            CliError::Compute(m) => write!(f, "compute error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dqw",
    version,
    about = "Exact two-particle dissipative quantum walk laboratory",
    long_about = "Evaluates the exact density matrices of two lattice particles coupled to a \
common thermal bath, and everything derived from them: probability profiles, spectra, \
purity/entropy/mutual-information sweeps, cross-term coherence, lattice Wigner functions \
and their negative volume, and the mirror-bipartition geometric discord."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file of `key = value` lines ('#' comments). Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Hopping rate Ω/ħ.
    #[arg(long, global = true)]
    omega_rate: Option<f64>,
    /// Dissipation rate D = Γ² k_B T / ħ.
    #[arg(long, global = true)]
    d_rate: Option<f64>,
    /// Dimensionless ratio r_D = 2D/(Ω/ħ); alternative to --d-rate.
    #[arg(long, global = true)]
    r_d: Option<f64>,
    /// Comma list of r_D values for multi-curve commands.
    #[arg(long, global = true)]
    rd_list: Option<String>,
    /// Evolution time (with omega_rate = 1 this is t' = t_Ω).
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Site-window half-width, or 'auto'.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Momentum grid size for the spectral engine, or 'auto'.
    #[arg(long, global = true)]
    grid_n: Option<String>,
    /// Phase-space momentum points per axis.
    #[arg(long, global = true)]
    n_k: Option<usize>,
    /// Series / aliasing accuracy target.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Auto-window tail budget.
    #[arg(long, global = true)]
    tail_eps: Option<f64>,
    /// Engine: series | spectral | auto.
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Matrix cache: on | off.
    #[arg(long, global = true)]
    cache: Option<String>,
    /// Memory budget in MiB.
    #[arg(long, global = true)]
    mem_budget_mb: Option<u64>,
    /// Sweep start time.
    #[arg(long, global = true)]
    sweep_start: Option<f64>,
    /// Sweep stop time.
    #[arg(long, global = true)]
    sweep_stop: Option<f64>,
    /// Sweep point count (>= 2).
    #[arg(long, global = true)]
    sweep_points: Option<usize>,
    /// Sweep scale: linear | log.
    #[arg(long, global = true)]
    sweep_scale: Option<String>,
    /// Initial site of particle 1 (pseudo lab).
    #[arg(long, global = true)]
    ic1: Option<i64>,
    /// Initial site of particle 2 (pseudo lab).
    #[arg(long, global = true)]
    ic2: Option<i64>,
    /// Comma list of periodic lattice sizes (operator lab).
    #[arg(long, global = true)]
    lattice_sizes: Option<String>,
    /// Mirror-sum tail budget.
    #[arg(long, global = true)]
    mirror_eps: Option<f64>,
    /// Phase-space slices 'x1:x2;x1:x2' (integers or half-integers).
    #[arg(long, global = true)]
    slices: Option<String>,
    /// Extend validation to the deep-dissipation parameter grid.
    #[arg(long, global = true)]
    deep: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Export the two-body density matrix at one parameter point.
    Rho,
    /// Joint probability profiles over a set of r_D values.
    Profile,
    /// One-body (analytic vs numeric) and two-body block spectra.
    Spectrum,
    /// Purity, entropy, mutual information, coherence and correlation sweeps.
    Observables,
    /// Wigner-function slices on the momentum grid.
    Wigner,
    /// Negative-volume curves of the Wigner function.
    Negvol,
    /// Geometric-discord mirror sweeps.
    Gqd,
    /// Interaction-only pseudo-solution lab.
    Pseudo,
    /// Exact operator-identity lab in Fock space.
    Fock,
    /// Full invariant suite.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rho => "rho",
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Observables => "observables",
            Command::Wigner => "wigner",
            Command::Negvol => "negvol",
            Command::Gqd => "gqd",
            Command::Pseudo => "pseudo",
            Command::Fock => "fock",
            Command::Validate => "validate",
        }
    }
}

fn flag_pairs(cli: &Cli) -> BTreeMap<String, String> {
    let mut pairs = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    put("omega_rate", cli.omega_rate.map(|v| v.to_string()));
    put("d_rate", cli.d_rate.map(|v| v.to_string()));
    put("r_d", cli.r_d.map(|v| v.to_string()));
    put("rd_list", cli.rd_list.clone());
    put("t", cli.t.map(|v| v.to_string()));
    put("window", cli.window.clone());
    put("grid_n", cli.grid_n.clone());
    put("n_k", cli.n_k.map(|v| v.to_string()));
    put("eps", cli.eps.map(|v| v.to_string()));
    put("tail_eps", cli.tail_eps.map(|v| v.to_string()));
    put("engine", cli.engine.clone());
    put("out_dir", cli.out_dir.as_ref().map(|v| v.display().to_string()));
    put("cache", cli.cache.clone());
    put("mem_budget_mb", cli.mem_budget_mb.map(|v| v.to_string()));
    put("sweep_start", cli.sweep_start.map(|v| v.to_string()));
    put("sweep_stop", cli.sweep_stop.map(|v| v.to_string()));
    put("sweep_points", cli.sweep_points.map(|v| v.to_string()));
    put("sweep_scale", cli.sweep_scale.clone());
    put("ic1", cli.ic1.map(|v| v.to_string()));
    put("ic2", cli.ic2.map(|v| v.to_string()));
    put("lattice_sizes", cli.lattice_sizes.clone());
    put("mirror_eps", cli.mirror_eps.map(|v| v.to_string()));
    put("slices", cli.slices.clone());
    if cli.deep {
        pairs.insert("deep".to_string(), "on".to_string());
    }
    pairs
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let file_pairs = read_config_file(path)?;
        apply_pairs(&mut cfg, &file_pairs)?;
    }
    apply_pairs(&mut cfg, &flag_pairs(cli))?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("out dir {}: {e}", cfg.out_dir.display())))?;

    let manifest = match cli.command {
        Command::Rho => commands::cmd_rho(&cfg)?,
        Command::Profile => commands::cmd_profile(&cfg)?,
        Command::Spectrum => commands::cmd_spectrum(&cfg)?,
        Command::Observables => commands::cmd_observables(&cfg)?,
        Command::Wigner => commands::cmd_wigner(&cfg)?,
        Command::Negvol => commands::cmd_negvol(&cfg)?,
        Command::Gqd => commands::cmd_gqd(&cfg)?,
        Command::Pseudo => commands::cmd_pseudo(&cfg)?,
        Command::Fock => commands::cmd_fock(&cfg)?,
        Command::Validate => commands::cmd_validate(&cfg)?,
    };
    for c in &manifest.checks {
        eprintln!(
            "[{}] {} = {:e} (threshold {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    for w in &manifest.warnings {
        eprintln!("[warn] {w}");
    }
    eprintln!(
        "{}: {} artifacts, cache {} hits / {} misses, {:.2}s",
        cli.command.name(),
        manifest.artifacts.len(),
        manifest.cache_hits,
        manifest.cache_misses,
        manifest.wall_time_s
    );
    Ok(manifest.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failure: one or more checks did not pass");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
