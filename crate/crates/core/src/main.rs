use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use talbot_core::config::{self, RunConfig, SweepKind};
use talbot_core::keyvalue::format_number;
use talbot_core::scan::{fit_scan, ScanRecord};
use talbot_core::sweep::{self, Table};
use talbot_core::{Error, Result};

/// Near-field molecule interferometry: visibilities, sweeps and fringe scans.
#[derive(Parser)]
#[command(name = "talbot", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration file; built-in defaults apply without one.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set laser.power_W=6`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random seed for synthetic data; takes precedence over `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Velocity-averaged visibility at the configured working point.
    Visibility,
    /// Run the configured parameter sweep.
    Sweep {
        /// Sweep kind; must agree with `sweep.kind` when both are given.
        kind: Option<Kind>,
    },
    /// Simulate or fit fringe scans.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Inspect the molecule catalog.
    #[command(subcommand)]
    Molecules(MoleculeCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Wavelength,
    Power,
    Velocity,
}

#[derive(Subcommand)]
enum ScanCommand {
    /// Poisson counts along a lateral scan of the third grating.
    Simulate,
    /// Fit a sinusoid to a recorded scan.
    Fit {
        /// Scan CSV; defaults to `scan.input`.
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MoleculeCommand {
    /// Built-in species plus any from `molecule.catalog`.
    List,
}

fn load(global: &Global) -> Result<RunConfig> {
    match &global.config {
        Some(path) => config::load_config(path, &global.overrides),
        None => config::parse_config_with("", &global.overrides, None),
    }
}

fn deliver(text: &str, target: Option<&Path>) -> Result<()> {
    match target {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn molecule_table(cfg: &RunConfig) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "mass_amu", "alpha_A3", "sigma_abs_m2", "note"])
        .expect("in-memory write");
    for m in cfg.catalog.iter() {
        let alpha = m.polarizability_a3.map(format_number).unwrap_or_default();
        w.write_record([
            m.name.clone(),
            format_number(m.mass_amu),
            alpha,
            format_number(m.absorption_cross_section),
            m.note.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn fit_table(record: &ScanRecord, cfg: &RunConfig) -> Result<Table> {
    let period = cfg.geometry(cfg.arrangement)?.period();
    let fit = fit_scan(record, period)?;
    let mut t = Table::new(&[
        "offset_counts",
        "amplitude_counts",
        "phase_rad",
        "visibility",
        "sigma_visibility",
        "reduced_chi_square",
    ]);
    t.rows.push(vec![
        fit.offset,
        fit.amplitude,
        fit.phase,
        fit.visibility,
        fit.sigma_visibility,
        fit.reduced_chi_square,
    ]);
    Ok(t)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.jobs {
        if n == 0 {
            return Err(Error::Config {
                key: "--jobs".into(),
                message: "must be at least 1".into(),
            });
        }
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load(&cli.global)?;
    let output = cli.global.output.as_deref().or(cfg.output.as_deref());
    match cli.command {
        Command::Visibility => {
            let t = sweep::visibility_point(&cfg)?;
            deliver(&sweep::emit_csv(&t, &cfg, None), output)
        }
        Command::Sweep { kind } => {
            if let (Some(k), Some(spec)) = (kind, cfg.sweep) {
                let wanted = match k {
                    Kind::Wavelength => SweepKind::Wavelength,
                    Kind::Power => SweepKind::Power,
                    Kind::Velocity => SweepKind::Velocity,
                };
                if wanted != spec.kind {
                    return Err(Error::Config {
                        key: "sweep.kind".into(),
                        message: format!("configured as `{}`, command asks for `{wanted}`", spec.kind),
                    });
                }
            }
            let t = sweep::run_sweep(&cfg)?;
            deliver(&sweep::emit_csv(&t, &cfg, None), output)
        }
        Command::Scan(ScanCommand::Simulate) => {
            let seed = cli.global.seed.or(cfg.seed).unwrap_or(0);
            let record = sweep::simulate_scan(&cfg, seed)?;
            let text = sweep::metadata(&cfg, None) + &record.to_csv_string();
            deliver(&text, output)
        }
        Command::Scan(ScanCommand::Fit { file }) => {
            let path = file.or_else(|| cfg.scan_input.clone()).ok_or_else(|| Error::Config {
                key: "scan.input".into(),
                message: "no scan file given".into(),
            })?;
            let record = ScanRecord::read_csv(&path)?;
            let t = fit_table(&record, &cfg)?;
            deliver(&sweep::emit_csv(&t, &cfg, record.rng_seed), output)
        }
        Command::Molecules(MoleculeCommand::List) => deliver(&molecule_table(&cfg), output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
