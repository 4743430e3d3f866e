use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vic_core::check::{run_checks, CheckOptions};
use vic_core::model::RawParams;
use vic_core::scan::{evolve_scan, probe_scan, pump_scan, ScanResult};
use vic_core::{make_params, parse_config, Error, Preset, ReferenceRate, SystemParams};

/// Pump-probe spectra of a V-type three-level atom with interference
/// between its two decay channels.
#[derive(Debug, Parser)]
#[command(name = "vic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe absorption against probe detuning (default preset fig2a).
    ProbeScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        /// Add a column computed with the interference switched off.
        #[arg(long)]
        compare_no_vic: bool,
        /// Worker threads; 0 uses one per logical CPU.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Pump-only steady state against pump detuning (default preset fig4b).
    PumpScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        /// Worker threads; 0 uses one per logical CPU.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Populations over time starting in the ground state (default preset fig5).
    Evolve {
        #[command(flatten)]
        common: Common,
        /// End of the time window.
        #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
        t_end: f64,
        /// Number of output times.
        #[arg(long, default_value_t = 1001)]
        points: usize,
        /// Use the secular equations in the trap basis instead of the full
        /// master equation.
        #[arg(long)]
        secular: bool,
    },
    /// Compare the numerical solvers with the closed forms (default preset fig2a).
    AnalyticCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_closed_form: f64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` parameter file, applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter preset: fig2a, fig2b, fig3solid, fig3dashdot, fig4a, fig4b, fig5, fig6.
    #[arg(long)]
    preset: Option<Preset>,
    /// Override one parameter, e.g. `--set theta_deg=35`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rate the numbers are quoted in: gamma1 or gamma2.
    #[arg(long)]
    reference: Option<ReferenceRate>,
}

#[derive(Debug, Args)]
struct Range {
    /// Start of the detuning range (default -2G for probe scans, -3G for pump scans).
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// End of the detuning range.
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl Failure {
    fn solver(e: Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::ProbeScan { common, range, compare_no_vic, jobs } => {
            let (params, preset) = resolve(&common, Preset::Fig2a)?;
            let (from, to, n) = grid(&range, params.big_g, 2.0, 1000)?;
            let scan = probe_scan(&params, from, to, n, compare_no_vic, jobs).map_err(Failure::solver)?;
            emit_scan(&common, &scan, &params, preset)
        }
        Command::PumpScan { common, range, jobs } => {
            let (params, preset) = resolve(&common, Preset::Fig4b)?;
            let (from, to, n) = grid(&range, params.big_g, 3.0, 601)?;
            let scan = pump_scan(&params, from, to, n, jobs).map_err(Failure::solver)?;
            emit_scan(&common, &scan, &params, preset)
        }
        Command::Evolve { common, t_end, points, secular } => {
            let (params, preset) = resolve(&common, Preset::Fig5)?;
            if !(t_end > 0.0 && t_end.is_finite()) {
                return Err(Failure::Usage(format!("--t-end must be positive, got {t_end}")));
            }
            if points < 2 {
                return Err(Failure::Usage(format!("--points must be at least 2, got {points}")));
            }
            let scan = evolve_scan(&params, t_end, points, secular).map_err(|e| match e {
                Error::RegimeViolation(_) => Failure::Usage(e.to_string()),
                e => Failure::solver(e),
            })?;
            emit_scan(&common, &scan, &params, preset)
        }
        Command::AnalyticCheck { common, perturb_closed_form } => {
            let (params, _) = resolve(&common, Preset::Fig2a)?;
            let opts = CheckOptions { perturbation: perturb_closed_form };
            let report = run_checks(&params, &opts).map_err(Failure::solver)?;
            let text = format!("# {}\n{report}\n", params.summary());
            write_output(common.out.as_deref(), text.as_bytes())?;
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

/// Preset, then config file, then `--set` overrides.
fn resolve(common: &Common, default: Preset) -> Result<(SystemParams, Preset), Failure> {
    let preset = common.preset.unwrap_or(default);
    let mut raw: RawParams = preset.params().to_raw();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let overrides = parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        raw.extend(overrides);
    }
    for set in &common.sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{set}`")))?;
        raw.insert(key.trim().to_string(), value.trim().to_string());
    }
    let params = make_params(&raw).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((params, preset))
}

fn grid(range: &Range, big_g: f64, span: f64, points: usize) -> Result<(f64, f64, usize), Failure> {
    let half = span * big_g.abs().max(1.0);
    let from = range.from.unwrap_or(-half);
    let to = range.to.unwrap_or(half);
    let n = range.points.unwrap_or(points);
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Failure::Usage(format!("empty range: --from {from} --to {to}")));
    }
    if n < 2 {
        return Err(Failure::Usage(format!("--points must be at least 2, got {n}")));
    }
    Ok((from, to, n))
}

fn emit_scan(common: &Common, scan: &ScanResult, params: &SystemParams, preset: Preset) -> Result<ExitCode, Failure> {
    let units = common.reference.unwrap_or_else(|| preset.reference());
    write_output(common.out.as_deref(), scan.to_csv(params, units).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let result = match out {
        Some(path) => fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => io::stdout().lock().write_all(bytes).map_err(|e| format!("cannot write output: {e}")),
    };
    result.map_err(Failure::Solver)
}
