use clap::{Parser, Subcommand};
use dimer_qpt::config::RunConfig;
use dimer_qpt::runner::{ascii_preview, cmd_invert, cmd_roundtrip, cmd_simulate, cmd_stability};
use dimer_qpt::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const THREADS_ENV: &str = "DIMER_QPT_THREADS";

#[derive(Parser)]
#[command(name = "dimer-qpt", version, about = "2D electronic spectra and process tomography for an excitonic dimer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-simulate spectra, peak amplitudes and the reference process matrix.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write the manifest only.
        #[arg(long)]
        dry_run: bool,
        /// Print an ASCII map of the first spectrum.
        #[arg(long)]
        preview: bool,
    },
    /// Fit spectra in a directory and reconstruct the process matrix.
    Invert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Condition number of the inversion over a range of dipole angles (radians).
    Stability {
        #[arg(long, allow_hyphen_values = true)]
        phi_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi_max: f64,
        #[arg(long)]
        steps: usize,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate, invert and compare against the reference in one go.
    Roundtrip {
        #[arg(long)]
        config: PathBuf,
        /// Also write the JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::Stage { source, .. } => exit_code(source),
        _ => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Error::Config(format!("{THREADS_ENV} must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, Error> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config, out, dry_run, preview } => {
            let cfg = RunConfig::load(&config)?;
            let sim = cmd_simulate(&cfg, &out, dry_run)?;
            match sim {
                None => println!("manifest written to {}", out.join("manifest.json").display()),
                Some(sim) => {
                    for w in &sim.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("{} spectra written to {}", sim.spectra.len(), out.display());
                    if preview {
                        if let Some(s) = sim.spectra.first() {
                            println!("|S| at T = {} fs ({}), omega_t across, omega_tau up", s.waiting_time, s.config);
                            print!("{}", ascii_preview(s, 64, 24));
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Invert { input, out } => {
            let report = cmd_invert(&input, &out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "phi = {:.4} deg, kappa = {:.4}{}, root spread {:.2e}",
                report.angle.phi_deg(),
                report.chi.kappa,
                if report.chi.low_confidence { " (low confidence)" } else { "" },
                report.angle.spread
            );
            Ok(0)
        }
        Command::Stability { phi_min, phi_max, steps, out } => {
            let table = cmd_stability(phi_min, phi_max, steps)?;
            match out {
                Some(p) => std::fs::write(p, table)?,
                None => print!("{table}"),
            }
            Ok(0)
        }
        Command::Roundtrip { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let summary = cmd_roundtrip(&cfg)?;
            let text = serde_json::to_string_pretty(&summary)?;
            if let Some(p) = out {
                std::fs::write(p, &text)?;
            }
            println!("{text}");
            for c in &summary.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if summary.passed() { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
