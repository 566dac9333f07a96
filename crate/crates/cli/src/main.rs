//! `servokit` command line: closed-loop servo runs, viewpoint scans and
//! Jacobian validation.
//!
//! Exit codes: 0 success, 1 configuration / usage error, 2 numerical
//! abort (persistently ill-conditioned solve). Set `SERVOKIT_LOG` (e.g.
//! `debug`) for diagnostics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use servokit_core::servo::JacobianVariant;
use servokit_core::{
    build_jacobian, check_jacobian_finite_difference, run_closed_loop, run_scan, RunConfig,
    ScanConfig, Vec3,
};

#[derive(Parser)]
#[command(name = "servokit", version, about = "Feature-based visual servoing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-loop servo simulation and write the trajectory CSV.
    Servo {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV output path (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sensor RNG seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Scan the viewpoint lattice and write the detection map CSV plus a
    /// summary sidecar.
    Scan {
        /// Scan configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Scan CSV output path (a `.summary.txt` sidecar is written
        /// alongside).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate the analytic Jacobian against central finite differences.
    CheckJacobian {
        #[arg(long, default_value = "corrected", value_parser = parse_variant)]
        variant: JacobianVariant,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_variant(s: &str) -> Result<JacobianVariant, String> {
    s.parse()
}

const FD_TOLERANCE: f64 = 1e-6;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SERVOKIT_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 }; // help/version exit 0
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Servo { config, out, seed } => cmd_servo(&config, out, seed),
        Command::Scan { config, out } => cmd_scan(&config, out),
        Command::CheckJacobian { variant, trials, seed } => cmd_check_jacobian(variant, trials, seed),
    }
}

fn cmd_servo(config_path: &PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> ExitCode {
    let mut config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("servokit: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let out_path = match out.or_else(|| config.out.clone().map(PathBuf::from)) {
        Some(p) => p,
        None => {
            eprintln!("servokit: no output path (pass --out or set `out` in [run])");
            return ExitCode::from(1);
        }
    };

    let log = match run_closed_loop(
        config.initial_state(),
        &config.goal(),
        &config.limits(),
        config.sensor(),
        config.duration,
        config.servo_start,
        config.variant,
    ) {
        Ok(log) => log,
        Err(abort) => {
            eprintln!("servokit: {abort}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = std::fs::write(&out_path, log.to_csv()) {
        eprintln!("servokit: failed to write {}: {e}", out_path.display());
        return ExitCode::from(1);
    }
    let last = log.records.last().expect("non-empty run");
    println!(
        "servo: {} steps, final max |e| = {:.3e} m, trajectory written to {}",
        log.records.len(),
        last.error.max_abs(),
        out_path.display()
    );
    ExitCode::SUCCESS
}

fn cmd_scan(config_path: &PathBuf, out: Option<PathBuf>) -> ExitCode {
    let config = match ScanConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("servokit: {e}");
            return ExitCode::from(1);
        }
    };
    let out_path = match out.or_else(|| config.out.clone().map(PathBuf::from)) {
        Some(p) => p,
        None => {
            eprintln!("servokit: no output path (pass --out or set `out` in [run])");
            return ExitCode::from(1);
        }
    };

    let report = match run_scan(&config.grid(), &config.oracle(), &config.hole_in_world()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("servokit: {e}");
            return ExitCode::from(1);
        }
    };

    if let Err(e) = std::fs::write(&out_path, report.to_csv()) {
        eprintln!("servokit: failed to write {}: {e}", out_path.display());
        return ExitCode::from(1);
    }
    let summary_path = out_path.with_extension("summary.txt");
    if let Err(e) = std::fs::write(&summary_path, report.summary_text()) {
        eprintln!("servokit: failed to write {}: {e}", summary_path.display());
        return ExitCode::from(1);
    }
    println!(
        "scan: {} viewpoints, {} found; map in {}, summary in {}",
        report.results.len(),
        report.found_count,
        out_path.display(),
        summary_path.display()
    );
    ExitCode::SUCCESS
}

fn cmd_check_jacobian(variant: JacobianVariant, trials: usize, seed: u64) -> ExitCode {
    if trials == 0 {
        println!("check-jacobian: 0 trials requested, vacuous pass");
        log::warn!("check-jacobian called with trials = 0");
        return ExitCode::SUCCESS;
    }
    let report = check_jacobian_finite_difference(variant, trials, seed);
    println!(
        "check-jacobian ({}): {} trials, max relative deviation {:.3e}",
        variant.as_str(),
        report.trials,
        report.max_deviation
    );
    if report.near_singular > 0 {
        println!(
            "check-jacobian: {} near-singular configurations encountered",
            report.near_singular
        );
    }
    if variant == JacobianVariant::AsPrinted {
        // The printed c column degenerates exactly at the aligned
        // configuration; report it so the variant's hazard is visible.
        let aligned = build_jacobian(
            &Vec3::zeros(),
            &Vec3::new(0.0, 0.0, 0.1),
            JacobianVariant::AsPrinted,
        );
        println!(
            "check-jacobian: as_printed at the aligned configuration: |det| = {:.3e} (singular)",
            aligned.determinant().abs()
        );
    }
    if report.passes(FD_TOLERANCE) {
        println!("check-jacobian: PASS (tolerance {FD_TOLERANCE:.1e})");
        ExitCode::SUCCESS
    } else {
        println!("check-jacobian: FAIL (tolerance {FD_TOLERANCE:.1e})");
        ExitCode::from(1)
    }
}
