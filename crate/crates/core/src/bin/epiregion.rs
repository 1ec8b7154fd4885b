//! Command-line front end: scenario-driven runs with deterministic,
//! hash-recorded outputs.

use clap::{Args, Parser, Subcommand};
use epiregion::control::{CertifyMode, DomainFlag};
use epiregion::runner::{self, EigenMethodChoice, RunOutput};
use epiregion::scenario::{
    exit_code_for, pinned_threads, sha256_hex, OutputEntry, RunRecord, Scenario,
};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "epiregion",
    version,
    about = "Simulation and regional-control toolkit for nonlocal reaction-diffusion epidemic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario file; repeat the flag to sweep several scenarios.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    /// Output directory (one subdirectory per scenario for sweeps).
    #[arg(long)]
    out: PathBuf,
    /// Parallel scenario count for sweeps; defaults to EPIREGION_THREADS.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured model and export the trajectory
    Simulate(RunArgs),
    /// Principal eigenvalue of the feedback operator
    Eigen {
        #[command(flatten)]
        run: RunArgs,
        /// direct | logistic | both
        #[arg(long, default_value = "direct")]
        method: String,
    },
    /// Stabilizability certificate for the configured region and gain
    Certify {
        #[command(flatten)]
        run: RunArgs,
        /// homogeneous | periodic
        #[arg(long, default_value = "homogeneous")]
        mode: String,
    },
    /// Improve the region position by translations
    OptimizeRegion {
        #[command(flatten)]
        run: RunArgs,
        /// whole | region
        #[arg(long = "domain-flag", default_value = "whole")]
        domain_flag: String,
    },
    /// Cross-validate the eigenvalue routes on one scenario
    CompareEigen(RunArgs),
    /// Merge run records into a summary CSV
    Report {
        /// Run directories or run_record.json paths.
        #[arg(required = true)]
        records: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fail(kind: &str, message: &str, code: i32) -> i32 {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": kind, "message": message, "exit": code } })
    );
    code
}

fn parse_mode(s: &str) -> Result<CertifyMode, String> {
    match s {
        "homogeneous" => Ok(CertifyMode::Homogeneous),
        "periodic" => Ok(CertifyMode::Periodic),
        other => Err(format!("unknown mode '{other}'; use homogeneous|periodic")),
    }
}

fn parse_flag(s: &str) -> Result<DomainFlag, String> {
    match s {
        "whole" => Ok(DomainFlag::Whole),
        "region" => Ok(DomainFlag::RegionOnly),
        other => Err(format!("unknown domain flag '{other}'; use whole|region")),
    }
}

fn write_outputs(
    out_dir: &Path,
    output: &RunOutput,
    digest: String,
    command: &str,
    wall_ms: u64,
) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut entries = Vec::new();
    for artifact in &output.artifacts {
        std::fs::write(out_dir.join(&artifact.name), &artifact.contents)?;
        entries.push(OutputEntry {
            path: artifact.name.clone(),
            sha256: sha256_hex(&artifact.contents),
        });
    }
    let record = RunRecord {
        scenario_digest: digest,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        outputs: entries,
        wall_ms,
        step_count: output.step_count,
        threads: pinned_threads(),
    };
    std::fs::write(
        out_dir.join("run_record.json"),
        serde_json::to_string_pretty(&record).expect("record serializes"),
    )
}

fn run_one(
    path: &Path,
    out_dir: &Path,
    command: &str,
    method: EigenMethodChoice,
    mode: CertifyMode,
    flag: DomainFlag,
) -> i32 {
    let started = Instant::now();
    let (scenario, built) = match Scenario::load(path) {
        Ok(pair) => pair,
        Err(e) => return fail("validation", &format!("{}: {e}", path.display()), 2),
    };
    match runner::run_subcommand(&scenario, &built, command, method, mode, flag) {
        Ok(output) => {
            let wall_ms = started.elapsed().as_millis() as u64;
            match write_outputs(out_dir, &output, scenario.digest(), command, wall_ms) {
                Ok(()) => {
                    println!(
                        "{command}: wrote {} file(s) to {}",
                        output.artifacts.len() + 1,
                        out_dir.display()
                    );
                    0
                }
                Err(e) => fail("io", &format!("{}: {e}", out_dir.display()), 3),
            }
        }
        Err(e) => {
            let code = exit_code_for(&e);
            let kind = if code == 2 { "validation" } else { "numerical" };
            fail(kind, &format!("{}: {e}", path.display()), code)
        }
    }
}

fn run_sweep(
    run: &RunArgs,
    command: &str,
    method: EigenMethodChoice,
    mode: CertifyMode,
    flag: DomainFlag,
) -> i32 {
    let jobs = run.jobs.unwrap_or_else(pinned_threads).max(1);
    let single = run.scenario.len() == 1;
    let tasks: Vec<(PathBuf, PathBuf)> = run
        .scenario
        .iter()
        .map(|path| {
            let out = if single {
                run.out.clone()
            } else {
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "scenario".into());
                run.out.join(stem)
            };
            (path.clone(), out)
        })
        .collect();

    if jobs == 1 || single {
        let mut worst = 0;
        for (path, out) in &tasks {
            worst = worst.max(run_one(path, out, command, method, mode, flag));
        }
        return worst;
    }

    let worst = std::sync::atomic::AtomicI32::new(0);
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(tasks.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if index >= tasks.len() {
                    break;
                }
                let (path, out) = &tasks[index];
                let code = run_one(path, out, command, method, mode, flag);
                worst.fetch_max(code, std::sync::atomic::Ordering::SeqCst);
            });
        }
    });
    worst.into_inner()
}

fn run_report(records: &[PathBuf], out: &Path) -> i32 {
    let mut parsed = Vec::new();
    for path in records {
        let file = if path.is_dir() {
            path.join("run_record.json")
        } else {
            path.clone()
        };
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => return fail("io", &format!("{}: {e}", file.display()), 2),
        };
        let record: RunRecord = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => return fail("validation", &format!("{}: {e}", file.display()), 2),
        };
        parsed.push((file.display().to_string(), record));
    }
    let csv = runner::run_report(&parsed);
    if let Err(e) = std::fs::create_dir_all(out) {
        return fail("io", &format!("{}: {e}", out.display()), 3);
    }
    let target = out.join("summary.csv");
    match std::fs::write(&target, csv) {
        Ok(()) => {
            println!("report: wrote {}", target.display());
            0
        }
        Err(e) => fail("io", &format!("{}: {e}", target.display()), 3),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(run) => run_sweep(
            run,
            "simulate",
            EigenMethodChoice::Direct,
            CertifyMode::Homogeneous,
            DomainFlag::Whole,
        ),
        Command::Eigen { run, method } => match method.parse() {
            Ok(m) => run_sweep(run, "eigen", m, CertifyMode::Homogeneous, DomainFlag::Whole),
            Err(e) => fail("validation", &e, 2),
        },
        Command::Certify { run, mode } => match parse_mode(mode) {
            Ok(m) => run_sweep(run, "certify", EigenMethodChoice::Direct, m, DomainFlag::Whole),
            Err(e) => fail("validation", &e, 2),
        },
        Command::OptimizeRegion { run, domain_flag } => match parse_flag(domain_flag) {
            Ok(f) => run_sweep(
                run,
                "optimize-region",
                EigenMethodChoice::Direct,
                CertifyMode::Homogeneous,
                f,
            ),
            Err(e) => fail("validation", &e, 2),
        },
        Command::CompareEigen(run) => run_sweep(
            run,
            "compare-eigen",
            EigenMethodChoice::Both,
            CertifyMode::Homogeneous,
            DomainFlag::Whole,
        ),
        Command::Report { records, out } => run_report(records, out),
    };
    std::process::exit(code);
}
