//! `shearad`: generate signals, run transforms, audit energy identities and
//! export artifacts. Exit status 0 means every reported tolerance passed.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use shearad::{Error, Execution};

use commands::Ctx;
use config::RunConfig;
use report::{ErrorDoc, Report};

const THREADS_VAR: &str = "SHEARLET_RADON_THREADS";

#[derive(Parser, Debug)]
#[command(name = "shearad", version, about = "Shearlet coefficients from affine Radon data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `io.out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Do not print the report to stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sample a corpus signal to `signal.srg`.
    Gen,
    /// Both sinograms of the signal.
    Radon,
    /// Coefficient tensors along the configured route.
    Shearlet,
    /// Radon-route coefficients against the direct transform.
    Compare,
    /// Energy identity with its Plancherel oracles.
    Energy,
    /// Low-pass window and cone partition.
    Window,
    /// Reconstruction from sinograms.
    Synth,
    /// PGM or CSV view of an artifact.
    Export,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Radon => "radon",
            Command::Shearlet => "shearlet",
            Command::Compare => "compare",
            Command::Energy => "energy",
            Command::Window => "window",
            Command::Synth => "synth",
            Command::Export => "export",
        }
    }
}

/// Exit status for a library error: 1 for tolerance breaches, 2 otherwise.
fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::ClampTooDeep { .. } => ("tolerance", 1),
        Error::Io(_) => ("io", 2),
        Error::Json(_) | Error::Format(_) => ("format", 2),
        Error::NonFinite(_) | Error::Divergent(_) => ("numerical", 2),
        _ => ("invalid_input", 2),
    }
}

fn fail(doc: ErrorDoc, code: u8) -> ExitCode {
    println!("{}", doc.to_json());
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR}='{raw}' is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cmd: Command, ctx: &Ctx) -> shearad::Result<Report> {
    match cmd {
        Command::Gen => commands::gen(ctx),
        Command::Radon => commands::radon(ctx),
        Command::Shearlet => commands::shearlet(ctx),
        Command::Compare => commands::compare(ctx),
        Command::Energy => commands::energy(ctx),
        Command::Window => commands::window_cmd(ctx),
        Command::Synth => commands::synth(ctx),
        Command::Export => commands::export(ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(ErrorDoc::new("usage", e.to_string().trim_end()), 2),
    };
    let name = cli.command.name();
    let with_cmd = |mut d: ErrorDoc| {
        d.error.command = Some(name.to_string());
        d
    };
    if let Err(msg) = configure_threads() {
        return fail(with_cmd(ErrorDoc::new("environment", msg)), 2);
    }
    let Some(config_path) = cli.config else {
        return fail(with_cmd(ErrorDoc::new("usage", "--config PATH is required")), 2);
    };
    let mut cfg = match RunConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => return fail(with_cmd(ErrorDoc::new("config", e.to_string())), 2),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.unwrap_or_else(|| cfg.out_dir());
    if let Err(e) = std::fs::create_dir_all(&out) {
        return fail(with_cmd(ErrorDoc::new("io", e.to_string())), 2);
    }
    let ctx = Ctx {
        cfg,
        out,
        exec: Execution::Parallel,
    };

    let start = Instant::now();
    let report = match run(cli.command, &ctx) {
        Ok(r) => r,
        Err(e) => {
            let (kind, code) = classify(&e);
            return fail(with_cmd(ErrorDoc::new(kind, e.to_string())), code);
        }
    };
    eprintln!(
        "{name}: {:.3} s on {} thread(s)",
        start.elapsed().as_secs_f64(),
        rayon::current_num_threads()
    );

    let text = report.to_json();
    let report_path = ctx.out.join(format!("{name}_report.json"));
    if let Err(e) = std::fs::write(&report_path, &text) {
        return fail(with_cmd(ErrorDoc::new("io", e.to_string())), 2);
    }
    if !cli.quiet {
        print!("{text}");
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        let mut doc = with_cmd(ErrorDoc::new("tolerance", "one or more checks failed"));
        doc.error.failed_checks = report.failed().into_iter().map(String::from).collect();
        fail(doc, 1)
    }
}
