mod args;
mod commands;
mod output;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use output::{out_dir_from_argv, Manifest};

const SEED_ENV: &str = "DTLAB_SEED";

fn resolve_seed(flag: Option<u64>) -> Result<(u64, &'static str), String> {
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        _ => Ok(flag.map_or((dtlab::DEFAULT_SEED, "default"), |s| (s, "flag"))),
    }
}

fn fail(mut manifest: Manifest, dir: &Path, msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    manifest.error = Some(msg);
    if let Err(e) = manifest.write(dir) {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let mut manifest = Manifest::new(argv.clone());
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let dir = out_dir_from_argv(&argv);
            let msg = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            return fail(manifest, Path::new(&dir), msg);
        }
    };
    manifest.command = cli.command.name().to_string();
    manifest.config = serde_json::to_value(&cli).unwrap_or_default();
    let (seed, source) = match resolve_seed(cli.seed) {
        Ok(s) => s,
        Err(msg) => return fail(manifest, &cli.out, msg),
    };
    manifest.seed = seed;
    manifest.seed_source = source;

    let outcome = match catch_unwind(AssertUnwindSafe(|| commands::run(&cli, seed))) {
        Ok(Ok(outcome)) => outcome,
        Ok(Err(e)) => return fail(manifest, &cli.out, format!("{e:#}")),
        Err(_) => return fail(manifest, &cli.out, "internal error (panic)".into()),
    };
    if let Err(e) = outcome.bundle.write(&cli.out) {
        return fail(manifest, &cli.out, format!("{e:#}"));
    }
    let warned = !outcome.bundle.warnings.is_empty();
    manifest.outputs = outcome.bundle.names();
    manifest.warnings = outcome.bundle.warnings.clone();
    manifest.status = if warned { "warnings" } else { "ok" };
    manifest.exit_code = if warned { 2 } else { 0 };
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    print!("{}", outcome.stdout);
    for n in &outcome.notes {
        eprintln!("note: {n}");
    }
    for w in &outcome.bundle.warnings {
        eprintln!("warning: {w}");
    }
    ExitCode::from(manifest.exit_code)
}
