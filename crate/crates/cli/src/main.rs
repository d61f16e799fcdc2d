mod args;
mod commands;
mod manifest;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use commands::{execute, UsageError};
use manifest::RunManifest;

const WORKERS_VAR: &str = "TURAN_WORKERS";

fn configure_workers() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().map_err(|_| UsageError(format!("{WORKERS_VAR} must be a number, got {raw:?}")))?;
    // 0 keeps the default of all available cores
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Runs one parsed invocation, writes output and manifest, and returns
/// whether every check held together with the manifest.
fn run(cli: &Cli, argv: Vec<String>) -> Result<(bool, RunManifest, String), UsageError> {
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    let start = Instant::now();
    let output = execute(&cli.command, format)?;
    let mut manifest = RunManifest {
        command: cli.command.name().to_string(),
        params: serde_json::to_value(&cli.command)?,
        format,
        seed: cli.command.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        argv,
        outputs: Vec::new(),
        passed: output.passed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    let path = manifest.write(&cli.out, &output.body)?;
    print!("{}", output.body);
    eprintln!("{}", output.summary);
    eprintln!("wrote {}", path.display());
    Ok((output.passed, manifest, output.body))
}

fn replay(manifest_path: &Path, out: &Path) -> Result<bool, UsageError> {
    let text =
        std::fs::read_to_string(manifest_path).map_err(|e| UsageError(format!("{}: {e}", manifest_path.display())))?;
    let recorded: RunManifest = serde_json::from_str(&text)?;
    let mut argv = recorded.argv.clone();
    argv.extend(["--out".to_string(), out.display().to_string()]);
    let cli = Cli::try_parse_from(&argv)?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(UsageError("a manifest cannot replay another replay".into()));
    }
    let (passed, fresh, body) = run(&cli, recorded.argv.clone())?;
    if fresh.digest() != recorded.digest() {
        eprintln!("manifest parameters differ from the recorded run");
        return Ok(false);
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    for name in &recorded.outputs {
        match std::fs::read_to_string(dir.join(name)) {
            Ok(original) if original == body => eprintln!("reproduced {name}"),
            Ok(_) => {
                eprintln!("output differs from {name}");
                return Ok(false);
            }
            Err(e) => eprintln!("cannot compare with {name}: {e}"),
        }
    }
    Ok(passed)
}

/// Argument vector as recorded in manifests: program name normalized and
/// `--out` dropped, since the output directory does not affect results.
fn recorded_argv(argv: &[String]) -> Vec<String> {
    let mut out = vec!["turan-gaps".to_string()];
    let mut rest = argv.iter().skip(1);
    while let Some(arg) = rest.next() {
        if arg == "--out" {
            rest.next();
        } else if !arg.starts_with("--out=") {
            out.push(arg.clone());
        }
    }
    out
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_workers().and_then(|()| match &cli.command {
        Command::Replay { manifest } => replay(manifest, &cli.out),
        _ => run(&cli, recorded_argv(&argv)).map(|(passed, _, _)| passed),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
