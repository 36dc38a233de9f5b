//! Command-line entry point:
//! `momentlab <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]`.

use momentlab::config::{parse_config, SUBCOMMANDS};
use momentlab::run::run;
use std::path::PathBuf;
use std::process::ExitCode;

struct Args {
    subcommand: String,
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    threads: usize,
}

const USAGE: &str =
    "usage: momentlab <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]";

fn parse_args(argv: &[String]) -> Result<Args, String> {
    let mut it = argv.iter();
    let subcommand = it
        .next()
        .ok_or_else(|| format!("{USAGE}\nsubcommands: {}", SUBCOMMANDS.join(", ")))?
        .clone();
    if !SUBCOMMANDS.contains(&subcommand.as_str()) {
        return Err(format!(
            "unknown subcommand `{subcommand}`; valid subcommands: {}",
            SUBCOMMANDS.join(", ")
        ));
    }
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut seed = None;
    let mut threads = 1usize;
    while let Some(flag) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {name} requires a value"))
        };
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(value("--config")?)),
            "--out" => out = PathBuf::from(value("--out")?),
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| "flag --seed requires an unsigned integer".to_string())?,
                )
            }
            "--threads" => {
                threads = value("--threads")?
                    .parse()
                    .map_err(|_| "flag --threads requires a positive integer".to_string())?;
                if threads == 0 {
                    return Err("flag --threads requires a positive integer".into());
                }
            }
            other => return Err(format!("unknown flag `{other}`\n{USAGE}")),
        }
    }
    let config = config.ok_or_else(|| format!("missing required flag --config\n{USAGE}"))?;
    Ok(Args {
        subcommand,
        config,
        out,
        seed,
        threads,
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let _ = args.threads; // single-process; accepted for interface stability

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(from_config) = config.subcommand.as_deref() {
        if from_config != args.subcommand {
            eprintln!(
                "error: config requests subcommand `{from_config}` but `{}` was given",
                args.subcommand
            );
            return ExitCode::from(2);
        }
    }
    if let Some(seed) = args.seed {
        config.cascade.seed = seed;
    }

    match run(&config, &args.subcommand, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
