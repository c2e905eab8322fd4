//! Argument layout. Every configuration key is also a `--key` flag.

use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands::{self, CliError};
use crate::config::{parse_pairs, split_token, ConfigError, RunConfig, KEYS};

fn with_keys(cmd: Command) -> Command {
    let cmd = cmd
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("FILE")
                .help("key=value file; flags override it"),
        )
        .arg(
            Arg::new("pairs")
                .value_name("KEY=VALUE")
                .num_args(0..)
                .action(ArgAction::Append)
                .help("settings given inline, same keys as the flags"),
        );
    KEYS.iter().fold(cmd, |cmd, &(key, default, help)| {
        cmd.arg(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .help(format!("{help} [default: {default}]")),
        )
    })
}

pub fn build() -> Command {
    Command::new("rdfilter")
        .about("Filtered explicit solver for stiff reaction-diffusion experiments")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(with_keys(Command::new("run").about("one run, one CSV row")))
        .subcommand(with_keys(Command::new("sweep").about("accuracy over grid sizes, ratios and shifts")))
        .subcommand(with_keys(Command::new("dd").about("largest stable ratio for each overlap")))
        .subcommand(Command::new("selftest").about("quick invariant checks"))
}

/// Collects the configuration of a subcommand: file, then inline pairs,
/// then flags.
pub fn config_from(m: &ArgMatches) -> Result<RunConfig, ConfigError> {
    let file = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let mut cli = Vec::new();
    if let Some(pairs) = m.get_many::<String>("pairs") {
        for p in pairs {
            cli.push(split_token(p)?);
        }
    }
    for &(key, _, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cli.push((key.to_string(), v.clone()));
        }
    }
    RunConfig::from_sources(file, cli)
}

/// Runs the parsed command line and maps the outcome to an exit code:
/// 0 success, 1 configuration error, 2 numerical failure.
pub fn execute(m: &ArgMatches) -> ExitCode {
    let (name, sub) = m.subcommand().expect("subcommand required");
    if name == "selftest" {
        let checks = commands::selftest();
        for c in &checks {
            println!("{:<40} {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
        }
        return if checks.iter().all(|c| c.passed) {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        };
    }
    let outcome = config_from(sub).map_err(CliError::from).and_then(|cfg| match name {
        "run" => commands::run(&cfg),
        "sweep" => commands::sweep(&cfg),
        "dd" => commands::dd(&cfg),
        _ => unreachable!("unknown subcommand {name}"),
    });
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
