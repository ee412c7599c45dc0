mod commands;
mod config;
mod error;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

use config::{flag_name, RunConfig, KEYS};
use error::{CliError, EXIT_INVALID};
use output::{Report, Sink};

fn cli() -> Command {
    let mut cmd = Command::new("kw")
        .about("Prescribed Gauduchon scalar curvature on flat tori")
        .arg(
            Arg::new("command")
                .required(true)
                .value_parser(clap::builder::PossibleValuesParser::new(commands::COMMANDS)),
        )
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key = value file; flags override its entries"),
        );
    for (key, help) in KEYS {
        cmd = cmd.arg(
            Arg::new(*key)
                .long(&*flag_name(key).leak())
                .action(ArgAction::Set)
                .allow_hyphen_values(true)
                .help(*help),
        );
    }
    cmd
}

fn config(matches: &clap::ArgMatches) -> Result<RunConfig, CliError> {
    let mut cfg = match matches.get_one::<String>("config") {
        Some(path) => RunConfig::load(Path::new(path))?,
        None => RunConfig::default(),
    };
    for (key, _) in KEYS {
        if let Some(value) = matches.get_one::<String>(key) {
            cfg.set(key, value.clone());
        }
    }
    Ok(cfg)
}

fn fail(report: &mut Report, err: &CliError) -> i32 {
    let code = err.exit_code();
    report.put("status", "error");
    report.put("error", err);
    if let Some(offset) = err.offset() {
        report.put("error_offset", offset);
        eprintln!("error at byte {offset}: {err}");
    } else {
        eprintln!("error: {err}");
    }
    code
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let command = matches.get_one::<String>("command").expect("required");
    let mut report = Report::default();
    report.put("command", command);

    let cfg = match config(&matches) {
        Ok(cfg) => cfg,
        Err(e) => {
            fail(&mut report, &e);
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    for (key, value) in cfg.entries() {
        report.put(&format!("config.{key}"), value);
    }
    let sink = match Sink::new(cfg.out_dir(), cfg.bool_or("heatmap", true).unwrap_or(true)) {
        Ok(sink) => sink,
        Err(e) => {
            fail(&mut report, &e);
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };

    let code = match commands::run(command, &cfg, &sink, &mut report) {
        Ok(code) => code,
        Err(e) => fail(&mut report, &e),
    };
    report.put("exit_code", code);
    if let Err(e) = sink.report(&report) {
        eprintln!("error: {e}");
    }
    ExitCode::from(code as u8)
}
