//! `anv`: batch runner for the experiments of `anv-core`.
//!
//! ```text
//! anv [--config PATH] [--seed U64] [--out PATH] [--format csv|json|svg] [--tolerance FLOAT] COMMAND [KEY=VALUE ...]
//! ```
//!
//! Settings are layered: command defaults, then the config file, then `KEY=VALUE`
//! arguments and flags. Exit status is 0 when every embedded check passes, 1 on a
//! failed check or a numerical failure (a JSON record goes to stderr), 2 on a
//! configuration error.

mod commands;
mod config;
mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde_json::{json, Map, Value};

use commands::{Command, Ctx, RunError, COMMANDS};
use config::{config_hash, parse_assignment, read_config_file, ConfigError, Format, Params};
use report::{render_csv, render_json, render_svg, Header};

#[derive(Parser, Debug)]
#[command(name = "anv", version, about = "Reproducible experiments on archimedean newvectors")]
struct Cli {
    /// Flat key=value config file; command-line values take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for the random streams.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json", "svg"])]
    format: Option<String>,
    /// Overrides the limit of the command's main check.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Print the parameters of the command with their defaults and exit.
    #[arg(long)]
    list_params: bool,
    /// Command name followed by KEY=VALUE parameter overrides.
    #[arg(value_name = "COMMAND [KEY=VALUE]...")]
    args: Vec<String>,
}

const CONFIG_ERROR: u8 = 2;
const ASSERTION_FAILURE: u8 = 1;

fn command_list() -> String {
    let mut s = String::from("Commands:\n");
    for c in COMMANDS {
        s.push_str(&format!("  {:<22}{}\n", c.name, c.about));
    }
    s.push_str("\nRun `anv --list-params COMMAND` to see the parameters of a command.");
    s
}

fn emit_record(record: Value) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", serde_json::to_string(&record).expect("record serializes"));
}

fn config_failure(e: &ConfigError) -> ExitCode {
    emit_record(json!({"status": "config_error", "error": e.0}));
    ExitCode::from(CONFIG_ERROR)
}

/// Everything needed to run one command, after layering all sources.
struct Resolved {
    command: &'static Command,
    params: Params,
    seed: u64,
    tolerance: f64,
    format: Format,
    out: Option<PathBuf>,
}

fn resolve(cli: &Cli) -> Result<Resolved, ConfigError> {
    let mut settings = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let mut positional = cli.args.iter().peekable();
    let mut name = None;
    if let Some(first) = positional.peek() {
        if !first.contains('=') {
            name = positional.next().cloned();
        }
    }
    for arg in positional {
        let (k, v) = parse_assignment(arg)?;
        settings.insert(k, v);
    }
    let name = name
        .or_else(|| settings.get("command").cloned())
        .ok_or_else(|| ConfigError(format!("no command given\n\n{}", command_list())))?;
    let command = commands::find(&name).ok_or_else(|| ConfigError(format!("unknown command {name:?}\n\n{}", command_list())))?;

    let seed = match (cli.seed, settings.get("seed")) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse().map_err(|_| ConfigError(format!("seed: expected an unsigned integer, got {s:?}")))?,
        (None, None) => command.seed,
    };
    let tolerance = match (cli.tolerance, settings.get("tolerance")) {
        (Some(t), _) => t,
        (None, Some(t)) => t.parse().map_err(|_| ConfigError(format!("tolerance: expected a number, got {t:?}")))?,
        (None, None) => command.tolerance,
    };
    if !tolerance.is_finite() {
        return Err(ConfigError("tolerance must be finite".into()));
    }
    let format = match (&cli.format, settings.get("format")) {
        (Some(f), _) => Format::parse(f)?,
        (None, Some(f)) => Format::parse(f)?,
        (None, None) => command.format,
    };
    let out = cli.out.clone().or_else(|| settings.get("out").map(PathBuf::from));
    let params = Params::resolve(command.params, &settings)?;
    Ok(Resolved { command, params, seed, tolerance, format, out })
}

fn list_params(command: &Command) -> String {
    let mut s = format!("{}: {}\n\n", command.name, command.about);
    for p in command.params {
        s.push_str(&format!("  {:<20}default {:<28} {}\n", p.key, format!("{:?}", p.default), p.help));
    }
    s.push_str(&format!(
        "\n  seed default {}; tolerance default {:e} ({}); format default {}\n",
        command.seed,
        command.tolerance,
        command.tolerance_help,
        command.format.as_str()
    ));
    s
}

fn is_input_error(e: &anv_core::Error) -> bool {
    use anv_core::Error as E;
    matches!(e, E::Precondition(_) | E::Domain(_) | E::Pole { .. } | E::PoleProximity { .. })
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(command_list()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let r = match resolve(&cli) {
        Ok(r) => r,
        Err(e) => return config_failure(&e),
    };
    if cli.list_params {
        print!("{}", list_params(r.command));
        return ExitCode::SUCCESS;
    }
    let hash = config_hash(r.command.name, r.seed, r.tolerance, r.format, &r.params);
    let header = Header {
        command: r.command.name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: r.seed,
        config_sha256: hash.clone(),
    };
    let ctx = Ctx { params: &r.params, seed: r.seed, tolerance: r.tolerance };
    let base = json!({"command": r.command.name, "config_sha256": hash, "seed": r.seed});
    let with_base = |extra: Value| {
        let mut m = base.as_object().cloned().unwrap_or_default();
        m.extend(extra.as_object().cloned().unwrap_or_default());
        Value::Object(m)
    };
    let report = match (r.command.run)(&ctx) {
        Ok(rep) => rep,
        Err(RunError::Config(e)) => return config_failure(&e),
        Err(RunError::Compute(e)) if is_input_error(&e) => {
            emit_record(with_base(json!({"status": "config_error", "error": e.to_string()})));
            return ExitCode::from(CONFIG_ERROR);
        }
        Err(RunError::Compute(e)) => {
            emit_record(with_base(json!({"status": "error", "error": e.to_string()})));
            return ExitCode::from(ASSERTION_FAILURE);
        }
    };

    let mut params: Map<String, Value> = r.params.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
    params.insert("tolerance".into(), json!(r.tolerance));
    params.insert("format".into(), json!(r.format.as_str()));
    let body = match r.format {
        Format::Json => render_json(&header, &params, &report),
        Format::Csv => render_csv(&header, &report),
        Format::Svg => render_svg(&header, &report),
    };
    let written = match &r.out {
        Some(path) => std::fs::write(path, body.as_bytes()).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return config_failure(&ConfigError(e));
    }

    let failed = report.failed();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        let checks: Vec<Value> = failed.iter().map(|c| c.to_json()).collect();
        emit_record(with_base(json!({"status": "assertion_failure", "failed": checks})));
        ExitCode::from(ASSERTION_FAILURE)
    }
}
