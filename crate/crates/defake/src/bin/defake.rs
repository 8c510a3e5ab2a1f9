//! Thin CLI over [`defake::execution`]: `run` a YAML config (with optional
//! `--set key=value` overrides) or print the `defaults` for a model.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 training
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_yaml::{Mapping, Value};

use defake::execution::{default_params, run_with_overrides, ExecError};

#[derive(Parser)]
#[command(name = "defake", about = "Train fake-news detection models from YAML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train (and test) a model described by a YAML config.
    Run {
        /// Path to the YAML config; must set `model`.
        #[arg(long)]
        config: PathBuf,
        /// Override a config value by dotted path, e.g.
        /// `--set trainer.epochs=3`. Values are parsed as YAML scalars.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the full default config for a model as YAML.
    Defaults {
        /// Registered model name, e.g. `textcnn` or `mdfend`.
        model: String,
    },
}

fn parse_set(spec: &str) -> Result<(Vec<String>, Value), ExecError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        ExecError::Config(format!("--set {spec:?}: expected KEY=VALUE"))
    })?;
    if path.is_empty() {
        return Err(ExecError::Config(format!("--set {spec:?}: empty key")));
    }
    let value: Value = serde_yaml::from_str(raw)
        .map_err(|e| ExecError::Config(format!("--set {spec:?}: bad value: {e}")))?;
    Ok((path.split('.').map(str::to_string).collect(), value))
}

fn insert_path(map: &mut Mapping, path: &[String], value: Value) -> Result<(), ExecError> {
    let (head, rest) = path.split_first().expect("path is non-empty");
    let key = Value::String(head.clone());
    if rest.is_empty() {
        map.insert(key, value);
        return Ok(());
    }
    let entry = map
        .entry(key)
        .or_insert_with(|| Value::Mapping(Mapping::new()));
    match entry {
        Value::Mapping(inner) => insert_path(inner, rest, value),
        other => Err(ExecError::Config(format!(
            "--set path segment {head:?} conflicts with non-mapping value {other:?}"
        ))),
    }
}

fn execute(cli: Cli) -> Result<(), ExecError> {
    match cli.command {
        Command::Run { config, set } => {
            let raw = std::fs::read_to_string(&config)?;
            let parsed: Value = serde_yaml::from_str(&raw)
                .map_err(|e| ExecError::Config(format!("{}: {e}", config.display())))?;
            let mut overrides = match parsed {
                Value::Mapping(m) => m,
                other => {
                    return Err(ExecError::Config(format!(
                        "{}: expected a mapping at the top level, got {other:?}",
                        config.display()
                    )))
                }
            };
            for spec in &set {
                let (path, value) = parse_set(spec)?;
                insert_path(&mut overrides, &path, value)?;
            }
            let outcome = run_with_overrides(overrides)?;
            println!("output_dir: {}", outcome.output_dir.display());
            if !outcome.metrics.is_empty() {
                println!("test: {}", outcome.metrics);
            }
            Ok(())
        }
        Command::Defaults { model } => {
            let defaults = default_params(&model)?;
            print!(
                "{}",
                serde_yaml::to_string(&Value::Mapping(defaults)).expect("defaults serialize")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
