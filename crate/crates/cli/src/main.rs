mod cli;
mod commands;
mod error;
mod manifest;
mod parse;
mod validate;

use std::io::Write;
use std::process::ExitCode;

use chrono::Utc;
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use cli::{Cli, Command, ValidateArgs};
use commands::Output;
use error::{CliError, CliResult};
use manifest::RunManifest;

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Transform(_) => "transform",
        Command::Density(_) => "density",
        Command::Identity(_) => "identity",
        Command::Mc(_) => "mc",
        Command::Images(_) => "images",
        Command::Asym(_) => "asym",
        Command::Validate(_) => "validate",
    }
}

fn validate_cmd(a: &ValidateArgs, seed: u64) -> CliResult<Output> {
    if a.list {
        let list: Vec<_> = validate::SCENARIOS
            .iter()
            .map(|s| json!({ "name": s.name, "description": s.about }))
            .collect();
        return Ok(Output {
            stdout: serde_json::to_string_pretty(&list).expect("JSON serializes") + "\n",
            ..Default::default()
        });
    }
    let name = a.scenario.as_deref().expect("clap requires a scenario");
    let scenario = validate::find(name)?;
    let n_paths = a.n.as_deref().map(parse::count).transpose()?;
    let (passed, report) = validate::run(scenario, &validate::Ctx { seed, n_paths })?;
    let body = serde_json::to_string_pretty(&report).expect("JSON serializes") + "\n";
    Ok(Output {
        files: vec![("validation.json".into(), body.clone())],
        stdout: body,
        inputs: json!({ "scenario": name, "n": n_paths }),
        seed: Some(seed),
        passed: Some(passed),
    })
}

fn execute(cli: &Cli, argv: Vec<String>) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot set up {n} threads: {e}")))?;
    }
    if let Some(dir) = &cli.cache_dir {
        fpt_core::specfun::cache::set_cache_dir(Some(dir.clone()));
    }
    let started = Utc::now();
    let out = match &cli.command {
        Command::Transform(a) => commands::transform(a),
        Command::Density(a) => commands::density(a),
        Command::Identity(a) => commands::identity(a),
        Command::Mc(a) => commands::mc(a, cli.seed),
        Command::Images(a) => commands::images(a),
        Command::Asym(a) => commands::asym(a),
        Command::Validate(a) => validate_cmd(a, cli.seed),
    }?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(out.stdout.as_bytes())?;
    if let Some(dir) = &cli.out_dir {
        let digests = manifest::write_outputs(dir, &out.files)?;
        let m = RunManifest {
            command: command_name(&cli.command).into(),
            argv,
            inputs: out.inputs,
            seed: out.seed,
            started,
            finished: Utc::now(),
            outputs: digests,
        };
        manifest::write_manifest(dir, &m)?;
    }
    match out.passed {
        Some(false) => Err(CliError::Validation(format!(
            "scenario '{}' exceeded its tolerance",
            command_scenario(&cli.command)
        ))),
        _ => Ok(()),
    }
}

fn command_scenario(c: &Command) -> String {
    match c {
        Command::Validate(a) => a.scenario.clone().unwrap_or_default(),
        _ => String::new(),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::usage(e.render().to_string().trim_end())),
    };
    match execute(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
