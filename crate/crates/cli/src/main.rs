mod cli;
mod commands;
mod error;
mod output;
mod schema;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use cli::{Cli, Command, EmbedCommand, SynthCommand};
use error::{exit, CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let seed = cli.seed;
    match cli.command.as_ref().expect("checked by main") {
        Command::Synth(SynthCommand::Slides(c)) => commands::synth_slides(c, seed),
        Command::Synth(SynthCommand::Topics(c)) => commands::synth_topics(c, seed),
        Command::Embed(EmbedCommand::Train(c)) => commands::embed_train(c, seed),
        Command::Train(c) => commands::train(c, seed),
        Command::Predict(c) => commands::predict(c, seed),
        Command::Eval(c) => commands::eval(c, seed),
        Command::Cluster(c) => commands::cluster(c, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => exit::USAGE,
                _ => exit::USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };

    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(kind) = cli.schema {
        println!("{}", schema::schema_text(kind));
        return ExitCode::SUCCESS;
    }
    if cli.command.is_none() {
        let _ = Cli::command().print_help();
        return ExitCode::from(exit::USAGE as u8);
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(exit::CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start the thread pool: {e}");
            return ExitCode::from(exit::INTERNAL as u8);
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &CliError) {
    eprintln!("error: {e}");
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        // Io already prints its source inline
        if !matches!(e, CliError::Io { .. } | CliError::Core(linesift::Error::Io { .. })) {
            eprintln!("  caused by: {s}");
        }
        src = s.source();
    }
}
