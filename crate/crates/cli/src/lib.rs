//! Command-line front end.
//!
//! Exit codes: 0 success, 1 parameter or usage problems, 2 numerical
//! failures or divergence, 3 verification failure.

mod args;
mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgMatches, CommandFactory, FromArgMatches};
use erelab::error::{Error, Result};

use args::{Cli, Command};

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(matches) => matches,
        Err(e) => {
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { 1 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    match dispatch(cli, &matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn subcommand<'a>(matches: &'a ArgMatches, name: &str) -> &'a ArgMatches {
    matches
        .subcommand_matches(name)
        .expect("dispatch is only reached for the parsed subcommand")
}

fn dispatch(cli: Cli, matches: &ArgMatches) -> Result<i32> {
    match cli.command {
        Command::Profile(mut profile) => {
            args::merge_profile(&mut profile, subcommand(matches, "profile"))?;
            let text = commands::cmd_profile(&profile)?;
            emit(&profile.output, &text)?;
            Ok(0)
        }
        Command::Bound(mut bound) => {
            args::merge_bound(&mut bound, subcommand(matches, "bound"))?;
            let text = commands::cmd_bound(&bound)?;
            emit(&None, &text)?;
            Ok(0)
        }
        Command::Train(mut train) => {
            args::merge_train(&mut train, subcommand(matches, "train"))?;
            let text = commands::cmd_train(&train)?;
            emit(&train.output, &text)?;
            Ok(0)
        }
        Command::Verify(verify) => {
            let (text, all_passed) = commands::cmd_verify(&verify)?;
            print!("{text}");
            Ok(if all_passed { 0 } else { 3 })
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::parameter(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Format(_) | Error::Io(_) => 1,
        Error::Numerical(_) | Error::Divergence { .. } | Error::Sampling(_) | Error::Ordering { .. } => 2,
    }
}
