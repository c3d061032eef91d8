use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use qca_lattice_cli::{long_version, run, Cli};

fn main() -> ExitCode {
    let version: &'static str = Box::leak(long_version().into_boxed_str());
    let matches = Cli::command().long_version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcalat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
