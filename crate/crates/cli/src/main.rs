//! `tmod`: special functions, residues, periods and pole-order filtrations of
//! Anderson `F_q[t]`-modules, and the verification suite.
//!
//! Exit codes: 0 all checks pass, 1 a check failed or a computation could not
//! reach the required precision, 2 usage or configuration error.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Flags, RunConfig};
use crate::report::Report;

#[derive(Parser, Debug)]
#[command(name = "tmod", version, about = "Special functions of Anderson F_q[t]-modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// The Anderson-Thakur function: disk expansion, residue, functional equation.
    Omega,
    /// The Carlitz period and its membership in the period lattice.
    Period,
    /// Coefficients e_0..e_I of the exponential of --module.
    ExpCoeffs,
    /// Special function attached to --lambda and --u.
    Sf,
    /// Residues at theta of the standard special functions of --module.
    Residue,
    /// Pole-order filtration ranks and jumps for --module.
    Filtration,
    /// Run the full acceptance suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Omega => "omega",
            Command::Period => "period",
            Command::ExpCoeffs => "exp-coeffs",
            Command::Sf => "sf",
            Command::Residue => "residue",
            Command::Filtration => "filtration",
            Command::Verify => "verify",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(&cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut rep = Report::new(cli.command.name(), cfg.echo());
    let outcome = match cli.command {
        Command::Omega => commands::omega(&cfg, &mut rep),
        Command::Period => commands::period(&cfg, &mut rep),
        Command::ExpCoeffs => commands::exp_coeffs(&cfg, &mut rep),
        Command::Sf => commands::sf(&cfg, &mut rep),
        Command::Residue => commands::residue(&cfg, &mut rep),
        Command::Filtration => commands::filtration(&cfg, &mut rep),
        Command::Verify => commands::verify(&cfg, &mut rep),
    };
    if let Err(e) = outcome {
        rep.fail(e);
    }
    rep.finish();
    print!("{}", rep.render());
    if let Some(path) = &cli.flags.json {
        let text = serde_json::to_string_pretty(&rep).expect("report serializes");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if rep.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
