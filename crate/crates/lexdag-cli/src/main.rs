use clap::Parser;

use lexdag_cli::args::{Cli, Command};
use lexdag_cli::commands::{cmd_bench, cmd_gen, cmd_run, cmd_verify};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
