use clap::{Args, Parser, Subcommand};
use resolute_cli::{run, Format, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "resolute", version, about = "Assurance case engine for architecture models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove every directive in a model and emit the assurance cases.
    Check(CheckArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Model file to check.
    model: PathBuf,
    /// Rule library, loadable repeatedly; order fixes clause order.
    #[arg(long = "lib", value_name = "FILE")]
    lib: Vec<PathBuf>,
    /// Output format for assurance cases.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write cases to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Stop proving after the first failed case.
    #[arg(long)]
    fail_fast: bool,
    /// Seconds before an external computation is killed.
    #[arg(long, value_name = "SECS")]
    timeout: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check(args) => {
            let config = RunConfig {
                model_path: args.model,
                library_paths: args.lib,
                format: args.format,
                output: args.output,
                fail_fast: args.fail_fast,
                external_timeout: args.timeout,
            };
            let mut out = std::io::stdout().lock();
            let mut err = std::io::stderr().lock();
            run(&config, &mut out, &mut err)
        }
    };
    std::process::exit(code);
}
