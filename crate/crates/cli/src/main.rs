use clap::Parser;

fn main() -> std::process::ExitCode {
    verdict_cli::main_with(verdict_cli::Cli::parse())
}
