use clap::Parser;
use tentspace_harness::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(report) => print!("{}", report.summary()),
        Err(e) => eprintln!("error: {e:#}"),
    }
    std::process::exit(exit_code(&result));
}
