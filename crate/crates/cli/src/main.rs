use std::io::Write;

use clap::Parser;

fn main() {
    let cli = dcongr_cli::Cli::parse();
    let out = dcongr_cli::run(&cli);
    print!("{}", out.stdout);
    if !cli.json {
        eprint!("{}", out.stderr);
    }
    std::io::stdout().flush().ok();
    std::process::exit(out.code);
}
