use clap::Parser;
use helmholtz_dtn::cli::{self, Cli};

fn main() {
    let code = match Cli::try_parse() {
        Ok(c) => cli::run(c),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                cli::EXIT_CONFIG
            } else {
                cli::EXIT_OK
            }
        }
    };
    std::process::exit(code);
}
