use clap::Parser;
use qnls::cli::{run, Cli};
use qnls::Error;

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            for f in outcome.files() {
                println!("wrote {} ({} rows)", f.path.display(), f.rows);
            }
            println!("manifest {}", outcome.manifest_path.display());
        }
        Err(e) => {
            eprintln!("qnls: {e}");
            let code = match e {
                Error::Config { .. } | Error::Parameter(_) | Error::Regime(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}
