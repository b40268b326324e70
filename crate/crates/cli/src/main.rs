use clap::Parser;
use irlv_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            for out in &manifest.outputs {
                println!("{}  {}", out.sha256, out.file);
            }
        }
        Err(e) => {
            eprintln!("irlv {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
