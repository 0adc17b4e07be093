use clap::Parser;

fn main() {
    let cli = htldp_cli::Cli::parse();
    if let Err(e) = htldp_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
