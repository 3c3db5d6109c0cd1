use clap::Parser;

fn main() {
    let cli = saccade::cli::Cli::parse();
    if let Err(err) = saccade::cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
