use clap::Parser;

fn main() {
    let cli = qkfp::cli::Cli::parse();
    if let Err(e) = qkfp::cli::init_threads().and_then(|_| qkfp::cli::run(&cli)) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
