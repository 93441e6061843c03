use clap::Parser;

fn main() {
    let cli = trig_qc::cli::Cli::parse();
    std::process::exit(trig_qc::cli::run(&cli));
}
