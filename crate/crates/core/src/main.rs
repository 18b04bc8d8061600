use clap::Parser;

fn main() {
    let cli = bubblestrip::cli::Cli::parse();
    std::process::exit(bubblestrip::cli::main_with(cli));
}
