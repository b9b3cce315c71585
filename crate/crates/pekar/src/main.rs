use clap::Parser;

fn main() {
    // clap's own usage errors already exit with 2
    let cli = pekar::Cli::parse();
    std::process::exit(pekar::run(&cli));
}
