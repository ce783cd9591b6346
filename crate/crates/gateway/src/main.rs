use clap::Parser;

fn main() {
    let cli = augmath_gateway::cli::Cli::parse();
    let code = augmath_gateway::cli::run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
