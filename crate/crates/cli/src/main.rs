use clap::Parser;

fn main() {
    let cli = lrp_cli::Cli::parse();
    match lrp_cli::run(cli) {
        Ok(dir) => println!("{}", dir.display()),
        Err(e) => {
            eprintln!("lrp-lab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
