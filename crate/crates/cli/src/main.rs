fn main() {
    std::process::exit(cis_cli::run(std::env::args_os()));
}
