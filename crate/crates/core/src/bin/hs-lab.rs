fn main() {
    std::process::exit(hunter_saxton::cli::cli_main(std::env::args_os()));
}
