fn main() {
    std::process::exit(hiermc_cli::cli_main(std::env::args_os()));
}
