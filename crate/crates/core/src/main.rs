fn main() {
    std::process::exit(walkfit::cli::cli_main(std::env::args_os()));
}
