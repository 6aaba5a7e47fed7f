fn main() {
    std::process::exit(gibbsd::cli::cli_main(std::env::args_os()));
}
