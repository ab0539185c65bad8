fn main() {
    std::process::exit(hrcp_cli::cli_main(std::env::args_os()));
}
