fn main() {
    std::process::exit(fracdim_cli::run(std::env::args_os()));
}
