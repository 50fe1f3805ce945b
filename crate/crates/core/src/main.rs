fn main() {
    std::process::exit(mixpolar_core::cli::run(std::env::args_os()));
}
