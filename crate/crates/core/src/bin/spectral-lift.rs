fn main() {
    std::process::exit(spectral_lift::cli::run(std::env::args_os()));
}
