fn main() {
    std::process::exit(latentstep::cli::run(std::env::args_os()));
}
