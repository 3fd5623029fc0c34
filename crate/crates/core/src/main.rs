fn main() {
    std::process::exit(contrast_lab::cli::run(std::env::args_os()));
}
