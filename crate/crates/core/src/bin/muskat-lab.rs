fn main() {
    std::process::exit(muskat_lab::cli::run(std::env::args_os()));
}
